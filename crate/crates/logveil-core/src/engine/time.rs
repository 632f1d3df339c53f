//! Timestamp anonymization: unit annihilation, random shift and
//! secondary-timestamp adjustment.
//!
//! Canonical timestamps are epoch seconds; annihilation converts to a UTC
//! calendar breakdown, floors the selected units and converts back.

use crate::error::EngineError;
use chrono::{Datelike, TimeZone, Timelike, Utc};
use rand::Rng;

/// Which calendar subfields to annihilate. Annihilating every unit lands on
/// epoch 0, a black marker on the timestamp.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TimeUnitMask {
    pub year: bool,
    pub month: bool,
    pub day: bool,
    pub hour: bool,
    pub minute: bool,
    pub second: bool,
}

impl TimeUnitMask {
    pub fn all() -> TimeUnitMask {
        TimeUnitMask {
            year: true,
            month: true,
            day: true,
            hour: true,
            minute: true,
            second: true,
        }
    }

    pub fn any(&self) -> bool {
        self.year || self.month || self.day || self.hour || self.minute || self.second
    }

    /// Parse a comma-separated unit list (`"hour,minute,second"` or `"all"`).
    pub fn parse(text: &str) -> Result<TimeUnitMask, String> {
        let mut mask = TimeUnitMask::default();
        for token in text.split(',') {
            match token.trim() {
                "year" => mask.year = true,
                "month" => mask.month = true,
                "day" => mask.day = true,
                "hour" => mask.hour = true,
                "minute" => mask.minute = true,
                "second" => mask.second = true,
                "all" => mask = TimeUnitMask::all(),
                "" => {}
                other => return Err(format!("unknown time unit {other:?}")),
            }
        }
        if !mask.any() {
            return Err("no time units selected".to_string());
        }
        Ok(mask)
    }
}

/// Floor the selected calendar subfields: hour, minute and second to 0;
/// month and day to 1; year to 1970. When flooring year or month leaves an
/// impossible day-of-month (Feb 29 outside a leap year), the day clamps to
/// the month's last valid day.
pub fn annihilate_time_units(ts: u64, mask: TimeUnitMask) -> Result<u64, EngineError> {
    let signed = i64::try_from(ts).map_err(|_| EngineError::TimestampOutOfCalendarRange { ts })?;
    let dt = Utc
        .timestamp_opt(signed, 0)
        .single()
        .ok_or(EngineError::TimestampOutOfCalendarRange { ts })?;

    let year = if mask.year { 1970 } else { dt.year() };
    let month = if mask.month { 1 } else { dt.month() };
    let mut day = if mask.day { 1 } else { dt.day() };
    let hour = if mask.hour { 0 } else { dt.hour() };
    let minute = if mask.minute { 0 } else { dt.minute() };
    let second = if mask.second { 0 } else { dt.second() };

    day = day.min(days_in_month(year, month));
    let rebuilt = Utc
        .with_ymd_and_hms(year, month, day, hour, minute, second)
        .single()
        .ok_or(EngineError::TimestampOutOfCalendarRange { ts })?;
    u64::try_from(rebuilt.timestamp()).map_err(|_| EngineError::TimestampOutOfCalendarRange { ts })
}

fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 => {
            if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 {
                29
            } else {
                28
            }
        }
        _ => 31,
    }
}

/// The shift chosen for a run: one signed delta applied to every timestamp,
/// so differences between events stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftState {
    delta: i64,
    lower: i64,
    upper: i64,
}

impl ShiftState {
    pub fn delta(&self) -> i64 {
        self.delta
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lower, self.upper)
    }
}

/// Draw the run's shift uniformly from `[lower, upper]`. Equal bounds pin
/// the shift exactly, which keeps mappings consistent between runs.
pub fn choose_shift(
    lower: i64,
    upper: i64,
    rng: &mut impl Rng,
) -> Result<ShiftState, EngineError> {
    if lower > upper {
        return Err(EngineError::ShiftBoundsInverted { lower, upper });
    }
    let delta = rng.gen_range(lower..=upper);
    Ok(ShiftState {
        delta,
        lower,
        upper,
    })
}

/// Apply the run's shift. Results must stay inside the 32-bit epoch range
/// so emitted logs cannot wrap around back to 1970.
pub fn shift_time(state: &ShiftState, ts: u64) -> Result<u64, EngineError> {
    apply_delta(ts, state.delta)
}

/// Move a paired timestamp by the same delta its primary moved, keeping the
/// difference between the two fields (e.g. a flow duration) exact.
pub fn adjust_secondary_timestamp(delta: i64, secondary: u64) -> Result<u64, EngineError> {
    apply_delta(secondary, delta)
}

fn apply_delta(ts: u64, delta: i64) -> Result<u64, EngineError> {
    let shifted = i128::from(ts) + i128::from(delta);
    if shifted < 0 || shifted > i128::from(u32::MAX) {
        return Err(EngineError::TimestampOverflow { ts, delta });
    }
    Ok(shifted as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn hms() -> TimeUnitMask {
        TimeUnitMask {
            hour: true,
            minute: true,
            second: true,
            ..TimeUnitMask::default()
        }
    }

    #[test]
    fn floors_time_of_day() {
        // 2006-03-15 14:22:31 UTC -> 2006-03-15 00:00:00 UTC.
        assert_eq!(annihilate_time_units(1142432551, hms()).unwrap(), 1142380800);
    }

    #[test]
    fn all_units_is_black_marker() {
        assert_eq!(annihilate_time_units(1142432551, TimeUnitMask::all()).unwrap(), 0);
        assert_eq!(annihilate_time_units(0, TimeUnitMask::all()).unwrap(), 0);
    }

    #[test]
    fn idempotent_at_midnight() {
        assert_eq!(annihilate_time_units(1142380800, hms()).unwrap(), 1142380800);
    }

    #[test]
    fn independent_calendar_cases() {
        // Values computed with an independent calendar tool.
        let year_only = TimeUnitMask {
            year: true,
            ..TimeUnitMask::default()
        };
        assert_eq!(annihilate_time_units(1142432551, year_only).unwrap(), 6358951);
        let month_day = TimeUnitMask {
            month: true,
            day: true,
            ..TimeUnitMask::default()
        };
        assert_eq!(
            annihilate_time_units(1142432551, month_day).unwrap(),
            1136125351
        );
    }

    #[test]
    fn leap_day_clamps_when_year_floors() {
        // 2024-02-29 12:00:00 UTC; 1970 has no Feb 29, so the day clamps.
        let ts = 1709208000;
        let year_only = TimeUnitMask {
            year: true,
            ..TimeUnitMask::default()
        };
        // 1970-02-28 12:00:00 UTC.
        assert_eq!(annihilate_time_units(ts, year_only).unwrap(), 5054400);
    }

    #[test]
    fn mask_parsing() {
        assert_eq!(TimeUnitMask::parse("hour,minute,second").unwrap(), hms());
        assert_eq!(TimeUnitMask::parse("all").unwrap(), TimeUnitMask::all());
        assert!(TimeUnitMask::parse("").is_err());
        assert!(TimeUnitMask::parse("fortnight").is_err());
    }

    #[test]
    fn equal_bounds_pin_the_shift() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = choose_shift(3600, 3600, &mut rng).unwrap();
        assert_eq!(s.delta(), 3600);
        let z = choose_shift(0, 0, &mut rng).unwrap();
        assert_eq!(z.delta(), 0);
    }

    #[test]
    fn drawn_shift_respects_bounds() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..100 {
            let s = choose_shift(-10, 10, &mut rng).unwrap();
            assert!((-10..=10).contains(&s.delta()));
        }
        assert!(matches!(
            choose_shift(5, 4, &mut rng),
            Err(EngineError::ShiftBoundsInverted { .. })
        ));
    }

    #[test]
    fn shift_applies_one_constant() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let s = choose_shift(3600, 3600, &mut rng).unwrap();
        assert_eq!(shift_time(&s, 1000).unwrap(), 4600);
        // Pairwise differences survive.
        let (start, end) = (1142432551u64, 1142436151u64);
        let diff = shift_time(&s, end).unwrap() - shift_time(&s, start).unwrap();
        assert_eq!(diff, end - start);
    }

    #[test]
    fn wraparound_prevented() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let s = choose_shift(-2000, -2000, &mut rng).unwrap();
        assert!(matches!(
            shift_time(&s, 1000),
            Err(EngineError::TimestampOverflow { .. })
        ));
        let s = choose_shift(3600, 3600, &mut rng).unwrap();
        assert!(matches!(
            shift_time(&s, u64::from(u32::MAX)),
            Err(EngineError::TimestampOverflow { .. })
        ));
    }

    #[test]
    fn secondary_moves_with_primary() {
        // Primary moved 100 -> 160; the pair keeps its 30-second spacing.
        assert_eq!(adjust_secondary_timestamp(60, 130).unwrap(), 190);
        assert_eq!(adjust_secondary_timestamp(0, 130).unwrap(), 130);
    }
}
