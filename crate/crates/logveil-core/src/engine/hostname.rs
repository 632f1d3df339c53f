//! Hostname black-marker anonymization.
//!
//! The host part is the text left of the first period; the domain is the
//! rest. Anonymization can replace just the host part or the whole name,
//! and the replacement constants are configurable.

/// Which portion of the hostname to replace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HostnameScope {
    /// Replace the host part, keep the domain of a fully qualified name.
    HostPart,
    /// Replace the entire name.
    Full,
}

/// Replace hostname content with constants. `host_const` substitutes the
/// host part, and for full-scope anonymization of a qualified name the
/// result is `host_const.net_const`; unqualified names become `host_const`
/// alone under either scope.
pub fn anonymize_hostname(
    host: &str,
    scope: HostnameScope,
    host_const: &str,
    net_const: &str,
) -> String {
    match scope {
        HostnameScope::HostPart => match host.find('.') {
            Some(dot) => format!("{host_const}{}", &host[dot..]),
            None => host_const.to_string(),
        },
        HostnameScope::Full => {
            if host.contains('.') {
                format!("{host_const}.{net_const}")
            } else {
                host_const.to_string()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unqualified_host_part() {
        assert_eq!(
            anonymize_hostname("vorlon", HostnameScope::HostPart, "host", "network.net"),
            "host"
        );
    }

    #[test]
    fn qualified_host_part_keeps_domain() {
        assert_eq!(
            anonymize_hostname(
                "vorlon.ncsa.uiuc.edu",
                HostnameScope::HostPart,
                "host",
                "network.net"
            ),
            "host.ncsa.uiuc.edu"
        );
    }

    #[test]
    fn full_scope_replaces_everything() {
        assert_eq!(
            anonymize_hostname(
                "vorlon.ncsa.uiuc.edu",
                HostnameScope::Full,
                "host",
                "network.net"
            ),
            "host.network.net"
        );
        assert_eq!(
            anonymize_hostname("vorlon", HostnameScope::Full, "host", "network.net"),
            "host"
        );
    }

    #[test]
    fn custom_constants() {
        assert_eq!(
            anonymize_hostname("db1.corp.example", HostnameScope::Full, "node", "redacted.org"),
            "node.redacted.org"
        );
        assert_eq!(
            anonymize_hostname("db1.corp.example", HostnameScope::HostPart, "node", ""),
            "node.corp.example"
        );
    }
}
