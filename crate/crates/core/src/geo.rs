//! Offline host-to-country resolution.
//!
//! Table file: one `<host-suffix> <ISO-3166 alpha-2 | UNKNOWN>` per line.
//! A suffix matches a host equal to it or ending in `.<suffix>`; the
//! longest matching suffix wins. IP-literal hosts match exact entries only.

use std::collections::BTreeMap;
use std::fmt;
use std::net::IpAddr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum Region {
    Country(String),
    Unknown,
}

impl From<Region> for String {
    fn from(r: Region) -> String {
        r.to_string()
    }
}

impl From<String> for Region {
    fn from(s: String) -> Region {
        if s == "UNKNOWN" {
            Region::Unknown
        } else {
            Region::Country(s)
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Country(c) => f.write_str(c),
            Region::Unknown => f.write_str("UNKNOWN"),
        }
    }
}

/// Anything that can place a host in a country.
pub trait GeoResolver: Sync {
    fn resolve(&self, host: &str) -> Region;
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeoTable {
    entries: BTreeMap<String, Region>,
}

impl GeoTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |reason: String| Error::parse("geo table", line, reason);
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [suffix, code] = fields.as_slice() else {
                return Err(err(format!("expected `<host-suffix> <country>`, got `{content}`")));
            };
            let region = if *code == "UNKNOWN" {
                Region::Unknown
            } else if code.len() == 2 && code.chars().all(|c| c.is_ascii_uppercase()) {
                Region::Country(code.to_string())
            } else {
                return Err(err(format!("`{code}` is not an ISO alpha-2 code or UNKNOWN")));
            };
            let suffix = suffix.trim_start_matches('.').to_ascii_lowercase();
            if let Some(prev) = entries.insert(suffix.clone(), region.clone()) {
                if prev != region {
                    return Err(err(format!("{suffix} mapped to both {prev} and {region}")));
                }
            }
        }
        Ok(GeoTable { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The matching entry with the longest suffix, if any.
    pub fn lookup(&self, host: &str) -> Option<(&str, &Region)> {
        let host = host.trim_end_matches('.').to_ascii_lowercase();
        if is_ip_literal(&host) {
            return self.entries.get_key_value(&host).map(|(k, v)| (k.as_str(), v));
        }
        // Walk label boundaries from the full host down to the last label.
        let mut candidate = host.as_str();
        loop {
            if let Some((k, v)) = self.entries.get_key_value(candidate) {
                return Some((k.as_str(), v));
            }
            match candidate.split_once('.') {
                Some((_, rest)) => candidate = rest,
                None => return None,
            }
        }
    }
}

impl GeoResolver for GeoTable {
    fn resolve(&self, host: &str) -> Region {
        self.lookup(host).map_or(Region::Unknown, |(_, r)| r.clone())
    }
}

fn is_ip_literal(host: &str) -> bool {
    host.trim_start_matches('[').trim_end_matches(']').parse::<IpAddr>().is_ok()
}

/// Lowercase host of an http(s) URL, without port or path.
pub fn extract_host(raw: &str) -> Result<String> {
    let malformed = || Error::MalformedUrl(raw.to_string());
    let lower = raw.trim().to_ascii_lowercase();
    if !(lower.starts_with("http://") || lower.starts_with("https://")) {
        return Err(malformed());
    }
    let parsed = url::Url::parse(raw.trim()).map_err(|_| malformed())?;
    match parsed.host() {
        Some(url::Host::Domain(d)) if !d.is_empty() => Ok(d.to_ascii_lowercase()),
        Some(url::Host::Ipv4(ip)) => Ok(ip.to_string()),
        Some(url::Host::Ipv6(ip)) => Ok(ip.to_string()),
        _ => Err(malformed()),
    }
}

pub fn resolve_country(host: &str, table: &GeoTable) -> Region {
    table.resolve(host)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn host_extraction() {
        assert_eq!(extract_host("https://KS.Example.ORG:443/v1/keys").unwrap(), "ks.example.org");
        assert_eq!(extract_host("http://10.0.0.5/x").unwrap(), "10.0.0.5");
        assert!(matches!(extract_host("ftp://x"), Err(Error::MalformedUrl(_))));
        assert!(extract_host("http://").is_err());
    }

    #[test]
    fn resolution() {
        let t = GeoTable::parse("example.de DE\n").unwrap();
        assert_eq!(resolve_country("en.example.de", &t), Region::Country("DE".into()));
        assert_eq!(resolve_country("example.com", &t), Region::Unknown);
        assert_eq!(resolve_country("notexample.de", &t), Region::Unknown);

        let t = GeoTable::parse("example.org US\nks.example.org DE\n").unwrap();
        assert_eq!(resolve_country("ks.example.org", &t), Region::Country("DE".into()));
        assert_eq!(resolve_country("a.ks.example.org", &t), Region::Country("DE".into()));
        assert_eq!(resolve_country("www.example.org", &t), Region::Country("US".into()));
    }

    #[test]
    fn ip_literals_are_exact() {
        let t = GeoTable::parse("0.0.5 DE\n10.0.0.5 IE\n").unwrap();
        assert_eq!(t.resolve("10.0.0.5"), Region::Country("IE".into()));
        assert_eq!(t.resolve("10.10.0.5"), Region::Unknown);
    }

    #[test]
    fn table_errors() {
        assert!(GeoTable::parse("example.de Germany").is_err());
        assert!(GeoTable::parse("example.de DE\nexample.de FR").is_err());
        assert!(GeoTable::parse("example.de DE\nexample.de DE").is_ok());
        assert_eq!(GeoTable::parse("x.org UNKNOWN").unwrap().resolve("a.x.org"), Region::Unknown);
    }
}
