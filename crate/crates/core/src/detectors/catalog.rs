//! The detector rule catalog.
//!
//! ```text
//! rule <ID> <severity> [claims=<C..>] [columns=<col,..>] "<title>"
//! param <ID> <key> <value>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::Severity;
use crate::error::{Error, Result};
use crate::flow::Pattern;
use crate::policy::ClaimId;

const BUNDLED: &str = include_str!("../../data/rules.catalog");
const FILE: &str = "rules.catalog";

/// Rules this build implements, in canonical order, with the parameter
/// keys each accepts.
pub const KNOWN_RULES: &[(&str, &[&str])] = &[
    ("D-LOC-LIB", &["library", "call"]),
    ("D-BIOMETRIC", &["permission", "call"]),
    ("D-EXT-STORAGE", &["sink-category"]),
    ("D-WEAK-CIPHER", &["call", "default-mode", "weak-prefix"]),
    ("D-HTTP", &["scheme"]),
    ("D-NONUS-SERVER", &["home"]),
    ("V-UNPROT-COMPONENT", &["protected"]),
    ("V-INSECURE-PRNG", &["call"]),
    ("V-WEAK-HASH", &["call", "weak"]),
    ("V-BACKUP", &[]),
    ("V-TLS-TRUSTALL", &["method", "validator"]),
    ("V-NO-PINNING", &["call"]),
    ("R-SQLI", &["call"]),
    ("R-CLEARTEXT", &["keyword"]),
    ("R-LOG-SENSITIVE", &["keyword"]),
    ("R-JANUS", &[]),
];

/// Report columns a rule contributes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Column {
    CollectsLocation,
    InsecureStorage,
    WeakEncryption,
    UsesHttp,
    NonUsServer,
    UnprotectedComponent,
    InsecurePrng,
    WeakHashing,
    DataBackup,
    InsecureSsl,
    NoPinning,
    FpSqlInjection,
    FpUnprotectedComponent,
    FpCleartextStorage,
    FpLogSensitive,
    FpJanus,
}

impl Column {
    pub const VIOLATIONS: [Column; 5] = [
        Column::CollectsLocation,
        Column::InsecureStorage,
        Column::WeakEncryption,
        Column::UsesHttp,
        Column::NonUsServer,
    ];
    pub const VULNERABILITIES: [Column; 6] = [
        Column::UnprotectedComponent,
        Column::InsecurePrng,
        Column::WeakHashing,
        Column::DataBackup,
        Column::InsecureSsl,
        Column::NoPinning,
    ];
    pub const FALSE_POSITIVES: [Column; 5] = [
        Column::FpSqlInjection,
        Column::FpUnprotectedComponent,
        Column::FpCleartextStorage,
        Column::FpLogSensitive,
        Column::FpJanus,
    ];

    pub fn all() -> impl Iterator<Item = Column> {
        Self::VIOLATIONS
            .into_iter()
            .chain(Self::VULNERABILITIES)
            .chain(Self::FALSE_POSITIVES)
    }

    pub fn name(self) -> &'static str {
        match self {
            Column::CollectsLocation => "collects-location",
            Column::InsecureStorage => "insecure-storage",
            Column::WeakEncryption => "weak-encryption",
            Column::UsesHttp => "uses-http",
            Column::NonUsServer => "non-us-server",
            Column::UnprotectedComponent => "unprotected-component",
            Column::InsecurePrng => "insecure-prng",
            Column::WeakHashing => "weak-hashing",
            Column::DataBackup => "data-backup",
            Column::InsecureSsl => "insecure-ssl",
            Column::NoPinning => "no-pinning",
            Column::FpSqlInjection => "fp-sql-injection",
            Column::FpUnprotectedComponent => "fp-unprotected-component",
            Column::FpCleartextStorage => "fp-cleartext-storage",
            Column::FpLogSensitive => "fp-log-sensitive",
            Column::FpJanus => "fp-janus",
        }
    }

    /// Human-readable header.
    pub fn title(self) -> &'static str {
        match self {
            Column::CollectsLocation => "Collects Location",
            Column::InsecureStorage => "Uses Insecure Storage",
            Column::WeakEncryption => "Uses Weak Encryption",
            Column::UsesHttp => "Uses HTTP",
            Column::NonUsServer => "Non-US Server",
            Column::UnprotectedComponent => "Unprotected Component",
            Column::InsecurePrng => "Insecure PRNG",
            Column::WeakHashing => "Weak Hashing",
            Column::DataBackup => "Allows Data Backup",
            Column::InsecureSsl => "Insecure SSL Impl.",
            Column::NoPinning => "No Certificate Pinning",
            Column::FpSqlInjection => "SQL Injection",
            Column::FpUnprotectedComponent => "Unprotected Component",
            Column::FpCleartextStorage => "Cleartext Storage",
            Column::FpLogSensitive => "Log Sensitive Data",
            Column::FpJanus => "Janus Signature",
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Column::all()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown column `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub severity: Severity,
    pub claims: Vec<ClaimId>,
    pub columns: Vec<Column>,
    pub title: String,
    pub params: BTreeMap<String, Vec<String>>,
}

impl Rule {
    pub fn param(&self, key: &str) -> &[String] {
        self.params.get(key).map_or(&[], Vec::as_slice)
    }

    /// Patterns under `key`; validated when the catalog was parsed.
    pub fn patterns(&self, key: &str) -> Vec<Pattern> {
        self.param(key)
            .iter()
            .map(|p| p.parse().expect("validated at parse time"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorCatalog {
    rules: Vec<Rule>,
}

impl DetectorCatalog {
    pub fn bundled() -> &'static DetectorCatalog {
        static CATALOG: OnceLock<DetectorCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| DetectorCatalog::parse(BUNDLED).expect("bundled rule catalog parses"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rules: BTreeMap<String, Rule> = BTreeMap::new();
        let mut params: Vec<(usize, String, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let err = |reason: String| Error::parse(FILE, line, reason);
            if let Some(rest) = content.strip_prefix("rule ") {
                let rule = parse_rule(rest).map_err(err)?;
                if !KNOWN_RULES.iter().any(|(id, _)| *id == rule.id) {
                    return Err(err(format!("no detector implements `{}`", rule.id)));
                }
                if rules.contains_key(&rule.id) {
                    return Err(err(format!("rule `{}` defined twice", rule.id)));
                }
                rules.insert(rule.id.clone(), rule);
            } else if let Some(rest) = content.strip_prefix("param ") {
                let mut it = rest.split_whitespace();
                match (it.next(), it.next(), it.next(), it.next()) {
                    (Some(id), Some(key), Some(value), None) => {
                        params.push((line, id.into(), key.into(), value.into()))
                    }
                    _ => return Err(err("expected `param <ID> <key> <value>`".into())),
                }
            } else {
                return Err(err(format!("unrecognized line `{content}`")));
            }
        }
        for (line, id, key, value) in params {
            let err = |reason: String| Error::parse(FILE, line, reason);
            let rule = rules
                .get_mut(&id)
                .ok_or_else(|| err(format!("param for undefined rule `{id}`")))?;
            let keys = KNOWN_RULES.iter().find(|(r, _)| *r == id).map_or(&[][..], |(_, k)| k);
            if !keys.contains(&key.as_str()) {
                return Err(err(format!("`{id}` takes no parameter `{key}`")));
            }
            if matches!(key.as_str(), "call" | "validator") {
                value.parse::<Pattern>().map_err(err)?;
            }
            rule.params.entry(key).or_default().push(value);
        }
        let mut rules: Vec<Rule> = rules.into_values().collect();
        rules.sort_by_key(|r| rule_rank(&r.id));
        Ok(DetectorCatalog { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn get(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn columns_of(&self, id: &str) -> &[Column] {
        self.get(id).map_or(&[], |r| r.columns.as_slice())
    }

    /// Rules feeding a column, in canonical order.
    pub fn rules_for(&self, column: Column) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.columns.contains(&column))
    }

    pub fn claims(&self) -> BTreeSet<ClaimId> {
        self.rules.iter().flat_map(|r| r.claims.iter().copied()).collect()
    }
}

/// Position of a rule id in canonical order.
pub fn rule_rank(id: &str) -> usize {
    KNOWN_RULES
        .iter()
        .position(|(r, _)| *r == id)
        .unwrap_or(KNOWN_RULES.len())
}

fn parse_rule(rest: &str) -> std::result::Result<Rule, String> {
    let (head, title) = rest
        .split_once('"')
        .ok_or("rule title must be quoted")?;
    let title = title.strip_suffix('"').ok_or("unterminated rule title")?;
    let mut it = head.split_whitespace();
    let id = it.next().ok_or("missing rule id")?.to_string();
    let severity: Severity = it.next().ok_or("missing severity")?.parse()?;
    let mut rule = Rule {
        id,
        severity,
        claims: Vec::new(),
        columns: Vec::new(),
        title: title.to_string(),
        params: BTreeMap::new(),
    };
    for field in it {
        match field.split_once('=') {
            Some(("claims", v)) => {
                for c in v.split(',') {
                    rule.claims.push(c.parse().map_err(|e: Error| e.to_string())?);
                }
            }
            Some(("columns", v)) => {
                for c in v.split(',') {
                    rule.columns.push(c.parse()?);
                }
            }
            _ => return Err(format!("unexpected field `{field}`")),
        }
    }
    rule.claims.sort();
    rule.claims.dedup();
    Ok(rule)
}
