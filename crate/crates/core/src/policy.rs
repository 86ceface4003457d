//! Privacy-policy claims and the consistency check against findings.
//!
//! Claims file: one `claim <id> "<policy sentence>"` per line, where
//! `<id>` is `C1`..`C5` (optionally with its long suffix, e.g. `C1-no-pii`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detectors::{Finding, Severity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClaimId {
    /// Collects, stores and transmits no personally identifiable data.
    C1,
    /// Keeps exposure data on the device.
    C2,
    /// Prevents unauthorized access to local data.
    C3,
    /// Encrypts local data.
    C4,
    /// Talks only to trusted US servers over encrypted channels.
    C5,
}

impl ClaimId {
    pub const ALL: [ClaimId; 5] = [ClaimId::C1, ClaimId::C2, ClaimId::C3, ClaimId::C4, ClaimId::C5];

    pub fn long_name(self) -> &'static str {
        match self {
            ClaimId::C1 => "C1-no-pii",
            ClaimId::C2 => "C2-local-exposure-storage",
            ClaimId::C3 => "C3-no-unauthorized-access",
            ClaimId::C4 => "C4-encrypts-local",
            ClaimId::C5 => "C5-us-encrypted-servers",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ClaimId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClaimId::ALL
            .into_iter()
            .find(|c| s == c.to_string() || s == c.long_name())
            .ok_or_else(|| Error::UnknownClaim(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyClaims {
    /// Claim to the quoted policy sentence, if one was given.
    pub claims: BTreeMap<ClaimId, Option<String>>,
}

impl PolicyClaims {
    pub fn all() -> Self {
        PolicyClaims {
            claims: ClaimId::ALL.into_iter().map(|c| (c, None)).collect(),
        }
    }

    pub fn contains(&self, id: ClaimId) -> bool {
        self.claims.contains_key(&id)
    }
}

pub fn parse_claims(text: &str) -> Result<PolicyClaims> {
    let mut claims = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let rest = content
            .strip_prefix("claim ")
            .ok_or_else(|| Error::parse("claims", line, "expected `claim <id> \"<sentence>\"`"))?
            .trim();
        let (id, sentence) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let id: ClaimId = id.parse()?;
        let sentence = sentence.trim();
        let sentence = if sentence.is_empty() {
            None
        } else {
            Some(
                sentence
                    .strip_prefix('"')
                    .and_then(|s| s.strip_suffix('"'))
                    .ok_or_else(|| Error::parse("claims", line, "policy sentence must be quoted"))?
                    .to_string(),
            )
        };
        if claims.insert(id, sentence).is_some() {
            return Err(Error::parse("claims", line, format!("{id} listed twice")));
        }
    }
    if claims.is_empty() {
        return Err(Error::EmptyPolicy);
    }
    Ok(PolicyClaims { claims })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Violated,
}

/// A claim contradicted by at least one finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub claim: ClaimId,
    /// Ids of the contradicting findings; never empty.
    pub findings: Vec<String>,
    pub verdict: Verdict,
}

/// Findings of severity warning or above contradict every policy claim
/// their rule is tagged with. Records come back in claim order.
pub fn check_compliance(claims: &PolicyClaims, findings: &[Finding]) -> Vec<ViolationRecord> {
    let mut by_claim: BTreeMap<ClaimId, Vec<String>> = BTreeMap::new();
    for f in findings.iter().filter(|f| f.severity >= Severity::Warning) {
        for c in &f.claims {
            if claims.contains(*c) {
                by_claim.entry(*c).or_default().push(f.id.clone());
            }
        }
    }
    by_claim
        .into_iter()
        .map(|(claim, findings)| ViolationRecord {
            claim,
            findings,
            verdict: Verdict::Violated,
        })
        .collect()
}

/// True when the app violates its policy.
pub fn policy_verdict(records: &[ViolationRecord]) -> bool {
    !records.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_variants() {
        let all = parse_claims(
            "claim C1 \"does not collect PII\"\nclaim C2\nclaim C3-no-unauthorized-access\nclaim C4\nclaim C5\n",
        )
        .unwrap();
        assert_eq!(all.claims.len(), 5);
        assert_eq!(all.claims[&ClaimId::C1].as_deref(), Some("does not collect PII"));
        let one = parse_claims("claim C4").unwrap();
        assert_eq!(one.claims.keys().copied().collect::<Vec<_>>(), [ClaimId::C4]);
        assert!(matches!(parse_claims("claim C9"), Err(Error::UnknownClaim(id)) if id == "C9"));
        assert!(matches!(parse_claims("# nothing\n"), Err(Error::EmptyPolicy)));
        assert!(parse_claims("claim C1\nclaim C1").is_err());
        assert!(parse_claims("claim C1 unquoted").is_err());
    }

    #[test]
    fn empty_records_are_compliant() {
        assert!(!policy_verdict(&[]));
        assert!(check_compliance(&PolicyClaims::all(), &[]).is_empty());
    }
}
