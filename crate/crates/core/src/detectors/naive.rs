//! Unrefined counterparts of the refined rules. They flag every
//! syntactic candidate and serve as the baseline the refined rules are
//! checked against.

use super::rules::{keyword_sites, matching_calls};
use super::{number, Analysis, Evidence, Finding, Severity};
use crate::manifest::effective_exported;
use crate::package::SigningScheme;

/// Findings of the naive rules for every refined rule in the catalog.
pub fn naive_findings(a: &Analysis<'_>) -> Vec<Finding> {
    let mut out = Vec::new();
    for rule in a.rules.rules() {
        let sev = Severity::Vulnerability;
        match rule.id.as_str() {
            "R-SQLI" => {
                for c in matching_calls(a, &rule.patterns("call")) {
                    out.push(
                        Finding::new(rule, sev, c.node(), format!("{} executes SQL", c.callee))
                            .with_evidence(Evidence::Site { site: c.node() }),
                    );
                }
            }
            "V-UNPROT-COMPONENT" => {
                let m = &a.pkg.manifest;
                for c in m.components.iter().filter(|c| effective_exported(c, a.era)) {
                    let class = c.qualified_class(&m.package_name);
                    out.push(
                        Finding::new(rule, sev, &class, format!("{class} is exported"))
                            .with_evidence(Evidence::Manifest(m.component_locus(c))),
                    );
                }
            }
            "R-CLEARTEXT" | "R-LOG-SENSITIVE" => {
                let apis = if rule.id == "R-CLEARTEXT" { &a.flows.stores } else { &a.flows.logs };
                for c in keyword_sites(a, apis, rule) {
                    out.push(
                        Finding::new(rule, sev, c.node(), format!("{} receives a sensitive-looking constant", c.callee))
                            .with_evidence(Evidence::Site { site: c.node() }),
                    );
                }
            }
            "R-JANUS" => {
                if let Some(s) = a.pkg.signing.as_ref().filter(|s| s.schemes.contains(&SigningScheme::V1)) {
                    out.push(
                        Finding::new(rule, sev, "signing", "carries a v1 signature").with_evidence(Evidence::Signing {
                            schemes: s.schemes.iter().copied().collect(),
                        }),
                    );
                }
            }
            _ => {}
        }
    }
    number(out)
}
