//! Rule engine: privacy-evidence (`D-*`), vulnerability (`V-*`) and
//! refined (`R-*`) detectors over a package and its flow graph.

mod catalog;
mod naive;
mod rules;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::{confirm_leak, FlowGraph, FlowPath, NodeRef, SourceSinkCatalog};
use crate::geo::GeoResolver;
use crate::manifest::{ManifestLocus, TargetEra};
use crate::package::{AppPackage, SigningScheme};
use crate::policy::ClaimId;
use crate::sir::{CodeUnit, Instruction, MethodBody, MethodId, Reg};

pub use catalog::{rule_rank, Column, DetectorCatalog, Rule, KNOWN_RULES};
pub use naive::naive_findings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Info,
    Warning,
    ViolationEvidence,
    Vulnerability,
}

impl Severity {
    pub fn name(self) -> &'static str {
        match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::ViolationEvidence => "violation-evidence",
            Severity::Vulnerability => "vulnerability",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Severity::Info,
            Severity::Warning,
            Severity::ViolationEvidence,
            Severity::Vulnerability,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| format!("unknown severity `{s}`"))
    }
}

/// Qualifier attached to a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Note {
    /// Bare "AES", which the platform runs in ECB mode.
    DefaultMode,
    /// `allowBackup` unset; the platform default is true.
    DefaultTrue,
    UnknownRegion,
    UnresolvedAlgorithm,
    SelfSignedPin,
    /// v1 signature kept next to v2/v3 for old platform versions.
    CompatibilityNote,
    PermissionOnly,
    CallWithoutPermission,
    NoSensitiveFlow,
    UnreferencedConstant,
    AppDefinedPermission,
}

/// What backs a finding. Each variant can be re-checked against the
/// package it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Evidence {
    Path(FlowPath),
    Manifest(ManifestLocus),
    Site { site: NodeRef },
    Unit { class_name: String, library: Option<String> },
    Signing { schemes: Vec<SigningScheme> },
}

impl Evidence {
    /// True when the evidence still holds for `pkg` and its graph.
    pub fn revalidate(&self, pkg: &AppPackage, g: &FlowGraph) -> bool {
        match self {
            Evidence::Path(p) => g.is_flow_path(&p.nodes),
            Evidence::Manifest(locus) => pkg.manifest.has_locus(locus),
            Evidence::Site { site } => g.index_of(site).is_some(),
            Evidence::Unit { class_name, library } => pkg
                .unit(class_name)
                .is_some_and(|u| u.origin.library() == library.as_deref()),
            Evidence::Signing { schemes } => pkg
                .signing
                .as_ref()
                .is_some_and(|s| s.schemes.iter().copied().eq(schemes.iter().copied())),
        }
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evidence::Path(p) => {
                write!(f, "{} -> {}: ", p.source_category, p.sink_category)?;
                for (i, n) in p.nodes.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" -> ")?;
                    }
                    write!(f, "{n}")?;
                }
                Ok(())
            }
            Evidence::Manifest(locus) => write!(f, "manifest {locus}"),
            Evidence::Site { site } => write!(f, "site {site}"),
            Evidence::Unit { class_name, library } => match library {
                Some(lib) => write!(f, "class {class_name} (library {lib})"),
                None => write!(f, "class {class_name}"),
            },
            Evidence::Signing { schemes } => {
                let names: Vec<String> = schemes.iter().map(|s| s.to_string()).collect();
                write!(f, "signing schemes {{{}}}", names.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    /// `<rule>#<n>`, numbered per rule in canonical order.
    pub id: String,
    pub rule_id: String,
    pub severity: Severity,
    /// Site, component or permission the finding is about.
    pub subject: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<Note>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<ClaimId>,
}

impl Finding {
    pub(crate) fn new(rule: &Rule, severity: Severity, subject: impl ToString, message: impl Into<String>) -> Self {
        Finding {
            id: String::new(),
            rule_id: rule.id.clone(),
            severity,
            subject: subject.to_string(),
            evidence: None,
            message: message.into(),
            note: None,
            claims: rule.claims.clone(),
        }
    }

    pub(crate) fn with_evidence(mut self, evidence: Evidence) -> Self {
        self.evidence = Some(evidence);
        self
    }

    pub(crate) fn with_note(mut self, note: Note) -> Self {
        self.note = Some(note);
        self
    }
}

/// Everything a detector may look at.
pub struct Analysis<'a> {
    pub pkg: &'a AppPackage,
    pub graph: &'a FlowGraph,
    pub flows: &'a SourceSinkCatalog,
    pub rules: &'a DetectorCatalog,
    pub geo: &'a dyn GeoResolver,
    pub era: TargetEra,
    leaks: OnceLock<Vec<FlowPath>>,
    calls: OnceLock<Vec<CallSite<'a>>>,
}

/// A call instruction in the package.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CallSite<'a> {
    pub unit: &'a CodeUnit,
    pub method: &'a MethodBody,
    pub index: usize,
    pub callee: &'a MethodId,
    pub args: &'a [Reg],
}

impl CallSite<'_> {
    pub fn node(&self) -> NodeRef {
        NodeRef::instr(self.method.id.clone(), self.index)
    }
}

impl<'a> Analysis<'a> {
    pub fn new(
        pkg: &'a AppPackage,
        graph: &'a FlowGraph,
        flows: &'a SourceSinkCatalog,
        rules: &'a DetectorCatalog,
        geo: &'a dyn GeoResolver,
        era: TargetEra,
    ) -> Self {
        Analysis {
            pkg,
            graph,
            flows,
            rules,
            geo,
            era,
            leaks: OnceLock::new(),
            calls: OnceLock::new(),
        }
    }

    /// Sensitive-source to sink paths.
    pub fn leaks(&self) -> &[FlowPath] {
        self.leaks.get_or_init(|| confirm_leak(self.graph, self.flows))
    }

    /// Every call instruction, ordered by site.
    pub(crate) fn calls(&self) -> &[CallSite<'a>] {
        self.calls.get_or_init(|| {
            let mut out: Vec<CallSite<'a>> = Vec::new();
            for (unit, method) in self.pkg.methods() {
                for (index, ins) in method.instructions.iter().enumerate() {
                    if let Instruction::Call { callee, args, .. } = ins {
                        out.push(CallSite {
                            unit,
                            method,
                            index,
                            callee,
                            args,
                        });
                    }
                }
            }
            out.sort_by(|a, b| (&a.method.id, a.index).cmp(&(&b.method.id, b.index)));
            out
        })
    }

    /// String constants the `arg`-th argument of a call can hold, with
    /// `@string/` references resolved. `None` when not a constant.
    pub(crate) fn constant_arg(&self, site: &CallSite<'_>, arg: usize) -> Option<Vec<String>> {
        let reg = *site.args.get(arg)?;
        let consts = site.method.reaching_defs().constant_strings(site.method, site.index, reg)?;
        Some(consts.iter().map(|c| self.pkg.resolve_string(c).to_string()).collect())
    }
}

type Detector = fn(&Analysis<'_>, &Rule) -> Vec<Finding>;

fn detector_for(id: &str) -> Option<Detector> {
    Some(match id {
        "D-LOC-LIB" => rules::detect_location_library,
        "D-BIOMETRIC" => rules::detect_biometric_collection,
        "D-EXT-STORAGE" => rules::detect_external_storage,
        "D-WEAK-CIPHER" => rules::detect_weak_cipher,
        "D-HTTP" => rules::detect_http_endpoints,
        "D-NONUS-SERVER" => rules::detect_nonus_server,
        "V-UNPROT-COMPONENT" => rules::detect_unprotected_components,
        "V-INSECURE-PRNG" => rules::detect_insecure_prng,
        "V-WEAK-HASH" => rules::detect_weak_hash,
        "V-BACKUP" => rules::detect_backup_allowed,
        "V-TLS-TRUSTALL" => rules::detect_trust_manager,
        "V-NO-PINNING" => rules::detect_pinning,
        "R-SQLI" => rules::detect_sql_injection,
        "R-CLEARTEXT" => rules::detect_cleartext_storage,
        "R-LOG-SENSITIVE" => rules::detect_sensitive_logging,
        "R-JANUS" => rules::detect_janus,
        _ => return None,
    })
}

/// Runs every catalog rule and returns findings in canonical order with
/// ids assigned.
pub fn run_detectors(a: &Analysis<'_>) -> Vec<Finding> {
    let per_rule: Vec<Vec<Finding>> = a
        .rules
        .rules()
        .par_iter()
        .map(|rule| detector_for(&rule.id).map_or_else(Vec::new, |d| d(a, rule)))
        .collect();
    number(per_rule.into_iter().flatten().collect())
}

/// Sorts by rule order (stable within a rule) and assigns ids.
pub(crate) fn number(mut findings: Vec<Finding>) -> Vec<Finding> {
    findings.sort_by_key(|f| rule_rank(&f.rule_id));
    let mut counter = 0;
    let mut current = String::new();
    for f in &mut findings {
        if f.rule_id != current {
            current = f.rule_id.clone();
            counter = 0;
        }
        counter += 1;
        f.id = format!("{}#{}", f.rule_id, counter);
    }
    findings
}

/// Rule ids of the refined detectors that have a naive counterpart.
pub const REFINED_RULES: [&str; 5] = ["R-SQLI", "V-UNPROT-COMPONENT", "R-CLEARTEXT", "R-LOG-SENSITIVE", "R-JANUS"];
