//! Single-app audits, corpus batches and their summaries.

mod render;

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{naive_findings, run_detectors, Analysis, Column, DetectorCatalog, Finding, Note, Severity};
use crate::diagnostic::Diagnostic;
use crate::error::{read_to_string, Error, Result};
use crate::flow::{build_flow_graph, SourceSinkCatalog};
use crate::geo::GeoTable;
use crate::manifest::{privilege_profile, PermissionCatalog, PrivilegeProfile, TargetEra};
use crate::package::{load_package, validate_package, AppPackage};
use crate::policy::{check_compliance, parse_claims, policy_verdict, ClaimId, PolicyClaims, ViolationRecord};

pub use render::{explain, render_csv, render_markdown_batch, render_markdown_report};

/// Policy file a package may carry to override the shared claims.
pub const LOCAL_CLAIMS_FILE: &str = "policy.claims";

/// Prefix on the ids of baseline findings the refined rules dropped.
pub const BASELINE_PREFIX: &str = "baseline:";

/// Everything an audit needs besides the package.
#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub claims: PolicyClaims,
    pub geo: GeoTable,
    pub flows: SourceSinkCatalog,
    pub rules: DetectorCatalog,
    pub permissions: PermissionCatalog,
    pub era: TargetEra,
}

impl AuditConfig {
    /// Bundled catalogs with the given policy and geo table.
    pub fn new(claims: PolicyClaims, geo: GeoTable) -> Self {
        AuditConfig {
            claims,
            geo,
            flows: SourceSinkCatalog::bundled().clone(),
            rules: DetectorCatalog::bundled().clone(),
            permissions: PermissionCatalog::bundled().clone(),
            era: TargetEra::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppIdentity {
    /// Package directory name.
    pub source: String,
    pub package_name: String,
    pub version_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_code: Option<String>,
}

/// One Y/N entry of a report vector with the findings behind it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub column: Column,
    pub flagged: bool,
    pub findings: Vec<String>,
}

impl Cell {
    fn new(column: Column, findings: Vec<String>) -> Self {
        Cell {
            column,
            flagged: !findings.is_empty(),
            findings,
        }
    }

    pub fn mark(&self) -> &'static str {
        if self.flagged {
            "Y"
        } else {
            "N"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub app: AppIdentity,
    pub privilege: PrivilegeProfile,
    /// Catalog codes of the declared permissions, in catalog order.
    pub permission_codes: Vec<String>,
    pub claims: Vec<ClaimId>,
    pub violations: Vec<ViolationRecord>,
    pub policy_violated: bool,
    pub violation_vector: Vec<Cell>,
    pub vulnerability_vector: Vec<Cell>,
    pub false_positive_vector: Vec<Cell>,
    pub violation_count: usize,
    pub vulnerability_count: usize,
    pub false_positive_count: usize,
    pub findings: Vec<Finding>,
    /// Baseline findings the refined rules do not confirm.
    pub suppressed: Vec<Finding>,
    pub diagnostics: Vec<Diagnostic>,
    pub notes: Vec<String>,
}

impl AuditReport {
    /// True when the app violates its policy or has a vulnerability.
    pub fn has_issues(&self) -> bool {
        self.policy_violated || self.vulnerability_count > 0
    }

    pub fn finding(&self, id: &str) -> Option<&Finding> {
        self.findings.iter().chain(&self.suppressed).find(|f| f.id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Audits a package directory. A `policy.claims` file inside the package
/// replaces the configured claims.
pub fn audit(pkg_path: &Path, cfg: &AuditConfig) -> Result<AuditReport> {
    let pkg = load_package(pkg_path)?;
    let local = pkg_path.join(LOCAL_CLAIMS_FILE);
    let claims = if local.is_file() {
        parse_claims(&read_to_string(&local)?)?
    } else {
        cfg.claims.clone()
    };
    let source = pkg_path
        .file_name()
        .map_or_else(|| pkg.package_name.clone(), |n| n.to_string_lossy().into_owned());
    Ok(audit_package(&pkg, &source, &claims, cfg))
}

/// Audits an already loaded package.
pub fn audit_package(pkg: &AppPackage, source: &str, claims: &PolicyClaims, cfg: &AuditConfig) -> AuditReport {
    let graph = build_flow_graph(pkg);
    let analysis = Analysis::new(pkg, &graph, &cfg.flows, &cfg.rules, &cfg.geo, cfg.era);
    let findings = run_detectors(&analysis);
    let suppressed = suppressed_baseline(naive_findings(&analysis), &findings);
    let violations = check_compliance(claims, &findings);

    let cited: BTreeSet<&str> = violations
        .iter()
        .flat_map(|r| r.findings.iter().map(String::as_str))
        .collect();
    let confirmed = |col: Column, require_cited: bool| -> Vec<String> {
        findings
            .iter()
            .filter(|f| f.severity >= Severity::Warning)
            .filter(|f| cfg.rules.columns_of(&f.rule_id).contains(&col))
            .filter(|f| !require_cited || cited.contains(f.id.as_str()))
            .map(|f| f.id.clone())
            .collect()
    };
    let violation_vector: Vec<Cell> = Column::VIOLATIONS
        .into_iter()
        .map(|c| Cell::new(c, confirmed(c, true)))
        .collect();
    let vulnerability_vector: Vec<Cell> = Column::VULNERABILITIES
        .into_iter()
        .map(|c| Cell::new(c, confirmed(c, false)))
        .collect();
    let false_positive_vector: Vec<Cell> = Column::FALSE_POSITIVES
        .into_iter()
        .map(|c| {
            let ids = suppressed
                .iter()
                .filter(|f| cfg.rules.columns_of(&f.rule_id).contains(&c))
                .map(|f| f.id.clone())
                .collect();
            Cell::new(c, ids)
        })
        .collect();

    let mut diagnostics = pkg.load_diagnostics.clone();
    diagnostics.extend(validate_package(pkg, &cfg.permissions));
    diagnostics.sort();
    diagnostics.dedup();

    let permission_codes = cfg
        .permissions
        .coded()
        .filter(|e| pkg.manifest.declares(&e.name))
        .filter_map(|e| e.code.clone())
        .collect();

    let count = |v: &[Cell]| v.iter().filter(|c| c.flagged).count();
    AuditReport {
        app: AppIdentity {
            source: source.to_string(),
            package_name: pkg.package_name.clone(),
            version_name: pkg.version_name.clone(),
            version_code: pkg.version_code.as_ref().map(|v| v.to_string()),
        },
        privilege: privilege_profile(&pkg.manifest, &cfg.permissions),
        permission_codes,
        claims: claims.claims.keys().copied().collect(),
        policy_violated: policy_verdict(&violations),
        violation_count: count(&violation_vector),
        vulnerability_count: count(&vulnerability_vector),
        false_positive_count: count(&false_positive_vector),
        violation_vector,
        vulnerability_vector,
        false_positive_vector,
        notes: notes(pkg, &findings, &violations),
        violations,
        findings,
        suppressed,
        diagnostics,
    }
}

fn suppressed_baseline(naive: Vec<Finding>, refined: &[Finding]) -> Vec<Finding> {
    let confirmed: BTreeSet<(&str, &str)> = refined
        .iter()
        .filter(|f| f.severity >= Severity::Warning)
        .map(|f| (f.rule_id.as_str(), f.subject.as_str()))
        .collect();
    naive
        .into_iter()
        .filter(|f| !confirmed.contains(&(f.rule_id.as_str(), f.subject.as_str())))
        .map(|mut f| {
            f.id = format!("{BASELINE_PREFIX}{}", f.id);
            f
        })
        .collect()
}

fn notes(pkg: &AppPackage, findings: &[Finding], violations: &[ViolationRecord]) -> Vec<String> {
    let mut out = BTreeSet::new();
    for f in findings {
        if f.note == Some(Note::UnknownRegion) {
            out.insert(format!("server location unresolved: {}", f.message));
        }
        if f.rule_id == "D-BIOMETRIC"
            && f.severity >= Severity::Warning
            && violations.iter().any(|r| r.findings.contains(&f.id))
        {
            out.insert("undisclosed biometric collection is counted against the no-PII claim".to_string());
        }
    }
    if pkg.signing.is_none() {
        out.insert("no signing metadata; signature checks skipped".to_string());
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnCount {
    pub column: String,
    pub count: usize,
}

/// An exact average, `total / apps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mean {
    pub total: usize,
    pub apps: usize,
}

impl Mean {
    pub fn value(self) -> f64 {
        if self.apps == 0 {
            0.0
        } else {
            self.total as f64 / self.apps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub source: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub apps: usize,
    pub permission_counts: Vec<ColumnCount>,
    pub violation_counts: Vec<ColumnCount>,
    pub vulnerability_counts: Vec<ColumnCount>,
    pub false_positive_counts: Vec<ColumnCount>,
    pub mean_permissions: Mean,
    pub mean_vulnerabilities: Mean,
    pub all_apps_violate: bool,
    pub failures: Vec<BatchFailure>,
}

impl CorpusSummary {
    pub fn from_reports(reports: &[AuditReport], permissions: &PermissionCatalog, failures: Vec<BatchFailure>) -> Self {
        let column_counts = |pick: fn(&AuditReport) -> &[Cell], columns: &[Column]| -> Vec<ColumnCount> {
            columns
                .iter()
                .map(|&col| ColumnCount {
                    column: col.name().to_string(),
                    count: reports
                        .iter()
                        .filter(|r| pick(r).iter().any(|c| c.column == col && c.flagged))
                        .count(),
                })
                .collect()
        };
        CorpusSummary {
            apps: reports.len(),
            permission_counts: permissions
                .coded()
                .filter_map(|e| e.code.clone())
                .map(|code| ColumnCount {
                    count: reports.iter().filter(|r| r.permission_codes.contains(&code)).count(),
                    column: code,
                })
                .collect(),
            violation_counts: column_counts(|r| &r.violation_vector, &Column::VIOLATIONS),
            vulnerability_counts: column_counts(|r| &r.vulnerability_vector, &Column::VULNERABILITIES),
            false_positive_counts: column_counts(|r| &r.false_positive_vector, &Column::FALSE_POSITIVES),
            mean_permissions: Mean {
                total: reports.iter().map(|r| r.privilege.permission_count).sum(),
                apps: reports.len(),
            },
            mean_vulnerabilities: Mean {
                total: reports.iter().map(|r| r.vulnerability_count).sum(),
                apps: reports.len(),
            },
            all_apps_violate: !reports.is_empty() && reports.iter().all(|r| r.policy_violated),
            failures,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Recomputes every count from `reports` and compares.
    pub fn consistent_with(&self, reports: &[AuditReport], permissions: &PermissionCatalog) -> bool {
        *self == CorpusSummary::from_reports(reports, permissions, self.failures.clone())
    }

    pub fn count(&self, column: &str) -> Option<usize> {
        self.permission_counts
            .iter()
            .chain(&self.violation_counts)
            .chain(&self.vulnerability_counts)
            .chain(&self.false_positive_counts)
            .find(|c| c.column == column)
            .map(|c| c.count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchResult {
    pub summary: CorpusSummary,
    pub reports: Vec<AuditReport>,
}

impl BatchResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Audits every package directory under `corpus_dir` in parallel.
/// Packages that fail to load are listed in the summary.
pub fn batch(corpus_dir: &Path, cfg: &AuditConfig) -> Result<BatchResult> {
    let mut dirs: Vec<_> = std::fs::read_dir(corpus_dir)
        .map_err(|e| Error::io(corpus_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .filter(|p| !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    dirs.sort();
    let outcomes: Vec<(String, Result<AuditReport>)> = dirs
        .par_iter()
        .map(|d| {
            let name = d.file_name().unwrap_or_default().to_string_lossy().into_owned();
            (name, audit(d, cfg))
        })
        .collect();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (source, outcome) in outcomes {
        match outcome {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(BatchFailure {
                source,
                error: scrub(&e.to_string(), corpus_dir),
            }),
        }
    }
    reports.sort_by(|a, b| a.app.source.cmp(&b.app.source));
    let summary = CorpusSummary::from_reports(&reports, &cfg.permissions, failures);
    Ok(BatchResult { summary, reports })
}

/// Drops the corpus directory prefix from error text.
fn scrub(message: &str, root: &Path) -> String {
    let prefix = format!("{}{}", root.display(), std::path::MAIN_SEPARATOR);
    message.replace(&prefix, "")
}
