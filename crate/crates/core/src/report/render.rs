//! Markdown tables, CSV vectors and evidence trails.

use std::fmt::Write;

use super::{AuditReport, BatchResult, Cell, ColumnCount};
use crate::detectors::{Column, DetectorCatalog, Evidence};
use crate::error::{Error, Result};
use crate::manifest::PermissionCatalog;

fn table(out: &mut String, title: &str, header: &[String], rows: &[Vec<String>], footer: Option<Vec<String>>) {
    let _ = writeln!(out, "### {title}\n");
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}|", vec!["---"; header.len()].join("|"));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    if let Some(f) = footer {
        let _ = writeln!(out, "| {} |", f.join(" | "));
    }
    out.push('\n');
}

fn vector_header(columns: &[Column], total: &str) -> Vec<String> {
    std::iter::once("App".to_string())
        .chain(columns.iter().map(|c| c.title().to_string()))
        .chain(std::iter::once(total.to_string()))
        .collect()
}

fn vector_row(name: &str, cells: &[Cell], count: usize) -> Vec<String> {
    std::iter::once(name.to_string())
        .chain(cells.iter().map(|c| c.mark().to_string()))
        .chain(std::iter::once(count.to_string()))
        .collect()
}

fn footer(label: &str, counts: &[ColumnCount]) -> Vec<String> {
    std::iter::once(format!("**{label}**"))
        .chain(counts.iter().map(|c| c.count.to_string()))
        .chain(std::iter::once(String::new()))
        .collect()
}

fn permission_row(r: &AuditReport, codes: &[String]) -> Vec<String> {
    std::iter::once(r.app.source.clone())
        .chain(codes.iter().map(|c| if r.permission_codes.contains(c) { "Y" } else { "N" }.to_string()))
        .chain(std::iter::once(r.privilege.permission_count.to_string()))
        .collect()
}

fn codes(permissions: &PermissionCatalog) -> Vec<String> {
    permissions.coded().filter_map(|e| e.code.clone()).collect()
}

type VectorOf = fn(&AuditReport) -> (&[Cell], usize);

fn vector_tables(out: &mut String, reports: &[&AuditReport], footers: Option<[&[ColumnCount]; 3]>) {
    let specs: [(&str, &[Column], &str, VectorOf); 3] = [
        ("Privacy policy violations", &Column::VIOLATIONS, "# Violations", |r| {
            (&r.violation_vector, r.violation_count)
        }),
        ("Known vulnerabilities", &Column::VULNERABILITIES, "# Vulns", |r| {
            (&r.vulnerability_vector, r.vulnerability_count)
        }),
        ("Suppressed false positives", &Column::FALSE_POSITIVES, "# False positives", |r| {
            (&r.false_positive_vector, r.false_positive_count)
        }),
    ];
    for (i, (title, columns, total, pick)) in specs.into_iter().enumerate() {
        let rows: Vec<Vec<String>> = reports
            .iter()
            .map(|r| {
                let (cells, count) = pick(r);
                vector_row(&r.app.source, cells, count)
            })
            .collect();
        let foot = footers.map(|f| footer("# Apps", f[i]));
        table(out, title, &vector_header(columns, total), &rows, foot);
    }
}

pub fn render_markdown_report(r: &AuditReport, permissions: &PermissionCatalog) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "## {} ({} {})\n", r.app.source, r.app.package_name, r.app.version_name);
    let _ = writeln!(
        out,
        "Policy verdict: **{}**\n",
        if r.policy_violated { "violated" } else { "consistent" }
    );
    let codes = codes(permissions);
    let header: Vec<String> = std::iter::once("App".to_string())
        .chain(codes.iter().cloned())
        .chain(std::iter::once("# Permissions".to_string()))
        .collect();
    table(&mut out, "Permissions", &header, &[permission_row(r, &codes)], None);
    vector_tables(&mut out, &[r], None);
    if !r.findings.is_empty() {
        out.push_str("### Findings\n\n| Id | Severity | Subject | Message |\n|---|---|---|---|\n");
        for f in &r.findings {
            let _ = writeln!(out, "| {} | {} | `{}` | {} |", f.id, f.severity, f.subject, f.message);
        }
        out.push('\n');
    }
    for n in &r.notes {
        let _ = writeln!(out, "- {n}");
    }
    out
}

pub fn render_markdown_batch(b: &BatchResult, permissions: &PermissionCatalog) -> String {
    let s = &b.summary;
    let mut out = String::new();
    let _ = writeln!(out, "## Corpus of {} apps\n", s.apps);
    let codes = codes(permissions);
    let header: Vec<String> = std::iter::once("App".to_string())
        .chain(codes.iter().cloned())
        .chain(std::iter::once("# Permissions".to_string()))
        .collect();
    let rows: Vec<Vec<String>> = b.reports.iter().map(|r| permission_row(r, &codes)).collect();
    table(&mut out, "Permissions", &header, &rows, Some(footer("# Apps", &s.permission_counts)));
    let reports: Vec<&AuditReport> = b.reports.iter().collect();
    vector_tables(
        &mut out,
        &reports,
        Some([&s.violation_counts, &s.vulnerability_counts, &s.false_positive_counts]),
    );
    let _ = writeln!(
        out,
        "- Mean permissions per app: {}/{} = {:.3}",
        s.mean_permissions.total,
        s.mean_permissions.apps,
        s.mean_permissions.value()
    );
    let _ = writeln!(
        out,
        "- Mean vulnerabilities per app: {}/{} = {:.3}",
        s.mean_vulnerabilities.total,
        s.mean_vulnerabilities.apps,
        s.mean_vulnerabilities.value()
    );
    let _ = writeln!(out, "- Every app violates its policy: {}", if s.all_apps_violate { "yes" } else { "no" });
    for f in &s.failures {
        let _ = writeln!(out, "- Failed: {}: {}", f.source, f.error);
    }
    out
}

/// One row per report: every vector column as Y/N, then the three counts.
pub fn render_csv(reports: &[AuditReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["app".to_string(), "package".to_string()];
    header.extend(Column::all().map(|c| c.name().to_string()));
    header.extend(["violations", "vulnerabilities", "false_positives"].map(String::from));
    let csv_err = |e: csv::Error| Error::parse("csv", 0, e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for r in reports {
        let mut row = vec![r.app.source.clone(), r.app.package_name.clone()];
        for cells in [&r.violation_vector, &r.vulnerability_vector, &r.false_positive_vector] {
            row.extend(cells.iter().map(|c| c.mark().to_string()));
        }
        row.extend([r.violation_count, r.vulnerability_count, r.false_positive_count].map(|n| n.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::parse("csv", 0, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Evidence trail for one finding of a report.
pub fn explain(report: &AuditReport, finding_id: &str, rules: &DetectorCatalog) -> Result<String> {
    let f = report
        .finding(finding_id)
        .ok_or_else(|| Error::UnknownFindingId(finding_id.to_string()))?;
    let mut out = String::new();
    let _ = writeln!(out, "{} [{}] {}", f.id, f.severity, report.app.source);
    match rules.get(&f.rule_id) {
        Some(rule) => {
            let _ = writeln!(out, "rule:     {} {}", rule.id, rule.title);
        }
        None => {
            let _ = writeln!(out, "rule:     {}", f.rule_id);
        }
    }
    let _ = writeln!(out, "subject:  {}", f.subject);
    let _ = writeln!(out, "message:  {}", f.message);
    if let Some(note) = f.note {
        let _ = writeln!(out, "note:     {}", serde_json::to_value(note)?.as_str().unwrap_or_default());
    }
    if !f.claims.is_empty() {
        let claims: Vec<String> = f.claims.iter().map(|c| c.long_name().to_string()).collect();
        let _ = writeln!(out, "claims:   {}", claims.join(", "));
    }
    if f.id.starts_with(super::BASELINE_PREFIX) {
        let _ = writeln!(out, "status:   baseline only; the refined rule does not confirm it");
    }
    match &f.evidence {
        Some(Evidence::Path(p)) => {
            let _ = writeln!(out, "path:     {} -> {}", p.source_category, p.sink_category);
            for (i, n) in p.nodes.iter().enumerate() {
                let _ = writeln!(out, "  {i:>2}. {n}");
            }
        }
        Some(e) => {
            let _ = writeln!(out, "evidence: {e}");
        }
        None => {}
    }
    Ok(out)
}
