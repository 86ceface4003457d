//! End-to-end audits of the bundled fixture corpus.

mod common;

use std::fs;
use std::path::Path;

use appaudit::detectors::{DetectorCatalog, Evidence, Severity};
use appaudit::manifest::PermissionCatalog;
use appaudit::report::{audit, batch, explain, BatchResult};
use appaudit::Error;
use common::*;

fn corpus() -> BatchResult {
    batch(&fixtures().join("corpus"), &corpus_config()).unwrap()
}

#[test]
fn every_row_matches_the_expected_tables() {
    let b = corpus();
    assert_eq!(b.reports.len(), 24);
    assert!(b.summary.failures.is_empty());
    for r in &b.reports {
        let e = expected(&r.app.source);
        assert_eq!(perm_marks(r), e.perms, "{} permissions", e.dir);
        assert_eq!(marks(&r.violation_vector), e.violations, "{} violations", e.dir);
        assert_eq!(marks(&r.vulnerability_vector), e.vulns, "{} vulnerabilities", e.dir);
        assert_eq!(marks(&r.false_positive_vector), e.fps, "{} false positives", e.dir);
        assert_eq!(r.violation_count, e.violations.matches('Y').count());
        assert_eq!(r.vulnerability_count, e.vulns.matches('Y').count());
        assert_eq!(r.false_positive_count, e.fps.matches('Y').count());
        assert_eq!(r.privilege.permission_count, e.perms.matches('Y').count());
        assert!(r.policy_violated, "{} should violate its policy", e.dir);
        assert!(r.diagnostics.is_empty(), "{}: {:?}", e.dir, r.diagnostics);
    }
}

#[test]
fn summary_footers() {
    let s = corpus().summary;
    let counts = |cs: &[appaudit::report::ColumnCount]| cs.iter().map(|c| c.count).collect::<Vec<_>>();
    assert_eq!(counts(&s.permission_counts), [24, 9, 24, 24, 24, 7, 23, 24, 2, 2, 2, 2]);
    assert_eq!(counts(&s.violation_counts), [20, 9, 6, 14, 13]);
    assert_eq!(counts(&s.vulnerability_counts), [12, 22, 7, 4, 1, 18]);
    assert_eq!(counts(&s.false_positive_counts), [23, 24, 22, 24, 24]);
    assert_eq!((s.mean_permissions.total, s.mean_permissions.apps), (167, 24));
    assert!((s.mean_permissions.value() - 6.958).abs() < 0.001);
    assert_eq!((s.mean_vulnerabilities.total, s.mean_vulnerabilities.apps), (64, 24));
    assert!(s.all_apps_violate);
    // The expected tables agree with their own footers.
    assert_eq!(column_sums(|e| e.perms), counts(&s.permission_counts));
    assert_eq!(column_sums(|e| e.violations), counts(&s.violation_counts));
    assert_eq!(column_sums(|e| e.vulns), counts(&s.vulnerability_counts));
    assert_eq!(column_sums(|e| e.fps), counts(&s.false_positive_counts));
}

#[test]
fn summary_is_consistent_with_reports() {
    let b = corpus();
    assert!(b.summary.consistent_with(&b.reports, PermissionCatalog::bundled()));
}

#[test]
fn alabama_and_michigan() {
    let cfg = corpus_config();
    let al = audit(&fixtures().join("corpus/alabama"), &cfg).unwrap();
    assert_eq!(marks(&al.violation_vector), "YYYNY");
    assert_eq!(marks(&al.vulnerability_vector), "YYNNNY");
    let mi = audit(&fixtures().join("corpus/michigan"), &cfg).unwrap();
    assert_eq!(mi.vulnerability_count, 1);
    let pin = &mi.vulnerability_vector[5];
    assert!(pin.flagged);
    assert!(pin.findings.iter().all(|id| id.starts_with("V-NO-PINNING#")));
}

fn write_clean_package(dir: &Path) {
    fs::create_dir_all(dir.join("code")).unwrap();
    fs::write(
        dir.join("manifest.xml"),
        r#"<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="gov.clean.app" android:versionCode="3" android:versionName="3.0">
  <uses-permission android:name="android.permission.INTERNET"/>
  <application android:allowBackup="false"/>
</manifest>
"#,
    )
    .unwrap();
    fs::write(dir.join("signing.meta"), "schemes=v2,v3\n").unwrap();
}

#[test]
fn clean_package_has_empty_vectors() {
    let tmp = tempfile::tempdir().unwrap();
    write_clean_package(&tmp.path().join("clean"));
    let b = batch(tmp.path(), &corpus_config()).unwrap();
    let r = &b.reports[0];
    assert_eq!(marks(&r.violation_vector), "NNNNN");
    assert_eq!(marks(&r.vulnerability_vector), "NNNNNN");
    assert!(!r.policy_violated && !r.has_issues());
    assert!(!b.summary.all_apps_violate);
}

#[test]
fn broken_package_is_reported_without_stopping_the_batch() {
    let tmp = tempfile::tempdir().unwrap();
    write_clean_package(&tmp.path().join("good"));
    let bad = tmp.path().join("bad");
    fs::create_dir_all(&bad).unwrap();
    fs::write(bad.join("manifest.xml"), "<manifest package=").unwrap();
    let b = batch(tmp.path(), &corpus_config()).unwrap();
    assert_eq!(b.reports.len(), 1);
    assert_eq!(b.summary.failures.len(), 1);
    assert_eq!(b.summary.failures[0].source, "bad");
    assert!(!b.summary.failures[0].error.contains(&*tmp.path().to_string_lossy()));
}

#[test]
fn explain_http_and_backup() {
    let cfg = corpus_config();
    let rules = DetectorCatalog::bundled();
    let ca = audit(&fixtures().join("corpus/california"), &cfg).unwrap();
    let http = ca.findings.iter().find(|f| f.rule_id == "D-HTTP" && f.severity >= Severity::Warning).unwrap();
    let Some(Evidence::Path(p)) = &http.evidence else { panic!("path evidence expected") };
    assert!(p.nodes.len() >= 2);
    let text = explain(&ca, &http.id, rules).unwrap();
    assert!(text.contains("D-HTTP"));
    assert!(text.contains(&p.target().to_string()));

    let nv = audit(&fixtures().join("corpus/nevada"), &cfg).unwrap();
    let backup = nv.findings.iter().find(|f| f.rule_id == "V-BACKUP").unwrap();
    assert!(matches!(backup.evidence, Some(Evidence::Manifest(_))));
    let text = explain(&nv, &backup.id, rules).unwrap();
    assert!(text.contains("manifest.xml"));

    assert!(matches!(explain(&nv, "NOPE#1", rules), Err(Error::UnknownFindingId(_))));
}

#[test]
fn false_positive_fixtures_stay_quiet() {
    let cfg = corpus_config();
    let b = batch(&fixtures().join("false-positives"), &cfg).unwrap();
    assert_eq!(b.reports.len(), 5);
    for r in &b.reports {
        assert!(
            r.findings.iter().all(|f| f.severity < Severity::Vulnerability),
            "{}: {:?}",
            r.app.source,
            r.findings
        );
        assert!(!r.suppressed.is_empty(), "{} has no baseline finding", r.app.source);
        assert_eq!(r.false_positive_count, 1, "{}", r.app.source);
    }
}
