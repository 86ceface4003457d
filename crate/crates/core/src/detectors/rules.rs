//! One function per catalog rule.

use std::collections::{BTreeMap, BTreeSet};

use super::{Analysis, CallSite, Evidence, Finding, Note, Rule, Severity};
use crate::flow::{
    call_nodes, sanitizer_mask, sensitive_source_nodes, shortest_paths, Category, FlowPath, NodeOp, NodeRef,
    Pattern, PatternSet,
};
use crate::geo::{extract_host, Region};
use crate::manifest::{effective_exported, TriState};
use crate::package::SigningScheme;

pub(super) fn matching_calls<'s, 'a>(a: &'s Analysis<'a>, patterns: &[Pattern]) -> Vec<&'s CallSite<'a>> {
    a.calls()
        .iter()
        .filter(|c| patterns.iter().any(|p| p.matches(c.callee)))
        .collect()
}

fn site(node: NodeRef) -> Evidence {
    Evidence::Site { site: node }
}

pub(super) fn detect_location_library(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let libs = rule.param("library");
    let mut out = Vec::new();
    let mut flagged = BTreeSet::new();
    for unit in &a.pkg.code_units {
        let Some(lib) = unit.origin.library() else { continue };
        if libs.iter().any(|l| l == lib) {
            flagged.insert(unit.class_name.as_str());
            out.push(
                Finding::new(rule, rule.severity, &unit.class_name, format!("bundled library {lib} reads the device location"))
                    .with_evidence(Evidence::Unit {
                        class_name: unit.class_name.clone(),
                        library: Some(lib.to_string()),
                    }),
            );
        }
    }
    for c in matching_calls(a, &rule.patterns("call")) {
        if flagged.contains(c.unit.class_name.as_str()) {
            continue;
        }
        out.push(
            Finding::new(rule, rule.severity, c.node(), format!("location API {} called", c.callee))
                .with_evidence(site(c.node())),
        );
    }
    out
}

pub(super) fn detect_biometric_collection(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let wanted = rule.param("permission");
    let perms: Vec<_> = a
        .pkg
        .manifest
        .permissions
        .iter()
        .filter(|p| wanted.contains(&p.name))
        .collect();
    let calls = matching_calls(a, &rule.patterns("call"));
    if calls.is_empty() {
        return perms
            .first()
            .map(|p| {
                Finding::new(rule, Severity::Info, &p.name, format!("{} declared but no biometric API is called", p.name))
                    .with_evidence(Evidence::Manifest(a.pkg.manifest.permission_locus(p)))
                    .with_note(Note::PermissionOnly)
            })
            .into_iter()
            .collect();
    }
    calls
        .into_iter()
        .map(|c| {
            if perms.is_empty() {
                Finding::new(rule, Severity::Info, c.node(), format!("{} called without a biometric permission", c.callee))
                    .with_evidence(site(c.node()))
                    .with_note(Note::CallWithoutPermission)
            } else {
                Finding::new(rule, rule.severity, c.node(), format!("biometric API {} called", c.callee))
                    .with_evidence(site(c.node()))
            }
        })
        .collect()
}

fn categories(rule: &Rule, key: &str) -> Vec<Category> {
    rule.param(key).iter().filter_map(|c| c.parse().ok()).collect()
}

pub(super) fn detect_external_storage(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let cats = categories(rule, "sink-category");
    let mut out = Vec::new();
    let mut confirmed = BTreeSet::new();
    for p in a.leaks().iter().filter(|p| cats.contains(&p.sink_category)) {
        confirmed.insert(p.target().clone());
        out.push(
            Finding::new(
                rule,
                rule.severity,
                p.target(),
                format!("{} data from {} is written to {} storage", p.source_category, p.source(), p.sink_category),
            )
            .with_evidence(Evidence::Path(p.clone())),
        );
    }
    for c in a.calls() {
        let hit = a.flows.sink_category(c.callee).is_some_and(|k| cats.contains(&k));
        if hit && !confirmed.contains(&c.node()) {
            out.push(
                Finding::new(rule, Severity::Info, c.node(), format!("{} writes shared storage; no sensitive value reaches it", c.callee))
                    .with_evidence(site(c.node()))
                    .with_note(Note::NoSensitiveFlow),
            );
        }
    }
    out
}

pub(super) fn detect_weak_cipher(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let defaults = rule.param("default-mode");
    let prefixes = rule.param("weak-prefix");
    let mut out = Vec::new();
    for c in matching_calls(a, &rule.patterns("call")) {
        let Some(values) = a.constant_arg(c, 0) else {
            out.push(
                Finding::new(rule, Severity::Info, c.node(), "cipher transformation is not a constant")
                    .with_evidence(site(c.node()))
                    .with_note(Note::UnresolvedAlgorithm),
            );
            continue;
        };
        let weak = values.iter().find_map(|v| {
            if defaults.iter().any(|d| v.eq_ignore_ascii_case(d)) {
                Some((v, Some(Note::DefaultMode)))
            } else if prefixes.iter().any(|p| v.to_ascii_uppercase().starts_with(&p.to_ascii_uppercase())) {
                Some((v, None))
            } else {
                None
            }
        });
        if let Some((v, note)) = weak {
            let mut f = Finding::new(rule, rule.severity, c.node(), format!("cipher \"{v}\" runs in ECB mode"))
                .with_evidence(site(c.node()));
            f.note = note;
            out.push(f);
        }
    }
    out
}

/// String-constant nodes accepted by `pred`, each with its first path to a
/// network sink if one exists.
fn url_flows(a: &Analysis<'_>, pred: impl Fn(&str) -> bool) -> Vec<(NodeRef, String, Option<FlowPath>)> {
    let g = a.graph;
    let sources: Vec<(usize, Category)> = g
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| matches!(&n.op, NodeOp::ConstString(v) if pred(v)))
        .map(|(i, _)| (i, Category::UrlLiteral))
        .collect();
    let sinks = call_nodes(g, |id| a.flows.sink_category(id).filter(|c| *c == Category::Network));
    let mut first: BTreeMap<NodeRef, FlowPath> = BTreeMap::new();
    for p in shortest_paths(g, &sources, &sinks, &[]) {
        first.entry(p.source().clone()).or_insert(p);
    }
    sources
        .into_iter()
        .map(|(i, _)| {
            let node = g.node(i);
            let NodeOp::ConstString(v) = &node.op else { unreachable!() };
            (node.site.clone(), v.clone(), first.remove(&node.site))
        })
        .collect()
}

fn starts_with_ci(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

pub(super) fn detect_http_endpoints(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let scheme = rule.param("scheme").first().map_or("http://", String::as_str);
    url_flows(a, |v| starts_with_ci(v, scheme))
        .into_iter()
        .map(|(node, url, path)| match path {
            Some(p) => Finding::new(rule, rule.severity, &node, format!("{url} is opened by {}", p.target()))
                .with_evidence(Evidence::Path(p)),
            None => Finding::new(rule, Severity::Info, &node, format!("{url} never reaches a network call"))
                .with_evidence(site(node))
                .with_note(Note::UnreferencedConstant),
        })
        .collect()
}

pub(super) fn detect_nonus_server(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let home = rule.param("home").first().map_or("US", String::as_str);
    let mut out = Vec::new();
    for (node, url, path) in url_flows(a, |v| starts_with_ci(v, "http://") || starts_with_ci(v, "https://")) {
        let Some(path) = path else { continue };
        let (region, host) = match extract_host(&url) {
            Ok(h) => (a.geo.resolve(&h), h),
            Err(_) => (Region::Unknown, url.clone()),
        };
        match region {
            Region::Country(c) if c == home => {}
            Region::Country(c) => out.push(
                Finding::new(rule, rule.severity, &node, format!("{host} is hosted in {c}"))
                    .with_evidence(Evidence::Path(path)),
            ),
            Region::Unknown => out.push(
                Finding::new(rule, Severity::Info, &node, format!("location of {host} is unknown"))
                    .with_evidence(Evidence::Path(path))
                    .with_note(Note::UnknownRegion),
            ),
        }
    }
    out
}

pub(super) fn detect_unprotected_components(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let protected = rule.param("protected");
    let m = &a.pkg.manifest;
    let mut out = Vec::new();
    for c in m.components.iter().filter(|c| effective_exported(c, a.era)) {
        let class = c.qualified_class(&m.package_name);
        let locus = Evidence::Manifest(m.component_locus(c));
        match &c.permission {
            None => out.push(
                Finding::new(rule, rule.severity, &class, format!("exported {} {class} requires no permission", c.kind.element()))
                    .with_evidence(locus),
            ),
            Some(p) if protected.contains(p) => {}
            Some(p) => out.push(
                Finding::new(rule, Severity::Warning, &class, format!("exported {} {class} is guarded only by {p}", c.kind.element()))
                    .with_evidence(locus)
                    .with_note(Note::AppDefinedPermission),
            ),
        }
    }
    out
}

pub(super) fn detect_insecure_prng(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    matching_calls(a, &rule.patterns("call"))
        .into_iter()
        .map(|c| {
            Finding::new(rule, rule.severity, c.node(), format!("predictable generator {} used", c.callee))
                .with_evidence(site(c.node()))
        })
        .collect()
}

pub(super) fn detect_weak_hash(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let weak = rule.param("weak");
    let mut out = Vec::new();
    for c in matching_calls(a, &rule.patterns("call")) {
        match a.constant_arg(c, 0) {
            None => out.push(
                Finding::new(rule, Severity::Info, c.node(), "digest algorithm is not a constant")
                    .with_evidence(site(c.node()))
                    .with_note(Note::UnresolvedAlgorithm),
            ),
            Some(values) => {
                if let Some(v) = values.iter().find(|v| weak.iter().any(|w| w.eq_ignore_ascii_case(v))) {
                    out.push(
                        Finding::new(rule, rule.severity, c.node(), format!("weak digest \"{v}\""))
                            .with_evidence(site(c.node())),
                    );
                }
            }
        }
    }
    out
}

pub(super) fn detect_backup_allowed(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let m = &a.pkg.manifest;
    let note = match m.application.allow_backup {
        TriState::ExplicitFalse => return Vec::new(),
        TriState::ExplicitTrue => None,
        TriState::Unset => Some(Note::DefaultTrue),
    };
    let mut f = Finding::new(rule, rule.severity, "application", "allowBackup is not false")
        .with_evidence(Evidence::Manifest(m.application_locus()));
    f.note = note;
    vec![f]
}

pub(super) fn detect_trust_manager(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let names = rule.param("method");
    let validators = PatternSet(rule.patterns("validator"));
    let mut methods: Vec<_> = a
        .pkg
        .methods()
        .map(|(_, m)| m)
        .filter(|m| names.contains(&m.id.name))
        .collect();
    methods.sort_by(|x, y| x.id.cmp(&y.id));
    methods
        .into_iter()
        .filter(|m| !m.call_sites().iter().any(|(_, c)| validators.matches(c)))
        .map(|m| {
            let entry = NodeRef::entry(m.id.clone());
            let anchor = if a.graph.index_of(&entry).is_some() {
                entry
            } else {
                NodeRef::instr(m.id.clone(), 0)
            };
            Finding::new(rule, rule.severity, &m.id, format!("{} accepts any certificate chain", m.id))
                .with_evidence(site(anchor))
        })
        .collect()
}

pub(super) fn detect_pinning(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let m = &a.pkg.manifest;
    let pinned_in_code = !matching_calls(a, &rule.patterns("call")).is_empty();
    if m.pins.is_empty() && !pinned_in_code {
        let network = a
            .calls()
            .iter()
            .find(|c| a.flows.sink_category(c.callee) == Some(Category::Network));
        return network
            .map(|c| {
                Finding::new(rule, rule.severity, &m.package_name, "network traffic without a pinned certificate")
                    .with_evidence(site(c.node()))
            })
            .into_iter()
            .collect();
    }
    m.pins
        .iter()
        .filter(|p| p.self_signed())
        .map(|p| {
            Finding::new(rule, Severity::Info, format!("pin {}", p.value), "pinned certificate is self-signed")
                .with_evidence(Evidence::Manifest(m.pin_locus(p)))
                .with_note(Note::SelfSignedPin)
        })
        .collect()
}

/// First path into each target, keyed by target.
fn first_path_per_target(paths: Vec<FlowPath>) -> BTreeMap<NodeRef, FlowPath> {
    let mut out = BTreeMap::new();
    for p in paths {
        out.entry(p.target().clone()).or_insert(p);
    }
    out
}

pub(super) fn detect_sql_injection(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let g = a.graph;
    let targets: Vec<(usize, Category)> = matching_calls(a, &rule.patterns("call"))
        .into_iter()
        .filter(|c| a.flows.consumer_category(c.callee) == Some(Category::SqlQuery))
        .filter_map(|c| g.index_of(&c.node()).map(|i| (i, Category::SqlQuery)))
        .collect();
    let sources = call_nodes(g, |id| a.flows.untrusted_category(id));
    let paths = shortest_paths(g, &sources, &targets, &sanitizer_mask(g, a.flows));
    first_path_per_target(paths)
        .into_iter()
        .map(|(target, p)| {
            Finding::new(rule, rule.severity, &target, format!("{} input from {} reaches the query", p.source_category, p.source()))
                .with_evidence(Evidence::Path(p))
        })
        .collect()
}

/// Calls matching `apis` with a constant argument containing a keyword.
pub(super) fn keyword_sites<'s, 'a>(a: &'s Analysis<'a>, apis: &PatternSet, rule: &Rule) -> Vec<&'s CallSite<'a>> {
    let keywords: Vec<String> = rule.param("keyword").iter().map(|k| k.to_lowercase()).collect();
    a.calls()
        .iter()
        .filter(|c| apis.matches(c.callee))
        .filter(|c| {
            (0..c.args.len()).any(|i| {
                a.constant_arg(c, i).is_some_and(|vals| {
                    vals.iter().any(|v| {
                        let v = v.to_lowercase();
                        keywords.iter().any(|k| v.contains(k))
                    })
                })
            })
        })
        .collect()
}

fn tainted_keyword_sites(a: &Analysis<'_>, apis: &PatternSet, rule: &Rule, cat: Category, verb: &str) -> Vec<Finding> {
    let g = a.graph;
    let targets: Vec<(usize, Category)> = keyword_sites(a, apis, rule)
        .into_iter()
        .filter_map(|c| g.index_of(&c.node()).map(|i| (i, cat)))
        .collect();
    if targets.is_empty() {
        return Vec::new();
    }
    let sources = sensitive_source_nodes(g, a.flows);
    first_path_per_target(shortest_paths(g, &sources, &targets, &[]))
        .into_iter()
        .map(|(target, p)| {
            Finding::new(rule, rule.severity, &target, format!("{} data from {} is {verb}", p.source_category, p.source()))
                .with_evidence(Evidence::Path(p))
        })
        .collect()
}

pub(super) fn detect_cleartext_storage(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    tainted_keyword_sites(a, &a.flows.stores, rule, Category::CleartextStore, "stored in cleartext")
}

pub(super) fn detect_sensitive_logging(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    tainted_keyword_sites(a, &a.flows.logs, rule, Category::Log, "logged")
}

pub(super) fn detect_janus(a: &Analysis<'_>, rule: &Rule) -> Vec<Finding> {
    let Some(signing) = &a.pkg.signing else { return Vec::new() };
    if !signing.schemes.contains(&SigningScheme::V1) {
        return Vec::new();
    }
    let evidence = Evidence::Signing {
        schemes: signing.schemes.iter().copied().collect(),
    };
    let f = if signing.v1_only() {
        Finding::new(rule, rule.severity, "signing", "signed with the v1 scheme only")
    } else {
        Finding::new(rule, Severity::Info, "signing", "v1 signature kept for platform versions before 7.0")
            .with_note(Note::CompatibilityNote)
    };
    vec![f.with_evidence(evidence)]
}
