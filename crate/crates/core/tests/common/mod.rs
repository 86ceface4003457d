//! Helpers shared by the integration tests: fixture locations, a random
//! SIR package generator, and brute-force oracles for the flow graph.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;

use appaudit::flow::{NodeRef, SourceSinkCatalog};
use appaudit::geo::GeoTable;
use appaudit::package::AppPackage;
use appaudit::policy::parse_claims;
use appaudit::report::AuditConfig;
use appaudit::sir::{Instruction, MethodBody, MethodId, Reg};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn corpus_config() -> AuditConfig {
    let root = fixtures();
    let claims = parse_claims(&std::fs::read_to_string(root.join("claims.txt")).unwrap()).unwrap();
    let geo = GeoTable::parse(&std::fs::read_to_string(root.join("geo.txt")).unwrap()).unwrap();
    AuditConfig::new(claims, geo)
}

// ---------------------------------------------------------------------
// Random packages

const SOURCES: &[&str] = &[
    "android.bluetooth.BluetoothGattCharacteristic::getValue",
    "android.widget.EditText::getText",
];
const UNTRUSTED: &[&str] = &["android.content.Intent::getStringExtra", "okhttp3.ResponseBody::string"];
const SINKS: &[&str] = &["java.io.ExternalFile::write", "java.net.URL::new"];
const CONSUMERS: &[&str] = &["android.database.sqlite.SQLiteDatabase::execSQL"];
const SANITIZERS: &[&str] = &["android.database.DatabaseUtils::sqlEscapeString"];
const STRINGS: &[&str] = &["x", "10.0.0.7", "http://h.example.org/a", "secret_token", "user password"];
const FIELDS: &[&str] = &["a.S.f", "a.S.g"];

/// A random package whose flow graph has at most `max_nodes` nodes.
pub fn random_package(rng: &mut impl Rng, max_nodes: usize) -> AppPackage {
    let files = random_sir(rng, max_nodes);
    let refs: Vec<&str> = files.iter().map(String::as_str).collect();
    AppPackage::from_sources(r#"<manifest package="gov.random.app"/>"#, &refs).unwrap()
}

/// A random package with a random manifest and signing block as well.
pub fn random_app(rng: &mut impl Rng, max_nodes: usize) -> AppPackage {
    let files = random_sir(rng, max_nodes);
    let refs: Vec<&str> = files.iter().map(String::as_str).collect();
    let mut pkg = AppPackage::from_sources(&random_manifest(rng), &refs).unwrap();
    let schemes = ["v1", "v2", "v3"];
    let mut chosen: Vec<&str> = schemes.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if chosen.is_empty() {
        chosen.push(schemes.choose(rng).unwrap());
    }
    let meta = format!("schemes={}\ncert.0.subject=CN=A\ncert.0.issuer=CN=B\n", chosen.join(","));
    pkg.signing = Some(appaudit::package::SigningInfo::parse(&meta).unwrap());
    pkg
}

pub fn random_manifest(rng: &mut impl Rng) -> String {
    const PERMS: &[&str] = &[
        "android.permission.INTERNET",
        "android.permission.BLUETOOTH",
        "android.permission.ACCESS_FINE_LOCATION",
        "android.permission.USE_BIOMETRIC",
        "android.permission.WAKE_LOCK",
    ];
    const GUARDS: &[&str] = &[
        "com.google.android.gms.nearby.exposurenotification.EXPOSURE_CALLBACK",
        "gov.random.app.OWN_PERMISSION",
        "android.permission.BIND_JOB_SERVICE",
    ];
    let mut xml = String::from(
        r#"<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="gov.random.app">"#,
    );
    for p in PERMS.iter().filter(|_| rng.gen_bool(0.5)) {
        xml.push_str(&format!(r#"<uses-permission android:name="{p}"/>"#));
    }
    let backup = ["", r#" android:allowBackup="true""#, r#" android:allowBackup="false""#].choose(rng).unwrap();
    xml.push_str(&format!("<application{backup}>"));
    for i in 0..rng.gen_range(0..4) {
        let kind = ["activity", "service", "receiver", "provider"].choose(rng).unwrap();
        let exported = ["", r#" android:exported="true""#, r#" android:exported="false""#].choose(rng).unwrap();
        let perm = if rng.gen_bool(0.4) {
            format!(r#" android:permission="{}""#, GUARDS.choose(rng).unwrap())
        } else {
            String::new()
        };
        let filter = if rng.gen_bool(0.5) {
            r#"<intent-filter><action android:name="gov.random.app.ACTION"/></intent-filter>"#
        } else {
            ""
        };
        xml.push_str(&format!(r#"<{kind} android:name=".C{i}"{exported}{perm}>{filter}</{kind}>"#));
    }
    xml.push_str("</application></manifest>");
    xml
}

fn random_sir(rng: &mut impl Rng, max_nodes: usize) -> Vec<String> {
    let classes = ["a.A", "a.B"];
    let n_methods = rng.gen_range(2..=4);
    let sigs: Vec<(usize, String, usize)> = (0..n_methods)
        .map(|i| (rng.gen_range(0..classes.len()), format!("m{i}"), rng.gen_range(0..=2)))
        .collect();
    // Budget leaves room for one entry node per method.
    let mut budget = max_nodes - n_methods;
    let mut bodies: Vec<Vec<String>> = Vec::new();
    for (mi, (_, _, arity)) in sigs.iter().enumerate() {
        let remaining_methods = n_methods - mi - 1;
        let cap = budget.saturating_sub(remaining_methods).min(9);
        let len = if cap == 0 { 0 } else { rng.gen_range(1..=cap) };
        budget -= len;
        bodies.push(random_body(rng, len, *arity, &sigs, &classes));
    }
    let mut files: Vec<String> = Vec::new();
    for (ci, class) in classes.iter().enumerate() {
        let mut text = format!("class {class}\n");
        for ((c, name, arity), body) in sigs.iter().zip(&bodies) {
            if *c != ci {
                continue;
            }
            text.push_str(&format!("method {name}({arity}) {{\n"));
            for l in body {
                text.push_str(&format!("  {l}\n"));
            }
            text.push_str("}\n");
        }
        if text.contains("method") {
            files.push(text);
        }
    }
    files
}

fn random_body(rng: &mut impl Rng, len: usize, arity: usize, sigs: &[(usize, String, usize)], classes: &[&str]) -> Vec<String> {
    let reg = |rng: &mut dyn rand::RngCore| format!("r{}", rng.gen_range(0..3));
    let mut out = Vec::new();
    if len == 0 {
        return out;
    }
    let label_at = if len >= 3 && rng.gen_bool(0.5) { Some(rng.gen_range(0..len - 1)) } else { None };
    let _ = arity;
    for i in 0..len {
        if Some(i) == label_at {
            out.push("label L0".to_string());
            continue;
        }
        if i == len - 1 {
            out.push(if rng.gen_bool(0.5) { format!("return {}", reg(rng)) } else { "return-void".into() });
            continue;
        }
        let line = match rng.gen_range(0..18) {
            14 | 15 => format!("{} = call {}()", reg(rng), [SOURCES, UNTRUSTED].choose(rng).unwrap().choose(rng).unwrap()),
            16 | 17 => format!("call-void {}({})", [SINKS, CONSUMERS].choose(rng).unwrap().choose(rng).unwrap(), reg(rng)),
            12 => format!("call-void android.content.SharedPreferences$Editor::putString({}, {})", reg(rng), reg(rng)),
            13 => format!("call-void android.util.Log::d({})", reg(rng)),
            0 => format!("{} = call {}()", reg(rng), SOURCES.choose(rng).unwrap()),
            1 => format!("{} = call {}()", reg(rng), UNTRUSTED.choose(rng).unwrap()),
            2 => format!("call-void {}({})", SINKS.choose(rng).unwrap(), reg(rng)),
            3 => format!("call-void {}({})", CONSUMERS.choose(rng).unwrap(), reg(rng)),
            4 => format!("{} = call {}({})", reg(rng), SANITIZERS.choose(rng).unwrap(), reg(rng)),
            5 | 6 => {
                let (c, name, ar) = sigs.choose(rng).unwrap();
                let args: Vec<String> = (0..*ar).map(|_| reg(rng)).collect();
                format!("{} = call {}::{name}({})", reg(rng), classes[*c], args.join(", "))
            }
            7 => format!("{} = const-string \"{}\"", reg(rng), STRINGS.choose(rng).unwrap()),
            8 => format!("{} = move {}", reg(rng), reg(rng)),
            9 => format!("field-put {}, {}", FIELDS.choose(rng).unwrap(), reg(rng)),
            10 => format!("{} = field-get {}", reg(rng), FIELDS.choose(rng).unwrap()),
            _ => match label_at {
                Some(_) if rng.gen_bool(0.5) => format!("if {} goto L0", reg(rng)),
                Some(_) => "goto L0".to_string(),
                None => format!("{} = const-int 1", reg(rng)),
            },
        };
        out.push(line);
    }
    out
}

// ---------------------------------------------------------------------
// Edge oracle

/// Where a register value came from along one concrete path.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
enum Def {
    Param,
    At(usize),
}

/// `(definition, use)` pairs found by walking every register state the
/// method can reach, one concrete definition per register.
fn brute_force_def_use(m: &MethodBody) -> BTreeSet<(Def, usize)> {
    let mut pairs = BTreeSet::new();
    if m.instructions.is_empty() {
        return pairs;
    }
    let init: BTreeMap<u32, Def> = (0..m.id.arity as u32).map(|r| (r, Def::Param)).collect();
    let mut seen: HashSet<(usize, BTreeMap<u32, Def>)> = HashSet::new();
    // Dead code never runs, so exploration starts at the entry only.
    let mut stack = vec![(0usize, init)];
    while let Some((pc, env)) = stack.pop() {
        if !seen.insert((pc, env.clone())) {
            continue;
        }
        let ins = &m.instructions[pc];
        let uses: Vec<Reg> = match ins {
            Instruction::Call { args, .. } => args.clone(),
            Instruction::FieldPut { src, .. } | Instruction::Move { src, .. } => vec![*src],
            Instruction::IfGoto { cond, .. } => vec![*cond],
            Instruction::Return { src } => vec![*src],
            _ => vec![],
        };
        for r in uses {
            if let Some(d) = env.get(&r.0) {
                pairs.insert((*d, pc));
            }
        }
        let mut next = env.clone();
        let dst = match ins {
            Instruction::ConstString { dst, .. }
            | Instruction::ConstInt { dst, .. }
            | Instruction::FieldGet { dst, .. }
            | Instruction::Move { dst, .. } => Some(*dst),
            Instruction::Call { dst, .. } => *dst,
            _ => None,
        };
        if let Some(d) = dst {
            next.insert(d.0, Def::At(pc));
        }
        let label = |l: &str| {
            m.instructions
                .iter()
                .position(|i| matches!(i, Instruction::Label { name } if name == l))
                .unwrap()
        };
        let succs: Vec<usize> = match ins {
            Instruction::Goto { label: l } => vec![label(l)],
            Instruction::IfGoto { label: l, .. } => vec![label(l), pc + 1],
            Instruction::Return { .. } | Instruction::ReturnVoid => vec![],
            _ => vec![pc + 1],
        };
        for s in succs.into_iter().filter(|&s| s < m.instructions.len()) {
            stack.push((s, next.clone()));
        }
    }
    pairs
}

/// Node set and value-carrying edges, derived from instruction semantics.
pub fn oracle_graph(pkg: &AppPackage) -> (BTreeSet<NodeRef>, BTreeSet<(NodeRef, NodeRef)>) {
    let methods: BTreeMap<MethodId, &MethodBody> = pkg.methods().map(|(_, m)| (m.id.clone(), m)).collect();
    let called: BTreeSet<MethodId> = methods
        .values()
        .flat_map(|m| m.instructions.iter())
        .filter_map(|i| match i {
            Instruction::Call { callee, .. } if methods.contains_key(callee) => Some(callee.clone()),
            _ => None,
        })
        .collect();
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for (id, m) in &methods {
        let has_entry = id.arity > 0 || called.contains(id) || m.instructions.is_empty();
        if has_entry {
            nodes.insert(NodeRef::entry(id.clone()));
        }
        for i in 0..m.instructions.len() {
            nodes.insert(NodeRef::instr(id.clone(), i));
        }
        for (d, u) in brute_force_def_use(m) {
            let from = match d {
                Def::Param => NodeRef::entry(id.clone()),
                Def::At(i) => NodeRef::instr(id.clone(), i),
            };
            edges.insert((from, NodeRef::instr(id.clone(), u)));
        }
    }
    for (id, m) in &methods {
        for (i, ins) in m.instructions.iter().enumerate() {
            let here = NodeRef::instr(id.clone(), i);
            match ins {
                Instruction::Call { callee, .. } if methods.contains_key(callee) => {
                    edges.insert((here.clone(), NodeRef::entry(callee.clone())));
                    for (j, r) in methods[callee].instructions.iter().enumerate() {
                        if matches!(r, Instruction::Return { .. } | Instruction::ReturnVoid) {
                            edges.insert((NodeRef::instr(callee.clone(), j), here.clone()));
                        }
                    }
                }
                Instruction::FieldPut { field, .. } => {
                    for (other, om) in &methods {
                        for (j, g) in om.instructions.iter().enumerate() {
                            if matches!(g, Instruction::FieldGet { field: f, .. } if f == field) {
                                edges.insert((here.clone(), NodeRef::instr(other.clone(), j)));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    (nodes, edges)
}

/// Control edges: entry to first instruction, fall-through and jumps.
pub fn oracle_control_edges(pkg: &AppPackage) -> BTreeSet<(NodeRef, NodeRef)> {
    let (nodes, _) = oracle_graph(pkg);
    let mut edges = BTreeSet::new();
    for (_, m) in pkg.methods() {
        let id = &m.id;
        let entry = NodeRef::entry(id.clone());
        if nodes.contains(&entry) && !m.instructions.is_empty() {
            edges.insert((entry, NodeRef::instr(id.clone(), 0)));
        }
        for (i, ins) in m.instructions.iter().enumerate() {
            let here = NodeRef::instr(id.clone(), i);
            let stops = matches!(ins, Instruction::Goto { .. } | Instruction::Return { .. } | Instruction::ReturnVoid);
            if !stops && i + 1 < m.instructions.len() {
                edges.insert((here.clone(), NodeRef::instr(id.clone(), i + 1)));
            }
            if let Instruction::Goto { label: l } | Instruction::IfGoto { label: l, .. } = ins {
                let t = m
                    .instructions
                    .iter()
                    .position(|x| matches!(x, Instruction::Label { name } if name == l))
                    .unwrap();
                edges.insert((here, NodeRef::instr(id.clone(), t)));
            }
        }
    }
    edges
}

/// Value-carrying edges of a built graph, as node pairs.
pub fn graph_flow_edges(g: &appaudit::flow::FlowGraph) -> BTreeSet<(NodeRef, NodeRef)> {
    g.edges()
        .filter(|(_, _, k)| k.intersects(appaudit::flow::EdgeKinds::FLOW))
        .map(|(a, b, _)| (g.node(a).site.clone(), g.node(b).site.clone()))
        .collect()
}

pub fn graph_control_edges(g: &appaudit::flow::FlowGraph) -> BTreeSet<(NodeRef, NodeRef)> {
    use appaudit::flow::EdgeKinds;
    g.edges()
        .filter(|(_, _, k)| k.intersects(EdgeKinds::SEQUENTIAL | EdgeKinds::BRANCH))
        .map(|(a, b, _)| (g.node(a).site.clone(), g.node(b).site.clone()))
        .collect()
}

/// Checks the leak and injection queries of `pkg` against the oracles.
pub fn check_against_oracle(pkg: &AppPackage) -> Result<(), String> {
    use appaudit::flow::{build_flow_graph, confirm_injection, confirm_leak};
    let cat = SourceSinkCatalog::bundled();
    let g = build_flow_graph(pkg);
    let (nodes, edges) = oracle_graph(pkg);
    let built: BTreeSet<NodeRef> = g.nodes().iter().map(|n| n.site.clone()).collect();
    if built != nodes {
        return Err(format!("node sets differ: {built:?} vs {nodes:?}"));
    }
    if graph_flow_edges(&g) != edges {
        return Err("flow edge sets differ".into());
    }
    for (name, got, q) in [
        ("leak", confirm_leak(&g, cat), leak_query(pkg, &nodes, cat)),
        ("injection", confirm_injection(&g, cat), injection_query(pkg, &nodes, cat)),
    ] {
        let got: BTreeMap<(NodeRef, NodeRef), Vec<NodeRef>> = got
            .into_iter()
            .map(|p| ((p.source().clone(), p.target().clone()), p.nodes))
            .collect();
        let want = oracle_paths(&edges, &q);
        if got != want {
            return Err(format!("{name} paths differ:\n got {got:?}\nwant {want:?}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Path oracle

/// Sources and targets a taint query starts and ends at, by node.
pub struct Query {
    pub sources: BTreeSet<NodeRef>,
    pub targets: BTreeSet<NodeRef>,
    pub blocked: BTreeSet<NodeRef>,
}

fn callee_at(pkg: &AppPackage, n: &NodeRef) -> Option<MethodId> {
    let appaudit::flow::Slot::Instr(i) = n.slot else { return None };
    match &pkg.method(&n.method)?.instructions[i] {
        Instruction::Call { callee, .. } => Some(callee.clone()),
        _ => None,
    }
}

fn const_at(pkg: &AppPackage, n: &NodeRef) -> Option<String> {
    let appaudit::flow::Slot::Instr(i) = n.slot else { return None };
    match &pkg.method(&n.method)?.instructions[i] {
        Instruction::ConstString { value, .. } => Some(pkg.resolve_string(value).to_string()),
        _ => None,
    }
}

pub fn leak_query(pkg: &AppPackage, nodes: &BTreeSet<NodeRef>, cat: &SourceSinkCatalog) -> Query {
    let calls = |pred: &dyn Fn(&MethodId) -> bool| -> BTreeSet<NodeRef> {
        nodes
            .iter()
            .filter(|n| callee_at(pkg, n).is_some_and(|c| pred(&c)))
            .cloned()
            .collect()
    };
    let mut sources = calls(&|c| cat.source_category(c).is_some());
    sources.extend(nodes.iter().filter(|n| const_at(pkg, n).is_some_and(|v| cat.personal_string(&v))).cloned());
    Query {
        sources,
        targets: calls(&|c| cat.sink_category(c).is_some()),
        blocked: BTreeSet::new(),
    }
}

pub fn injection_query(pkg: &AppPackage, nodes: &BTreeSet<NodeRef>, cat: &SourceSinkCatalog) -> Query {
    let calls = |pred: &dyn Fn(&MethodId) -> bool| -> BTreeSet<NodeRef> {
        nodes
            .iter()
            .filter(|n| callee_at(pkg, n).is_some_and(|c| pred(&c)))
            .cloned()
            .collect()
    };
    Query {
        sources: calls(&|c| cat.untrusted_category(c).is_some()),
        targets: calls(&|c| cat.consumer_category(c).is_some()),
        blocked: calls(&|c| cat.is_sanitizer(c)),
    }
}

/// For every reachable (source, target) pair, the shortest simple path,
/// ties broken by the smallest node sequence. Found by exhaustive DFS.
pub fn oracle_paths(edges: &BTreeSet<(NodeRef, NodeRef)>, q: &Query) -> BTreeMap<(NodeRef, NodeRef), Vec<NodeRef>> {
    let mut succ: BTreeMap<&NodeRef, Vec<&NodeRef>> = BTreeMap::new();
    for (a, b) in edges {
        succ.entry(a).or_default().push(b);
    }
    let mut best: BTreeMap<(NodeRef, NodeRef), Vec<NodeRef>> = BTreeMap::new();
    for s in q.sources.iter().filter(|s| !q.blocked.contains(*s)) {
        let mut path = vec![s.clone()];
        dfs(&succ, q, &mut path, &mut best);
    }
    best
}

fn dfs(
    succ: &BTreeMap<&NodeRef, Vec<&NodeRef>>,
    q: &Query,
    path: &mut Vec<NodeRef>,
    best: &mut BTreeMap<(NodeRef, NodeRef), Vec<NodeRef>>,
) {
    let last = path.last().unwrap().clone();
    if path.len() > 1 && q.targets.contains(&last) {
        let key = (path[0].clone(), last.clone());
        let better = match best.get(&key) {
            None => true,
            Some(b) => (path.len(), &*path) < (b.len(), b),
        };
        if better {
            best.insert(key, path.clone());
        }
    }
    for &n in succ.get(&last).map(Vec::as_slice).unwrap_or(&[]) {
        if path.contains(n) || q.blocked.contains(n) {
            continue;
        }
        path.push(n.clone());
        dfs(succ, q, path, best);
        path.pop();
    }
}

// ---------------------------------------------------------------------
// Expected corpus tables

/// One app's expected row: permissions P1..P12, the five policy
/// columns, the six vulnerability columns, the five baseline columns.
pub struct Expected {
    pub dir: &'static str,
    pub perms: &'static str,
    pub violations: &'static str,
    pub vulns: &'static str,
    pub fps: &'static str,
}

const fn row(
    dir: &'static str,
    perms: &'static str,
    violations: &'static str,
    vulns: &'static str,
    fps: &'static str,
) -> Expected {
    Expected { dir, perms, violations, vulns, fps }
}

// North Dakota declares P9/P10 and DC has backup rather than the SSL
// flaw, which keeps the rows consistent with the column totals.
pub const EXPECTED: &[Expected] = &[
    row("alabama", "YYYYYYYYNNNN", "YYYNY", "YYNNNY", "YYYYY"),
    row("arizona", "YNYYYNYYYYNN", "YNNNN", "NYYNYN", "YYNYY"),
    row("california", "YNYYYNYYNNNN", "YNNYY", "NYNNNY", "YYYYY"),
    row("colorado", "YNYYYNYYNNNN", "YNNYY", "NYNNNY", "YYYYY"),
    row("connecticut", "YNYYYNYYNNNN", "YNNNY", "YYNNNY", "YYYYY"),
    row("dc", "YNYYYNYYNNNN", "YNNYY", "NYNYNY", "YYYYY"),
    row("delaware", "YYYYYYNYNNNN", "YYNYN", "NYYNNN", "YYYYY"),
    row("guam", "YYYYYYYYNNNN", "NNYNN", "YYYNNY", "YYYYY"),
    row("hawaii", "YYYYYYYYNNNN", "YYYNN", "YYNNNY", "YYYYY"),
    row("louisiana", "YYYYYYYYNNNN", "YNYNN", "YYNNNY", "YYYYY"),
    row("maryland", "YNYYYNYYNNNN", "YNNYY", "YYNNNY", "YYYYY"),
    row("michigan", "YNYYYNYYNNNN", "YNNYN", "NNNNNY", "YYYYY"),
    row("minnesota", "YYYYYYYYNNNN", "NYYYY", "YYNNNY", "YYYYY"),
    row("nevada", "YNYYYNYYNNYY", "YNNYY", "YYNYNY", "YYYYY"),
    row("new-jersey", "YYYYYYYYNNNN", "NYNYN", "NYYNNN", "YYYYY"),
    row("new-mexico", "YNYYYNYYNNYY", "YYNYY", "YYNYNY", "YYYYY"),
    row("new-york", "YYYYYNYYNNNN", "NYNNN", "NYYNNN", "YYYYY"),
    row("north-carolina", "YNYYYNYYNNNN", "YNYYY", "NYNNNY", "YYYYY"),
    row("north-dakota", "YNYYYNYYYYNN", "YYNNY", "NYYNNN", "YYYYY"),
    row("pennsylvania", "YYYYYNYYNNNN", "YYNNN", "NYYNNN", "YYYYY"),
    row("utah", "YNYYYNYYNNNN", "YNNYN", "NYNYNY", "YYYYY"),
    row("virginia", "YNYYYNYYNNNN", "YNNNN", "YNNNNY", "NYNYY"),
    row("washington", "YNYYYNYYNNNN", "YNNYY", "YYNNNY", "YYYYY"),
    row("wisconsin", "YNYYYNYYNNNN", "YNNYY", "YYNNNY", "YYYYY"),
];

pub fn expected(dir: &str) -> &'static Expected {
    EXPECTED.iter().find(|e| e.dir == dir).unwrap()
}

pub fn marks(cells: &[appaudit::report::Cell]) -> String {
    cells.iter().map(|c| c.mark()).collect()
}

pub fn perm_marks(report: &appaudit::report::AuditReport) -> String {
    (1..=12)
        .map(|i| if report.permission_codes.contains(&format!("P{i}")) { 'Y' } else { 'N' })
        .collect()
}

/// Column sums of an expected table column group.
pub fn column_sums(pick: fn(&Expected) -> &'static str) -> Vec<usize> {
    let width = pick(&EXPECTED[0]).len();
    (0..width)
        .map(|i| EXPECTED.iter().filter(|e| pick(e).as_bytes()[i] == b'Y').count())
        .collect()
}
