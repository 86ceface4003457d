use super::*;
use crate::package::AppPackage;

const MANIFEST: &str = r#"<manifest package="gov.test.flow"/>"#;

fn pkg(files: &[&str]) -> AppPackage {
    AppPackage::from_sources(MANIFEST, files).unwrap()
}

fn site(g: &FlowGraph, s: &str, slot: Slot) -> usize {
    g.index_of(&NodeRef {
        method: s.parse().unwrap(),
        slot,
    })
    .unwrap()
}

#[test]
fn straight_line_method() {
    let p = pkg(&["class a.Net\nmethod go(0) {\n  r1 = const-string \"http://example.org\"\n  call-void Net::open(r1)\n}"]);
    let g = build_flow_graph(&p);
    assert_eq!(g.len(), 2);
    assert_eq!(g.edge_count(), 1);
    let (a, b, kinds) = g.edges().next().unwrap();
    assert_eq!((a, b), (0, 1));
    assert!(kinds.contains(EdgeKinds::SEQUENTIAL | EdgeKinds::DATA));
}

#[test]
fn call_and_return_edges() {
    let p = pkg(&["class a.B\nmethod caller(0) {\n  r1 = const-string \"x\"\n  r2 = call a.B::callee(r1)\n  return-void\n}\nmethod callee(1) {\n  return r0\n}"]);
    let g = build_flow_graph(&p);
    let call = site(&g, "a.B::caller(0)", Slot::Instr(1));
    let entry = site(&g, "a.B::callee(1)", Slot::Entry);
    let ret = site(&g, "a.B::callee(1)", Slot::Instr(0));
    assert!(g.edge(call, entry).unwrap().contains(EdgeKinds::CALL));
    assert!(g.edge(ret, call).unwrap().contains(EdgeKinds::RETURN));
    assert!(g.edge(entry, ret).unwrap().contains(EdgeKinds::DATA));
    assert!(entry < call, "callee(1) sorts before caller(0)");
}

#[test]
fn field_edges_match_by_name() {
    let p = pkg(&[
        "class a.W\nmethod put(0) {\n  r1 = const-string \"v\"\n  field-put a.S.f, r1\n  return-void\n}",
        "class a.R\nmethod get(0) {\n  r1 = field-get a.S.f\n  r2 = field-get a.S.other\n  return-void\n}",
    ]);
    let g = build_flow_graph(&p);
    let put = site(&g, "a.W::put(0)", Slot::Instr(1));
    let get = site(&g, "a.R::get(0)", Slot::Instr(0));
    let other = site(&g, "a.R::get(0)", Slot::Instr(1));
    assert_eq!(g.edge(put, get), Some(EdgeKinds::FIELD));
    assert_eq!(g.edge(put, other), None);
}

#[test]
fn bluetooth_to_external_storage() {
    let p = pkg(&["class a.Store\nmethod save(0) {\n  r1 = call android.bluetooth.BluetoothGattCharacteristic::getValue()\n  r2 = const-string \"/sdcard/en.bin\"\n  call-void java.io.ExternalFile::write(r2, r1)\n  return-void\n}"]);
    let g = build_flow_graph(&p);
    let paths = confirm_leak(&g, SourceSinkCatalog::bundled());
    assert_eq!(paths.len(), 1);
    assert_eq!(paths[0].source_category, Category::BluetoothChannel);
    assert_eq!(paths[0].sink_category, Category::SharedStorage);
    assert_eq!(paths[0].nodes.len(), 2);
    assert!(g.is_flow_path(&paths[0].nodes));
}

#[test]
fn disconnected_methods_do_not_leak() {
    let p = pkg(&["class a.Store\nmethod read(0) {\n  r1 = call android.bluetooth.BluetoothGattCharacteristic::getValue()\n  return-void\n}\nmethod write(0) {\n  r2 = const-string \"/sdcard/x\"\n  call-void java.io.ExternalFile::write(r2, r2)\n  return-void\n}"]);
    let g = build_flow_graph(&p);
    assert!(confirm_leak(&g, SourceSinkCatalog::bundled()).is_empty());
}

#[test]
fn control_flow_alone_does_not_carry_taint() {
    // Source precedes the sink in the same method but its value never reaches it.
    let p = pkg(&["class a.Store\nmethod m(0) {\n  r1 = call android.bluetooth.BluetoothGattCharacteristic::getValue()\n  r2 = const-string \"x\"\n  call-void java.io.ExternalFile::write(r2, r2)\n  return-void\n}"]);
    let g = build_flow_graph(&p);
    assert!(confirm_leak(&g, SourceSinkCatalog::bundled()).is_empty());
}

const RECEIVER_TO_SQL: &str = "class a.Rx\nmethod onReceive(2) {\n  r2 = const-string \"id\"\n  r3 = call android.content.Intent::getStringExtra(r1, r2)\n  r4 = const-string \"DELETE FROM keys WHERE id=\"\n  r5 = call java.lang.String::concat(r4, r3)\n  call-void android.database.sqlite.SQLiteDatabase::execSQL(r5)\n  return-void\n}";

#[test]
fn unsanitized_injection() {
    let p = pkg(&[RECEIVER_TO_SQL]);
    let g = build_flow_graph(&p);
    let paths = confirm_injection(&g, SourceSinkCatalog::bundled());
    assert_eq!(paths.len(), 1);
    assert_eq!(paths[0].source_category, Category::ExportedReceiverExtra);
    assert_eq!(paths[0].sink_category, Category::SqlQuery);
}

#[test]
fn sanitizer_suppresses_injection() {
    let src = RECEIVER_TO_SQL.replace(
        "  r5 = call java.lang.String::concat(r4, r3)",
        "  r6 = call android.database.DatabaseUtils::sqlEscapeString(r3)\n  r5 = call java.lang.String::concat(r4, r6)",
    );
    let p = pkg(&[&src]);
    let g = build_flow_graph(&p);
    assert!(confirm_injection(&g, SourceSinkCatalog::bundled()).is_empty());
}

#[test]
fn hardcoded_ip_is_a_source() {
    let p = pkg(&["class a.N\nmethod m(0) {\n  r1 = const-string \"10.0.0.5\"\n  r2 = call java.net.URL::new(r1)\n  return-void\n}"]);
    let g = build_flow_graph(&p);
    let paths = confirm_leak(&g, SourceSinkCatalog::bundled());
    assert_eq!(paths.len(), 1);
    assert_eq!(paths[0].source_category, Category::HardcodedPersonalString);
    assert_eq!(paths[0].sink_category, Category::Network);
}
