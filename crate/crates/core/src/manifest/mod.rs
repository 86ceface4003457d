//! Manifest model, parsing of the supported element subset, and the
//! privilege questions answered from it.
//!
//! Supported elements:
//!
//! ```text
//! <manifest package android:versionName android:versionCode>
//!   <uses-permission android:name/>
//!   <application android:allowBackup>
//!     <activity|service|receiver|provider android:name android:exported android:permission>
//!       <intent-filter><action android:name/></intent-filter>
//!     </activity>
//!     <network-security-config><pin-set><pin digest subject issuer>..</pin></pin-set></network-security-config>
//!   </application>
//!   <queries><intent><action android:name/></intent></queries>
//! </manifest>
//! ```
//!
//! Anything else is skipped and reported as an `UnrecognizedElement`
//! diagnostic.

mod permissions;
mod privilege;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use roxmltree::{Document, Node};
use serde::{Deserialize, Serialize};

use crate::diagnostic::{Diagnostic, DiagnosticKind};
use crate::error::{Error, Result};

pub use permissions::{
    classify_permission, GrantTime, PermissionCatalog, PermissionClass, PermissionEntry,
    PermissionKind,
};
pub use privilege::{privilege_profile, PrivilegeProfile};

pub const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";
const MANIFEST_FILE: &str = "manifest.xml";

/// Three-valued manifest attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriState {
    ExplicitTrue,
    ExplicitFalse,
    #[default]
    Unset,
}

impl TriState {
    fn from_attr(value: Option<&str>, line: usize, attr: &str) -> Result<Self> {
        match value {
            None => Ok(TriState::Unset),
            Some("true") => Ok(TriState::ExplicitTrue),
            Some("false") => Ok(TriState::ExplicitFalse),
            Some(other) => Err(Error::parse(
                MANIFEST_FILE,
                line,
                format!("{attr} must be true or false, got `{other}`"),
            )),
        }
    }

    fn as_attr(self) -> Option<&'static str> {
        match self {
            TriState::ExplicitTrue => Some("true"),
            TriState::ExplicitFalse => Some("false"),
            TriState::Unset => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentKind {
    Activity,
    Service,
    Receiver,
    Provider,
}

impl ComponentKind {
    pub fn element(self) -> &'static str {
        match self {
            ComponentKind::Activity => "activity",
            ComponentKind::Service => "service",
            ComponentKind::Receiver => "receiver",
            ComponentKind::Provider => "provider",
        }
    }

    fn from_element(name: &str) -> Option<Self> {
        Some(match name {
            "activity" => ComponentKind::Activity,
            "service" => ComponentKind::Service,
            "receiver" => ComponentKind::Receiver,
            "provider" => ComponentKind::Provider,
            _ => return None,
        })
    }
}

/// Platform release band that decides the default of `android:exported`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum TargetEra {
    /// Targets below API 31: components with intent filters are exported by default.
    #[default]
    #[serde(rename = "pre-31")]
    Pre31,
    /// API 31 and later: `android:exported` must be explicit.
    #[serde(rename = "31-plus")]
    From31,
}

impl FromStr for TargetEra {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pre-31" => Ok(TargetEra::Pre31),
            "31-plus" => Ok(TargetEra::From31),
            other => Err(format!("unknown target era `{other}` (expected pre-31 or 31-plus)")),
        }
    }
}

impl fmt::Display for TargetEra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetEra::Pre31 => "pre-31",
            TargetEra::From31 => "31-plus",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsesPermission {
    pub name: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ApplicationInfo {
    pub allow_backup: TriState,
    /// Line of the `<application>` element, `None` when the element is absent.
    pub line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDecl {
    pub kind: ComponentKind,
    /// Class name as written; may be relative (`.Main`).
    pub class_name: String,
    pub exported: TriState,
    pub permission: Option<String>,
    pub intent_filters: Vec<String>,
    pub line: usize,
}

impl ComponentDecl {
    /// Fully qualified class name, resolving `.Name` and bare `Name`
    /// against the manifest package.
    pub fn qualified_class(&self, package: &str) -> String {
        if let Some(rest) = self.class_name.strip_prefix('.') {
            format!("{package}.{rest}")
        } else if !self.class_name.contains('.') {
            format!("{package}.{}", self.class_name)
        } else {
            self.class_name.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryIntent {
    pub action: String,
    pub line: usize,
}

/// A certificate pin declared in the embedded network security config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinEntry {
    pub digest: String,
    pub value: String,
    pub subject: Option<String>,
    pub issuer: Option<String>,
    pub line: usize,
}

impl PinEntry {
    pub fn self_signed(&self) -> bool {
        matches!((&self.subject, &self.issuer), (Some(s), Some(i)) if s == i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub package_name: String,
    pub version_name: Option<String>,
    pub version_code: Option<String>,
    /// Deduplicated, first-occurrence order.
    pub permissions: Vec<UsesPermission>,
    pub application: ApplicationInfo,
    pub components: Vec<ComponentDecl>,
    pub queries: Vec<QueryIntent>,
    pub pins: Vec<PinEntry>,
    pub line: usize,
}

/// A place in the manifest that a finding points at.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ManifestLocus {
    pub element: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub line: usize,
}

impl fmt::Display for ManifestLocus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{MANIFEST_FILE}:{} <{}", self.line, self.element)?;
        if let Some(name) = &self.name {
            write!(f, " {name}")?;
        }
        f.write_str(">")
    }
}

impl Manifest {
    pub fn permission_names(&self) -> impl Iterator<Item = &str> {
        self.permissions.iter().map(|p| p.name.as_str())
    }

    pub fn declares(&self, permission: &str) -> bool {
        self.permission_names().any(|p| p == permission)
    }

    pub fn root_locus(&self) -> ManifestLocus {
        ManifestLocus {
            element: "manifest".into(),
            name: Some(self.package_name.clone()),
            line: self.line,
        }
    }

    pub fn application_locus(&self) -> ManifestLocus {
        match self.application.line {
            Some(line) => ManifestLocus {
                element: "application".into(),
                name: None,
                line,
            },
            None => self.root_locus(),
        }
    }

    pub fn component_locus(&self, c: &ComponentDecl) -> ManifestLocus {
        ManifestLocus {
            element: c.kind.element().into(),
            name: Some(c.class_name.clone()),
            line: c.line,
        }
    }

    pub fn permission_locus(&self, p: &UsesPermission) -> ManifestLocus {
        ManifestLocus {
            element: "uses-permission".into(),
            name: Some(p.name.clone()),
            line: p.line,
        }
    }

    pub fn pin_locus(&self, p: &PinEntry) -> ManifestLocus {
        ManifestLocus {
            element: "pin".into(),
            name: None,
            line: p.line,
        }
    }

    /// True when the locus names an element this manifest actually declares.
    pub fn has_locus(&self, locus: &ManifestLocus) -> bool {
        let mut candidates = std::iter::once(self.root_locus())
            .chain(self.application.line.map(|_| self.application_locus()))
            .chain(self.permissions.iter().map(|p| self.permission_locus(p)))
            .chain(self.components.iter().map(|c| self.component_locus(c)))
            .chain(self.pins.iter().map(|p| self.pin_locus(p)));
        candidates.any(|c| &c == locus)
    }

    /// Canonical XML rendering. Parsing the output yields the same
    /// manifest up to line numbers.
    pub fn to_xml(&self) -> String {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
        let _ = write!(
            out,
            "<manifest xmlns:android=\"{ANDROID_NS}\" package=\"{}\"",
            escape(&self.package_name)
        );
        if let Some(v) = &self.version_name {
            let _ = write!(out, " android:versionName=\"{}\"", escape(v));
        }
        if let Some(v) = &self.version_code {
            let _ = write!(out, " android:versionCode=\"{}\"", escape(v));
        }
        out.push_str(">\n");
        for p in &self.permissions {
            let _ = writeln!(out, "  <uses-permission android:name=\"{}\"/>", escape(&p.name));
        }
        if !self.queries.is_empty() {
            out.push_str("  <queries>\n");
            for q in &self.queries {
                let _ = writeln!(
                    out,
                    "    <intent><action android:name=\"{}\"/></intent>",
                    escape(&q.action)
                );
            }
            out.push_str("  </queries>\n");
        }
        let has_app = self.application.line.is_some()
            || self.application.allow_backup != TriState::Unset
            || !self.components.is_empty()
            || !self.pins.is_empty();
        if has_app {
            out.push_str("  <application");
            if let Some(v) = self.application.allow_backup.as_attr() {
                let _ = write!(out, " android:allowBackup=\"{v}\"");
            }
            out.push_str(">\n");
            for c in &self.components {
                let _ = write!(
                    out,
                    "    <{} android:name=\"{}\"",
                    c.kind.element(),
                    escape(&c.class_name)
                );
                if let Some(v) = c.exported.as_attr() {
                    let _ = write!(out, " android:exported=\"{v}\"");
                }
                if let Some(p) = &c.permission {
                    let _ = write!(out, " android:permission=\"{}\"", escape(p));
                }
                if c.intent_filters.is_empty() {
                    out.push_str("/>\n");
                } else {
                    out.push_str(">\n      <intent-filter>\n");
                    for a in &c.intent_filters {
                        let _ = writeln!(out, "        <action android:name=\"{}\"/>", escape(a));
                    }
                    let _ = writeln!(out, "      </intent-filter>\n    </{}>", c.kind.element());
                }
            }
            if !self.pins.is_empty() {
                out.push_str("    <network-security-config>\n      <pin-set>\n");
                for p in &self.pins {
                    let _ = write!(out, "        <pin digest=\"{}\"", escape(&p.digest));
                    if let Some(s) = &p.subject {
                        let _ = write!(out, " subject=\"{}\"", escape(s));
                    }
                    if let Some(i) = &p.issuer {
                        let _ = write!(out, " issuer=\"{}\"", escape(i));
                    }
                    let _ = writeln!(out, ">{}</pin>", escape(&p.value));
                }
                out.push_str("      </pin-set>\n    </network-security-config>\n");
            }
            out.push_str("  </application>\n");
        }
        out.push_str("</manifest>\n");
        out
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Parses manifest XML. Returns the manifest together with any
/// diagnostics (duplicate permissions, unrecognized elements).
pub fn parse_manifest(text: &str) -> Result<(Manifest, Vec<Diagnostic>)> {
    let doc = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        Error::parse(MANIFEST_FILE, pos.row as usize, e.to_string())
    })?;
    let mut parser = ManifestParser {
        doc: &doc,
        diagnostics: Vec::new(),
    };
    let manifest = parser.manifest(doc.root_element())?;
    Ok((manifest, parser.diagnostics))
}

struct ManifestParser<'a, 'input> {
    doc: &'a Document<'input>,
    diagnostics: Vec<Diagnostic>,
}

impl<'a, 'input> ManifestParser<'a, 'input> {
    fn line(&self, node: Node) -> usize {
        self.doc.text_pos_at(node.range().start).row as usize
    }

    fn unrecognized(&mut self, node: Node) {
        let line = self.line(node);
        self.diagnostics.push(
            Diagnostic::new(
                DiagnosticKind::UnrecognizedElement,
                format!("ignored element <{}>", node.tag_name().name()),
            )
            .at(MANIFEST_FILE, line),
        );
    }

    fn required<'n>(&self, node: Node<'n, 'input>, name: &str) -> Result<&'n str> {
        attr(node, name).ok_or_else(|| {
            Error::parse(
                MANIFEST_FILE,
                self.line(node),
                format!("<{}> is missing android:{name}", node.tag_name().name()),
            )
        })
    }

    fn manifest(&mut self, root: Node) -> Result<Manifest> {
        let line = self.line(root);
        if root.tag_name().name() != "manifest" {
            return Err(Error::parse(
                MANIFEST_FILE,
                line,
                format!("root element is <{}>, expected <manifest>", root.tag_name().name()),
            ));
        }
        let package_name = root
            .attribute("package")
            .ok_or_else(|| Error::parse(MANIFEST_FILE, line, "missing package attribute"))?
            .trim()
            .to_string();
        if package_name.is_empty() || !package_name.contains('.') {
            return Err(Error::parse(
                MANIFEST_FILE,
                line,
                format!("package `{package_name}` is not a reverse-domain name"),
            ));
        }

        let mut manifest = Manifest {
            package_name,
            version_name: attr(root, "versionName").map(str::to_string),
            version_code: attr(root, "versionCode").map(str::to_string),
            permissions: Vec::new(),
            application: ApplicationInfo::default(),
            components: Vec::new(),
            queries: Vec::new(),
            pins: Vec::new(),
            line,
        };

        for child in root.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "uses-permission" => {
                    let name = self.required(child, "name")?.trim().to_string();
                    let line = self.line(child);
                    if manifest.declares(&name) {
                        self.diagnostics.push(
                            Diagnostic::new(
                                DiagnosticKind::DuplicatePermission,
                                format!("{name} declared more than once"),
                            )
                            .at(MANIFEST_FILE, line),
                        );
                    } else {
                        manifest.permissions.push(UsesPermission { name, line });
                    }
                }
                "application" => self.application(child, &mut manifest)?,
                "queries" => self.queries(child, &mut manifest)?,
                _ => self.unrecognized(child),
            }
        }
        Ok(manifest)
    }

    fn application(&mut self, node: Node, manifest: &mut Manifest) -> Result<()> {
        let line = self.line(node);
        manifest.application = ApplicationInfo {
            allow_backup: TriState::from_attr(attr(node, "allowBackup"), line, "allowBackup")?,
            line: Some(line),
        };
        for child in node.children().filter(Node::is_element) {
            let tag = child.tag_name().name();
            if let Some(kind) = ComponentKind::from_element(tag) {
                let component = self.component(child, kind)?;
                manifest.components.push(component);
            } else if tag == "network-security-config" {
                self.network_config(child, manifest)?;
            } else {
                self.unrecognized(child);
            }
        }
        Ok(())
    }

    fn component(&mut self, node: Node, kind: ComponentKind) -> Result<ComponentDecl> {
        let line = self.line(node);
        let class_name = self.required(node, "name")?.trim().to_string();
        let exported = TriState::from_attr(attr(node, "exported"), line, "exported")?;
        let permission = attr(node, "permission").map(|p| p.trim().to_string());
        let mut intent_filters = Vec::new();
        for child in node.children().filter(Node::is_element) {
            if child.tag_name().name() != "intent-filter" {
                self.unrecognized(child);
                continue;
            }
            for action in child.children().filter(Node::is_element) {
                if action.tag_name().name() == "action" {
                    intent_filters.push(self.required(action, "name")?.trim().to_string());
                } else {
                    self.unrecognized(action);
                }
            }
        }
        Ok(ComponentDecl {
            kind,
            class_name,
            exported,
            permission,
            intent_filters,
            line,
        })
    }

    fn queries(&mut self, node: Node, manifest: &mut Manifest) -> Result<()> {
        for intent in node.children().filter(Node::is_element) {
            if intent.tag_name().name() != "intent" {
                self.unrecognized(intent);
                continue;
            }
            for action in intent.children().filter(Node::is_element) {
                if action.tag_name().name() != "action" {
                    self.unrecognized(action);
                    continue;
                }
                let name = self.required(action, "name")?.trim();
                if name.is_empty() {
                    return Err(Error::parse(
                        MANIFEST_FILE,
                        self.line(action),
                        "query action must not be empty",
                    ));
                }
                manifest.queries.push(QueryIntent {
                    action: name.to_string(),
                    line: self.line(action),
                });
            }
        }
        Ok(())
    }

    fn network_config(&mut self, node: Node, manifest: &mut Manifest) -> Result<()> {
        for set in node.children().filter(Node::is_element) {
            if set.tag_name().name() != "pin-set" {
                self.unrecognized(set);
                continue;
            }
            for pin in set.children().filter(Node::is_element) {
                if pin.tag_name().name() != "pin" {
                    self.unrecognized(pin);
                    continue;
                }
                manifest.pins.push(PinEntry {
                    digest: pin.attribute("digest").unwrap_or("SHA-256").to_string(),
                    value: pin.text().unwrap_or_default().trim().to_string(),
                    subject: pin.attribute("subject").map(str::to_string),
                    issuer: pin.attribute("issuer").map(str::to_string),
                    line: self.line(pin),
                });
            }
        }
        Ok(())
    }
}

/// `android:`-namespaced attribute, falling back to the bare name.
fn attr<'a>(node: Node<'a, '_>, name: &str) -> Option<&'a str> {
    node.attribute((ANDROID_NS, name)).or_else(|| node.attribute(name))
}

/// Whether other apps can reach the component.
///
/// An explicit attribute always wins. When unset, the component is
/// exported only if it declares intent filters and the target era
/// predates API 31.
pub fn effective_exported(c: &ComponentDecl, era: TargetEra) -> bool {
    match c.exported {
        TriState::ExplicitTrue => true,
        TriState::ExplicitFalse => false,
        TriState::Unset => !c.intent_filters.is_empty() && era == TargetEra::Pre31,
    }
}
