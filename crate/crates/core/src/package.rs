//! In-memory app package and its on-disk directory layout:
//!
//! ```text
//! <root>/manifest.xml
//! <root>/code/<class>.sir
//! <root>/signing.meta     schemes=v1,v2,v3 / cert.N.subject=... / cert.N.issuer=...
//! <root>/strings.txt      <id>=<value>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostic::{Diagnostic, DiagnosticKind};
use crate::error::{read_to_string, Error, Result};
use crate::manifest::{parse_manifest, Manifest, PermissionCatalog};
use crate::sir::{parse_sir, CodeUnit, MethodBody, MethodId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigningScheme {
    V1,
    V2,
    V3,
}

impl fmt::Display for SigningScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SigningScheme::V1 => "v1",
            SigningScheme::V2 => "v2",
            SigningScheme::V3 => "v3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub subject: String,
    pub issuer: String,
}

impl CertificateRecord {
    pub fn self_signed(&self) -> bool {
        self.subject == self.issuer
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigningInfo {
    /// Never empty.
    pub schemes: BTreeSet<SigningScheme>,
    pub certificates: Vec<CertificateRecord>,
}

impl SigningInfo {
    pub fn parse(text: &str) -> Result<Self> {
        const FILE: &str = "signing.meta";
        let mut schemes = None;
        let mut certs: BTreeMap<usize, (Option<String>, Option<String>, usize)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(FILE, line, "expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "schemes" {
                let mut set = BTreeSet::new();
                for s in value.split(',').map(str::trim) {
                    set.insert(match s {
                        "v1" => SigningScheme::V1,
                        "v2" => SigningScheme::V2,
                        "v3" => SigningScheme::V3,
                        other => {
                            return Err(Error::parse(FILE, line, format!("unknown scheme `{other}`")))
                        }
                    });
                }
                schemes = Some(set);
            } else if let Some(rest) = key.strip_prefix("cert.") {
                let (n, field) = rest
                    .split_once('.')
                    .and_then(|(n, f)| Some((n.parse::<usize>().ok()?, f)))
                    .ok_or_else(|| Error::parse(FILE, line, format!("bad certificate key `{key}`")))?;
                let slot = certs.entry(n).or_insert((None, None, line));
                match field {
                    "subject" => slot.0 = Some(value.to_string()),
                    "issuer" => slot.1 = Some(value.to_string()),
                    other => {
                        return Err(Error::parse(FILE, line, format!("unknown certificate field `{other}`")))
                    }
                }
            } else {
                return Err(Error::parse(FILE, line, format!("unknown key `{key}`")));
            }
        }
        let schemes = match schemes {
            Some(s) if !s.is_empty() => s,
            _ => return Err(Error::parse(FILE, 1, "schemes line missing or empty")),
        };
        let certificates = certs
            .into_iter()
            .map(|(n, (subject, issuer, line))| match (subject, issuer) {
                (Some(subject), Some(issuer)) => Ok(CertificateRecord { subject, issuer }),
                _ => Err(Error::parse(FILE, line, format!("cert.{n} needs subject and issuer"))),
            })
            .collect::<Result<_>>()?;
        Ok(SigningInfo {
            schemes,
            certificates,
        })
    }

    pub fn v1_only(&self) -> bool {
        self.schemes.len() == 1 && self.schemes.contains(&SigningScheme::V1)
    }
}

/// Version code as declared: numeric where possible, raw text otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VersionCode {
    Numeric(u64),
    Raw(String),
}

impl VersionCode {
    pub fn parse(s: &str) -> Self {
        s.parse().map_or_else(|_| VersionCode::Raw(s.to_string()), VersionCode::Numeric)
    }
}

impl fmt::Display for VersionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VersionCode::Numeric(n) => write!(f, "{n}"),
            VersionCode::Raw(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppPackage {
    pub package_name: String,
    pub version_name: String,
    pub version_code: Option<VersionCode>,
    pub manifest: Manifest,
    /// Sorted by class name.
    pub code_units: Vec<CodeUnit>,
    /// `None` when the package ships no signing.meta.
    pub signing: Option<SigningInfo>,
    pub string_pool: BTreeMap<String, String>,
    /// Problems found while loading; never fatal.
    pub load_diagnostics: Vec<Diagnostic>,
}

impl AppPackage {
    /// Builds a package from already-parsed parts, enforcing the
    /// cross-unit invariants.
    pub fn from_parts(
        manifest: Manifest,
        mut code_units: Vec<CodeUnit>,
        signing: Option<SigningInfo>,
        string_pool: BTreeMap<String, String>,
    ) -> Result<Self> {
        code_units.sort_by(|a, b| a.class_name.cmp(&b.class_name));
        let mut seen = BTreeSet::new();
        for m in code_units.iter().flat_map(|u| &u.methods) {
            if !seen.insert(&m.id) {
                return Err(Error::DuplicateMethod {
                    signature: m.id.to_string(),
                });
            }
        }
        Ok(AppPackage {
            package_name: manifest.package_name.clone(),
            version_name: manifest.version_name.clone().unwrap_or_default(),
            version_code: manifest.version_code.as_deref().map(VersionCode::parse),
            manifest,
            code_units,
            signing,
            string_pool,
            load_diagnostics: Vec::new(),
        })
    }

    /// Assembles a package from in-memory manifest XML and SIR sources.
    pub fn from_sources(manifest_xml: &str, sir_files: &[&str]) -> Result<Self> {
        let (manifest, mut diagnostics) = parse_manifest(manifest_xml)?;
        let mut units = Vec::new();
        for (i, text) in sir_files.iter().enumerate() {
            let parsed = parse_sir(text, &format!("code/{i}.sir"))?;
            diagnostics.extend(parsed.diagnostics);
            units.extend(parsed.unit);
        }
        let mut pkg = AppPackage::from_parts(manifest, units, None, BTreeMap::new())?;
        pkg.load_diagnostics = diagnostics;
        Ok(pkg)
    }

    pub fn methods(&self) -> impl Iterator<Item = (&CodeUnit, &MethodBody)> {
        self.code_units
            .iter()
            .flat_map(|u| u.methods.iter().map(move |m| (u, m)))
    }

    pub fn method(&self, id: &MethodId) -> Option<&MethodBody> {
        self.code_units
            .iter()
            .find(|u| u.class_name == id.class)
            .and_then(|u| u.methods.iter().find(|m| &m.id == id))
    }

    pub fn unit(&self, class_name: &str) -> Option<&CodeUnit> {
        self.code_units.iter().find(|u| u.class_name == class_name)
    }

    /// Resolves `@string/<id>` references through the string pool.
    pub fn resolve_string<'a>(&'a self, value: &'a str) -> &'a str {
        value
            .strip_prefix("@string/")
            .and_then(|id| self.string_pool.get(id))
            .map_or(value, String::as_str)
    }
}

fn parse_strings(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pool = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let (id, value) = raw
            .split_once('=')
            .ok_or_else(|| Error::parse("strings.txt", idx + 1, "expected <id>=<value>"))?;
        pool.insert(id.trim().to_string(), value.to_string());
    }
    Ok(pool)
}

/// Loads a package directory. Dangling cross-references become
/// diagnostics on the returned package.
pub fn load_package(root: &Path) -> Result<AppPackage> {
    let manifest_path = root.join("manifest.xml");
    if !manifest_path.is_file() {
        return Err(Error::MissingManifest(root.to_path_buf()));
    }
    let (manifest, mut diagnostics) = parse_manifest(&read_to_string(&manifest_path)?)?;

    let mut units = Vec::new();
    let code_dir = root.join("code");
    if code_dir.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(&code_dir)
            .map_err(|e| Error::io(&code_dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "sir"))
            .collect();
        files.sort();
        for path in files {
            let name = format!(
                "code/{}",
                path.file_name().unwrap_or_default().to_string_lossy()
            );
            let parsed = parse_sir(&read_to_string(&path)?, &name)?;
            diagnostics.extend(parsed.diagnostics);
            match parsed.unit {
                Some(unit) => {
                    if units.iter().any(|u: &CodeUnit| u.class_name == unit.class_name) {
                        return Err(Error::parse(
                            name,
                            1,
                            format!("class {} is declared in more than one file", unit.class_name),
                        ));
                    }
                    units.push(unit);
                }
                None => diagnostics
                    .push(Diagnostic::new(DiagnosticKind::EmptyCodeFile, "file has no class").in_file(name)),
            }
        }
    }

    let signing_path = root.join("signing.meta");
    let signing = if signing_path.is_file() {
        Some(SigningInfo::parse(&read_to_string(&signing_path)?)?)
    } else {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::MissingSigningInfo,
            "no signing.meta; signature checks skipped",
        ));
        None
    };

    let strings_path = root.join("strings.txt");
    let string_pool = if strings_path.is_file() {
        parse_strings(&read_to_string(&strings_path)?)?
    } else {
        BTreeMap::new()
    };

    let mut pkg = AppPackage::from_parts(manifest, units, signing, string_pool)?;
    diagnostics.extend(dangling_components(&pkg));
    pkg.load_diagnostics = diagnostics;
    Ok(pkg)
}

fn dangling_components(pkg: &AppPackage) -> Vec<Diagnostic> {
    pkg.manifest
        .components
        .iter()
        .filter_map(|c| {
            let class = c.qualified_class(&pkg.package_name);
            pkg.unit(&class).is_none().then(|| {
                Diagnostic::new(
                    DiagnosticKind::DanglingComponent,
                    format!("<{}> {class} has no code unit", c.kind.element()),
                )
                .at("manifest.xml", c.line)
            })
        })
        .collect()
}

/// Structural warnings over a loaded package. Empty means clean.
pub fn validate_package(pkg: &AppPackage, catalog: &PermissionCatalog) -> Vec<Diagnostic> {
    let mut out = dangling_components(pkg);
    for p in &pkg.manifest.permissions {
        if !catalog.contains(&p.name) {
            out.push(
                Diagnostic::new(
                    DiagnosticKind::UnknownPermission,
                    format!("{} is not in the permission catalog", p.name),
                )
                .at("manifest.xml", p.line),
            );
        }
    }
    for (_, m) in pkg.methods() {
        if m.instructions.is_empty() {
            out.push(Diagnostic::new(
                DiagnosticKind::EmptyMethodBody,
                format!("{} has no instructions", m.id),
            ));
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signing_meta() {
        let s = SigningInfo::parse("schemes=v1,v2,v3\ncert.0.subject=CN=A\ncert.0.issuer=CN=A\n").unwrap();
        assert_eq!(s.schemes.len(), 3);
        assert!(s.certificates[0].self_signed());
        assert!(!s.v1_only());
        assert!(SigningInfo::parse("schemes=v1").unwrap().v1_only());
        assert!(SigningInfo::parse("schemes=").is_err());
        assert!(SigningInfo::parse("schemes=v4").is_err());
        assert!(SigningInfo::parse("schemes=v1\ncert.0.subject=x").is_err());
    }

    #[test]
    fn version_codes() {
        assert_eq!(VersionCode::parse("141006"), VersionCode::Numeric(141006));
        assert_eq!(VersionCode::parse("minted14020"), VersionCode::Raw("minted14020".into()));
    }

    #[test]
    fn string_pool_resolution() {
        let pool = parse_strings("ks_url=https://ks.example.org/v1\nempty=\n").unwrap();
        assert_eq!(pool["ks_url"], "https://ks.example.org/v1");
        assert_eq!(pool["empty"], "");
    }
}
