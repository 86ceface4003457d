use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../data/permissions.catalog");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermissionKind {
    CorePlatformNormal,
    ThirdParty,
    Deprecated,
    Biometric,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrantTime {
    Install,
    Runtime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermissionClass {
    pub kind: PermissionKind,
    pub grant_time: GrantTime,
}

impl PermissionClass {
    pub const UNKNOWN: PermissionClass = PermissionClass {
        kind: PermissionKind::Unknown,
        grant_time: GrantTime::Install,
    };
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermissionEntry {
    /// Short column code used in report tables (`P1`..).
    pub code: Option<String>,
    pub name: String,
    pub class: PermissionClass,
    pub baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermissionCatalog {
    entries: Vec<PermissionEntry>,
}

impl PermissionCatalog {
    pub fn bundled() -> &'static PermissionCatalog {
        static CATALOG: OnceLock<PermissionCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| PermissionCatalog::parse(BUNDLED).expect("bundled permission catalog"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<PermissionEntry> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let err = |reason: String| Error::parse("permissions.catalog", line, reason);
            if !(4..=5).contains(&fields.len()) {
                return Err(err(format!("expected 4 or 5 fields, got {}", fields.len())));
            }
            let kind = match fields[2] {
                "core-platform-normal" => PermissionKind::CorePlatformNormal,
                "third-party" => PermissionKind::ThirdParty,
                "deprecated" => PermissionKind::Deprecated,
                "biometric" => PermissionKind::Biometric,
                other => return Err(err(format!("unknown permission class `{other}`"))),
            };
            let grant_time = match fields[3] {
                "install" => GrantTime::Install,
                "runtime" => GrantTime::Runtime,
                other => return Err(err(format!("unknown grant time `{other}`"))),
            };
            let baseline = match fields.get(4) {
                None => false,
                Some(&"baseline") => true,
                Some(other) => return Err(err(format!("unexpected trailing field `{other}`"))),
            };
            if entries.iter().any(|e| e.name == fields[1]) {
                return Err(err(format!("{} listed twice", fields[1])));
            }
            entries.push(PermissionEntry {
                code: (fields[0] != "-").then(|| fields[0].to_string()),
                name: fields[1].to_string(),
                class: PermissionClass { kind, grant_time },
                baseline,
            });
        }
        Ok(PermissionCatalog { entries })
    }

    pub fn entries(&self) -> &[PermissionEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&PermissionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn classify(&self, name: &str) -> PermissionClass {
        self.get(name).map_or(PermissionClass::UNKNOWN, |e| e.class)
    }

    pub fn is_baseline(&self, name: &str) -> bool {
        self.get(name).is_some_and(|e| e.baseline)
    }

    /// Entries that carry a table code, in catalog order.
    pub fn coded(&self) -> impl Iterator<Item = &PermissionEntry> {
        self.entries.iter().filter(|e| e.code.is_some())
    }
}

/// Classifies against the bundled catalog.
pub fn classify_permission(name: &str) -> PermissionClass {
    PermissionCatalog::bundled().classify(name)
}
