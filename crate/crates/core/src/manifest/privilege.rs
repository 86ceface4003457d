use serde::{Deserialize, Serialize};

use super::{Manifest, PermissionCatalog, PermissionKind};

/// Answers to the over-privilege questions for one manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivilegeProfile {
    pub permission_count: usize,
    /// Declared permissions outside the catalog baseline.
    pub extraneous: Vec<String>,
    pub deprecated: Vec<String>,
    pub third_party: Vec<String>,
    pub biometric: Vec<String>,
    pub unknown: Vec<String>,
    /// Trailing segment of each `<queries>` action, e.g. `DIAL`.
    pub query_capabilities: Vec<String>,
}

impl PrivilegeProfile {
    pub fn uses_deprecated(&self) -> bool {
        !self.deprecated.is_empty()
    }

    pub fn uses_third_party(&self) -> bool {
        !self.third_party.is_empty()
    }

    pub fn uses_biometric(&self) -> bool {
        !self.biometric.is_empty()
    }
}

pub fn privilege_profile(m: &Manifest, catalog: &PermissionCatalog) -> PrivilegeProfile {
    let names: Vec<&str> = m.permission_names().collect();
    let of_kind = |kind: PermissionKind| -> Vec<String> {
        names
            .iter()
            .filter(|n| catalog.classify(n).kind == kind)
            .map(|n| n.to_string())
            .collect()
    };
    let mut query_capabilities: Vec<String> = Vec::new();
    for q in &m.queries {
        let cap = q.action.rsplit('.').next().unwrap_or(&q.action).to_string();
        if !query_capabilities.contains(&cap) {
            query_capabilities.push(cap);
        }
    }
    PrivilegeProfile {
        permission_count: names.len(),
        extraneous: names
            .iter()
            .filter(|n| !catalog.is_baseline(n))
            .map(|n| n.to_string())
            .collect(),
        deprecated: of_kind(PermissionKind::Deprecated),
        third_party: of_kind(PermissionKind::ThirdParty),
        biometric: of_kind(PermissionKind::Biometric),
        unknown: of_kind(PermissionKind::Unknown),
        query_capabilities,
    }
}
