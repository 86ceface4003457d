//! Source, sink, sanitizer and consumer patterns.
//!
//! ```text
//! source <category> <pattern>        user-input | private-file-read | bluetooth-channel | biometric
//! source hardcoded-personal-string <regex>
//! sink <category> <pattern>          shared-storage | network | inter-app
//! untrusted <category> <pattern>     shared-storage | network | inter-app | exported-receiver-extra
//! consumer <category> <pattern>      sql-query | preferences-write | intent-dispatch
//! store <pattern>
//! log <pattern>
//! sanitizer <pattern>
//! ```
//!
//! A pattern is an exact signature `Class::m(n)`, any arity
//! `Class::m(*)`, or a whole class `Class::*`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sir::{is_class_name, MethodId};

const BUNDLED: &str = include_str!("../../data/flow.catalog");
const FILE: &str = "flow.catalog";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    UserInput,
    PrivateFileRead,
    BluetoothChannel,
    Biometric,
    HardcodedPersonalString,
    SharedStorage,
    Network,
    InterApp,
    ExportedReceiverExtra,
    SqlQuery,
    PreferencesWrite,
    IntentDispatch,
    CleartextStore,
    Log,
    UrlLiteral,
}

impl Category {
    pub const ALL: [Category; 15] = [
        Category::UserInput,
        Category::PrivateFileRead,
        Category::BluetoothChannel,
        Category::Biometric,
        Category::HardcodedPersonalString,
        Category::SharedStorage,
        Category::Network,
        Category::InterApp,
        Category::ExportedReceiverExtra,
        Category::SqlQuery,
        Category::PreferencesWrite,
        Category::IntentDispatch,
        Category::CleartextStore,
        Category::Log,
        Category::UrlLiteral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::UserInput => "user-input",
            Category::PrivateFileRead => "private-file-read",
            Category::BluetoothChannel => "bluetooth-channel",
            Category::Biometric => "biometric",
            Category::HardcodedPersonalString => "hardcoded-personal-string",
            Category::SharedStorage => "shared-storage",
            Category::Network => "network",
            Category::InterApp => "inter-app",
            Category::ExportedReceiverExtra => "exported-receiver-extra",
            Category::SqlQuery => "sql-query",
            Category::PreferencesWrite => "preferences-write",
            Category::IntentDispatch => "intent-dispatch",
            Category::CleartextStore => "cleartext-store",
            Category::Log => "log",
            Category::UrlLiteral => "url-literal",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Exact(MethodId),
    AnyArity { class: String, name: String },
    Class(String),
}

impl Pattern {
    pub fn matches(&self, id: &MethodId) -> bool {
        match self {
            Pattern::Exact(p) => p == id,
            Pattern::AnyArity { class, name } => &id.class == class && &id.name == name,
            Pattern::Class(class) => &id.class == class,
        }
    }
}

impl FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if let Some(class) = s.strip_suffix("::*") {
            if is_class_name(class) {
                return Ok(Pattern::Class(class.to_string()));
            }
        }
        if let Some(head) = s.strip_suffix("(*)") {
            if let Some((class, name)) = head.split_once("::") {
                if is_class_name(class) && crate::sir::is_method_name(name) {
                    return Ok(Pattern::AnyArity {
                        class: class.into(),
                        name: name.into(),
                    });
                }
            }
        }
        s.parse().map(Pattern::Exact)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Exact(id) => write!(f, "{id}"),
            Pattern::AnyArity { class, name } => write!(f, "{class}::{name}(*)"),
            Pattern::Class(class) => write!(f, "{class}::*"),
        }
    }
}

/// A list of signature patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternSet(pub Vec<Pattern>);

impl PatternSet {
    pub fn matches(&self, id: &MethodId) -> bool {
        self.0.iter().any(|p| p.matches(id))
    }
}

#[derive(Debug, Clone)]
pub struct SourceSinkCatalog {
    pub sensitive_sources: Vec<(Category, Pattern)>,
    pub personal_strings: Vec<Regex>,
    pub sinks: Vec<(Category, Pattern)>,
    pub untrusted_sources: Vec<(Category, Pattern)>,
    pub consumers: Vec<(Category, Pattern)>,
    pub stores: PatternSet,
    pub logs: PatternSet,
    pub sanitizers: PatternSet,
}

fn first_match(list: &[(Category, Pattern)], id: &MethodId) -> Option<Category> {
    list.iter().find(|(_, p)| p.matches(id)).map(|(c, _)| *c)
}

impl SourceSinkCatalog {
    pub fn bundled() -> &'static SourceSinkCatalog {
        static CATALOG: OnceLock<SourceSinkCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| SourceSinkCatalog::parse(BUNDLED).expect("bundled flow catalog"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        use Category::*;
        let mut cat = SourceSinkCatalog {
            sensitive_sources: Vec::new(),
            personal_strings: Vec::new(),
            sinks: Vec::new(),
            untrusted_sources: Vec::new(),
            consumers: Vec::new(),
            stores: PatternSet::default(),
            logs: PatternSet::default(),
            sanitizers: PatternSet::default(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let err = |reason: String| Error::parse(FILE, line, reason);
            let (kind, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
            let rest = rest.trim();
            let pattern = |s: &str| s.parse::<Pattern>().map_err(err);
            let categorized = |allowed: &[Category]| -> Result<(Category, &str)> {
                let (c, p) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| err(format!("`{kind}` needs a category and a pattern")))?;
                let c: Category = c.parse().map_err(err)?;
                if !allowed.contains(&c) {
                    return Err(err(format!("category `{c}` is not valid for `{kind}`")));
                }
                Ok((c, p.trim()))
            };
            match kind {
                "source" => {
                    let (c, p) = categorized(&[
                        UserInput,
                        PrivateFileRead,
                        BluetoothChannel,
                        Biometric,
                        HardcodedPersonalString,
                    ])?;
                    if c == HardcodedPersonalString {
                        let re = Regex::new(p).map_err(|e| err(format!("bad regex: {e}")))?;
                        cat.personal_strings.push(re);
                    } else {
                        cat.sensitive_sources.push((c, pattern(p)?));
                    }
                }
                "sink" => {
                    let (c, p) = categorized(&[SharedStorage, Network, InterApp])?;
                    cat.sinks.push((c, pattern(p)?));
                }
                "untrusted" => {
                    let (c, p) =
                        categorized(&[SharedStorage, Network, InterApp, ExportedReceiverExtra])?;
                    cat.untrusted_sources.push((c, pattern(p)?));
                }
                "consumer" => {
                    let (c, p) = categorized(&[SqlQuery, PreferencesWrite, IntentDispatch])?;
                    cat.consumers.push((c, pattern(p)?));
                }
                "store" => cat.stores.0.push(pattern(rest)?),
                "log" => cat.logs.0.push(pattern(rest)?),
                "sanitizer" => cat.sanitizers.0.push(pattern(rest)?),
                other => return Err(err(format!("unknown line kind `{other}`"))),
            }
        }
        Ok(cat)
    }

    pub fn source_category(&self, id: &MethodId) -> Option<Category> {
        first_match(&self.sensitive_sources, id)
    }

    pub fn personal_string(&self, value: &str) -> bool {
        self.personal_strings.iter().any(|re| re.is_match(value))
    }

    pub fn sink_category(&self, id: &MethodId) -> Option<Category> {
        first_match(&self.sinks, id)
    }

    pub fn untrusted_category(&self, id: &MethodId) -> Option<Category> {
        first_match(&self.untrusted_sources, id)
    }

    pub fn consumer_category(&self, id: &MethodId) -> Option<Category> {
        first_match(&self.consumers, id)
    }

    pub fn is_sanitizer(&self, id: &MethodId) -> bool {
        self.sanitizers.matches(id)
    }
}
