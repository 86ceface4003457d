//! The textual intermediate representation standing in for decompiled
//! app code.
//!
//! One class per file:
//!
//! ```text
//! class <dotted-name> [library <lib-name>]
//! method <name>(<n>) {
//!   rK = const-string "<text>"
//!   rK = const-int <n>
//!   rK = call <Class>::<m>(<regs>)
//!   call-void <Class>::<m>(<regs>)
//!   rK = field-get <Class>.<f>
//!   field-put <Class>.<f>, rK
//!   rK = move rJ
//!   if rK goto <L>
//!   goto <L>
//!   label <L>
//!   return rK
//!   return-void
//! }
//! ```
//!
//! A method declared with `n` parameters receives them in `r0..r(n-1)`.
//! Lines starting with `#` are comments.

mod dataflow;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dataflow::{DefSite, ReachingDefs};
pub use parse::{parse_sir, SirParse};

/// `Class::name(arity)`. Ordering is by class, then name, then arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct MethodId {
    pub class: String,
    pub name: String,
    pub arity: usize,
}

impl MethodId {
    pub fn new(class: impl Into<String>, name: impl Into<String>, arity: usize) -> Self {
        MethodId {
            class: class.into(),
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}({})", self.class, self.name, self.arity)
    }
}

impl FromStr for MethodId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (class, rest) = s
            .split_once("::")
            .ok_or_else(|| format!("`{s}` is not a Class::method(n) signature"))?;
        let (name, arity) = rest
            .strip_suffix(')')
            .and_then(|r| r.split_once('('))
            .ok_or_else(|| format!("`{s}` is missing an argument count"))?;
        if !is_class_name(class) || !is_method_name(name) {
            return Err(format!("`{s}` is not a Class::method(n) signature"));
        }
        let arity = arity
            .trim()
            .parse()
            .map_err(|_| format!("`{s}` has a non-numeric argument count"))?;
        Ok(MethodId::new(class, name, arity))
    }
}

impl From<MethodId> for String {
    fn from(id: MethodId) -> String {
        id.to_string()
    }
}

impl TryFrom<String> for MethodId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

pub(crate) fn is_class_name(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with('.')
        && !s.ends_with('.')
        && !s.contains("..")
        && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '.'))
}

pub(crate) fn is_method_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '<' | '>'))
}

pub(crate) fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Reg(pub u32);

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Static field reference, `Class.field`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldRef {
    pub class: String,
    pub field: String,
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.field)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    ConstString,
    ConstInt,
    Call,
    FieldGet,
    FieldPut,
    Move,
    IfGoto,
    Goto,
    Label,
    Return,
    ReturnVoid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instruction {
    ConstString { dst: Reg, value: String },
    ConstInt { dst: Reg, value: i64 },
    Call { dst: Option<Reg>, callee: MethodId, args: Vec<Reg> },
    FieldGet { dst: Reg, field: FieldRef },
    FieldPut { field: FieldRef, src: Reg },
    Move { dst: Reg, src: Reg },
    IfGoto { cond: Reg, label: String },
    Goto { label: String },
    Label { name: String },
    Return { src: Reg },
    ReturnVoid,
}

impl Instruction {
    pub fn opcode(&self) -> Opcode {
        match self {
            Instruction::ConstString { .. } => Opcode::ConstString,
            Instruction::ConstInt { .. } => Opcode::ConstInt,
            Instruction::Call { .. } => Opcode::Call,
            Instruction::FieldGet { .. } => Opcode::FieldGet,
            Instruction::FieldPut { .. } => Opcode::FieldPut,
            Instruction::Move { .. } => Opcode::Move,
            Instruction::IfGoto { .. } => Opcode::IfGoto,
            Instruction::Goto { .. } => Opcode::Goto,
            Instruction::Label { .. } => Opcode::Label,
            Instruction::Return { .. } => Opcode::Return,
            Instruction::ReturnVoid => Opcode::ReturnVoid,
        }
    }

    /// Register written by this instruction.
    pub fn def(&self) -> Option<Reg> {
        match self {
            Instruction::ConstString { dst, .. }
            | Instruction::ConstInt { dst, .. }
            | Instruction::FieldGet { dst, .. }
            | Instruction::Move { dst, .. } => Some(*dst),
            Instruction::Call { dst, .. } => *dst,
            _ => None,
        }
    }

    /// Registers read by this instruction, in operand order.
    pub fn uses(&self) -> Vec<Reg> {
        match self {
            Instruction::Call { args, .. } => args.clone(),
            Instruction::FieldPut { src, .. }
            | Instruction::Move { src, .. }
            | Instruction::Return { src } => vec![*src],
            Instruction::IfGoto { cond, .. } => vec![*cond],
            _ => Vec::new(),
        }
    }

    pub fn callee(&self) -> Option<&MethodId> {
        match self {
            Instruction::Call { callee, .. } => Some(callee),
            _ => None,
        }
    }

    pub fn is_return(&self) -> bool {
        matches!(self, Instruction::Return { .. } | Instruction::ReturnVoid)
    }

    pub fn branch_target(&self) -> Option<&str> {
        match self {
            Instruction::IfGoto { label, .. } | Instruction::Goto { label } => Some(label),
            _ => None,
        }
    }

    /// Whether control can fall through to the next instruction.
    pub fn falls_through(&self) -> bool {
        !matches!(
            self,
            Instruction::Goto { .. } | Instruction::Return { .. } | Instruction::ReturnVoid
        )
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let regs = |regs: &[Reg]| regs.iter().map(Reg::to_string).collect::<Vec<_>>().join(", ");
        match self {
            Instruction::ConstString { dst, value } => {
                write!(f, "{dst} = const-string \"{}\"", escape_string(value))
            }
            Instruction::ConstInt { dst, value } => write!(f, "{dst} = const-int {value}"),
            Instruction::Call { dst: Some(dst), callee, args } => write!(
                f,
                "{dst} = call {}::{}({})",
                callee.class,
                callee.name,
                regs(args)
            ),
            Instruction::Call { dst: None, callee, args } => {
                write!(f, "call-void {}::{}({})", callee.class, callee.name, regs(args))
            }
            Instruction::FieldGet { dst, field } => write!(f, "{dst} = field-get {field}"),
            Instruction::FieldPut { field, src } => write!(f, "field-put {field}, {src}"),
            Instruction::Move { dst, src } => write!(f, "{dst} = move {src}"),
            Instruction::IfGoto { cond, label } => write!(f, "if {cond} goto {label}"),
            Instruction::Goto { label } => write!(f, "goto {label}"),
            Instruction::Label { name } => write!(f, "label {name}"),
            Instruction::Return { src } => write!(f, "return {src}"),
            Instruction::ReturnVoid => f.write_str("return-void"),
        }
    }
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodBody {
    pub id: MethodId,
    pub instructions: Vec<Instruction>,
    /// Label name to the index of its `label` instruction.
    pub labels: BTreeMap<String, usize>,
}

impl MethodBody {
    /// Builds the label table. Fails with the first undefined or
    /// duplicated label.
    pub fn new(id: MethodId, instructions: Vec<Instruction>) -> Result<Self, String> {
        let mut labels = BTreeMap::new();
        for (i, ins) in instructions.iter().enumerate() {
            if let Instruction::Label { name } = ins {
                if labels.insert(name.clone(), i).is_some() {
                    return Err(format!("label `{name}` defined twice"));
                }
            }
        }
        for ins in &instructions {
            if let Some(target) = ins.branch_target() {
                if !labels.contains_key(target) {
                    return Err(format!("branch to undefined label `{target}`"));
                }
            }
        }
        Ok(MethodBody {
            id,
            instructions,
            labels,
        })
    }

    /// Control successors of instruction `i`.
    pub fn successors(&self, i: usize) -> Vec<usize> {
        let ins = &self.instructions[i];
        let mut out = Vec::with_capacity(2);
        if ins.falls_through() && i + 1 < self.instructions.len() {
            out.push(i + 1);
        }
        if let Some(target) = ins.branch_target() {
            let t = self.labels[target];
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }

    /// Every call instruction as `(index, callee)`, in instruction order.
    pub fn call_sites(&self) -> Vec<(usize, &MethodId)> {
        self.instructions
            .iter()
            .enumerate()
            .filter_map(|(i, ins)| ins.callee().map(|c| (i, c)))
            .collect()
    }

    pub fn parameters(&self) -> impl Iterator<Item = Reg> {
        (0..self.id.arity as u32).map(Reg)
    }

    pub fn reaching_defs(&self) -> ReachingDefs {
        ReachingDefs::compute(self)
    }
}

/// Free-function form of [`MethodBody::call_sites`].
pub fn collect_call_sites(m: &MethodBody) -> Vec<(usize, MethodId)> {
    m.call_sites().into_iter().map(|(i, c)| (i, c.clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "library", rename_all = "kebab-case")]
pub enum Origin {
    App,
    Library(String),
}

impl Origin {
    pub fn library(&self) -> Option<&str> {
        match self {
            Origin::App => None,
            Origin::Library(name) => Some(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeUnit {
    pub class_name: String,
    pub origin: Origin,
    pub methods: Vec<MethodBody>,
}

impl fmt::Display for CodeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "class {}", self.class_name)?;
        if let Origin::Library(lib) = &self.origin {
            write!(f, " library {lib}")?;
        }
        writeln!(f)?;
        for m in &self.methods {
            writeln!(f, "method {}({}) {{", m.id.name, m.id.arity)?;
            for ins in &m.instructions {
                writeln!(f, "  {ins}")?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_id_round_trip() {
        let id: MethodId = "okhttp3.Request$Builder::url(1)".parse().unwrap();
        assert_eq!(id.class, "okhttp3.Request$Builder");
        assert_eq!(id.arity, 1);
        assert_eq!(id.to_string(), "okhttp3.Request$Builder::url(1)");
        assert!("Foo::bar".parse::<MethodId>().is_err());
        assert!("::bar(1)".parse::<MethodId>().is_err());
        assert!("a..b::c(1)".parse::<MethodId>().is_err());
    }

    #[test]
    fn method_ids_order_by_class_first() {
        let a: MethodId = "a.B::z(0)".parse().unwrap();
        let b: MethodId = "a.B$C::a(0)".parse().unwrap();
        assert!(a < b);
    }
}
