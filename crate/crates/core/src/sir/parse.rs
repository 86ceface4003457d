use std::collections::BTreeSet;

use super::{
    is_class_name, is_label, is_method_name, CodeUnit, FieldRef, Instruction, MethodBody,
    MethodId, Origin, Reg,
};
use crate::diagnostic::{Diagnostic, DiagnosticKind};
use crate::error::{Error, Result};

/// Result of parsing one SIR file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SirParse {
    /// `None` for a file with no content.
    pub unit: Option<CodeUnit>,
    pub diagnostics: Vec<Diagnostic>,
}

impl SirParse {
    pub fn methods(&self) -> &[MethodBody] {
        self.unit.as_ref().map_or(&[], |u| &u.methods)
    }
}

/// Parses one class file. A malformed method is dropped with a
/// diagnostic; the file fails only when it has methods and none of them
/// parse, or when its structure outside method bodies is broken.
pub fn parse_sir(text: &str, file: &str) -> Result<SirParse> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    let Some((header_line, header)) = lines.next() else {
        return Ok(SirParse {
            unit: None,
            diagnostics: Vec::new(),
        });
    };
    let (class_name, origin) = parse_header(header).map_err(|r| Error::parse(file, header_line, r))?;

    let mut diagnostics = Vec::new();
    let mut methods: Vec<MethodBody> = Vec::new();
    let mut first_failure: Option<(usize, String)> = None;
    let mut seen = BTreeSet::new();

    while let Some((line, text)) = lines.next() {
        let (name, arity) = parse_method_header(text).map_err(|r| Error::parse(file, line, r))?;
        let id = MethodId::new(class_name.clone(), name, arity);

        let mut instructions = Vec::new();
        let mut failure: Option<(usize, String)> = None;
        let mut closed = false;
        for (ins_line, ins_text) in lines.by_ref() {
            if ins_text == "}" {
                closed = true;
                break;
            }
            if failure.is_none() {
                match parse_instruction(ins_text) {
                    Ok(ins) => instructions.push(ins),
                    Err(reason) => failure = Some((ins_line, reason)),
                }
            }
        }
        if !closed && failure.is_none() {
            failure = Some((line, format!("method {} is not closed", id)));
        }

        let built = match failure {
            Some(f) => Err((f, DiagnosticKind::MalformedMethod)),
            None => MethodBody::new(id.clone(), instructions).map_err(|reason| {
                let kind = if reason.contains("undefined label") {
                    DiagnosticKind::UndefinedLabel
                } else {
                    DiagnosticKind::MalformedMethod
                };
                ((line, reason), kind)
            }),
        };
        match built {
            Ok(body) => {
                if !seen.insert(body.id.clone()) {
                    return Err(Error::DuplicateMethod {
                        signature: body.id.to_string(),
                    });
                }
                diagnostics.extend(undefined_register_diagnostics(&body, file));
                methods.push(body);
            }
            Err(((fail_line, reason), kind)) => {
                diagnostics.push(
                    Diagnostic::new(kind, format!("{id} dropped: {reason}")).at(file, fail_line),
                );
                first_failure.get_or_insert((fail_line, reason));
            }
        }
    }

    if methods.is_empty() {
        if let Some((line, reason)) = first_failure {
            return Err(Error::parse(file, line, format!("no method parsed: {reason}")));
        }
    }

    Ok(SirParse {
        unit: Some(CodeUnit {
            class_name,
            origin,
            methods,
        }),
        diagnostics,
    })
}

fn parse_header(text: &str) -> std::result::Result<(String, Origin), String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    match words.as_slice() {
        ["class", name] if is_class_name(name) => Ok((name.to_string(), Origin::App)),
        ["class", name, "library", lib] if is_class_name(name) => {
            Ok((name.to_string(), Origin::Library(lib.to_string())))
        }
        _ => Err(format!("expected `class <name> [library <lib>]`, got `{text}`")),
    }
}

fn parse_method_header(text: &str) -> std::result::Result<(String, usize), String> {
    let bad = || format!("expected `method <name>(<n>) {{`, got `{text}`");
    let rest = text.strip_prefix("method ").ok_or_else(bad)?;
    let rest = rest.strip_suffix('{').ok_or_else(bad)?.trim_end();
    let (name, arity) = rest
        .strip_suffix(')')
        .and_then(|r| r.split_once('('))
        .ok_or_else(bad)?;
    let name = name.trim();
    if !is_method_name(name) {
        return Err(bad());
    }
    let arity = arity.trim().parse().map_err(|_| bad())?;
    Ok((name.to_string(), arity))
}

fn parse_reg(s: &str) -> std::result::Result<Reg, String> {
    s.strip_prefix('r')
        .and_then(|n| n.parse().ok())
        .map(Reg)
        .ok_or_else(|| format!("`{s}` is not a register"))
}

fn parse_field(s: &str) -> std::result::Result<FieldRef, String> {
    let (class, field) = s
        .rsplit_once('.')
        .ok_or_else(|| format!("`{s}` is not a Class.field reference"))?;
    if !is_class_name(class) || !is_method_name(field) {
        return Err(format!("`{s}` is not a Class.field reference"));
    }
    Ok(FieldRef {
        class: class.to_string(),
        field: field.to_string(),
    })
}

fn parse_label(s: &str) -> std::result::Result<String, String> {
    if is_label(s) {
        Ok(s.to_string())
    } else {
        Err(format!("`{s}` is not a label"))
    }
}

/// `Class::m(r1, r2)`.
fn parse_call(s: &str) -> std::result::Result<(MethodId, Vec<Reg>), String> {
    let bad = || format!("`{s}` is not a call target");
    let (class, rest) = s.split_once("::").ok_or_else(bad)?;
    let (name, args) = rest
        .strip_suffix(')')
        .and_then(|r| r.split_once('('))
        .ok_or_else(bad)?;
    if !is_class_name(class) || !is_method_name(name) {
        return Err(bad());
    }
    let args = if args.trim().is_empty() {
        Vec::new()
    } else {
        args.split(',').map(|a| parse_reg(a.trim())).collect::<Result<_, _>>()?
    };
    Ok((MethodId::new(class, name, args.len()), args))
}

fn parse_string_literal(s: &str) -> std::result::Result<String, String> {
    let inner = s
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .ok_or_else(|| format!("`{s}` is not a quoted string"))?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                other => return Err(format!("bad escape `\\{}`", other.unwrap_or(' '))),
            },
            '"' => return Err(format!("unescaped quote in {s}")),
            c => out.push(c),
        }
    }
    Ok(out)
}

pub(crate) fn parse_instruction(text: &str) -> std::result::Result<Instruction, String> {
    if let Some((lhs, rhs)) = text.split_once(" = ") {
        let dst = parse_reg(lhs.trim())?;
        let rhs = rhs.trim();
        let (op, operand) = rhs.split_once(' ').unwrap_or((rhs, ""));
        let operand = operand.trim();
        return match op {
            "const-string" => Ok(Instruction::ConstString {
                dst,
                value: parse_string_literal(operand)?,
            }),
            "const-int" => Ok(Instruction::ConstInt {
                dst,
                value: operand
                    .parse()
                    .map_err(|_| format!("`{operand}` is not an integer"))?,
            }),
            "call" => {
                let (callee, args) = parse_call(operand)?;
                Ok(Instruction::Call {
                    dst: Some(dst),
                    callee,
                    args,
                })
            }
            "field-get" => Ok(Instruction::FieldGet {
                dst,
                field: parse_field(operand)?,
            }),
            "move" => Ok(Instruction::Move {
                dst,
                src: parse_reg(operand)?,
            }),
            _ => Err(format!("unknown instruction `{text}`")),
        };
    }

    let (op, operand) = text.split_once(' ').unwrap_or((text, ""));
    let operand = operand.trim();
    match op {
        "call-void" => {
            let (callee, args) = parse_call(operand)?;
            Ok(Instruction::Call {
                dst: None,
                callee,
                args,
            })
        }
        "field-put" => {
            let (field, src) = operand
                .split_once(',')
                .ok_or_else(|| format!("expected `field-put <Class>.<f>, rK`, got `{text}`"))?;
            Ok(Instruction::FieldPut {
                field: parse_field(field.trim())?,
                src: parse_reg(src.trim())?,
            })
        }
        "if" => {
            let (cond, label) = operand
                .split_once(" goto ")
                .ok_or_else(|| format!("expected `if rK goto <L>`, got `{text}`"))?;
            Ok(Instruction::IfGoto {
                cond: parse_reg(cond.trim())?,
                label: parse_label(label.trim())?,
            })
        }
        "goto" => Ok(Instruction::Goto {
            label: parse_label(operand)?,
        }),
        "label" => Ok(Instruction::Label {
            name: parse_label(operand)?,
        }),
        "return" => Ok(Instruction::Return {
            src: parse_reg(operand)?,
        }),
        "return-void" if operand.is_empty() => Ok(Instruction::ReturnVoid),
        _ => Err(format!("unknown instruction `{text}`")),
    }
}

fn undefined_register_diagnostics(body: &MethodBody, file: &str) -> Vec<Diagnostic> {
    body.reaching_defs()
        .maybe_undefined_uses(body)
        .into_iter()
        .map(|(idx, reg)| {
            Diagnostic::new(
                DiagnosticKind::UndefinedRegister,
                format!("{} reads {reg} at {idx} before it is assigned on some path", body.id),
            )
            .in_file(file)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let src = "class a.Net\nmethod go(0) {\n  r1 = const-string \"http://example.org\"\n  call-void Net::open(r1)\n}\n";
        let p = parse_sir(src, "a.Net.sir").unwrap();
        assert_eq!(p.methods().len(), 1);
        assert_eq!(p.methods()[0].instructions.len(), 2);
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
    }

    #[test]
    fn empty_file() {
        let p = parse_sir("\n# nothing\n", "e.sir").unwrap();
        assert!(p.unit.is_none());
        assert!(p.methods().is_empty());
    }

    #[test]
    fn undefined_label_drops_only_that_method() {
        let src = "class a.B\nmethod bad(0) {\n  goto nowhere\n}\nmethod good(0) {\n  return-void\n}\n";
        let p = parse_sir(src, "a.B.sir").unwrap();
        assert_eq!(p.methods().len(), 1);
        assert_eq!(p.methods()[0].id.name, "good");
        assert_eq!(p.diagnostics.len(), 1);
        assert_eq!(p.diagnostics[0].kind, DiagnosticKind::UndefinedLabel);
    }

    #[test]
    fn all_methods_malformed_is_an_error() {
        let src = "class a.B\nmethod bad(0) {\n  r1 = frobnicate\n}\n";
        let err = parse_sir(src, "a.B.sir").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn duplicate_signature() {
        let src = "class a.B\nmethod m(0) {\n  return-void\n}\nmethod m(0) {\n  return-void\n}\n";
        assert!(matches!(parse_sir(src, "f").unwrap_err(), Error::DuplicateMethod { .. }));
    }

    #[test]
    fn library_origin_and_all_forms() {
        let src = r#"class androidx.appcompat.app.TwilightManager library TwilightManager
method update(1) {
  r1 = const-int -3
  r2 = call android.location.LocationManager::getLastKnownLocation(r0)
  r3 = move r2
  field-put androidx.appcompat.app.TwilightManager.state, r3
  r4 = field-get androidx.appcompat.app.TwilightManager.state
  if r4 goto done
  goto done
  label done
  r5 = const-string "say \"hi\"\\"
  return r5
}
"#;
        let p = parse_sir(src, "t.sir").unwrap();
        let unit = p.unit.clone().unwrap();
        assert_eq!(unit.origin, Origin::Library("TwilightManager".into()));
        let m = &unit.methods[0];
        assert_eq!(m.instructions.len(), 10);
        assert_eq!(m.labels["done"], 7);
        assert_eq!(
            m.instructions[8],
            Instruction::ConstString {
                dst: Reg(5),
                value: "say \"hi\"\\".into()
            }
        );
        let reparsed = parse_sir(&unit.to_string(), "t.sir").unwrap();
        assert_eq!(reparsed.unit.unwrap(), unit);
    }

    #[test]
    fn call_sites_in_order() {
        let src = "class a.B\nmethod m(1) {\n  r1 = call x.Y::f(r0)\n  call-void x.Y::g()\n  r2 = call x.Y::f(r1)\n  return-void\n}\n";
        let p = parse_sir(src, "f").unwrap();
        let sites = crate::sir::collect_call_sites(&p.methods()[0]);
        assert_eq!(sites.len(), 3);
        assert_eq!(sites[0].0, 0);
        assert_eq!(sites[2].0, 2);
        assert_eq!(sites[0].1, sites[2].1);
        assert_eq!(sites[1].1.to_string(), "x.Y::g(0)");
    }

    #[test]
    fn no_calls() {
        let p = parse_sir("class a.B\nmethod m(0) {\n  return-void\n}\n", "f").unwrap();
        assert!(crate::sir::collect_call_sites(&p.methods()[0]).is_empty());
    }

    #[test]
    fn register_read_before_write_is_diagnosed() {
        let src = "class a.B\nmethod m(0) {\n  call-void x.Y::f(r3)\n  return-void\n}\n";
        let p = parse_sir(src, "f").unwrap();
        assert_eq!(p.methods().len(), 1);
        assert_eq!(p.diagnostics[0].kind, DiagnosticKind::UndefinedRegister);
    }
}
