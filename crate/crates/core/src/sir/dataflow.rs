//! Intra-method reaching definitions.

use std::collections::{BTreeMap, BTreeSet};

use super::{Instruction, MethodBody, Reg};

/// Where a register value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DefSite {
    /// Parameter bound at method entry.
    Param(Reg),
    Instr(usize),
}

type DefMap = BTreeMap<Reg, BTreeSet<DefSite>>;

/// Definitions reaching the start of every instruction.
#[derive(Debug, Clone)]
pub struct ReachingDefs {
    at_entry: Vec<DefMap>,
    reachable: Vec<bool>,
}

impl ReachingDefs {
    pub fn compute(m: &MethodBody) -> Self {
        let n = m.instructions.len();
        let mut at_entry: Vec<DefMap> = vec![DefMap::new(); n];
        let mut reachable = vec![false; n];
        if n == 0 {
            return ReachingDefs { at_entry, reachable };
        }
        for p in m.parameters() {
            at_entry[0].entry(p).or_default().insert(DefSite::Param(p));
        }
        reachable[0] = true;

        let mut work: Vec<usize> = vec![0];
        while let Some(i) = work.pop() {
            let mut out = at_entry[i].clone();
            if let Some(d) = m.instructions[i].def() {
                out.insert(d, BTreeSet::from([DefSite::Instr(i)]));
            }
            for s in m.successors(i) {
                let mut changed = !reachable[s];
                reachable[s] = true;
                let target = &mut at_entry[s];
                for (reg, defs) in &out {
                    let slot = target.entry(*reg).or_default();
                    for d in defs {
                        changed |= slot.insert(*d);
                    }
                }
                if changed && !work.contains(&s) {
                    work.push(s);
                }
            }
        }
        ReachingDefs { at_entry, reachable }
    }

    /// Definitions of `reg` that may reach instruction `i`.
    pub fn defs_of(&self, i: usize, reg: Reg) -> impl Iterator<Item = DefSite> + '_ {
        self.at_entry[i].get(&reg).into_iter().flatten().copied()
    }

    /// `(def, use index)` for every register read in the method, sorted.
    pub fn def_use_pairs(&self, m: &MethodBody) -> BTreeSet<(DefSite, usize)> {
        let mut out = BTreeSet::new();
        for (i, ins) in m.instructions.iter().enumerate() {
            for r in ins.uses() {
                out.extend(self.defs_of(i, r).map(|d| (d, i)));
            }
        }
        out
    }

    /// Reads that are not preceded by an assignment on every path from entry.
    pub fn maybe_undefined_uses(&self, m: &MethodBody) -> Vec<(usize, Reg)> {
        // Must-defined sets, intersected over predecessors.
        let n = m.instructions.len();
        let mut must: Vec<Option<BTreeSet<Reg>>> = vec![None; n];
        if n == 0 {
            return Vec::new();
        }
        must[0] = Some(m.parameters().collect());
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n {
                let Some(inset) = must[i].clone() else { continue };
                let mut out = inset;
                if let Some(d) = m.instructions[i].def() {
                    out.insert(d);
                }
                for s in m.successors(i) {
                    let next = match &must[s] {
                        None => out.clone(),
                        Some(cur) => cur.intersection(&out).copied().collect(),
                    };
                    if must[s].as_ref() != Some(&next) {
                        must[s] = Some(next);
                        changed = true;
                    }
                }
            }
        }
        let mut out = Vec::new();
        for (i, ins) in m.instructions.iter().enumerate() {
            if !self.reachable[i] {
                continue;
            }
            let defined = must[i].as_ref();
            for r in ins.uses() {
                if !defined.is_some_and(|d| d.contains(&r)) {
                    out.push((i, r));
                }
            }
        }
        out
    }

    /// String constants `reg` can hold at instruction `i`, following moves.
    /// `None` when any reaching definition is not a string constant.
    pub fn constant_strings(&self, m: &MethodBody, i: usize, reg: Reg) -> Option<BTreeSet<String>> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack: Vec<(usize, Reg)> = vec![(i, reg)];
        while let Some((at, r)) = stack.pop() {
            if !seen.insert((at, r)) {
                continue;
            }
            let mut any = false;
            for d in self.defs_of(at, r) {
                any = true;
                match d {
                    DefSite::Param(_) => return None,
                    DefSite::Instr(j) => match &m.instructions[j] {
                        Instruction::ConstString { value, .. } => {
                            out.insert(value.clone());
                        }
                        Instruction::Move { src, .. } => stack.push((j, *src)),
                        _ => return None,
                    },
                }
            }
            if !any {
                return None;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use crate::sir::parse_sir;

    use super::*;

    fn method(src: &str) -> MethodBody {
        let full = format!("class a.B\n{src}");
        parse_sir(&full, "t").unwrap().methods()[0].clone()
    }

    #[test]
    fn branches_merge_definitions() {
        let m = method(
            "method m(1) {\n  r1 = const-string \"MD5\"\n  if r0 goto other\n  goto use\n  label other\n  r1 = const-string \"SHA-1\"\n  label use\n  r2 = call java.security.MessageDigest::getInstance(r1)\n  return r2\n}",
        );
        let rd = m.reaching_defs();
        let consts = rd.constant_strings(&m, 6, Reg(1)).unwrap();
        assert_eq!(consts.into_iter().collect::<Vec<_>>(), ["MD5", "SHA-1"]);
        let pairs = rd.def_use_pairs(&m);
        assert!(pairs.contains(&(DefSite::Param(Reg(0)), 1)));
        assert!(pairs.contains(&(DefSite::Instr(0), 6)));
        assert!(pairs.contains(&(DefSite::Instr(4), 6)));
        assert!(pairs.contains(&(DefSite::Instr(6), 7)));
    }

    #[test]
    fn parameters_are_not_constants() {
        let m = method("method m(1) {\n  r1 = move r0\n  r2 = call x.Y::f(r1)\n  return-void\n}");
        assert_eq!(m.reaching_defs().constant_strings(&m, 1, Reg(1)), None);
    }

    #[test]
    fn conditionally_assigned_register_is_flagged() {
        let m = method(
            "method m(1) {\n  if r0 goto skip\n  r1 = const-int 1\n  label skip\n  return r1\n}",
        );
        assert_eq!(m.reaching_defs().maybe_undefined_uses(&m), vec![(3, Reg(1))]);
    }
}
