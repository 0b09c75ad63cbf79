//! The internal language: formulas, forcing, and the internal readings of
//! flabbiness and injectivity.

pub mod force;
pub mod formula;
pub mod injective;

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sheafcore::{Presheaf, SetSheaf};
use crate::site::FinCategory;

pub use force::{Relation, Session, Structure};
pub use formula::{Formula, Sort};
pub use injective::{internal_injective_family, FamilyReport, FamilyWitness, MonoFamily};

/// "X is a flabby set" forced at every stage.
pub fn internal_flabby(x: &SetSheaf) -> Result<bool> {
    let mut st = Structure::on_poset(x.site());
    st.add_sheaf("X", x)?;
    st.holds_globally(&Formula::flabby("X"))
}

pub fn internal_flabby_presheaf(x: &Presheaf) -> Result<bool> {
    let mut st = Structure::new(x.category().clone());
    st.add_object("X", x.clone())?;
    st.holds_globally(&Formula::flabby("X"))
}

/// Twenty intuitionistic tautologies over propositional letters `p q r`, a
/// unary relation `R` on an object `X`, and `p`.
pub fn ipc_schedule() -> Vec<Formula> {
    [
        "(imp p p)",
        "(imp p (imp q p))",
        "(imp (imp p (imp q r)) (imp (imp p q) (imp p r)))",
        "(imp (and p q) p)",
        "(imp (and p q) q)",
        "(imp p (imp q (and p q)))",
        "(imp p (or p q))",
        "(imp q (or p q))",
        "(imp (imp p r) (imp (imp q r) (imp (or p q) r)))",
        "(imp false p)",
        "(imp p (not (not p)))",
        "(imp (not (not (not p))) (not p))",
        "(iff (not (or p q)) (and (not p) (not q)))",
        "(imp (imp p q) (imp (not q) (not p)))",
        "(not (not (or p (not p))))",
        "(iff (and p (or q r)) (or (and p q) (and p r)))",
        "(imp (exists (x X) (R x)) (not (forall (y X) (not (R y)))))",
        "(iff (forall (x X) (imp p (R x))) (imp p (forall (y X) (R y))))",
        "(iff (exists (x X) (and p (R x))) (and p (exists (y X) (R y))))",
        "(iff (not (exists (x X) (R x))) (forall (y X) (not (R y))))",
    ]
    .iter()
    .map(|s| Formula::parse(s).expect("schedule parses"))
    .collect()
}

/// All subobjects of `X`, as element sets per object.
pub fn subpresheaves(x: &Presheaf) -> Result<Vec<Vec<HashSet<u32>>>> {
    let cat = x.category();
    let n = cat.num_objects();
    let bits: usize = (0..n).map(|c| x.size(c)).sum();
    if bits > 20 {
        return Err(Error::TooLarge(format!("{bits} elements in total")));
    }
    let mut out = Vec::new();
    for mask in 0u64..1 << bits {
        let mut sets = Vec::with_capacity(n);
        let mut off = 0;
        for c in 0..n {
            sets.push((0..x.size(c) as u32).filter(|&v| mask >> (off + v as usize) & 1 == 1).collect::<HashSet<u32>>());
            off += x.size(c);
        }
        let closed = (0..n).all(|c| {
            cat.arrows_into(c).iter().all(|&a| {
                let d = cat.arrow(a).src;
                sets[c].iter().all(|&v| sets[d].contains(&x.act(a, v)))
            })
        });
        if closed {
            out.push(sets);
        }
    }
    Ok(out)
}

/// A schedule formula that fails for some interpretation of the letters,
/// with `X` interpreted as `x` and `R` ranging over its subobjects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IpcFailure {
    pub formula: String,
    pub assignment: String,
}

pub fn check_ipc(cat: Arc<FinCategory>, x: &Presheaf) -> Result<Vec<IpcFailure>> {
    let sieves = cat.sieves_of_terminal()?;
    let subs = subpresheaves(x)?;
    let mut failures = Vec::new();
    for phi in ipc_schedule() {
        let text = phi.to_string();
        let first_order = text.contains("(R ") || text.contains(" R ");
        let uses_q = text.contains('q');
        let uses_r = text.contains(" r") || text.contains("(r");
        let rs: Vec<Option<&Vec<HashSet<u32>>>> = if first_order {
            subs.iter().map(Some).collect()
        } else {
            vec![None]
        };
        let one = [0u64];
        let qs: &[u64] = if uses_q { &sieves } else { &one };
        let ls: &[u64] = if uses_r { &sieves } else { &one };
        'outer: for &p in &sieves {
            for &q in qs {
                for &r in ls {
                    for rel in &rs {
                        let mut st = Structure::new(cat.clone());
                        st.add_object("X", x.clone())?;
                        st.add_proposition("p", p)?;
                        st.add_proposition("q", q)?;
                        st.add_proposition("r", r)?;
                        if let Some(sets) = rel {
                            let tuples = sets.iter().map(|s| s.iter().map(|&v| vec![v]).collect()).collect();
                            st.add_relation("R", &["X"], tuples)?;
                        }
                        if !st.holds_globally(&phi)? {
                            failures.push(IpcFailure {
                                formula: text.clone(),
                                assignment: format!("p={p:#b} q={q:#b} r={r:#b} R={rel:?}"),
                            });
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::FinPoset;

    fn antichain() -> FinPoset {
        FinPoset::new(&["a", "b"], &[]).unwrap()
    }

    #[test]
    fn flabbiness_internally() {
        let ac = antichain();
        assert!(internal_flabby(&SetSheaf::terminal(&ac)).unwrap());
        assert!(internal_flabby(&SetSheaf::constant(&ac, &["0", "1"])).unwrap());
        let fork = FinPoset::new(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap();
        assert!(!internal_flabby(&SetSheaf::constant(&fork, &["0", "1"])).unwrap());
        let pc = FinPoset::new(&["x", "y", "a", "b"], &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")]).unwrap();
        assert!(internal_flabby(&SetSheaf::omega(&pc).unwrap()).unwrap());
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        assert!(!internal_flabby(&SetSheaf::initial(&s)).unwrap());
    }

    #[test]
    fn bg_remark() {
        let g = Arc::new(FinCategory::cyclic_group(2));
        let reg = Presheaf::regular(g.clone()).unwrap();
        assert!(internal_flabby_presheaf(&reg).unwrap());
        assert!(internal_flabby_presheaf(&Presheaf::terminal(g)).unwrap());
    }

    #[test]
    fn schedule_holds_on_sierpinski_and_lem_does_not() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let cat = Arc::new(FinCategory::from_poset(&s));
        let x = Presheaf::from_set_sheaf(&SetSheaf::constant(&s, &["0", "1"]), cat.clone());
        assert_eq!(ipc_schedule().len(), 20);
        assert!(check_ipc(cat.clone(), &x).unwrap().is_empty());
        let mut st = Structure::new(cat);
        st.add_proposition("p", 0b10).unwrap();
        assert!(!st.holds_globally(&Formula::parse("(or p (not p))").unwrap()).unwrap());
    }
}
