//! The quotient `T = P≤1(M)/∼` of a module sheaf with finite stalks, where
//! `K ∼ L` iff `K = L` or `K ∪ L ⊆ {0}`, interpreted at every stage `U_x`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sheafcore::{ElementTable, ModSheaf, SetMorphism, SetSheaf};

use super::checks::{is_flabby_local, is_flabby_traditional, FlabbyReport};
use super::subterminal::{singleton_part, subterminal_object, SubterminalObject, SubterminalPart};

/// Which module laws the class operations satisfy, checked at every stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvelopeAxioms {
    /// `[K] + [L]` independent of the representatives.
    pub addition_well_defined: bool,
    pub scalar_well_defined: bool,
    pub associative: bool,
    pub commutative: bool,
    pub zero_neutral: bool,
    pub inverses: bool,
    /// Operations commute with the comparison maps.
    pub natural: bool,
}

#[derive(Clone, Debug)]
pub struct Envelope {
    /// The underlying set sheaf of `M` and its element table.
    pub elements: SetSheaf,
    pub table: ElementTable,
    pub subterminals: SubterminalObject,
    /// `T`, one element per class.
    pub sheaf: SetSheaf,
    /// `class[x][k]`: the class of part `k` at `x`.
    pub class: Vec<Vec<u32>>,
    /// Canonical part of each class; the zero class is represented by `{0}`.
    pub rep: Vec<Vec<u32>>,
    /// `m ↦ [{m}]`.
    pub embedding: SetMorphism,
    pub axioms: EnvelopeAxioms,
}

impl Envelope {
    pub fn is_mono(&self) -> bool {
        self.embedding.is_mono()
    }

    pub fn flabby_traditional(&self) -> Result<FlabbyReport> {
        is_flabby_traditional(&self.sheaf)
    }

    pub fn flabby_local(&self) -> Result<FlabbyReport> {
        is_flabby_local(&self.sheaf)
    }
}

struct Arith {
    add: Vec<Vec<u32>>,
    mul: Vec<Vec<u32>>,
    zero: Vec<u32>,
    sizes: Vec<usize>,
}

impl Arith {
    fn add(&self, x: usize, a: u32, b: u32) -> u32 {
        self.add[x][a as usize * self.sizes[x] + b as usize]
    }
}

fn part_op(k: &SubterminalPart, l: &SubterminalPart, f: impl Fn(usize, u32, u32) -> u32) -> SubterminalPart {
    SubterminalPart {
        domain: k.domain,
        select: k
            .select
            .iter()
            .zip(&l.select)
            .enumerate()
            .map(|(y, (a, b))| match (a, b) {
                (Some(a), Some(b)) => Some(f(y, *a, *b)),
                _ => None,
            })
            .collect(),
    }
}

pub fn candidate_envelope(m: &ModSheaf) -> Result<Envelope> {
    let modulus = m
        .ring()
        .modulus()
        .ok_or_else(|| Error::Unsupported("the envelope needs finite stalks (ring Z/m)".into()))?;
    let (elements, table) = m.underlying_set_sheaf()?;
    let site = m.site().clone();
    let n = site.len();
    let sizes = elements.sizes();
    let mut arith = Arith {
        add: Vec::new(),
        mul: Vec::new(),
        zero: Vec::new(),
        sizes: sizes.clone(),
    };
    for x in 0..n {
        let k = sizes[x] as u32;
        let mut add = Vec::with_capacity((k * k) as usize);
        for a in 0..k {
            for b in 0..k {
                let (va, vb) = (table.coords(x, a), table.coords(x, b));
                let s: Vec<i64> = va.iter().zip(&vb).map(|(p, q)| p + q).collect();
                add.push(table.index_of(x, &s));
            }
        }
        let mul = (0..modulus)
            .flat_map(|r| {
                (0..k).map(move |a| (r, a)).collect::<Vec<_>>()
            })
            .map(|(r, a)| {
                let v: Vec<i64> = table.coords(x, a).iter().map(|c| c * r).collect();
                table.index_of(x, &v)
            })
            .collect();
        arith.add.push(add);
        arith.mul.push(mul);
        arith.zero.push(table.index_of(x, &vec![0; m.stalk(x).gens()]));
    }

    let p1 = subterminal_object(&elements)?;
    let in_zero = |k: &SubterminalPart| {
        k.select
            .iter()
            .enumerate()
            .all(|(y, s)| s.is_none_or(|v| v == arith.zero[y]))
    };
    let mut class = Vec::with_capacity(n);
    let mut rep = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut index: Vec<HashMap<SubterminalPart, u32>> = Vec::with_capacity(n);
    for x in 0..n {
        let parts = &p1.parts[x];
        let zero_part = singleton_part(&elements, x, arith.zero[x]);
        let zero_idx = parts.iter().position(|k| *k == zero_part).expect("{0} is a part") as u32;
        let mut cls = vec![0u32; parts.len()];
        let mut reps = vec![zero_idx];
        let mut labs = vec!["[0]".to_string()];
        for (i, k) in parts.iter().enumerate() {
            if !in_zero(k) {
                cls[i] = reps.len() as u32;
                reps.push(i as u32);
                labs.push(format!("[{}]", k.fmt(&elements)));
            }
        }
        index.push(parts.iter().enumerate().map(|(i, k)| (k.clone(), i as u32)).collect());
        class.push(cls);
        rep.push(reps);
        labels.push(labs);
    }
    let mut comp = vec![Vec::new(); n * n];
    for (x, y) in site.relation_pairs() {
        let pc = p1.sheaf.comp(x, y);
        comp[x * n + y] = rep[x].iter().map(|&k| class[y][pc[k as usize] as usize]).collect();
    }
    let sheaf = SetSheaf::from_parts_unchecked(site.clone(), labels, comp);
    let emb = (0..n)
        .map(|x| {
            p1.singleton
                .component(x)
                .iter()
                .map(|&k| class[x][k as usize])
                .collect()
        })
        .collect();
    let embedding = SetMorphism::new(elements.clone(), sheaf.clone(), emb)?;

    // class-level operations on canonical representatives
    let part = |x: usize, k: u32| &p1.parts[x][k as usize];
    let cls_of = |x: usize, k: &SubterminalPart| class[x][index[x][k] as usize];
    let plus_parts = |a: &SubterminalPart, b: &SubterminalPart| part_op(a, b, |y, s, t| arith.add(y, s, t));
    let plus = |x: usize, c: u32, d: u32| -> u32 {
        let (a, b) = (part(x, rep[x][c as usize]), part(x, rep[x][d as usize]));
        cls_of(x, &plus_parts(a, b))
    };
    let scale_part = |a: &SubterminalPart, r: i64| SubterminalPart {
        domain: a.domain,
        select: a
            .select
            .iter()
            .enumerate()
            .map(|(y, s)| s.map(|v| arith.mul[y][r as usize * sizes[y] + v as usize]))
            .collect(),
    };
    let mut ax = EnvelopeAxioms {
        addition_well_defined: true,
        scalar_well_defined: true,
        associative: true,
        commutative: true,
        zero_neutral: true,
        inverses: true,
        natural: true,
    };
    for x in 0..n {
        let parts = &p1.parts[x];
        let nc = rep[x].len() as u32;
        for (i, a) in parts.iter().enumerate() {
            for (j, b) in parts.iter().enumerate() {
                let direct = cls_of(x, &plus_parts(a, b));
                if direct != plus(x, class[x][i], class[x][j]) {
                    ax.addition_well_defined = false;
                }
            }
            for r in 0..modulus as i64 {
                let direct = cls_of(x, &scale_part(a, r));
                let via = cls_of(x, &scale_part(part(x, rep[x][class[x][i] as usize]), r));
                if direct != via {
                    ax.scalar_well_defined = false;
                }
            }
        }
        for c in 0..nc {
            if plus(x, 0, c) != c {
                ax.zero_neutral = false;
            }
            if !(0..nc).any(|d| plus(x, c, d) == 0) {
                ax.inverses = false;
            }
            for d in 0..nc {
                if plus(x, c, d) != plus(x, d, c) {
                    ax.commutative = false;
                }
                for e in 0..nc {
                    if plus(x, plus(x, c, d), e) != plus(x, c, plus(x, d, e)) {
                        ax.associative = false;
                    }
                }
                for y in site.up_of(x).iter() {
                    let r = |k: u32| sheaf.apply(x, y, k);
                    if r(plus(x, c, d)) != plus(y, r(c), r(d)) {
                        ax.natural = false;
                    }
                }
            }
        }
    }

    Ok(Envelope {
        elements,
        table,
        subterminals: p1,
        sheaf,
        class,
        rep,
        embedding,
        axioms: ax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homalg::{FPModule, Ring};
    use crate::site::FinPoset;

    #[test]
    fn envelope_on_the_point() {
        let pt = FinPoset::new(&["o"], &[]).unwrap();
        let m = ModSheaf::constant(&pt, &FPModule::free(Ring::Mod(2), 1));
        let e = candidate_envelope(&m).unwrap();
        // parts ∅, {0}, {1}; the first two merge
        assert_eq!(e.sheaf.sizes(), vec![2]);
        assert!(e.is_mono());
        let z = ModSheaf::zero(&pt, Ring::Mod(2));
        assert_eq!(candidate_envelope(&z).unwrap().sheaf.sizes(), vec![1]);
    }

    #[test]
    fn envelope_on_pseudocircle() {
        let pc = FinPoset::new(&["x", "y", "a", "b"], &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")]).unwrap();
        let m = ModSheaf::constant(&pc, &FPModule::free(Ring::Mod(2), 1));
        let e = candidate_envelope(&m).unwrap();
        assert!(e.is_mono());
        assert_eq!(e.sheaf.sizes(), vec![7, 7, 2, 2]);
        assert!(!e.axioms.addition_well_defined);
        let t = e.flabby_traditional().unwrap();
        assert_eq!(t.verdict, e.flabby_local().unwrap().verdict);
    }

    #[test]
    fn integers_are_rejected() {
        let pt = FinPoset::new(&["o"], &[]).unwrap();
        let m = ModSheaf::constant(&pt, &FPModule::free(Ring::Integers, 1));
        assert!(candidate_envelope(&m).is_err());
    }
}
