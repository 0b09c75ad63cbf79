//! Finitely presented modules over `ℤ` and `ℤ/m`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::linalg::{kernel, rref_mod_p, solve};
use super::matrix::IntMatrix;
use super::ring::Ring;
use super::snf::smith_normal_form;

/// `R^g / ⟨relations⟩`. Relations are stored as the columns of a `g × r`
/// matrix; over `ℤ/m` the relations `m·eᵢ` are implicit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FPModule {
    ring: Ring,
    gens: usize,
    rels: IntMatrix,
}

/// A module rewritten in a minimal diagonal presentation, with the
/// coordinate changes to and from the original generators.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub module: FPModule,
    /// `g' × g`: old coordinates to new.
    pub to_new: IntMatrix,
    /// `g × g'`: new generators written in old coordinates.
    pub to_old: IntMatrix,
}

/// Submodule given by an inclusion of generators.
#[derive(Debug, Clone)]
pub struct Sub {
    pub module: FPModule,
    /// `g_ambient × g_sub`
    pub incl: IntMatrix,
}

/// Quotient module with its projection.
#[derive(Debug, Clone)]
pub struct Quot {
    pub module: FPModule,
    /// `g_quot × g_ambient`
    pub proj: IntMatrix,
    /// `g_ambient × g_quot`: a preimage of each quotient generator.
    pub lift: IntMatrix,
}

/// Invariant-factor normal form `ℤ^r ⊕ ℤ/d₁ ⊕ … ⊕ ℤ/dₖ`, `d₁ | … | dₖ`, `dᵢ > 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InvariantFactors {
    pub free_rank: usize,
    pub torsion: Vec<i64>,
}

impl InvariantFactors {
    pub fn zero() -> Self {
        InvariantFactors {
            free_rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Parses the `Z^r (+) Z/d1 (+) …` notation produced by `Display`.
    pub fn parse(s: &str) -> Option<InvariantFactors> {
        let s = s.trim();
        let mut out = InvariantFactors::zero();
        if s == "0" {
            return Some(out);
        }
        for part in s.split("(+)") {
            let part = part.trim();
            if part == "Z" {
                out.free_rank += 1;
            } else if let Some(r) = part.strip_prefix("Z^") {
                out.free_rank += r.parse::<usize>().ok()?;
            } else if let Some(d) = part.strip_prefix("Z/") {
                out.torsion.push(d.parse().ok()?);
            } else {
                return None;
            }
        }
        Some(out)
    }
}

impl fmt::Display for InvariantFactors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" (+) "))
        }
    }
}

impl FPModule {
    /// Module with `gens` generators and the given relation rows.
    pub fn new(ring: Ring, gens: usize, relation_rows: &[Vec<i64>]) -> FPModule {
        let rels = IntMatrix::from_rows(relation_rows, gens).transpose();
        Self::from_rel_cols(ring, gens, rels)
    }

    pub(crate) fn from_rel_cols(ring: Ring, gens: usize, rels: IntMatrix) -> FPModule {
        assert_eq!(rels.rows(), gens);
        let rels = match ring.modulus() {
            Some(m) => rels.reduce_mod(m),
            None => rels,
        };
        FPModule { ring, gens, rels }
    }

    pub fn free(ring: Ring, n: usize) -> FPModule {
        FPModule {
            ring,
            gens: n,
            rels: IntMatrix::zeros(n, 0),
        }
    }

    pub fn zero(ring: Ring) -> FPModule {
        Self::free(ring, 0)
    }

    /// `R/(d)`.
    pub fn cyclic(ring: Ring, d: i64) -> FPModule {
        Self::new(ring, 1, &[vec![d]])
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    /// Relation columns (`gens × r`).
    pub fn relations(&self) -> &IntMatrix {
        &self.rels
    }

    pub fn relation_rows(&self) -> Vec<Vec<i64>> {
        self.rels.transpose().to_rows()
    }

    pub fn reduce(&self, v: &mut [i64]) {
        self.ring.reduce_vec(v);
    }

    pub fn is_zero_elem(&self, v: &[i64]) -> bool {
        assert_eq!(v.len(), self.gens);
        if v.iter().all(|&x| self.ring.reduce(x) == 0) {
            return true;
        }
        if self.rels.cols() == 0 {
            return false;
        }
        solve(self.ring, &self.rels, v).is_some()
    }

    pub fn elem_eq(&self, a: &[i64], b: &[i64]) -> bool {
        let d: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.is_zero_elem(&d)
    }

    pub fn direct_sum(parts: &[&FPModule], ring: Ring) -> FPModule {
        let gens = parts.iter().map(|m| m.gens).sum();
        let blocks: Vec<&IntMatrix> = parts.iter().map(|m| &m.rels).collect();
        FPModule {
            ring,
            gens,
            rels: IntMatrix::block_diag(&blocks),
        }
    }

    /// Minimal diagonal presentation. Over a prime field the result is free.
    pub fn normalize(&self) -> Normalized {
        let g = self.gens;
        if let Some(p) = self.ring.field_prime() {
            let (rows, pivots) = rref_mod_p(&self.rels.transpose(), p);
            let mut pivot_row = vec![None; g];
            for (i, &c) in pivots.iter().enumerate() {
                pivot_row[c] = Some(i);
            }
            let keep: Vec<usize> = (0..g).filter(|&c| pivot_row[c].is_none()).collect();
            let mut to_new = IntMatrix::zeros(keep.len(), g);
            let mut to_old = IntMatrix::zeros(g, keep.len());
            for (k, &j) in keep.iter().enumerate() {
                to_new.set(k, j, 1);
                to_old.set(j, k, 1);
                for (row, &c) in rows.iter().zip(&pivots) {
                    to_new.set(k, c, (-row[j]).rem_euclid(p));
                }
            }
            return Normalized {
                module: FPModule::free(self.ring, keep.len()),
                to_new,
                to_old,
            };
        }
        let full = match self.ring.modulus() {
            Some(m) => self.rels.hstack(&IntMatrix::identity(g).scale(m)),
            None => self.rels.clone(),
        };
        let s = smith_normal_form(&full);
        let d = |i: usize| s.diag.get(i).copied().unwrap_or(0);
        let keep: Vec<usize> = (0..g).filter(|&i| d(i) != 1).collect();
        let mut rel_cols = Vec::new();
        for (k, &i) in keep.iter().enumerate() {
            let di = d(i);
            let implicit = di == 0 || Some(di) == self.ring.modulus();
            if !implicit {
                let mut c = vec![0; keep.len()];
                c[k] = di;
                rel_cols.push(c);
            }
        }
        let mut to_new = s.u.select_rows(&keep);
        let mut to_old = s.u_inv.select_cols(&keep);
        if let Some(m) = self.ring.modulus() {
            to_new = to_new.reduce_mod(m);
            to_old = to_old.reduce_mod(m);
        }
        Normalized {
            module: FPModule::from_rel_cols(
                self.ring,
                keep.len(),
                IntMatrix::from_cols(&rel_cols, keep.len()),
            ),
            to_new,
            to_old,
        }
    }

    pub fn invariant_factors(&self) -> InvariantFactors {
        let g = self.gens;
        let full = match self.ring.modulus() {
            Some(m) => self.rels.hstack(&IntMatrix::identity(g).scale(m)),
            None => self.rels.clone(),
        };
        let s = smith_normal_form(&full);
        let mut out = InvariantFactors::zero();
        for i in 0..g {
            match s.diag.get(i).copied().unwrap_or(0) {
                0 => out.free_rank += 1,
                1 => {}
                d => out.torsion.push(d),
            }
        }
        out
    }

    pub fn is_trivial(&self) -> bool {
        self.normalize().module.gens == 0
    }

    /// Additive order of each generator in a diagonal presentation
    /// (`None` for infinite order). Only meaningful after `normalize`.
    pub fn generator_orders(&self) -> Vec<Option<i64>> {
        let mut orders: Vec<Option<i64>> = vec![self.ring.modulus(); self.gens];
        for j in 0..self.rels.cols() {
            let c = self.rels.col(j);
            let nz: Vec<usize> = (0..self.gens).filter(|&i| c[i] != 0).collect();
            if nz.len() == 1 {
                let i = nz[0];
                let d = c[i].abs();
                orders[i] = Some(match orders[i] {
                    Some(o) => num_integer::gcd(o, d),
                    None => d,
                });
            }
        }
        orders
    }

    /// All elements of a finite module in a diagonal presentation, as
    /// coordinate vectors with `0 ≤ xᵢ < order(i)`, in lexicographic order.
    /// Returns `None` if some generator has infinite order.
    pub fn finite_elements(&self) -> Option<Vec<Vec<i64>>> {
        let orders: Vec<i64> = self
            .generator_orders()
            .into_iter()
            .collect::<Option<Vec<_>>>()?;
        let mut out = vec![Vec::new()];
        for &o in &orders {
            let mut next = Vec::with_capacity(out.len() * o as usize);
            for v in &out {
                for x in 0..o {
                    let mut w = v.clone();
                    w.push(x);
                    next.push(w);
                }
            }
            out = next;
        }
        Some(out)
    }

    /// Canonical representative of an element in a diagonal presentation.
    pub fn canonical(&self, v: &[i64]) -> Vec<i64> {
        self.generator_orders()
            .iter()
            .zip(v)
            .map(|(o, &x)| match o {
                Some(o) => x.rem_euclid(*o),
                None => x,
            })
            .collect()
    }
}

impl fmt::Debug for FPModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FPModule({} gens over {}, rels {:?})",
            self.gens,
            self.ring,
            self.relation_rows()
        )
    }
}

/// `f` sends every relation of `src` to zero in `tgt`.
pub fn map_is_well_defined(src: &FPModule, tgt: &FPModule, f: &IntMatrix) -> bool {
    assert_eq!((f.rows(), f.cols()), (tgt.gens, src.gens), "map shape");
    let img = f.mul(&src.rels);
    (0..img.cols()).all(|j| tgt.is_zero_elem(&img.col(j)))
}

/// `f` and `g` agree as maps into `tgt`.
pub fn maps_equal(tgt: &FPModule, f: &IntMatrix, g: &IntMatrix) -> bool {
    let d = f.sub(g);
    (0..d.cols()).all(|j| tgt.is_zero_elem(&d.col(j)))
}

/// Some preimage of `v` under `f`, up to relations of the target.
pub fn preimage(tgt: &FPModule, f: &IntMatrix, v: &[i64]) -> Option<Vec<i64>> {
    let a = f.hstack(&tgt.rels);
    let x = solve(tgt.ring, &a, v)?;
    Some(x[..f.cols()].to_vec())
}

pub fn kernel_of(src: &FPModule, tgt: &FPModule, f: &IntMatrix) -> Sub {
    let ring = src.ring;
    let a = f.hstack(&tgt.rels);
    let k = kernel(ring, &a);
    let top: Vec<usize> = (0..src.gens).collect();
    let b = k.select_rows(&top);
    let l = b.cols();
    let k2 = kernel(ring, &b.hstack(&src.rels));
    let rels = k2.select_rows(&(0..l).collect::<Vec<_>>());
    let n = FPModule::from_rel_cols(ring, l, rels).normalize();
    let mut incl = b.mul(&n.to_old);
    if let Some(m) = ring.modulus() {
        incl = incl.reduce_mod(m);
    }
    Sub {
        module: n.module,
        incl,
    }
}

pub fn cokernel_of(tgt: &FPModule, f: &IntMatrix) -> Quot {
    let q = FPModule::from_rel_cols(tgt.ring, tgt.gens, tgt.rels.hstack(f)).normalize();
    Quot {
        module: q.module,
        proj: q.to_new,
        lift: q.to_old,
    }
}

/// Submodule of `ambient` generated by the columns of `gens`.
pub fn image_of(ambient: &FPModule, gens: &IntMatrix) -> Sub {
    let ring = ambient.ring;
    let k = gens.cols();
    let kk = kernel(ring, &gens.hstack(&ambient.rels));
    let rels = kk.select_rows(&(0..k).collect::<Vec<_>>());
    let n = FPModule::from_rel_cols(ring, k, rels).normalize();
    let mut incl = gens.mul(&n.to_old);
    if let Some(m) = ring.modulus() {
        incl = incl.reduce_mod(m);
    }
    Sub {
        module: n.module,
        incl,
    }
}

pub fn is_injective(src: &FPModule, tgt: &FPModule, f: &IntMatrix) -> bool {
    kernel_of(src, tgt, f).module.gens() == 0
}

pub fn is_surjective(tgt: &FPModule, f: &IntMatrix) -> bool {
    cokernel_of(tgt, f).module.gens() == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_factor_strings() {
        let m = FPModule::new(Ring::Integers, 3, &[vec![2, 0, 0], vec![0, 0, 0]]);
        let f = m.invariant_factors();
        assert_eq!(f.to_string(), "Z^2 (+) Z/2");
        assert_eq!(InvariantFactors::parse("Z^2 (+) Z/2"), Some(f));
        assert_eq!(FPModule::zero(Ring::Integers).invariant_factors().to_string(), "0");
        let z2 = FPModule::free(Ring::Mod(2), 2);
        assert_eq!(z2.invariant_factors().to_string(), "Z/2 (+) Z/2");
    }

    #[test]
    fn normalize_drops_unit_relations() {
        // Z^2 / (1, 2) ≅ Z
        let m = FPModule::new(Ring::Integers, 2, &[vec![1, 2]]);
        let n = m.normalize();
        assert_eq!(n.module.gens(), 1);
        assert_eq!(n.module.invariant_factors().to_string(), "Z");
        // to_new ∘ to_old = id on the new module
        let id = n.to_new.mul(&n.to_old);
        assert!(maps_equal(&n.module, &id, &IntMatrix::identity(1)));
    }

    #[test]
    fn kernel_and_cokernel_of_times_two() {
        let z = FPModule::free(Ring::Integers, 1);
        let two = IntMatrix::from_rows(&[vec![2]], 1);
        assert!(is_injective(&z, &z, &two));
        assert!(!is_surjective(&z, &two));
        let q = cokernel_of(&z, &two);
        assert_eq!(q.module.invariant_factors().to_string(), "Z/2");

        let z4 = FPModule::free(Ring::Mod(4), 1);
        let k = kernel_of(&z4, &z4, &two);
        assert_eq!(k.module.invariant_factors().to_string(), "Z/2");
    }

    #[test]
    fn finite_elements_of_diagonal_module() {
        let m = FPModule::free(Ring::Mod(3), 2);
        assert_eq!(m.finite_elements().unwrap().len(), 9);
        assert!(FPModule::free(Ring::Integers, 1).finite_elements().is_none());
    }
}
