use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::matrix::IntMatrix;
use super::module::{kernel_of, maps_equal, preimage, FPModule, InvariantFactors};
use super::ring::Ring;

/// Bounded cochain complex `C⁰ → C¹ → … → Cᴺ`.
#[derive(Debug, Clone)]
pub struct Complex {
    ring: Ring,
    modules: Vec<FPModule>,
    /// `diffs[n] : Cⁿ → Cⁿ⁺¹`, a `gens(n+1) × gens(n)` matrix.
    diffs: Vec<IntMatrix>,
}

/// One cohomology group `ker dⁿ / im dⁿ⁻¹` with enough data to push
/// cocycles into it.
#[derive(Debug, Clone)]
pub struct CohomologyGroup {
    /// Normalized presentation of `Hⁿ`.
    pub module: FPModule,
    /// Cycle generators in `Cⁿ` coordinates (`gens(Cⁿ) × z`).
    pub cycles: IntMatrix,
    /// Cycle coordinates to `Hⁿ` coordinates (`gens(Hⁿ) × z`).
    pub to_h: IntMatrix,
    /// `Hⁿ` generators in cycle coordinates (`z × gens(Hⁿ)`).
    pub from_h: IntMatrix,
    cn: FPModule,
}

impl CohomologyGroup {
    /// Class of a cocycle given in `Cⁿ` coordinates. `None` if `v` is not a
    /// cocycle.
    pub fn class_of(&self, v: &[i64]) -> Option<Vec<i64>> {
        let y = preimage(&self.cn, &self.cycles, v)?;
        let mut h = self.to_h.mul_vec(&y);
        self.module.reduce(&mut h);
        Some(self.module.canonical(&h))
    }

    /// Representative cocycle (in `Cⁿ` coordinates) of each generator of `Hⁿ`.
    pub fn representatives(&self) -> IntMatrix {
        self.cycles.mul(&self.from_h)
    }
}

/// Degree → invariant factors.
pub type CohomologyTable = BTreeMap<usize, InvariantFactors>;

impl Complex {
    /// Builds a complex, checking shapes, well-definedness and `d∘d = 0`.
    pub fn new(ring: Ring, modules: Vec<FPModule>, diffs: Vec<IntMatrix>) -> Result<Complex> {
        if !modules.is_empty() && diffs.len() + 1 != modules.len() {
            return Err(Error::Shape(format!(
                "{} modules need {} differentials, got {}",
                modules.len(),
                modules.len() - 1,
                diffs.len()
            )));
        }
        for (n, d) in diffs.iter().enumerate() {
            if d.rows() != modules[n + 1].gens() || d.cols() != modules[n].gens() {
                return Err(Error::Shape(format!("differential {n} has the wrong shape")));
            }
            if !super::module::map_is_well_defined(&modules[n], &modules[n + 1], d) {
                return Err(Error::IllDefinedMap(format!("d{n}")));
            }
        }
        for n in 0..diffs.len().saturating_sub(1) {
            let dd = diffs[n + 1].mul(&diffs[n]);
            let zero = IntMatrix::zeros(dd.rows(), dd.cols());
            if !maps_equal(&modules[n + 2], &dd, &zero) {
                return Err(Error::NotAComplex(n));
            }
        }
        Ok(Complex {
            ring,
            modules,
            diffs,
        })
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn module(&self, n: usize) -> &FPModule {
        &self.modules[n]
    }

    pub fn differential(&self, n: usize) -> &IntMatrix {
        &self.diffs[n]
    }

    /// `Hⁿ`; the complex is treated as zero outside `0..len`.
    pub fn cohomology_group(&self, n: usize) -> CohomologyGroup {
        let cn = &self.modules[n];
        let z = match self.diffs.get(n) {
            Some(d) => kernel_of(cn, &self.modules[n + 1], d),
            None => kernel_of(cn, &FPModule::zero(self.ring), &IntMatrix::zeros(0, cn.gens())),
        };
        let zg = z.module.gens();
        let mut rel_cols: Vec<Vec<i64>> = z.module.relations().transpose().to_rows();
        if n > 0 {
            let d = &self.diffs[n - 1];
            for j in 0..d.cols() {
                let y = preimage(cn, &z.incl, &d.col(j))
                    .expect("image of the previous differential lies in the cycles");
                rel_cols.push(y);
            }
        }
        let h = FPModule::from_rel_cols(self.ring, zg, IntMatrix::from_cols(&rel_cols, zg));
        let norm = h.normalize();
        CohomologyGroup {
            module: norm.module,
            cycles: z.incl,
            to_h: norm.to_new,
            from_h: norm.to_old,
            cn: cn.clone(),
        }
    }

    pub fn cohomology(&self) -> CohomologyTable {
        (0..self.len())
            .map(|n| (n, self.cohomology_group(n).module.invariant_factors()))
            .collect()
    }
}

/// Renders a table as `{"H0": "Z", …}` style pairs.
pub fn table_strings(t: &CohomologyTable) -> Vec<(String, String)> {
    t.iter().map(|(n, f)| (format!("H{n}"), f.to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times_two() {
        let z = FPModule::free(Ring::Integers, 1);
        let c = Complex::new(
            Ring::Integers,
            vec![z.clone(), z],
            vec![IntMatrix::from_rows(&[vec![2]], 1)],
        )
        .unwrap();
        let t = c.cohomology();
        assert_eq!(t[&0].to_string(), "0");
        assert_eq!(t[&1].to_string(), "Z/2");
    }

    #[test]
    fn zero_differentials_give_the_modules() {
        let z2 = FPModule::free(Ring::Integers, 2);
        let c = Complex::new(
            Ring::Integers,
            vec![z2.clone(), z2],
            vec![IntMatrix::zeros(2, 2)],
        )
        .unwrap();
        let t = c.cohomology();
        assert_eq!(t[&0].to_string(), "Z^2");
        assert_eq!(t[&1].to_string(), "Z^2");
    }

    #[test]
    fn exact_complex_is_acyclic() {
        // 0 → Z → Z² → Z → 0 split exact
        let z = FPModule::free(Ring::Integers, 1);
        let z2 = FPModule::free(Ring::Integers, 2);
        let c = Complex::new(
            Ring::Integers,
            vec![FPModule::zero(Ring::Integers), z.clone(), z2, z],
            vec![
                IntMatrix::zeros(1, 0),
                IntMatrix::from_rows(&[vec![1], vec![0]], 1),
                IntMatrix::from_rows(&[vec![0, 1]], 2),
            ],
        )
        .unwrap();
        // last degree has no outgoing map, so H³ = coker = 0
        assert!(c.cohomology().values().all(|f| f.is_zero()));
    }

    #[test]
    fn rejects_non_complex() {
        let z = FPModule::free(Ring::Integers, 1);
        let one = IntMatrix::identity(1);
        let r = Complex::new(Ring::Integers, vec![z.clone(), z.clone(), z], vec![one.clone(), one]);
        assert!(matches!(r, Err(Error::NotAComplex(0))));
    }

    #[test]
    fn class_of_cocycle() {
        let z = FPModule::free(Ring::Integers, 1);
        let c = Complex::new(
            Ring::Integers,
            vec![z.clone(), z],
            vec![IntMatrix::from_rows(&[vec![2]], 1)],
        )
        .unwrap();
        let h1 = c.cohomology_group(1);
        assert_eq!(h1.class_of(&[3]), Some(vec![1]));
        assert_eq!(h1.class_of(&[4]), Some(vec![0]));
    }
}
