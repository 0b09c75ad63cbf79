use std::collections::HashSet;

use serde::Serialize;

use crate::error::Result;
use crate::sheafcore::{ModSheaf, VectMono, VectSheaf};
use crate::site::FinPoset;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyWitness {
    pub sub_dims: Vec<usize>,
    pub ambient_dims: Vec<usize>,
    pub stage: String,
}

/// Outcome of the bounded internal-injectivity test: passing means every
/// mono in the family was checked, never more.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub passed: bool,
    pub bound: usize,
    pub monos_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<FamilyWitness>,
}

/// The monos `A ↪ B` with `dim B_x ≤ d` (B up to isomorphism, every
/// subsheaf A), restricted to each stage `U_x` and deduplicated.
#[derive(Clone, Debug)]
pub struct MonoFamily {
    pub site: FinPoset,
    pub prime: u32,
    pub bound: usize,
    /// `(stage, mono)` with everything off `U_stage` set to zero.
    pub entries: Vec<(usize, VectMono)>,
}

fn zero_outside(v: &VectSheaf, u: crate::site::PointSet) -> VectSheaf {
    let dims: Vec<usize> = (0..v.site().len())
        .map(|x| if u.contains(x) { v.dims()[x] } else { 0 })
        .collect();
    let maps = v
        .edges()
        .iter()
        .zip(v.maps())
        .map(|(&(x, y), m)| {
            if u.contains(x) {
                m.clone()
            } else {
                crate::homalg::IntMatrix::zeros(dims[y], 0)
            }
        })
        .collect();
    VectSheaf::new(v.site().clone(), v.prime() as u32, dims, maps).expect("extension by zero from an open")
}

impl MonoFamily {
    pub fn new(site: &FinPoset, p: u32, d: usize) -> MonoFamily {
        let mut seen: HashSet<(usize, Vec<u8>, Vec<u8>, Vec<Vec<i64>>)> = HashSet::new();
        let mut entries = Vec::new();
        for b in VectSheaf::enumerate(site, p, d) {
            for m in b.subsheaves() {
                for x in 0..site.len() {
                    let u = site.minimal_open(x).points();
                    let sub = zero_outside(&m.sub, u);
                    let amb = zero_outside(&m.ambient, u);
                    let incl: Vec<_> = (0..site.len())
                        .map(|y| {
                            if u.contains(y) {
                                m.incl[y].clone()
                            } else {
                                crate::homalg::IntMatrix::zeros(0, 0)
                            }
                        })
                        .collect();
                    let key = (x, sub.key(), amb.key(), incl.iter().map(|i| i.to_rows().concat()).collect());
                    if seen.insert(key) {
                        entries.push((
                            x,
                            VectMono {
                                sub,
                                ambient: amb,
                                incl,
                            },
                        ));
                    }
                }
            }
        }
        MonoFamily {
            site: site.clone(),
            prime: p,
            bound: d,
            entries,
        }
    }

    /// `[B, I] → [A, I]` is onto at every stage, for every mono in the family.
    pub fn check(&self, i: &VectSheaf) -> FamilyReport {
        for (k, (x, m)) in self.entries.iter().enumerate() {
            let u = self.site.minimal_open(*x).points();
            if !VectSheaf::extends_over(m, i, u) {
                return FamilyReport {
                    passed: false,
                    bound: self.bound,
                    monos_checked: k + 1,
                    witness: Some(FamilyWitness {
                        sub_dims: m.sub.dims().to_vec(),
                        ambient_dims: m.ambient.dims().to_vec(),
                        stage: self.site.name(*x).to_string(),
                    }),
                };
            }
        }
        FamilyReport {
            passed: true,
            bound: self.bound,
            monos_checked: self.entries.len(),
            witness: None,
        }
    }
}

/// Internal injectivity of `I` over `ℤ/p`, tested on the family of monos
/// between sheaves of stalk dimension at most `d`.
pub fn internal_injective_family(i: &ModSheaf, d: usize) -> Result<FamilyReport> {
    let v = VectSheaf::from_mod(i)?;
    let fam = MonoFamily::new(i.site(), v.prime() as u32, d);
    Ok(fam.check(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flabby::indicator;
    use crate::homalg::{FPModule, Ring};

    #[test]
    fn family_on_sierpinski() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let ring = Ring::Mod(2);
        assert!(internal_injective_family(&ModSheaf::zero(&s, ring), 2).unwrap().passed);
        let sky = ModSheaf::skyscraper(&s, 0, &FPModule::free(ring, 1)).unwrap();
        assert!(internal_injective_family(&sky, 2).unwrap().passed);
        let simple = indicator(&s, ring, s.minimal_open(1));
        let r = internal_injective_family(&simple, 2).unwrap();
        assert!(!r.passed);
        assert_eq!(r.witness.unwrap().stage, "p0");
        let z = ModSheaf::constant(&s, &FPModule::free(Ring::Integers, 1));
        assert!(internal_injective_family(&z, 1).is_err());
    }
}
