use crate::error::{Error, Result};
use crate::homalg::module::{
    cokernel_of, is_injective, is_surjective, kernel_of, map_is_well_defined, maps_equal, preimage,
};
use crate::homalg::IntMatrix;

use crate::site::MonotoneMap;

use super::mod_sheaf::{ModSheaf, Sections};
use super::set_sheaf::SetSheaf;

/// Natural transformation between set sheaves on one site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetMorphism {
    source: SetSheaf,
    target: SetSheaf,
    comps: Vec<Vec<u32>>,
}

impl SetMorphism {
    pub fn new(source: SetSheaf, target: SetSheaf, comps: Vec<Vec<u32>>) -> Result<SetMorphism> {
        if source.site() != target.site() {
            return Err(Error::Shape("morphism between sheaves on different sites".into()));
        }
        let site = source.site();
        if comps.len() != site.len() {
            return Err(Error::Shape("one component per point required".into()));
        }
        for (x, c) in comps.iter().enumerate() {
            if c.len() != source.size(x) || c.iter().any(|&t| t as usize >= target.size(x)) {
                return Err(Error::Shape(format!("component at {} is not a function", site.name(x))));
            }
        }
        for (x, y) in site.hasse_edges() {
            for s in 0..source.size(x) as u32 {
                if target.apply(x, y, comps[x][s as usize]) != comps[y][source.apply(x, y, s) as usize] {
                    return Err(Error::NotNatural(site.name(x).to_string(), site.name(y).to_string()));
                }
            }
        }
        Ok(SetMorphism {
            source,
            target,
            comps,
        })
    }

    pub fn identity(f: &SetSheaf) -> SetMorphism {
        SetMorphism {
            source: f.clone(),
            target: f.clone(),
            comps: (0..f.site().len()).map(|x| (0..f.size(x) as u32).collect()).collect(),
        }
    }

    /// `f*φ`, with component `φ_{f(p)}` at `p`.
    pub fn pullback(&self, f: &MonotoneMap) -> Result<SetMorphism> {
        let comps = (0..f.source().len()).map(|p| self.comps[f.apply(p)].clone()).collect();
        SetMorphism::new(self.source.pullback(f)?, self.target.pullback(f)?, comps)
    }

    pub fn source(&self) -> &SetSheaf {
        &self.source
    }

    pub fn target(&self) -> &SetSheaf {
        &self.target
    }

    pub fn component(&self, x: usize) -> &[u32] {
        &self.comps[x]
    }

    pub fn is_mono(&self) -> bool {
        self.comps.iter().all(|c| {
            let mut seen = std::collections::HashSet::new();
            c.iter().all(|v| seen.insert(*v))
        })
    }

    pub fn is_epi(&self) -> bool {
        self.comps.iter().enumerate().all(|(x, c)| {
            let mut hit = vec![false; self.target.size(x)];
            for &v in c {
                hit[v as usize] = true;
            }
            hit.into_iter().all(|b| b)
        })
    }
}

/// Natural transformation between module sheaves, as stalkwise matrices.
#[derive(Clone, Debug)]
pub struct ModMorphism {
    source: ModSheaf,
    target: ModSheaf,
    comps: Vec<IntMatrix>,
}

impl ModMorphism {
    pub fn new(source: ModSheaf, target: ModSheaf, comps: Vec<IntMatrix>) -> Result<ModMorphism> {
        if source.site() != target.site() || source.ring() != target.ring() {
            return Err(Error::Shape("morphism between sheaves on different sites or rings".into()));
        }
        let site = source.site().clone();
        if comps.len() != site.len() {
            return Err(Error::Shape("one component per point required".into()));
        }
        let ring = source.ring();
        let comps: Vec<IntMatrix> = comps
            .into_iter()
            .map(|m| match ring.modulus() {
                Some(k) => m.reduce_mod(k),
                None => m,
            })
            .collect();
        for (x, c) in comps.iter().enumerate() {
            if c.rows() != target.stalk(x).gens() || c.cols() != source.stalk(x).gens() {
                return Err(Error::Shape(format!("component at {} has the wrong shape", site.name(x))));
            }
            if !map_is_well_defined(source.stalk(x), target.stalk(x), c) {
                return Err(Error::IllDefinedMap(site.name(x).to_string()));
            }
        }
        for (x, y) in site.hasse_edges() {
            let l = target.comp(x, y).mul(&comps[x]);
            let r = comps[y].mul(source.comp(x, y));
            if !maps_equal(target.stalk(y), &l, &r) {
                return Err(Error::NotNatural(site.name(x).to_string(), site.name(y).to_string()));
            }
        }
        Ok(ModMorphism {
            source,
            target,
            comps,
        })
    }

    pub fn identity(f: &ModSheaf) -> ModMorphism {
        ModMorphism {
            source: f.clone(),
            target: f.clone(),
            comps: f.stalks().iter().map(|m| IntMatrix::identity(m.gens())).collect(),
        }
    }

    /// Multiplication by `k` on every stalk.
    pub fn scalar(f: &ModSheaf, k: i64) -> ModMorphism {
        let ring = f.ring();
        ModMorphism {
            source: f.clone(),
            target: f.clone(),
            comps: f
                .stalks()
                .iter()
                .map(|m| {
                    let s = IntMatrix::identity(m.gens()).scale(k);
                    match ring.modulus() {
                        Some(q) => s.reduce_mod(q),
                        None => s,
                    }
                })
                .collect(),
        }
    }

    /// The zero map `f → g`.
    pub fn zero(f: &ModSheaf, g: &ModSheaf) -> Result<ModMorphism> {
        let comps = (0..f.site().len())
            .map(|x| IntMatrix::zeros(g.stalk(x).gens(), f.stalk(x).gens()))
            .collect();
        ModMorphism::new(f.clone(), g.clone(), comps)
    }

    pub fn source(&self) -> &ModSheaf {
        &self.source
    }

    pub fn target(&self) -> &ModSheaf {
        &self.target
    }

    pub fn component(&self, x: usize) -> &IntMatrix {
        &self.comps[x]
    }

    pub fn components(&self) -> &[IntMatrix] {
        &self.comps
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &ModMorphism) -> Result<ModMorphism> {
        if g.source != self.target {
            return Err(Error::Shape("morphisms are not composable".into()));
        }
        let comps = self.comps.iter().zip(&g.comps).map(|(f, g)| g.mul(f)).collect();
        ModMorphism::new(self.source.clone(), g.target.clone(), comps)
    }

    /// `Γ(U, φ)` in the coordinates of two section modules over the same `U`.
    pub fn on_sections(&self, su: &Sections, sv: &Sections) -> IntMatrix {
        let cols: Vec<Vec<i64>> = (0..su.incl.cols())
            .map(|j| {
                let t = su.incl.col(j);
                let mut img = vec![0; sv.ambient.gens()];
                for (k, &x) in su.points.iter().enumerate() {
                    let v = self.comps[x].mul_vec(su.at(&t, x));
                    let off = sv.offsets[k];
                    img[off..off + v.len()].copy_from_slice(&v);
                }
                sv.coordinates(&img).expect("a morphism maps sections to sections")
            })
            .collect();
        IntMatrix::from_cols(&cols, sv.module.gens())
    }

    /// `f⋆φ`, between the pushforwards built by [`ModSheaf::pushforward`].
    pub fn pushforward(&self, f: &MonotoneMap) -> Result<ModMorphism> {
        let (a, b) = (self.source.pushforward(f)?, self.target.pushforward(f)?);
        let tgt = f.target();
        let comps = (0..tgt.len())
            .map(|q| {
                let v = f.preimage(tgt.minimal_open(q));
                self.on_sections(&self.source.sections(v), &self.target.sections(v))
            })
            .collect();
        ModMorphism::new(a, b, comps)
    }

    /// `f*φ`, with component `φ_{f(p)}` at `p`.
    pub fn pullback(&self, f: &MonotoneMap) -> Result<ModMorphism> {
        let comps = (0..f.source().len()).map(|p| self.comps[f.apply(p)].clone()).collect();
        ModMorphism::new(self.source.pullback(f)?, self.target.pullback(f)?, comps)
    }

    pub fn is_mono(&self) -> bool {
        (0..self.comps.len())
            .all(|x| is_injective(self.source.stalk(x), self.target.stalk(x), &self.comps[x]))
    }

    pub fn is_epi(&self) -> bool {
        (0..self.comps.len()).all(|x| is_surjective(self.target.stalk(x), &self.comps[x]))
    }

    pub fn is_zero(&self) -> bool {
        (0..self.comps.len()).all(|x| {
            let z = IntMatrix::zeros(self.comps[x].rows(), self.comps[x].cols());
            maps_equal(self.target.stalk(x), &self.comps[x], &z)
        })
    }

    /// Kernel sheaf with its inclusion.
    pub fn kernel(&self) -> ModMorphism {
        let site = self.source.site();
        let n = site.len();
        let subs: Vec<_> = (0..n)
            .map(|x| kernel_of(self.source.stalk(x), self.target.stalk(x), &self.comps[x]))
            .collect();
        let mut comp = vec![None; n * n];
        for (x, y) in site.relation_pairs() {
            let img = self.source.comp(x, y).mul(&subs[x].incl);
            let cols: Vec<Vec<i64>> = (0..img.cols())
                .map(|j| {
                    preimage(self.source.stalk(y), &subs[y].incl, &img.col(j))
                        .expect("kernels are preserved by comparison maps")
                })
                .collect();
            comp[x * n + y] = Some(IntMatrix::from_cols(&cols, subs[y].module.gens()));
        }
        let k = ModSheaf::from_parts_unchecked(
            site.clone(),
            self.source.ring(),
            subs.iter().map(|s| s.module.clone()).collect(),
            comp,
        );
        ModMorphism {
            source: k,
            target: self.source.clone(),
            comps: subs.into_iter().map(|s| s.incl).collect(),
        }
    }

    /// Cokernel sheaf with its projection.
    pub fn cokernel(&self) -> ModMorphism {
        let site = self.target.site();
        let n = site.len();
        let quots: Vec<_> = (0..n)
            .map(|x| cokernel_of(self.target.stalk(x), &self.comps[x]))
            .collect();
        let ring = self.target.ring();
        let mut comp = vec![None; n * n];
        for (x, y) in site.relation_pairs() {
            let mut m = quots[y].proj.mul(&self.target.comp(x, y).mul(&quots[x].lift));
            if let Some(k) = ring.modulus() {
                m = m.reduce_mod(k);
            }
            comp[x * n + y] = Some(m);
        }
        let c = ModSheaf::from_parts_unchecked(
            site.clone(),
            ring,
            quots.iter().map(|q| q.module.clone()).collect(),
            comp,
        );
        ModMorphism {
            source: self.target.clone(),
            target: c,
            comps: quots.into_iter().map(|q| q.proj).collect(),
        }
    }
}

/// `0 → A →ⁱ B →ᵖ C → 0`, exact at every stalk.
#[derive(Clone, Debug)]
pub struct ShortExact {
    pub i: ModMorphism,
    pub p: ModMorphism,
}

impl ShortExact {
    pub fn new(i: ModMorphism, p: ModMorphism) -> Result<ShortExact> {
        if i.target.site() != p.source.site() || i.target.stalks() != p.source.stalks() {
            return Err(Error::Shape("maps do not share a middle term".into()));
        }
        let site = i.source.site().clone();
        for x in 0..site.len() {
            let b = i.target.stalk(x);
            let name = site.name(x);
            if !is_injective(i.source.stalk(x), b, &i.comps[x]) {
                return Err(Error::NotExact(format!("first map not injective at {name}")));
            }
            if !is_surjective(p.target.stalk(x), &p.comps[x]) {
                return Err(Error::NotExact(format!("second map not surjective at {name}")));
            }
            let pi = p.comps[x].mul(&i.comps[x]);
            if !maps_equal(p.target.stalk(x), &pi, &IntMatrix::zeros(pi.rows(), pi.cols())) {
                return Err(Error::NotExact(format!("composite is nonzero at {name}")));
            }
            let k = kernel_of(b, p.target.stalk(x), &p.comps[x]);
            for j in 0..k.incl.cols() {
                if preimage(b, &i.comps[x], &k.incl.col(j)).is_none() {
                    return Err(Error::NotExact(format!("kernel larger than image at {name}")));
                }
            }
        }
        Ok(ShortExact { i, p })
    }

    /// `0 → A → B → B/A → 0` for a mono `A → B`.
    pub fn from_mono(i: ModMorphism) -> Result<ShortExact> {
        let p = i.cokernel();
        ShortExact::new(i, p)
    }

    pub fn sub(&self) -> &ModSheaf {
        &self.i.source
    }

    pub fn middle(&self) -> &ModSheaf {
        &self.i.target
    }

    pub fn quotient(&self) -> &ModSheaf {
        &self.p.target
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homalg::{FPModule, Ring};
    use crate::site::FinPoset;

    fn pseudocircle() -> FinPoset {
        FinPoset::new(
            &["x", "y", "a", "b"],
            &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")],
        )
        .unwrap()
    }

    #[test]
    fn times_two_on_constant_z() {
        let pc = pseudocircle();
        let z = ModSheaf::constant(&pc, &FPModule::free(Ring::Integers, 1));
        let two = ModMorphism::scalar(&z, 2);
        assert!(two.is_mono());
        assert!(!two.is_epi());
        let c = two.cokernel();
        for x in 0..4 {
            assert_eq!(c.target().stalk(x).invariant_factors().to_string(), "Z/2");
        }
        let id = ModMorphism::identity(&z);
        assert!(id.is_mono() && id.is_epi());
        let zero = ModSheaf::zero(&pc, Ring::Integers);
        assert!(ModMorphism::zero(&z, &zero).unwrap().is_epi());
        let ses = ShortExact::from_mono(two).unwrap();
        assert_eq!(ses.quotient().stalk(0).invariant_factors().to_string(), "Z/2");
    }

    #[test]
    fn non_natural_rejected() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let z = ModSheaf::constant(&s, &FPModule::free(Ring::Integers, 1));
        let comps = vec![IntMatrix::identity(1), IntMatrix::zeros(1, 1)];
        assert!(matches!(
            ModMorphism::new(z.clone(), z, comps),
            Err(Error::NotNatural(..))
        ));
    }

    #[test]
    fn set_morphism_checks() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let a = SetSheaf::constant(&s, &["0", "1"]);
        let t = SetSheaf::terminal(&s);
        let m = SetMorphism::new(a.clone(), t, vec![vec![0, 0], vec![0, 0]]).unwrap();
        assert!(m.is_epi() && !m.is_mono());
        assert!(SetMorphism::identity(&a).is_mono());
    }
}
