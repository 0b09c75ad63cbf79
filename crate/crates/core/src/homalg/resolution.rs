//! Godement resolutions, sheaf cohomology and higher direct images.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flabby::godement_embed;
use crate::sheafcore::{ModMorphism, ModSheaf, Sections};
use crate::site::{FinPoset, MonotoneMap, Open};

use super::complex::{CohomologyGroup, CohomologyTable, Complex};
use super::matrix::IntMatrix;
use super::module::{preimage, FPModule};

/// How each cokernel is embedded into a flabby sheaf.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// `Q ↪ G(Q)`.
    #[default]
    Standard,
    /// `Q ↪ G(Q) ↪ G(G(Q))` at every step.
    Doubled,
}

/// `0 → F → G⁰ → G¹ → …` with `Gⁱ` flabby.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub source: ModSheaf,
    pub strategy: Strategy,
    /// `Gⁱ`.
    pub terms: Vec<ModSheaf>,
    /// `Qⁱ ↪ Gⁱ`, where `Q⁰ = F` and `Qⁱ⁺¹ = coker(Qⁱ → Gⁱ)`.
    pub embeds: Vec<ModMorphism>,
    /// `Gⁱ ↠ Qⁱ⁺¹`.
    pub cokers: Vec<ModMorphism>,
    /// `Gⁱ → Gⁱ⁺¹`.
    pub diffs: Vec<ModMorphism>,
}

/// `G(φ)`: the block-diagonal map between Godement sheaves.
pub fn godement_map(phi: &ModMorphism) -> Result<ModMorphism> {
    let (ga, _) = godement_embed(phi.source())?;
    let (gb, _) = godement_embed(phi.target())?;
    let site = phi.source().site();
    let comps = (0..site.len())
        .map(|y| {
            let blocks: Vec<&IntMatrix> = site.up_of(y).iter().map(|x| phi.component(x)).collect();
            IntMatrix::block_diag(&blocks)
        })
        .collect();
    ModMorphism::new(ga, gb, comps)
}

fn embed(q: &ModSheaf, strategy: Strategy) -> Result<ModMorphism> {
    let (_, e) = godement_embed(q)?;
    match strategy {
        Strategy::Standard => Ok(e),
        Strategy::Doubled => {
            let (_, e2) = godement_embed(e.target())?;
            e.then(&e2)
        }
    }
}

fn embed_map(phi: &ModMorphism, strategy: Strategy) -> Result<ModMorphism> {
    let g = godement_map(phi)?;
    match strategy {
        Strategy::Standard => Ok(g),
        Strategy::Doubled => godement_map(&g),
    }
}

/// The map `coker(a) → coker(b)` induced by `psi` on the middle terms.
fn induced_on_cokernels(p: &ModMorphism, psi: &ModMorphism, p2: &ModMorphism) -> Result<ModMorphism> {
    let site = p.source().site();
    let comps = (0..site.len())
        .map(|x| {
            let q = p.target().stalk(x);
            let cols: Vec<Vec<i64>> = (0..q.gens())
                .map(|j| {
                    let mut e = vec![0; q.gens()];
                    e[j] = 1;
                    let l = preimage(q, p.component(x), &e).expect("cokernel projections are onto");
                    p2.component(x).mul_vec(&psi.component(x).mul_vec(&l))
                })
                .collect();
            IntMatrix::from_cols(&cols, p2.target().stalk(x).gens())
        })
        .collect();
    ModMorphism::new(p.target().clone(), p2.target().clone(), comps)
}

impl Resolution {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lifts `phi: F → F'` to `Gⁱ → G'ⁱ` for every degree both share.
    pub fn lift(&self, other: &Resolution, phi: &ModMorphism) -> Result<Vec<ModMorphism>> {
        if self.strategy != other.strategy {
            return Err(Error::Unsupported("lifting between resolutions of different strategies".into()));
        }
        let n = self.len().min(other.len());
        let mut out = Vec::with_capacity(n);
        let mut on_q = phi.clone();
        for i in 0..n {
            let g = embed_map(&on_q, self.strategy)?;
            if i + 1 < n {
                on_q = induced_on_cokernels(&self.cokers[i], &g, &other.cokers[i])?;
            }
            out.push(g);
        }
        Ok(out)
    }

    /// `Γ(U, G⁰) → Γ(U, G¹) → …`, with the section data of each term.
    pub fn sections_complex(&self, u: Open) -> Result<(Complex, Vec<Sections>)> {
        let secs: Vec<Sections> = self.terms.iter().map(|g| g.sections(u)).collect();
        let diffs = self
            .diffs
            .iter()
            .enumerate()
            .map(|(i, d)| d.on_sections(&secs[i], &secs[i + 1]))
            .collect();
        let c = Complex::new(self.source.ring(), secs.iter().map(|s| s.module.clone()).collect(), diffs)?;
        Ok((c, secs))
    }
}

/// The first `len` terms of a Godement-style resolution.
pub fn godement_resolution_with(f: &ModSheaf, len: usize, strategy: Strategy) -> Result<Resolution> {
    let mut terms = Vec::with_capacity(len);
    let mut embeds = Vec::with_capacity(len);
    let mut cokers: Vec<ModMorphism> = Vec::with_capacity(len);
    let mut diffs = Vec::with_capacity(len);
    let mut q = f.clone();
    for i in 0..len {
        let e = embed(&q, strategy)?;
        if i > 0 {
            diffs.push(cokers[i - 1].then(&e)?);
        }
        terms.push(e.target().clone());
        if i + 1 < len {
            let c = e.cokernel();
            q = c.target().clone();
            cokers.push(c);
        }
        embeds.push(e);
    }
    Ok(Resolution {
        source: f.clone(),
        strategy,
        terms,
        embeds,
        cokers,
        diffs,
    })
}

/// `G⁰ … G^nmax`.
pub fn godement_resolution(f: &ModSheaf, nmax: usize) -> Result<Resolution> {
    godement_resolution_with(f, nmax + 1, Strategy::Standard)
}

/// Beyond the height of the poset all cohomology vanishes.
pub fn default_nmax(site: &FinPoset) -> usize {
    site.height() + 1
}

/// `Hⁿ(U, F)` for `n ≤ nmax`, computed from a resolution one term longer.
pub fn cohomology_on(f: &ModSheaf, u: Open, nmax: usize, strategy: Strategy) -> Result<CohomologyTable> {
    let res = godement_resolution_with(f, nmax + 2, strategy)?;
    let (c, _) = res.sections_complex(u)?;
    let mut t = c.cohomology();
    t.retain(|&n, _| n <= nmax);
    Ok(t)
}

pub fn sheaf_cohomology(f: &ModSheaf, nmax: usize) -> Result<CohomologyTable> {
    cohomology_on(f, f.site().whole(), nmax, Strategy::Standard)
}

pub fn sheaf_cohomology_with(f: &ModSheaf, nmax: usize, strategy: Strategy) -> Result<CohomologyTable> {
    cohomology_on(f, f.site().whole(), nmax, strategy)
}

/// `Hⁿ` groups of `Γ(U, G•)` with their section data, for `n ≤ nmax`.
pub struct SectionCohomology {
    pub complex: Complex,
    pub sections: Vec<Sections>,
    pub groups: Vec<CohomologyGroup>,
}

impl SectionCohomology {
    pub fn new(res: &Resolution, u: Open, nmax: usize) -> Result<SectionCohomology> {
        if res.len() < nmax + 2 {
            return Err(Error::Shape(format!("resolution of length {} is too short for degree {nmax}", res.len())));
        }
        let (complex, sections) = res.sections_complex(u)?;
        let groups = (0..=nmax).map(|n| complex.cohomology_group(n)).collect();
        Ok(SectionCohomology {
            complex,
            sections,
            groups,
        })
    }
}

/// `Hⁿ(φ)` as a matrix between the normalized presentations, given the
/// lifted maps on the resolutions.
pub fn induced_map(lift: &[ModMorphism], src: &SectionCohomology, tgt: &SectionCohomology, n: usize) -> IntMatrix {
    let reps = src.groups[n].representatives();
    let cols: Vec<Vec<i64>> = (0..reps.cols())
        .map(|j| {
            let t = src.sections[n].realize(&reps.col(j));
            let mut img = vec![0; tgt.sections[n].ambient.gens()];
            for (k, &x) in src.sections[n].points.iter().enumerate() {
                let v = lift[n].component(x).mul_vec(src.sections[n].at(&t, x));
                let off = tgt.sections[n].offsets[k];
                img[off..off + v.len()].copy_from_slice(&v);
            }
            let c = tgt.sections[n].coordinates(&img).expect("lifted maps preserve sections");
            tgt.groups[n].class_of(&c).expect("lifted maps preserve cocycles")
        })
        .collect();
    IntMatrix::from_cols(&cols, tgt.groups[n].module.gens())
}

/// `Rⁿf⋆F` for `n ≤ nmax`: stalk at `q` is `Hⁿ(Γ(f⁻¹(U_q), G•))`, with
/// comparison maps induced by restriction.
pub fn higher_direct_image(f: &MonotoneMap, sheaf: &ModSheaf, nmax: usize) -> Result<Vec<ModSheaf>> {
    if f.source() != sheaf.site() {
        return Err(Error::Shape("sheaf does not live on the source of the map".into()));
    }
    let tgt = f.target();
    let res = godement_resolution(sheaf, nmax + 1)?;
    let local: Vec<SectionCohomology> = (0..tgt.len())
        .map(|q| SectionCohomology::new(&res, f.preimage(tgt.minimal_open(q)), nmax))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let stalks: Vec<FPModule> = local.iter().map(|l| l.groups[n].module.clone()).collect();
        let maps = tgt
            .hasse_edges()
            .into_iter()
            .map(|(q, r)| {
                let (a, b) = (&local[q], &local[r]);
                let restrict = restriction_of_terms(&res, n, a, b);
                let reps = a.groups[n].representatives();
                let cols: Vec<Vec<i64>> = (0..reps.cols())
                    .map(|j| {
                        let c = restrict.mul_vec(&reps.col(j));
                        b.groups[n].class_of(&c).expect("restriction preserves cocycles")
                    })
                    .collect();
                ((q, r), IntMatrix::from_cols(&cols, b.groups[n].module.gens()))
            })
            .collect();
        out.push(ModSheaf::new(tgt.clone(), sheaf.ring(), stalks, &maps)?);
    }
    Ok(out)
}

fn restriction_of_terms(res: &Resolution, n: usize, a: &SectionCohomology, b: &SectionCohomology) -> IntMatrix {
    res.terms[n]
        .restriction(&a.sections[n], &b.sections[n])
        .expect("preimages of smaller opens are smaller")
}

/// A disagreement between `(Rⁿf⋆F)_q` and `Hⁿ(f⁻¹(U_q), F)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StalkMismatch {
    pub point: String,
    pub degree: usize,
    pub direct_image: String,
    pub local_cohomology: String,
}

/// Compares every stalk of every `Rⁿf⋆F` with the cohomology of the
/// restriction of `F` to `f⁻¹(U_q)`, computed from scratch.
pub fn stalk_formula_check(f: &MonotoneMap, sheaf: &ModSheaf, nmax: usize) -> Result<Vec<StalkMismatch>> {
    let images = higher_direct_image(f, sheaf, nmax)?;
    let tgt = f.target();
    let mut out = Vec::new();
    for q in 0..tgt.len() {
        let v = f.preimage(tgt.minimal_open(q));
        let (sub, _) = sheaf.restrict_to_open(v);
        let table = sheaf_cohomology(&sub, nmax)?;
        for (n, r) in images.iter().enumerate() {
            let lhs = r.stalk(q).invariant_factors();
            let rhs = table.get(&n).cloned().unwrap_or_else(super::module::InvariantFactors::zero);
            if lhs != rhs {
                out.push(StalkMismatch {
                    point: tgt.name(q).to_string(),
                    degree: n,
                    direct_image: lhs.to_string(),
                    local_cohomology: rhs.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Strict chains `x₀ < … < xₙ`, grouped by `n`.
pub fn strict_chains(p: &FinPoset) -> Vec<Vec<Vec<usize>>> {
    let mut by_len: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = p.topological_order().iter().map(|&x| vec![x]).collect();
    stack.reverse();
    while let Some(c) = stack.pop() {
        let last = *c.last().unwrap();
        let n = c.len() - 1;
        if by_len.len() <= n {
            by_len.resize(n + 1, Vec::new());
        }
        for &y in p.topological_order().iter().rev() {
            if y != last && p.le(last, y) {
                let mut d = c.clone();
                d.push(y);
                stack.push(d);
            }
        }
        by_len[n].push(c);
    }
    for v in &mut by_len {
        v.sort();
    }
    by_len
}

/// Simplicial cohomology of the order complex with coefficients in `a`.
pub fn order_complex_cohomology(p: &FinPoset, a: &FPModule) -> Result<CohomologyTable> {
    let ring = a.ring();
    let g = a.gens();
    let chains = strict_chains(p);
    let modules: Vec<FPModule> = chains
        .iter()
        .map(|cs| FPModule::direct_sum(&vec![a; cs.len()], ring))
        .collect();
    let mut diffs = Vec::new();
    for n in 0..chains.len().saturating_sub(1) {
        let mut d = IntMatrix::zeros(chains[n + 1].len() * g, chains[n].len() * g);
        for (r, s) in chains[n + 1].iter().enumerate() {
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                let c = chains[n].binary_search(&face).expect("faces of chains are chains");
                let sign = if i % 2 == 0 { 1 } else { -1 };
                d.put(r * g, c * g, &IntMatrix::identity(g).scale(sign));
            }
        }
        diffs.push(d);
    }
    if modules.is_empty() {
        return Ok(CohomologyTable::new());
    }
    Ok(Complex::new(ring, modules, diffs)?.cohomology())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flabby::is_flabby_traditional_mod;
    use crate::homalg::{InvariantFactors, Ring};

    fn pseudocircle() -> FinPoset {
        FinPoset::new(&["x", "y", "a", "b"], &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")]).unwrap()
    }

    fn h(s: &str) -> InvariantFactors {
        InvariantFactors::parse(s).unwrap()
    }

    #[test]
    fn resolution_terms_are_flabby() {
        let pc = pseudocircle();
        let z = ModSheaf::constant(&pc, &FPModule::free(Ring::Integers, 1));
        let r = godement_resolution(&z, 2).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.terms[0].stalk(0).gens(), 3);
        for g in &r.terms {
            assert!(is_flabby_traditional_mod(g).unwrap().verdict);
        }
    }

    #[test]
    fn circle_cohomology() {
        let pc = pseudocircle();
        let z = ModSheaf::constant(&pc, &FPModule::free(Ring::Integers, 1));
        let t = sheaf_cohomology(&z, 2).unwrap();
        assert_eq!(t[&0], h("Z"));
        assert_eq!(t[&1], h("Z"));
        assert_eq!(t[&2], h("0"));
        assert_eq!(sheaf_cohomology_with(&z, 2, Strategy::Doubled).unwrap(), t);
        let oc = order_complex_cohomology(&pc, &FPModule::free(Ring::Integers, 1)).unwrap();
        assert_eq!(oc[&0], h("Z"));
        assert_eq!(oc[&1], h("Z"));
    }

    #[test]
    fn direct_images_to_a_point() {
        let pc = pseudocircle();
        let z = ModSheaf::constant(&pc, &FPModule::free(Ring::Integers, 1));
        let r = higher_direct_image(&MonotoneMap::to_point(&pc), &z, 2).unwrap();
        assert_eq!(r[1].stalk(0).invariant_factors(), h("Z"));
        assert!(stalk_formula_check(&MonotoneMap::to_point(&pc), &z, 2).unwrap().is_empty());
        let id = higher_direct_image(&MonotoneMap::identity(&pc), &z, 2).unwrap();
        assert!(id[1].is_zero() && id[2].is_zero());
    }

    #[test]
    fn lifted_identity_is_identity_on_cohomology() {
        let pc = pseudocircle();
        let z = ModSheaf::constant(&pc, &FPModule::free(Ring::Integers, 1));
        let r = godement_resolution(&z, 2).unwrap();
        let lift = r.lift(&r, &ModMorphism::identity(&z)).unwrap();
        let c = SectionCohomology::new(&r, pc.whole(), 1).unwrap();
        assert_eq!(induced_map(&lift, &c, &c, 1), IntMatrix::identity(1));
    }
}

#[cfg(test)]
mod sphere {
    use super::*;
    use crate::homalg::{InvariantFactors, Ring};

    #[test]
    fn two_sphere_all_coefficients() {
        let s2 = FinPoset::new(
            &["n0", "n1", "e0", "e1", "v0", "v1"],
            &[("n0", "e0"), ("n0", "e1"), ("n1", "e0"), ("n1", "e1"), ("e0", "v0"), ("e0", "v1"), ("e1", "v0"), ("e1", "v1")],
        )
        .unwrap();
        for a in [FPModule::free(Ring::Integers, 1), FPModule::free(Ring::Mod(2), 1), FPModule::cyclic(Ring::Integers, 4)] {
            let t = sheaf_cohomology(&ModSheaf::constant(&s2, &a), 3).unwrap();
            assert_eq!(t, order_complex_cohomology(&s2, &a).unwrap().into_iter().chain([(3, InvariantFactors::zero())]).collect());
            assert_eq!(t[&2], a.invariant_factors());
            assert!(t[&1].is_zero());
        }
        let z = ModSheaf::constant(&s2, &FPModule::free(Ring::Integers, 1));
        assert!(stalk_formula_check(&MonotoneMap::to_point(&s2), &z, 3).unwrap().is_empty());
    }
}
