use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::homalg::module::{
    image_of, kernel_of, map_is_well_defined, maps_equal, preimage, Normalized, Sub,
};
use crate::homalg::{FPModule, IntMatrix, Ring};
use crate::site::{FinPoset, MonotoneMap, Open};

use super::set_sheaf::SetSheaf;

/// A sheaf of finitely presented modules over a constant ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModSheaf {
    site: FinPoset,
    ring: Ring,
    stalks: Vec<FPModule>,
    /// `comp[x * n + y]` for `x ≤ y`: a `gens(y) × gens(x)` matrix.
    comp: Vec<Option<IntMatrix>>,
}

/// `Γ(U, F)` as a submodule of `⊕_{x∈U} F_x`.
#[derive(Clone, Debug)]
pub struct Sections {
    pub open: Open,
    /// Normalized presentation of the sections.
    pub module: FPModule,
    /// `gens(ambient) × gens(module)`: each generator as a tuple of stalk
    /// elements.
    pub incl: IntMatrix,
    /// `⊕_{x∈U} F_x`.
    pub ambient: FPModule,
    pub points: Vec<usize>,
    /// Offset of each point's coordinates in the ambient sum.
    pub offsets: Vec<usize>,
}

impl Sections {
    /// The ambient tuple of a section given in module coordinates.
    pub fn realize(&self, v: &[i64]) -> Vec<i64> {
        let mut t = self.incl.mul_vec(v);
        self.ambient.reduce(&mut t);
        t
    }

    /// Module coordinates of an ambient tuple, if it is a section.
    pub fn coordinates(&self, t: &[i64]) -> Option<Vec<i64>> {
        preimage(&self.ambient, &self.incl, t)
    }

    /// The coordinates of point `x` inside an ambient tuple.
    pub fn at<'a>(&self, t: &'a [i64], x: usize) -> &'a [i64] {
        let i = self.points.iter().position(|&p| p == x).expect("point of U");
        let end = self.offsets.get(i + 1).copied().unwrap_or(t.len());
        &t[self.offsets[i]..end]
    }
}

/// Elements of a sheaf with finite stalks, used to view it as a set sheaf.
#[derive(Clone, Debug)]
pub struct ElementTable {
    pub norm: Vec<Normalized>,
    /// Elements of each stalk in normalized coordinates.
    pub elems: Vec<Vec<Vec<i64>>>,
    index: Vec<HashMap<Vec<i64>, u32>>,
}

impl ElementTable {
    /// Index of an element given in the original stalk coordinates.
    pub fn index_of(&self, x: usize, v: &[i64]) -> u32 {
        let n = &self.norm[x];
        let w = n.module.canonical(&n.to_new.mul_vec(v));
        self.index[x][&w]
    }

    /// Original stalk coordinates of element `i` at `x`.
    pub fn coords(&self, x: usize, i: u32) -> Vec<i64> {
        self.norm[x].to_old.mul_vec(&self.elems[x][i as usize])
    }
}

impl ModSheaf {
    /// Builds a sheaf from stalks and comparison matrices on some pairs
    /// `x < y` (all Hasse edges required). Composites are derived and
    /// functoriality is checked up to relations.
    pub fn new(
        site: FinPoset,
        ring: Ring,
        stalks: Vec<FPModule>,
        maps: &HashMap<(usize, usize), IntMatrix>,
    ) -> Result<ModSheaf> {
        let n = site.len();
        if stalks.len() != n {
            return Err(Error::Shape(format!("{} stalks for {n} points", stalks.len())));
        }
        if let Some(x) = stalks.iter().position(|m| m.ring() != ring) {
            return Err(Error::RingMismatch(format!(
                "stalk at {} is over {}, sheaf over {ring}",
                site.name(x),
                stalks[x].ring()
            )));
        }
        let reduce = |m: &IntMatrix| match ring.modulus() {
            Some(k) => m.reduce_mod(k),
            None => m.clone(),
        };
        for (&(x, y), m) in maps {
            if x >= n || y >= n || !site.le(x, y) {
                return Err(Error::Input(format!("map given for a pair that is not x <= y: #{x}, #{y}")));
            }
            if m.rows() != stalks[y].gens() || m.cols() != stalks[x].gens() {
                return Err(Error::Shape(format!(
                    "map {}<={} should be {}x{}",
                    site.name(x),
                    site.name(y),
                    stalks[y].gens(),
                    stalks[x].gens()
                )));
            }
            if !map_is_well_defined(&stalks[x], &stalks[y], m) {
                return Err(Error::IllDefinedMap(format!("{}<={}", site.name(x), site.name(y))));
            }
        }
        let mut succ = vec![Vec::new(); n];
        for (x, y) in site.hasse_edges() {
            if !maps.contains_key(&(x, y)) {
                return Err(Error::Input(format!(
                    "missing map on edge {}<={}",
                    site.name(x),
                    site.name(y)
                )));
            }
            succ[x].push(y);
        }
        let mut comp: Vec<Option<IntMatrix>> = vec![None; n * n];
        for x in 0..n {
            comp[x * n + x] = Some(IntMatrix::identity(stalks[x].gens()));
        }
        for &x in site.topological_order().iter().rev() {
            for z in site.up_of(x).iter() {
                if z == x {
                    continue;
                }
                let mut derived: Option<IntMatrix> = None;
                for &y in &succ[x] {
                    if !site.le(y, z) {
                        continue;
                    }
                    let cand = reduce(&comp[y * n + z].as_ref().unwrap().mul(&maps[&(x, y)]));
                    match &derived {
                        None => derived = Some(cand),
                        Some(d) => {
                            if !maps_equal(&stalks[z], d, &cand) {
                                return Err(Error::NotFunctorial(
                                    site.name(x).to_string(),
                                    site.name(z).to_string(),
                                ));
                            }
                        }
                    }
                }
                let d = derived.expect("Hasse path");
                if let Some(given) = maps.get(&(x, z)) {
                    if !maps_equal(&stalks[z], given, &d) {
                        return Err(Error::NotFunctorial(
                            site.name(x).to_string(),
                            site.name(z).to_string(),
                        ));
                    }
                }
                comp[x * n + z] = Some(d);
            }
        }
        Ok(ModSheaf {
            site,
            ring,
            stalks,
            comp,
        })
    }

    pub(crate) fn from_parts_unchecked(
        site: FinPoset,
        ring: Ring,
        stalks: Vec<FPModule>,
        comp: Vec<Option<IntMatrix>>,
    ) -> ModSheaf {
        ModSheaf {
            site,
            ring,
            stalks,
            comp,
        }
    }

    /// Builds from Hasse-edge matrices keyed by point names.
    pub fn from_named(
        site: FinPoset,
        ring: Ring,
        stalks: Vec<FPModule>,
        maps: &[(&str, &str, Vec<Vec<i64>>)],
    ) -> Result<ModSheaf> {
        let mut m = HashMap::new();
        for (a, b, rows) in maps {
            let (x, y) = (site.index(a)?, site.index(b)?);
            m.insert((x, y), IntMatrix::from_rows(rows, stalks[x].gens()));
        }
        Self::new(site, ring, stalks, &m)
    }

    pub fn constant(site: &FinPoset, m: &FPModule) -> ModSheaf {
        let n = site.len();
        let mut comp = vec![None; n * n];
        for (x, y) in site.relation_pairs() {
            comp[x * n + y] = Some(IntMatrix::identity(m.gens()));
        }
        ModSheaf {
            site: site.clone(),
            ring: m.ring(),
            stalks: vec![m.clone(); n],
            comp,
        }
    }

    pub fn zero(site: &FinPoset, ring: Ring) -> ModSheaf {
        Self::constant(site, &FPModule::zero(ring))
    }

    /// Stalk `M` at points below `x`, zero elsewhere.
    pub fn skyscraper(site: &FinPoset, x: usize, m: &FPModule) -> Result<ModSheaf> {
        if x >= site.len() {
            return Err(Error::UnknownPoint(format!("#{x}")));
        }
        let n = site.len();
        let below = site.down_of(x);
        let zero = FPModule::zero(m.ring());
        let stalks: Vec<FPModule> = (0..n)
            .map(|y| if below.contains(y) { m.clone() } else { zero.clone() })
            .collect();
        let mut comp = vec![None; n * n];
        for (y, z) in site.relation_pairs() {
            comp[y * n + z] = Some(if below.contains(z) {
                IntMatrix::identity(m.gens())
            } else {
                IntMatrix::zeros(0, stalks[y].gens())
            });
        }
        Ok(ModSheaf {
            site: site.clone(),
            ring: m.ring(),
            stalks,
            comp,
        })
    }

    /// Stalkwise direct sum (the product in the category of sheaves).
    pub fn direct_sum(parts: &[&ModSheaf]) -> Result<ModSheaf> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Input("empty direct sum".into()))?;
        for p in parts {
            if p.site != first.site || p.ring != first.ring {
                return Err(Error::Shape("direct sum of sheaves on different sites or rings".into()));
            }
        }
        let site = first.site.clone();
        let n = site.len();
        let stalks = (0..n)
            .map(|x| {
                let ms: Vec<&FPModule> = parts.iter().map(|p| &p.stalks[x]).collect();
                FPModule::direct_sum(&ms, first.ring)
            })
            .collect();
        let mut comp = vec![None; n * n];
        for (x, y) in site.relation_pairs() {
            let blocks: Vec<&IntMatrix> = parts.iter().map(|p| p.comp(x, y)).collect();
            comp[x * n + y] = Some(IntMatrix::block_diag(&blocks));
        }
        Ok(ModSheaf {
            site,
            ring: first.ring,
            stalks,
            comp,
        })
    }

    pub fn site(&self) -> &FinPoset {
        &self.site
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn stalk(&self, x: usize) -> &FPModule {
        &self.stalks[x]
    }

    pub fn stalks(&self) -> &[FPModule] {
        &self.stalks
    }

    /// Comparison matrix for `x ≤ y`.
    pub fn comp(&self, x: usize, y: usize) -> &IntMatrix {
        self.comp[x * self.site.len() + y]
            .as_ref()
            .expect("comparison map is only defined for x <= y")
    }

    pub fn hasse_maps(&self) -> Vec<((usize, usize), IntMatrix)> {
        self.site
            .hasse_edges()
            .into_iter()
            .map(|(x, y)| ((x, y), self.comp(x, y).clone()))
            .collect()
    }

    /// Whether every stalk is zero.
    pub fn is_zero(&self) -> bool {
        self.stalks.iter().all(|m| m.is_trivial())
    }

    /// `Γ(U, F)`: the kernel of `⊕_{x∈U} F_x → ⊕_{x⋖y in U} F_y`,
    /// `s ↦ comp(x≤y)(s_x) − s_y`.
    pub fn sections(&self, u: Open) -> Sections {
        let points: Vec<usize> = u.points().iter().collect();
        let mut offsets = Vec::with_capacity(points.len());
        let mut total = 0;
        for &x in &points {
            offsets.push(total);
            total += self.stalks[x].gens();
        }
        let pos = |x: usize| points.iter().position(|&p| p == x).unwrap();
        let ambient = FPModule::direct_sum(
            &points.iter().map(|&x| &self.stalks[x]).collect::<Vec<_>>(),
            self.ring,
        );
        let edges: Vec<(usize, usize)> = self
            .site
            .hasse_edges()
            .into_iter()
            .filter(|&(x, y)| u.contains(x) && u.contains(y))
            .collect();
        let tgt = FPModule::direct_sum(
            &edges.iter().map(|&(_, y)| &self.stalks[y]).collect::<Vec<_>>(),
            self.ring,
        );
        let mut d = IntMatrix::zeros(tgt.gens(), total);
        let mut row = 0;
        for &(x, y) in &edges {
            d.put(row, offsets[pos(x)], self.comp(x, y));
            d.put(row, offsets[pos(y)], &IntMatrix::identity(self.stalks[y].gens()).scale(-1));
            row += self.stalks[y].gens();
        }
        let Sub { module, incl } = kernel_of(&ambient, &tgt, &d);
        Sections {
            open: u,
            module,
            incl,
            ambient,
            points,
            offsets,
        }
    }

    pub fn global_sections(&self) -> Sections {
        self.sections(self.site.whole())
    }

    /// Projection of ambient tuples over `U` to those over `V ⊆ U`.
    fn projection(&self, su: &Sections, sv: &Sections) -> IntMatrix {
        let mut p = IntMatrix::zeros(sv.ambient.gens(), su.ambient.gens());
        for (j, &x) in sv.points.iter().enumerate() {
            let i = su.points.iter().position(|&q| q == x).expect("V ⊆ U");
            p.put(
                sv.offsets[j],
                su.offsets[i],
                &IntMatrix::identity(self.stalks[x].gens()),
            );
        }
        p
    }

    /// Restriction `Γ(U) → Γ(V)` in the normalized coordinates of both.
    pub fn restriction(&self, su: &Sections, sv: &Sections) -> Result<IntMatrix> {
        if !sv.open.is_subset(su.open) {
            return Err(Error::NotContained(
                self.site.fmt_set(sv.open.points()),
                self.site.fmt_set(su.open.points()),
            ));
        }
        let img = self.projection(su, sv).mul(&su.incl);
        let cols: Vec<Vec<i64>> = (0..img.cols())
            .map(|j| {
                sv.coordinates(&img.col(j))
                    .expect("restriction of a section is a section")
            })
            .collect();
        Ok(IntMatrix::from_cols(&cols, sv.module.gens()))
    }

    /// `None` if `Γ(U) → Γ(V)` is onto; otherwise a section over `V` (as an
    /// ambient tuple) outside the image.
    pub fn restriction_gap(&self, su: &Sections, sv: &Sections) -> Option<Vec<i64>> {
        let img = self.projection(su, sv).mul(&su.incl);
        (0..sv.incl.cols())
            .map(|j| sv.incl.col(j))
            .find(|g| preimage(&sv.ambient, &img, g).is_none())
    }

    pub fn fmt_tuple(&self, s: &Sections, t: &[i64]) -> String {
        let parts: Vec<String> = s
            .points
            .iter()
            .map(|&x| format!("{}:{:?}", self.site.name(x), s.at(t, x)))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// `(f⋆F)_q = Γ(f⁻¹(U_q), F)`.
    pub fn pushforward(&self, f: &MonotoneMap) -> Result<ModSheaf> {
        if f.source() != &self.site {
            return Err(Error::Shape("sheaf does not live on the source of the map".into()));
        }
        let tgt = f.target();
        let m = tgt.len();
        let secs: Vec<Sections> = (0..m)
            .map(|q| self.sections(f.preimage(tgt.minimal_open(q))))
            .collect();
        let mut comp = vec![None; m * m];
        for (q, r) in tgt.relation_pairs() {
            comp[q * m + r] = Some(self.restriction(&secs[q], &secs[r])?);
        }
        Ok(ModSheaf {
            site: tgt.clone(),
            ring: self.ring,
            stalks: secs.into_iter().map(|s| s.module).collect(),
            comp,
        })
    }

    /// `(f*G)_p = G_{f(p)}`.
    pub fn pullback(&self, f: &MonotoneMap) -> Result<ModSheaf> {
        if f.target() != &self.site {
            return Err(Error::Shape("sheaf does not live on the target of the map".into()));
        }
        let src = f.source();
        let n = src.len();
        let mut comp = vec![None; n * n];
        for (p, q) in src.relation_pairs() {
            comp[p * n + q] = Some(self.comp(f.apply(p), f.apply(q)).clone());
        }
        Ok(ModSheaf {
            site: src.clone(),
            ring: self.ring,
            stalks: (0..n).map(|p| self.stalks[f.apply(p)].clone()).collect(),
            comp,
        })
    }

    /// Restriction to the open subspace `U`, reindexed; also returns the
    /// old index of each new point.
    pub fn restrict_to_open(&self, u: Open) -> (ModSheaf, Vec<usize>) {
        let (sub, pts) = self.site.subposet(u.points());
        let n = pts.len();
        let mut comp = vec![None; n * n];
        for (i, j) in sub.relation_pairs() {
            comp[i * n + j] = Some(self.comp(pts[i], pts[j]).clone());
        }
        (
            ModSheaf {
                site: sub,
                ring: self.ring,
                stalks: pts.iter().map(|&x| self.stalks[x].clone()).collect(),
                comp,
            },
            pts,
        )
    }

    /// Element tables for finite stalks; fails over `ℤ` unless every stalk
    /// is torsion.
    pub fn element_table(&self) -> Result<ElementTable> {
        let mut norm = Vec::new();
        let mut elems = Vec::new();
        let mut index = Vec::new();
        for (x, m) in self.stalks.iter().enumerate() {
            let nm = m.normalize();
            let es = nm.module.finite_elements().ok_or_else(|| {
                Error::Unsupported(format!("stalk at {} is infinite", self.site.name(x)))
            })?;
            if es.len() > 1 << 16 {
                return Err(Error::TooLarge(format!(
                    "stalk at {} has {} elements",
                    self.site.name(x),
                    es.len()
                )));
            }
            index.push(
                es.iter()
                    .enumerate()
                    .map(|(i, e)| (e.clone(), i as u32))
                    .collect(),
            );
            elems.push(es);
            norm.push(nm);
        }
        Ok(ElementTable { norm, elems, index })
    }

    /// The underlying sheaf of sets (finite stalks only), with the element
    /// table used to label it.
    pub fn underlying_set_sheaf(&self) -> Result<(SetSheaf, ElementTable)> {
        let t = self.element_table()?;
        let n = self.site.len();
        let labels = t
            .elems
            .iter()
            .map(|es| es.iter().map(|e| format!("{e:?}")).collect())
            .collect();
        let mut comp = vec![Vec::new(); n * n];
        for (x, y) in self.site.relation_pairs() {
            let c = self.comp(x, y);
            comp[x * n + y] = (0..t.elems[x].len() as u32)
                .map(|i| t.index_of(y, &c.mul_vec(&t.coords(x, i))))
                .collect();
        }
        Ok((SetSheaf::from_parts_unchecked(self.site.clone(), labels, comp), t))
    }

    /// Subsheaf generated stalkwise by the columns of `gens[x]`; fails if
    /// the family is not closed under the comparison maps.
    pub fn subsheaf(&self, gens: &[IntMatrix]) -> Result<(ModSheaf, super::ModMorphism)> {
        let n = self.site.len();
        let subs: Vec<Sub> = (0..n).map(|x| image_of(&self.stalks[x], &gens[x])).collect();
        let mut comp = vec![None; n * n];
        for (x, y) in self.site.relation_pairs() {
            let img = self.comp(x, y).mul(&subs[x].incl);
            let mut cols = Vec::with_capacity(img.cols());
            for j in 0..img.cols() {
                let c = preimage(&self.stalks[y], &subs[y].incl, &img.col(j)).ok_or_else(|| {
                    Error::Input(format!(
                        "family is not closed under {}<={}",
                        self.site.name(x),
                        self.site.name(y)
                    ))
                })?;
                cols.push(c);
            }
            comp[x * n + y] = Some(IntMatrix::from_cols(&cols, subs[y].module.gens()));
        }
        let sub = ModSheaf {
            site: self.site.clone(),
            ring: self.ring,
            stalks: subs.iter().map(|s| s.module.clone()).collect(),
            comp,
        };
        let incl = super::ModMorphism::new(sub.clone(), self.clone(), subs.into_iter().map(|s| s.incl).collect())?;
        Ok((sub, incl))
    }
}

impl std::fmt::Debug for ModSheaf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let maps: Vec<String> = self
            .hasse_maps()
            .into_iter()
            .map(|((x, y), m)| format!("{}<={}: {:?}", self.site.name(x), self.site.name(y), m.to_rows()))
            .collect();
        f.debug_struct("ModSheaf")
            .field("site", &self.site)
            .field("ring", &self.ring)
            .field("stalks", &self.stalks)
            .field("maps", &maps)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudocircle() -> FinPoset {
        FinPoset::new(
            &["x", "y", "a", "b"],
            &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")],
        )
        .unwrap()
    }

    #[test]
    fn constant_z_on_pseudocircle() {
        let pc = pseudocircle();
        let z = ModSheaf::constant(&pc, &FPModule::free(Ring::Integers, 1));
        let g = z.global_sections();
        assert_eq!(g.module.invariant_factors().to_string(), "Z");
        let ab = pc.open_by_names(&["a", "b"]).unwrap();
        let s = z.sections(ab);
        assert_eq!(s.module.invariant_factors().to_string(), "Z^2");
        // restriction is the diagonal Z → Z²
        let r = z.restriction(&g, &s).unwrap();
        let t = s.realize(&r.col(0));
        assert_eq!(t[0].abs(), 1);
        assert_eq!(t[0], t[1]);
        assert!(z.restriction_gap(&g, &s).is_some());
        let empty = z.sections(pc.empty_open());
        assert_eq!(empty.module.gens(), 0);
    }

    #[test]
    fn skyscraper_sections() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let k = ModSheaf::skyscraper(&s, 0, &FPModule::free(Ring::Mod(2), 1)).unwrap();
        assert_eq!(k.stalk(1).gens(), 0);
        assert_eq!(k.global_sections().module.gens(), 1);
        let p1 = s.minimal_open(1);
        assert_eq!(k.sections(p1).module.gens(), 0);
    }

    #[test]
    fn ill_defined_map_rejected() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        // Z/2 → Z by 1 is not well defined
        let r = ModSheaf::from_named(
            s,
            Ring::Integers,
            vec![FPModule::cyclic(Ring::Integers, 2), FPModule::free(Ring::Integers, 1)],
            &[("p0", "p1", vec![vec![1]])],
        );
        assert!(matches!(r, Err(Error::IllDefinedMap(_))));
    }

    #[test]
    fn pushforward_to_point() {
        let pc = pseudocircle();
        let z = ModSheaf::constant(&pc, &FPModule::free(Ring::Integers, 1));
        let f = MonotoneMap::to_point(&pc);
        let g = z.pushforward(&f).unwrap();
        assert_eq!(g.stalk(0).invariant_factors().to_string(), "Z");
    }

    #[test]
    fn underlying_set_sheaf_of_constant_z2() {
        let pc = pseudocircle();
        let m = ModSheaf::constant(&pc, &FPModule::free(Ring::Mod(2), 1));
        let (s, _) = m.underlying_set_sheaf().unwrap();
        assert_eq!(s.sizes(), vec![2; 4]);
        assert_eq!(s.global_sections().len(), 2);
    }
}
