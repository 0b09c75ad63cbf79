//! Sheaves of finite-dimensional `ℤ/p`-vector spaces in coordinates: a
//! dimension per point and a matrix per Hasse edge. Used for Hom spaces,
//! subsheaf enumeration and enumeration up to isomorphism.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::homalg::linalg::{kernel, rank_mod_p, rref_mod_p, solve};
use crate::homalg::{FPModule, IntMatrix, Ring};
use crate::site::{FinPoset, PointSet};

use super::{ModMorphism, ModSheaf};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectSheaf {
    site: FinPoset,
    p: i64,
    dims: Vec<usize>,
    edges: Vec<(usize, usize)>,
    /// One `dims[y] × dims[x]` matrix per Hasse edge `x ⋖ y`.
    maps: Vec<IntMatrix>,
}

/// A subsheaf `A ⊆ B` with its inclusion components.
#[derive(Clone, Debug)]
pub struct VectMono {
    pub sub: VectSheaf,
    pub ambient: VectSheaf,
    /// `dims_B[x] × dims_A[x]` basis of `A_x` inside `B_x`.
    pub incl: Vec<IntMatrix>,
}

/// `Hom(A|_U, B|_U)` as a subspace of the product of all matrix spaces.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub points: Vec<usize>,
    pub offsets: Vec<usize>,
    pub nvars: usize,
    /// `nvars × dim`; the columns are a basis.
    pub basis: IntMatrix,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    fn offset(&self, x: usize) -> usize {
        self.offsets[self.points.iter().position(|&q| q == x).expect("point of U")]
    }
}

impl VectSheaf {
    pub fn new(site: FinPoset, p: u32, dims: Vec<usize>, maps: Vec<IntMatrix>) -> Result<VectSheaf> {
        let edges = site.hasse_edges();
        if dims.len() != site.len() || maps.len() != edges.len() {
            return Err(Error::Shape("one dimension per point and one matrix per Hasse edge".into()));
        }
        let p = p as i64;
        for (&(x, y), m) in edges.iter().zip(&maps) {
            if m.rows() != dims[y] || m.cols() != dims[x] {
                return Err(Error::Shape(format!("map {}<={}", site.name(x), site.name(y))));
            }
        }
        let v = VectSheaf {
            site,
            p,
            dims,
            edges,
            maps: maps.iter().map(|m| m.reduce_mod(p)).collect(),
        };
        if !v.is_functorial() {
            return Err(Error::NotFunctorial("diamond".into(), "does not commute".into()));
        }
        Ok(v)
    }

    pub fn from_mod(f: &ModSheaf) -> Result<VectSheaf> {
        let p = f
            .ring()
            .field_prime()
            .ok_or_else(|| Error::Unsupported(format!("{} is not a prime field", f.ring())))?;
        let site = f.site().clone();
        let norm: Vec<_> = f.stalks().iter().map(|m| m.normalize()).collect();
        let edges = site.hasse_edges();
        let maps = edges
            .iter()
            .map(|&(x, y)| norm[y].to_new.mul(f.comp(x, y)).mul(&norm[x].to_old).reduce_mod(p))
            .collect();
        Ok(VectSheaf {
            dims: norm.iter().map(|n| n.module.gens()).collect(),
            site,
            p,
            edges,
            maps,
        })
    }

    pub fn to_mod(&self) -> ModSheaf {
        let ring = self.ring();
        let stalks = self.dims.iter().map(|&d| FPModule::free(ring, d)).collect();
        let maps: HashMap<_, _> = self.edges.iter().copied().zip(self.maps.iter().cloned()).collect();
        ModSheaf::new(self.site.clone(), ring, stalks, &maps).expect("functorial by construction")
    }

    pub fn mono_to_mod(m: &VectMono) -> Result<ModMorphism> {
        ModMorphism::new(m.sub.to_mod(), m.ambient.to_mod(), m.incl.clone())
    }

    pub fn site(&self) -> &FinPoset {
        &self.site
    }

    pub fn prime(&self) -> i64 {
        self.p
    }

    pub fn ring(&self) -> Ring {
        Ring::Mod(self.p as u32)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn maps(&self) -> &[IntMatrix] {
        &self.maps
    }

    /// The composite `x ≤ y`, or `None` if `x ≰ y`.
    pub fn comp(&self, x: usize, y: usize) -> Option<IntMatrix> {
        if !self.site.le(x, y) {
            return None;
        }
        let mut out: HashMap<usize, IntMatrix> = HashMap::new();
        out.insert(x, IntMatrix::identity(self.dims[x]));
        for &z in self.site.topological_order() {
            if z == x || !self.site.le(x, z) || !self.site.le(z, y) {
                continue;
            }
            let (k, &(w, _)) = self
                .edges
                .iter()
                .enumerate()
                .find(|(_, &(w, t))| t == z && out.contains_key(&w))
                .expect("some edge into z from above x");
            let m = self.maps[k].mul(&out[&w]).reduce_mod(self.p);
            out.insert(z, m);
        }
        out.remove(&y)
    }

    fn is_functorial(&self) -> bool {
        let n = self.site.len();
        for x in 0..n {
            // composites from x along every path must agree
            let mut known: HashMap<usize, IntMatrix> = HashMap::new();
            known.insert(x, IntMatrix::identity(self.dims[x]));
            for &z in self.site.topological_order() {
                if z == x || !self.site.le(x, z) {
                    continue;
                }
                let mut val: Option<IntMatrix> = None;
                for (k, &(w, t)) in self.edges.iter().enumerate() {
                    if t != z || !known.contains_key(&w) {
                        continue;
                    }
                    let m = self.maps[k].mul(&known[&w]).reduce_mod(self.p);
                    match &val {
                        None => val = Some(m),
                        Some(v) if *v != m => return false,
                        _ => {}
                    }
                }
                known.insert(z, val.expect("an edge into z"));
            }
        }
        true
    }

    /// A flat key for hashing: dims then edge matrices.
    pub fn key(&self) -> Vec<u8> {
        let mut k: Vec<u8> = self.dims.iter().map(|&d| d as u8).collect();
        for m in &self.maps {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    k.push(m.get(i, j) as u8);
                }
            }
        }
        k
    }

    /// `Hom(self|_U, other|_U)`: families `φ_x : self_x → other_x`, `x ∈ U`,
    /// natural along the Hasse edges inside `U`.
    pub fn hom_space(&self, other: &VectSheaf, u: PointSet) -> HomSpace {
        let points: Vec<usize> = u.iter().collect();
        let mut offsets = Vec::with_capacity(points.len());
        let mut nvars = 0;
        for &x in &points {
            offsets.push(nvars);
            nvars += self.dims[x] * other.dims[x];
        }
        let off = |x: usize| offsets[points.iter().position(|&q| q == x).unwrap()];
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for (k, &(x, y)) in self.edges.iter().enumerate() {
            if !u.contains(x) || !u.contains(y) {
                continue;
            }
            let (a, b) = (&self.maps[k], &other.maps[k]);
            let (ax, ay, bx) = (self.dims[x], self.dims[y], other.dims[x]);
            // (B φ_x − φ_y A)[i][j] = 0
            for i in 0..other.dims[y] {
                for j in 0..ax {
                    let mut row = vec![0i64; nvars];
                    for r in 0..bx {
                        row[off(x) + r * ax + j] += b.get(i, r);
                    }
                    for c in 0..ay {
                        row[off(y) + i * ay + c] -= a.get(c, j);
                    }
                    rows.push(row);
                }
            }
        }
        let basis = if rows.is_empty() {
            IntMatrix::identity(nvars)
        } else {
            kernel(self.ring(), &IntMatrix::from_rows(&rows, nvars))
        };
        HomSpace {
            points,
            offsets,
            nvars,
            basis,
        }
    }

    /// Components of a Hom-space vector, as matrices `self_x → other_x`.
    pub fn hom_components(&self, other: &VectSheaf, h: &HomSpace, v: &[i64]) -> Vec<IntMatrix> {
        (0..self.site.len())
            .map(|x| {
                let mut m = IntMatrix::zeros(other.dims[x], self.dims[x]);
                if h.points.contains(&x) {
                    let o = h.offset(x);
                    for r in 0..other.dims[x] {
                        for c in 0..self.dims[x] {
                            m.set(r, c, v[o + r * self.dims[x] + c].rem_euclid(self.p));
                        }
                    }
                }
                m
            })
            .collect()
    }

    /// Restriction `Hom(B|_U, I|_U) → Hom(A|_U, I|_U)` along a mono,
    /// as a matrix on the ambient variable spaces.
    fn precompose_matrix(mono: &VectMono, target: &VectSheaf, hb: &HomSpace, ha: &HomSpace) -> IntMatrix {
        let (a, b) = (&mono.sub, &mono.ambient);
        let mut r = IntMatrix::zeros(ha.nvars, hb.nvars);
        for &x in &ha.points {
            let (oa, ob) = (ha.offset(x), hb.offset(x));
            let (da, db) = (a.dims[x], b.dims[x]);
            let i = &mono.incl[x];
            // (φ i)[row][j] = Σ_c φ[row][c] i[c][j]
            for row in 0..target.dims[x] {
                for j in 0..da {
                    for c in 0..db {
                        let v = i.get(c, j);
                        if v != 0 {
                            r.set(oa + row * da + j, ob + row * db + c, v);
                        }
                    }
                }
            }
        }
        r
    }

    /// Whether every `A|_U → I|_U` extends along the mono to `B|_U → I|_U`.
    pub fn extends_over(mono: &VectMono, target: &VectSheaf, u: PointSet) -> bool {
        let ha = mono.sub.hom_space(target, u);
        if ha.dim() == 0 {
            return true;
        }
        let hb = mono.ambient.hom_space(target, u);
        let r = Self::precompose_matrix(mono, target, &hb, &ha);
        rank_mod_p(&r.mul(&hb.basis), target.p) == ha.dim()
    }

    /// The internal hom `[self, other]`: stalk at `x` is
    /// `Hom(self|_{U_x}, other|_{U_x})`, comparison maps restrict.
    pub fn internal_hom(&self, other: &VectSheaf) -> VectSheaf {
        let n = self.site.len();
        let spaces: Vec<HomSpace> = (0..n)
            .map(|x| self.hom_space(other, self.site.minimal_open(x).points()))
            .collect();
        let maps = self
            .edges
            .iter()
            .map(|&(x, y)| {
                let (hx, hy) = (&spaces[x], &spaces[y]);
                let mut proj = IntMatrix::zeros(hy.nvars, hx.nvars);
                for &z in &hy.points {
                    let w = self.dims[z] * other.dims[z];
                    for t in 0..w {
                        proj.set(hy.offset(z) + t, hx.offset(z) + t, 1);
                    }
                }
                let img = proj.mul(&hx.basis);
                let cols: Vec<Vec<i64>> = (0..img.cols())
                    .map(|j| solve(self.ring(), &hy.basis, &img.col(j)).expect("restriction of a natural family"))
                    .collect();
                IntMatrix::from_cols(&cols, hy.dim())
            })
            .collect();
        VectSheaf {
            site: self.site.clone(),
            p: self.p,
            dims: spaces.iter().map(|h| h.dim()).collect(),
            edges: self.edges.clone(),
            maps,
        }
    }

    /// All subsheaves, as monos into `self`.
    pub fn subsheaves(&self) -> Vec<VectMono> {
        let n = self.site.len();
        let subs: Vec<Vec<IntMatrix>> = self.dims.iter().map(|&d| subspaces(d, self.p)).collect();
        let order: Vec<usize> = self.site.topological_order().to_vec();
        let mut out = Vec::new();
        let mut cur: Vec<Option<usize>> = vec![None; n];
        self.subsheaves_rec(&order, 0, &subs, &mut cur, &mut out);
        out
    }

    fn subsheaves_rec(
        &self,
        order: &[usize],
        k: usize,
        subs: &[Vec<IntMatrix>],
        cur: &mut Vec<Option<usize>>,
        out: &mut Vec<VectMono>,
    ) {
        if k == order.len() {
            out.push(self.make_mono(cur.iter().enumerate().map(|(x, c)| subs[x][c.unwrap()].clone()).collect()));
            return;
        }
        let y = order[k];
        'cand: for (ci, s) in subs[y].iter().enumerate() {
            let ry = s.cols();
            for (e, &(x, t)) in self.edges.iter().enumerate() {
                if t != y {
                    continue;
                }
                let Some(cx) = cur[x] else { continue };
                let img = self.maps[e].mul(&subs[x][cx]);
                if rank_mod_p(&s.hstack(&img), self.p) != ry {
                    continue 'cand;
                }
            }
            cur[y] = Some(ci);
            self.subsheaves_rec(order, k + 1, subs, cur, out);
            cur[y] = None;
        }
    }

    fn make_mono(&self, incl: Vec<IntMatrix>) -> VectMono {
        let ring = self.ring();
        let maps = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(x, y))| {
                let img = self.maps[e].mul(&incl[x]);
                let cols: Vec<Vec<i64>> = (0..img.cols())
                    .map(|j| solve(ring, &incl[y], &img.col(j)).expect("closed subspace"))
                    .collect();
                IntMatrix::from_cols(&cols, incl[y].cols())
            })
            .collect();
        let sub = VectSheaf {
            site: self.site.clone(),
            p: self.p,
            dims: incl.iter().map(|m| m.cols()).collect(),
            edges: self.edges.clone(),
            maps,
        };
        VectMono {
            sub,
            ambient: self.clone(),
            incl,
        }
    }

    /// Every sheaf with the given stalk dimensions, up to isomorphism.
    pub fn enumerate_dims(site: &FinPoset, p: u32, dims: &[usize]) -> Vec<VectSheaf> {
        let edges = site.hasse_edges();
        let pi = p as i64;
        let sizes: Vec<usize> = edges.iter().map(|&(x, y)| dims[x] * dims[y]).collect();
        let total: usize = sizes.iter().sum();
        let count = (pi as u64).checked_pow(total as u32).expect("enumeration too large");
        let gens: Vec<Vec<IntMatrix>> = dims.iter().map(|&d| gl_generators(d, pi)).collect();
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let mut out = Vec::new();
        for code in 0..count {
            let mut c = code;
            let maps: Vec<IntMatrix> = edges
                .iter()
                .map(|&(x, y)| {
                    let mut m = IntMatrix::zeros(dims[y], dims[x]);
                    for i in 0..dims[y] {
                        for j in 0..dims[x] {
                            m.set(i, j, (c % pi as u64) as i64);
                            c /= pi as u64;
                        }
                    }
                    m
                })
                .collect();
            let v = VectSheaf {
                site: site.clone(),
                p: pi,
                dims: dims.to_vec(),
                edges: edges.clone(),
                maps,
            };
            if seen.contains(&v.key()) || !v.is_functorial() {
                continue;
            }
            // orbit under ∏ GL(dims[x]) acting by m_{xy} ↦ g_y m g_x⁻¹
            let mut queue = vec![v.clone()];
            seen.insert(v.key());
            while let Some(w) = queue.pop() {
                for (x, gs) in gens.iter().enumerate() {
                    let half = gs.len() / 2;
                    for k in 0..half {
                        let (g, inv) = (&gs[k], &gs[half + k]);
                        let mut u = w.clone();
                        for (e, &(s, t)) in edges.iter().enumerate() {
                            if t == x {
                                u.maps[e] = g.mul(&u.maps[e]).reduce_mod(pi);
                            }
                            if s == x {
                                u.maps[e] = u.maps[e].mul(inv).reduce_mod(pi);
                            }
                        }
                        if seen.insert(u.key()) {
                            queue.push(u);
                        }
                    }
                }
            }
            out.push(v);
        }
        out
    }

    /// Every sheaf with stalk dimensions at most `d`, up to isomorphism.
    pub fn enumerate(site: &FinPoset, p: u32, d: usize) -> Vec<VectSheaf> {
        let n = site.len();
        let mut out = Vec::new();
        let mut dims = vec![0usize; n];
        loop {
            out.extend(Self::enumerate_dims(site, p, &dims));
            let mut i = 0;
            while i < n && dims[i] == d {
                dims[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            dims[i] += 1;
        }
        out
    }
}

/// Generators of `GL_d(ℤ/p)` followed by their inverses.
fn gl_generators(d: usize, p: i64) -> Vec<IntMatrix> {
    if d == 0 {
        return Vec::new();
    }
    let r = primitive_root(p);
    let rinv = crate::homalg::linalg::inv_mod(r, p);
    let mut gens = Vec::new();
    let mut invs = Vec::new();
    let mut dg = IntMatrix::identity(d);
    dg.set(0, 0, r);
    let mut di = IntMatrix::identity(d);
    di.set(0, 0, rinv);
    gens.push(dg);
    invs.push(di);
    if d >= 2 {
        let mut e = IntMatrix::identity(d);
        e.set(0, 1, 1);
        let mut ei = IntMatrix::identity(d);
        ei.set(0, 1, p - 1);
        gens.push(e);
        invs.push(ei);
        // cyclic shift of coordinates and the transposition (0 1)
        let mut c = IntMatrix::zeros(d, d);
        for i in 0..d {
            c.set((i + 1) % d, i, 1);
        }
        gens.push(c.clone());
        invs.push(c.transpose());
        let mut t = IntMatrix::identity(d);
        t.set(0, 0, 0);
        t.set(1, 1, 0);
        t.set(0, 1, 1);
        t.set(1, 0, 1);
        gens.push(t.clone());
        invs.push(t);
    }
    gens.extend(invs);
    gens
}

fn primitive_root(p: i64) -> i64 {
    (1..p.max(2))
        .find(|&g| {
            let mut x = 1;
            (1..p - 1).all(|_| {
                x = x * g % p;
                x != 1
            })
        })
        .unwrap_or(1)
}

/// All subspaces of `(ℤ/p)^d`, each as a `d × k` matrix whose columns are
/// the rows of its reduced echelon basis.
pub fn subspaces(d: usize, p: i64) -> Vec<IntMatrix> {
    let mut seen: HashSet<Vec<Vec<i64>>> = HashSet::new();
    let mut out = Vec::new();
    let nvec = (p as u64).pow(d as u32);
    let vec_of = |mut c: u64| -> Vec<i64> {
        (0..d)
            .map(|_| {
                let v = (c % p as u64) as i64;
                c /= p as u64;
                v
            })
            .collect()
    };
    // spans of up to d vectors
    let mut frontier: Vec<Vec<Vec<i64>>> = vec![Vec::new()];
    for _ in 0..=d {
        let mut next = Vec::new();
        for basis in frontier {
            let m = IntMatrix::from_rows(&basis, d);
            let (rows, _) = rref_mod_p(&m, p);
            if !seen.insert(rows.clone()) {
                continue;
            }
            out.push(IntMatrix::from_cols(&rows, d));
            for c in 0..nvec {
                let mut b = rows.clone();
                b.push(vec_of(c));
                next.push(b);
            }
        }
        frontier = next;
    }
    out.sort_by_key(|m| m.cols());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sierpinski() -> FinPoset {
        FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap()
    }

    #[test]
    fn subspace_counts() {
        // Gaussian binomials: F_2^2 has 1 + 3 + 1, F_3^2 has 1 + 4 + 1
        assert_eq!(subspaces(2, 2).len(), 5);
        assert_eq!(subspaces(2, 3).len(), 6);
        assert_eq!(subspaces(3, 2).len(), 1 + 7 + 7 + 1);
        assert_eq!(subspaces(0, 3).len(), 1);
    }

    #[test]
    fn iso_classes_on_sierpinski() {
        // representations of A_2 with dims (1,1): zero map or iso
        let s = sierpinski();
        assert_eq!(VectSheaf::enumerate_dims(&s, 3, &[1, 1]).len(), 2);
        // dims (2,2): rank 0, 1, 2
        assert_eq!(VectSheaf::enumerate_dims(&s, 2, &[2, 2]).len(), 3);
        assert_eq!(VectSheaf::enumerate_dims(&s, 3, &[2, 1]).len(), 2);
    }

    #[test]
    fn hom_and_extension() {
        let s = sierpinski();
        // simple at p1 and the projective cover of the simple at p0
        let sp1 = VectSheaf::new(s.clone(), 2, vec![0, 1], vec![IntMatrix::zeros(1, 0)]).unwrap();
        let pp0 = VectSheaf::new(s.clone(), 2, vec![1, 1], vec![IntMatrix::identity(1)]).unwrap();
        let whole = s.whole().points();
        assert_eq!(pp0.hom_space(&sp1, whole).dim(), 0);
        assert_eq!(sp1.hom_space(&pp0, whole).dim(), 1);
        // sp1 ↪ pp0 and the identity sp1 → sp1 does not extend
        let monos = pp0.subsheaves();
        assert_eq!(monos.len(), 3);
        let m = monos.iter().find(|m| m.sub.dims() == [0, 1]).unwrap();
        assert!(!VectSheaf::extends_over(m, &sp1, whole));
        assert!(VectSheaf::extends_over(m, &pp0, whole));
    }

    #[test]
    fn round_trip_through_mod() {
        let s = sierpinski();
        let v = VectSheaf::new(s, 3, vec![2, 1], vec![IntMatrix::from_rows(&[vec![1, 2]], 2)]).unwrap();
        let back = VectSheaf::from_mod(&v.to_mod()).unwrap();
        assert_eq!(back, v);
        let h = v.internal_hom(&v);
        assert_eq!(h.dims()[1], 1);
    }
}
