use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::site::{FinPoset, MonotoneMap, Open, PointSet};

/// A sheaf of finite sets on a finite poset: a stalk per point and a
/// comparison map `stalk(x) → stalk(y)` for every `x ≤ y`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SetSheaf {
    site: FinPoset,
    labels: Vec<Vec<String>>,
    /// `comp[x * n + y]` for `x ≤ y`, empty otherwise.
    comp: Vec<Vec<u32>>,
}

/// A section over an open `U`: one stalk element per point of `U`, in
/// increasing point index.
pub type Section = Vec<u32>;

impl SetSheaf {
    /// Builds a sheaf from stalk labels and maps on some pairs `x < y`.
    /// Maps on Hasse edges are required; composites are derived, and any
    /// other given pair must agree with the derived composite.
    pub fn new(
        site: FinPoset,
        labels: Vec<Vec<String>>,
        maps: &HashMap<(usize, usize), Vec<u32>>,
    ) -> Result<SetSheaf> {
        let n = site.len();
        if labels.len() != n {
            return Err(Error::Shape(format!("{} stalks for {n} points", labels.len())));
        }
        for ((x, y), f) in maps {
            if *x >= n || *y >= n || !site.le(*x, *y) {
                return Err(Error::Input(format!("map given for a pair that is not x <= y: #{x}, #{y}")));
            }
            if f.len() != labels[*x].len() || f.iter().any(|&t| t as usize >= labels[*y].len()) {
                return Err(Error::Shape(format!(
                    "map {}<={} is not a function between the stalks",
                    site.name(*x),
                    site.name(*y)
                )));
            }
        }
        let mut hasse_succ = vec![Vec::new(); n];
        for (x, y) in site.hasse_edges() {
            if !maps.contains_key(&(x, y)) {
                return Err(Error::Input(format!(
                    "missing map on edge {}<={}",
                    site.name(x),
                    site.name(y)
                )));
            }
            hasse_succ[x].push(y);
        }
        let mut comp = vec![Vec::new(); n * n];
        for x in 0..n {
            comp[x * n + x] = (0..labels[x].len() as u32).collect();
        }
        for &x in site.topological_order().iter().rev() {
            for z in site.up_of(x).iter() {
                if z == x {
                    continue;
                }
                let mut derived: Option<Vec<u32>> = None;
                for &y in &hasse_succ[x] {
                    if !site.le(y, z) {
                        continue;
                    }
                    let first = &maps[&(x, y)];
                    let rest = &comp[y * n + z];
                    let cand: Vec<u32> = first.iter().map(|&s| rest[s as usize]).collect();
                    match &derived {
                        None => derived = Some(cand),
                        Some(d) if *d != cand => {
                            return Err(Error::NotFunctorial(
                                site.name(x).to_string(),
                                site.name(z).to_string(),
                            ))
                        }
                        _ => {}
                    }
                }
                let d = derived.expect("some Hasse path from x to z");
                if let Some(given) = maps.get(&(x, z)) {
                    if *given != d {
                        return Err(Error::NotFunctorial(
                            site.name(x).to_string(),
                            site.name(z).to_string(),
                        ));
                    }
                }
                comp[x * n + z] = d;
            }
        }
        Ok(SetSheaf { site, labels, comp })
    }

    /// Stalks labelled `0, 1, …`.
    pub fn from_sizes(
        site: FinPoset,
        sizes: &[usize],
        maps: &HashMap<(usize, usize), Vec<u32>>,
    ) -> Result<SetSheaf> {
        let labels = sizes.iter().map(|&k| default_labels(k)).collect();
        Self::new(site, labels, maps)
    }

    /// Assembles a sheaf from complete comparison data; used where the
    /// data is functorial by construction.
    pub(crate) fn from_parts_unchecked(site: FinPoset, labels: Vec<Vec<String>>, comp: Vec<Vec<u32>>) -> SetSheaf {
        debug_assert_eq!(comp.len(), site.len() * site.len());
        SetSheaf { site, labels, comp }
    }

    /// Every stalk `S`, every comparison map the identity.
    pub fn constant(site: &FinPoset, labels: &[&str]) -> SetSheaf {
        let n = site.len();
        let lab: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let mut comp = vec![Vec::new(); n * n];
        for (x, y) in site.relation_pairs() {
            comp[x * n + y] = (0..lab.len() as u32).collect();
        }
        SetSheaf {
            site: site.clone(),
            labels: vec![lab; n],
            comp,
        }
    }

    pub fn terminal(site: &FinPoset) -> SetSheaf {
        Self::constant(site, &["*"])
    }

    pub fn initial(site: &FinPoset) -> SetSheaf {
        Self::constant(site, &[])
    }

    /// Stalk `S` at points below `x`, a singleton elsewhere.
    pub fn skyscraper(site: &FinPoset, x: usize, labels: &[&str]) -> Result<SetSheaf> {
        if x >= site.len() {
            return Err(Error::UnknownPoint(format!("#{x}")));
        }
        let n = site.len();
        let below = site.down_of(x);
        let lab: Vec<Vec<String>> = (0..n)
            .map(|y| {
                if below.contains(y) {
                    labels.iter().map(|s| s.to_string()).collect()
                } else {
                    vec!["*".to_string()]
                }
            })
            .collect();
        let mut comp = vec![Vec::new(); n * n];
        for (y, z) in site.relation_pairs() {
            comp[y * n + z] = if below.contains(z) {
                (0..labels.len() as u32).collect()
            } else {
                vec![0; lab[y].len()]
            };
        }
        Ok(SetSheaf {
            site: site.clone(),
            labels: lab,
            comp,
        })
    }

    /// The subobject classifier: stalk at `x` is the set of opens contained
    /// in `U_x`, and `x ≤ y` acts by `V ↦ V ∩ U_y`.
    pub fn omega(site: &FinPoset) -> Result<SetSheaf> {
        let n = site.len();
        let opens = site.all_opens()?;
        let stalk: Vec<Vec<Open>> = (0..n)
            .map(|x| {
                let ux = site.minimal_open(x);
                opens.iter().copied().filter(|v| v.is_subset(ux)).collect()
            })
            .collect();
        let labels = stalk
            .iter()
            .map(|vs| vs.iter().map(|v| site.fmt_set(v.points())).collect())
            .collect();
        let mut comp = vec![Vec::new(); n * n];
        for (x, y) in site.relation_pairs() {
            let uy = site.minimal_open(y);
            comp[x * n + y] = stalk[x]
                .iter()
                .map(|v| {
                    let w = v.intersection(uy);
                    stalk[y].iter().position(|t| *t == w).expect("V ∩ U_y is open in U_y") as u32
                })
                .collect();
        }
        Ok(SetSheaf {
            site: site.clone(),
            labels,
            comp,
        })
    }

    pub fn site(&self) -> &FinPoset {
        &self.site
    }

    pub fn size(&self, x: usize) -> usize {
        self.labels[x].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.len()).collect()
    }

    pub fn labels(&self, x: usize) -> &[String] {
        &self.labels[x]
    }

    pub fn label(&self, x: usize, s: u32) -> &str {
        &self.labels[x][s as usize]
    }

    pub fn element(&self, x: usize, label: &str) -> Result<u32> {
        self.labels[x]
            .iter()
            .position(|l| l == label)
            .map(|i| i as u32)
            .ok_or_else(|| Error::Input(format!("no element `{label}` at {}", self.site.name(x))))
    }

    /// Comparison map for `x ≤ y`.
    #[inline]
    pub fn comp(&self, x: usize, y: usize) -> &[u32] {
        debug_assert!(self.site.le(x, y));
        &self.comp[x * self.site.len() + y]
    }

    #[inline]
    pub fn apply(&self, x: usize, y: usize, s: u32) -> u32 {
        self.comp(x, y)[s as usize]
    }

    /// Maps on Hasse edges, which determine the sheaf.
    pub fn hasse_maps(&self) -> Vec<((usize, usize), Vec<u32>)> {
        self.site
            .hasse_edges()
            .into_iter()
            .map(|(x, y)| ((x, y), self.comp(x, y).to_vec()))
            .collect()
    }

    pub fn is_inhabited(&self) -> bool {
        self.labels.iter().all(|l| !l.is_empty())
    }

    /// All sections over `U` (compatible families), in lexicographic order
    /// of their values at the minimal points of `U`.
    pub fn sections(&self, u: Open) -> Vec<Section> {
        let pts: Vec<usize> = u.points().iter().collect();
        let mins: Vec<usize> = pts
            .iter()
            .copied()
            .filter(|&x| self.site.down_of(x).intersection(u.points()).len() == 1)
            .collect();
        // for every point, the minimal points of U below it
        let below: Vec<Vec<usize>> = pts
            .iter()
            .map(|&y| mins.iter().copied().filter(|&m| self.site.le(m, y)).collect())
            .collect();
        let mut out = Vec::new();
        if mins.iter().any(|&m| self.size(m) == 0) {
            return out;
        }
        let mut choice = vec![0u32; mins.len()];
        let mut val_at: HashMap<usize, u32> = HashMap::new();
        'outer: loop {
            val_at.clear();
            for (i, &m) in mins.iter().enumerate() {
                val_at.insert(m, choice[i]);
            }
            let mut sec = Vec::with_capacity(pts.len());
            let mut ok = true;
            for (k, &y) in pts.iter().enumerate() {
                let mut v = None;
                for &m in &below[k] {
                    let w = self.apply(m, y, val_at[&m]);
                    match v {
                        None => v = Some(w),
                        Some(v0) if v0 != w => {
                            ok = false;
                            break;
                        }
                        _ => {}
                    }
                }
                if !ok {
                    break;
                }
                sec.push(v.expect("every point of U is above a minimal point"));
            }
            if ok {
                out.push(sec);
            }
            // odometer, last minimal point fastest
            let mut i = mins.len();
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                choice[i] += 1;
                if (choice[i] as usize) < self.size(mins[i]) {
                    break;
                }
                choice[i] = 0;
            }
        }
        out
    }

    pub fn global_sections(&self) -> Vec<Section> {
        self.sections(self.site.whole())
    }

    /// Projects a section over `U` to `V ⊆ U`.
    pub fn restrict(&self, u: Open, v: Open, s: &[u32]) -> Result<Section> {
        if !v.is_subset(u) {
            return Err(Error::NotContained(
                self.site.fmt_set(v.points()),
                self.site.fmt_set(u.points()),
            ));
        }
        Ok(restrict_points(u.points(), v.points(), s))
    }

    /// Whether a tuple over `U` is a section.
    pub fn is_section(&self, u: Open, s: &[u32]) -> bool {
        let pts: Vec<usize> = u.points().iter().collect();
        if s.len() != pts.len() {
            return false;
        }
        for (i, &x) in pts.iter().enumerate() {
            if s[i] as usize >= self.size(x) {
                return false;
            }
            for (j, &y) in pts.iter().enumerate() {
                if self.site.le(x, y) && self.apply(x, y, s[i]) != s[j] {
                    return false;
                }
            }
        }
        true
    }

    pub fn fmt_section(&self, u: Open, s: &[u32]) -> String {
        let parts: Vec<String> = u
            .points()
            .iter()
            .zip(s)
            .map(|(x, &v)| format!("{}:{}", self.site.name(x), self.label(x, v)))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Stalkwise product.
    pub fn product(&self, other: &SetSheaf) -> Result<SetSheaf> {
        if self.site != other.site {
            return Err(Error::Shape("product of sheaves on different sites".into()));
        }
        let n = self.site.len();
        let labels = (0..n)
            .map(|x| {
                let mut l = Vec::new();
                for a in &self.labels[x] {
                    for b in &other.labels[x] {
                        l.push(format!("({a},{b})"));
                    }
                }
                l
            })
            .collect();
        let mut comp = vec![Vec::new(); n * n];
        for (x, y) in self.site.relation_pairs() {
            let (f, g) = (self.comp(x, y), other.comp(x, y));
            let ky = other.size(y) as u32;
            let mut m = Vec::with_capacity(self.size(x) * other.size(x));
            for &a in f {
                for &b in g {
                    m.push(a * ky + b);
                }
            }
            comp[x * n + y] = m;
        }
        Ok(SetSheaf {
            site: self.site.clone(),
            labels,
            comp,
        })
    }

    /// `(f⋆F)_q = F(f⁻¹(U_q))`.
    pub fn pushforward(&self, f: &MonotoneMap) -> Result<SetSheaf> {
        if f.source() != &self.site {
            return Err(Error::Shape("sheaf does not live on the source of the map".into()));
        }
        let tgt = f.target();
        let m = tgt.len();
        let opens: Vec<Open> = (0..m).map(|q| f.preimage(tgt.minimal_open(q))).collect();
        let secs: Vec<Vec<Section>> = opens.iter().map(|&u| self.sections(u)).collect();
        let index: Vec<HashMap<&Section, u32>> = secs
            .iter()
            .map(|ss| ss.iter().enumerate().map(|(i, s)| (s, i as u32)).collect())
            .collect();
        let labels = secs
            .iter()
            .zip(&opens)
            .map(|(ss, &u)| ss.iter().map(|s| self.fmt_section(u, s)).collect())
            .collect();
        let mut comp = vec![Vec::new(); m * m];
        for (q, r) in tgt.relation_pairs() {
            comp[q * m + r] = secs[q]
                .iter()
                .map(|s| {
                    let t = restrict_points(opens[q].points(), opens[r].points(), s);
                    index[r][&t]
                })
                .collect();
        }
        Ok(SetSheaf {
            site: tgt.clone(),
            labels,
            comp,
        })
    }

    /// `(f*G)_p = G_{f(p)}`.
    pub fn pullback(&self, f: &MonotoneMap) -> Result<SetSheaf> {
        if f.target() != &self.site {
            return Err(Error::Shape("sheaf does not live on the target of the map".into()));
        }
        let src = f.source();
        let n = src.len();
        let labels = (0..n).map(|p| self.labels[f.apply(p)].clone()).collect();
        let mut comp = vec![Vec::new(); n * n];
        for (p, q) in src.relation_pairs() {
            comp[p * n + q] = self.comp(f.apply(p), f.apply(q)).to_vec();
        }
        Ok(SetSheaf {
            site: src.clone(),
            labels,
            comp,
        })
    }

    /// Restriction to an open subspace, reindexed.
    pub fn restrict_to_open(&self, u: Open) -> (SetSheaf, Vec<usize>) {
        let (sub, pts) = self.site.subposet(u.points());
        let n = pts.len();
        let labels = pts.iter().map(|&x| self.labels[x].clone()).collect();
        let mut comp = vec![Vec::new(); n * n];
        for (i, j) in sub.relation_pairs() {
            comp[i * n + j] = self.comp(pts[i], pts[j]).to_vec();
        }
        (SetSheaf { site: sub, labels, comp }, pts)
    }
}

pub(crate) fn default_labels(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

/// Keeps the coordinates of `s` (indexed by the points of `u`) that lie in `v`.
pub(crate) fn restrict_points(u: PointSet, v: PointSet, s: &[u32]) -> Section {
    u.iter()
        .zip(s)
        .filter(|(x, _)| v.contains(*x))
        .map(|(_, &val)| val)
        .collect()
}

impl std::fmt::Debug for SetSheaf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let maps: Vec<String> = self
            .hasse_maps()
            .into_iter()
            .map(|((x, y), m)| format!("{}<={}: {:?}", self.site.name(x), self.site.name(y), m))
            .collect();
        f.debug_struct("SetSheaf")
            .field("site", &self.site)
            .field("stalks", &self.labels)
            .field("maps", &maps)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sierpinski() -> FinPoset {
        FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap()
    }

    fn pseudocircle() -> FinPoset {
        FinPoset::new(
            &["x", "y", "a", "b"],
            &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")],
        )
        .unwrap()
    }

    #[test]
    fn constant_sections() {
        let s = sierpinski();
        let f = SetSheaf::constant(&s, &["0", "1"]);
        assert_eq!(f.global_sections().len(), 2);
        assert_eq!(f.sections(s.empty_open()), vec![Vec::<u32>::new()]);
        let pc = pseudocircle();
        let g = SetSheaf::constant(&pc, &["0", "1"]);
        let ab = pc.open_by_names(&["a", "b"]).unwrap();
        assert_eq!(g.sections(ab).len(), 4);
        assert_eq!(g.global_sections().len(), 2);
    }

    #[test]
    fn rejects_non_functorial_diamond() {
        // r < a, b < t with the two paths disagreeing
        let p = FinPoset::new(
            &["r", "a", "b", "t"],
            &[("r", "a"), ("r", "b"), ("a", "t"), ("b", "t")],
        )
        .unwrap();
        let mut maps = HashMap::new();
        maps.insert((0, 1), vec![0, 1]);
        maps.insert((0, 2), vec![0, 1]);
        maps.insert((1, 3), vec![0, 1]);
        maps.insert((2, 3), vec![1, 0]);
        let r = SetSheaf::from_sizes(p, &[2, 2, 2, 2], &maps);
        assert!(matches!(r, Err(Error::NotFunctorial(..))));
    }

    #[test]
    fn skyscraper_stalks() {
        let s = sierpinski();
        let k = SetSheaf::skyscraper(&s, 0, &["u", "v"]).unwrap();
        assert_eq!(k.sizes(), vec![2, 1]);
        assert_eq!(k.global_sections().len(), 2);
        let k1 = SetSheaf::skyscraper(&s, 1, &["u", "v"]).unwrap();
        assert_eq!(k1.sizes(), vec![2, 2]);
    }

    #[test]
    fn omega_on_sierpinski() {
        let s = sierpinski();
        let o = SetSheaf::omega(&s).unwrap();
        // opens of U_p0 = {∅,{p1},{p0,p1}}, of U_p1 = {∅,{p1}}
        assert_eq!(o.sizes(), vec![3, 2]);
    }

    #[test]
    fn pushforward_to_point_is_global_sections() {
        let pc = pseudocircle();
        let g = SetSheaf::constant(&pc, &["0", "1", "2"]);
        let f = MonotoneMap::to_point(&pc);
        let h = g.pushforward(&f).unwrap();
        assert_eq!(h.sizes(), vec![3]);
    }

    #[test]
    fn pullback_reads_off_assignment() {
        let pc = pseudocircle();
        let s = sierpinski();
        let mut maps = HashMap::new();
        for (x, y) in pc.hasse_edges() {
            maps.insert((x, y), vec![0; [1, 2, 3, 4][x]]);
        }
        let g = SetSheaf::from_sizes(pc.clone(), &[1, 2, 3, 4], &maps).unwrap();
        let f = MonotoneMap::new(s, pc, vec![0, 2]).unwrap();
        assert_eq!(g.pullback(&f).unwrap().sizes(), vec![1, 3]);
    }
}
