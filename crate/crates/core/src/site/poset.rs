use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported poset; point sets are `u64` bitmasks.
pub const MAX_POINTS: usize = 64;

/// Default refusal bound for [`FinPoset::all_opens`].
pub const DEFAULT_OPEN_LIMIT: usize = 20;

/// A set of points of one poset, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PointSet(pub u64);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub fn singleton(x: usize) -> PointSet {
        PointSet(1 << x)
    }

    pub fn full(n: usize) -> PointSet {
        if n == 64 {
            PointSet(u64::MAX)
        } else {
            PointSet((1u64 << n) - 1)
        }
    }

    #[inline]
    pub fn contains(self, x: usize) -> bool {
        self.0 >> x & 1 == 1
    }

    pub fn insert(&mut self, x: usize) {
        self.0 |= 1 << x;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, o: PointSet) -> PointSet {
        PointSet(self.0 | o.0)
    }

    pub fn intersection(self, o: PointSet) -> PointSet {
        PointSet(self.0 & o.0)
    }

    pub fn minus(self, o: PointSet) -> PointSet {
        PointSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: PointSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A finite poset, read as a finite T0 space whose opens are the up-sets.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinPoset {
    names: Vec<String>,
    /// `up[x]` = `{y : x ≤ y}`, the minimal open neighbourhood of `x`.
    up: Vec<PointSet>,
    /// `down[x]` = `{y : y ≤ x}`.
    down: Vec<PointSet>,
    /// A linear extension: `x < y` implies `x` comes first.
    topo: Vec<usize>,
}

/// An up-set of a poset.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Open(PointSet);

impl Open {
    pub fn points(self) -> PointSet {
        self.0
    }

    pub fn contains(self, x: usize) -> bool {
        self.0.contains(x)
    }

    pub fn union(self, o: Open) -> Open {
        Open(self.0.union(o.0))
    }

    pub fn intersection(self, o: Open) -> Open {
        Open(self.0.intersection(o.0))
    }

    pub fn is_subset(self, o: Open) -> bool {
        self.0.is_subset(o.0)
    }

    pub fn is_empty(self) -> bool {
        self.0.is_empty()
    }
}

/// Open covering of `target` by `members`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Covering {
    pub target: Open,
    pub members: Vec<Open>,
}

impl FinPoset {
    /// Builds a poset from point names and generating relations `x ≤ y`.
    /// The reflexive-transitive closure is taken; cycles are rejected.
    pub fn new<S: AsRef<str>>(points: &[S], le: &[(S, S)]) -> Result<FinPoset> {
        let names: Vec<String> = points.iter().map(|s| s.as_ref().to_string()).collect();
        if names.len() > MAX_POINTS {
            return Err(Error::TooManyPoints(names.len(), MAX_POINTS));
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::DuplicatePoint(n.clone()));
            }
        }
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::UnknownPoint(s.to_string()));
        let mut pairs = Vec::with_capacity(le.len());
        for (a, b) in le {
            pairs.push((lookup(a.as_ref())?, lookup(b.as_ref())?));
        }
        Self::from_indices(names, &pairs)
    }

    /// Same as [`FinPoset::new`] with relations given by index.
    pub fn from_indices(names: Vec<String>, le: &[(usize, usize)]) -> Result<FinPoset> {
        let n = names.len();
        if n > MAX_POINTS {
            return Err(Error::TooManyPoints(n, MAX_POINTS));
        }
        let mut up: Vec<PointSet> = (0..n).map(PointSet::singleton).collect();
        for &(a, b) in le {
            if a >= n || b >= n {
                return Err(Error::UnknownPoint(format!("#{}", a.max(b))));
            }
            up[a].insert(b);
        }
        // transitive closure (Warshall)
        for k in 0..n {
            for i in 0..n {
                if up[i].contains(k) {
                    up[i] = up[i].union(up[k]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && up[i].contains(j) && up[j].contains(i) {
                    return Err(Error::NotAntisymmetric(names[i].clone(), names[j].clone()));
                }
            }
        }
        let mut down = vec![PointSet::EMPTY; n];
        for i in 0..n {
            for j in up[i].iter() {
                down[j].insert(i);
            }
        }
        let mut topo: Vec<usize> = (0..n).collect();
        topo.sort_by_key(|&x| (down[x].len(), x));
        Ok(FinPoset {
            names,
            up,
            down,
            topo,
        })
    }

    pub fn empty() -> FinPoset {
        Self::from_indices(Vec::new(), &[]).expect("empty poset is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    #[inline]
    pub fn le(&self, x: usize, y: usize) -> bool {
        self.up[x].contains(y)
    }

    pub fn up_of(&self, x: usize) -> PointSet {
        self.up[x]
    }

    pub fn down_of(&self, x: usize) -> PointSet {
        self.down[x]
    }

    pub fn all_points(&self) -> PointSet {
        PointSet::full(self.len())
    }

    /// Points in a linear extension of the order.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Covering pairs `x ⋖ y`, sorted.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.len() {
            for y in self.up[x].iter() {
                if x == y {
                    continue;
                }
                let between = self.up[x].intersection(self.down[y]);
                if between.len() == 2 {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// All pairs `x ≤ y` including `x = y`.
    pub fn relation_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.len() {
            for y in self.up[x].iter() {
                out.push((x, y));
            }
        }
        out
    }

    /// Length of the longest chain `x₀ < x₁ < … < x_k` (that is, `k`).
    pub fn height(&self) -> usize {
        let mut h = vec![0usize; self.len()];
        for &x in &self.topo {
            for y in self.down[x].iter() {
                if y != x {
                    h[x] = h[x].max(h[y] + 1);
                }
            }
        }
        h.into_iter().max().unwrap_or(0)
    }

    pub fn is_up_set(&self, s: PointSet) -> bool {
        s.iter().all(|x| self.up[x].is_subset(s))
    }

    /// Validates `s` as an open.
    pub fn open(&self, s: PointSet) -> Result<Open> {
        if !s.is_subset(self.all_points()) {
            return Err(Error::UnknownPoint(format!("{s:?}")));
        }
        if !self.is_up_set(s) {
            return Err(Error::NotOpen(self.fmt_set(s)));
        }
        Ok(Open(s))
    }

    pub fn open_by_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Open> {
        let mut s = PointSet::EMPTY;
        for n in names {
            s.insert(self.index(n.as_ref())?);
        }
        self.open(s)
    }

    /// Smallest open containing `s`.
    pub fn up_closure(&self, s: PointSet) -> Open {
        let mut out = PointSet::EMPTY;
        for x in s.iter() {
            out = out.union(self.up[x]);
        }
        Open(out)
    }

    pub fn whole(&self) -> Open {
        Open(self.all_points())
    }

    pub fn empty_open(&self) -> Open {
        Open(PointSet::EMPTY)
    }

    /// `U_x = {y : y ≥ x}`.
    pub fn minimal_open(&self, x: usize) -> Open {
        Open(self.up[x])
    }

    pub fn minimal_open_by_name(&self, name: &str) -> Result<Open> {
        Ok(self.minimal_open(self.index(name)?))
    }

    /// Every open, sorted by size and then by member bitmask. Refuses
    /// posets larger than [`DEFAULT_OPEN_LIMIT`].
    pub fn all_opens(&self) -> Result<Vec<Open>> {
        self.all_opens_bounded(DEFAULT_OPEN_LIMIT)
    }

    pub fn all_opens_bounded(&self, max_points: usize) -> Result<Vec<Open>> {
        if self.len() > max_points {
            return Err(Error::TooLarge(format!(
                "all_opens on {} points exceeds the bound of {max_points}",
                self.len()
            )));
        }
        // process points from the top down; an up-set either omits x, or
        // contains x together with everything above it
        let mut sets = vec![PointSet::EMPTY];
        for &x in self.topo.iter().rev() {
            let mut next = Vec::with_capacity(sets.len() * 2);
            for &s in &sets {
                next.push(s);
                if self.up[x].minus(PointSet::singleton(x)).is_subset(s) {
                    let mut t = s;
                    t.insert(x);
                    next.push(t);
                }
            }
            sets = next;
        }
        let mut opens: Vec<Open> = sets.into_iter().map(Open).collect();
        opens.sort_by_key(|o| (o.0.len(), o.0 .0.reverse_bits()));
        Ok(opens)
    }

    pub fn covering(&self, target: Open, members: Vec<Open>) -> Result<Covering> {
        let mut union = PointSet::EMPTY;
        for m in &members {
            if !m.is_subset(target) {
                return Err(Error::NotContained(self.fmt_set(m.0), self.fmt_set(target.0)));
            }
            union = union.union(m.0);
        }
        if union != target.0 {
            return Err(Error::Input(format!(
                "members cover {} but the target is {}",
                self.fmt_set(union),
                self.fmt_set(target.0)
            )));
        }
        Ok(Covering { target, members })
    }

    /// Covering of `U` by the minimal opens of its points.
    pub fn minimal_covering(&self, target: Open) -> Covering {
        Covering {
            target,
            members: target.0.iter().map(|x| self.minimal_open(x)).collect(),
        }
    }

    /// Induced subposet on `s`, with the map from new to old indices.
    pub fn subposet(&self, s: PointSet) -> (FinPoset, Vec<usize>) {
        let pts: Vec<usize> = s.iter().collect();
        let names = pts.iter().map(|&x| self.names[x].clone()).collect();
        let mut le = Vec::new();
        for (i, &a) in pts.iter().enumerate() {
            for (j, &b) in pts.iter().enumerate() {
                if i != j && self.le(a, b) {
                    le.push((i, j));
                }
            }
        }
        (
            FinPoset::from_indices(names, &le).expect("subposet of a poset"),
            pts,
        )
    }

    pub fn fmt_set(&self, s: PointSet) -> String {
        let names: Vec<&str> = s.iter().map(|x| self.names[x].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn set_names(&self, s: PointSet) -> Vec<String> {
        s.iter().map(|x| self.names[x].clone()).collect()
    }

    /// Generating relations on Hasse edges, by name.
    pub fn hasse_names(&self) -> Vec<(String, String)> {
        self.hasse_edges()
            .into_iter()
            .map(|(a, b)| (self.names[a].clone(), self.names[b].clone()))
            .collect()
    }
}

impl fmt::Debug for FinPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinPoset")
            .field("points", &self.names)
            .field("hasse", &self.hasse_names())
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
    fn minimal_opens() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        assert_eq!(s.set_names(s.minimal_open(0).points()), vec!["p0", "p1"]);
        let pc = pseudocircle();
        let u = pc.minimal_open_by_name("x").unwrap();
        assert_eq!(pc.set_names(u.points()), vec!["x", "a", "b"]);
        let a = pc.index("a").unwrap();
        assert_eq!(pc.minimal_open(a).points(), PointSet::singleton(a));
        assert!(pc.minimal_open_by_name("q").is_err());
    }

    #[test]
    fn opens_of_small_posets() {
        let pt = FinPoset::new(&["*"], &[]).unwrap();
        assert_eq!(pt.all_opens().unwrap().len(), 2);
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let names: Vec<Vec<String>> = s
            .all_opens()
            .unwrap()
            .iter()
            .map(|o| s.set_names(o.points()))
            .collect();
        assert_eq!(names, vec![vec![], vec!["p1".to_string()], vec!["p0".into(), "p1".into()]]);
        let ac = FinPoset::new(&["a", "b"], &[]).unwrap();
        assert_eq!(ac.all_opens().unwrap().len(), 4);
    }

    #[test]
    fn rejects_cycles_and_duplicates() {
        assert!(matches!(
            FinPoset::new(&["a", "b"], &[("a", "b"), ("b", "a")]),
            Err(Error::NotAntisymmetric(..))
        ));
        assert!(matches!(
            FinPoset::new(&["a", "a"], &[]),
            Err(Error::DuplicatePoint(_))
        ));
    }

    #[test]
    fn open_limit_is_enforced() {
        let names: Vec<String> = (0..21).map(|i| format!("p{i}")).collect();
        let chain: Vec<(usize, usize)> = (0..20).map(|i| (i, i + 1)).collect();
        let p = FinPoset::from_indices(names, &chain).unwrap();
        assert!(matches!(p.all_opens(), Err(Error::TooLarge(_))));
        assert_eq!(p.all_opens_bounded(21).unwrap().len(), 22);
    }

    #[test]
    fn coverings_must_cover() {
        let pc = pseudocircle();
        let target = pc.whole();
        let ok = pc.minimal_covering(target);
        assert!(pc.covering(target, ok.members.clone()).is_ok());
        let bad = vec![pc.minimal_open_by_name("x").unwrap()];
        assert!(pc.covering(target, bad).is_err());
    }

    #[test]
    fn height_of_pseudocircle() {
        assert_eq!(pseudocircle().height(), 1);
        assert_eq!(pseudocircle().hasse_edges().len(), 4);
    }
}
