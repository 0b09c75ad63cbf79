use std::collections::HashMap;

use crate::error::{Error, Result};

use super::poset::{FinPoset, Open, PointSet};

/// Monotone map between finite posets (a continuous map of Alexandrov
/// spaces).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneMap {
    source: FinPoset,
    target: FinPoset,
    assignment: Vec<usize>,
}

impl MonotoneMap {
    pub fn new(source: FinPoset, target: FinPoset, assignment: Vec<usize>) -> Result<MonotoneMap> {
        if assignment.len() != source.len() {
            return Err(Error::Shape(format!(
                "assignment has {} entries for {} points",
                assignment.len(),
                source.len()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&q| q >= target.len()) {
            return Err(Error::UnknownPoint(format!("#{bad}")));
        }
        for (x, y) in source.relation_pairs() {
            if !target.le(assignment[x], assignment[y]) {
                return Err(Error::NotMonotone(
                    source.name(x).to_string(),
                    source.name(y).to_string(),
                ));
            }
        }
        Ok(MonotoneMap {
            source,
            target,
            assignment,
        })
    }

    pub fn by_names(source: FinPoset, target: FinPoset, pairs: &HashMap<String, String>) -> Result<MonotoneMap> {
        let mut assignment = Vec::with_capacity(source.len());
        for x in source.names() {
            let q = pairs
                .get(x)
                .ok_or_else(|| Error::Input(format!("no image given for `{x}`")))?;
            assignment.push(target.index(q)?);
        }
        Self::new(source, target, assignment)
    }

    pub fn identity(p: &FinPoset) -> MonotoneMap {
        MonotoneMap {
            source: p.clone(),
            target: p.clone(),
            assignment: (0..p.len()).collect(),
        }
    }

    /// The unique map to the one-point space.
    pub fn to_point(p: &FinPoset) -> MonotoneMap {
        let pt = FinPoset::new(&["*"], &[]).expect("point");
        MonotoneMap {
            source: p.clone(),
            target: pt,
            assignment: vec![0; p.len()],
        }
    }

    pub fn source(&self) -> &FinPoset {
        &self.source
    }

    pub fn target(&self) -> &FinPoset {
        &self.target
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn apply(&self, x: usize) -> usize {
        self.assignment[x]
    }

    pub fn preimage_set(&self, s: PointSet) -> PointSet {
        let mut out = PointSet::EMPTY;
        for (x, &q) in self.assignment.iter().enumerate() {
            if s.contains(q) {
                out.insert(x);
            }
        }
        out
    }

    /// `f⁻¹(V)`, an open of the source.
    pub fn preimage(&self, v: Open) -> Open {
        self.source
            .open(self.preimage_set(v.points()))
            .expect("preimage of an up-set under a monotone map is an up-set")
    }

    pub fn compose(&self, g: &MonotoneMap) -> Result<MonotoneMap> {
        // g ∘ self
        if g.source != self.target {
            return Err(Error::Shape("maps are not composable".into()));
        }
        Ok(MonotoneMap {
            source: self.source.clone(),
            target: g.target.clone(),
            assignment: self.assignment.iter().map(|&q| g.assignment[q]).collect(),
        })
    }

    /// Every monotone map `source → target`, in lexicographic order of
    /// assignments.
    pub fn enumerate(source: &FinPoset, target: &FinPoset) -> Vec<MonotoneMap> {
        let n = source.len();
        let mut out = Vec::new();
        let order = source.topological_order().to_vec();
        let mut assignment = vec![usize::MAX; n];
        fn go(
            k: usize,
            order: &[usize],
            source: &FinPoset,
            target: &FinPoset,
            assignment: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if k == order.len() {
                out.push(assignment.clone());
                return;
            }
            let x = order[k];
            for q in 0..target.len() {
                let ok = source
                    .down_of(x)
                    .iter()
                    .filter(|&y| y != x)
                    .all(|y| target.le(assignment[y], q));
                if ok {
                    assignment[x] = q;
                    go(k + 1, order, source, target, assignment, out);
                }
            }
            assignment[x] = usize::MAX;
        }
        let mut raw = Vec::new();
        go(0, &order, source, target, &mut assignment, &mut raw);
        raw.sort();
        for a in raw {
            out.push(MonotoneMap {
                source: source.clone(),
                target: target.clone(),
                assignment: a,
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preimages_of_opens_are_open() {
        let pc = FinPoset::new(
            &["x", "y", "a", "b"],
            &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")],
        )
        .unwrap();
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let maps = MonotoneMap::enumerate(&pc, &s);
        assert!(!maps.is_empty());
        for f in &maps {
            for v in s.all_opens().unwrap() {
                assert!(pc.is_up_set(f.preimage_set(v.points())));
            }
        }
    }

    #[test]
    fn rejects_non_monotone() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        assert!(matches!(
            MonotoneMap::new(s.clone(), s, vec![1, 0]),
            Err(Error::NotMonotone(..))
        ));
    }

    #[test]
    fn counts_maps_between_chains() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        // monotone self-maps of a 2-chain: 00, 01, 11
        assert_eq!(MonotoneMap::enumerate(&s, &s).len(), 3);
    }
}
