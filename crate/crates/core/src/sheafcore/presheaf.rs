use std::sync::Arc;

use crate::error::{Error, Result};
use crate::site::FinCategory;

use super::set_sheaf::{default_labels, SetSheaf};

/// A presheaf of finite sets on a finite category. An arrow `f : d → c`
/// acts as `X(c) → X(d)`, written `x·f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    cat: Arc<FinCategory>,
    labels: Vec<Vec<String>>,
    /// `action[f][x] = x·f`.
    action: Vec<Vec<u32>>,
}

impl Presheaf {
    /// Checks `x·id = x` and `x·(g∘f) = (x·g)·f`.
    pub fn new(cat: Arc<FinCategory>, labels: Vec<Vec<String>>, action: Vec<Vec<u32>>) -> Result<Presheaf> {
        if labels.len() != cat.num_objects() || action.len() != cat.num_arrows() {
            return Err(Error::Shape("one value per object and one action per arrow".into()));
        }
        for (f, a) in cat.arrows().iter().enumerate() {
            let act = &action[f];
            if act.len() != labels[a.dst].len() || act.iter().any(|&v| v as usize >= labels[a.src].len()) {
                return Err(Error::Shape(format!("action of {} is not a function", a.name)));
            }
        }
        for c in 0..cat.num_objects() {
            let id = cat.identity(c);
            if action[id].iter().enumerate().any(|(x, &v)| v as usize != x) {
                return Err(Error::NotFunctorial(cat.arrow(id).name.clone(), "identity".into()));
            }
        }
        for g in 0..cat.num_arrows() {
            for f in 0..cat.num_arrows() {
                if cat.arrow(f).dst != cat.arrow(g).src {
                    continue;
                }
                let gf = cat.comp(g, f);
                for x in 0..labels[cat.arrow(g).dst].len() {
                    let lhs = action[gf][x];
                    let rhs = action[f][action[g][x] as usize];
                    if lhs != rhs {
                        return Err(Error::NotFunctorial(
                            cat.arrow(g).name.clone(),
                            cat.arrow(f).name.clone(),
                        ));
                    }
                }
            }
        }
        Ok(Presheaf { cat, labels, action })
    }

    pub(crate) fn from_parts_unchecked(cat: Arc<FinCategory>, labels: Vec<Vec<String>>, action: Vec<Vec<u32>>) -> Presheaf {
        Presheaf { cat, labels, action }
    }

    /// One point at every object.
    pub fn terminal(cat: Arc<FinCategory>) -> Presheaf {
        let labels = vec![vec!["*".to_string()]; cat.num_objects()];
        let action = vec![vec![0]; cat.num_arrows()];
        Presheaf { cat, labels, action }
    }

    /// For a group `G` seen as a one-object category: `G` acting on itself
    /// by right multiplication, `x·g = x ∘ g`.
    pub fn regular(cat: Arc<FinCategory>) -> Result<Presheaf> {
        if cat.num_objects() != 1 {
            return Err(Error::Unsupported("regular action needs a one-object category".into()));
        }
        let n = cat.num_arrows();
        let labels = vec![cat.arrows().iter().map(|a| a.name.clone()).collect()];
        let action = (0..n).map(|g| (0..n).map(|x| cat.comp(x, g) as u32).collect()).collect();
        Presheaf::new(cat, labels, action)
    }

    /// A sheaf on a poset as a presheaf on its category.
    pub fn from_set_sheaf(f: &SetSheaf, cat: Arc<FinCategory>) -> Presheaf {
        let site = f.site();
        let labels = (0..site.len()).map(|x| f.labels(x).to_vec()).collect();
        // arrow p<=q goes q → p and acts by comp(p, q)
        let action = cat
            .arrows()
            .iter()
            .map(|a| f.comp(a.dst, a.src).to_vec())
            .collect();
        Presheaf { cat, labels, action }
    }

    pub fn from_sizes(cat: Arc<FinCategory>, sizes: &[usize], action: Vec<Vec<u32>>) -> Result<Presheaf> {
        Presheaf::new(cat, sizes.iter().map(|&k| default_labels(k)).collect(), action)
    }

    pub fn category(&self) -> &Arc<FinCategory> {
        &self.cat
    }

    pub fn size(&self, c: usize) -> usize {
        self.labels[c].len()
    }

    pub fn labels(&self, c: usize) -> &[String] {
        &self.labels[c]
    }

    #[inline]
    pub fn act(&self, f: usize, x: u32) -> u32 {
        self.action[f][x as usize]
    }

    pub fn action(&self, f: usize) -> &[u32] {
        &self.action[f]
    }

    /// Natural families over a sieve `S` (object bitmask closed under
    /// precomposition): `x_c ∈ X(c)` for `c ∈ S` with `x_c·f = x_d`.
    pub fn families_over(&self, sieve: u64) -> Vec<Vec<u32>> {
        let objs: Vec<usize> = (0..self.cat.num_objects()).filter(|&c| sieve >> c & 1 == 1).collect();
        let mut out = Vec::new();
        let mut cur = vec![0u32; objs.len()];
        fn go(p: &Presheaf, objs: &[usize], k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if k == objs.len() {
                out.push(cur.clone());
                return;
            }
            let c = objs[k];
            'cand: for v in 0..p.size(c) as u32 {
                // naturality against every already-chosen object, both ways
                for (j, &d) in objs[..k].iter().enumerate() {
                    for &f in p.cat.arrows_into(c) {
                        if p.cat.arrow(f).src == d && p.act(f, v) != cur[j] {
                            continue 'cand;
                        }
                    }
                    for &f in p.cat.arrows_into(d) {
                        if p.cat.arrow(f).src == c && p.act(f, cur[j]) != v {
                            continue 'cand;
                        }
                    }
                }
                // endomorphisms of c must fix v
                for &f in p.cat.arrows_into(c) {
                    if p.cat.arrow(f).src == c && p.act(f, v) != v {
                        continue 'cand;
                    }
                }
                cur[k] = v;
                go(p, objs, k + 1, cur, out);
            }
        }
        go(self, &objs, 0, &mut cur, &mut out);
        out
    }

    /// Global elements `1 → X`.
    pub fn global_elements(&self) -> Vec<Vec<u32>> {
        let all = if self.cat.num_objects() == 64 {
            u64::MAX
        } else {
            (1u64 << self.cat.num_objects()) - 1
        };
        self.families_over(all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::FinPoset;

    #[test]
    fn regular_z2_has_no_global_element() {
        let g = Arc::new(FinCategory::cyclic_group(2));
        let r = Presheaf::regular(g.clone()).unwrap();
        assert_eq!(r.size(0), 2);
        assert!(r.global_elements().is_empty());
        assert_eq!(Presheaf::terminal(g).global_elements().len(), 1);
    }

    #[test]
    fn poset_sheaf_round_trip() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let mut maps = std::collections::HashMap::new();
        maps.insert((0, 1), vec![0, 0]);
        let f = SetSheaf::from_sizes(s.clone(), &[2, 1], &maps).unwrap();
        let cat = Arc::new(FinCategory::from_poset(&s));
        let p = Presheaf::from_set_sheaf(&f, cat.clone());
        let q = Presheaf::new(cat, p.labels.clone(), p.action.clone()).unwrap();
        assert_eq!(q.global_elements().len(), f.global_sections().len());
    }
}
