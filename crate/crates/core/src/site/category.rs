use std::collections::HashMap;

use crate::error::{Error, Result};

use super::poset::FinPoset;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub name: String,
    pub src: usize,
    pub dst: usize,
}

/// A finite category given by its composition table.
///
/// Presheaves on it are contravariant: an arrow `f : d → c` acts as
/// `X(c) → X(d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCategory {
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    identity: Vec<usize>,
    /// `compose[g * n + f]` is `g ∘ f` when `dst f = src g`.
    compose: Vec<Option<usize>>,
    /// Claimed inverse pairs, checked by [`FinCategory::check`].
    inverses: Vec<(usize, usize)>,
    into: Vec<Vec<usize>>,
}

impl FinCategory {
    /// Assembles a category from names without validating the axioms.
    /// `compose` lists triples `(g, f, g∘f)`; `identities` names the
    /// identity arrow of each object.
    pub fn from_table(
        objects: Vec<String>,
        arrows: Vec<(String, String, String)>,
        compose: &[(String, String, String)],
        identities: &HashMap<String, String>,
        inverses: &[(String, String)],
    ) -> Result<FinCategory> {
        let obj = |s: &str| {
            objects
                .iter()
                .position(|o| o == s)
                .ok_or_else(|| Error::InvalidCategory(format!("unknown object `{s}`")))
        };
        let mut arr = Vec::with_capacity(arrows.len());
        let mut by_name = HashMap::new();
        for (name, src, dst) in &arrows {
            if by_name.insert(name.clone(), arr.len()).is_some() {
                return Err(Error::InvalidCategory(format!("duplicate arrow `{name}`")));
            }
            arr.push(Arrow {
                name: name.clone(),
                src: obj(src)?,
                dst: obj(dst)?,
            });
        }
        let a = |s: &str| {
            by_name
                .get(s)
                .copied()
                .ok_or_else(|| Error::InvalidCategory(format!("unknown arrow `{s}`")))
        };
        let n = arr.len();
        let mut table = vec![None; n * n];
        for (g, f, gf) in compose {
            let (g, f, gf) = (a(g)?, a(f)?, a(gf)?);
            if table[g * n + f].replace(gf).is_some_and(|old| old != gf) {
                return Err(Error::InvalidCategory(format!(
                    "two composites given for {} ∘ {}",
                    arr[g].name, arr[f].name
                )));
            }
        }
        let mut identity = Vec::with_capacity(objects.len());
        for o in &objects {
            let id = identities
                .get(o)
                .ok_or_else(|| Error::InvalidCategory(format!("no identity for object `{o}`")))?;
            identity.push(a(id)?);
        }
        let mut inv = Vec::new();
        for (g, h) in inverses {
            inv.push((a(g)?, a(h)?));
        }
        let mut into = vec![Vec::new(); objects.len()];
        for (i, ar) in arr.iter().enumerate() {
            into[ar.dst].push(i);
        }
        Ok(FinCategory {
            objects,
            arrows: arr,
            identity,
            compose: table,
            inverses: inv,
            into,
        })
    }

    /// Like [`FinCategory::from_table`] but rejects tables that fail
    /// [`FinCategory::check`].
    pub fn new(
        objects: Vec<String>,
        arrows: Vec<(String, String, String)>,
        compose: &[(String, String, String)],
        identities: &HashMap<String, String>,
        inverses: &[(String, String)],
    ) -> Result<FinCategory> {
        let c = Self::from_table(objects, arrows, compose, identities, inverses)?;
        let v = c.check();
        if v.is_empty() {
            Ok(c)
        } else {
            Err(Error::InvalidCategory(v.join("; ")))
        }
    }

    /// Every violated axiom, in a fixed order. Empty iff the table is a
    /// category and every claimed inverse is one.
    pub fn check(&self) -> Vec<String> {
        let n = self.arrows.len();
        let mut out = Vec::new();
        let name = |i: usize| self.arrows[i].name.as_str();
        for (o, &id) in self.identity.iter().enumerate() {
            let a = &self.arrows[id];
            if a.src != o || a.dst != o {
                out.push(format!("identity {} is not an endomorphism of {}", a.name, self.objects[o]));
            }
        }
        for g in 0..n {
            for f in 0..n {
                let composable = self.arrows[f].dst == self.arrows[g].src;
                match (composable, self.compose[g * n + f]) {
                    (true, None) => out.push(format!("missing composite {} ∘ {}", name(g), name(f))),
                    (false, Some(_)) => {
                        out.push(format!("composite given for non-composable {} ∘ {}", name(g), name(f)))
                    }
                    (true, Some(gf)) => {
                        let a = &self.arrows[gf];
                        if a.src != self.arrows[f].src || a.dst != self.arrows[g].dst {
                            out.push(format!(
                                "{} ∘ {} = {} has the wrong source or target",
                                name(g),
                                name(f),
                                a.name
                            ));
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for f in 0..n {
            let a = &self.arrows[f];
            if self.comp(self.identity[a.dst], f) != f {
                out.push(format!("id ∘ {} ≠ {}", a.name, a.name));
            }
            if self.comp(f, self.identity[a.src]) != f {
                out.push(format!("{} ∘ id ≠ {}", a.name, a.name));
            }
        }
        for h in 0..n {
            for g in 0..n {
                if self.arrows[g].dst != self.arrows[h].src {
                    continue;
                }
                for f in 0..n {
                    if self.arrows[f].dst != self.arrows[g].src {
                        continue;
                    }
                    let l = self.comp(self.comp(h, g), f);
                    let r = self.comp(h, self.comp(g, f));
                    if l != r {
                        out.push(format!(
                            "({} ∘ {}) ∘ {} ≠ {} ∘ ({} ∘ {})",
                            name(h),
                            name(g),
                            name(f),
                            name(h),
                            name(g),
                            name(f)
                        ));
                    }
                }
            }
        }
        for &(g, h) in &self.inverses {
            let (ag, ah) = (&self.arrows[g], &self.arrows[h]);
            if ag.src != ah.dst || ag.dst != ah.src {
                out.push(format!("{} cannot be inverse to {}", ah.name, ag.name));
                continue;
            }
            let gh = self.comp(g, h);
            if gh != self.identity[ag.dst] {
                out.push(format!("{} ∘ {} = {}, expected an identity", ag.name, ah.name, name(gh)));
            }
            let hg = self.comp(h, g);
            if hg != self.identity[ag.src] {
                out.push(format!("{} ∘ {} = {}, expected an identity", ah.name, ag.name, name(hg)));
            }
        }
        out
    }

    /// `C_P`: one arrow `q → p` whenever `p ≤ q`, so presheaves on it are
    /// sheaves on `P`.
    pub fn from_poset(p: &FinPoset) -> FinCategory {
        let pairs = p.relation_pairs();
        let mut index = HashMap::new();
        let mut arrows = Vec::with_capacity(pairs.len());
        for (i, &(a, b)) in pairs.iter().enumerate() {
            index.insert((a, b), i);
            arrows.push(Arrow {
                name: format!("{}<={}", p.name(a), p.name(b)),
                src: b,
                dst: a,
            });
        }
        let n = arrows.len();
        let mut compose = vec![None; n * n];
        for (g, &(c, d)) in pairs.iter().enumerate() {
            for (f, &(d2, e)) in pairs.iter().enumerate() {
                if d == d2 {
                    compose[g * n + f] = Some(index[&(c, e)]);
                }
            }
        }
        let identity = (0..p.len()).map(|x| index[&(x, x)]).collect();
        let mut into = vec![Vec::new(); p.len()];
        for (i, a) in arrows.iter().enumerate() {
            into[a.dst].push(i);
        }
        FinCategory {
            objects: p.names().to_vec(),
            arrows,
            identity,
            compose,
            inverses: Vec::new(),
            into,
        }
    }

    /// The one-object category of the cyclic group `ℤ/n`, arrows `g0 … g{n-1}`.
    pub fn cyclic_group(n: usize) -> FinCategory {
        assert!(n >= 1);
        let arrows = (0..n)
            .map(|k| Arrow {
                name: format!("g{k}"),
                src: 0,
                dst: 0,
            })
            .collect();
        let mut compose = vec![None; n * n];
        for g in 0..n {
            for f in 0..n {
                compose[g * n + f] = Some((g + f) % n);
            }
        }
        let inverses = (0..n).map(|k| (k, (n - k) % n)).collect();
        FinCategory {
            objects: vec!["*".into()],
            arrows,
            identity: vec![0],
            compose,
            inverses,
            into: vec![(0..n).collect()],
        }
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrow(&self, i: usize) -> &Arrow {
        &self.arrows[i]
    }

    pub fn arrow_index(&self, name: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.name == name)
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn identity(&self, c: usize) -> usize {
        self.identity[c]
    }

    /// `g ∘ f`; panics if not composable.
    #[inline]
    pub fn comp(&self, g: usize, f: usize) -> usize {
        self.compose[g * self.arrows.len() + f].expect("composable arrows")
    }

    /// Arrows with target `c`, in index order.
    pub fn arrows_into(&self, c: usize) -> &[usize] {
        &self.into[c]
    }

    pub fn inverses(&self) -> Vec<(String, String)> {
        self.inverses
            .iter()
            .map(|&(g, h)| (self.arrows[g].name.clone(), self.arrows[h].name.clone()))
            .collect()
    }

    /// Composition triples `(g, f, g∘f)` by name.
    pub fn compose_table(&self) -> Vec<(String, String, String)> {
        let n = self.arrows.len();
        let mut out = Vec::new();
        for g in 0..n {
            for f in 0..n {
                if let Some(gf) = self.compose[g * n + f] {
                    out.push((
                        self.arrows[g].name.clone(),
                        self.arrows[f].name.clone(),
                        self.arrows[gf].name.clone(),
                    ));
                }
            }
        }
        out
    }

    /// `a` has a section, so `{a}` is a covering family of its target.
    pub fn is_split_epi(&self, a: usize) -> bool {
        let dst = self.arrows[a].dst;
        let id = self.identity[dst];
        self.into[self.arrows[a].src]
            .iter()
            .any(|&s| self.arrows[s].src == dst && self.comp(a, s) == id)
    }

    /// Subterminal presheaves as object sets closed under precomposition
    /// (`c ∈ S` and `d → c` imply `d ∈ S`), as bitmasks sorted by size and
    /// then by mask. Requires at most 20 objects.
    pub fn sieves_of_terminal(&self) -> Result<Vec<u64>> {
        let k = self.objects.len();
        if k > 20 {
            return Err(Error::TooLarge(format!("{k} objects")));
        }
        // below[c]: objects with an arrow into c
        let mut below = vec![0u64; k];
        for a in &self.arrows {
            below[a.dst] |= 1 << a.src;
        }
        let mut out: Vec<u64> = (0..1u64 << k)
            .filter(|&s| (0..k).all(|c| s >> c & 1 == 0 || below[c] & !s == 0))
            .collect();
        out.sort_by_key(|&s| (s.count_ones(), s.reverse_bits()));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2(gg: &str, inverses: &[(String, String)]) -> FinCategory {
        let ids: HashMap<String, String> = [("*".to_string(), "e".to_string())].into();
        let compose: Vec<(String, String, String)> = [
            ("e", "e", "e"),
            ("e", "g", "g"),
            ("g", "e", "g"),
            ("g", "g", gg),
        ]
        .iter()
        .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
        .collect();
        FinCategory::from_table(
            vec!["*".into()],
            vec![
                ("e".into(), "*".into(), "*".into()),
                ("g".into(), "*".into(), "*".into()),
            ],
            &compose,
            &ids,
            inverses,
        )
        .unwrap()
    }

    #[test]
    fn group_of_order_two_is_valid() {
        let inv = vec![("g".to_string(), "g".to_string())];
        assert!(z2("e", &inv).check().is_empty());
        assert!(FinCategory::cyclic_group(2).check().is_empty());
    }

    #[test]
    fn idempotent_claimed_invertible_is_reported() {
        let inv = vec![("g".to_string(), "g".to_string())];
        let c = z2("g", &inv);
        let v = c.check();
        assert!(!v.is_empty());
        assert!(v[0].contains("expected an identity"));
        // without the claim the idempotent monoid is a fine category
        assert!(z2("g", &[]).check().is_empty());
    }

    #[test]
    fn discrete_category() {
        let objs: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let arrows = objs
            .iter()
            .map(|o| (format!("id_{o}"), o.clone(), o.clone()))
            .collect();
        let compose: Vec<_> = objs
            .iter()
            .map(|o| (format!("id_{o}"), format!("id_{o}"), format!("id_{o}")))
            .collect();
        let ids = objs.iter().map(|o| (o.clone(), format!("id_{o}"))).collect();
        let c = FinCategory::new(objs, arrows, &compose, &ids, &[]).unwrap();
        assert_eq!(c.sieves_of_terminal().unwrap().len(), 8);
    }

    #[test]
    fn poset_category_sieves_are_up_sets() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let c = FinCategory::from_poset(&s);
        assert!(c.check().is_empty());
        let sieves = c.sieves_of_terminal().unwrap();
        let opens: Vec<u64> = s.all_opens().unwrap().iter().map(|o| o.points().0).collect();
        assert_eq!(sieves, opens);
    }

    #[test]
    fn split_epis_in_a_group_and_a_poset() {
        let g = FinCategory::cyclic_group(2);
        assert!((0..2).all(|a| g.is_split_epi(a)));
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let c = FinCategory::from_poset(&s);
        let split: Vec<bool> = (0..c.num_arrows()).map(|a| c.is_split_epi(a)).collect();
        // only identities split
        for (a, sp) in split.iter().enumerate() {
            assert_eq!(*sp, c.arrow(a).src == c.arrow(a).dst);
        }
    }
}
