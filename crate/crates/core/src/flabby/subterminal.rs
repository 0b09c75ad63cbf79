use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Result;
use crate::sheafcore::{Presheaf, SetMorphism, SetSheaf};
use crate::site::{FinCategory, Open};

/// A subterminal subsheaf `K ⊆ X|_U`: at most one element per point,
/// closed under the comparison maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubterminalPart {
    pub domain: Open,
    /// Indexed by point; `None` off `U` and where `K` is empty.
    pub select: Vec<Option<u32>>,
}

impl SubterminalPart {
    pub fn is_empty(&self) -> bool {
        self.select.iter().all(|s| s.is_none())
    }

    /// Restriction to a smaller open.
    pub fn restrict(&self, v: Open) -> SubterminalPart {
        SubterminalPart {
            domain: v,
            select: self
                .select
                .iter()
                .enumerate()
                .map(|(x, s)| if v.contains(x) { *s } else { None })
                .collect(),
        }
    }

    pub fn fmt(&self, x: &SetSheaf) -> String {
        let parts: Vec<String> = self
            .select
            .iter()
            .enumerate()
            .filter_map(|(p, s)| s.map(|v| format!("{}:{}", x.site().name(p), x.label(p, v))))
            .collect();
        if parts.is_empty() {
            "{}".to_string()
        } else {
            format!("{{{}}}", parts.join(","))
        }
    }
}

/// Every subterminal subsheaf of `X|_U`, including the empty one, in
/// a deterministic order (points in a linear extension, "empty" first).
pub fn enumerate_subterminals(x: &SetSheaf, u: Open) -> Vec<SubterminalPart> {
    let site = x.site();
    let order: Vec<usize> = site
        .topological_order()
        .iter()
        .copied()
        .filter(|&p| u.contains(p))
        .collect();
    let mut out = Vec::new();
    let mut select = vec![None; site.len()];
    fn go(
        x: &SetSheaf,
        u: Open,
        order: &[usize],
        k: usize,
        select: &mut Vec<Option<u32>>,
        out: &mut Vec<SubterminalPart>,
    ) {
        if k == order.len() {
            out.push(SubterminalPart {
                domain: u,
                select: select.clone(),
            });
            return;
        }
        let p = order[k];
        // values forced by points below p that are already inhabited
        let mut forced: Option<u32> = None;
        for q in x.site().down_of(p).iter() {
            if q == p || !u.contains(q) {
                continue;
            }
            if let Some(s) = select[q] {
                let v = x.apply(q, p, s);
                match forced {
                    None => forced = Some(v),
                    Some(f) if f != v => return,
                    _ => {}
                }
            }
        }
        match forced {
            Some(v) => {
                select[p] = Some(v);
                go(x, u, order, k + 1, select, out);
            }
            None => {
                select[p] = None;
                go(x, u, order, k + 1, select, out);
                for v in 0..x.size(p) as u32 {
                    select[p] = Some(v);
                    go(x, u, order, k + 1, select, out);
                }
            }
        }
        select[p] = None;
    }
    go(x, u, &order, 0, &mut select, &mut out);
    out
}

/// `P≤1(X)` as a sheaf: the stalk at `x` is the set of subterminals of
/// `X|_{U_x}`, and comparison maps restrict parts.
#[derive(Clone, Debug)]
pub struct SubterminalObject {
    pub sheaf: SetSheaf,
    /// `parts[x][i]` is element `i` of the stalk at `x`.
    pub parts: Vec<Vec<SubterminalPart>>,
    /// `X → P≤1(X)`, `s ↦ {s}`.
    pub singleton: SetMorphism,
}

impl SubterminalObject {
    /// The generic subterminal `K₀ ⊆ X × P≤1(X)`: at `x`, the pairs `(s, K)`
    /// with `s ∈ K(x)`.
    pub fn generic_subterminal(&self) -> Vec<Vec<(u32, u32)>> {
        self.parts
            .iter()
            .enumerate()
            .map(|(x, ps)| {
                ps.iter()
                    .enumerate()
                    .filter_map(|(i, k)| k.select[x].map(|s| (s, i as u32)))
                    .collect()
            })
            .collect()
    }
}

/// The part generated by `s ∈ X_x`: `y ↦ comp(x≤y)(s)` on `U_x`.
pub fn singleton_part(x: &SetSheaf, p: usize, s: u32) -> SubterminalPart {
    let site = x.site();
    let u = site.minimal_open(p);
    SubterminalPart {
        domain: u,
        select: (0..site.len())
            .map(|q| if u.contains(q) { Some(x.apply(p, q, s)) } else { None })
            .collect(),
    }
}

pub fn subterminal_object(x: &SetSheaf) -> Result<SubterminalObject> {
    let site = x.site();
    let n = site.len();
    let parts: Vec<Vec<SubterminalPart>> = (0..n)
        .map(|p| enumerate_subterminals(x, site.minimal_open(p)))
        .collect();
    let index: Vec<HashMap<&SubterminalPart, u32>> = parts
        .iter()
        .map(|ps| ps.iter().enumerate().map(|(i, k)| (k, i as u32)).collect())
        .collect();
    let mut comp = vec![Vec::new(); n * n];
    for (p, q) in site.relation_pairs() {
        let uq = site.minimal_open(q);
        comp[p * n + q] = parts[p].iter().map(|k| index[q][&k.restrict(uq)]).collect();
    }
    let labels = parts
        .iter()
        .map(|ps| ps.iter().map(|k| k.fmt(x)).collect())
        .collect();
    let sheaf = SetSheaf::from_parts_unchecked(site.clone(), labels, comp);
    let singleton_comps = (0..n)
        .map(|p| {
            (0..x.size(p) as u32)
                .map(|s| index[p][&singleton_part(x, p, s)])
                .collect()
        })
        .collect();
    let singleton = SetMorphism::new(x.clone(), sheaf.clone(), singleton_comps)?;
    Ok(SubterminalObject {
        sheaf,
        parts,
        singleton,
    })
}

/// Marker for "no element" in presheaf parts.
pub const NONE: u32 = u32::MAX;

/// `P≤1(X)` for a presheaf on a finite category. An element at `c` assigns
/// to each arrow `α : d → c` at most one element of `X(d)`, closed under
/// precomposition: `K(α) ∋ x` implies `K(α∘β) ∋ x·β`.
#[derive(Clone, Debug)]
pub struct PresheafSubterminals {
    pub object: Presheaf,
    /// `parts[c][i][k]`: value on the `k`-th arrow into `c`, or [`NONE`].
    pub parts: Vec<Vec<Vec<u32>>>,
}

impl PresheafSubterminals {
    /// The generic subterminal at `c`: pairs `(x, K)` with `K(id_c) = {x}`.
    pub fn generic_subterminal(&self) -> Vec<Vec<(u32, u32)>> {
        let cat = self.object.category().clone();
        (0..cat.num_objects())
            .map(|c| {
                let id = cat.identity(c);
                let k_id = cat.arrows_into(c).iter().position(|&a| a == id).unwrap();
                self.parts[c]
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| k[k_id] != NONE)
                    .map(|(i, k)| (k[k_id], i as u32))
                    .collect()
            })
            .collect()
    }
}

pub fn presheaf_subterminals(x: &Presheaf) -> PresheafSubterminals {
    let cat: Arc<FinCategory> = x.category().clone();
    let k = cat.num_objects();
    let mut parts = Vec::with_capacity(k);
    for c in 0..k {
        let into = cat.arrows_into(c);
        let pos: HashMap<usize, usize> = into.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        // links[i]: (β, j) with into[i] ∘ β = into[j]
        let links: Vec<Vec<(usize, usize)>> = into
            .iter()
            .map(|&a| {
                cat.arrows_into(cat.arrow(a).src)
                    .iter()
                    .map(|&b| (b, pos[&cat.comp(a, b)]))
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut cur = vec![NONE; into.len()];
        // checks every constraint between arrow i and the arrows before it
        fn consistent(x: &Presheaf, links: &[Vec<(usize, usize)>], cur: &[u32], i: usize) -> bool {
            if cur[i] != NONE {
                for &(b, j) in &links[i] {
                    if j <= i && cur[j] != x.act(b, cur[i]) {
                        return false;
                    }
                }
            }
            for j in 0..i {
                if cur[j] == NONE {
                    continue;
                }
                for &(b, t) in &links[j] {
                    if t == i && cur[i] != x.act(b, cur[j]) {
                        return false;
                    }
                }
            }
            true
        }
        fn go(
            x: &Presheaf,
            into: &[usize],
            links: &[Vec<(usize, usize)>],
            i: usize,
            cur: &mut Vec<u32>,
            out: &mut Vec<Vec<u32>>,
        ) {
            if i == into.len() {
                out.push(cur.clone());
                return;
            }
            let d = x.category().arrow(into[i]).src;
            let mut options = vec![NONE];
            options.extend(0..x.size(d) as u32);
            for v in options {
                cur[i] = v;
                if consistent(x, links, cur, i) {
                    go(x, into, links, i + 1, cur, out);
                }
            }
            cur[i] = NONE;
        }
        go(x, into, &links, 0, &mut cur, &mut out);
        parts.push(out);
    }
    let index: Vec<HashMap<&Vec<u32>, u32>> = parts
        .iter()
        .map(|ps| ps.iter().enumerate().map(|(i, k)| (k, i as u32)).collect())
        .collect();
    // restriction along γ : d → c: K'(α') = K(γ∘α')
    let mut action = Vec::with_capacity(cat.num_arrows());
    for g in 0..cat.num_arrows() {
        let (d, c) = (cat.arrow(g).src, cat.arrow(g).dst);
        let pos_c: HashMap<usize, usize> = cat.arrows_into(c).iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let act: Vec<u32> = parts[c]
            .iter()
            .map(|kp| {
                let restricted: Vec<u32> = cat
                    .arrows_into(d)
                    .iter()
                    .map(|&a2| kp[pos_c[&cat.comp(g, a2)]])
                    .collect();
                index[d][&restricted]
            })
            .collect();
        action.push(act);
    }
    let labels = parts
        .iter()
        .enumerate()
        .map(|(c, ps)| {
            ps.iter()
                .map(|kp| {
                    let items: Vec<String> = cat
                        .arrows_into(c)
                        .iter()
                        .zip(kp)
                        .filter(|(_, &v)| v != NONE)
                        .map(|(&a, &v)| format!("{}:{}", cat.arrow(a).name, x.labels(cat.arrow(a).src)[v as usize]))
                        .collect();
                    format!("{{{}}}", items.join(","))
                })
                .collect()
        })
        .collect();
    PresheafSubterminals {
        object: Presheaf::from_parts_unchecked(cat, labels, action),
        parts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::FinPoset;

    fn sierpinski() -> FinPoset {
        FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap()
    }

    #[test]
    fn parts_of_terminal_on_point() {
        let pt = FinPoset::new(&["*"], &[]).unwrap();
        let t = SetSheaf::terminal(&pt);
        assert_eq!(enumerate_subterminals(&t, pt.whole()).len(), 2);
        assert_eq!(enumerate_subterminals(&t, pt.empty_open()).len(), 1);
    }

    #[test]
    fn parts_of_constant_two_on_sierpinski() {
        let s = sierpinski();
        let d = SetSheaf::constant(&s, &["0", "1"]);
        assert_eq!(enumerate_subterminals(&d, s.whole()).len(), 5);
        let p = subterminal_object(&d).unwrap();
        assert_eq!(p.sheaf.sizes(), vec![5, 3]);
        assert!(p.singleton.is_mono());
    }

    #[test]
    fn presheaf_parts_match_poset_parts() {
        let s = FinPoset::new(
            &["x", "y", "a", "b"],
            &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")],
        )
        .unwrap();
        let mut maps = HashMap::new();
        maps.insert((0, 2), vec![0, 1, 1]);
        maps.insert((0, 3), vec![1, 0, 0]);
        maps.insert((1, 2), vec![1]);
        maps.insert((1, 3), vec![0]);
        let f = SetSheaf::from_sizes(s.clone(), &[3, 1, 2, 2], &maps).unwrap();
        let cat = Arc::new(FinCategory::from_poset(&s));
        let p = presheaf_subterminals(&Presheaf::from_set_sheaf(&f, cat));
        let q = subterminal_object(&f).unwrap();
        for x in 0..4 {
            assert_eq!(p.parts[x].len(), q.parts[x].len());
        }
        assert_eq!(q.sheaf.sizes(), vec![12, 10, 3, 3]);
    }

    #[test]
    fn regular_z2_has_three_parts() {
        let g = Arc::new(FinCategory::cyclic_group(2));
        let r = Presheaf::regular(g).unwrap();
        let p = presheaf_subterminals(&r);
        assert_eq!(p.parts[0].len(), 3);
        assert_eq!(p.generic_subterminal()[0].len(), 2);
    }
}
