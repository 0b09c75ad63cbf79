//! Recounts the set-sheaf corpus by Burnside's lemma over all functors,
//! enumerated along every strict relation rather than Hasse edges.

use flasque::corpus::{posets, set_sheaves};
use flasque::site::FinPoset;

fn all_functions(dom: usize, cod: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dom {
        out = out.into_iter().flat_map(|f| (0..cod).map(move |v| [f.clone(), vec![v]].concat())).collect();
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out.into_iter().flat_map(|v: Vec<T>| c.iter().map(move |x| [v.clone(), vec![x.clone()]].concat())).collect();
    }
    out
}

/// Isomorphism classes of functors with these stalk sizes.
fn orbits(p: &FinPoset, sizes: &[usize]) -> usize {
    let n = p.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| x != y && p.le(x, y)).collect();
    let at = |x: usize, y: usize| pairs.iter().position(|&q| q == (x, y));
    let choices: Vec<Vec<Vec<usize>>> = pairs.iter().map(|&(x, y)| all_functions(sizes[x], sizes[y])).collect();
    let functors: Vec<Vec<Vec<usize>>> = cartesian(&choices)
        .into_iter()
        .filter(|fs| {
            pairs.iter().all(|&(x, y)| {
                (0..n).filter(|&z| z != y && p.le(y, z)).all(|z| {
                    let (f, g, h) = (&fs[at(x, y).unwrap()], &fs[at(y, z).unwrap()], &fs[at(x, z).unwrap()]);
                    (0..sizes[x]).all(|s| g[f[s]] == h[s])
                })
            })
        })
        .collect();
    let group = cartesian(&sizes.iter().map(|&s| permutations(s)).collect::<Vec<_>>());
    let fixed: usize = group
        .iter()
        .map(|g| {
            functors
                .iter()
                .filter(|fs| pairs.iter().enumerate().all(|(k, &(x, y))| (0..sizes[x]).all(|s| fs[k][g[x][s]] == g[y][fs[k][s]])))
                .count()
        })
        .sum();
    assert_eq!(fixed % group.len(), 0);
    fixed / group.len()
}

fn burnside_count(p: &FinPoset, k: usize) -> usize {
    cartesian(&vec![(0..=k).collect::<Vec<_>>(); p.len()]).iter().map(|s| orbits(p, s)).sum()
}

#[test]
fn recount_matches_enumeration() {
    for (n, k) in [(1, 3), (2, 2), (3, 2), (4, 1)] {
        for p in posets(n) {
            assert_eq!(set_sheaves(&p, k).len(), burnside_count(&p, k), "n={n} k={k} poset {:?}", p.hasse_names());
        }
    }
}

#[test]
fn totals_for_two_element_stalks() {
    let totals: Vec<usize> = (1..=3).map(|n| posets(n).iter().map(|p| burnside_count(p, 2)).sum()).collect();
    assert_eq!(totals, vec![3, 17, 124]);
}
