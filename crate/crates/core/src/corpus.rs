//! Built-in instances and exhaustive enumerators for small posets and
//! sheaves.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::homalg::{FPModule, Ring};
use crate::sheafcore::{AnySheaf, ModSheaf, Presheaf, SetSheaf};
use crate::site::{FinCategory, FinPoset, MonotoneMap};

pub const SITE_NAMES: &[&str] = &["point", "sierpinski", "antichain2", "fork", "chain3", "pseudocircle", "sphere2"];
pub const CATEGORY_NAMES: &[&str] = &["BG-Z2"];
pub const SHEAF_NAMES: &[&str] = &[
    "const-Z",
    "const-Z2",
    "const-Z4",
    "const-01",
    "terminal",
    "initial",
    "omega",
    "godement-Z",
    "skyscraper-Z@<point>",
];
pub const PRESHEAF_NAMES: &[&str] = &["regular", "terminal"];

pub fn site(name: &str) -> Result<FinPoset> {
    match name {
        "point" => FinPoset::new(&["o"], &[]),
        "sierpinski" => FinPoset::new(&["p0", "p1"], &[("p0", "p1")]),
        "antichain2" => FinPoset::new(&["a", "b"], &[]),
        "fork" => FinPoset::new(&["r", "a", "b"], &[("r", "a"), ("r", "b")]),
        "chain3" => FinPoset::new(&["c0", "c1", "c2"], &[("c0", "c1"), ("c1", "c2")]),
        "pseudocircle" => FinPoset::new(&["x", "y", "a", "b"], &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")]),
        "sphere2" => FinPoset::new(
            &["n0", "n1", "e0", "e1", "v0", "v1"],
            &[
                ("n0", "e0"),
                ("n0", "e1"),
                ("n1", "e0"),
                ("n1", "e1"),
                ("e0", "v0"),
                ("e0", "v1"),
                ("e1", "v0"),
                ("e1", "v1"),
            ],
        ),
        _ => Err(Error::Input(format!("no built-in site named {name:?}"))),
    }
}

pub fn category(name: &str) -> Result<Arc<FinCategory>> {
    match name {
        "BG-Z2" => Ok(Arc::new(FinCategory::cyclic_group(2))),
        _ => Err(Error::Input(format!("no built-in category named {name:?}"))),
    }
}

pub fn sheaf(site: &FinPoset, name: &str) -> Result<AnySheaf> {
    let z = |m: u32| -> Result<FPModule> {
        Ok(if m == 0 {
            FPModule::free(Ring::Integers, 1)
        } else {
            FPModule::free(Ring::zmod(m)?, 1)
        })
    };
    Ok(match name {
        "const-Z" => AnySheaf::Mod(ModSheaf::constant(site, &z(0)?)),
        "const-Z2" => AnySheaf::Mod(ModSheaf::constant(site, &z(2)?)),
        "const-Z4" => AnySheaf::Mod(ModSheaf::constant(site, &z(4)?)),
        "const-01" => AnySheaf::Set(SetSheaf::constant(site, &["0", "1"])),
        "terminal" => AnySheaf::Set(SetSheaf::terminal(site)),
        "initial" => AnySheaf::Set(SetSheaf::initial(site)),
        "omega" => AnySheaf::Set(SetSheaf::omega(site)?),
        "godement-Z" => AnySheaf::Mod(crate::flabby::godement_embed(&ModSheaf::constant(site, &z(0)?))?.0),
        _ => match name.strip_prefix("skyscraper-Z@") {
            Some(p) => AnySheaf::Mod(ModSheaf::skyscraper(site, site.index(p)?, &z(0)?)?),
            None => return Err(Error::Input(format!("no built-in sheaf named {name:?}"))),
        },
    })
}

pub fn presheaf(cat: &Arc<FinCategory>, name: &str) -> Result<Presheaf> {
    match name {
        "regular" => Presheaf::regular(cat.clone()),
        "terminal" => Ok(Presheaf::terminal(cat.clone())),
        _ => Err(Error::Input(format!("no built-in presheaf named {name:?}"))),
    }
}

/// Monotone maps between built-in sites: identities, maps to the point,
/// and every monotone map among a few small pairs.
pub fn maps() -> Result<Vec<(String, MonotoneMap)>> {
    let mut out = Vec::new();
    for &s in SITE_NAMES {
        let p = site(s)?;
        out.push((format!("id:{s}"), MonotoneMap::identity(&p)));
        out.push((format!("{s}->point"), MonotoneMap::to_point(&p)));
    }
    for (a, b) in [("pseudocircle", "sierpinski"), ("sierpinski", "pseudocircle"), ("fork", "sierpinski"), ("chain3", "sierpinski")] {
        let (pa, pb) = (site(a)?, site(b)?);
        for (i, f) in MonotoneMap::enumerate(&pa, &pb).into_iter().enumerate() {
            out.push((format!("{a}->{b}#{i}"), f));
        }
    }
    Ok(out)
}

/// All posets on exactly `n` points up to isomorphism, in canonical order.
/// Point `i` is named `p{i}` and the labelling is a linear extension.
pub fn posets(n: usize) -> Vec<FinPoset> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut seen = HashSet::new();
    let mut codes = Vec::new();
    for mask in 0u64..1 << pairs.len() {
        let le = |i: usize, j: usize| i == j || (i < j && mask >> pairs.iter().position(|&p| p == (i, j)).unwrap() & 1 == 1);
        let transitive = (0..n).all(|i| (i..n).all(|j| (j..n).all(|k| !(le(i, j) && le(j, k)) || le(i, k))));
        if !transitive {
            continue;
        }
        let rel: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(i, j)| le(i, j)).collect();
        let canon = perms
            .iter()
            .filter(|s| rel.iter().all(|&(i, j)| s[i] < s[j]))
            .map(|s| {
                let mut r: Vec<(usize, usize)> = rel.iter().map(|&(i, j)| (s[i], s[j])).collect();
                r.sort();
                r
            })
            .min()
            .expect("the identity keeps a natural labelling");
        if seen.insert(canon.clone()) {
            codes.push(canon);
        }
    }
    codes.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    codes
        .into_iter()
        .map(|r| FinPoset::from_indices(names.clone(), &r).expect("transitive and acyclic"))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for k in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=k).map(move |i| {
                    let mut q = p.clone();
                    q.insert(i, k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Hasse-edge maps for a fixed list of stalk sizes, with packed codes.
struct Shape<'a> {
    site: &'a FinPoset,
    edges: Vec<(usize, usize)>,
    sizes: Vec<usize>,
}

impl Shape<'_> {
    fn encode(&self, maps: &[Vec<u32>]) -> u64 {
        let mut code = 0u64;
        for (e, m) in self.edges.iter().zip(maps) {
            let base = self.sizes[e.1].max(1) as u64;
            for &v in m {
                code = code * base + v as u64;
            }
        }
        code
    }

    fn functorial(&self, maps: &[Vec<u32>]) -> bool {
        let n = self.site.len();
        let topo = self.site.topological_order();
        // comp[x][z] computed from the top down through the first Hasse edge
        let mut comp: Vec<HashMap<usize, Vec<u32>>> = vec![HashMap::new(); n];
        for &x in topo.iter().rev() {
            comp[x].insert(x, (0..self.sizes[x] as u32).collect());
            for (k, &(a, y)) in self.edges.iter().enumerate() {
                if a != x {
                    continue;
                }
                let via: Vec<(usize, Vec<u32>)> = comp[y]
                    .iter()
                    .map(|(&z, g)| (z, maps[k].iter().map(|&s| g[s as usize]).collect()))
                    .collect();
                for (z, m) in via {
                    match comp[x].get(&z) {
                        Some(old) if *old != m => return false,
                        Some(_) => {}
                        None => {
                            comp[x].insert(z, m);
                        }
                    }
                }
            }
        }
        true
    }

    /// Relabels the stalk at `x` by `perm`.
    fn act(&self, maps: &[Vec<u32>], x: usize, perm: &[u32]) -> Vec<Vec<u32>> {
        self.edges
            .iter()
            .zip(maps)
            .map(|(&(a, b), m)| {
                let mut out = m.clone();
                if a == x {
                    for (s, &v) in m.iter().enumerate() {
                        out[perm[s] as usize] = v;
                    }
                }
                if b == x {
                    for v in out.iter_mut() {
                        *v = perm[*v as usize];
                    }
                }
                out
            })
            .collect()
    }

    fn classes(&self) -> Vec<Vec<Vec<u32>>> {
        let domains: Vec<usize> = self.edges.iter().map(|e| self.sizes[e.0]).collect();
        let ranges: Vec<usize> = self.edges.iter().map(|e| self.sizes[e.1]).collect();
        if domains.iter().zip(&ranges).any(|(&d, &r)| d > 0 && r == 0) {
            return Vec::new();
        }
        let mut gens: Vec<(usize, Vec<u32>)> = Vec::new();
        for x in 0..self.site.len() {
            let s = self.sizes[x] as u32;
            if s >= 2 {
                let mut swap: Vec<u32> = (0..s).collect();
                swap.swap(0, 1);
                gens.push((x, swap));
                if s >= 3 {
                    gens.push((x, (0..s).map(|i| (i + 1) % s).collect()));
                }
            }
        }
        let mut seen: HashSet<u64> = HashSet::new();
        let mut out = Vec::new();
        let mut maps: Vec<Vec<u32>> = domains.iter().map(|&d| vec![0; d]).collect();
        loop {
            if !seen.contains(&self.encode(&maps)) && self.functorial(&maps) {
                out.push(maps.clone());
                let mut queue = vec![maps.clone()];
                seen.insert(self.encode(&maps));
                while let Some(m) = queue.pop() {
                    for (x, g) in &gens {
                        let m2 = self.act(&m, *x, g);
                        if seen.insert(self.encode(&m2)) {
                            queue.push(m2);
                        }
                    }
                }
            }
            // odometer over all entries of all maps
            let mut carried = true;
            'inc: for (k, m) in maps.iter_mut().enumerate() {
                for v in m.iter_mut() {
                    *v += 1;
                    if (*v as usize) < ranges[k] {
                        carried = false;
                        break 'inc;
                    }
                    *v = 0;
                }
            }
            if carried {
                break;
            }
        }
        out
    }
}

/// All set sheaves on `site` with stalk sizes at most `k`, one per
/// isomorphism class.
pub fn set_sheaves(site: &FinPoset, k: usize) -> Vec<SetSheaf> {
    let n = site.len();
    let edges = site.hasse_edges();
    let mut out = Vec::new();
    let mut sizes = vec![0usize; n];
    loop {
        let shape = Shape {
            site,
            edges: edges.clone(),
            sizes: sizes.clone(),
        };
        for maps in shape.classes() {
            let table: HashMap<(usize, usize), Vec<u32>> = edges.iter().copied().zip(maps).collect();
            out.push(SetSheaf::from_sizes(site.clone(), &sizes, &table).expect("enumerated sheaves are functorial"));
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            sizes[i] += 1;
            if sizes[i] <= k {
                break;
            }
            sizes[i] = 0;
            i += 1;
        }
    }
}

/// Every poset with `1..=n` points up to isomorphism, each paired with
/// every set sheaf of stalk size at most `k` up to isomorphism.
pub fn enumerate_corpus(n: usize, k: usize, force: bool) -> Result<impl Iterator<Item = (FinPoset, SetSheaf)>> {
    if !force && (n > 5 || k > 3) {
        return Err(Error::TooLarge(format!("corpus bounds n={n}, k={k} exceed 5 and 3; pass force")));
    }
    Ok((1..=n)
        .flat_map(posets)
        .flat_map(move |p| set_sheaves(&p, k).into_iter().map(move |f| (p.clone(), f))))
}
