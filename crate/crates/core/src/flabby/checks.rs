use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::Result;
use crate::sheafcore::set_sheaf::restrict_points;
use crate::sheafcore::{ModSheaf, Presheaf, Sections, SetSheaf};
use crate::site::{FinCategory, FinPoset, Open};

/// Why a sheaf is not flabby: a section over `open` that does not extend
/// (to the whole space, or to `open ∪ U_point` for the local check).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub open: Vec<String>,
    pub section: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlabbyReport {
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl FlabbyReport {
    fn pass() -> Self {
        FlabbyReport {
            verdict: true,
            counterexample: None,
        }
    }

    fn fail(site: &FinPoset, u: Open, section: String, point: Option<usize>) -> Self {
        FlabbyReport {
            verdict: false,
            counterexample: Some(Counterexample {
                open: site.set_names(u.points()),
                section,
                point: point.map(|p| site.name(p).to_string()),
            }),
        }
    }
}

/// First section of `target` not hit by restricting `source` sections.
fn set_gap(source_open: Open, source: &[Vec<u32>], target_open: Open, target: &[Vec<u32>]) -> Option<Vec<u32>> {
    if source.len() >= target.len() && target.len() <= 1 && !source.is_empty() {
        return None;
    }
    let image: HashSet<Vec<u32>> = source
        .iter()
        .map(|s| restrict_points(source_open.points(), target_open.points(), s))
        .collect();
    if image.len() == target.len() {
        return None;
    }
    target.iter().find(|t| !image.contains(*t)).cloned()
}

/// Every restriction `Γ(X) → Γ(U)` is onto.
pub fn is_flabby_traditional(f: &SetSheaf) -> Result<FlabbyReport> {
    let site = f.site();
    let whole = site.whole();
    let global = f.global_sections();
    for u in site.all_opens()? {
        let secs = f.sections(u);
        if let Some(s) = set_gap(whole, &global, u, &secs) {
            return Ok(FlabbyReport::fail(site, u, f.fmt_section(u, &s), None));
        }
    }
    Ok(FlabbyReport::pass())
}

/// Every section over `U` extends to `U ∪ U_p` for every point `p` (the
/// covering condition in minimal-open normal form).
pub fn is_flabby_local(f: &SetSheaf) -> Result<FlabbyReport> {
    let site = f.site();
    let mut cache: HashMap<Open, Vec<Vec<u32>>> = HashMap::new();
    let opens = site.all_opens()?;
    for &u in &opens {
        cache.entry(u).or_insert_with(|| f.sections(u));
    }
    for &u in &opens {
        for p in 0..site.len() {
            if u.contains(p) {
                continue;
            }
            let v = u.union(site.minimal_open(p));
            let (sv, su) = (&cache[&v], &cache[&u]);
            if let Some(s) = set_gap(v, sv, u, su) {
                return Ok(FlabbyReport::fail(site, u, f.fmt_section(u, &s), Some(p)));
            }
        }
    }
    Ok(FlabbyReport::pass())
}

/// For every subterminal `K ↪ 1` (a sieve of objects), every `K → X`
/// lifts to a global element.
pub fn is_strongly_flabby_presheaf(x: &Presheaf) -> Result<(bool, Option<(Vec<String>, Vec<u32>)>)> {
    let cat = x.category();
    let globals = x.global_elements();
    let all = (1u64 << cat.num_objects()) - 1;
    for s in cat.sieves_of_terminal()? {
        let fams = x.families_over(s);
        let img: HashSet<Vec<u32>> = globals
            .iter()
            .map(|g| {
                g.iter()
                    .enumerate()
                    .filter(|(c, _)| s >> c & 1 == 1)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        if let Some(fam) = fams.into_iter().find(|f| !img.contains(f)) {
            let names = (0..cat.num_objects())
                .filter(|&c| s >> c & 1 == 1)
                .map(|c| cat.objects()[c].clone())
                .collect();
            return Ok((false, Some((names, fam))));
        }
        let _ = all;
    }
    Ok((true, None))
}

/// Strong flabbiness of a poset sheaf, computed in presheaf mode over the
/// sieves of the category of the poset.
pub fn is_strongly_flabby(f: &SetSheaf) -> Result<FlabbyReport> {
    let site = f.site();
    let cat = std::sync::Arc::new(FinCategory::from_poset(site));
    let x = Presheaf::from_set_sheaf(f, cat);
    match is_strongly_flabby_presheaf(&x)? {
        (true, _) => Ok(FlabbyReport::pass()),
        (false, Some((names, fam))) => {
            let u = site.open_by_names(&names)?;
            Ok(FlabbyReport::fail(site, u, f.fmt_section(u, &fam), None))
        }
        (false, None) => unreachable!(),
    }
}

fn mod_gap(f: &ModSheaf, from: &Sections, to: &Sections) -> Option<String> {
    f.restriction_gap(from, to).map(|t| f.fmt_tuple(to, &t))
}

pub fn is_flabby_traditional_mod(f: &ModSheaf) -> Result<FlabbyReport> {
    let site = f.site();
    let global = f.global_sections();
    for u in site.all_opens()? {
        let su = f.sections(u);
        if let Some(s) = mod_gap(f, &global, &su) {
            return Ok(FlabbyReport::fail(site, u, s, None));
        }
    }
    Ok(FlabbyReport::pass())
}

pub fn is_flabby_local_mod(f: &ModSheaf) -> Result<FlabbyReport> {
    let site = f.site();
    let opens = site.all_opens()?;
    let secs: HashMap<Open, Sections> = opens.iter().map(|&u| (u, f.sections(u))).collect();
    for &u in &opens {
        for p in 0..site.len() {
            if u.contains(p) {
                continue;
            }
            let v = u.union(site.minimal_open(p));
            if let Some(s) = mod_gap(f, &secs[&v], &secs[&u]) {
                return Ok(FlabbyReport::fail(site, u, s, Some(p)));
            }
        }
    }
    Ok(FlabbyReport::pass())
}

/// Strong flabbiness for module sheaves: sieves of the poset category are
/// the subterminals of `1`, and module morphisms `K → X` are sections.
pub fn is_strongly_flabby_mod(f: &ModSheaf) -> Result<FlabbyReport> {
    let site = f.site();
    let cat = FinCategory::from_poset(site);
    let global = f.global_sections();
    for s in cat.sieves_of_terminal()? {
        let u = site.open(crate::site::PointSet(s))?;
        let su = f.sections(u);
        if let Some(t) = mod_gap(f, &global, &su) {
            return Ok(FlabbyReport::fail(site, u, t, None));
        }
    }
    Ok(FlabbyReport::pass())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homalg::{FPModule, Ring};
    use std::sync::Arc;

    fn pseudocircle() -> FinPoset {
        FinPoset::new(
            &["x", "y", "a", "b"],
            &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")],
        )
        .unwrap()
    }

    #[test]
    fn constant_z_on_pseudocircle_is_not_flabby() {
        let pc = pseudocircle();
        let z = ModSheaf::constant(&pc, &FPModule::free(Ring::Integers, 1));
        for r in [
            is_flabby_traditional_mod(&z).unwrap(),
            is_flabby_local_mod(&z).unwrap(),
            is_strongly_flabby_mod(&z).unwrap(),
        ] {
            assert!(!r.verdict);
            assert_eq!(r.counterexample.unwrap().open, vec!["a", "b"]);
        }
    }

    #[test]
    fn skyscrapers_and_terminal_are_flabby() {
        let pc = pseudocircle();
        for x in 0..4 {
            let k = SetSheaf::skyscraper(&pc, x, &["0", "1", "2"]).unwrap();
            assert!(is_flabby_traditional(&k).unwrap().verdict);
            assert!(is_flabby_local(&k).unwrap().verdict);
            assert!(is_strongly_flabby(&k).unwrap().verdict);
            let m = ModSheaf::skyscraper(&pc, x, &FPModule::free(Ring::Integers, 2)).unwrap();
            assert!(is_flabby_traditional_mod(&m).unwrap().verdict);
        }
        let t = SetSheaf::terminal(&pc);
        assert!(is_flabby_traditional(&t).unwrap().verdict);
    }

    #[test]
    fn constant_two_on_the_fork_is_not_flabby() {
        let fork = FinPoset::new(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap();
        let d = SetSheaf::constant(&fork, &["0", "1"]);
        assert!(!is_flabby_traditional(&d).unwrap().verdict);
        let r = is_flabby_local(&d).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.counterexample.unwrap().point.as_deref(), Some("r"));
        // but on the antichain it is flabby
        let ac = FinPoset::new(&["a", "b"], &[]).unwrap();
        assert!(is_flabby_traditional(&SetSheaf::constant(&ac, &["0", "1"])).unwrap().verdict);
    }

    #[test]
    fn regular_g_set_is_not_strongly_flabby() {
        let g = Arc::new(FinCategory::cyclic_group(2));
        let r = Presheaf::regular(g.clone()).unwrap();
        assert!(!is_strongly_flabby_presheaf(&r).unwrap().0);
        assert!(is_strongly_flabby_presheaf(&Presheaf::terminal(g)).unwrap().0);
    }

    #[test]
    fn initial_sheaf_is_not_flabby_on_nonempty_space() {
        let s = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let e = SetSheaf::initial(&s);
        assert!(!is_flabby_traditional(&e).unwrap().verdict);
        assert!(!is_flabby_local(&e).unwrap().verdict);
        let empty = FinPoset::empty();
        assert!(is_flabby_traditional(&SetSheaf::initial(&empty)).unwrap().verdict);
    }
}
