use std::collections::HashMap;

use crate::error::Result;
use crate::homalg::{FPModule, IntMatrix};
use crate::sheafcore::{ModMorphism, ModSheaf, SetMorphism, SetSheaf};

/// `G_y = ∏_{x ≥ y} F_x` with projections, and `s ↦ (comp(y≤x)(s))_x`.
pub fn godement_embed_set(f: &SetSheaf) -> Result<(SetSheaf, SetMorphism)> {
    let site = f.site();
    let n = site.len();
    let ups: Vec<Vec<usize>> = (0..n).map(|y| site.up_of(y).iter().collect()).collect();
    // mixed-radix encoding of tuples over U_y, first point least significant
    let encode = |y: usize, t: &[u32]| -> u32 {
        let mut code = 0u64;
        for (&x, &v) in ups[y].iter().zip(t).rev() {
            code = code * f.size(x) as u64 + v as u64;
        }
        code as u32
    };
    let decode = |y: usize, mut code: u64| -> Vec<u32> {
        ups[y]
            .iter()
            .map(|&x| {
                let k = f.size(x) as u64;
                let v = (code % k) as u32;
                code /= k;
                v
            })
            .collect()
    };
    let sizes: Vec<u64> = ups
        .iter()
        .map(|u| u.iter().map(|&x| f.size(x) as u64).product())
        .collect();
    let mut labels = Vec::with_capacity(n);
    for y in 0..n {
        labels.push(
            (0..sizes[y])
                .map(|c| {
                    let t = decode(y, c);
                    let parts: Vec<&str> = ups[y].iter().zip(&t).map(|(&x, &v)| f.label(x, v)).collect();
                    format!("({})", parts.join(","))
                })
                .collect::<Vec<String>>(),
        );
    }
    let mut comp = vec![Vec::new(); n * n];
    for (y, z) in site.relation_pairs() {
        comp[y * n + z] = (0..sizes[y])
            .map(|c| {
                let t = decode(y, c);
                let proj: Vec<u32> = ups[z]
                    .iter()
                    .map(|x| t[ups[y].iter().position(|w| w == x).unwrap()])
                    .collect();
                encode(z, &proj)
            })
            .collect();
    }
    let g = SetSheaf::from_parts_unchecked(site.clone(), labels, comp);
    let e = (0..n)
        .map(|y| {
            (0..f.size(y) as u32)
                .map(|s| {
                    let t: Vec<u32> = ups[y].iter().map(|&x| f.apply(y, x, s)).collect();
                    encode(y, &t)
                })
                .collect()
        })
        .collect();
    let e = SetMorphism::new(f.clone(), g.clone(), e)?;
    Ok((g, e))
}

/// `G_y = ⊕_{x ≥ y} F_x` with projections, and `s ↦ (comp(y≤x)(s))_x`.
pub fn godement_embed(f: &ModSheaf) -> Result<(ModSheaf, ModMorphism)> {
    let site = f.site();
    let ring = f.ring();
    let n = site.len();
    let ups: Vec<Vec<usize>> = (0..n).map(|y| site.up_of(y).iter().collect()).collect();
    let stalks: Vec<FPModule> = ups
        .iter()
        .map(|u| FPModule::direct_sum(&u.iter().map(|&x| f.stalk(x)).collect::<Vec<_>>(), ring))
        .collect();
    let offset = |y: usize, x: usize| -> usize {
        ups[y]
            .iter()
            .take_while(|&&w| w != x)
            .map(|&w| f.stalk(w).gens())
            .sum()
    };
    let maps: HashMap<(usize, usize), IntMatrix> = site
        .hasse_edges()
        .into_iter()
        .map(|(y, z)| {
            let mut m = IntMatrix::zeros(stalks[z].gens(), stalks[y].gens());
            for &x in &ups[z] {
                m.put(offset(z, x), offset(y, x), &IntMatrix::identity(f.stalk(x).gens()));
            }
            ((y, z), m)
        })
        .collect();
    let g = ModSheaf::new(site.clone(), ring, stalks, &maps)?;
    let e = (0..n)
        .map(|y| {
            let blocks: Vec<IntMatrix> = ups[y].iter().map(|&x| f.comp(y, x).clone()).collect();
            blocks
                .iter()
                .skip(1)
                .fold(blocks[0].clone(), |acc, b| acc.vstack(b))
        })
        .collect();
    let e = ModMorphism::new(f.clone(), g.clone(), e)?;
    Ok((g, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flabby::{is_flabby_local, is_flabby_local_mod, is_flabby_traditional, is_flabby_traditional_mod};
    use crate::homalg::Ring;
    use crate::site::FinPoset;

    fn pseudocircle() -> FinPoset {
        FinPoset::new(&["x", "y", "a", "b"], &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")]).unwrap()
    }

    #[test]
    fn godement_of_constant_z() {
        let pc = pseudocircle();
        let z = ModSheaf::constant(&pc, &FPModule::free(Ring::Integers, 1));
        let (g, e) = godement_embed(&z).unwrap();
        assert_eq!(g.stalk(0).gens(), 3);
        assert_eq!(g.stalk(2).gens(), 1);
        assert!(e.is_mono());
        assert!(is_flabby_traditional_mod(&g).unwrap().verdict);
        assert!(is_flabby_local_mod(&g).unwrap().verdict);
    }

    #[test]
    fn godement_of_set_sheaf() {
        let pc = pseudocircle();
        let d = SetSheaf::constant(&pc, &["0", "1"]);
        let (g, e) = godement_embed_set(&d).unwrap();
        assert_eq!(g.sizes(), vec![8, 8, 2, 2]);
        assert!(e.is_mono());
        assert!(is_flabby_traditional(&g).unwrap().verdict);
        assert!(is_flabby_local(&g).unwrap().verdict);
        let pt = FinPoset::new(&["o"], &[]).unwrap();
        let c = SetSheaf::constant(&pt, &["u", "v", "w"]);
        assert_eq!(godement_embed_set(&c).unwrap().0.sizes(), vec![3]);
    }
}
