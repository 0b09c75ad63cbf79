use crate::error::Result;
use crate::sheafcore::SetSheaf;

use super::{FinPoset, MonotoneMap};

/// The category of elements of `T` as a poset, with its projection.
#[derive(Clone, Debug)]
pub struct Slice {
    pub site: FinPoset,
    /// `(x, s)` for each point of the slice.
    pub elements: Vec<(usize, u32)>,
    /// `(x, s) ↦ x`; pulling back along it models `X × T` in `E/T`.
    pub projection: MonotoneMap,
}

/// Points `(x, s)` with `s ∈ T_x`, and `(x, s) ≤ (y, t)` iff `x ≤ y` and
/// `comp(x≤y)(s) = t`. Sheaves on it are the objects of `Sh(P)/T`.
pub fn slice_site(t: &SetSheaf) -> Result<Slice> {
    let p = t.site();
    let mut elements = Vec::new();
    let mut names = Vec::new();
    for x in 0..p.len() {
        for s in 0..t.size(x) as u32 {
            elements.push((x, s));
            names.push(format!("{}:{}", p.name(x), t.label(x, s)));
        }
    }
    let mut le = Vec::new();
    for (i, &(x, s)) in elements.iter().enumerate() {
        for (j, &(y, u)) in elements.iter().enumerate() {
            if i != j && p.le(x, y) && t.apply(x, y, s) == u {
                le.push((i, j));
            }
        }
    }
    let site = FinPoset::from_indices(names, &le)?;
    let projection = MonotoneMap::new(site.clone(), p.clone(), elements.iter().map(|e| e.0).collect())?;
    Ok(Slice {
        site,
        elements,
        projection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn terminal_slice_is_the_poset() {
        let pc = FinPoset::new(&["x", "y", "a", "b"], &[("x", "a"), ("x", "b"), ("y", "a"), ("y", "b")]).unwrap();
        let s = slice_site(&SetSheaf::terminal(&pc)).unwrap();
        assert_eq!(s.site.len(), 4);
        assert_eq!(s.site.relation_pairs().len(), pc.relation_pairs().len());
    }

    #[test]
    fn slices_of_small_sheaves() {
        let pt = FinPoset::new(&["o"], &[]).unwrap();
        let s = slice_site(&SetSheaf::constant(&pt, &["0", "1"])).unwrap();
        assert_eq!(s.site.len(), 2);
        assert!(s.site.hasse_edges().is_empty());

        let sp = FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap();
        let mut maps = HashMap::new();
        maps.insert((0, 1), vec![0, 0]);
        let t = SetSheaf::from_sizes(sp, &[2, 1], &maps).unwrap();
        let s = slice_site(&t).unwrap();
        assert_eq!(s.site.len(), 3);
        assert_eq!(s.site.hasse_edges(), vec![(0, 2), (1, 2)]);
    }
}
