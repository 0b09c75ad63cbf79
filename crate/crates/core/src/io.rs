//! JSON reading and writing for posets, categories, sheaves, presheaves and
//! monotone maps. Every document carries `"format": 1`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::homalg::{FPModule, IntMatrix, Ring};
use crate::sheafcore::{AnySheaf, ModSheaf, Presheaf, SetSheaf};
use crate::site::{FinCategory, FinPoset, MonotoneMap};

pub const FORMAT: u64 = 1;

fn bad(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

fn check_format(v: &Value) -> Result<()> {
    match v.get("format") {
        None => Ok(()),
        Some(f) if f.as_u64() == Some(FORMAT) => Ok(()),
        Some(f) => Err(bad(format!("unsupported format {f}, expected {FORMAT}"))),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(format!("missing field \"{key}\"")))
}

fn str_list(v: &Value, what: &str) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what} should be a list")))?
        .iter()
        .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad(format!("{what} should hold strings"))))
        .collect()
}

fn int_rows(v: &Value, what: &str) -> Result<Vec<Vec<i64>>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what} should be a list of rows")))?
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| bad(format!("{what} should be a list of rows")))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| bad(format!("{what} should hold integers"))))
                .collect()
        })
        .collect()
}

/// Splits `"x<=y"`.
fn edge_key(k: &str) -> Result<(&str, &str)> {
    k.split_once("<=")
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| bad(format!("map key {k:?} should look like \"x<=y\"")))
}

pub fn parse(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

pub fn poset_to_json(p: &FinPoset) -> Value {
    json!({
        "format": FORMAT,
        "points": p.names(),
        "le": p.hasse_names().into_iter().map(|(a, b)| vec![a, b]).collect::<Vec<_>>(),
    })
}

pub fn poset_from_json(v: &Value) -> Result<FinPoset> {
    check_format(v)?;
    let points = str_list(field(v, "points")?, "points")?;
    let le: Vec<(String, String)> = match v.get("le") {
        None => Vec::new(),
        Some(l) => l
            .as_array()
            .ok_or_else(|| bad("le should be a list of pairs"))?
            .iter()
            .map(|p| match str_list(p, "le")?.as_slice() {
                [a, b] => Ok((a.clone(), b.clone())),
                _ => Err(bad("each le entry should be a pair")),
            })
            .collect::<Result<_>>()?,
    };
    FinPoset::new(&points, &le)
}

pub fn category_to_json(c: &FinCategory) -> Value {
    let ids: BTreeMap<&str, &str> = (0..c.num_objects())
        .map(|o| (c.objects()[o].as_str(), c.arrow(c.identity(o)).name.as_str()))
        .collect();
    let mut v = json!({
        "format": FORMAT,
        "objects": c.objects(),
        "arrows": c.arrows().iter().map(|a| json!({
            "name": a.name, "src": c.objects()[a.src], "dst": c.objects()[a.dst],
        })).collect::<Vec<_>>(),
        "compose": c.compose_table().into_iter().map(|(g, f, gf)| vec![g, f, gf]).collect::<Vec<_>>(),
        "identities": ids,
    });
    let inv = c.inverses();
    if !inv.is_empty() {
        v["inverses"] = json!(inv.into_iter().map(|(g, h)| vec![g, h]).collect::<Vec<_>>());
    }
    v
}

pub fn category_from_json(v: &Value) -> Result<FinCategory> {
    check_format(v)?;
    let objects = str_list(field(v, "objects")?, "objects")?;
    let arrows: Vec<(String, String, String)> = field(v, "arrows")?
        .as_array()
        .ok_or_else(|| bad("arrows should be a list"))?
        .iter()
        .map(|a| {
            let s = |k: &str| {
                field(a, k)?
                    .as_str()
                    .map(str::to_string)
                    .ok_or_else(|| bad(format!("arrow field \"{k}\" should be a string")))
            };
            Ok((s("name")?, s("src")?, s("dst")?))
        })
        .collect::<Result<_>>()?;
    let compose: Vec<(String, String, String)> = field(v, "compose")?
        .as_array()
        .ok_or_else(|| bad("compose should be a list of triples"))?
        .iter()
        .map(|t| match str_list(t, "compose")?.as_slice() {
            [g, f, gf] => Ok((g.clone(), f.clone(), gf.clone())),
            _ => Err(bad("each compose entry should be [g, f, g∘f]")),
        })
        .collect::<Result<_>>()?;
    let identities: HashMap<String, String> = match v.get("identities") {
        Some(m) => m
            .as_object()
            .ok_or_else(|| bad("identities should map objects to arrows"))?
            .iter()
            .map(|(k, a)| Ok((k.clone(), a.as_str().ok_or_else(|| bad("identity names are strings"))?.to_string())))
            .collect::<Result<_>>()?,
        None => infer_identities(&objects, &arrows, &compose)?,
    };
    let inverses: Vec<(String, String)> = match v.get("inverses") {
        None => Vec::new(),
        Some(l) => l
            .as_array()
            .ok_or_else(|| bad("inverses should be a list of pairs"))?
            .iter()
            .map(|p| match str_list(p, "inverses")?.as_slice() {
                [g, h] => Ok((g.clone(), h.clone())),
                _ => Err(bad("each inverses entry should be a pair")),
            })
            .collect::<Result<_>>()?,
    };
    FinCategory::new(objects, arrows, &compose, &identities, &inverses)
}

/// The endo-arrow at each object that the composition table treats as a
/// two-sided unit.
fn infer_identities(
    objects: &[String],
    arrows: &[(String, String, String)],
    compose: &[(String, String, String)],
) -> Result<HashMap<String, String>> {
    let table: HashMap<(&str, &str), &str> = compose.iter().map(|(g, f, gf)| ((g.as_str(), f.as_str()), gf.as_str())).collect();
    let mut out = HashMap::new();
    for o in objects {
        let unit = arrows.iter().find(|(e, s, d)| {
            s == o
                && d == o
                && arrows.iter().all(|(f, fs, fd)| {
                    (fd != o || table.get(&(e.as_str(), f.as_str())) == Some(&f.as_str()))
                        && (fs != o || table.get(&(f.as_str(), e.as_str())) == Some(&f.as_str()))
                })
        });
        match unit {
            Some((e, _, _)) => out.insert(o.clone(), e.clone()),
            None => return Err(Error::InvalidCategory(format!("no identity for object `{o}`"))),
        };
    }
    Ok(out)
}

pub fn set_sheaf_to_json(f: &SetSheaf) -> Value {
    let p = f.site();
    let stalks: Map<String, Value> = (0..p.len()).map(|x| (p.name(x).to_string(), json!(f.labels(x)))).collect();
    let maps: Map<String, Value> = f
        .hasse_maps()
        .into_iter()
        .map(|((x, y), m)| {
            let img: Vec<&str> = m.iter().map(|&s| f.label(y, s)).collect();
            (format!("{}<={}", p.name(x), p.name(y)), json!(img))
        })
        .collect();
    json!({"format": FORMAT, "site": poset_to_json(p), "flavor": "set", "stalks": stalks, "maps": maps})
}

pub fn mod_sheaf_to_json(f: &ModSheaf) -> Value {
    let p = f.site();
    let stalks: Map<String, Value> = (0..p.len())
        .map(|x| {
            let m = f.stalk(x);
            (p.name(x).to_string(), json!({"gens": m.gens(), "relations": m.relation_rows()}))
        })
        .collect();
    let maps: Map<String, Value> = f
        .hasse_maps()
        .into_iter()
        .map(|((x, y), m)| (format!("{}<={}", p.name(x), p.name(y)), json!(m.to_rows())))
        .collect();
    json!({
        "format": FORMAT, "site": poset_to_json(p), "flavor": "mod",
        "ring": f.ring().to_string(), "stalks": stalks, "maps": maps,
    })
}

pub fn sheaf_to_json(f: &AnySheaf) -> Value {
    match f {
        AnySheaf::Set(f) => set_sheaf_to_json(f),
        AnySheaf::Mod(f) => mod_sheaf_to_json(f),
    }
}

/// Reads a sheaf; `site` overrides (or stands in for) the embedded one.
pub fn sheaf_from_json(v: &Value, site: Option<&FinPoset>) -> Result<AnySheaf> {
    check_format(v)?;
    let p = match (site, v.get("site")) {
        (Some(p), _) => p.clone(),
        (None, Some(s)) => poset_from_json(s)?,
        (None, None) => return Err(bad("sheaf has no \"site\" and none was supplied")),
    };
    let stalks = field(v, "stalks")?.as_object().ok_or_else(|| bad("stalks should map points to stalks"))?;
    for k in stalks.keys() {
        p.index(k)?;
    }
    let stalk = |x: usize| stalks.get(p.name(x)).ok_or_else(|| bad(format!("no stalk for point {}", p.name(x))));
    let empty = Map::new();
    let maps = match v.get("maps") {
        Some(m) => m.as_object().ok_or_else(|| bad("maps should map \"x<=y\" to tables"))?,
        None => &empty,
    };
    let flavor = v.get("flavor").and_then(Value::as_str).unwrap_or("set");
    match flavor {
        "set" => {
            let labels: Vec<Vec<String>> = (0..p.len()).map(|x| str_list(stalk(x)?, "a set stalk")).collect::<Result<_>>()?;
            let mut table = HashMap::new();
            for (k, m) in maps {
                let (a, b) = edge_key(k)?;
                let (x, y) = (p.index(a)?, p.index(b)?);
                let img = str_list(m, "a set map")?;
                let f: Vec<u32> = img
                    .iter()
                    .map(|l| {
                        labels[y]
                            .iter()
                            .position(|t| t == l)
                            .map(|i| i as u32)
                            .ok_or_else(|| bad(format!("map {k} hits {l:?}, not in the stalk at {b}")))
                    })
                    .collect::<Result<_>>()?;
                table.insert((x, y), f);
            }
            Ok(AnySheaf::Set(SetSheaf::new(p, labels, &table)?))
        }
        "mod" => {
            let ring: Ring = field(v, "ring")?.as_str().ok_or_else(|| bad("ring should be a string"))?.parse()?;
            let mods: Vec<FPModule> = (0..p.len())
                .map(|x| {
                    let s = stalk(x)?;
                    if let Some(g) = s.as_u64() {
                        return Ok(FPModule::free(ring, g as usize));
                    }
                    let g = field(s, "gens")?.as_u64().ok_or_else(|| bad("gens should be a count"))? as usize;
                    let rels = match s.get("relations") {
                        Some(r) => int_rows(r, "relations")?,
                        None => Vec::new(),
                    };
                    if rels.iter().any(|r| r.len() != g) {
                        return Err(bad(format!("relations at {} need {g} entries", p.name(x))));
                    }
                    Ok(FPModule::new(ring, g, &rels))
                })
                .collect::<Result<_>>()?;
            let mut table = HashMap::new();
            for (k, m) in maps {
                let (a, b) = edge_key(k)?;
                let (x, y) = (p.index(a)?, p.index(b)?);
                let rows = int_rows(m, "a matrix")?;
                if rows.len() != mods[y].gens() || rows.iter().any(|r| r.len() != mods[x].gens()) {
                    return Err(Error::Shape(format!("map {k} should be {}x{}", mods[y].gens(), mods[x].gens())));
                }
                table.insert((x, y), IntMatrix::from_rows(&rows, mods[x].gens()));
            }
            Ok(AnySheaf::Mod(ModSheaf::new(p, ring, mods, &table)?))
        }
        other => Err(bad(format!("flavor {other:?} should be \"set\" or \"mod\""))),
    }
}

pub fn map_to_json(f: &MonotoneMap) -> Value {
    let assign: Map<String, Value> = (0..f.source().len())
        .map(|x| (f.source().name(x).to_string(), json!(f.target().name(f.apply(x)))))
        .collect();
    json!({"format": FORMAT, "source": poset_to_json(f.source()), "target": poset_to_json(f.target()), "assign": assign})
}

pub fn map_from_json(v: &Value) -> Result<MonotoneMap> {
    check_format(v)?;
    let s = poset_from_json(field(v, "source")?)?;
    let t = poset_from_json(field(v, "target")?)?;
    let pairs: HashMap<String, String> = field(v, "assign")?
        .as_object()
        .ok_or_else(|| bad("assign should map source points to target points"))?
        .iter()
        .map(|(k, a)| Ok((k.clone(), a.as_str().ok_or_else(|| bad("assigned points are names"))?.to_string())))
        .collect::<Result<_>>()?;
    MonotoneMap::by_names(s, t, &pairs)
}

pub fn presheaf_to_json(x: &Presheaf) -> Value {
    let c = x.category();
    let elements: Map<String, Value> = (0..c.num_objects()).map(|o| (c.objects()[o].clone(), json!(x.labels(o)))).collect();
    let action: Map<String, Value> = c
        .arrows()
        .iter()
        .enumerate()
        .map(|(f, a)| {
            let img: Vec<&str> = x.action(f).iter().map(|&v| x.labels(a.src)[v as usize].as_str()).collect();
            (a.name.clone(), json!(img))
        })
        .collect();
    json!({"format": FORMAT, "category": category_to_json(c), "elements": elements, "action": action})
}

/// `action[f]` lists `x·f` for each element `x` of the codomain of `f`.
pub fn presheaf_from_json(v: &Value, cat: Option<Arc<FinCategory>>) -> Result<Presheaf> {
    check_format(v)?;
    let c = match (cat, v.get("category")) {
        (Some(c), _) => c,
        (None, Some(c)) => Arc::new(category_from_json(c)?),
        (None, None) => return Err(bad("presheaf has no \"category\" and none was supplied")),
    };
    let el = field(v, "elements")?.as_object().ok_or_else(|| bad("elements should map objects to lists"))?;
    let labels: Vec<Vec<String>> = c
        .objects()
        .iter()
        .map(|o| str_list(el.get(o).ok_or_else(|| bad(format!("no elements for object {o}")))?, "elements"))
        .collect::<Result<_>>()?;
    let act = field(v, "action")?.as_object().ok_or_else(|| bad("action should map arrows to lists"))?;
    let mut action = Vec::with_capacity(c.num_arrows());
    for a in c.arrows() {
        let img = match act.get(&a.name) {
            Some(l) => str_list(l, "action")?,
            None if a.src == a.dst && c.identity(a.src) == c.arrow_index(&a.name).unwrap() => labels[a.dst].clone(),
            None => return Err(bad(format!("no action given for arrow {}", a.name))),
        };
        let f: Vec<u32> = img
            .iter()
            .map(|l| {
                labels[a.src]
                    .iter()
                    .position(|t| t == l)
                    .map(|i| i as u32)
                    .ok_or_else(|| bad(format!("action of {} hits {l:?}, not an element of {}", a.name, c.objects()[a.src])))
            })
            .collect::<Result<_>>()?;
        action.push(f);
    }
    Presheaf::new(c, labels, action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn poset_round_trip() {
        let v = parse(r#"{"points": ["x","y","a","b"], "le": [["x","a"],["x","b"],["y","a"],["y","b"]]}"#).unwrap();
        let p = poset_from_json(&v).unwrap();
        assert_eq!(poset_from_json(&poset_to_json(&p)).unwrap(), p);
        assert!(poset_from_json(&parse(r#"{"format": 2, "points": []}"#).unwrap()).is_err());
        assert!(poset_from_json(&parse(r#"{"points": ["a","b"], "le": [["a","b"],["b","a"]]}"#).unwrap()).is_err());
    }

    #[test]
    fn sheaves_round_trip() {
        for &s in corpus::SITE_NAMES {
            let p = corpus::site(s).unwrap();
            for h in ["const-Z", "const-Z4", "const-01", "omega", "godement-Z", "initial"] {
                let f = corpus::sheaf(&p, h).unwrap();
                let v = sheaf_to_json(&f);
                let g = sheaf_from_json(&v, None).unwrap();
                assert_eq!(sheaf_to_json(&g), v);
            }
        }
    }

    #[test]
    fn maps_and_presheaves_round_trip() {
        for (_, f) in corpus::maps().unwrap() {
            assert_eq!(map_from_json(&map_to_json(&f)).unwrap(), f);
        }
        let g = corpus::category("BG-Z2").unwrap();
        let reg = Presheaf::regular(g.clone()).unwrap();
        let v = presheaf_to_json(&reg);
        assert_eq!(presheaf_from_json(&v, None).unwrap(), reg);
        let mut bare = category_to_json(&g);
        bare.as_object_mut().unwrap().remove("identities");
        assert_eq!(&category_from_json(&bare).unwrap(), g.as_ref());
    }

    #[test]
    fn bad_maps_are_rejected() {
        let v = parse(
            r#"{"format": 1, "site": {"points": ["p0","p1"], "le": [["p0","p1"]]}, "flavor": "set",
                "stalks": {"p0": ["u"], "p1": ["v"]}, "maps": {"p0<=p1": ["w"]}}"#,
        )
        .unwrap();
        assert!(sheaf_from_json(&v, None).is_err());
        assert!(matches!(parse("{\n  \"points\": [,]\n}"), Err(Error::Parse { line: 2, .. })));
    }
}
