//! Forcing at representable stages.
//!
//! Every value lives in a presheaf on a finite category; a poset `P` is
//! read as the category with an arrow `q → p` for each `p ≤ q`. Covers of
//! a representable always contain a split epimorphism (for posets, the
//! identity among the minimal opens), so `∃` and `∨` are decided by a
//! witness at the stage itself, while `→` and `∀` range over every arrow
//! into the stage.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flabby::subterminal::presheaf_subterminals;
use crate::sheafcore::{Presheaf, SetSheaf};
use crate::site::{FinCategory, FinPoset};

use super::formula::{Formula, Sort};

/// A subobject of a product of objects, as tuples per stage.
#[derive(Clone, Debug)]
pub struct Relation {
    pub sorts: Vec<String>,
    pub tuples: Vec<HashSet<Vec<u32>>>,
}

#[derive(Clone, Debug)]
struct P1Data {
    object: Presheaf,
    /// `(y, K)` with `y ∈ K`, per stage.
    member: Vec<HashSet<(u32, u32)>>,
}

/// Objects and relations interpreting the symbols of formulas.
#[derive(Clone, Debug)]
pub struct Structure {
    cat: Arc<FinCategory>,
    objects: BTreeMap<String, Presheaf>,
    relations: BTreeMap<String, Relation>,
    p1: BTreeMap<String, P1Data>,
}

impl Structure {
    pub fn new(cat: Arc<FinCategory>) -> Structure {
        Structure {
            cat,
            objects: BTreeMap::new(),
            relations: BTreeMap::new(),
            p1: BTreeMap::new(),
        }
    }

    pub fn on_poset(site: &FinPoset) -> Structure {
        Structure::new(Arc::new(FinCategory::from_poset(site)))
    }

    pub fn category(&self) -> &Arc<FinCategory> {
        &self.cat
    }

    pub fn object(&self, name: &str) -> Option<&Presheaf> {
        self.objects.get(name)
    }

    pub fn add_object(&mut self, name: &str, x: Presheaf) -> Result<()> {
        if **x.category() != *self.cat {
            return Err(Error::Shape(format!("object {name} lives on another category")));
        }
        self.p1.remove(name);
        self.objects.insert(name.to_string(), x);
        Ok(())
    }

    pub fn add_sheaf(&mut self, name: &str, x: &SetSheaf) -> Result<()> {
        let p = Presheaf::from_set_sheaf(x, self.cat.clone());
        self.add_object(name, p)
    }

    /// A relation on objects `sorts`; it must be stable under every arrow.
    pub fn add_relation(&mut self, name: &str, sorts: &[&str], tuples: Vec<HashSet<Vec<u32>>>) -> Result<()> {
        let objs = sorts
            .iter()
            .map(|s| self.objects.get(*s).ok_or_else(|| Error::IllTyped(format!("unknown object {s}"))))
            .collect::<Result<Vec<_>>>()?;
        if tuples.len() != self.cat.num_objects() {
            return Err(Error::Shape(format!("relation {name} needs one tuple set per stage")));
        }
        for (c, ts) in tuples.iter().enumerate() {
            for t in ts {
                if t.len() != objs.len() || t.iter().zip(&objs).any(|(&v, o)| v as usize >= o.size(c)) {
                    return Err(Error::Shape(format!("bad tuple {t:?} in relation {name}")));
                }
                for &a in self.cat.arrows_into(c) {
                    let d = self.cat.arrow(a).src;
                    let r: Vec<u32> = t.iter().zip(&objs).map(|(&v, o)| o.act(a, v)).collect();
                    if !tuples[d].contains(&r) {
                        return Err(Error::Input(format!(
                            "relation {name} is not stable under {}",
                            self.cat.arrow(a).name
                        )));
                    }
                }
            }
        }
        self.relations.insert(
            name.to_string(),
            Relation {
                sorts: sorts.iter().map(|s| s.to_string()).collect(),
                tuples,
            },
        );
        Ok(())
    }

    /// A nullary relation: the set of stages where it holds (a sieve).
    pub fn add_proposition(&mut self, name: &str, sieve: u64) -> Result<()> {
        let tuples = (0..self.cat.num_objects())
            .map(|c| {
                if sieve >> c & 1 == 1 {
                    std::iter::once(Vec::new()).collect()
                } else {
                    HashSet::new()
                }
            })
            .collect();
        self.add_relation(name, &[], tuples)
    }

    fn ensure_p1(&mut self, name: &str) -> Result<()> {
        if self.p1.contains_key(name) {
            return Ok(());
        }
        let x = self
            .objects
            .get(name)
            .ok_or_else(|| Error::IllTyped(format!("unknown object {name}")))?;
        let subs = presheaf_subterminals(x);
        let member = subs.generic_subterminal().into_iter().map(|v| v.into_iter().collect()).collect();
        self.p1.insert(
            name.to_string(),
            P1Data {
                object: subs.object,
                member,
            },
        );
        Ok(())
    }

    /// The subterminal object of a named object.
    pub fn p1_object(&mut self, name: &str) -> Result<&Presheaf> {
        self.ensure_p1(name)?;
        Ok(&self.p1[name].object)
    }

    /// Compiles `φ` with the given free variables for repeated forcing.
    pub fn session(&mut self, phi: &Formula, free: &[(&str, Sort)]) -> Result<Session<'_>> {
        let mut sorts = Vec::new();
        collect_p1(phi, &mut sorts);
        for (_, s) in free {
            if let Sort::P1(x) = s {
                sorts.push(x.clone());
            }
        }
        for x in sorts {
            self.ensure_p1(&x)?;
        }
        Session::compile(self, phi, free)
    }

    pub fn force(&mut self, phi: &Formula, stage: usize, env: &[(&str, Sort, u32)]) -> Result<bool> {
        let free: Vec<(&str, Sort)> = env.iter().map(|(v, s, _)| (*v, s.clone())).collect();
        let vals: Vec<u32> = env.iter().map(|e| e.2).collect();
        let mut s = self.session(phi, &free)?;
        s.force(stage, &vals)
    }

    /// `φ` (closed) is forced at every stage.
    pub fn holds_globally(&mut self, phi: &Formula) -> Result<bool> {
        Ok(self.failing_stage(phi)?.is_none())
    }

    pub fn failing_stage(&mut self, phi: &Formula) -> Result<Option<usize>> {
        let n = self.cat.num_objects();
        let mut s = self.session(phi, &[])?;
        for c in 0..n {
            if !s.force(c, &[])? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }
}

fn collect_p1(phi: &Formula, out: &mut Vec<String>) {
    match phi {
        Formula::Forall(_, s, b) | Formula::Exists(_, s, b) => {
            if let Sort::P1(x) = s {
                out.push(x.clone());
            }
            collect_p1(b, out);
        }
        Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| collect_p1(x, out)),
        Formula::Imp(a, b) => {
            collect_p1(a, out);
            collect_p1(b, out);
        }
        Formula::Not(a) => collect_p1(a, out),
        _ => {}
    }
}

#[derive(Clone, Debug)]
enum Node {
    Top,
    Bot,
    Eq(usize, usize),
    In(usize, usize, usize),
    Rel(usize, Vec<usize>),
    And(Vec<usize>),
    Or(Vec<usize>),
    Imp(usize, usize),
    Forall(usize, usize, usize),
    Exists(usize, usize, usize),
}

/// A compiled formula with a memo table on `(node, stage, free values)`.
pub struct Session<'a> {
    cat: &'a FinCategory,
    /// Carriers: objects and subterminal objects used by the formula.
    carriers: Vec<&'a Presheaf>,
    members: Vec<Option<&'a Vec<HashSet<(u32, u32)>>>>,
    relations: Vec<&'a Relation>,
    nodes: Vec<Node>,
    /// Free slots of each node, ascending.
    free: Vec<Vec<usize>>,
    slot_carrier: Vec<usize>,
    root: usize,
    nfree: usize,
    memo: HashMap<(u32, u32, Vec<u32>), bool>,
}

struct Compiler<'a> {
    st: &'a Structure,
    carriers: Vec<&'a Presheaf>,
    carrier_key: Vec<Sort>,
    members: Vec<Option<&'a Vec<HashSet<(u32, u32)>>>>,
    relations: Vec<&'a Relation>,
    relation_names: Vec<String>,
    nodes: Vec<Node>,
    free: Vec<Vec<usize>>,
    slot_carrier: Vec<usize>,
    slot_sort: Vec<Sort>,
}

impl<'a> Compiler<'a> {
    fn carrier(&mut self, s: &Sort) -> Result<usize> {
        if let Some(i) = self.carrier_key.iter().position(|k| k == s) {
            return Ok(i);
        }
        let (p, m) = match s {
            Sort::Obj(x) => (
                self.st
                    .objects
                    .get(x)
                    .ok_or_else(|| Error::IllTyped(format!("unknown object {x}")))?,
                None,
            ),
            Sort::P1(x) => {
                let d = &self.st.p1[x];
                (&d.object, Some(&d.member))
            }
        };
        self.carriers.push(p);
        self.members.push(m);
        self.carrier_key.push(s.clone());
        Ok(self.carriers.len() - 1)
    }

    fn bind(&mut self, v: &str, s: &Sort, scope: &[(String, usize)]) -> Result<usize> {
        if scope.iter().any(|(n, _)| n == v) {
            return Err(Error::IllTyped(format!("variable {v} is bound twice")));
        }
        let c = self.carrier(s)?;
        self.slot_carrier.push(c);
        self.slot_sort.push(s.clone());
        Ok(self.slot_carrier.len() - 1)
    }

    fn push(&mut self, n: Node, free: Vec<usize>) -> usize {
        self.nodes.push(n);
        self.free.push(free);
        self.nodes.len() - 1
    }

    fn lookup(scope: &[(String, usize)], v: &str) -> Result<usize> {
        scope
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|e| e.1)
            .ok_or_else(|| Error::IllTyped(format!("unbound variable {v}")))
    }

    fn union(parts: &[&Vec<usize>]) -> Vec<usize> {
        let mut out: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn go(&mut self, phi: &Formula, scope: &mut Vec<(String, usize)>) -> Result<usize> {
        Ok(match phi {
            Formula::Top => self.push(Node::Top, vec![]),
            Formula::Bot => self.push(Node::Bot, vec![]),
            Formula::Eq(a, b) => {
                let (sa, sb) = (Self::lookup(scope, a)?, Self::lookup(scope, b)?);
                if self.slot_sort[sa] != self.slot_sort[sb] {
                    return Err(Error::IllTyped(format!(
                        "{a} : {} and {b} : {} cannot be compared",
                        self.slot_sort[sa], self.slot_sort[sb]
                    )));
                }
                self.push(Node::Eq(sa, sb), Self::union(&[&vec![sa, sb]]))
            }
            Formula::In(y, k) => {
                let (sy, sk) = (Self::lookup(scope, y)?, Self::lookup(scope, k)?);
                match (&self.slot_sort[sy], &self.slot_sort[sk]) {
                    (Sort::Obj(x), Sort::P1(z)) if x == z => {}
                    (a, b) => return Err(Error::IllTyped(format!("{y} : {a} cannot be a member of {k} : {b}"))),
                }
                let c = self.slot_carrier[sk];
                self.push(Node::In(sy, sk, c), Self::union(&[&vec![sy, sk]]))
            }
            Formula::Rel(r, args) => {
                let rel = self
                    .st
                    .relations
                    .get(r)
                    .ok_or_else(|| Error::IllTyped(format!("unknown relation {r}")))?;
                if rel.sorts.len() != args.len() {
                    return Err(Error::IllTyped(format!(
                        "relation {r} takes {} arguments, got {}",
                        rel.sorts.len(),
                        args.len()
                    )));
                }
                let slots = args.iter().map(|a| Self::lookup(scope, a)).collect::<Result<Vec<_>>>()?;
                for ((a, &s), want) in args.iter().zip(&slots).zip(&rel.sorts) {
                    if self.slot_sort[s] != Sort::Obj(want.clone()) {
                        return Err(Error::IllTyped(format!("argument {a} of {r} should have sort {want}")));
                    }
                }
                let ri = match self.relation_names.iter().position(|n| n == r) {
                    Some(i) => i,
                    None => {
                        self.relations.push(rel);
                        self.relation_names.push(r.clone());
                        self.relations.len() - 1
                    }
                };
                let free = Self::union(&[&slots]);
                self.push(Node::Rel(ri, slots), free)
            }
            Formula::And(xs) | Formula::Or(xs) => {
                let kids = xs.iter().map(|x| self.go(x, scope)).collect::<Result<Vec<_>>>()?;
                let free = Self::union(&kids.iter().map(|&k| &self.free[k]).collect::<Vec<_>>());
                let n = if matches!(phi, Formula::And(_)) {
                    Node::And(kids)
                } else {
                    Node::Or(kids)
                };
                self.push(n, free)
            }
            Formula::Imp(a, b) => {
                let (ka, kb) = (self.go(a, scope)?, self.go(b, scope)?);
                let free = Self::union(&[&self.free[ka], &self.free[kb]]);
                self.push(Node::Imp(ka, kb), free)
            }
            Formula::Not(a) => {
                let ka = self.go(a, scope)?;
                let kb = self.push(Node::Bot, vec![]);
                let free = self.free[ka].clone();
                self.push(Node::Imp(ka, kb), free)
            }
            Formula::Forall(v, s, b) | Formula::Exists(v, s, b) => {
                let slot = self.bind(v, s, scope)?;
                scope.push((v.clone(), slot));
                let kb = self.go(b, scope)?;
                scope.pop();
                let free: Vec<usize> = self.free[kb].iter().copied().filter(|&x| x != slot).collect();
                let c = self.slot_carrier[slot];
                let n = if matches!(phi, Formula::Forall(..)) {
                    Node::Forall(slot, c, kb)
                } else {
                    Node::Exists(slot, c, kb)
                };
                self.push(n, free)
            }
        })
    }
}

impl<'a> Session<'a> {
    fn compile(st: &'a Structure, phi: &Formula, free: &[(&str, Sort)]) -> Result<Session<'a>> {
        let mut c = Compiler {
            st,
            carriers: Vec::new(),
            carrier_key: Vec::new(),
            members: Vec::new(),
            relations: Vec::new(),
            relation_names: Vec::new(),
            nodes: Vec::new(),
            free: Vec::new(),
            slot_carrier: Vec::new(),
            slot_sort: Vec::new(),
        };
        let mut scope = Vec::new();
        for (v, s) in free {
            let slot = c.bind(v, s, &scope)?;
            scope.push((v.to_string(), slot));
        }
        let root = c.go(phi, &mut scope)?;
        Ok(Session {
            cat: &st.cat,
            carriers: c.carriers,
            members: c.members,
            relations: c.relations,
            nodes: c.nodes,
            free: c.free,
            slot_carrier: c.slot_carrier,
            root,
            nfree: free.len(),
            memo: HashMap::new(),
        })
    }

    /// Forces the compiled formula at `stage` with values for the free
    /// variables, in declaration order.
    pub fn force(&mut self, stage: usize, values: &[u32]) -> Result<bool> {
        if values.len() != self.nfree || stage >= self.cat.num_objects() {
            return Err(Error::Shape("stage or environment does not fit the formula".into()));
        }
        for (s, &v) in values.iter().enumerate() {
            if v as usize >= self.carriers[self.slot_carrier[s]].size(stage) {
                return Err(Error::Shape(format!("value {v} outside its stalk")));
            }
        }
        let mut env = vec![0u32; self.slot_carrier.len()];
        env[..values.len()].copy_from_slice(values);
        Ok(self.eval(self.root, stage, &mut env))
    }

    fn restricted(&self, node: usize, a: usize, env: &[u32]) -> Vec<u32> {
        let mut e = env.to_vec();
        for &s in &self.free[node] {
            e[s] = self.carriers[self.slot_carrier[s]].act(a, env[s]);
        }
        e
    }

    fn eval(&mut self, node: usize, c: usize, env: &mut Vec<u32>) -> bool {
        match &self.nodes[node] {
            Node::Top => return true,
            Node::Bot => return false,
            &Node::Eq(a, b) => return env[a] == env[b],
            &Node::In(y, k, car) => return self.members[car].unwrap()[c].contains(&(env[y], env[k])),
            Node::Rel(r, slots) => {
                let t: Vec<u32> = slots.iter().map(|&s| env[s]).collect();
                return self.relations[*r].tuples[c].contains(&t);
            }
            _ => {}
        }
        let key = (
            node as u32,
            c as u32,
            self.free[node].iter().map(|&s| env[s]).collect::<Vec<u32>>(),
        );
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let cat = self.cat;
        let v = match self.nodes[node].clone() {
            Node::And(kids) => kids.iter().all(|&k| self.eval(k, c, env)),
            Node::Or(kids) => kids.iter().any(|&k| self.eval(k, c, env)),
            Node::Imp(a, b) => cat.arrows_into(c).iter().all(|&f| {
                let d = cat.arrow(f).src;
                let mut e = self.restricted(node, f, env);
                !self.eval(a, d, &mut e) || self.eval(b, d, &mut e)
            }),
            Node::Forall(slot, car, body) => cat.arrows_into(c).iter().all(|&f| {
                let d = cat.arrow(f).src;
                let mut e = self.restricted(node, f, env);
                (0..self.carriers[car].size(d) as u32).all(|v| {
                    e[slot] = v;
                    self.eval(body, d, &mut e)
                })
            }),
            Node::Exists(slot, car, body) => {
                let saved = env[slot];
                let r = (0..self.carriers[car].size(c) as u32).any(|v| {
                    env[slot] = v;
                    self.eval(body, c, env)
                });
                env[slot] = saved;
                r
            }
            _ => unreachable!(),
        };
        self.memo.insert(key, v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sierpinski() -> FinPoset {
        FinPoset::new(&["p0", "p1"], &[("p0", "p1")]).unwrap()
    }

    #[test]
    fn trivial_formulas() {
        let s = sierpinski();
        let mut st = Structure::on_poset(&s);
        st.add_sheaf("X", &SetSheaf::constant(&s, &["0", "1"])).unwrap();
        assert!(st.holds_globally(&Formula::Top).unwrap());
        assert!(!st.holds_globally(&Formula::Bot).unwrap());
        let f = Formula::parse("(exists (x X) (eq x x))").unwrap();
        assert!(st.holds_globally(&f).unwrap());
    }

    #[test]
    fn empty_stalk_has_no_witness() {
        let s = sierpinski();
        let mut st = Structure::on_poset(&s);
        st.add_sheaf("F", &SetSheaf::initial(&s)).unwrap();
        let f = Formula::parse("(exists (x F) true)").unwrap();
        assert!(!st.force(&f, 1, &[]).unwrap());
    }

    #[test]
    fn decidable_equality_fails_for_a_collapsing_sheaf() {
        let pt = FinPoset::new(&["o"], &[]).unwrap();
        let lem = Formula::parse("(forall ((x X) (y X)) (or (eq x y) (not (eq x y))))").unwrap();
        let mut st = Structure::on_poset(&pt);
        st.add_sheaf("X", &SetSheaf::constant(&pt, &["0", "1"])).unwrap();
        assert!(st.holds_globally(&lem).unwrap());

        let s = sierpinski();
        let mut maps = HashMap::new();
        maps.insert((0, 1), vec![0, 0]);
        let x = SetSheaf::from_sizes(s.clone(), &[2, 1], &maps).unwrap();
        let mut st = Structure::on_poset(&s);
        st.add_sheaf("X", &x).unwrap();
        assert_eq!(st.failing_stage(&lem).unwrap(), Some(0));
    }

    #[test]
    fn typing_errors() {
        let s = sierpinski();
        let mut st = Structure::on_poset(&s);
        st.add_sheaf("X", &SetSheaf::terminal(&s)).unwrap();
        st.add_sheaf("Y", &SetSheaf::terminal(&s)).unwrap();
        for src in [
            "(eq x x)",
            "(forall (x X) (forall (x X) true))",
            "(forall ((x X) (y Y)) (eq x y))",
            "(forall (x Z) true)",
            "(forall (x X) (R x))",
            "(forall ((x X) (K (P1 Y))) (in x K))",
        ] {
            let f = Formula::parse(src).unwrap();
            assert!(matches!(st.holds_globally(&f), Err(Error::IllTyped(_))), "{src}");
        }
    }

    #[test]
    fn monotone_in_the_stage() {
        let s = sierpinski();
        let mut st = Structure::on_poset(&s);
        st.add_proposition("p", 0b10).unwrap();
        let f = Formula::parse("p").unwrap();
        // stage index = point index on posets
        assert!(!st.force(&f, 0, &[]).unwrap());
        assert!(st.force(&f, 1, &[]).unwrap());
        let nn = Formula::parse("(not (not p))").unwrap();
        assert!(st.holds_globally(&nn).unwrap());
        assert!(st.add_proposition("q", 0b01).is_err());
    }
}
