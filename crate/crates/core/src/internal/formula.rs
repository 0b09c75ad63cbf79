//! Bounded first-order formulas and their S-expression syntax.
//!
//! ```text
//! (forall (K (P1 X)) (exists (x X) (forall (y X) (imp (in y K) (eq y x)))))
//! ```

use std::fmt;

use crate::error::{Error, Result};

/// The bound of a quantifier: an object, or the subterminals of one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Obj(String),
    P1(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bot,
    Eq(String, String),
    /// `y ∈ K` for `K` of sort `P1(X)` and `y` of sort `X`.
    In(String, String),
    Rel(String, Vec<String>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Forall(String, Sort, Box<Formula>),
    Exists(String, Sort, Box<Formula>),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(vec![a, b])
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![a, b])
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn forall(v: &str, s: Sort, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), s, Box::new(body))
    }

    pub fn exists(v: &str, s: Sort, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), s, Box::new(body))
    }

    pub fn atom(r: &str, args: &[&str]) -> Formula {
        Formula::Rel(r.to_string(), args.iter().map(|s| s.to_string()).collect())
    }

    pub fn eq(a: &str, b: &str) -> Formula {
        Formula::Eq(a.to_string(), b.to_string())
    }

    /// `∀K ∈ P≤1(X). ∃x ∈ X. ∀y ∈ X. (y ∈ K → y = x)`.
    pub fn flabby(x: &str) -> Formula {
        Formula::forall(
            "K",
            Sort::P1(x.to_string()),
            Formula::exists(
                "x",
                Sort::Obj(x.to_string()),
                Formula::forall(
                    "y",
                    Sort::Obj(x.to_string()),
                    Formula::imp(Formula::In("y".into(), "K".into()), Formula::eq("y", "x")),
                ),
            ),
        )
    }

    pub fn parse(src: &str) -> Result<Formula> {
        let sx = parse_sexp(src)?;
        to_formula(&sx)
    }

    /// Like [`Formula::parse`], also accepting a versioned file
    /// `(format 1 φ)`.
    pub fn parse_file(src: &str) -> Result<Formula> {
        let sx = parse_sexp(src)?;
        if let Sexp::List(items, _, _) = &sx {
            if let [Sexp::Atom(h, _, _), v, body] = items.as_slice() {
                if h == "format" {
                    if v.atom()? != "1" {
                        return Err(v.err("unsupported format version, expected 1"));
                    }
                    return to_formula(body);
                }
            }
        }
        to_formula(&sx)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Obj(x) => write!(f, "{x}"),
            Sort::P1(x) => write!(f, "(P1 {x})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, xs: &[Formula]| -> fmt::Result {
            write!(f, "({head}")?;
            for x in xs {
                write!(f, " {x}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::Top => write!(f, "true"),
            Formula::Bot => write!(f, "false"),
            Formula::Eq(a, b) => write!(f, "(eq {a} {b})"),
            Formula::In(a, b) => write!(f, "(in {a} {b})"),
            Formula::Rel(r, args) => {
                write!(f, "(rel {r}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Formula::And(xs) => list(f, "and", xs),
            Formula::Or(xs) => list(f, "or", xs),
            Formula::Imp(a, b) => write!(f, "(imp {a} {b})"),
            Formula::Not(a) => write!(f, "(not {a})"),
            Formula::Forall(v, s, b) => write!(f, "(forall ({v} {s}) {b})"),
            Formula::Exists(v, s, b) => write!(f, "(exists ({v} {s}) {b})"),
        }
    }
}

#[derive(Clone, Debug)]
enum Sexp {
    Atom(String, usize, usize),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, column) = self.pos();
        Error::Parse {
            line,
            column,
            message: msg.into(),
        }
    }

    fn atom(&self) -> Result<&str> {
        match self {
            Sexp::Atom(a, _, _) => Ok(a),
            _ => Err(self.err("expected a name")),
        }
    }
}

fn parse_sexp(src: &str) -> Result<Sexp> {
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = Vec::new();
    let mut done: Option<Sexp> = None;
    let (mut line, mut col) = (1, 0);
    let mut chars = src.chars().peekable();
    let err = |line, column, m: &str| Error::Parse {
        line,
        column,
        message: m.to_string(),
    };
    while let Some(ch) = chars.next() {
        col += 1;
        let here = (line, col);
        match ch {
            '\n' => {
                line += 1;
                col = 0;
            }
            ';' => {
                // comment to end of line
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            c if c.is_whitespace() => {}
            '(' => {
                if done.is_some() {
                    return Err(err(line, col, "trailing input after the formula"));
                }
                stack.push((Vec::new(), here.0, here.1));
            }
            ')' => {
                let Some((items, l, c)) = stack.pop() else {
                    return Err(err(line, col, "unbalanced `)`"));
                };
                let s = Sexp::List(items, l, c);
                match stack.last_mut() {
                    Some(top) => top.0.push(s),
                    None => done = Some(s),
                }
            }
            _ => {
                let mut name = ch.to_string();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    name.push(c);
                    chars.next();
                    col += 1;
                }
                let s = Sexp::Atom(name, here.0, here.1);
                match stack.last_mut() {
                    Some(top) => top.0.push(s),
                    None if done.is_none() => done = Some(s),
                    None => return Err(err(here.0, here.1, "trailing input after the formula")),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.last() {
        return Err(err(*l, *c, "unclosed `(`"));
    }
    done.ok_or_else(|| err(line, col.max(1), "empty input"))
}

fn to_sort(s: &Sexp) -> Result<Sort> {
    match s {
        Sexp::Atom(a, _, _) => Ok(Sort::Obj(a.clone())),
        Sexp::List(items, _, _) => match items.as_slice() {
            [h, x] if h.atom()? == "P1" => Ok(Sort::P1(x.atom()?.to_string())),
            _ => Err(s.err("expected an object name or (P1 X)")),
        },
    }
}

fn binders(s: &Sexp) -> Result<Vec<(String, Sort)>> {
    let Sexp::List(items, _, _) = s else {
        return Err(s.err("expected a binder (x X)"));
    };
    match items.as_slice() {
        [Sexp::Atom(v, _, _), sort] => Ok(vec![(v.clone(), to_sort(sort)?)]),
        _ => {
            let mut out = Vec::new();
            for b in items {
                out.extend(binders(b)?);
            }
            if out.is_empty() {
                return Err(s.err("empty binder list"));
            }
            Ok(out)
        }
    }
}

fn to_formula(s: &Sexp) -> Result<Formula> {
    match s {
        Sexp::Atom(a, _, _) => match a.as_str() {
            "true" | "top" => Ok(Formula::Top),
            "false" | "bot" => Ok(Formula::Bot),
            // a nullary relation symbol
            _ => Ok(Formula::Rel(a.clone(), Vec::new())),
        },
        Sexp::List(items, _, _) => {
            let Some((head, rest)) = items.split_first() else {
                return Err(s.err("empty list"));
            };
            let h = head.atom()?;
            let names = |xs: &[Sexp]| -> Result<Vec<String>> { xs.iter().map(|x| x.atom().map(str::to_string)).collect() };
            let arity = |n: usize| -> Result<()> {
                if rest.len() == n {
                    Ok(())
                } else {
                    Err(s.err(format!("`{h}` takes {n} arguments, got {}", rest.len())))
                }
            };
            match h {
                "eq" => {
                    arity(2)?;
                    Ok(Formula::Eq(rest[0].atom()?.into(), rest[1].atom()?.into()))
                }
                "in" => {
                    arity(2)?;
                    Ok(Formula::In(rest[0].atom()?.into(), rest[1].atom()?.into()))
                }
                "rel" => {
                    let Some((r, args)) = rest.split_first() else {
                        return Err(s.err("`rel` needs a relation name"));
                    };
                    Ok(Formula::Rel(r.atom()?.into(), names(args)?))
                }
                "and" | "or" => {
                    let xs = rest.iter().map(to_formula).collect::<Result<Vec<_>>>()?;
                    Ok(if h == "and" { Formula::And(xs) } else { Formula::Or(xs) })
                }
                "imp" => {
                    arity(2)?;
                    Ok(Formula::imp(to_formula(&rest[0])?, to_formula(&rest[1])?))
                }
                "iff" => {
                    arity(2)?;
                    let (a, b) = (to_formula(&rest[0])?, to_formula(&rest[1])?);
                    Ok(Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a)))
                }
                "not" => {
                    arity(1)?;
                    Ok(Formula::not(to_formula(&rest[0])?))
                }
                "forall" | "exists" => {
                    arity(2)?;
                    let mut body = to_formula(&rest[1])?;
                    for (v, sort) in binders(&rest[0])?.into_iter().rev() {
                        body = if h == "forall" {
                            Formula::Forall(v, sort, Box::new(body))
                        } else {
                            Formula::Exists(v, sort, Box::new(body))
                        };
                    }
                    Ok(body)
                }
                "true" | "false" | "top" | "bot" => Err(head.err(format!("`{h}` is a constant, not an operator"))),
                r => Ok(Formula::Rel(r.to_string(), names(rest)?)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_flabbiness_formula() {
        let src = "(forall (K (P1 X)) (exists (x X) (forall (y X) (imp (in y K) (eq y x)))))";
        let f = Formula::parse(src).unwrap();
        assert_eq!(f, Formula::flabby("X"));
        assert_eq!(f.to_string(), src);
        assert_eq!(Formula::parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn multiple_binders_and_relations() {
        let f = Formula::parse("(forall ((x X) (y X)) (or (eq x y) (not (eq x y))))").unwrap();
        assert!(matches!(f, Formula::Forall(ref v, _, _) if v == "x"));
        let g = Formula::parse("(imp (R x) p)").unwrap();
        assert_eq!(g, Formula::imp(Formula::atom("R", &["x"]), Formula::atom("p", &[])));
    }

    #[test]
    fn errors_carry_positions() {
        match Formula::parse("(and true\n  (eq x))") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        match Formula::parse("(and true") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 1)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Formula::parse(")"), Err(Error::Parse { .. })));
        assert!(matches!(Formula::parse("true false"), Err(Error::Parse { .. })));
        assert!(matches!(Formula::parse(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn versioned_files() {
        let a = Formula::parse_file("; flabby\n(format 1 (exists (x X) true))").unwrap();
        assert_eq!(a, Formula::parse("(exists (x X) true)").unwrap());
        assert!(Formula::parse_file("(format 2 true)").is_err());
        assert_eq!(Formula::parse_file("(imp p p)").unwrap(), Formula::parse("(imp p p)").unwrap());
    }
}
