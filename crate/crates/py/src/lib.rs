//! Python bindings. Results with structure (reports, tables) come back as
//! plain dicts and lists.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::Value;

use flasque::flabby::{
    candidate_envelope, is_flabby_local, is_flabby_local_mod, is_flabby_traditional, is_flabby_traditional_mod,
    is_injective_field, is_strongly_flabby, is_strongly_flabby_mod, is_strongly_flabby_presheaf, FlabbyReport,
};
use flasque::homalg::{default_nmax, higher_direct_image, sheaf_cohomology, stalk_formula_check};
use flasque::internal::{internal_flabby, internal_flabby_presheaf, internal_injective_family, Formula, Structure};
use flasque::sheafcore::AnySheaf;
use flasque::{corpus, io, suite};

fn err(e: flasque::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn report<'py>(py: Python<'py>, r: &FlabbyReport) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(r).expect("report serializes"))
}

/// A finite poset with its Alexandrov topology (opens are up-sets).
#[pyclass(frozen, skip_from_py_object, module = "pyflasque")]
#[derive(Clone)]
struct Poset {
    inner: flasque::site::FinPoset,
}

#[pymethods]
impl Poset {
    #[new]
    fn new(points: Vec<String>, le: Vec<(String, String)>) -> PyResult<Poset> {
        let pts: Vec<&str> = points.iter().map(String::as_str).collect();
        let rel: Vec<(&str, &str)> = le.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Ok(Poset {
            inner: flasque::site::FinPoset::new(&pts, &rel).map_err(err)?,
        })
    }

    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Poset> {
        Ok(Poset {
            inner: corpus::site(name).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Poset> {
        let v = io::parse(text).map_err(err)?;
        Ok(Poset {
            inner: io::poset_from_json(&v).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        io::poset_to_json(&self.inner).to_string()
    }

    #[getter]
    fn points(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    fn le(&self, a: &str, b: &str) -> PyResult<bool> {
        let (x, y) = (self.inner.index(a).map_err(err)?, self.inner.index(b).map_err(err)?);
        Ok(self.inner.le(x, y))
    }

    /// Every open, as a sorted list of point names.
    fn opens(&self) -> PyResult<Vec<Vec<String>>> {
        Ok(self
            .inner
            .all_opens()
            .map_err(err)?
            .iter()
            .map(|u| self.inner.set_names(u.points()))
            .collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Poset({:?})", self.inner.names())
    }
}

/// A sheaf of sets or of modules on a poset.
#[pyclass(frozen, skip_from_py_object, module = "pyflasque")]
#[derive(Clone)]
struct Sheaf {
    inner: AnySheaf,
}

#[pymethods]
impl Sheaf {
    /// Built-in sheaves such as "const-Z", "const-01", "omega", "godement-Z".
    #[staticmethod]
    fn builtin(site: &Poset, name: &str) -> PyResult<Sheaf> {
        Ok(Sheaf {
            inner: corpus::sheaf(&site.inner, name).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (text, site=None))]
    fn from_json(text: &str, site: Option<&Poset>) -> PyResult<Sheaf> {
        let v = io::parse(text).map_err(err)?;
        Ok(Sheaf {
            inner: io::sheaf_from_json(&v, site.map(|p| &p.inner)).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        io::sheaf_to_json(&self.inner).to_string()
    }

    #[getter]
    fn site(&self) -> Poset {
        Poset {
            inner: self.inner.site().clone(),
        }
    }

    #[getter]
    fn flavor(&self) -> &'static str {
        match self.inner {
            AnySheaf::Set(_) => "set",
            AnySheaf::Mod(_) => "mod",
        }
    }

    /// `{"verdict": bool, "counterexample": {...}}` for mode traditional,
    /// local, strong or internal.
    #[pyo3(signature = (mode="traditional"))]
    fn flabby<'py>(&self, py: Python<'py>, mode: &str) -> PyResult<Bound<'py, PyAny>> {
        let r = match (&self.inner, mode) {
            (AnySheaf::Set(f), "traditional") => is_flabby_traditional(f),
            (AnySheaf::Set(f), "local") => is_flabby_local(f),
            (AnySheaf::Set(f), "strong") => is_strongly_flabby(f),
            (AnySheaf::Mod(f), "traditional") => is_flabby_traditional_mod(f),
            (AnySheaf::Mod(f), "local") => is_flabby_local_mod(f),
            (AnySheaf::Mod(f), "strong") => is_strongly_flabby_mod(f),
            (_, "internal") => {
                let v = match &self.inner {
                    AnySheaf::Set(f) => internal_flabby(f),
                    AnySheaf::Mod(f) => f.underlying_set_sheaf().and_then(|(s, _)| internal_flabby(&s)),
                }
                .map_err(err)?;
                return to_py(py, &serde_json::json!({"verdict": v}));
            }
            _ => return Err(PyValueError::new_err(format!("unknown mode {mode:?}"))),
        }
        .map_err(err)?;
        report(py, &r)
    }

    fn is_flabby(&self) -> PyResult<bool> {
        match &self.inner {
            AnySheaf::Set(f) => is_flabby_traditional(f),
            AnySheaf::Mod(f) => is_flabby_traditional_mod(f),
        }
        .map(|r| r.verdict)
        .map_err(err)
    }

    /// `{n: "Z (+) Z/2", ...}` for `n <= nmax`.
    #[pyo3(signature = (nmax=None))]
    fn cohomology(&self, nmax: Option<usize>) -> PyResult<BTreeMap<usize, String>> {
        let f = self.module()?;
        let n = nmax.unwrap_or_else(|| default_nmax(f.site()));
        let t = sheaf_cohomology(f, n).map_err(err)?;
        Ok(t.into_iter().map(|(k, g)| (k, g.to_string())).collect())
    }

    /// External injectivity over a prime field.
    fn is_injective(&self) -> PyResult<bool> {
        is_injective_field(self.module()?).map_err(err)
    }

    #[pyo3(signature = (bound=2))]
    fn internal_injective<'py>(&self, py: Python<'py>, bound: usize) -> PyResult<Bound<'py, PyAny>> {
        let r = internal_injective_family(self.module()?, bound).map_err(err)?;
        to_py(py, &serde_json::to_value(r).expect("report serializes"))
    }

    /// The candidate flabby envelope: whether the unit is a mono and the
    /// traditional verdict on the envelope.
    fn envelope<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let e = candidate_envelope(self.module()?).map_err(err)?;
        let flabby = e.flabby_traditional().map_err(err)?;
        to_py(py, &serde_json::json!({"mono": e.is_mono(), "flabby": flabby}))
    }

    /// Forcing of a closed formula at every point, with this sheaf as `X`.
    fn eval(&self, formula: &str) -> PyResult<BTreeMap<String, bool>> {
        let phi = Formula::parse_file(formula).map_err(err)?;
        let s = match &self.inner {
            AnySheaf::Set(s) => s.clone(),
            AnySheaf::Mod(m) => m.underlying_set_sheaf().map_err(err)?.0,
        };
        let mut st = Structure::on_poset(s.site());
        st.add_sheaf("X", &s).map_err(err)?;
        let names = s.site().names().to_vec();
        names
            .into_iter()
            .enumerate()
            .map(|(c, n)| Ok((n, st.force(&phi, c, &[]).map_err(err)?)))
            .collect()
    }

    /// Stalks of `Rⁿf⋆` along a built-in map, as `[{point: group}]`.
    #[pyo3(signature = (map, nmax=None))]
    fn higher_direct_images(&self, map: &str, nmax: Option<usize>) -> PyResult<Vec<BTreeMap<String, String>>> {
        let (f, m) = self.along(map)?;
        let n = nmax.unwrap_or_else(|| default_nmax(m.site()));
        let tgt = f.target();
        Ok(higher_direct_image(&f, m, n)
            .map_err(err)?
            .iter()
            .map(|r| {
                (0..tgt.len())
                    .map(|q| (tgt.name(q).to_string(), r.stalk(q).invariant_factors().to_string()))
                    .collect()
            })
            .collect())
    }

    /// Mismatches between `Rⁿf⋆` stalks and local cohomology; empty when
    /// the formula holds.
    #[pyo3(signature = (map, nmax=None))]
    fn stalk_formula_check<'py>(&self, py: Python<'py>, map: &str, nmax: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
        let (f, m) = self.along(map)?;
        let n = nmax.unwrap_or_else(|| default_nmax(m.site()));
        let bad = stalk_formula_check(&f, m, n).map_err(err)?;
        to_py(py, &serde_json::to_value(bad).expect("mismatches serialize"))
    }

    fn __repr__(&self) -> String {
        format!("Sheaf({})", self.to_json())
    }
}

impl Sheaf {
    fn module(&self) -> PyResult<&flasque::sheafcore::ModSheaf> {
        match &self.inner {
            AnySheaf::Mod(m) => Ok(m),
            AnySheaf::Set(_) => Err(PyValueError::new_err("expected a sheaf of modules")),
        }
    }

    fn along(&self, map: &str) -> PyResult<(flasque::site::MonotoneMap, &flasque::sheafcore::ModSheaf)> {
        let m = self.module()?;
        let f = corpus::maps()
            .map_err(err)?
            .into_iter()
            .find(|(n, _)| n == map)
            .map(|(_, f)| f)
            .ok_or_else(|| PyValueError::new_err(format!("no built-in map named {map:?}")))?;
        if f.source() != m.site() {
            return Err(PyValueError::new_err("the sheaf does not live on the source of the map"));
        }
        Ok((f, m))
    }
}

/// A presheaf of sets on a finite category, e.g. a G-set on BG.
#[pyclass(frozen, skip_from_py_object, module = "pyflasque")]
#[derive(Clone)]
struct Presheaf {
    inner: flasque::sheafcore::Presheaf,
}

#[pymethods]
impl Presheaf {
    #[staticmethod]
    fn builtin(category: &str, name: &str) -> PyResult<Presheaf> {
        let c = corpus::category(category).map_err(err)?;
        Ok(Presheaf {
            inner: corpus::presheaf(&c, name).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Presheaf> {
        let v = io::parse(text).map_err(err)?;
        Ok(Presheaf {
            inner: io::presheaf_from_json(&v, None).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        io::presheaf_to_json(&self.inner).to_string()
    }

    fn internal_flabby(&self) -> PyResult<bool> {
        internal_flabby_presheaf(&self.inner).map_err(err)
    }

    fn strongly_flabby(&self) -> PyResult<bool> {
        Ok(is_strongly_flabby_presheaf(&self.inner).map_err(err)?.0)
    }
}

/// Names of the built-in sites, categories, sheaves, presheaves and maps.
#[pyfunction]
fn builtins<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let maps: Vec<String> = corpus::maps().map_err(err)?.into_iter().map(|(n, _)| n).collect();
    to_py(
        py,
        &serde_json::json!({
            "sites": corpus::SITE_NAMES, "categories": corpus::CATEGORY_NAMES,
            "sheaves": corpus::SHEAF_NAMES, "presheaves": corpus::PRESHEAF_NAMES, "maps": maps,
        }),
    )
}

/// All set sheaves with stalks of size at most `k` on posets with at most
/// `n` points, up to isomorphism.
#[pyfunction]
#[pyo3(signature = (n, k, force=false))]
fn enumerate_corpus(n: usize, k: usize, force: bool) -> PyResult<Vec<Sheaf>> {
    Ok(corpus::enumerate_corpus(n, k, force)
        .map_err(err)?
        .map(|(_, f)| Sheaf {
            inner: AnySheaf::Set(f),
        })
        .collect())
}

/// Runs the property battery and returns its report.
#[pyfunction]
#[pyo3(signature = (max_points=3, max_stalk=2, max_dim=1, vect_points=2, primes=vec![2], only=None))]
fn run_suite<'py>(
    py: Python<'py>,
    max_points: usize,
    max_stalk: usize,
    max_dim: usize,
    vect_points: usize,
    primes: Vec<u32>,
    only: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = suite::SuiteConfig {
        max_points,
        max_stalk,
        max_dim,
        vect_points,
        primes,
        only,
    };
    let r = py.detach(|| suite::run_suite(&cfg)).map_err(err)?;
    to_py(py, &serde_json::to_value(r).expect("report serializes"))
}

#[pymodule]
fn pyflasque(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Poset>()?;
    m.add_class::<Sheaf>()?;
    m.add_class::<Presheaf>()?;
    m.add_function(wrap_pyfunction!(builtins, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
