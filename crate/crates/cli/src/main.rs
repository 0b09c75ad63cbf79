use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use flasque::corpus;
use flasque::flabby::{
    injectivity_obstruction, is_flabby_local, is_flabby_local_mod, is_flabby_traditional, is_flabby_traditional_mod,
    is_strongly_flabby, is_strongly_flabby_mod, is_strongly_flabby_presheaf, FlabbyReport,
};
use flasque::homalg::{default_nmax, higher_direct_image, sheaf_cohomology, stalk_formula_check, CohomologyTable};
use flasque::internal::{internal_flabby, internal_flabby_presheaf, internal_injective_family, Formula, Structure};
use flasque::io;
use flasque::sheafcore::{AnySheaf, ModSheaf, Presheaf};
use flasque::site::{FinCategory, FinPoset, MonotoneMap};
use flasque::suite::{run_suite, SuiteConfig};
use flasque::{Error, Result};

#[derive(Parser)]
#[command(name = "flabby", version, about = "Flabby sheaves, forcing and cohomology on finite posets")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide flabbiness of a sheaf or presheaf.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Mode::Traditional)]
        mode: Mode,
    },
    /// Decide injectivity over a prime field and run the internal family test.
    Injective {
        #[command(flatten)]
        input: Input,
        /// Stalk dimension bound of the internal test family.
        #[arg(long, default_value_t = 2)]
        bound: usize,
    },
    /// Sheaf cohomology from a Godement resolution.
    Cohomology {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Higher direct images along a monotone map.
    Rderived {
        /// Map file, or the name of a built-in map.
        #[arg(long)]
        map: String,
        /// Sheaf file on the source, or a built-in sheaf name.
        #[arg(long)]
        sheaf: String,
        #[arg(long)]
        nmax: Option<usize>,
        /// Compare stalks with the cohomology of preimages of minimal opens.
        #[arg(long)]
        check_stalks: bool,
    },
    /// The internal language.
    Internal {
        #[command(subcommand)]
        command: InternalCommand,
    },
    /// Run the property battery over the built-in corpus.
    Suite {
        #[arg(long, default_value_t = 4)]
        max_points: usize,
        #[arg(long, default_value_t = 3)]
        max_stalk: usize,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        #[arg(long, default_value_t = 3)]
        vect_points: usize,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        primes: Vec<u32>,
        /// Restrict to these modules (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
    /// The built-in corpus.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum InternalCommand {
    /// Evaluate a formula at every stage, with the sheaf bound to `X`.
    Eval {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        formula: PathBuf,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Named instances, or with --points the enumerated sheaves.
    List {
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value_t = 2)]
        stalk: usize,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args)]
struct Input {
    /// Built-in site or category; makes --sheaf a built-in name.
    #[arg(long)]
    corpus: Option<String>,
    /// Site file overriding the one embedded in the sheaf.
    #[arg(long)]
    site: Option<PathBuf>,
    #[arg(long)]
    sheaf: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Traditional,
    Local,
    Strong,
    Internal,
}

enum Loaded {
    Sheaf(AnySheaf),
    Presheaf(Presheaf),
}

/// Inputs read so far, hashed into the report.
struct Ctx {
    hasher: Sha256,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    fn name(&mut self, s: &str) {
        self.hasher.update(s.as_bytes());
        self.hasher.update([0]);
    }

    fn json(&mut self, path: &Path) -> Result<Value> {
        let text = self.read(path)?;
        io::parse(&text).map_err(|e| match e {
            Error::Parse { line, column, message } => Error::Parse {
                line,
                column,
                message: format!("{}: {message}", path.display()),
            },
            e => e,
        })
    }

    fn load(&mut self, input: &Input) -> Result<Loaded> {
        if let Some(name) = &input.corpus {
            self.name(name);
            self.name(&input.sheaf);
            if corpus::CATEGORY_NAMES.contains(&name.as_str()) {
                return Ok(Loaded::Presheaf(corpus::presheaf(&corpus::category(name)?, &input.sheaf)?));
            }
            return Ok(Loaded::Sheaf(corpus::sheaf(&corpus::site(name)?, &input.sheaf)?));
        }
        let site = match &input.site {
            Some(p) => Some(io::poset_from_json(&self.json(p)?)?),
            None => None,
        };
        let v = self.json(Path::new(&input.sheaf))?;
        if v.get("elements").is_some() {
            Ok(Loaded::Presheaf(io::presheaf_from_json(&v, None)?))
        } else {
            Ok(Loaded::Sheaf(io::sheaf_from_json(&v, site.as_ref())?))
        }
    }

    fn load_mod(&mut self, input: &Input) -> Result<ModSheaf> {
        match self.load(input)? {
            Loaded::Sheaf(AnySheaf::Mod(m)) => Ok(m),
            _ => Err(Error::Input("expected a sheaf of modules".into())),
        }
    }
}

/// What a command produced: its JSON result, a human rendering, and
/// whether the checked property held.
struct Outcome {
    result: Value,
    text: String,
    ok: bool,
}

fn flabby_outcome(r: FlabbyReport) -> Outcome {
    let text = match &r.counterexample {
        None => format!("flabby: {}", r.verdict),
        Some(c) => {
            let mut t = format!("flabby: false\n  open U = {{{}}}\n  section s = {}", c.open.join(","), c.section);
            if let Some(p) = &c.point {
                t.push_str(&format!("\n  point p = {p}"));
            }
            t
        }
    };
    Outcome {
        ok: r.verdict,
        result: serde_json::to_value(&r).expect("report serializes"),
        text,
    }
}

fn check(ctx: &mut Ctx, input: &Input, mode: Mode) -> Result<Outcome> {
    let verdict_only = |v: bool| FlabbyReport {
        verdict: v,
        counterexample: None,
    };
    let r = match (ctx.load(input)?, mode) {
        (Loaded::Sheaf(AnySheaf::Set(f)), Mode::Traditional) => is_flabby_traditional(&f)?,
        (Loaded::Sheaf(AnySheaf::Set(f)), Mode::Local) => is_flabby_local(&f)?,
        (Loaded::Sheaf(AnySheaf::Set(f)), Mode::Strong) => is_strongly_flabby(&f)?,
        (Loaded::Sheaf(AnySheaf::Set(f)), Mode::Internal) => verdict_only(internal_flabby(&f)?),
        (Loaded::Sheaf(AnySheaf::Mod(f)), Mode::Traditional) => is_flabby_traditional_mod(&f)?,
        (Loaded::Sheaf(AnySheaf::Mod(f)), Mode::Local) => is_flabby_local_mod(&f)?,
        (Loaded::Sheaf(AnySheaf::Mod(f)), Mode::Strong) => is_strongly_flabby_mod(&f)?,
        (Loaded::Sheaf(AnySheaf::Mod(f)), Mode::Internal) => verdict_only(internal_flabby(&f.underlying_set_sheaf()?.0)?),
        (Loaded::Presheaf(x), Mode::Internal) => verdict_only(internal_flabby_presheaf(&x)?),
        (Loaded::Presheaf(x), Mode::Strong) => {
            let (v, w) = is_strongly_flabby_presheaf(&x)?;
            let mut out = flabby_outcome(verdict_only(v));
            if let Some((sieve, elems)) = w {
                out.result["counterexample"] = json!({"sieve": sieve, "family": elems});
                out.text.push_str(&format!("\n  sieve = {{{}}}\n  family = {elems:?}", sieve.join(",")));
            }
            return Ok(out);
        }
        (Loaded::Presheaf(_), _) => {
            return Err(Error::Input("presheaves on a category support --mode strong and --mode internal".into()))
        }
    };
    Ok(flabby_outcome(r))
}

fn injective(ctx: &mut Ctx, input: &Input, bound: usize) -> Result<Outcome> {
    let f = ctx.load_mod(input)?;
    let obstruction = injectivity_obstruction(&f)?;
    let family = internal_injective_family(&f, bound)?;
    let site = f.site();
    let external = obstruction.is_none();
    let mut text = format!("injective: {external}");
    let obs = obstruction.map(|(x, t)| {
        text.push_str(&format!("\n  Ext1(S_{}, I) != 0, section {t:?} does not extend", site.name(x)));
        json!({"point": site.name(x), "section": t})
    });
    text.push_str(&format!(
        "\ninternal family (d = {}): {} ({} monos)",
        family.bound,
        if family.passed { "passed" } else { "failed" },
        family.monos_checked
    ));
    Ok(Outcome {
        ok: external,
        result: json!({"injective": external, "obstruction": obs, "internal_family": family}),
        text,
    })
}

fn table_json(t: &CohomologyTable) -> Value {
    t.iter().map(|(n, g)| (format!("H{n}"), json!(g.to_string()))).collect::<serde_json::Map<_, _>>().into()
}

fn cohomology(ctx: &mut Ctx, input: &Input, nmax: Option<usize>) -> Result<Outcome> {
    let f = ctx.load_mod(input)?;
    let n = nmax.unwrap_or_else(|| default_nmax(f.site()));
    let t = sheaf_cohomology(&f, n)?;
    let text = t.iter().map(|(n, g)| format!("H{n} = {g}")).collect::<Vec<_>>().join("\n");
    Ok(Outcome {
        ok: true,
        result: table_json(&t),
        text,
    })
}

fn load_map(ctx: &mut Ctx, map: &str) -> Result<MonotoneMap> {
    let path = Path::new(map);
    if path.exists() {
        return io::map_from_json(&ctx.json(path)?);
    }
    ctx.name(map);
    corpus::maps()?
        .into_iter()
        .find(|(n, _)| n == map)
        .map(|(_, f)| f)
        .ok_or_else(|| Error::Input(format!("{map}: no such file or built-in map")))
}

fn rderived(ctx: &mut Ctx, map: &str, sheaf: &str, nmax: Option<usize>, check_stalks: bool) -> Result<Outcome> {
    let f = load_map(ctx, map)?;
    let src = f.source().clone();
    let input = if Path::new(sheaf).exists() {
        Input {
            corpus: None,
            site: None,
            sheaf: sheaf.to_string(),
        }
    } else {
        ctx.name(sheaf);
        let m = match corpus::sheaf(&src, sheaf)? {
            AnySheaf::Mod(m) => m,
            AnySheaf::Set(_) => return Err(Error::Input("expected a sheaf of modules".into())),
        };
        return rderived_of(&f, &m, nmax, check_stalks);
    };
    let m = ctx.load_mod(&input)?;
    if m.site() != &src {
        return Err(Error::Input("the sheaf does not live on the source of the map".into()));
    }
    rderived_of(&f, &m, nmax, check_stalks)
}

fn rderived_of(f: &MonotoneMap, m: &ModSheaf, nmax: Option<usize>, check_stalks: bool) -> Result<Outcome> {
    let n = nmax.unwrap_or_else(|| default_nmax(m.site()));
    let images = higher_direct_image(f, m, n)?;
    let tgt = f.target();
    let mut text = String::new();
    let mut table = serde_json::Map::new();
    for (k, r) in images.iter().enumerate() {
        let stalks: serde_json::Map<String, Value> = (0..tgt.len())
            .map(|q| (tgt.name(q).to_string(), json!(r.stalk(q).invariant_factors().to_string())))
            .collect();
        let row: Vec<String> = stalks.iter().map(|(q, g)| format!("{q}: {}", g.as_str().unwrap_or(""))).collect();
        text.push_str(&format!("R{k}f_* : {}\n", row.join(", ")));
        table.insert(format!("R{k}"), stalks.into());
    }
    let mut result = json!({"direct_images": table});
    let mut ok = true;
    if check_stalks {
        let bad = stalk_formula_check(f, m, n)?;
        ok = bad.is_empty();
        text.push_str(&format!("stalk mismatches: {}", bad.len()));
        for b in &bad {
            text.push_str(&format!("\n  {b:?}"));
        }
        result["mismatches"] = serde_json::to_value(&bad).expect("mismatches serialize");
    }
    Ok(Outcome {
        ok,
        result,
        text: text.trim_end().to_string(),
    })
}

fn eval(ctx: &mut Ctx, input: &Input, formula: &Path) -> Result<Outcome> {
    let phi = Formula::parse_file(&ctx.read(formula)?)?;
    let (mut st, names): (Structure, Vec<String>) = match ctx.load(input)? {
        Loaded::Sheaf(f) => {
            let s = match f {
                AnySheaf::Set(s) => s,
                AnySheaf::Mod(m) => m.underlying_set_sheaf()?.0,
            };
            let mut st = Structure::on_poset(s.site());
            st.add_sheaf("X", &s)?;
            (st, s.site().names().to_vec())
        }
        Loaded::Presheaf(x) => {
            let cat: Arc<FinCategory> = x.category().clone();
            let mut st = Structure::new(cat.clone());
            st.add_object("X", x)?;
            (st, cat.objects().to_vec())
        }
    };
    let mut stages = serde_json::Map::new();
    let mut all = true;
    for (c, name) in names.iter().enumerate() {
        let v = st.force(&phi, c, &[])?;
        all &= v;
        stages.insert(name.clone(), json!(v));
    }
    let rows: Vec<String> = stages.iter().map(|(k, v)| format!("  {k} |- phi: {v}")).collect();
    Ok(Outcome {
        ok: all,
        result: json!({"formula": phi.to_string(), "holds": all, "stages": stages}),
        text: format!("{phi}\nholds globally: {all}\n{}", rows.join("\n")),
    })
}

fn suite(cfg: SuiteConfig) -> Result<Outcome> {
    let r = run_suite(&cfg)?;
    let mut text = String::new();
    for p in &r.results {
        text.push_str(&format!(
            "{} {:<10} {} ({} cases, {} ms){}\n",
            if p.passed { "PASS" } else { "FAIL" },
            p.module,
            p.property,
            p.cases,
            p.millis,
            if p.classical_only { " [classical]" } else { "" }
        ));
        if let Some(c) = &p.counterexample {
            text.push_str(&format!("     counterexample: {c}\n"));
        }
    }
    Ok(Outcome {
        ok: r.passed(),
        result: serde_json::to_value(&r).expect("report serializes"),
        text: text.trim_end().to_string(),
    })
}

fn corpus_list(points: Option<usize>, stalk: usize, force: bool) -> Result<Outcome> {
    match points {
        None => {
            let maps: Vec<String> = corpus::maps()?.into_iter().map(|(n, _)| n).collect();
            let text = format!(
                "sites: {}\ncategories: {}\nsheaves: {}\npresheaves: {}\nmaps: {}",
                corpus::SITE_NAMES.join(", "),
                corpus::CATEGORY_NAMES.join(", "),
                corpus::SHEAF_NAMES.join(", "),
                corpus::PRESHEAF_NAMES.join(", "),
                maps.join(", ")
            );
            Ok(Outcome {
                ok: true,
                result: json!({
                    "sites": corpus::SITE_NAMES, "categories": corpus::CATEGORY_NAMES,
                    "sheaves": corpus::SHEAF_NAMES, "presheaves": corpus::PRESHEAF_NAMES, "maps": maps,
                }),
                text,
            })
        }
        Some(n) => {
            let mut per: Vec<usize> = vec![0; n + 1];
            let mut all = Vec::new();
            let mut sites: Vec<FinPoset> = Vec::new();
            for (p, f) in corpus::enumerate_corpus(n, stalk, force)? {
                per[p.len()] += 1;
                if sites.last() != Some(&p) {
                    sites.push(p);
                }
                all.push(io::set_sheaf_to_json(&f));
            }
            let text = (1..=n)
                .map(|k| format!("{k} points: {} posets, {} sheaves", corpus::posets(k).len(), per[k]))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Outcome {
                ok: true,
                result: json!({"posets": sites.len(), "sheaves": all}),
                text,
            })
        }
    }
}

fn run(cli: &Cli, ctx: &mut Ctx) -> Result<(&'static str, Outcome)> {
    Ok(match &cli.command {
        Command::Check { input, mode } => ("check", check(ctx, input, *mode)?),
        Command::Injective { input, bound } => ("injective", injective(ctx, input, *bound)?),
        Command::Cohomology { input, nmax } => ("cohomology", cohomology(ctx, input, *nmax)?),
        Command::Rderived {
            map,
            sheaf,
            nmax,
            check_stalks,
        } => ("rderived", rderived(ctx, map, sheaf, *nmax, *check_stalks)?),
        Command::Internal {
            command: InternalCommand::Eval { input, formula },
        } => ("internal eval", eval(ctx, input, formula)?),
        Command::Suite {
            max_points,
            max_stalk,
            max_dim,
            vect_points,
            primes,
            only,
        } => {
            let cfg = SuiteConfig {
                max_points: *max_points,
                max_stalk: *max_stalk,
                max_dim: *max_dim,
                vect_points: *vect_points,
                primes: primes.clone(),
                only: only.clone(),
            };
            ctx.name(&format!("{cfg:?}"));
            ("suite", suite(cfg)?)
        }
        Command::Corpus {
            command: CorpusCommand::List { points, stalk, force },
        } => ("corpus list", corpus_list(*points, *stalk, *force)?),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut ctx = Ctx { hasher: Sha256::new() };
    let start = Instant::now();
    match run(&cli, &mut ctx) {
        Ok((command, out)) => {
            if cli.json {
                let report = json!({
                    "command": command,
                    "inputs_digest": format!("{:x}", ctx.hasher.finalize()),
                    "result": out.result,
                    "passed": out.ok,
                    "millis": start.elapsed().as_millis() as u64,
                });
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                println!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({"error": e.to_string()}));
            }
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
