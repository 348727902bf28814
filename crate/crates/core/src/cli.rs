//! Command-line front end. `run` takes the argument list and writers so it can
//! be driven from tests; the binary only forwards to it.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::{compute_quotient_cached, invariant_dimensions, universal_invariant, SignFreePattern};
use crate::descending::{first_bad_fragment, reduce_to_descending_traced, DEFAULT_STEP_LIMIT};
use crate::error::{Error, Result};
use crate::formal::FormalSum;
use crate::gauss::{GaussDiagram, Underlying};
use crate::invariants::{
    count_homs, finite_type_defect, lk_over, lower_group, upper_group, v21, v22, v3_closed, FiniteGroup,
    GroupPresentation,
};
use crate::moves::{random_diagram, random_isotopy_with, search_with_cap, MoveFamily, MoveTables};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

/// Environment variable naming the quotient cache directory.
pub const CACHE_ENV: &str = "VIRTKNOT_CACHE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Closed,
    Long,
}

impl Kind {
    fn underlying(self) -> Underlying {
        match self {
            Kind::Closed => Underlying::Closed,
            Kind::Long => Underlying::Long,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "virtknot", version, about = "Gauss diagrams of virtual knots and their finite type invariants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Directory for cached quotient presentations (default: $VIRTKNOT_CACHE).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Move table to use instead of the bundled one.
    #[arg(long, global = true)]
    pub move_table: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariant report for each diagram.
    Invariants {
        /// Gauss codes; `-` reads one per line from stdin.
        codes: Vec<String>,
        #[arg(short, long)]
        input: Vec<PathBuf>,
        /// Degree of the universal invariant coordinates.
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// Dimensions of the invariant spaces up to a degree.
    Pn {
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, value_enum, default_value = "closed")]
        kind: Kind,
    },
    /// Pair a pattern (`*` for sign-free arrows) with each diagram.
    Pair {
        pattern: String,
        codes: Vec<String>,
        #[arg(short, long)]
        input: Vec<PathBuf>,
    },
    /// Expand a long diagram into descending diagrams.
    Reduce {
        code: String,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Write every step as a JSON line here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Whether each diagram comes from a classical diagram.
    Realizable {
        codes: Vec<String>,
        #[arg(short, long)]
        input: Vec<PathBuf>,
    },
    /// Upper and lower groups with homomorphism counts.
    Group {
        codes: Vec<String>,
        #[arg(short, long)]
        input: Vec<PathBuf>,
    },
    /// Randomized invariance and finite type checks.
    Verify {
        /// Number of random start diagrams per kind.
        #[arg(long, default_value_t = 40)]
        diagrams: usize,
        /// Random moves applied to each.
        #[arg(long, default_value_t = 60)]
        steps: usize,
    },
    /// Look for a move sequence between two diagrams.
    Search {
        from: String,
        to: String,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        /// Allow forbidden moves too.
        #[arg(long)]
        forbidden: bool,
    },
}

/// Settings shared by all commands after argument parsing.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
    pub tables: MoveTables,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let tables = match &cli.move_table {
            Some(p) => MoveTables::load(p)?,
            None => MoveTables::standard().clone(),
        };
        let cache_dir = cli.cache_dir.clone().or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from));
        Ok(RunConfig { format: cli.format, cache_dir, tables, seed: cli.seed })
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => EXIT_PARSE,
        Error::CapExceeded { .. } => EXIT_CAP,
        _ => EXIT_FAILURE,
    }
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Run a parsed command. Returns the exit code for commands that can fail
/// without an error (verify, search).
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::from_cli(cli)?;
    let format = cfg.format;
    let mut emit = |r: Value| -> Result<()> {
        match format {
            Format::Json => writeln!(out, "{r}")?,
            Format::Text => {
                write_text(out, &r, 0)?;
                writeln!(out)?;
            }
        }
        Ok(())
    };
    match &cli.command {
        Command::Invariants { codes, input, degree } => {
            for c in read_inputs(codes, input)? {
                emit(cmd_invariants(&cfg, &c, *degree)?)?;
            }
        }
        Command::Pn { degree, kind } => emit(cmd_pn(&cfg, *degree, kind.underlying())?)?,
        Command::Pair { pattern, codes, input } => {
            let pat = crate::algebra::GaussFormula::new(&SignFreePattern::parse(pattern)?.expand());
            for c in read_inputs(codes, input)? {
                let d: GaussDiagram = c.parse()?;
                emit(json!({"input_code": c, "pattern": pattern, "value": pat.eval(&d)}))?;
            }
        }
        Command::Reduce { code, degree, trace } => emit(cmd_reduce(code, *degree, trace.as_deref())?)?,
        Command::Realizable { codes, input } => {
            for c in read_inputs(codes, input)? {
                let d: GaussDiagram = c.parse()?;
                emit(json!({"input_code": c, "realizable": d.is_realizable()?}))?;
            }
        }
        Command::Group { codes, input } => {
            for c in read_inputs(codes, input)? {
                let d: GaussDiagram = c.parse()?;
                emit(json!({
                    "input_code": c,
                    "upper": group_report(&upper_group(&d)?)?,
                    "lower": group_report(&lower_group(&d)?)?,
                }))?;
            }
        }
        Command::Verify { diagrams, steps } => {
            let (report, ok) = cmd_verify(&cfg, *diagrams, *steps)?;
            emit(report)?;
            if !ok {
                return Ok(EXIT_FAILURE);
            }
        }
        Command::Search { from, to, budget, forbidden } => {
            let report = cmd_search(&cfg, from, to, *budget, *forbidden)?;
            let found = report["found"] == json!(true);
            emit(report)?;
            if !found {
                return Ok(EXIT_FAILURE);
            }
        }
    }
    Ok(0)
}

fn read_inputs(codes: &[String], files: &[PathBuf]) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    let mut push = |l: &str| {
        let l = l.trim();
        if !l.is_empty() && !l.starts_with('#') {
            lines.push(l.to_string());
        }
    };
    for c in codes {
        if c == "-" {
            for l in io::stdin().lock().lines() {
                push(&l?);
            }
        } else {
            push(c);
        }
    }
    for f in files {
        for l in fs::read_to_string(f)?.lines() {
            push(l);
        }
    }
    Ok(lines)
}

fn write_text(out: &mut dyn Write, v: &Value, indent: usize) -> io::Result<()> {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) => {
                        writeln!(out, "{:indent$}{k}:", "")?;
                        write_text(out, x, indent + 2)?;
                    }
                    _ => writeln!(out, "{:indent$}{k}: {x}", "")?,
                }
            }
            Ok(())
        }
        other => writeln!(out, "{:indent$}{other}", ""),
    }
}

fn group_report(g: &GroupPresentation) -> Result<Value> {
    let ab = g.abelianization();
    Ok(json!({
        "generators": g.generators,
        "relators": g.relator_strings(),
        "abelianization_rank": ab.rank,
        "torsion": ab.torsion,
        "hom_counts": {
            "S3": count_homs(g, &FiniteGroup::symmetric3())?,
            "A4": count_homs(g, &FiniteGroup::alternating4())?,
        },
    }))
}

pub fn cmd_invariants(cfg: &RunConfig, code: &str, degree: usize) -> Result<Value> {
    let d: GaussDiagram = code.parse()?;
    let u = d.underlying();
    let lk: Vec<Value> = match u {
        Underlying::Link(k) | Underlying::StringLink(k) => {
            let mut v = Vec::new();
            for i in 0..k {
                for j in 0..k {
                    if i != j {
                        v.push(json!([i, j, lk_over(&d, i, j)?]));
                    }
                }
            }
            v
        }
        _ => Vec::new(),
    };
    let single = matches!(u, Underlying::Closed | Underlying::Long);
    let universal = if single && d.is_chord_free() {
        let q = compute_quotient_cached(degree, u, cfg.cache_dir.as_deref())?;
        json!(universal_invariant(&d, &q)?)
    } else {
        Value::Null
    };
    let opt = |r: Result<i64>| r.ok();
    let group = if d.is_chord_free() {
        let g = upper_group(&d)?;
        let ab = g.abelianization();
        json!({
            "generators": g.generators,
            "relators": g.relator_strings(),
            "abelianization_rank": ab.rank,
            "hom_counts": { "S3": count_homs(&g, &FiniteGroup::symmetric3())? },
        })
    } else {
        Value::Null
    };
    Ok(json!({
        "input_code": code,
        "canonical_code": d.canonical_code(),
        "realizable": if single && d.is_chord_free() { json!(d.is_realizable()?) } else { Value::Null },
        "invariants": {
            "lk": lk,
            "v21": opt(v21(&d)),
            "v22": opt(v22(&d)),
            "v3": opt(v3_closed(&d)),
            "universal_n": universal,
        },
        "group": group,
    }))
}

fn default_cache_dir() -> PathBuf {
    std::env::temp_dir().join("virtknot-cache")
}

pub fn cmd_pn(cfg: &RunConfig, degree: usize, u: Underlying) -> Result<Value> {
    let dir = cfg.cache_dir.clone().unwrap_or_else(default_cache_dir);
    let q = compute_quotient_cached(degree, u, Some(&dir))?;
    let dims = invariant_dimensions(degree, u)?;
    let per_degree: Vec<Value> = (1..=degree)
        .map(|k| json!({"degree": k, "dimension": dims[k], "new": dims[k] - dims[k - 1]}))
        .collect();
    Ok(json!({
        "underlying": u.to_string(),
        "degree": degree,
        "basis_size": q.basis.len(),
        "relations": q.relations.len(),
        "rank": q.rank,
        "torsion": q.torsion,
        "dimensions": per_degree,
        "cache_file": dir.join(crate::algebra::QuotientPresentation::cache_file_name(degree, u)),
    }))
}

pub fn cmd_reduce(code: &str, degree: usize, trace: Option<&Path>) -> Result<Value> {
    let d: GaussDiagram = code.parse()?;
    let mut file = match trace {
        Some(p) => Some(fs::File::create(p)?),
        None => None,
    };
    let r: FormalSum = reduce_to_descending_traced(
        &d,
        degree,
        DEFAULT_STEP_LIMIT,
        file.as_mut().map(|f| f as &mut dyn Write),
    )?;
    let terms: Vec<Value> = r.diagrams().map(|(t, k)| json!([k, t.serialize()])).collect();
    Ok(json!({
        "input_code": code,
        "degree": degree,
        "first_bad_fragment": first_bad_fragment(&d),
        "terms": terms,
    }))
}

pub fn cmd_search(cfg: &RunConfig, from: &str, to: &str, budget: usize, forbidden: bool) -> Result<Value> {
    let a: GaussDiagram = from.parse()?;
    let b: GaussDiagram = to.parse()?;
    let families: &[MoveFamily] = if forbidden { &MoveFamily::ALL } else { &MoveFamily::REIDEMEISTER };
    let cap = a.arrow_count().max(b.arrow_count()) + 2;
    Ok(match search_with_cap(&cfg.tables, &a, &b, budget, families, cap)? {
        Some(path) => json!({"from": from, "to": to, "found": true, "path": path, "length": path.len()}),
        None => json!({"from": from, "to": to, "found": false, "message": "not found within budget"}),
    })
}

/// Random start diagrams of every kind the suites use.
fn sample_diagrams(rng: &mut ChaCha8Rng, count: usize) -> Vec<GaussDiagram> {
    let kinds = [Underlying::Closed, Underlying::Long, Underlying::Link(2)];
    let mut out = Vec::new();
    for u in kinds {
        for _ in 0..count {
            let k = rng.gen_range(0..=4);
            out.push(random_diagram(u, k, rng));
        }
    }
    out
}

fn values(d: &GaussDiagram) -> Vec<i64> {
    match d.underlying() {
        Underlying::Closed => vec![v3_closed(d).expect("closed")],
        Underlying::Long => vec![v21(d).expect("long"), v22(d).expect("long")],
        Underlying::Link(_) | Underlying::StringLink(_) => {
            vec![lk_over(d, 0, 1).expect("two components"), lk_over(d, 1, 0).expect("two components")]
        }
    }
}

/// Returns the report and whether every property held.
pub fn cmd_verify(cfg: &RunConfig, diagrams: usize, steps: usize) -> Result<(Value, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts = sample_diagrams(&mut rng, diagrams.max(1));

    let mut inv = (0usize, 0usize);
    for d in &starts {
        let moved = random_isotopy_with(&cfg.tables, d, steps, &mut rng, d.arrow_count() + 4)?;
        inv.0 += 1;
        if values(d) != values(&moved) {
            inv.1 += 1;
        }
    }

    let mut ft = (0usize, 0usize);
    for d in &starts {
        let (nu, degree): (fn(&GaussDiagram) -> Result<i64>, usize) = match d.underlying() {
            Underlying::Closed => (v3_closed, 3),
            Underlying::Long => (v21, 2),
            _ => (|d: &GaussDiagram| lk_over(d, 0, 1), 1),
        };
        let bigger = random_diagram(d.underlying(), degree + 1 + rng.gen_range(0..2), &mut rng);
        let mut idx: Vec<usize> = (0..bigger.arrow_count()).collect();
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        idx.truncate(degree + 1);
        ft.0 += 1;
        if finite_type_defect(nu, &bigger, &idx)? != 0 {
            ft.1 += 1;
        }
    }

    let mut iso = (0usize, 0usize);
    for d in &starts {
        if !matches!(d.underlying(), Underlying::Closed | Underlying::Long) {
            continue;
        }
        let x = FormalSum::from_diagram(d);
        iso.0 += 1;
        let back = crate::algebra::subdiagram_expansion(&crate::algebra::subdiagram_expansion_inverse(&x));
        if back != x {
            iso.1 += 1;
        }
    }

    let props = [("reidemeister_invariance", inv), ("finite_type", ft), ("expansion_inverse", iso)];
    let ok = props.iter().all(|p| p.1 .1 == 0);
    let report = json!({
        "seed": cfg.seed,
        "properties": props
            .iter()
            .map(|(name, (trials, failures))| json!({"name": name, "trials": trials, "failures": failures}))
            .collect::<Vec<_>>(),
        "passed": ok,
    });
    Ok((report, ok))
}
