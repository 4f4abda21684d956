//! The `rocch` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data validation error. Errors
//! also produce one JSON line on standard error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rocch::decision::{self, ConditionBox, LinearConstraint, OperatingConditions, Selection};
use rocch::hull::{HullInput, HullVertex, Resolution, RocchHull};
use rocch::hybrid;
use rocch::io::{self, fmt12, Artifact, CurvesFile};
use rocch::roc::{generate_roc_curve, RocCurve, RocPoint};

pub const SEED_ENV: &str = "ROCCH_SEED";

#[derive(Debug, Parser)]
#[command(name = "rocch", version, about = "ROC convex hull analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-classifier ROC curves from a score file.
    Curve {
        scores: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the ROC convex hull, or extend an existing one with --add.
    Hull {
        /// Score CSV, point CSV (classifier,fp,tp) or curves JSON.
        input: PathBuf,
        /// Existing hull file to insert into.
        #[arg(long)]
        add: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pick the operating point for given conditions or a constraint.
    Select {
        hull: PathBuf,
        #[command(flatten)]
        target: SelectTarget,
    },
    /// Slope range and candidate vertices for imprecise conditions.
    Sensitivity {
        hull: PathBuf,
        /// Prior of the positive class, or a range `LO HI`.
        #[arg(long, num_args = 1..=2, required = true, value_parser = parse_prior)]
        prior: Vec<f64>,
        #[arg(long, num_args = 2, required = true, value_names = ["LO", "HI"])]
        cost_fp: Vec<f64>,
        #[arg(long, num_args = 2, required = true, value_names = ["LO", "HI"])]
        cost_fn: Vec<f64>,
    },
    /// Which classifier is optimal over which range of iso-performance slopes.
    Dominators {
        hull: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Area under each curve and under the hull.
    Auc { input: PathBuf },
    /// Run the hybrid classifier at false positive rate x.
    Hybrid {
        hull: PathBuf,
        scores: PathBuf,
        #[arg(long)]
        x: f64,
        /// Defaults to $ROCCH_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot data (series, fp, tp) as TSV.
    Plot {
        input: PathBuf,
        /// Iso-performance overlay `PRIOR,COST_FP,COST_FN`; repeatable.
        #[arg(long = "iso", value_parser = parse_conditions)]
        iso: Vec<OperatingConditions>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
struct SelectTarget {
    /// Prior of the positive class, as a decimal or a fraction `a/b`.
    #[arg(long, value_parser = parse_prior, requires_all = ["cost_fp", "cost_fn"],
          conflicts_with_all = ["fp_max", "caseload"])]
    prior: Option<f64>,
    #[arg(long, requires = "prior")]
    cost_fp: Option<f64>,
    #[arg(long, requires = "prior")]
    cost_fn: Option<f64>,
    #[arg(long, conflicts_with = "caseload")]
    fp_max: Option<f64>,
    /// Positives, negatives and the number of cases that can be handled.
    #[arg(long, num_args = 3, value_names = ["P", "N", "K"])]
    caseload: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

fn parse_ratio(s: &str) -> Result<f64, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))
    };
    if let Some((a, b)) = s.split_once('/') {
        Ok(num(a)? / num(b)?)
    } else {
        num(s)
    }
}

fn parse_prior(s: &str) -> Result<f64, String> {
    let p = parse_ratio(s)?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(format!("prior must lie strictly between 0 and 1, got {p}"))
    }
}

fn parse_conditions(s: &str) -> Result<OperatingConditions, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [p, cfp, cfn] = parts[..] else {
        return Err("expected PRIOR,COST_FP,COST_FN".into());
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))
    };
    OperatingConditions::new(parse_prior(p)?, num(cfp)?, num(cfn)?).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<rocch::Error> for Failure {
    fn from(e: rocch::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Data(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Data(e.to_string())),
    }
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| Failure::Data(e.to_string()))
    };
}

fn curves_from_scores(file: &io::ScoreFile) -> CliResult<Vec<RocCurve>> {
    Ok(file
        .grouped()
        .iter()
        .map(|(id, ex)| generate_roc_curve(ex, id))
        .collect::<rocch::Result<Vec<_>>>()?)
}

fn hull_inputs(artifact: Artifact) -> CliResult<Vec<HullInput>> {
    Ok(match artifact {
        Artifact::Scores(f) => curves_from_scores(&f)?
            .into_iter()
            .map(HullInput::from)
            .collect(),
        Artifact::Points(p) => p.into_iter().map(HullInput::from).collect(),
        Artifact::Curves(c) => c.curves.into_iter().map(HullInput::from).collect(),
        Artifact::Hull(h) => h
            .vertices()
            .iter()
            .chain(h.auxiliary())
            .filter(|v| !v.provenance.is_degenerate())
            .cloned()
            .map(HullInput::from)
            .collect(),
    })
}

fn load_hull(path: &Path) -> CliResult<RocchHull> {
    Ok(io::load_hull(&read(path)?)?)
}

fn point(p: RocPoint) -> String {
    format!("({}, {})", fmt12(p.fp), fmt12(p.tp))
}

fn vertex(v: &HullVertex) -> String {
    format!("{} {}", v.provenance.label(), point(v.point))
}

fn describe(r: &Resolution) -> String {
    match r {
        Resolution::Vertex { vertex: v } => format!("vertex {}", vertex(v)),
        Resolution::Mixture {
            left,
            right,
            weight,
        } => format!(
            "mixture {} | {} with P(right) = {}",
            vertex(left),
            vertex(right),
            fmt12(*weight)
        ),
    }
}

fn cmd_curve(out: &mut dyn Write, scores: &Path, dest: Option<&Path>) -> CliResult {
    let file = io::ScoreFile::parse(&read(scores)?)?;
    let curves = curves_from_scores(&file)?;
    emit(out, dest, &(CurvesFile { curves }.to_json() + "\n"))
}

fn cmd_hull(
    out: &mut dyn Write,
    err: &mut dyn Write,
    input: &Path,
    add: Option<&Path>,
    dest: Option<&Path>,
) -> CliResult {
    let inputs = hull_inputs(io::load_artifact(&read(input)?)?)?;
    let (hull, extended) = match add {
        Some(existing) => {
            let mut hull = load_hull(existing)?;
            let mut extended = false;
            for i in inputs {
                let (next, changed) = hull.insert(i)?;
                hull = next;
                extended |= changed;
            }
            (hull, Some(extended))
        }
        None => (RocchHull::build(inputs)?, None),
    };
    emit(out, dest, &(io::save_hull(&hull) + "\n"))?;
    // keep stdout pure JSON when the hull itself goes there
    let summary: &mut dyn Write = if dest.is_some() { out } else { err };
    if let Some(e) = extended {
        say!(summary, "extended: {e}")?;
    }
    say!(summary, "vertices: {}", hull.vertices().len())?;
    for v in hull.vertices() {
        say!(summary, "  {}", vertex(v))?;
    }
    Ok(())
}

fn cmd_select(out: &mut dyn Write, hull_path: &Path, t: &SelectTarget) -> CliResult {
    let hull = load_hull(hull_path)?;
    if let Some(p_pos) = t.prior {
        let (cfp, cfn) = (t.cost_fp.unwrap_or(1.0), t.cost_fn.unwrap_or(1.0));
        let cond = OperatingConditions::new(p_pos, cfp, cfn)?;
        let v = decision::select_min_cost(&hull, &cond);
        say!(out, "iso slope: {}", fmt12(cond.iso_slope()))?;
        say!(out, "x: {}", fmt12(v.point.fp))?;
        say!(out, "choice: vertex {}", vertex(v))?;
        say!(out, "expected point: {}", point(v.point))?;
        say!(out, "expected cost: {}", fmt12(cond.expected_cost(v.point)))?;
        say!(
            out,
            "posterior threshold: {}",
            fmt12(cond.posterior_threshold())
        )?;
        return Ok(());
    }
    let (sel, caseload): (Selection, Option<(f64, f64)>) = if let Some(f) = t.fp_max {
        (decision::select_neyman_pearson(&hull, f)?, None)
    } else if let Some(c) = &t.caseload {
        let k = LinearConstraint::caseload(c[0], c[1], c[2])?;
        (decision::select_constrained(&hull, &k)?, Some((c[0], c[1])))
    } else {
        return Err(Failure::Usage(
            "give --prior with --cost-fp and --cost-fn, --fp-max, or --caseload".into(),
        ));
    };
    say!(out, "x: {}", fmt12(sel.point.fp))?;
    say!(out, "choice: {}", describe(&sel.resolution))?;
    say!(out, "expected point: {}", point(sel.point))?;
    if let Some((p, n)) = caseload {
        say!(
            out,
            "expected cases: {}",
            fmt12(sel.point.tp * p + sel.point.fp * n)
        )?;
    }
    Ok(())
}

fn pair(v: &[f64]) -> (f64, f64) {
    (v[0], *v.get(1).unwrap_or(&v[0]))
}

fn cmd_sensitivity(
    out: &mut dyn Write,
    hull_path: &Path,
    prior: &[f64],
    cost_fp: &[f64],
    cost_fn: &[f64],
) -> CliResult {
    let hull = load_hull(hull_path)?;
    let b = ConditionBox {
        p_pos: pair(prior),
        cost_fp: pair(cost_fp),
        cost_fn: pair(cost_fn),
    };
    let report = decision::sensitivity(&hull, &b)?;
    say!(out, "slope range: {}", io::fmt_range(&report.slope_range))?;
    say!(out, "candidates: {}", report.vertices.len())?;
    for v in &report.vertices {
        say!(out, "  {}", vertex(v))?;
    }
    say!(out, "insensitive: {}", report.is_insensitive())?;
    Ok(())
}

fn cmd_auc(out: &mut dyn Write, input: &Path) -> CliResult {
    let curves = match io::load_artifact(&read(input)?)? {
        Artifact::Scores(f) => curves_from_scores(&f)?,
        Artifact::Curves(c) => c.curves,
        Artifact::Hull(h) => {
            say!(out, "hull\t{}", fmt12(h.auc()))?;
            return Ok(());
        }
        Artifact::Points(p) => {
            let h = RocchHull::from_points(p)?;
            say!(out, "hull\t{}", fmt12(h.auc()))?;
            return Ok(());
        }
    };
    for c in &curves {
        say!(out, "{}\t{}", c.classifier_id, fmt12(c.auc()))?;
    }
    let hull = RocchHull::build(curves)?;
    say!(out, "hull\t{}", fmt12(hull.auc()))?;
    Ok(())
}

fn default_seed() -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| {
            Failure::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{s}`"))
        }),
        Err(_) => Ok(0),
    }
}

fn cmd_hybrid(
    out: &mut dyn Write,
    hull_path: &Path,
    scores: &Path,
    x: f64,
    seed: Option<u64>,
    dest: Option<&Path>,
) -> CliResult {
    let hull = load_hull(hull_path)?;
    let file = io::ScoreFile::parse(&read(scores)?)?;
    let policy = hybrid::policy_for(&hull, x)?;
    let seed = match seed {
        Some(s) => s,
        None => default_seed()?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for (id, s) in file.by_example() {
        let c = policy
            .classify(&s, &mut rng)
            .map_err(|e| Failure::Data(format!("example `{id}`: {e}")))?;
        rows.push((id, c));
    }
    emit(out, dest, &io::predictions_csv(&rows))
}

fn cmd_plot(
    out: &mut dyn Write,
    input: &Path,
    iso: &[OperatingConditions],
    dest: Option<&Path>,
) -> CliResult {
    let (curves, hull) = match io::load_artifact(&read(input)?)? {
        Artifact::Hull(h) => (vec![], h),
        Artifact::Points(p) => (vec![], RocchHull::from_points(p)?),
        Artifact::Curves(c) => {
            let h = RocchHull::build(c.curves.clone())?;
            (c.curves, h)
        }
        Artifact::Scores(f) => {
            let curves = curves_from_scores(&f)?;
            let h = RocchHull::build(curves.clone())?;
            (curves, h)
        }
    };
    emit(out, dest, &io::plot_tsv(&curves, Some(&hull), iso))
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Curve { scores, out: dest } => cmd_curve(out, &scores, dest.as_deref()),
        Command::Hull {
            input,
            add,
            out: dest,
        } => cmd_hull(out, err, &input, add.as_deref(), dest.as_deref()),
        Command::Select { hull, target } => cmd_select(out, &hull, &target),
        Command::Sensitivity {
            hull,
            prior,
            cost_fp,
            cost_fn,
        } => cmd_sensitivity(out, &hull, &prior, &cost_fp, &cost_fn),
        Command::Dominators { hull, format } => {
            let h = load_hull(&hull)?;
            let text = match format {
                Format::Text => io::dominators_text(&h),
                Format::Csv => io::dominators_csv(&h),
            };
            emit(out, None, &text)
        }
        Command::Auc { input } => cmd_auc(out, &input),
        Command::Hybrid {
            hull,
            scores,
            x,
            seed,
            out: dest,
        } => cmd_hybrid(out, &hull, &scores, x, seed, dest.as_deref()),
        Command::Plot {
            input,
            iso,
            out: dest,
        } => cmd_plot(out, &input, &iso, dest.as_deref()),
    }
}

fn error_line(err: &mut dyn Write, kind: &str, message: &str) {
    let line = serde_json::json!({ "error": kind, "message": message });
    let _ = writeln!(err, "{line}");
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            error_line(err, "usage", &e.kind().to_string());
            return 1;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            error_line(err, "usage", &m);
            1
        }
        Err(Failure::Data(m)) => {
            error_line(err, "validation", &m);
            2
        }
    }
}
