use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use ginvsketch::config::{DimSpec, GroupSpec, PipelineConfig};
use ginvsketch::discrim::{compute_delta, estimate_box_dimension, reduce_dataset};
use ginvsketch::embed::{
    check_whitney_injectivity, concentration_selftest, embed_point, jl_dimension, mix_seed,
    GaussianMap, JlBudget, PairGeometry,
};
use ginvsketch::io::{format_vectors, parse_rows, parse_vectors, read_vectors};
use ginvsketch::orbit::burnside_count;
use ginvsketch::spectral::{
    bispectrum, invert_bispectrum, shift_distance, Bispectrum, Complex64, InversionOptions,
};
use ginvsketch::store::{append_records, SketchStore, StoreHeader};
use ginvsketch::{Caps, Error, InvariantMap, Result};

#[derive(Parser)]
#[command(
    name = "ginvsketch",
    version,
    about = "Group-invariant sketches of G-space data"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Group description: inline JSON or a path to a JSON file.
    #[arg(long, global = true)]
    group: Option<String>,
    /// Pipeline configuration file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    omega: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true)]
    max_points: Option<usize>,
    #[arg(long, global = true)]
    max_group: Option<usize>,
    #[arg(long, global = true)]
    max_tuples: Option<usize>,
}

#[derive(Args)]
struct Budget {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Embedding dimension or "auto".
    #[arg(long)]
    m: Option<DimSpec>,
}

#[derive(Subcommand)]
enum Command {
    /// Describe the group and its action.
    Group,
    /// Enumerate tuple orbits and cross-check against Burnside's count.
    Orbits {
        /// Include one row per orbit.
        #[arg(long)]
        table: bool,
    },
    /// Invariant vectors of every input row.
    Invariant {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sketches of every input row.
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Embedding dimension for a point budget.
    JlDim {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Worst kernel fraction over canonical pairs.
    Delta {
        #[arg(long)]
        input: PathBuf,
        /// Include every pair.
        #[arg(long)]
        pairs: bool,
    },
    /// Merge group-equivalent rows.
    Dedup {
        #[arg(long)]
        input: PathBuf,
        /// Write the canonical representatives here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Box-counting dimension of a point set.
    Boxdim {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated, strictly decreasing scales.
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125])]
        eps: Vec<f64>,
    },
    /// Fraction of random maps injective on the canonical points.
    WhitneyCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Required injective fraction.
        #[arg(long, default_value_t = 0.99)]
        min_fraction: f64,
    },
    /// Fraction of seeds whose map violates the isometry bounds.
    JlCheck {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        budget: Budget,
        #[arg(long, default_value_t = 400)]
        trials: usize,
    },
    /// Monte-Carlo check of the Gaussian concentration bound.
    ConcSelftest {
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Bispectrum on the cyclic group of the signal length.
    Bispectrum {
        #[command(subcommand)]
        mode: BispectrumMode,
    },
    /// Persistent sketch store.
    Sketch {
        #[command(subcommand)]
        action: SketchAction,
    },
}

#[derive(Subcommand)]
enum BispectrumMode {
    /// Signal (one value per line) to `k1,k2,re,im` rows.
    Compute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// `k1,k2,re,im` rows to a signal, up to cyclic shift.
    Invert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
    },
    /// Compute, invert and compare up to cyclic shift.
    Roundtrip {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
}

#[derive(Subcommand)]
enum SketchAction {
    /// Append one sketch per input row.
    Add {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// First column of each row is its id; otherwise the line number is.
        #[arg(long)]
        ids: bool,
        #[command(flatten)]
        budget: Budget,
    },
    /// Stored sketches within a radius of each query.
    Query {
        #[arg(long)]
        store: PathBuf,
        /// Single query vector, comma-separated.
        #[arg(long, conflicts_with = "input")]
        vector: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        radius: f64,
    },
}

enum Outcome {
    Ok,
    VerificationFailed,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Ok
        } else {
            Outcome::VerificationFailed
        }
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "OK"
    } else {
        "FAIL"
    }
}

impl Common {
    fn caps(&self, base: Caps) -> Caps {
        Caps {
            points: self.max_points.unwrap_or(base.points),
            group: self.max_group.unwrap_or(base.group),
            tuples: self.max_tuples.unwrap_or(base.tuples),
        }
    }

    fn pipeline(&self, budget: Option<&Budget>) -> Result<PipelineConfig> {
        let mut cfg = match (&self.config, &self.group) {
            (Some(path), _) => PipelineConfig::from_file(path)?,
            (None, Some(_)) => PipelineConfig::new(GroupSpec::Cyclic { n: 1 }),
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "either --group or --config is required".into(),
                ))
            }
        };
        if let Some(g) = &self.group {
            cfg.group = GroupSpec::load(g)?;
        }
        if let Some(w) = self.omega {
            cfg.omega = w;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.caps = self.caps(cfg.caps);
        if let Some(b) = budget {
            if let Some(e) = b.epsilon {
                cfg.epsilon = e;
            }
            if let Some(beta) = b.beta {
                cfg.beta = beta;
            }
            if let Some(m) = b.m {
                cfg.m = m;
            }
        }
        Ok(cfg)
    }
}

fn emit(report: &impl Serialize, json: bool) -> Result<()> {
    let value = serde_json::to_value(report)?;
    let mut out = std::io::stdout().lock();
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
        return Ok(());
    }
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::String(s) => writeln!(out, "{k}: {s}")?,
                    other => writeln!(out, "{k}: {other}")?,
                }
            }
        }
        other => writeln!(out, "{other}")?,
    }
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    let common = &cli.common;
    let json = common.json;
    match cli.command {
        Command::Group => {
            let cfg = common.pipeline(None)?;
            let (g, labels) = cfg.group.build(&cfg.caps)?;
            emit(
                &json!({
                    "degree": g.degree(),
                    "order": g.order(),
                    "transitive": g.is_transitive(),
                    "generators": g.generators().iter().map(|p| p.image()).collect::<Vec<_>>(),
                    "labels": labels.labels,
                    "group_hash": cfg.group_hash(),
                }),
                json,
            )?;
            Ok(Outcome::Ok)
        }
        Command::Orbits { table } => {
            let cfg = common.pipeline(None)?;
            let (g, _) = cfg.group.build(&cfg.caps)?;
            let inv = InvariantMap::new(&g, cfg.omega, cfg.caps.tuples)?;
            let burnside = burnside_count(&g, cfg.omega)?;
            let pass = burnside == inv.kappa() as u128;
            let mut report = json!({
                "degree": g.degree(),
                "order": g.order(),
                "omega": cfg.omega,
                "kappa": inv.kappa(),
                "burnside": burnside.to_string(),
                "status": if pass { "OK" } else { "MISMATCH" },
            });
            if table {
                report["orbits"] = serde_json::to_value(inv.orbits().table())?;
            }
            emit(&report, json)?;
            Ok(Outcome::from_pass(pass))
        }
        Command::Invariant { input, output } => {
            let cfg = common.pipeline(None)?;
            let (g, _) = cfg.group.build(&cfg.caps)?;
            let inv = InvariantMap::new(&g, cfg.omega, cfg.caps.tuples)?;
            let rows = read_vectors(&input, Some(g.degree()))?;
            let z = rows
                .iter()
                .map(|a| inv.apply(a))
                .collect::<Result<Vec<_>>>()?;
            let header = format!(
                "kappa_omega={} omega={} n={}",
                inv.kappa(),
                cfg.omega,
                g.degree()
            );
            write_text(
                output.as_deref(),
                &format_vectors(Some(&header), z.iter().map(|v| v.z.as_slice())),
            )?;
            Ok(Outcome::Ok)
        }
        Command::Embed {
            input,
            output,
            budget,
        } => {
            let cfg = common.pipeline(Some(&budget))?;
            let rows = read_vectors(&input, None)?;
            let p = cfg.resolve(Some(&rows))?;
            let sketches = rows
                .iter()
                .map(|a| embed_point(&p.map, &p.inv, a))
                .collect::<Result<Vec<_>>>()?;
            let header = format!(
                "m={} seed={} omega={} kappa_omega={} group_hash={}",
                p.map.m(),
                cfg.seed,
                cfg.omega,
                p.inv.kappa(),
                cfg.group_hash()
            );
            write_text(
                output.as_deref(),
                &format_vectors(Some(&header), sketches.iter().map(|v| v.as_slice())),
            )?;
            Ok(Outcome::Ok)
        }
        Command::JlDim {
            k,
            beta,
            epsilon,
            delta,
        } => {
            let m = jl_dimension(&JlBudget {
                k,
                beta,
                epsilon,
                delta,
            })?;
            emit(
                &json!({ "k": k, "beta": beta, "epsilon": epsilon, "delta": delta, "m": m }),
                json,
            )?;
            Ok(Outcome::Ok)
        }
        Command::Delta { input, pairs } => {
            let cfg = common.pipeline(None)?;
            let (g, _) = cfg.group.build(&cfg.caps)?;
            let inv = InvariantMap::new(&g, cfg.omega, cfg.caps.tuples)?;
            let rows = read_vectors(&input, Some(g.degree()))?;
            let canon = reduce_dataset(&rows, &g)?;
            let report = compute_delta(&canon, &inv)?;
            let mut out = json!({
                "points": rows.len(),
                "k": canon.len(),
                "omega": cfg.omega,
                "kappa": inv.kappa(),
                "delta": report.delta,
                "argmax_pair": report.argmax_pair,
                "discriminable": report.discriminable,
            });
            if pairs {
                out["per_pair"] = serde_json::to_value(&report.per_pair)?;
            }
            emit(&out, json)?;
            Ok(Outcome::Ok)
        }
        Command::Dedup { input, output } => {
            let cfg = common.pipeline(None)?;
            let (g, _) = cfg.group.build(&cfg.caps)?;
            let rows = read_vectors(&input, Some(g.degree()))?;
            let canon = reduce_dataset(&rows, &g)?;
            emit(
                &json!({
                    "points": rows.len(),
                    "k": canon.len(),
                    "group_order": g.order(),
                    "class_sizes": canon.class_sizes,
                    "fixed_representatives": canon.fixed_flags.iter().filter(|f| **f).count(),
                    "reduction_factor": canon.reduction_factor(),
                }),
                json,
            )?;
            if let Some(path) = output {
                write_text(
                    Some(&path),
                    &format_vectors(
                        Some("canonical representatives"),
                        canon.reps.iter().map(|r| r.as_slice()),
                    ),
                )?;
            }
            Ok(Outcome::Ok)
        }
        Command::Boxdim { input, eps } => {
            let rows = read_vectors(&input, None)?;
            emit(&estimate_box_dimension(&rows, &eps)?, json)?;
            Ok(Outcome::Ok)
        }
        Command::WhitneyCheck {
            input,
            m,
            trials,
            min_fraction,
        } => {
            let cfg = common.pipeline(None)?;
            let (g, _) = cfg.group.build(&cfg.caps)?;
            let inv = InvariantMap::new(&g, cfg.omega, cfg.caps.tuples)?;
            let rows = read_vectors(&input, Some(g.degree()))?;
            let canon = reduce_dataset(&rows, &g)?;
            let report = check_whitney_injectivity(&canon.reps, &inv, m, trials, cfg.seed)?;
            let fraction = report.injective_trials as f64 / trials.max(1) as f64;
            let pass = fraction >= min_fraction;
            emit(
                &json!({
                    "k": canon.len(),
                    "m": m,
                    "trials": report.trials,
                    "injective_trials": report.injective_trials,
                    "injective_fraction": fraction,
                    "min_pair_gap": report.min_pair_gap,
                    "status": status(pass),
                }),
                json,
            )?;
            Ok(Outcome::from_pass(pass))
        }
        Command::JlCheck {
            input,
            budget,
            trials,
        } => {
            let cfg = common.pipeline(Some(&budget))?;
            let rows = read_vectors(&input, None)?;
            let p = cfg.resolve(Some(&rows))?;
            let canon = reduce_dataset(&rows, &p.group)?;
            let delta = match &p.delta {
                Some(d) => d.delta,
                None => compute_delta(&canon, &p.inv)?.delta,
            };
            let geometry = PairGeometry::new(&canon.reps, &p.inv)?;
            let m = p.map.m();
            let mut failing = 0usize;
            let mut worst = 1.0f64;
            for t in 0..trials {
                let map = GaussianMap::sample(m, p.inv.kappa(), mix_seed(cfg.seed, t as u64))?;
                let r = geometry.check(&map, cfg.epsilon)?;
                if !r.violations.is_empty() {
                    failing += 1;
                }
                if (r.worst_ratio - 1.0).abs() > (worst - 1.0).abs() {
                    worst = r.worst_ratio;
                }
            }
            let fraction = failing as f64 / trials.max(1) as f64;
            let allowed = 2.0 * cfg.beta;
            let pass = fraction <= allowed;
            emit(
                &json!({
                    "k": canon.len(),
                    "m": m,
                    "delta": delta,
                    "epsilon": cfg.epsilon,
                    "beta": cfg.beta,
                    "trials": trials,
                    "failing_seeds": failing,
                    "failure_fraction": fraction,
                    "allowed_fraction": allowed,
                    "worst_ratio": worst,
                    "status": status(pass),
                }),
                json,
            )?;
            Ok(Outcome::from_pass(pass))
        }
        Command::ConcSelftest {
            m,
            epsilon,
            samples,
        } => {
            let report = concentration_selftest(m, epsilon, samples, common.seed.unwrap_or(0))?;
            let pass = report.empirical_tail <= report.bound;
            let mut value = serde_json::to_value(&report)?;
            value["status"] = status(pass).into();
            emit(&value, json)?;
            Ok(Outcome::from_pass(pass))
        }
        Command::Bispectrum { mode } => run_bispectrum(mode, json),
        Command::Sketch { action } => run_sketch(common, action),
    }
}

fn read_signal(path: &Path) -> Result<Vec<f64>> {
    Ok(read_vectors(path, Some(1))?
        .into_iter()
        .map(|r| r[0])
        .collect())
}

fn run_bispectrum(mode: BispectrumMode, json: bool) -> Result<Outcome> {
    match mode {
        BispectrumMode::Compute { input, output } => {
            let b = bispectrum(&read_signal(&input)?)?;
            let mut text = format!("# k1,k2,re,im n={}\n", b.n);
            for (k1, k2, re, im) in b.rows() {
                text.push_str(&format!("{k1},{k2},{re:?},{im:?}\n"));
            }
            write_text(output.as_deref(), &text)?;
            Ok(Outcome::Ok)
        }
        BispectrumMode::Invert {
            input,
            output,
            rel_tol,
        } => {
            let rows = parse_vectors(&fs::read_to_string(&input)?, Some(4))?;
            let n = (rows.len() as f64).sqrt().round() as usize;
            if n == 0 || n * n != rows.len() {
                return Err(Error::InvalidParameter(format!(
                    "a bispectrum table needs n² rows, found {}",
                    rows.len()
                )));
            }
            let mut values = vec![Default::default(); n * n];
            let mut seen = vec![false; n * n];
            for (line, r) in rows.iter().enumerate() {
                let (k1, k2) = (r[0] as usize, r[1] as usize);
                if r[0] != k1 as f64 || r[1] != k2 as f64 || k1 >= n || k2 >= n || seen[k1 * n + k2]
                {
                    return Err(Error::Parse {
                        line: line + 1,
                        message: format!("bad or repeated index pair ({}, {})", r[0], r[1]),
                    });
                }
                seen[k1 * n + k2] = true;
                values[k1 * n + k2] = Complex64::new(r[2], r[3]);
            }
            let rec = invert_bispectrum(&Bispectrum { n, values }, &InversionOptions { rel_tol })?;
            let header = format!("signal n={n} imag_residue={:e}", rec.imag_residue);
            write_text(
                output.as_deref(),
                &format_vectors(Some(&header), rec.signal.iter().map(std::slice::from_ref)),
            )?;
            Ok(Outcome::Ok)
        }
        BispectrumMode::Roundtrip { input, tolerance } => {
            let z = read_signal(&input)?;
            let rec = invert_bispectrum(&bispectrum(&z)?, &InversionOptions::default())?;
            let (err, shift) = shift_distance(&rec.signal, &z);
            let pass = err <= tolerance;
            emit(
                &json!({
                    "n": z.len(),
                    "max_error": err,
                    "shift": shift,
                    "imag_residue": rec.imag_residue,
                    "tolerance": tolerance,
                    "status": status(pass),
                }),
                json,
            )?;
            Ok(Outcome::from_pass(pass))
        }
    }
}

fn run_sketch(common: &Common, action: SketchAction) -> Result<Outcome> {
    match action {
        SketchAction::Add {
            input,
            store,
            ids,
            budget,
        } => {
            let mut cfg = common.pipeline(Some(&budget))?;
            if let Some(s) = SketchStore::load(&store)? {
                if s.header.group_hash != cfg.group_hash() {
                    return Err(Error::GroupHashMismatch {
                        expected: cfg.group_hash(),
                        found: s.header.group_hash,
                    });
                }
                if cfg.m == DimSpec::Auto {
                    cfg.m = DimSpec::Fixed(s.header.m);
                }
            }
            let rows = parse_rows(&fs::read_to_string(&input)?, ids, None)?;
            let data: Vec<Vec<f64>> = rows.iter().map(|r| r.values.clone()).collect();
            let p = cfg.resolve(Some(&data))?;
            let header = StoreHeader::new(cfg.group.clone(), cfg.omega, p.map.m(), cfg.seed);
            let sketches = rows
                .iter()
                .map(|r| {
                    let sketch = embed_point(&p.map, &p.inv, &r.values).map_err(|e| match e {
                        Error::LengthMismatch { expected, got } => Error::Parse {
                            line: r.line,
                            message: format!("expected {expected} values, found {got}"),
                        },
                        e => e,
                    })?;
                    let id = r.id.clone().unwrap_or_else(|| r.line.to_string());
                    Ok((id, sketch))
                })
                .collect::<Result<Vec<_>>>()?;
            let added = sketches.len();
            let updated = append_records(&store, &header, sketches)?;
            emit(
                &json!({
                    "added": added,
                    "records": updated.records.len(),
                    "m": header.m,
                    "seed": header.seed,
                    "group_hash": header.group_hash,
                }),
                common.json,
            )?;
            Ok(Outcome::Ok)
        }
        SketchAction::Query {
            store,
            vector,
            input,
            radius,
        } => {
            let s = SketchStore::load(&store)?.ok_or(Error::EmptyStore)?;
            if s.records.is_empty() {
                return Err(Error::EmptyStore);
            }
            let caps = common.caps(Caps::default());
            let (g, _) = s.header.group.build(&caps)?;
            let inv = InvariantMap::new(&g, s.header.omega, caps.tuples)?;
            let map = GaussianMap::sample(s.header.m, inv.kappa(), s.header.seed)?;
            let queries = match (vector, input) {
                (Some(v), _) => parse_vectors(&v, Some(g.degree()))?,
                (None, Some(path)) => read_vectors(&path, Some(g.degree()))?,
                (None, None) => {
                    return Err(Error::InvalidParameter(
                        "either --vector or --input is required".into(),
                    ))
                }
            };
            let results = queries
                .iter()
                .enumerate()
                .map(|(i, q)| {
                    let sketch = embed_point(&map, &inv, q)?;
                    Ok(json!({ "query": i, "matches": s.query(&sketch, radius)? }))
                })
                .collect::<Result<Vec<_>>>()?;
            emit(
                &json!({ "radius": radius, "results": results }),
                common.json,
            )?;
            Ok(Outcome::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
