use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use hypercorr::bounds;
use hypercorr::combinatorics::{orbit_profile, Permutation};
use hypercorr::harness::{run_experiment, sweep_to_csv, ExperimentConfig};
use hypercorr::lambert::{lambert_w, Branch};
use hypercorr::models::{sample, ErSpec, GaussianSpec, Hypothesis, ModelSpec};
use hypercorr::rng::seeded;
use hypercorr::secondmoment::{second_moment, Enumeration, MomentModel, DEFAULT_ENUMERATION_CAP};
use hypercorr::statistics::{
    asymptotic_threshold, max_statistic_exact, max_statistic_heuristic, TestOutcome, ThresholdKind,
    DEFAULT_EXACT_LIMIT,
};
use hypercorr::tensor_io::{read_tensor, write_pair, Column, TensorHeader};
use hypercorr::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hypercorr",
    version,
    about = "Correlated random hypergraph experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Gaussian,
    Er,
}

#[derive(Clone, Copy, ValueEnum)]
enum HypArg {
    H0,
    H1,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumerationArg {
    CycleType,
    Traversal,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a tensor pair and write it to a file.
    Sample {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, value_enum)]
        hypothesis: HypArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hyperedge orbit profile of a vertex permutation.
    Orbits {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Cycle notation with 1-based labels, e.g. "(1 2)(3 4 5)".
        #[arg(long)]
        perm: String,
    },
    /// Maximize the overlap statistic over permutations and apply a threshold.
    Test {
        #[arg(long)]
        a1: PathBuf,
        #[arg(long)]
        a2: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed threshold; defaults to the asymptotic one for the model in
        /// the file header.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
        limit: usize,
    },
    /// Exact second moment of the likelihood ratio under H0.
    SecondMoment {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, value_enum, default_value = "cycle-type")]
        method: EnumerationArg,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Evaluate a closed-form bound or threshold.
    Bounds {
        #[arg(long)]
        name: String,
        /// Comma-separated key=value pairs.
        #[arg(long, default_value = "")]
        args: String,
    },
    /// Run an experiment grid and write the sweep CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hypercorr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn print(value: &impl Serialize) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn model_spec(
    kind: ModelKind,
    n: usize,
    m: usize,
    rho: Option<f64>,
    p: Option<f64>,
    s: Option<f64>,
) -> Result<ModelSpec> {
    Ok(match kind {
        ModelKind::Gaussian => {
            let rho =
                rho.ok_or_else(|| Error::param("--rho is required for the gaussian model"))?;
            ModelSpec::Gaussian(GaussianSpec::new(n, m, rho)?)
        }
        ModelKind::Er => {
            let p = p.ok_or_else(|| Error::param("--p is required for the er model"))?;
            let s = s.ok_or_else(|| Error::param("--s is required for the er model"))?;
            ModelSpec::Er(ErSpec::new(n, m, p, s)?)
        }
    })
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Sample {
            model,
            n,
            m,
            rho,
            p,
            s,
            hypothesis,
            seed,
            out,
        } => {
            let spec = model_spec(model, n, m, rho, p, s)?;
            let hyp = match hypothesis {
                HypArg::H0 => Hypothesis::H0,
                HypArg::H1 => Hypothesis::H1,
            };
            let pair = sample(&spec, hyp, &mut seeded(seed))?;
            let header = TensorHeader {
                n,
                m,
                model: Some(spec),
                hypothesis: Some(hyp),
                seed: Some(seed),
            };
            write_pair(&out, &header, &pair)?;
            print(&json!({
                "model": spec,
                "hypothesis": hyp,
                "seed": seed,
                "out": out,
                "edges": pair.a1.len(),
                "planted": pair.planted,
            }));
        }
        Command::Orbits { n, m, perm } => {
            let perm = Permutation::parse_cycles(n, &perm)?;
            print(&orbit_profile(&perm, m)?);
        }
        Command::Test {
            a1,
            a2,
            method,
            restarts,
            seed,
            threshold,
            limit,
        } => {
            let (header, t1) = read_tensor(&a1, Column::A1)?;
            let (_, t2) = read_tensor(&a2, Column::A2)?;
            let (threshold, kind) = match (threshold, header.model) {
                (Some(t), _) => (t, ThresholdKind::Fixed),
                (None, Some(model)) => (
                    asymptotic_threshold(&model)?.value,
                    ThresholdKind::Asymptotic,
                ),
                (None, None) => {
                    return Err(Error::param(
                        "no model in the tensor header; pass --threshold",
                    ))
                }
            };
            let max = match method {
                MethodArg::Exact => max_statistic_exact(&t1, &t2, limit)?,
                MethodArg::Heuristic => {
                    max_statistic_heuristic(&t1, &t2, restarts, &mut seeded(seed))?
                }
            };
            print(&TestOutcome::new(max, threshold, kind));
        }
        Command::SecondMoment {
            model,
            n,
            m,
            rho,
            method,
            cap,
        } => {
            let model = match model {
                ModelKind::Gaussian => MomentModel::Gaussian,
                ModelKind::Er => MomentModel::Er,
            };
            let method = match method {
                EnumerationArg::CycleType => Enumeration::CycleType,
                EnumerationArg::Traversal => Enumeration::Traversal,
            };
            print(&second_moment(model, n, m, rho, method, cap)?);
        }
        Command::Bounds { name, args } => print(&evaluate_bound(&name, &args)?),
        Command::Sweep {
            config,
            out,
            report,
        } => {
            let mut config = read_config(&config)?;
            if let Ok(w) = std::env::var("HYPERCORR_WORKERS") {
                config.workers = w.trim().parse().map_err(|_| {
                    Error::param(format!(
                        "HYPERCORR_WORKERS must be a positive integer, got {w:?}"
                    ))
                })?;
            }
            let result = run_experiment(&config)?;
            sweep_to_csv(&result, &out)?;
            if let Some(path) = report {
                let text = serde_json::to_string_pretty(&result).expect("report serializes");
                std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
            }
            print(&json!({
                "out": out,
                "points": result.points.len(),
                "skipped": result.points.iter().filter(|p| p.skipped).count(),
                "runtime_seconds": result.runtime_seconds,
            }));
            if result.only_infeasible() {
                eprintln!("hypercorr: every grid point was infeasible or degenerate");
                return Ok(3);
            }
        }
    }
    Ok(0)
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// `key=value` pairs; every key must be consumed.
struct Args {
    values: BTreeMap<String, String>,
}

impl Args {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value, got {item:?}")))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Args { values })
    }

    fn take_str(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn opt<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.values
            .remove(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::param(format!("bad value for {key}: {v:?}")))
            })
            .transpose()
    }

    fn req<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        self.opt(key)?
            .ok_or_else(|| Error::param(format!("missing argument {key}")))
    }

    fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            Some(k) => Err(Error::param(format!("unknown argument {k}"))),
            None => Ok(()),
        }
    }
}

fn evaluate_bound(name: &str, text: &str) -> Result<Value> {
    let mut a = Args::parse(text)?;
    let out = match name {
        "chernoff-upper" | "chernoff-lower" => {
            let upper = name == "chernoff-upper";
            let delta: f64 = a.req("delta")?;
            match a.opt::<u64>("trials")? {
                Some(trials) => {
                    let p: f64 = a.req("p")?;
                    let report = if upper {
                        bounds::chernoff_upper_report(trials, p, delta)?
                    } else {
                        bounds::chernoff_lower_report(trials, p, delta)?
                    };
                    json!({"name": name, "report": report, "dominates": report.dominates()})
                }
                None => {
                    let mu: f64 = a.req("mu")?;
                    let value = if upper {
                        bounds::chernoff_upper(mu, delta)?
                    } else {
                        bounds::chernoff_lower(mu, delta)?
                    };
                    json!({"name": name, "mu": mu, "delta": delta, "value": value})
                }
            }
        }
        "lambert-w" => {
            let x: f64 = a.req("x")?;
            let branch = match a.take_str("branch").as_deref() {
                None | Some("0") | Some("principal") => Branch::Principal,
                Some("-1") | Some("lower") => Branch::Lower,
                Some(other) => return Err(Error::param(format!("unknown branch {other:?}"))),
            };
            let w = lambert_w(x, branch)?;
            json!({"name": name, "x": x, "branch": branch, "value": w, "residual": (w * w.exp() - x).abs()})
        }
        "zeta" => {
            let z = bounds::zeta(
                a.req("k")?,
                a.req("n")?,
                a.req("m")?,
                a.req("p")?,
                a.req("s")?,
            )?;
            json!({"name": name, "value": z})
        }
        "alpha-p" => {
            let p: f64 = a.req("p")?;
            json!({"name": name, "p": p, "value": bounds::alpha_p(p)?})
        }
        "gauss-threshold" => {
            let (n, m): (usize, usize) = (a.req("n")?, a.req("m")?);
            let mut out =
                json!({"name": name, "rho2_threshold": bounds::gaussian_rho2_threshold(n, m)?});
            if let Some(rho) = a.opt::<f64>("rho")? {
                out["test_threshold"] =
                    serde_json::to_value(hypercorr::statistics::gaussian_threshold(n, m, rho)?)
                        .expect("threshold serializes");
            }
            out
        }
        "er-threshold" => {
            let (n, m, p): (usize, usize, f64) = (a.req("n")?, a.req("m")?, a.req("p")?);
            let mut out = json!({"name": name, "s2_threshold": bounds::er_s2_threshold(n, m, p)?});
            if let Some(s) = a.opt::<f64>("s")? {
                out["test_threshold"] =
                    serde_json::to_value(hypercorr::statistics::er_threshold(n, m, p, s)?)
                        .expect("threshold serializes");
            }
            out
        }
        "poissonization" => {
            let report = bounds::poissonization_report(a.req("mu")?, a.req("t")?)?;
            json!({"name": name, "report": report, "dominates": report.dominates()})
        }
        "hanson-wright" => {
            let constant = a.opt::<f64>("constant")?.unwrap_or(1.0);
            let value = bounds::hanson_wright_bound(a.req("d")?, a.req("delta")?, constant)?;
            json!({"name": name, "constant": constant, "value": value})
        }
        other => return Err(Error::param(format!("unknown bound {other:?}"))),
    };
    a.finish()?;
    Ok(out)
}
