use clap::Args;
use serde_json::json;

use rdp_core::codec::{build_codec, evaluate, EvalOptions, LossyMethod, Measured};
use rdp_core::oracle::{enumerate_frontier, min_sigma_closed_form, SearchMode, DEFAULT_RESTARTS};
use rdp_core::spectra::{asymptotic_spectral_cdf, exceedance_curve};
use rdp_core::tradeoff::{
    discrepancy_report, perception_term, rd_term, rdp_paper_example, rdp_theorem,
    DISCREPANCY_TOLERANCE,
};
use rdp_core::{Budget, SourceModel};

use crate::output::{num, opt_num, parse_grid, plot_script, Csv, Outputs};
use crate::settings::{default_workers, RunConfig};
use crate::{CliError, Common};

const COMMON_KEYS: [&str; 3] = ["out", "workers", "emit-plot-script"];

fn keys<'a>(own: &[&'a str]) -> Vec<&'a str> {
    own.iter().copied().chain(COMMON_KEYS).collect()
}

fn common_flags(c: &Common) -> Vec<(&'static str, Option<String>)> {
    vec![
        ("out", c.out.clone()),
        ("workers", c.workers.clone()),
        ("emit-plot-script", c.emit_plot_script.then(|| "true".to_string())),
    ]
}

fn source(cfg: &RunConfig) -> Result<SourceModel, CliError> {
    Ok(cfg.require("source")?.parse()?)
}

fn maybe_plot(cfg: &RunConfig, outputs: &mut Outputs, x: &str, y: &str, group: Option<&str>) -> Result<(), CliError> {
    if !cfg.flag("emit-plot-script")? {
        return Ok(());
    }
    let (Some(out), Some(script)) = (outputs.out().map(|p| p.display().to_string()), outputs.sibling(".plot.py")) else {
        return Err(CliError::Usage("--emit-plot-script needs --out".into()));
    };
    outputs.file(&script, &plot_script(&out, x, y, group))
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[command(flatten)]
    common: Common,
    /// `paper-mixed`, `bernoulli:p` or `mix:w1*p1,w2*p2,...`
    #[arg(long)]
    source: Option<String>,
    /// Distortion grid `lo:hi:step`.
    #[arg(long)]
    d_grid: Option<String>,
    /// Perception grid `lo:hi:step`.
    #[arg(long)]
    s_grid: Option<String>,
    /// Also write the discrepancy report (flagged points, largest first).
    #[arg(long)]
    report: Option<String>,
}

pub fn curves(args: CurvesArgs) -> Result<(), CliError> {
    let defaults = [
        ("source", "paper-mixed".to_string()),
        ("d-grid", "0:0.5:0.05".to_string()),
        ("s-grid", "0:1:0.25".to_string()),
        ("workers", default_workers()),
    ];
    let mut flags = vec![
        ("source", args.source),
        ("d-grid", args.d_grid),
        ("s-grid", args.s_grid),
        ("report", args.report),
    ];
    flags.extend(common_flags(&args.common));
    let cfg = RunConfig::resolve(
        "curves",
        &keys(&["source", "d-grid", "s-grid", "report"]),
        &defaults,
        args.common.config.as_deref(),
        flags,
    )?;
    let model = source(&cfg)?;
    let d_grid = parse_grid(cfg.require("d-grid")?)?;
    let s_grid = parse_grid(cfg.require("s-grid")?)?;
    let paper = model.is_paper_mixed();

    let mut csv = Csv::new(&["D", "S", "rd_term", "perception_term", "R_theorem", "R_paper", "flagged"]);
    for &d in &d_grid {
        let rd = rd_term(&model, d)?;
        for &s in &s_grid {
            let pt = perception_term(&model, s)?;
            let theorem = rdp_theorem(&model, d, s)?.value;
            // The printed piecewise formula only covers this source and D <= 1/2.
            let printed = (paper && d <= 0.5).then(|| rdp_paper_example(d, s)).transpose()?;
            let flagged = printed.map(|p| ((theorem - p).abs() > DISCREPANCY_TOLERANCE).to_string());
            csv.row(&[num(d), num(s), num(rd), num(pt), num(theorem), opt_num(printed), flagged.unwrap_or_default()]);
        }
    }
    let mut outputs = Outputs::new(&cfg);
    outputs.main_table(&csv)?;

    let mut flagged_count = None;
    if let Some(path) = cfg.get("report") {
        if !paper {
            return Err(CliError::Usage("--report compares against the paper-mixed source only".into()));
        }
        let in_domain: Vec<f64> = d_grid.iter().copied().filter(|&d| d <= 0.5).collect();
        let report = discrepancy_report(&in_domain, &s_grid)?;
        let mut rep = Csv::new(&["D", "S", "R_theorem", "R_paper", "difference"]);
        for r in &report {
            rep.row(&[num(r.distortion), num(r.perception), num(r.theorem), num(r.paper), num(r.difference)]);
        }
        outputs.file(path.as_ref(), rep.as_str())?;
        flagged_count = Some(report.len());
    }
    maybe_plot(&cfg, &mut outputs, "D", "R_theorem", Some("S"))?;
    outputs.finish(json!({ "flagged": flagged_count }))
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    source: Option<String>,
    /// Block length(s), comma-separated.
    #[arg(long)]
    n: Option<String>,
    /// Rate grid `lo:hi:step` in bits per symbol.
    #[arg(long)]
    r_grid: Option<String>,
    /// Path for the asymptotic step-function rows (default `<out>.asymptotic.csv`).
    #[arg(long)]
    sidecar: Option<String>,
}

pub fn spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let defaults = [
        ("source", "paper-mixed".to_string()),
        ("n", "1000".to_string()),
        ("r-grid", "0:1.2:0.01".to_string()),
        ("workers", default_workers()),
    ];
    let mut flags = vec![("source", args.source), ("n", args.n), ("r-grid", args.r_grid), ("sidecar", args.sidecar)];
    flags.extend(common_flags(&args.common));
    let cfg = RunConfig::resolve(
        "spectrum",
        &keys(&["source", "n", "r-grid", "sidecar"]),
        &defaults,
        args.common.config.as_deref(),
        flags,
    )?;
    let model = source(&cfg)?;
    let lengths: Vec<usize> = cfg.parse_list("n")?;
    let grid = parse_grid(cfg.require("r-grid")?)?;

    let mut csv = Csv::new(&["n", "R", "F_exact"]);
    for &n in &lengths {
        let curve = exceedance_curve(&model, n, &grid)?;
        for (r, f) in curve.points {
            csv.row(&[n.to_string(), num(r), num(f)]);
        }
    }
    let mut outputs = Outputs::new(&cfg);
    outputs.main_table(&csv)?;

    let steps = asymptotic_spectral_cdf(&model);
    let sidecar = cfg.get("sidecar").map(Into::into).or_else(|| outputs.sibling(".asymptotic.csv"));
    if let Some(path) = &sidecar {
        let mut side = Csv::new(&["R", "F_asymptotic"]);
        for &r in &grid {
            side.row(&[num(r), num(steps.eval(r))]);
        }
        outputs.file(path, side.as_str())?;
    }
    maybe_plot(&cfg, &mut outputs, "R", "F_exact", Some("n"))?;
    outputs.finish(json!({
        "thresholds": steps.thresholds(),
        "levels": steps.levels(),
    }))
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    source: Option<String>,
    /// Block length(s), comma-separated.
    #[arg(long)]
    n: Option<String>,
    /// Rate(s) in bits per symbol; M = floor(2^(n R)).
    #[arg(long)]
    rate: Option<String>,
    /// Per-stage codeword budget(s); exclusive with --rate.
    #[arg(long)]
    m: Option<String>,
    /// random, greedy-cover or type-quantize (comma-separated for several).
    #[arg(long)]
    lossy_method: Option<String>,
    /// Monte Carlo samples when n exceeds the exact cap.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Largest n evaluated by full enumeration.
    #[arg(long)]
    exact_cap: Option<String>,
    /// Tail probability for the per-block distortion quantile.
    #[arg(long)]
    tail: Option<String>,
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let defaults = [
        ("source", "paper-mixed".to_string()),
        ("lossy-method", "random".to_string()),
        ("samples", "10000".to_string()),
        ("seed", "0".to_string()),
        ("exact-cap", rdp_core::codec::DEFAULT_EXACT_CAP.to_string()),
        ("tail", "0.01".to_string()),
        ("workers", default_workers()),
    ];
    let mut flags = vec![
        ("source", args.source),
        ("n", args.n),
        ("rate", args.rate),
        ("m", args.m),
        ("lossy-method", args.lossy_method),
        ("samples", args.samples),
        ("seed", args.seed),
        ("exact-cap", args.exact_cap),
        ("tail", args.tail),
    ];
    flags.extend(common_flags(&args.common));
    let cfg = RunConfig::resolve(
        "simulate",
        &keys(&["source", "n", "rate", "m", "lossy-method", "samples", "seed", "exact-cap", "tail"]),
        &defaults,
        args.common.config.as_deref(),
        flags,
    )?;
    let model = source(&cfg)?;
    let lengths: Vec<usize> = cfg.parse_list("n")?;
    let methods: Vec<LossyMethod> = cfg.parse_list("lossy-method")?;
    let opts = EvalOptions {
        samples: cfg.parse("samples")?,
        seed: cfg.parse("seed")?,
        exact_cap: cfg.parse("exact-cap")?,
        tail: cfg.parse("tail")?,
        workers: cfg.workers()?,
    };
    let budgets: Vec<(usize, u128)> = match (cfg.get("m"), cfg.get("rate")) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --m or --rate, not both".into())),
        (None, None) => return Err(CliError::Usage("one of --m or --rate is required".into())),
        (Some(_), None) => {
            let ms: Vec<u128> = cfg.parse_list("m")?;
            lengths.iter().flat_map(|&n| ms.iter().map(move |&m| (n, m))).collect()
        }
        (None, Some(_)) => {
            let rates: Vec<f64> = cfg.parse_list("rate")?;
            let mut out = Vec::new();
            for &n in &lengths {
                for &r in &rates {
                    let m = Budget::from_rate(n, r)?
                        .count()
                        .ok_or_else(|| CliError::Usage(format!("rate {r} at n = {n} gives an unrepresentable M")))?;
                    out.push((n, m));
                }
            }
            out
        }
    };

    let mut csv = Csv::new(&[
        "n",
        "M",
        "lossy_method",
        "rate",
        "lossless_size",
        "codebook_size",
        "epsilon",
        "distortion",
        "distortion_stderr",
        "distortion_exact",
        "distortion_quantile",
        "sigma",
    ]);
    for &(n, m) in &budgets {
        for &method in &methods {
            let codec = build_codec(&model, n, m, method, opts.seed)?;
            let metrics = evaluate(&codec, &model, &opts)?;
            csv.row(&[
                n.to_string(),
                m.to_string(),
                method.to_string(),
                num(metrics.rate),
                codec.lossless().size().to_string(),
                codec.codebook().len().to_string(),
                num(metrics.epsilon),
                num(metrics.distortion.value()),
                opt_num(metrics.distortion.stderr()),
                metrics.distortion.is_exact().to_string(),
                opt_num(metrics.distortion_quantile.as_ref().map(Measured::value)),
                opt_num(metrics.sigma),
            ]);
        }
    }
    let mut outputs = Outputs::new(&cfg);
    outputs.main_table(&csv)?;
    maybe_plot(&cfg, &mut outputs, "rate", "distortion", Some("lossy_method"))?;
    outputs.finish(json!({ "configurations": csv.rows() }))
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Maximum number of reconstruction values.
    #[arg(long)]
    m: Option<String>,
    /// Local search instead of exhaustive enumeration (allows n = 4).
    #[arg(long)]
    heuristic: bool,
    #[arg(long)]
    restarts: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Witness dump path (default `<out>.witness.txt`).
    #[arg(long)]
    witness: Option<String>,
}

pub fn oracle(args: OracleArgs) -> Result<(), CliError> {
    let defaults = [
        ("source", "paper-mixed".to_string()),
        ("heuristic", "false".to_string()),
        ("restarts", DEFAULT_RESTARTS.to_string()),
        ("seed", "0".to_string()),
        ("workers", default_workers()),
    ];
    let mut flags = vec![
        ("source", args.source),
        ("n", args.n),
        ("m", args.m),
        ("heuristic", args.heuristic.then(|| "true".to_string())),
        ("restarts", args.restarts),
        ("seed", args.seed),
        ("witness", args.witness),
    ];
    flags.extend(common_flags(&args.common));
    let cfg = RunConfig::resolve(
        "oracle",
        &keys(&["source", "n", "m", "heuristic", "restarts", "seed", "witness"]),
        &defaults,
        args.common.config.as_deref(),
        flags,
    )?;
    let model = source(&cfg)?;
    let n: usize = cfg.parse("n")?;
    let m: usize = cfg.parse("m")?;
    let mode = if cfg.flag("heuristic")? {
        SearchMode::Heuristic { restarts: cfg.parse("restarts")?, seed: cfg.parse("seed")? }
    } else {
        SearchMode::Exhaustive
    };
    let pool = rayon_pool(cfg.workers()?)?;
    let frontier = pool.install(|| enumerate_frontier(&model, n, m, mode))?;

    let mut csv = Csv::new(&["M", "D", "sigma", "exhaustive"]);
    let mut witnesses = String::new();
    for p in &frontier.points {
        csv.row(&[p.m.to_string(), num(p.distortion), num(p.sigma), frontier.exhaustive.to_string()]);
        witnesses.push_str(&p.witness.to_line());
        witnesses.push('\n');
    }
    let mut outputs = Outputs::new(&cfg);
    outputs.main_table(&csv)?;
    let witness_path = cfg.get("witness").map(Into::into).or_else(|| outputs.sibling(".witness.txt"));
    if let Some(path) = &witness_path {
        outputs.file(path, &witnesses)?;
    }
    maybe_plot(&cfg, &mut outputs, "D", "sigma", None)?;
    let closed = min_sigma_closed_form(&model, n, &Budget::new(m as u128)?)?;
    outputs.finish(json!({
        "exhaustive": frontier.exhaustive,
        "min_sigma_closed_form": closed,
    }))
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}
