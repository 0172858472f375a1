//! Command-line surface for the ric-limits library: single evaluations,
//! figure sweeps, the Table-I regression, and the Monte Carlo validator.
//!
//! Results go to standard output as one JSON document, or as CSV when
//! `--out` names a file (the tabular commands `table1` and `sweep` print
//! CSV to stdout when no `--out` is given). Every probability is printed
//! as a decimal together with log10 of itself and of its complement.
//!
//! Exit codes: 0 success, 2 domain/bracketing error, 3 precision exhausted.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ric_limits::mc::{self, SimSpec};
use ric_limits::recovery;
use ric_limits::ric::{self, Method, ProblemDims, ThresholdKind};
use ric_limits::robustness::{self, Constant};
use ric_limits::tw;
use ric_limits::wishart::{self, SpectralInterval, WishartDims};
use ric_limits::{Error, LogProb, PrecisionConfig};

#[derive(Parser)]
#[command(
    name = "ric-limits",
    version,
    about = "Exact-distribution bounds on restricted isometry constants of Gaussian matrices"
)]
struct Cli {
    /// Starting mantissa bits for adaptive evaluation
    #[arg(long, global = true, default_value_t = 256)]
    bits: u32,
    /// Precision-escalation ceiling in bits (default 8192; the
    /// RIC_LIMITS_MAX_BITS environment variable overrides the default,
    /// and this flag overrides both)
    #[arg(long, global = true)]
    max_bits: Option<u32>,
    /// Relative agreement tolerance between precision rungs
    #[arg(long, global = true, default_value_t = 1e-12)]
    rel_tol: f64,
    /// Write CSV to this path instead of JSON to stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Symmetric,
    Lower,
    Upper,
}

impl From<KindArg> for ThresholdKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Symmetric => ThresholdKind::Symmetric,
            KindArg::Lower => ThresholdKind::Lower,
            KindArg::Upper => ThresholdKind::Upper,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Eed,
    Tw,
    Concentration,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Eed => Method::Eed,
            MethodArg::Tw => Method::Tw,
            MethodArg::Concentration => Method::Concentration,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichConstant {
    C1,
    C2,
}

#[derive(Subcommand)]
enum Cmd {
    /// psi_ms(a,b): both Wishart extremes inside [a,b]
    Psi {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = f64::INFINITY)]
        b: f64,
    },
    /// P_sw(delta): one normalized submatrix satisfies the RIP window
    Psw {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Eed)]
        method: MethodArg,
    },
    /// beta(delta): union-bound lower bound on the RIP probability
    Beta {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Eed)]
        method: MethodArg,
    },
    /// RIC threshold delta* with survival epsilon/C(n,s)
    Threshold {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = KindArg::Symmetric)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Eed)]
        method: MethodArg,
    },
    /// eta-percentiles of the normalized extreme eigenvalues
    Eigq {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        eta: f64,
    },
    /// Maximum certified sparsity for a recovery condition
    Smax {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        condition: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Eed)]
        method: MethodArg,
    },
    /// Probabilistic robustness constants C1*, C2*
    Robust {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value_t = 1e-2)]
        eps1: f64,
        #[arg(long, default_value_t = 1e-2)]
        eps2: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Eed)]
        method: MethodArg,
        /// Instead: invert this constant at --target and report delta
        #[arg(long, value_enum)]
        invert: Option<WhichConstant>,
        #[arg(long)]
        target: Option<f64>,
    },
    /// Cross-check closed forms against Monte Carlo
    Validate {
        #[arg(long, default_value = "mc")]
        suite: String,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Table I regression: EED and TW thresholds at m/n in {0.4, 0.6, 0.8}
    Table1 {
        #[arg(long, default_value_t = 2000)]
        m: u32,
        #[arg(long, default_value_t = 4)]
        s: u32,
        #[arg(long, default_value_t = 1e-2)]
        epsilon: f64,
    },
    /// Figure-data sweeps (desk-scaled defaults)
    Sweep {
        #[arg(long, value_enum)]
        preset: Preset,
    },
}

/// A finished command: one JSON document or one CSV table.
enum Output {
    Json(Value),
    Csv { header: Vec<&'static str>, rows: Vec<Vec<String>> },
}

fn prob_json(p: LogProb) -> Value {
    let l10 = std::f64::consts::LOG10_E;
    json!({
        "value": p.prob(),
        "log10": p.ln_prob() * l10,
        "log10_complement": p.ln_complement() * l10,
    })
}

/// The complement probability 1 - p, printed with its channels swapped.
fn survival_json(p: LogProb) -> Value {
    let l10 = std::f64::consts::LOG10_E;
    json!({
        "value": p.complement(),
        "log10": p.ln_complement() * l10,
        "log10_complement": p.ln_prob() * l10,
    })
}

fn ln_complement_json(ln_c: f64, vacuous: bool) -> Value {
    let l10 = std::f64::consts::LOG10_E;
    if vacuous {
        json!({ "value": Value::Null, "vacuous": true, "log10_complement": ln_c * l10 })
    } else {
        prob_json(LogProb::from_ln_complement(ln_c).expect("non-vacuous bound"))
    }
}

fn num(x: f64) -> String {
    // shortest representation that round-trips exactly
    format!("{x}")
}

fn run(cli: &Cli, cfg: &PrecisionConfig) -> ric_limits::Result<Output> {
    match &cli.cmd {
        Cmd::Psi { m, s, a, b } => {
            let dims = WishartDims::new(*m, *s)?;
            let iv = SpectralInterval::new(*a, *b)?;
            let p = wishart::psi(cfg, dims, iv)?;
            Ok(Output::Json(json!({
                "m": m, "s": s, "a": a, "b": b,
                "psi": prob_json(p),
                "survival": survival_json(p),
            })))
        }
        Cmd::Psw { m, n, s, delta, method } => {
            let dims = ProblemDims::new(*m, *n, *s)?;
            let method = Method::from(*method);
            let doc = match method {
                Method::Concentration => {
                    let (bound, vacuous) = ric::psw_concentration_bound(dims, *delta)?;
                    json!({
                        "m": m, "n": n, "s": s, "delta": delta,
                        "method": method.as_str(),
                        "psw_lower_bound": bound,
                        "vacuous": vacuous,
                    })
                }
                _ => {
                    let ln_s = ric::ln_psw_survival(cfg, dims, *delta, method)?;
                    let p = LogProb::from_ln_complement(ln_s.min(0.0))?;
                    json!({
                        "m": m, "n": n, "s": s, "delta": delta,
                        "method": method.as_str(),
                        "psw": prob_json(p),
                    })
                }
            };
            Ok(Output::Json(doc))
        }
        Cmd::Beta { m, n, s, delta, method } => {
            let dims = ProblemDims::new(*m, *n, *s)?;
            let b = ric::beta_lower_bound(cfg, dims, *delta, Method::from(*method))?;
            Ok(Output::Json(json!({
                "m": m, "n": n, "s": s, "delta": delta,
                "method": Method::from(*method).as_str(),
                "beta_lower_bound": ln_complement_json(b.ln_complement, b.vacuous),
            })))
        }
        Cmd::Threshold { m, n, s, epsilon, kind, method } => {
            let dims = ProblemDims::new(*m, *n, *s)?;
            let t = ric::ric_threshold(
                cfg,
                dims,
                *epsilon,
                ThresholdKind::from(*kind),
                Method::from(*method),
            )?;
            Ok(Output::Json(json!({
                "m": m, "n": n, "s": s, "epsilon": epsilon,
                "kind": t.kind.as_str(),
                "method": Method::from(*method).as_str(),
                "delta_star": t.value,
                "out_of_validity": t.out_of_validity,
            })))
        }
        Cmd::Eigq { m, s, eta } => {
            let dims = WishartDims::new(*m, *s)?;
            let (lmin, lmax) = wishart::eig_percentiles(cfg, dims, *eta)?;
            Ok(Output::Json(json!({
                "m": m, "s": s, "eta": eta,
                "lambda_min_star": lmin,
                "lambda_max_star": lmax,
            })))
        }
        Cmd::Smax { m, n, eta, condition, method } => {
            let cond = match recovery::find_condition(condition) {
                Some(c) => c,
                None => {
                    let names: Vec<String> = recovery::builtin_catalog()
                        .iter()
                        .map(|c| format!("{c:?}"))
                        .collect();
                    return Err(Error::Domain(format!(
                        "unknown condition '{condition}'; available:\n  {}",
                        names.join("\n  ")
                    )));
                }
            };
            let r = recovery::max_sparsity(cfg, *m, *n, *eta, &cond, Method::from(*method))?;
            Ok(Output::Json(json!({
                "m": m, "n": n, "eta": eta,
                "condition": r.condition,
                "s_star": r.s_star,
                "margin_at_star": r.margin_at_star,
                "margin_at_fail": r.margin_at_fail,
            })))
        }
        Cmd::Robust { m, n, s, eps1, eps2, method, invert, target } => {
            if let Some(which) = invert {
                let target = target.ok_or_else(|| {
                    Error::Domain("--invert needs --target".into())
                })?;
                let which = match which {
                    WhichConstant::C1 => Constant::C1,
                    WhichConstant::C2 => Constant::C2,
                };
                let d = robustness::constant_inverse(which, target)?;
                return Ok(Output::Json(json!({
                    "target": target, "delta": d,
                })));
            }
            let dims = ProblemDims::new(*m, *n, *s)?;
            let r = robustness::robustness_thresholds(
                cfg,
                dims,
                *eps1,
                *eps2,
                Method::from(*method),
            )?;
            Ok(Output::Json(json!({
                "m": m, "n": n, "s": s,
                "epsilon1": r.epsilon1, "epsilon2": r.epsilon2,
                "delta_star_1": r.delta_star_1, "delta_star_2": r.delta_star_2,
                "c1_star": r.c1_star, "c2_star": r.c2_star,
            })))
        }
        Cmd::Validate { suite, m, s, trials, seed } => {
            if suite != "mc" {
                return Err(Error::Domain(format!(
                    "unknown validation suite '{suite}' (available: mc)"
                )));
            }
            cmd_validate_mc(cfg, *m, *s, *trials, *seed)
        }
        Cmd::Table1 { m, s, epsilon } => cmd_table1(cfg, *m, *s, *epsilon),
        Cmd::Sweep { preset } => cmd_sweep(cfg, *preset),
    }
}

/// Monte Carlo cross-check: a percentile-anchored window grid whose true
/// psi values sit in the testable bulk, compared at 4 standard errors.
fn cmd_validate_mc(
    cfg: &PrecisionConfig,
    m: u32,
    s: u32,
    trials: u64,
    seed: u64,
) -> ric_limits::Result<Output> {
    let dims = WishartDims::new(m, s)?;
    let spec = SimSpec::new(trials, seed)?;
    let mf = m as f64;
    let mut a_edges = Vec::new();
    let mut b_edges = Vec::new();
    for eta in [0.05, 0.1, 0.2, 0.3, 0.45] {
        let (lmin, lmax) = wishart::eig_percentiles(cfg, dims, eta)?;
        a_edges.push(mf * lmin);
        b_edges.push(mf * lmax);
    }
    let mut windows = Vec::new();
    for &a in &a_edges {
        for &b in &b_edges {
            windows.push((a, b));
        }
    }
    let est = mc::empirical_psi_grid(dims, spec, &windows);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (idx, &(a, b)) in windows.iter().enumerate() {
        let truth = wishart::psi(cfg, dims, SpectralInterval::new(a, b)?)?.prob();
        let se = (est[idx] * (1.0 - est[idx]) / trials as f64).sqrt().max(1e-4);
        let dev = (truth - est[idx]).abs() / se;
        worst = worst.max(dev);
        if dev > 4.0 {
            pass = false;
        }
        rows.push(json!({
            "a": a, "b": b, "psi": truth, "psi_hat": est[idx], "dev_se": dev,
        }));
    }
    Ok(Output::Json(json!({
        "suite": "mc", "m": m, "s": s, "trials": trials, "seed": seed,
        "status": if pass { "PASS" } else { "FAIL" },
        "max_dev_se": worst,
        "grid": rows,
    })))
}

fn cmd_table1(cfg: &PrecisionConfig, m: u32, s: u32, epsilon: f64) -> ric_limits::Result<Output> {
    let mut rows = Vec::new();
    for ratio in [0.4, 0.6, 0.8] {
        let n = (m as f64 / ratio).round() as u64;
        let dims = ProblemDims::new(m, n, s)?;
        for kind in [ThresholdKind::Upper, ThresholdKind::Lower] {
            let eed = ric::ric_threshold(cfg, dims, epsilon, kind, Method::Eed)?.value;
            let tw = ric::ric_threshold(cfg, dims, epsilon, kind, Method::Tw)?.value;
            rows.push(vec![num(ratio), kind.as_str().to_string(), num(eed), num(tw)]);
        }
    }
    Ok(Output::Csv {
        header: vec!["m_over_n", "kind", "eed", "tw"],
        rows,
    })
}

fn cmd_sweep(cfg: &PrecisionConfig, preset: Preset) -> ric_limits::Result<Output> {
    match preset {
        // eta-percentiles of both normalized extremes across sparsity ratios
        Preset::Fig1 => {
            let eta = 1e-10;
            let mut rows = Vec::new();
            for m in [100u32, 200] {
                for i in 1..=10 {
                    let r = 0.05 * i as f64;
                    let s = ((r * m as f64).round() as u32).max(1);
                    let dims = WishartDims::new(m, s)?;
                    let (lmin, lmax) = wishart::eig_percentiles(cfg, dims, eta)?;
                    rows.push(vec![
                        num(s as f64 / m as f64),
                        m.to_string(),
                        num(lmin),
                        num(lmax),
                    ]);
                }
            }
            Ok(Output::Csv {
                header: vec!["s_over_m", "m", "lambda_min_star", "lambda_max_star"],
                rows,
            })
        }
        // union-bound RIP probability, EED vs concentration
        Preset::Fig2 => {
            let (n, m, delta) = (3000u64, 1200u32, 1.0 / 3.0);
            let l10 = std::f64::consts::LOG10_E;
            let mut rows = Vec::new();
            for method in [Method::Eed, Method::Concentration] {
                for s in (5..=120).step_by(5) {
                    let dims = ProblemDims::new(m, n, s)?;
                    let b = ric::beta_lower_bound(cfg, dims, delta, method)?;
                    rows.push(vec![
                        num(s as f64 / n as f64),
                        method.as_str().to_string(),
                        num(b.ln_complement * l10),
                    ]);
                }
            }
            Ok(Output::Csv {
                header: vec!["s_over_n", "method", "log10_complement_beta"],
                rows,
            })
        }
        // single-submatrix window probability: exact vs TW vs concentration
        Preset::Fig3 => {
            let (m, n, s) = (400u32, 4000u64, 20u32);
            let dims = ProblemDims::new(m, n, s)?;
            let mut rows = Vec::new();
            for i in 1..=30 {
                let delta = i as f64 / 30.0;
                let exact = ric::psw_exact(cfg, dims, delta)?.prob();
                let tw_val = tw::psw_tw_approx(dims.wishart(), delta)?.prob();
                let (conc, _) = ric::psw_concentration_bound(dims, delta)?;
                rows.push(vec![num(delta), num(exact), num(tw_val), num(conc)]);
            }
            Ok(Output::Csv {
                header: vec!["delta", "psw_exact", "psw_tw", "psw_concentration"],
                rows,
            })
        }
        // maximum certified sparsity per recovery condition
        Preset::Fig4 => {
            let eta = 1e-3;
            let mut rows = Vec::new();
            for m in [200u32, 400] {
                let n = 10 * m as u64;
                for cond in recovery::builtin_catalog() {
                    let r = recovery::max_sparsity(cfg, m, n, eta, &cond, Method::Eed)?;
                    rows.push(vec![
                        m.to_string(),
                        n.to_string(),
                        cond.name.clone(),
                        r.s_star.to_string(),
                        num(r.s_star as f64 / m as f64),
                    ]);
                }
            }
            Ok(Output::Csv {
                header: vec!["m", "n", "condition", "s_star", "s_star_over_m"],
                rows,
            })
        }
        // RIC thresholds against the undersampling ratio
        Preset::Fig5 => {
            let (m, s, eps) = (1000u32, 4u32, 1e-2);
            let mut rows = Vec::new();
            for i in 1..=9 {
                let ratio = 0.1 * i as f64;
                let n = (m as f64 / ratio).round() as u64;
                let dims = ProblemDims::new(m, n, s)?;
                for kind in [ThresholdKind::Upper, ThresholdKind::Lower, ThresholdKind::Symmetric]
                {
                    for method in [Method::Eed, Method::Tw] {
                        let t = ric::ric_threshold(cfg, dims, eps, kind, method)?;
                        rows.push(vec![
                            num(ratio),
                            kind.as_str().to_string(),
                            method.as_str().to_string(),
                            num(t.value),
                        ]);
                    }
                }
            }
            Ok(Output::Csv {
                header: vec!["m_over_n", "kind", "method", "delta_star"],
                rows,
            })
        }
        // robustness constants along the sparsity axis
        Preset::Fig6 => {
            let (m, eps) = (2000u32, 1e-2);
            let n = 4 * m as u64;
            let mut rows = Vec::new();
            for s in 1..=30u32 {
                let dims = ProblemDims::new(m, n, s)?;
                let d = ric::ric_threshold(
                    cfg,
                    dims,
                    eps,
                    ThresholdKind::Symmetric,
                    Method::Eed,
                )?
                .value;
                if d >= 1.0 / 3.0 {
                    break;
                }
                rows.push(vec![
                    s.to_string(),
                    num(d),
                    num(robustness::c1(d)?),
                    num(robustness::c2(d)?),
                ]);
            }
            Ok(Output::Csv {
                header: vec!["s", "delta_star", "c1_star", "c2_star"],
                rows,
            })
        }
    }
}

fn emit(out: &Option<PathBuf>, output: Output) -> std::io::Result<()> {
    match output {
        Output::Json(doc) => {
            let text = serde_json::to_string_pretty(&doc).expect("JSON serialization");
            match out {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => println!("{text}"),
            }
        }
        Output::Csv { header, rows } => {
            let mut buf = String::new();
            buf.push_str(&header.join(","));
            buf.push('\n');
            for row in rows {
                buf.push_str(&row.join(","));
                buf.push('\n');
            }
            match out {
                Some(path) => std::fs::write(path, buf)?,
                None => print!("{buf}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let max_bits = cli.max_bits.unwrap_or_else(|| {
        std::env::var("RIC_LIMITS_MAX_BITS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(8192)
    });
    let cfg = match PrecisionConfig::new(cli.bits, max_bits, cli.rel_tol) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ric-limits: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &cfg) {
        Ok(output) => {
            if let Err(e) = emit(&cli.out, output) {
                eprintln!("ric-limits: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ric-limits: {e}");
            let code = match e {
                Error::PrecisionExhausted { .. } => 3,
                _ => 2,
            };
            let _ = std::io::stderr().flush();
            ExitCode::from(code)
        }
    }
}
