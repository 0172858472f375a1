//! RIP satisfaction probability and RIC threshold bounds.
//!
//! P_sw(delta) = psi_ms(m[1-delta], m[1+delta]) is the probability that one
//! s-column submatrix is well conditioned; the union bound over all C(n,s)
//! supports turns its survival into a lower bound beta on the RIP
//! probability, and inverting the survival in the log domain gives the
//! threshold delta*_s(m,n,eps). Everything runs on the complement channel:
//! 1 - eps/C(n,s) is never formed (C reaches 1e600).

use crate::error::{Error, Result};
use crate::numerics::{self, log_sum_exp, LogProb, PrecisionConfig};
use crate::solve::solve_decreasing;
use crate::tw;
use crate::wishart::{self, SpectralInterval, WishartDims};

/// Measurement count m, ambient dimension n, sparsity order s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemDims {
    m: u32,
    n: u64,
    s: u32,
}

impl ProblemDims {
    pub fn new(m: u32, n: u64, s: u32) -> Result<Self> {
        if !(s >= 1 && (s as u64) < m as u64 && (m as u64) < n) {
            return Err(Error::Domain(format!(
                "problem dims need 1 <= s < m < n, got m={m}, n={n}, s={s}"
            )));
        }
        Ok(ProblemDims { m, n, s })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn wishart(&self) -> WishartDims {
        WishartDims::new(self.m, self.s).expect("s < m enforced at construction")
    }

    /// Same m,n at a different sparsity order (recovery conditions scale s).
    pub fn with_s(&self, s: u32) -> Result<Self> {
        ProblemDims::new(self.m, self.n, s)
    }

    pub fn ln_binomial(&self, cfg: &PrecisionConfig) -> Result<f64> {
        numerics::ln_binomial(cfg, self.n, self.s as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    Symmetric,
    Lower,
    Upper,
}

impl ThresholdKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThresholdKind::Symmetric => "symmetric",
            ThresholdKind::Lower => "lower",
            ThresholdKind::Upper => "upper",
        }
    }
}

/// P_sw evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact extreme-eigenvalue distribution (Theorem 1).
    Eed,
    /// Tracy-Widom approximation.
    Tw,
    /// Concentration-of-measure bound.
    Concentration,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Eed => "eed",
            Method::Tw => "tw",
            Method::Concentration => "concentration",
        }
    }
}

/// A solved RIC threshold delta*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicThreshold {
    pub kind: ThresholdKind,
    pub value: f64,
    pub epsilon: f64,
    /// Upper/symmetric thresholds may legally exceed 1; flagged, not clamped.
    pub out_of_validity: bool,
}

/// A probability lower bound of the form 1 - C(n,s) * survival, carried as
/// the log of its complement. The complement may exceed 1 (vacuous bound).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub ln_complement: f64,
    pub vacuous: bool,
}

impl BoundResult {
    pub(crate) fn from_ln_complement(ln_c: f64) -> Self {
        BoundResult {
            ln_complement: ln_c,
            vacuous: ln_c >= 0.0,
        }
    }

    /// The bound itself, when non-vacuous.
    pub fn as_logprob(&self) -> Option<LogProb> {
        if self.vacuous {
            None
        } else {
            Some(LogProb::from_ln_complement(self.ln_complement).expect("ln_complement <= 0"))
        }
    }

    /// 1 - exp(ln_complement); negative when vacuous.
    pub fn value(&self) -> f64 {
        1.0 - self.ln_complement.exp()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta = {delta} outside (0,1)")));
    }
    Ok(())
}

fn sym_interval(m: u32, x: f64) -> Result<SpectralInterval> {
    let m = m as f64;
    // past x = 1 the lower edge clamps to 0: lambda_min >= 0 is automatic
    SpectralInterval::new((m * (1.0 - x)).max(0.0), m * (1.0 + x))
}

/// P_sw(delta) = psi_ms(m[1-delta], m[1+delta]), exact.
pub fn psw_exact(cfg: &PrecisionConfig, dims: ProblemDims, delta: f64) -> Result<LogProb> {
    check_delta(delta)?;
    wishart::psi(cfg, dims.wishart(), sym_interval(dims.m, delta)?)
}

/// ln(1 - P_sw) by the selected method. The concentration and TW routes
/// are additive in the log domain by construction; the EED route resolves
/// the complement adaptively.
pub fn ln_psw_survival(
    cfg: &PrecisionConfig,
    dims: ProblemDims,
    delta: f64,
    method: Method,
) -> Result<f64> {
    check_delta(delta)?;
    match method {
        Method::Eed => {
            wishart::ln_psi_survival(cfg, dims.wishart(), sym_interval(dims.m, delta)?)
        }
        Method::Tw => Ok(tw::ln_psw_tw_survival(dims.wishart(), delta)),
        Method::Concentration => Ok(ln_concentration_survival(dims, delta)),
    }
}

fn concentration_exponents(dims: ProblemDims, delta: f64) -> (f64, f64) {
    let m = dims.m as f64;
    let r = (dims.s as f64 / m).sqrt();
    let upper = (-1.0 - r + (1.0 + delta).sqrt()).max(0.0);
    let lower = (1.0 - r - (1.0 - delta).sqrt()).max(0.0);
    (-0.5 * m * upper * upper, -0.5 * m * lower * lower)
}

/// Concentration-of-measure lower bound on P_sw; may be negative (vacuous),
/// returned unclamped with the vacuity flag.
pub fn psw_concentration_bound(dims: ProblemDims, delta: f64) -> Result<(f64, bool)> {
    check_delta(delta)?;
    let (e_up, e_lo) = concentration_exponents(dims, delta);
    let v = 1.0 - e_up.exp() - e_lo.exp();
    Ok((v, v <= 0.0))
}

fn ln_concentration_survival(dims: ProblemDims, delta: f64) -> f64 {
    let (e_up, e_lo) = concentration_exponents(dims, delta);
    log_sum_exp(e_up, e_lo)
}

/// Union-bound lower bound on the RIP probability:
/// beta(delta) >= 1 - C(n,s) * (1 - P_sw(delta)).
pub fn beta_lower_bound(
    cfg: &PrecisionConfig,
    dims: ProblemDims,
    delta: f64,
    method: Method,
) -> Result<BoundResult> {
    let ln_c = dims.ln_binomial(cfg)?;
    let ln_surv = ln_psw_survival(cfg, dims, delta, method)?;
    Ok(BoundResult::from_ln_complement(ln_c + ln_surv))
}

fn one_sided_interval(m: u32, kind: ThresholdKind, x: f64) -> Result<SpectralInterval> {
    let m = m as f64;
    match kind {
        ThresholdKind::Symmetric => SpectralInterval::new((m * (1.0 - x)).max(0.0), m * (1.0 + x)),
        ThresholdKind::Lower => SpectralInterval::new(m * (1.0 - x), f64::INFINITY),
        ThresholdKind::Upper => SpectralInterval::new(0.0, m * (1.0 + x)),
    }
}

/// ln survival of the event behind a threshold kind, EED route.
fn ln_survival_eed(
    cfg: &PrecisionConfig,
    dims: ProblemDims,
    kind: ThresholdKind,
    x: f64,
) -> Result<f64> {
    wishart::ln_psi_survival(cfg, dims.wishart(), one_sided_interval(dims.m, kind, x)?)
}

/// Solve survival(x) = eps / C(n,s) in the log domain.
pub fn ric_threshold(
    cfg: &PrecisionConfig,
    dims: ProblemDims,
    epsilon: f64,
    kind: ThresholdKind,
    method: Method,
) -> Result<RicThreshold> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0,1)")));
    }
    match method {
        Method::Tw => tw::tw_thresholds(cfg, dims, epsilon, kind),
        Method::Concentration => Err(Error::Domain(
            "threshold inversion is defined for the eed and tw methods only".into(),
        )),
        Method::Eed => {
            let ln_target = epsilon.ln() - dims.ln_binomial(cfg)?;
            let cfg = cfg.with_min_bits((-ln_target / std::f64::consts::LN_2) as u32 + 96);
            let (lo, mut hi) = match kind {
                ThresholdKind::Lower => (1e-9, 1.0 - 1e-12),
                _ => (1e-9, 4.0),
            };
            if kind != ThresholdKind::Lower {
                while ln_survival_eed(&cfg, dims, kind, hi)? > ln_target {
                    hi *= 2.0;
                    if hi > 1e4 {
                        return Err(Error::Bracket(format!(
                            "threshold not bracketed below {hi}"
                        )));
                    }
                }
            }
            let value = solve_decreasing(
                |x| Ok(ln_survival_eed(&cfg, dims, kind, x)? - ln_target),
                lo,
                hi,
                1e-8,
                1e-13,
                200,
            )?;
            Ok(RicThreshold {
                kind,
                value,
                epsilon,
                out_of_validity: kind != ThresholdKind::Lower && value >= 1.0,
            })
        }
    }
}

/// Lower bound on the CDF of the one-sided RIC at x:
/// 1 - C(n,s) * (1 - psi(one-sided window)).
pub fn aric_cdf_lower_bound(
    cfg: &PrecisionConfig,
    dims: ProblemDims,
    x: f64,
    kind: ThresholdKind,
) -> Result<BoundResult> {
    match kind {
        ThresholdKind::Lower => {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Domain(format!("lower-RIC x = {x} outside (0,1)")));
            }
        }
        ThresholdKind::Upper => {
            if !(x > 0.0) {
                return Err(Error::Domain(format!("upper-RIC x = {x} must be positive")));
            }
        }
        ThresholdKind::Symmetric => {
            if !(x > 0.0) {
                return Err(Error::Domain(format!("RIC x = {x} must be positive")));
            }
        }
    }
    let ln_c = dims.ln_binomial(cfg)?;
    let ln_surv = ln_survival_eed(cfg, dims, kind, x)?;
    Ok(BoundResult::from_ln_complement(ln_c + ln_surv))
}
