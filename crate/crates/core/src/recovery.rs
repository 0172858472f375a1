//! Catalog of RIC-based sufficient recovery conditions and the maximum
//! sparsity order certifiable at a target recovery probability.
//!
//! Symmetric conditions are tests "delta_{k s} < bound"; asymmetric ones
//! are "f(l_delta_{k1 s}, u_delta_{k2 s}) < 1" with f nondecreasing in both
//! arguments. For asymmetric conditions the failure probability eta is
//! split equally between the two one-sided RIC events.

use crate::error::{Error, Result};
use crate::numerics::PrecisionConfig;
use crate::ric::{self, BoundResult, Method, ProblemDims, ThresholdKind};
use crate::solve::solve_decreasing;

#[derive(Clone)]
pub enum ConditionForm {
    Symmetric { k: u32, bound: f64 },
    Asymmetric { k1: u32, k2: u32, f: fn(f64, f64) -> f64 },
}

#[derive(Clone)]
pub struct RecoveryCondition {
    pub name: String,
    pub form: ConditionForm,
}

impl std::fmt::Debug for RecoveryCondition {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.form {
            ConditionForm::Symmetric { k, bound } => {
                write!(fm, "{}: delta_{{{}s}} < {}", self.name, k, bound)
            }
            ConditionForm::Asymmetric { k1, k2, .. } => {
                write!(fm, "{}: f(ldelta_{{{}s}}, udelta_{{{}s}}) < 1", self.name, k1, k2)
            }
        }
    }
}

impl RecoveryCondition {
    pub fn symmetric(name: &str, k: u32, bound: f64) -> Result<Self> {
        if k < 1 {
            return Err(Error::Domain("order multiplier k must be >= 1".into()));
        }
        if !(bound > 0.0 && bound < 1.0) {
            return Err(Error::Domain(format!("symmetric bound {bound} outside (0,1)")));
        }
        Ok(RecoveryCondition {
            name: name.to_string(),
            form: ConditionForm::Symmetric { k, bound },
        })
    }

    /// User-supplied asymmetric condition; probed for monotonicity in both
    /// arguments and for f(0,0) < 1 before acceptance.
    pub fn asymmetric(name: &str, k1: u32, k2: u32, f: fn(f64, f64) -> f64) -> Result<Self> {
        if k1 < 1 || k2 < 1 {
            return Err(Error::Domain("order multipliers must be >= 1".into()));
        }
        if !(f(0.0, 0.0) < 1.0) {
            return Err(Error::Domain(format!("f(0,0) = {} not < 1", f(0.0, 0.0))));
        }
        let grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.999 / 19.0).collect();
        for &l in &grid {
            for &u in &grid {
                if f(l + 0.999 / 19.0, u) < f(l, u) - 1e-12
                    || f(l, u + 0.999 / 19.0) < f(l, u) - 1e-12
                {
                    return Err(Error::Domain(format!(
                        "f not nondecreasing near ({l}, {u})"
                    )));
                }
            }
        }
        Ok(RecoveryCondition {
            name: name.to_string(),
            form: ConditionForm::Asymmetric { k1, k2, f },
        })
    }

    /// Largest order multiplier (controls feasibility k*s < m).
    pub fn max_multiplier(&self) -> u32 {
        match self.form {
            ConditionForm::Symmetric { k, .. } => k,
            ConditionForm::Asymmetric { k1, k2, .. } => k1.max(k2),
        }
    }
}

fn f_ecg(l: f64, u: f64) -> f64 {
    2.0 * l + u
}

fn f_fl(l: f64, u: f64) -> f64 {
    if l >= 1.0 {
        return f64::INFINITY;
    }
    (1.0 + std::f64::consts::SQRT_2) / 4.0 * ((1.0 + u) / (1.0 - l) - 1.0)
}

/// The printed condition is ldelta_2s + [ldelta_6s + udelta_6s]/4 < 1,
/// mixing two orders. Since ldelta_2s <= ldelta_6s, testing
/// l6 + (l6 + u6)/4 < 1 at order 6s is a valid (conservative) surrogate
/// within the two-multiplier interface.
fn f_bt(l: f64, u: f64) -> f64 {
    l + (l + u) / 4.0
}

fn f_bctt(l: f64, u: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * (u + l) / (2.0 + u - l)
}

/// The nine catalog entries, constants as printed.
pub fn builtin_catalog() -> Vec<RecoveryCondition> {
    vec![
        RecoveryCondition::symmetric("ctz13", 1, 1.0 / 3.0).unwrap(),
        RecoveryCondition::symmetric("fr-2s", 2, 0.6246).unwrap(),
        RecoveryCondition::symmetric("iht-3s", 3, 0.5773).unwrap(),
        RecoveryCondition::symmetric("cosamp-4s", 4, 0.4782).unwrap(),
        RecoveryCondition::symmetric("omp-13s", 13, 0.1666).unwrap(),
        RecoveryCondition::asymmetric("ecg", 1, 1, f_ecg).unwrap(),
        RecoveryCondition::asymmetric("fl", 2, 2, f_fl).unwrap(),
        RecoveryCondition::asymmetric("bt", 6, 6, f_bt).unwrap(),
        RecoveryCondition::asymmetric("bctt", 3, 3, f_bctt).unwrap(),
    ]
}

pub fn find_condition(name: &str) -> Option<RecoveryCondition> {
    builtin_catalog().into_iter().find(|c| c.name == name)
}

/// Best provable recovery probability for s-sparse signals under `cond`.
///
/// Symmetric conditions delegate to the union bound beta at order k*s.
/// Asymmetric conditions search for the smallest eta whose eta/2-split
/// one-sided thresholds still pass the test; the bound is then 1 - eta.
pub fn recovery_probability_bound(
    cfg: &PrecisionConfig,
    dims: ProblemDims,
    cond: &RecoveryCondition,
    method: Method,
) -> Result<BoundResult> {
    cond.max_multiplier()
        .checked_mul(dims.s())
        .filter(|&o| o < dims.m())
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "condition {} needs order {} * s = {} below m = {}",
                cond.name,
                cond.max_multiplier(),
                cond.max_multiplier() as u64 * dims.s() as u64,
                dims.m()
            ))
        })?;
    match cond.form {
        ConditionForm::Symmetric { k, bound } => {
            let d = dims.with_s(k * dims.s())?;
            ric::beta_lower_bound(cfg, d, bound, method)
        }
        ConditionForm::Asymmetric { k1, k2, f } => {
            let test = |ln_eta: f64| -> Result<f64> {
                let eta_half = (ln_eta - std::f64::consts::LN_2).exp();
                let d1 = dims.with_s(k1 * dims.s())?;
                let d2 = dims.with_s(k2 * dims.s())?;
                let l = ric::ric_threshold(cfg, d1, eta_half, ThresholdKind::Lower, method)?;
                let u = ric::ric_threshold(cfg, d2, eta_half, ThresholdKind::Upper, method)?;
                Ok(f(l.value, u.value) - 1.0)
            };
            let (lo, hi) = (-640.0, -1e-6);
            if test(hi)? >= 0.0 {
                // fails even with the weakest certification
                return Ok(BoundResult::from_ln_complement(0.0));
            }
            if test(lo)? < 0.0 {
                // passes at the deepest eta probed
                return Ok(BoundResult::from_ln_complement(lo));
            }
            let ln_eta = solve_decreasing(test, lo, hi, 1e-9, 1e-12, 120)?;
            Ok(BoundResult::from_ln_complement(ln_eta))
        }
    }
}

/// Result of the maximum-sparsity search.
#[derive(Debug, Clone)]
pub struct SparsityResult {
    pub s_star: u32,
    pub eta: f64,
    pub condition: String,
    /// Test margin at s_star (negative = pass); None when s_star = 0.
    pub margin_at_star: Option<f64>,
    /// Test margin at s_star + 1 (nonnegative = fail), when evaluated.
    pub margin_at_fail: Option<f64>,
}

/// Test margin for one s: negative passes, nonnegative fails.
fn condition_margin(
    cfg: &PrecisionConfig,
    m: u32,
    n: u64,
    s: u32,
    eta: f64,
    cond: &RecoveryCondition,
    method: Method,
) -> Result<f64> {
    match cond.form {
        ConditionForm::Symmetric { k, bound } => {
            let d = ProblemDims::new(m, n, k * s)?;
            let b = ric::beta_lower_bound(cfg, d, bound, method)?;
            Ok(b.ln_complement - eta.ln())
        }
        ConditionForm::Asymmetric { k1, k2, f } => {
            let d1 = ProblemDims::new(m, n, k1 * s)?;
            let d2 = ProblemDims::new(m, n, k2 * s)?;
            let l = ric::ric_threshold(cfg, d1, eta / 2.0, ThresholdKind::Lower, method)?;
            let u = ric::ric_threshold(cfg, d2, eta / 2.0, ThresholdKind::Upper, method)?;
            Ok(f(l.value, u.value) - 1.0)
        }
    }
}

/// Linear ascent from s = 1, stopping at the first failure; every s below
/// the returned s_star passed the certified test.
pub fn max_sparsity(
    cfg: &PrecisionConfig,
    m: u32,
    n: u64,
    eta: f64,
    cond: &RecoveryCondition,
    method: Method,
) -> Result<SparsityResult> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta = {eta} outside (0,1)")));
    }
    let kmax = cond.max_multiplier() as u64;
    let mut s_star = 0u32;
    let mut margin_at_star = None;
    let mut margin_at_fail = None;
    let mut s = 1u32;
    loop {
        if kmax * s as u64 >= m as u64 {
            break; // order infeasible; search ends at the last certified s
        }
        let margin = condition_margin(cfg, m, n, s, eta, cond, method)?;
        if margin < 0.0 {
            s_star = s;
            margin_at_star = Some(margin);
            s += 1;
        } else {
            margin_at_fail = Some(margin);
            break;
        }
    }
    Ok(SparsityResult {
        s_star,
        eta,
        condition: cond.name.clone(),
        margin_at_star,
        margin_at_fail,
    })
}
