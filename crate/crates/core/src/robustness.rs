//! Stability/robustness constants for quadratically constrained l1
//! minimization on compressible signals in bounded noise.
//!
//! C1 multiplies the noise radius and C2 the best s-term approximation
//! error in the recovery-error bound; both are finite only while the
//! symmetric RIC stays below 1/3, and both are strictly increasing there,
//! so probabilistic thresholds compose directly with the RIC threshold.

use crate::error::{Error, Result};
use crate::numerics::PrecisionConfig;
use crate::ric::{self, Method, ProblemDims, ThresholdKind};
use crate::solve::solve_decreasing;

pub const C1_AT_ZERO: f64 = 2.0 * std::f64::consts::SQRT_2;
pub const C2_AT_ZERO: f64 = 2.0;

fn check_domain(delta: f64) -> Result<()> {
    if !(0.0..1.0 / 3.0).contains(&delta) {
        return Err(Error::Domain(format!(
            "robustness constants need 0 <= delta < 1/3, got {delta}"
        )));
    }
    Ok(())
}

/// C1 = sqrt(8(1+delta)) / (1 - 3 delta).
pub fn c1(delta: f64) -> Result<f64> {
    check_domain(delta)?;
    Ok((8.0 * (1.0 + delta)).sqrt() / (1.0 - 3.0 * delta))
}

/// C2 = sqrt(8) [2 delta + sqrt((1-3 delta) delta)] / (1 - 3 delta) + 2.
pub fn c2(delta: f64) -> Result<f64> {
    check_domain(delta)?;
    let t = 1.0 - 3.0 * delta;
    Ok(8f64.sqrt() * (2.0 * delta + (t * delta).sqrt()) / t + 2.0)
}

/// delta with C_i(delta) = target, for targets above the delta = 0 value.
pub fn constant_inverse(which: Constant, target: f64) -> Result<f64> {
    let (f, floor): (fn(f64) -> Result<f64>, f64) = match which {
        Constant::C1 => (c1, C1_AT_ZERO),
        Constant::C2 => (c2, C2_AT_ZERO),
    };
    if !(target > floor) {
        return Err(Error::Domain(format!(
            "target {target} not above the delta=0 value {floor}"
        )));
    }
    // f increasing; flip sign for the decreasing-solver
    solve_decreasing(
        |d| Ok(target - f(d)?),
        0.0,
        1.0 / 3.0 - 1e-12,
        1e-10,
        1e-15,
        300,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    C1,
    C2,
}

/// Probabilistic robustness thresholds: C_i applied to the symmetric RIC
/// threshold at epsilon_i. The two guarantees are marginal, not joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessThresholds {
    pub c1_star: f64,
    pub c2_star: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub delta_star_1: f64,
    pub delta_star_2: f64,
}

pub fn robustness_thresholds(
    cfg: &PrecisionConfig,
    dims: ProblemDims,
    eps1: f64,
    eps2: f64,
    method: Method,
) -> Result<RobustnessThresholds> {
    let d1 = ric::ric_threshold(cfg, dims, eps1, ThresholdKind::Symmetric, method)?.value;
    let d2 = if eps2 == eps1 {
        d1
    } else {
        ric::ric_threshold(cfg, dims, eps2, ThresholdKind::Symmetric, method)?.value
    };
    let check = |d: f64, eps: f64| -> Result<()> {
        if d >= 1.0 / 3.0 {
            return Err(Error::Infeasible(format!(
                "delta*_s(m={}, n={}, eps={eps}) = {d} >= 1/3; reduce s",
                dims.m(),
                dims.n()
            )));
        }
        Ok(())
    };
    check(d1, eps1)?;
    check(d2, eps2)?;
    Ok(RobustnessThresholds {
        c1_star: c1(d1)?,
        c2_star: c2(d2)?,
        epsilon1: eps1,
        epsilon2: eps2,
        delta_star_1: d1,
        delta_star_2: d2,
    })
}

/// Largest s whose robustness constant stays at or below `target`.
pub fn max_sparsity_for_constant(
    cfg: &PrecisionConfig,
    m: u32,
    n: u64,
    which: Constant,
    target: f64,
    epsilon: f64,
    method: Method,
) -> Result<u32> {
    let floor = match which {
        Constant::C1 => C1_AT_ZERO,
        Constant::C2 => C2_AT_ZERO,
    };
    if !(target > floor) {
        return Ok(0); // unattainable below the delta = 0 value
    }
    let mut s_star = 0u32;
    let mut s = 1u32;
    while (s as u64) < m as u64 {
        let d = ProblemDims::new(m, n, s)?;
        let dstar = ric::ric_threshold(cfg, d, epsilon, ThresholdKind::Symmetric, method)?.value;
        if dstar >= 1.0 / 3.0 {
            break;
        }
        let val = match which {
            Constant::C1 => c1(dstar)?,
            Constant::C2 => c2(dstar)?,
        };
        if val <= target {
            s_star = s;
            s += 1;
        } else {
            break;
        }
    }
    Ok(s_star)
}
