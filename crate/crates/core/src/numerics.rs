//! Adaptive-precision real arithmetic and the special functions the rest of
//! the crate is built on.
//!
//! Everything here follows one protocol: evaluate at `mantissa_bits`,
//! re-evaluate at twice the bits, accept when the two runs agree to
//! `rel_tol`, and keep doubling up to `max_mantissa_bits` otherwise.
//! Probabilities cross module boundaries as [`LogProb`], which keeps either
//! `ln p` or `ln (1-p)` so complements far below machine epsilon survive.

use crate::error::{Error, Result};
use rug::float::Special;
use rug::ops::CompleteRound;
use rug::Float;

/// Controls the precision-escalation ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionConfig {
    pub mantissa_bits: u32,
    pub max_mantissa_bits: u32,
    pub rel_tol: f64,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig {
            mantissa_bits: 256,
            max_mantissa_bits: 8192,
            rel_tol: 1e-12,
        }
    }
}

impl PrecisionConfig {
    pub fn new(mantissa_bits: u32, max_mantissa_bits: u32, rel_tol: f64) -> Result<Self> {
        if mantissa_bits < 64 {
            return Err(Error::Domain("mantissa_bits must be >= 64".into()));
        }
        if max_mantissa_bits < mantissa_bits {
            return Err(Error::Domain(
                "max_mantissa_bits must be >= mantissa_bits".into(),
            ));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::Domain("rel_tol must lie in (0,1)".into()));
        }
        Ok(PrecisionConfig {
            mantissa_bits,
            max_mantissa_bits,
            rel_tol,
        })
    }

    /// Same ladder but starting no lower than `bits`. Used by callers that
    /// already know the magnitude of the quantity they are resolving.
    pub fn with_min_bits(&self, bits: u32) -> Self {
        let start = self.mantissa_bits.max(bits).min(self.max_mantissa_bits);
        PrecisionConfig {
            mantissa_bits: start,
            ..*self
        }
    }
}

/// A probability carried in the log domain.
///
/// `log_value` is the natural log of either `p` itself or of `1-p`,
/// depending on `is_complement`. The complement channel is what keeps
/// quantities like `1 - psi ~ 1e-600` meaningful: the log is an ordinary
/// f64 (~ -1381.6) even though the probability itself underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogProb {
    log_value: f64,
    is_complement: bool,
}

impl LogProb {
    pub const ZERO: LogProb = LogProb {
        log_value: f64::NEG_INFINITY,
        is_complement: false,
    };
    pub const ONE: LogProb = LogProb {
        log_value: f64::NEG_INFINITY,
        is_complement: true,
    };

    pub fn from_prob(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} outside [0,1]")));
        }
        // store the smaller side so the log carries the information
        if p <= 0.5 {
            Ok(LogProb {
                log_value: p.ln(),
                is_complement: false,
            })
        } else {
            Ok(LogProb {
                log_value: (1.0 - p).ln(),
                is_complement: true,
            })
        }
    }

    /// Build from `ln p`.
    pub fn from_ln(ln_p: f64) -> Result<Self> {
        if ln_p > 0.0 {
            return Err(Error::Domain(format!("ln p = {ln_p} > 0")));
        }
        Ok(LogProb {
            log_value: ln_p,
            is_complement: false,
        })
    }

    /// Build from `ln (1-p)`.
    pub fn from_ln_complement(ln_q: f64) -> Result<Self> {
        if ln_q > 0.0 {
            return Err(Error::Domain(format!("ln (1-p) = {ln_q} > 0")));
        }
        Ok(LogProb {
            log_value: ln_q,
            is_complement: true,
        })
    }

    pub fn is_complement(&self) -> bool {
        self.is_complement
    }

    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    /// ln p, converting across channels if needed.
    pub fn ln_prob(&self) -> f64 {
        if self.is_complement {
            ln_one_minus_exp(self.log_value)
        } else {
            self.log_value
        }
    }

    /// ln (1-p), converting across channels if needed.
    pub fn ln_complement(&self) -> f64 {
        if self.is_complement {
            self.log_value
        } else {
            ln_one_minus_exp(self.log_value)
        }
    }

    pub fn prob(&self) -> f64 {
        self.ln_prob().exp()
    }

    pub fn complement(&self) -> f64 {
        self.ln_complement().exp()
    }

    /// Re-express with the complement channel stored.
    pub fn as_complement_repr(&self) -> Self {
        LogProb {
            log_value: self.ln_complement(),
            is_complement: true,
        }
    }

    /// Re-express with the direct channel stored.
    pub fn as_direct_repr(&self) -> Self {
        LogProb {
            log_value: self.ln_prob(),
            is_complement: false,
        }
    }
}

/// ln(1 - e^x) for x <= 0, stable near both ends.
fn ln_one_minus_exp(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x >= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x > -std::f64::consts::LN_2 {
        // 1 - e^x small: ln(-expm1(x))
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Relative agreement used by the escalation protocol.
pub(crate) fn agree_rel(a: &Float, b: &Float, tol: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    let diff = (a - b).complete(a.prec().max(b.prec()));
    let scale = b.clone().abs();
    diff.abs() <= scale * tol
}

/// Run the doubling ladder. `eval` is called with the working mantissa
/// width; successive results are compared with `agree` and the higher
/// precision result is returned on acceptance.
pub(crate) fn adaptive<T>(
    cfg: &PrecisionConfig,
    mut eval: impl FnMut(u32) -> Result<T>,
    agree: impl Fn(&T, &T) -> bool,
) -> Result<T> {
    let mut bits = cfg.mantissa_bits;
    let mut prev = eval(bits)?;
    loop {
        let next_bits = match bits.checked_mul(2) {
            Some(b) if b <= cfg.max_mantissa_bits => b,
            _ => {
                return Err(Error::PrecisionExhausted {
                    max_bits: cfg.max_mantissa_bits,
                    detail: format!("no agreement to rel_tol {} at {} bits", cfg.rel_tol, bits),
                })
            }
        };
        let cur = eval(next_bits)?;
        if agree(&prev, &cur) {
            return Ok(cur);
        }
        prev = cur;
        bits = next_bits;
    }
}

pub(crate) fn float_of(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

/// ln Gamma(a) at the given precision (a > 0).
pub(crate) fn ln_gamma_prec(a: &Float) -> Float {
    a.clone().ln_gamma()
}

/// Regularized incomplete gamma pair (P(a,x), Q(a,x)) at fixed precision.
///
/// Lower series for x < a+1, continued fraction otherwise; the other
/// channel is obtained by subtraction at working precision, which the
/// escalation ladder keeps honest.
pub(crate) fn reg_gamma_pq(a: &Float, x: &Float, prec: u32) -> (Float, Float) {
    debug_assert!(a.is_sign_positive() && !a.is_zero());
    if x.is_zero() {
        return (Float::with_val(prec, 0), Float::with_val(prec, 1));
    }
    if x.is_infinite() {
        return (Float::with_val(prec, 1), Float::with_val(prec, 0));
    }
    let split = (a + 1u32).complete(prec);
    if *x < split {
        let p = reg_lower_series(a, x, prec);
        let q = (1u32 - &p).complete(prec);
        (p, q)
    } else {
        let q = reg_upper_cf(a, x, prec);
        let p = (1u32 - &q).complete(prec);
        (p, q)
    }
}

/// 2^e at the given precision.
fn pow2(prec: u32, e: i32) -> Float {
    Float::with_val(prec, Float::i_exp(1, e))
}

/// Lower-series route: P(a,x) = x^a e^-x / Gamma(a+1) * sum_{n>=0} x^n / prod (a+1+i).
fn reg_lower_series(a: &Float, x: &Float, prec: u32) -> Float {
    let eps = pow2(prec, -(prec as i32 + 8));
    let mut term = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 1);
    let mut denom = (a + 1u32).complete(prec);
    loop {
        term *= x;
        term /= &denom;
        sum += &term;
        denom += 1u32;
        if term <= (&sum * &eps).complete(prec) {
            break;
        }
    }
    let ln_pre = (a * x.clone().ln()) - x - ln_gamma_prec(&(a + 1u32).complete(prec));
    ln_pre.exp() * sum
}

/// Continued-fraction route for Q(a,x), modified Lentz.
fn reg_upper_cf(a: &Float, x: &Float, prec: u32) -> Float {
    let eps = pow2(prec, -(prec as i32 + 8));
    let tiny = pow2(prec, -(4 * prec.min(200_000) as i32));
    let mut b = (x + 1u32).complete(prec) - a;
    let mut c = tiny.clone().recip();
    let mut d = if b.is_zero() {
        tiny.clone().recip()
    } else {
        b.clone().recip()
    };
    let mut h = d.clone();
    let mut i: u64 = 1;
    loop {
        let an = (a - i).complete(prec) * i; // -i*(i-a)
        b += 2u32;
        d = &an * d + &b;
        if d.clone().abs() < tiny {
            d = tiny.clone();
        }
        d = d.recip();
        c = &b + (&an / c);
        if c.clone().abs() < tiny {
            c = tiny.clone();
        }
        let delta = (&d * &c).complete(prec);
        h *= &delta;
        if (delta - 1u32).abs() < eps {
            break;
        }
        i += 1;
    }
    let ln_pre = (a * x.clone().ln()) - x - ln_gamma_prec(a);
    ln_pre.exp() * h
}

/// ln Gamma(a), escalated until stable.
pub fn ln_gamma(cfg: &PrecisionConfig, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("ln_gamma: a = {a} must be positive")));
    }
    let v = adaptive(
        cfg,
        |prec| Ok(ln_gamma_prec(&float_of(prec, a))),
        |x, y| agree_rel(x, y, cfg.rel_tol),
    )?;
    Ok(v.to_f64())
}

/// Regularized lower incomplete gamma P(a,x) with both channels accessible.
pub fn reg_inc_gamma_p(cfg: &PrecisionConfig, a: f64, x: f64) -> Result<LogProb> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("P(a,x): a = {a} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("P(a,x): x = {x} must be >= 0")));
    }
    let pair = adaptive(
        cfg,
        |prec| {
            let (p, q) = reg_gamma_pq(&float_of(prec, a), &float_of(prec, x), prec);
            Ok((p, q))
        },
        |u, v| agree_rel(&u.0, &v.0, cfg.rel_tol) && agree_rel(&u.1, &v.1, cfg.rel_tol),
    )?;
    logprob_from_pair(&pair.0, &pair.1)
}

/// Generalized regularized incomplete gamma P(a; x, y) = P(a,y) - P(a,x).
pub fn gen_reg_inc_gamma(cfg: &PrecisionConfig, a: f64, x: f64, y: f64) -> Result<LogProb> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("P(a;x,y): a = {a} must be positive")));
    }
    if !(x >= 0.0) || y < x {
        return Err(Error::Domain(format!(
            "P(a;x,y): need 0 <= x <= y, got x={x}, y={y}"
        )));
    }
    let pair = adaptive(
        cfg,
        |prec| {
            let af = float_of(prec, a);
            let (px, _) = reg_gamma_pq(&af, &float_of(prec, x), prec);
            let (py, _) = reg_gamma_pq(&af, &float_of(prec, y), prec);
            let d = (&py - &px).complete(prec);
            let comp = (1u32 - &d).complete(prec);
            Ok((d, comp))
        },
        |u, v| agree_rel(&u.0, &v.0, cfg.rel_tol) && agree_rel(&u.1, &v.1, cfg.rel_tol),
    )?;
    logprob_from_pair(&pair.0, &pair.1)
}

/// ln Gamma_s(a) = s(s-1)/4 * ln pi + sum_{i=1..s} ln Gamma(a - (i-1)/2).
pub fn ln_multivariate_gamma(cfg: &PrecisionConfig, s: u32, a: f64) -> Result<f64> {
    if s == 0 {
        return Err(Error::Domain("multivariate gamma: s must be >= 1".into()));
    }
    if !(a > (s as f64 - 1.0) / 2.0) {
        return Err(Error::Domain(format!(
            "multivariate gamma: a = {a} must exceed (s-1)/2 = {}",
            (s as f64 - 1.0) / 2.0
        )));
    }
    let v = adaptive(
        cfg,
        |prec| Ok(ln_multivariate_gamma_prec(s, &float_of(prec, a), prec)),
        |x, y| agree_rel(x, y, cfg.rel_tol),
    )?;
    Ok(v.to_f64())
}

pub(crate) fn ln_multivariate_gamma_prec(s: u32, a: &Float, prec: u32) -> Float {
    let mut acc = Float::with_val(prec, Special::Zero);
    for i in 1..=s {
        let arg = a - float_of(prec, (i as f64 - 1.0) / 2.0);
        acc += ln_gamma_prec(&arg);
    }
    let ln_pi = Float::with_val(prec, rug::float::Constant::Pi).ln();
    acc + ln_pi * float_of(prec, s as f64 * (s as f64 - 1.0) / 4.0)
}

/// ln C(n,s) via ln Gamma.
pub fn ln_binomial(cfg: &PrecisionConfig, n: u64, s: u64) -> Result<f64> {
    if s > n {
        return Err(Error::Domain(format!("binomial: s = {s} > n = {n}")));
    }
    let v = adaptive(
        cfg,
        |prec| Ok(ln_binomial_prec(n, s, prec)),
        |x, y| agree_rel(x, y, cfg.rel_tol),
    )?;
    Ok(v.to_f64())
}

pub(crate) fn ln_binomial_prec(n: u64, s: u64, prec: u32) -> Float {
    let ln_n1 = ln_gamma_prec(&Float::with_val(prec, n + 1));
    let ln_s1 = ln_gamma_prec(&Float::with_val(prec, s + 1));
    let ln_ns1 = ln_gamma_prec(&Float::with_val(prec, n - s + 1));
    ln_n1 - ln_s1 - ln_ns1
}

/// Store whichever channel is smaller so its log carries full information.
pub(crate) fn logprob_from_pair(p: &Float, q: &Float) -> Result<LogProb> {
    let slack = 1e-9;
    if p.is_sign_negative() && p.clone().abs().to_f64() > slack {
        return Err(Error::Domain(format!("probability {} < 0", p.to_f64())));
    }
    if q.is_sign_negative() && q.clone().abs().to_f64() > slack {
        return Err(Error::Domain(format!("probability {} > 1", p.to_f64())));
    }
    if p <= q {
        let lp = if p.is_sign_negative() || p.is_zero() {
            f64::NEG_INFINITY
        } else {
            p.clone().ln().to_f64()
        };
        LogProb::from_ln(lp.min(0.0))
    } else {
        let lq = if q.is_sign_negative() || q.is_zero() {
            f64::NEG_INFINITY
        } else {
            q.clone().ln().to_f64()
        };
        LogProb::from_ln_complement(lq.min(0.0))
    }
}

/// ln(e^a + e^b) without overflow.
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}
