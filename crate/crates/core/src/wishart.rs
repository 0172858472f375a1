//! Exact joint distribution of the extreme eigenvalues of a real Wishart
//! matrix M = G^T G with G an m x s standard Gaussian factor.
//!
//! The probability that all eigenvalues fall in [a,b] is
//! psi_ms(a,b) = K' * sqrt(det Q(a,b)) for a skew-symmetric Q whose entries
//! are incomplete-gamma expressions. Entries are computed by a recurrence
//! that needs no numerical integration; an adaptive-quadrature path exists
//! as a cross-check. psi itself is evaluated self-normalized — as the
//! Pfaffian ratio |Pf Q(a,b)| / |Pf Q(0,inf)| — which makes psi(0,inf) = 1
//! an identity rather than a numerical accident.

use crate::error::{Error, Result};
use crate::numerics::{
    self, adaptive, agree_rel, float_of, ln_gamma_prec, logprob_from_pair, reg_gamma_pq, LogProb,
    PrecisionConfig,
};
use crate::solve::solve_decreasing;
use rug::float::Special;
use rug::ops::CompleteRound;
use rug::Float;

/// Dimensions of the Gaussian factor: m rows, s columns, m > s >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WishartDims {
    m: u32,
    s: u32,
}

impl WishartDims {
    pub fn new(m: u32, s: u32) -> Result<Self> {
        if s < 1 || m <= s {
            return Err(Error::Domain(format!(
                "Wishart dims need m > s >= 1, got m={m}, s={s}"
            )));
        }
        Ok(WishartDims { m, s })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// alpha = (m - s - 1) / 2, possibly half-integer.
    pub fn alpha(&self) -> f64 {
        (self.m as f64 - self.s as f64 - 1.0) / 2.0
    }
}

/// Eigenvalue window [a, b] with b possibly +inf; a == b is the allowed
/// degenerate window (empty event).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInterval {
    a: f64,
    b: f64,
}

impl SpectralInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0) || !(b >= a) || a.is_infinite() {
            return Err(Error::Domain(format!(
                "spectral interval needs 0 <= a <= b, got [{a}, {b}]"
            )));
        }
        Ok(SpectralInterval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn is_unbounded(&self) -> bool {
        self.b.is_infinite()
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }
}

/// The skew-symmetric matrix of Theorem 1, held at one working precision.
#[derive(Debug, Clone)]
pub struct QMatrix {
    order: usize,
    entries: Vec<Float>, // row-major
}

impl QMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j].to_f64()
    }

    fn get(&self, i: usize, j: usize) -> &Float {
        &self.entries[i * self.order + j]
    }

    fn set(&mut self, i: usize, j: usize, v: Float) {
        let n = self.order;
        self.entries[i * n + j] = v;
    }

    fn zeroed(order: usize, prec: u32) -> Self {
        QMatrix {
            order,
            entries: vec![Float::with_val(prec, Special::Zero); order * order],
        }
    }

    /// Build from an explicit upper triangle (tests / log_pfaffian_abs).
    pub fn from_upper_triangle(order: usize, upper: &[(usize, usize, f64)]) -> Result<Self> {
        if !order.is_multiple_of(2) {
            return Err(Error::Domain("QMatrix order must be even".into()));
        }
        let mut q = QMatrix::zeroed(order, 128);
        for &(i, j, v) in upper {
            if i >= j || j >= order {
                return Err(Error::Domain(format!("not an upper-triangle index ({i},{j})")));
            }
            q.set(i, j, float_of(128, v));
            q.set(j, i, float_of(128, -v));
        }
        Ok(q)
    }
}

/// Which evaluation path fills the q-entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QMethod {
    /// Iterative incomplete-gamma recurrence (default; no integration).
    Recurrence,
    /// Adaptive Simpson quadrature of the defining integral (cross-check).
    Quadrature,
}

/// Shared per-build context: interval halves and the P(alpha_j, .) tables.
struct BuildCtx {
    s: usize,
    alpha: f64,
    /// P(alpha + j, a/2) for j = 1..=s (index 0 unused)
    pa: Vec<Float>,
    /// P(alpha + j, b/2), ditto
    pb: Vec<Float>,
}

fn build_ctx(dims: WishartDims, iv: SpectralInterval, prec: u32) -> BuildCtx {
    let s = dims.s as usize;
    let alpha = dims.alpha();
    let ha = float_of(prec, iv.a / 2.0);
    let one = Float::with_val(prec, 1);
    let zero = Float::with_val(prec, Special::Zero);
    let mut pa = vec![zero.clone(); s + 1];
    let mut pb = vec![zero; s + 1];
    for j in 1..=s {
        let aj = float_of(prec, alpha + j as f64);
        pa[j] = if iv.a == 0.0 {
            Float::with_val(prec, Special::Zero)
        } else {
            reg_gamma_pq(&aj, &ha, prec).0
        };
        pb[j] = if iv.b.is_infinite() {
            one.clone()
        } else {
            let hb = float_of(prec, iv.b / 2.0);
            reg_gamma_pq(&aj, &hb, prec).0
        };
    }
    BuildCtx { s, alpha, pa, pb }
}

/// G[k] = P(2*alpha + k; a, b) over the *unhalved* window, k = 2..2s-1.
fn gen_gamma_table(dims: WishartDims, iv: SpectralInterval, prec: u32) -> Vec<Float> {
    let s = dims.s as usize;
    let two_alpha = dims.m as f64 - dims.s as f64 - 1.0;
    let mut g = vec![Float::with_val(prec, Special::Zero); 2 * s];
    for (k, slot) in g.iter_mut().enumerate().take(2 * s).skip(2) {
        let ak = float_of(prec, two_alpha + k as f64);
        let p_lo = if iv.a == 0.0 {
            Float::with_val(prec, Special::Zero)
        } else {
            reg_gamma_pq(&ak, &float_of(prec, iv.a), prec).0
        };
        let p_hi = if iv.b.is_infinite() {
            Float::with_val(prec, 1)
        } else {
            reg_gamma_pq(&ak, &float_of(prec, iv.b), prec).0
        };
        *slot = p_hi - p_lo;
    }
    g
}

type LnGammaTables = std::collections::HashMap<(u32, u32, u32), (Vec<Float>, Vec<Float>)>;

thread_local! {
    // ln Gamma ladders depend only on (m, s, prec); successive arguments
    // differ by 1, so one lngamma plus cheap log increments builds each
    static LN_GAMMA_TABLE_CACHE: std::cell::RefCell<LnGammaTables> =
        std::cell::RefCell::new(std::collections::HashMap::new());
}

/// (ln Gamma(alpha + l) for l = 0..=s, ln Gamma(2 alpha + k) for k = 0..2s);
/// the l = 0 and k < 2 slots are unused placeholders.
fn ln_gamma_tables_cached(dims: WishartDims, prec: u32) -> (Vec<Float>, Vec<Float>) {
    LN_GAMMA_TABLE_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((dims.m, dims.s, prec))
            .or_insert_with(|| {
                let s = dims.s as usize;
                let alpha = dims.alpha();
                let zero = Float::with_val(prec, Special::Zero);
                let mut lg1 = Vec::with_capacity(s + 1);
                lg1.push(zero.clone());
                lg1.push(ln_gamma_prec(&float_of(prec, alpha + 1.0)));
                for l in 1..s {
                    let next = &lg1[l] + float_of(prec, alpha + l as f64).ln();
                    lg1.push(next);
                }
                let mut lg2 = Vec::with_capacity(2 * s);
                lg2.push(zero.clone());
                lg2.push(zero);
                if s >= 1 {
                    lg2.push(ln_gamma_prec(&float_of(prec, 2.0 * alpha + 2.0)));
                    for k in 2..2 * s - 1 {
                        let next = &lg2[k] + float_of(prec, 2.0 * alpha + k as f64).ln();
                        lg2.push(next);
                    }
                }
                (lg1, lg2)
            })
            .clone()
    })
}

/// Assemble Q at one precision via the recurrence route.
///
/// With T(i,j) = (2/Gamma(alpha_i)) * int_{a/2}^{b/2} x^{alpha_i - 1} e^-x
/// P(alpha_j, x) dx, the diagonal T(i,i) has the closed form
/// Pb[i]^2 - Pa[i]^2, and
///   T(i,j+1) = T(i,j) - 2 Gamma(alpha_i + alpha_j)
///              / (Gamma(alpha_i) Gamma(alpha_j + 1) 2^{alpha_i+alpha_j})
///              * P(alpha_i + alpha_j; a, b),
/// so each row of the upper triangle falls out of one sweep.
fn build_q_recurrence(dims: WishartDims, iv: SpectralInterval, prec: u32) -> QMatrix {
    let ctx = build_ctx(dims, iv, prec);
    let s = ctx.s;
    let alpha = ctx.alpha;
    let order = if s.is_multiple_of(2) { s } else { s + 1 };
    let mut q = QMatrix::zeroed(order, prec);
    if s >= 2 {
        let g = gen_gamma_table(dims, iv, prec);
        let (lg1, lg2) = ln_gamma_tables_cached(dims, prec);
        let ln2 = Float::with_val(prec, 2).ln();
        for i in 1..=s {
            let mut t = (&ctx.pb[i] * &ctx.pb[i]).complete(prec)
                - (&ctx.pa[i] * &ctx.pa[i]).complete(prec);
            for j in i..s {
                let ai_aj = 2.0 * alpha + (i + j) as f64;
                // ln[2 Gamma(a_i + a_j) / (Gamma(a_i) Gamma(a_j + 1) 2^{a_i+a_j})]
                let mut lc = (&lg2[i + j] - &lg1[i]).complete(prec);
                lc -= &lg1[j + 1];
                lc += &ln2;
                lc -= &ln2 * float_of(prec, ai_aj);
                t -= lc.exp() * &g[i + j];
                let qij = ((&ctx.pb[j + 1] + &ctx.pa[j + 1]).complete(prec)
                    * (&ctx.pb[i] - &ctx.pa[i]).complete(prec))
                    - &t;
                q.set(j, i - 1, -qij.clone());
                q.set(i - 1, j, qij);
            }
        }
    }
    if s % 2 == 1 {
        for i in 1..=s {
            let v = (&ctx.pb[i] - &ctx.pa[i]).complete(prec);
            q.set(s, i - 1, -v.clone());
            q.set(i - 1, s, v);
        }
    }
    q
}

/// Quadrature route for one entry: direct adaptive Simpson on the defining
/// integral at hardware precision. Cross-check path only.
fn q_entry_quadrature(dims: WishartDims, iv: SpectralInterval, i: usize, j: usize) -> f64 {
    let prec = 128;
    let alpha = dims.alpha();
    let ai = alpha + i as f64;
    let aj = alpha + j as f64;
    let p = |a: f64, x: f64| -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            reg_gamma_pq(&float_of(prec, a), &float_of(prec, x), prec)
                .0
                .to_f64()
        }
    };
    let ha = iv.a / 2.0;
    let hb = if iv.b.is_infinite() {
        // truncate where x^{ai-1} e^-x is negligible
        let mut u = ai.max(ha) + 60.0;
        for _ in 0..8 {
            u = 90.0 + (ai - 1.0).max(0.0) * u.ln() + ha.max(1.0);
        }
        u.max(ha + 60.0)
    } else {
        iv.b / 2.0
    };
    let ln_gamma_ai = ln_gamma_prec(&float_of(prec, ai)).to_f64();
    let integrand = |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        ((ai - 1.0) * x.ln() - x - ln_gamma_ai).exp() * p(aj, x)
    };
    let integral = adaptive_simpson(&integrand, ha, hb, 1e-13, 30);
    let pb_j = if iv.b.is_infinite() { 1.0 } else { p(aj, iv.b / 2.0) };
    let pa_j = p(aj, ha);
    let pb_i = if iv.b.is_infinite() { 1.0 } else { p(ai, iv.b / 2.0) };
    let pa_i = p(ai, ha);
    (pb_j + pa_j) * (pb_i - pa_i) - 2.0 * integral
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(_f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(f, a, fa, m, fm, flm);
        let right = simpson(f, m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(f, a, fa, b, fb, fm);
    rec(f, a, fa, b, fb, fm, whole, tol, depth)
}

/// One upper-triangle entry q_{i,j}, 1 <= i < j <= s (1-based as in the
/// defining formula). Diagonal requests are a contract violation.
pub fn q_entry(
    cfg: &PrecisionConfig,
    dims: WishartDims,
    interval: SpectralInterval,
    i: usize,
    j: usize,
) -> Result<f64> {
    if i == j {
        return Err(Error::Domain(
            "q_entry: diagonal is identically zero and set directly".into(),
        ));
    }
    if !(1 <= i && i < j && j <= dims.s as usize) {
        return Err(Error::Domain(format!(
            "q_entry: need 1 <= i < j <= s, got i={i}, j={j}, s={}",
            dims.s
        )));
    }
    if interval.is_degenerate() {
        return Ok(0.0);
    }
    let v = adaptive(
        cfg,
        |prec| Ok(build_q_recurrence(dims, interval, prec).get(i - 1, j - 1).clone()),
        |x, y| agree_rel(x, y, cfg.rel_tol),
    )?;
    Ok(v.to_f64())
}

/// Same entry via the quadrature cross-check path.
pub fn q_entry_quad(
    dims: WishartDims,
    interval: SpectralInterval,
    i: usize,
    j: usize,
) -> Result<f64> {
    if !(1 <= i && i < j && j <= dims.s as usize) {
        return Err(Error::Domain(format!(
            "q_entry_quad: need 1 <= i < j <= s, got i={i}, j={j}, s={}",
            dims.s
        )));
    }
    if interval.is_degenerate() {
        return Ok(0.0);
    }
    Ok(q_entry_quadrature(dims, interval, i, j))
}

/// Full Q(a,b) at the configured base precision (psi does its own
/// escalation internally; this is the inspectable single-shot build).
pub fn build_q(
    cfg: &PrecisionConfig,
    dims: WishartDims,
    interval: SpectralInterval,
) -> Result<QMatrix> {
    build_q_with(cfg, dims, interval, QMethod::Recurrence)
}

pub fn build_q_with(
    cfg: &PrecisionConfig,
    dims: WishartDims,
    interval: SpectralInterval,
    method: QMethod,
) -> Result<QMatrix> {
    match method {
        QMethod::Recurrence => Ok(build_q_recurrence(dims, interval, cfg.mantissa_bits)),
        QMethod::Quadrature => {
            let s = dims.s as usize;
            let order = if s.is_multiple_of(2) { s } else { s + 1 };
            let prec = 128;
            let mut q = QMatrix::zeroed(order, prec);
            for i in 1..=s {
                for j in (i + 1)..=s {
                    let v = q_entry_quadrature(dims, interval, i, j);
                    q.set(i - 1, j - 1, float_of(prec, v));
                    q.set(j - 1, i - 1, float_of(prec, -v));
                }
            }
            if s % 2 == 1 {
                let ctx = build_ctx(dims, interval, prec);
                for i in 1..=s {
                    let v = (&ctx.pb[i] - &ctx.pa[i]).complete(prec);
                    q.set(s, i - 1, -v.clone());
                    q.set(i - 1, s, v);
                }
            }
            Ok(q)
        }
    }
}

/// Determinant of a skew-symmetric matrix by Gaussian elimination with
/// partial pivoting at the matrix's own precision. MPFR's exponent range
/// makes explicit log-domain scaling unnecessary.
fn det_in_place(entries: &mut [Float], n: usize, prec: u32) -> Float {
    use std::cmp::Ordering;
    let mut det = Float::with_val(prec, 1);
    for k in 0..n {
        // complete pivoting: partial pivoting loses the sign of these
        // deeply graded skew matrices long before the magnitude degrades
        let (mut pr, mut pc) = (k, k);
        for r in k..n {
            for c in k..n {
                if entries[r * n + c].cmp_abs(&entries[pr * n + pc]) == Some(Ordering::Greater) {
                    pr = r;
                    pc = c;
                }
            }
        }
        if entries[pr * n + pc].is_zero() {
            return Float::with_val(prec, Special::Zero);
        }
        if pr != k {
            for c in 0..n {
                entries.swap(k * n + c, pr * n + c);
            }
            det = -det;
        }
        if pc != k {
            for r in 0..n {
                entries.swap(r * n + k, r * n + pc);
            }
            det = -det;
        }
        det *= &entries[k * n + k];
        for r in (k + 1)..n {
            let factor = (&entries[r * n + k] / &entries[k * n + k]).complete(prec);
            for c in (k + 1)..n {
                let sub = (&factor * &entries[k * n + c]).complete(prec);
                entries[r * n + c] -= sub;
            }
            entries[r * n + k] = Float::with_val(prec, Special::Zero);
        }
    }
    det
}

fn det_q(q: &QMatrix) -> Float {
    let prec = q.entries[0].prec();
    let n = q.order;
    let mut work = q.entries.clone();
    // symmetric power-of-two equilibration D Q D (exact, keeps skew
    // symmetry): entries span hundreds of orders of magnitude and the raw
    // LU would need precision proportional to that spread
    let mut shift_total: i64 = 0;
    for i in 0..n {
        let mut e_max: Option<i32> = None;
        for j in 0..n {
            if let Some(e) = work[i * n + j].get_exp() {
                e_max = Some(e_max.map_or(e, |m| m.max(e)));
            }
        }
        let e = match e_max {
            Some(e) => e,
            None => return Float::with_val(prec, Special::Zero), // zero row
        };
        shift_total += e as i64;
        for j in 0..n {
            work[i * n + j] >>= e; // row scale
            work[j * n + i] >>= e; // column scale
        }
    }
    let det = det_in_place(&mut work, n, prec);
    det << (2 * shift_total) as i32
}

/// ln |Pf Q| = (1/2) ln det Q; -inf when numerically singular.
pub fn log_pfaffian_abs(q: &QMatrix) -> f64 {
    let det = det_q(q);
    if det.is_sign_negative() || det.is_zero() {
        return f64::NEG_INFINITY;
    }
    0.5 * det.ln().to_f64()
}

/// ln K' of Theorem 1, with the leading pi factor read as pi^{s^2/2}
/// (the reading under which psi(0,inf) = 1 exactly).
pub fn ln_k_prime(cfg: &PrecisionConfig, dims: WishartDims) -> Result<f64> {
    let v = adaptive(
        cfg,
        |prec| {
            let s = dims.s;
            let m = dims.m as f64;
            let sf = s as f64;
            let alpha = dims.alpha();
            let ln_pi = Float::with_val(prec, rug::float::Constant::Pi).ln();
            let ln2 = Float::with_val(prec, 2).ln();
            let mut lk = ln_pi * float_of(prec, sf * sf / 2.0);
            lk -= &ln2 * float_of(prec, sf * m / 2.0);
            lk -= numerics::ln_multivariate_gamma_prec(s, &float_of(prec, m / 2.0), prec);
            lk -= numerics::ln_multivariate_gamma_prec(s, &float_of(prec, sf / 2.0), prec);
            lk += &ln2 * float_of(prec, alpha * sf + sf * (sf + 1.0) / 2.0);
            for l in 1..=s {
                lk += ln_gamma_prec(&float_of(prec, alpha + l as f64));
            }
            Ok(lk)
        },
        |x, y| agree_rel(x, y, cfg.rel_tol),
    )?;
    Ok(v.to_f64())
}

thread_local! {
    // det Q(0, inf) depends only on (m, s, prec); percentile and threshold
    // solvers hit the same normalization dozens of times per root
    static NORM_DET_CACHE: std::cell::RefCell<std::collections::HashMap<(u32, u32, u32), Float>> =
        std::cell::RefCell::new(std::collections::HashMap::new());
}

fn det_q_norm_cached(dims: WishartDims, prec: u32) -> Float {
    NORM_DET_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((dims.m, dims.s, prec))
            .or_insert_with(|| {
                let q = build_q_recurrence(
                    dims,
                    SpectralInterval {
                        a: 0.0,
                        b: f64::INFINITY,
                    },
                    prec,
                );
                det_q(&q)
            })
            .clone()
    })
}

/// (psi, 1 - psi) at one precision, via the Pfaffian ratio. `None` means
/// the working precision could not even fix the sign of a determinant
/// (det Q = Pf^2 is positive in exact arithmetic), so the caller must
/// escalate; returning a value here would let two garbage rungs agree.
fn psi_pair_prec(dims: WishartDims, interval: SpectralInterval, prec: u32) -> Option<(Float, Float)> {
    let q_ab = build_q_recurrence(dims, interval, prec);
    let det_ab = det_q(&q_ab);
    if det_ab.is_sign_negative() {
        return None;
    }
    let det_norm = det_q_norm_cached(dims, prec);
    if det_norm.is_sign_negative() || det_norm.is_zero() {
        return None;
    }
    let psi = (det_ab / det_norm).sqrt();
    let surv = (1u32 - &psi).complete(prec);
    if surv.is_sign_negative() {
        return None; // psi > 1 is a roundoff artifact of the ratio
    }
    Some((psi, surv))
}

fn psi_adaptive(
    cfg: &PrecisionConfig,
    dims: WishartDims,
    interval: SpectralInterval,
) -> Result<(Float, Float)> {
    let pair = adaptive(
        cfg,
        |prec| Ok(psi_pair_prec(dims, interval, prec)),
        |u, v| match (u, v) {
            (Some(u), Some(v)) => {
                agree_rel(&u.0, &v.0, cfg.rel_tol) && agree_rel(&u.1, &v.1, cfg.rel_tol)
            }
            _ => false,
        },
    )?;
    Ok(pair.expect("agreement implies a resolved pair"))
}

/// psi_ms(a,b): probability that every eigenvalue of M lies in [a,b].
pub fn psi(
    cfg: &PrecisionConfig,
    dims: WishartDims,
    interval: SpectralInterval,
) -> Result<LogProb> {
    if interval.is_degenerate() {
        return Ok(LogProb::ZERO);
    }
    if interval.a == 0.0 && interval.is_unbounded() {
        return Ok(LogProb::ONE);
    }
    let (p, s) = psi_adaptive(cfg, dims, interval)?;
    logprob_from_pair(&p, &s)
}

/// 1 - psi_ms(a,b) with the complement channel resolved to full relative
/// accuracy (the quantity the union bound consumes).
pub fn psi_survival(
    cfg: &PrecisionConfig,
    dims: WishartDims,
    interval: SpectralInterval,
) -> Result<LogProb> {
    if interval.is_degenerate() {
        return Ok(LogProb::ONE);
    }
    if interval.a == 0.0 && interval.is_unbounded() {
        return Ok(LogProb::ZERO);
    }
    let (p, s) = psi_adaptive(cfg, dims, interval)?;
    logprob_from_pair(&s, &p)
}

/// ln(1 - psi) as a plain f64, -inf when the event is certain.
/// Convenience wrapper over `psi_survival` for the root solvers.
pub fn ln_psi_survival(
    cfg: &PrecisionConfig,
    dims: WishartDims,
    interval: SpectralInterval,
) -> Result<f64> {
    Ok(psi_survival(cfg, dims, interval)?.ln_prob())
}

/// eta-percentiles of the normalized extremes (W = M/m): lambda_min_star
/// solves psi(m x, inf) = 1 - eta, lambda_max_star solves psi(0, m x) = 1 - eta.
pub fn eig_percentiles(
    cfg: &PrecisionConfig,
    dims: WishartDims,
    eta: f64,
) -> Result<(f64, f64)> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta = {eta} outside (0,1)")));
    }
    let m = dims.m as f64;
    let ln_eta = eta.ln();
    let cfg = cfg.with_min_bits((-ln_eta / std::f64::consts::LN_2) as u32 + 96);
    // lambda_min: survival(x) = 1 - psi(m x, inf), increasing in x
    let min_surv = |x: f64| -> Result<f64> {
        ln_psi_survival(&cfg, dims, SpectralInterval::new(m * x, f64::INFINITY)?)
    };
    // lambda_max: survival(x) = 1 - psi(0, m x), decreasing in x
    let max_surv =
        |x: f64| -> Result<f64> { ln_psi_survival(&cfg, dims, SpectralInterval::new(0.0, m * x)?) };
    // Tracy-Widom edge guesses pin the brackets tightly; the exact solves
    // below never rely on their accuracy, only their order of magnitude
    let t_guess = crate::tw::tw1_ccdf_inverse(LogProb::from_ln(ln_eta)?).unwrap_or(0.0);
    let sc = crate::tw::scalings(dims);
    let lmax = {
        let guess = ((sc.mu_ms + sc.sigma_ms * t_guess) / m).max(1e-6);
        let mut lo = (guess * 0.8).max(1e-9);
        let mut hi = guess * 1.25;
        while max_surv(hi)? > ln_eta {
            lo = hi;
            hi *= 1.5;
            if hi > 1e9 {
                return Err(Error::Bracket(format!(
                    "lambda_max percentile not bracketed below {hi}"
                )));
            }
        }
        while max_surv(lo)? < ln_eta {
            hi = lo;
            lo *= 0.6;
            if lo < 1e-12 {
                break;
            }
        }
        solve_decreasing(|x| Ok(max_surv(x)? - ln_eta), lo, hi, 3e-8, 1e-12, 200)?
    };
    // minus sign flips the increasing lambda_min survival into the
    // decreasing shape the solver expects
    let lmin = {
        let g = |x: f64| -> Result<f64> { Ok(-(min_surv(x)? - ln_eta)) };
        let guess = ((sc.v_ms - sc.tau_ms * t_guess).exp() / m).clamp(1e-290, lmax);
        let mut lo = (guess * 0.7).max(1e-300);
        let mut hi = (guess * 1.4).min(lmax);
        while min_surv(lo)? > ln_eta {
            hi = lo;
            lo /= 4.0;
            if lo < 1e-290 {
                return Err(Error::Bracket(
                    "lambda_min percentile not bracketed above 0".into(),
                ));
            }
        }
        while min_surv(hi)? < ln_eta {
            lo = hi;
            hi *= 1.4;
            if hi > 1e9 {
                return Err(Error::Bracket(
                    "lambda_min percentile not bracketed".into(),
                ));
            }
        }
        solve_decreasing(g, lo, hi, 3e-8, 1e-12, 200)?
    };
    Ok((lmin, lmax))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    fn iv(a: f64, b: f64) -> SpectralInterval {
        SpectralInterval::new(a, b).unwrap()
    }

    #[test]
    fn dims_validation() {
        assert!(WishartDims::new(4, 4).is_err());
        assert!(WishartDims::new(0, 0).is_err());
        let d = WishartDims::new(6, 2).unwrap();
        assert_eq!(d.alpha(), 1.5);
    }

    #[test]
    fn interval_validation() {
        assert!(SpectralInterval::new(-1.0, 2.0).is_err());
        assert!(SpectralInterval::new(3.0, 2.0).is_err());
        assert!(iv(2.0, 2.0).is_degenerate());
        assert!(iv(0.0, f64::INFINITY).is_unbounded());
    }

    #[test]
    fn q_entry_degenerate_and_diagonal() {
        let d = WishartDims::new(6, 2).unwrap();
        assert_eq!(q_entry(&cfg(), d, iv(3.0, 3.0), 1, 2).unwrap(), 0.0);
        assert!(q_entry(&cfg(), d, iv(0.5, 8.0), 1, 1).is_err());
        assert!(q_entry(&cfg(), d, iv(0.5, 8.0), 2, 1).is_err());
    }

    #[test]
    fn q_entry_recurrence_vs_quadrature() {
        let d = WishartDims::new(6, 2).unwrap();
        let w = iv(0.5, 8.0);
        let rec = q_entry(&cfg(), d, w, 1, 2).unwrap();
        let quad = q_entry_quad(d, w, 1, 2).unwrap();
        // frozen value from the dual-method oracle
        assert!((rec - 0.15210679400473298).abs() < 1e-12, "rec = {rec}");
        assert!((rec - quad).abs() < 1e-10, "rec = {rec}, quad = {quad}");
        // half-integer alpha and unbounded window
        let d2 = WishartDims::new(7, 3).unwrap();
        for &(i, j) in &[(1usize, 2usize), (1, 3), (2, 3)] {
            let w2 = iv(1.0, f64::INFINITY);
            let r = q_entry(&cfg(), d2, w2, i, j).unwrap();
            let q = q_entry_quad(d2, w2, i, j).unwrap();
            assert!((r - q).abs() < 1e-9, "({i},{j}): rec {r} quad {q}");
        }
    }

    #[test]
    fn diagonal_identity() {
        // 2 int x^{a_i-1} e^-x P(a_i,x) dx / Gamma(a_i) = P(a_i,b/2)^2 - P(a_i,a/2)^2
        let d = WishartDims::new(8, 3).unwrap();
        let alpha = d.alpha();
        for i in 1..=3usize {
            let ai = alpha + i as f64;
            let (ha, hb) = (0.4, 5.0);
            let prec = 128;
            let p = |x: f64| {
                reg_gamma_pq(&float_of(prec, ai), &float_of(prec, x), prec)
                    .0
                    .to_f64()
            };
            let lg = ln_gamma_prec(&float_of(prec, ai)).to_f64();
            let f = |x: f64| ((ai - 1.0) * x.ln() - x - lg).exp() * p(x);
            let integral = adaptive_simpson(&f, ha, hb, 1e-13, 30);
            let lhs = 2.0 * integral;
            let rhs = p(hb).powi(2) - p(ha).powi(2);
            assert!((lhs - rhs).abs() < 1e-10, "i={i}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn build_q_structure() {
        let d = WishartDims::new(6, 2).unwrap();
        let q = build_q(&cfg(), d, iv(0.5, 8.0)).unwrap();
        assert_eq!(q.order(), 2);
        assert_eq!(q.entry(0, 0), 0.0);
        assert_eq!(q.entry(0, 1), -q.entry(1, 0));
        // odd s: border column is P(alpha_i; a/2, b/2)
        let d3 = WishartDims::new(8, 3).unwrap();
        let q3 = build_q(&cfg(), d3, iv(0.5, 8.0)).unwrap();
        assert_eq!(q3.order(), 4);
        let c = cfg();
        for i in 1..=3usize {
            let expect = numerics::gen_reg_inc_gamma(&c, d3.alpha() + i as f64, 0.25, 4.0)
                .unwrap()
                .prob();
            assert!((q3.entry(i - 1, 3) - expect).abs() < 1e-12);
            assert!((q3.entry(3, i - 1) + expect).abs() < 1e-12);
        }
    }

    #[test]
    fn pfaffian_small_cases() {
        let q = QMatrix::from_upper_triangle(2, &[(0, 1, 0.37)]).unwrap();
        assert!((log_pfaffian_abs(&q) - 0.37f64.ln()).abs() < 1e-12);
        let q = QMatrix::from_upper_triangle(4, &[(0, 1, 0.2), (2, 3, 5.0)]).unwrap();
        assert!((log_pfaffian_abs(&q) - (0.2f64 * 5.0).ln()).abs() < 1e-12);
        // singular: duplicate rows
        let q = QMatrix::from_upper_triangle(4, &[(0, 1, 1.0), (2, 3, 0.0)]).unwrap();
        assert_eq!(log_pfaffian_abs(&q), f64::NEG_INFINITY);
    }

    #[test]
    fn pfaffian_matches_det_oracle() {
        // fixed pseudo-random 6x6 skew matrix; oracle = (1/2) ln det via
        // an independent cofactor-free recursion (Pfaffian expansion)
        let vals = [
            (0usize, 1usize, 0.83),
            (0, 2, -0.41),
            (0, 3, 0.29),
            (0, 4, -0.76),
            (0, 5, 0.14),
            (1, 2, 0.57),
            (1, 3, -0.93),
            (1, 4, 0.36),
            (1, 5, -0.22),
            (2, 3, 0.68),
            (2, 4, -0.11),
            (2, 5, 0.49),
            (3, 4, 0.77),
            (3, 5, -0.35),
            (4, 5, 0.91),
        ];
        let q = QMatrix::from_upper_triangle(6, &vals).unwrap();
        // Pfaffian by recursive expansion along the first row
        fn pf(idx: &[usize], a: &dyn Fn(usize, usize) -> f64) -> f64 {
            if idx.is_empty() {
                return 1.0;
            }
            let i = idx[0];
            let mut acc = 0.0;
            for (pos, &j) in idx.iter().enumerate().skip(1) {
                let rest: Vec<usize> = idx[1..]
                    .iter()
                    .enumerate()
                    .filter(|&(p, _)| p != pos - 1)
                    .map(|(_, &v)| v)
                    .collect();
                let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
                acc += sign * a(i, j) * pf(&rest, a);
            }
            acc
        }
        let lookup = |i: usize, j: usize| -> f64 {
            for &(r, c, v) in &vals {
                if r == i && c == j {
                    return v;
                }
                if r == j && c == i {
                    return -v;
                }
            }
            0.0
        };
        let oracle = pf(&[0, 1, 2, 3, 4, 5], &lookup).abs().ln();
        assert!((log_pfaffian_abs(&q) - oracle).abs() < 1e-10);
    }

    #[test]
    fn psi_chi_square_reduction() {
        // s=1: psi_m1(a,b) = P(m/2; a/2, b/2)
        let c = cfg();
        let d = WishartDims::new(4, 1).unwrap();
        let p = psi(&c, d, iv(0.0, 4.0)).unwrap().prob();
        assert!((p - 0.5939941502901619).abs() < 1e-12);
        for m in [2u32, 5, 9, 16] {
            let d = WishartDims::new(m, 1).unwrap();
            for &(a, b) in &[(0.0, 3.0), (1.0, 7.5), (2.0, f64::INFINITY)] {
                let p = psi(&c, d, iv(a, b)).unwrap().prob();
                let oracle = numerics::gen_reg_inc_gamma(&c, m as f64 / 2.0, a / 2.0, b / 2.0)
                    .unwrap()
                    .prob();
                assert!((p - oracle).abs() < 1e-12, "m={m} [{a},{b}]");
            }
        }
    }

    #[test]
    fn psi_edge_cases() {
        let c = cfg();
        let d = WishartDims::new(10, 3).unwrap();
        assert_eq!(psi(&c, d, iv(2.0, 2.0)).unwrap().prob(), 0.0);
        assert_eq!(psi(&c, d, iv(0.0, f64::INFINITY)).unwrap().prob(), 1.0);
        assert_eq!(
            psi_survival(&c, d, iv(0.0, f64::INFINITY)).unwrap().prob(),
            0.0
        );
        // frozen oracle for the (10,3) window used in the MC criterion
        let p = psi(&c, d, iv(1.0, 30.0)).unwrap().prob();
        assert!((p - 0.972889601988574).abs() < 1e-10, "psi = {p}");
    }

    #[test]
    fn psi_normalization_via_k_prime() {
        let c = cfg();
        for &(m, s) in &[(5u32, 2u32), (10, 3), (20, 5)] {
            let d = WishartDims::new(m, s).unwrap();
            let q = build_q(&c, d, iv(0.0, f64::INFINITY)).unwrap();
            let resid = ln_k_prime(&c, d).unwrap() + log_pfaffian_abs(&q);
            assert!(resid.abs() < 1e-10, "m={m} s={s}: ln psi(0,inf) = {resid}");
        }
    }

    #[test]
    fn psi_monotone_in_window() {
        let c = cfg();
        let d = WishartDims::new(12, 4).unwrap();
        let mut last = 0.0;
        for b in [6.0, 10.0, 16.0, 25.0, 40.0] {
            let p = psi(&c, d, iv(1.0, b)).unwrap().prob();
            assert!(p >= last);
            last = p;
        }
        let mut last = 1.0;
        for a in [0.0, 0.2, 0.5, 1.0, 2.0] {
            let p = psi(&c, d, iv(a, 40.0)).unwrap().prob();
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn psi_frechet_bound() {
        let c = cfg();
        let d = WishartDims::new(15, 4).unwrap();
        for &(a, b) in &[(1.0, 30.0), (2.0, 40.0), (4.0, 35.0)] {
            let joint = psi(&c, d, iv(a, b)).unwrap().prob();
            let upper_only = psi(&c, d, iv(0.0, b)).unwrap().prob();
            let lower_only = psi(&c, d, iv(a, f64::INFINITY)).unwrap().prob();
            assert!(joint >= upper_only + lower_only - 1.0 - 1e-12);
            assert!(joint <= upper_only.min(lower_only) + 1e-12);
        }
    }

    #[test]
    fn quadrature_build_agrees() {
        let c = cfg();
        for &(m, s) in &[(6u32, 2u32), (8, 3)] {
            let d = WishartDims::new(m, s).unwrap();
            let w = iv(0.5, 3.0 * m as f64);
            let psi_rec = psi(&c, d, w).unwrap().prob();
            let q = build_q_with(&c, d, w, QMethod::Quadrature).unwrap();
            let q0 = build_q(&c, d, iv(0.0, f64::INFINITY)).unwrap();
            let psi_quad = (log_pfaffian_abs(&q) - log_pfaffian_abs(&q0)).exp();
            assert!(
                (psi_rec - psi_quad).abs() < 1e-9,
                "m={m} s={s}: {psi_rec} vs {psi_quad}"
            );
        }
    }

    #[test]
    fn deep_survival_resolves() {
        // survival far below f64 epsilon must come back with a finite log
        let c = cfg();
        let d = WishartDims::new(200, 10).unwrap();
        let s = psi_survival(&c, d, iv(20.0, 600.0)).unwrap();
        let ln_s = s.ln_prob();
        assert!(ln_s.is_finite());
        assert!(ln_s < -50.0, "ln survival = {ln_s}");
    }

    #[test]
    fn percentiles_basic() {
        let c = cfg();
        let d = WishartDims::new(40, 4).unwrap();
        let (lmin, lmax) = eig_percentiles(&c, d, 1e-3).unwrap();
        assert!(lmin > 0.0 && lmin < 1.0 && lmax > 1.0, "({lmin}, {lmax})");
        // round trip: survival at the percentile equals eta
        let m = 40.0;
        let s_up = ln_psi_survival(&c, d, iv(0.0, m * lmax)).unwrap();
        let s_lo = ln_psi_survival(&c, d, iv(m * lmin, f64::INFINITY)).unwrap();
        assert!((s_up - (1e-3f64).ln()).abs() < 1e-6);
        assert!((s_lo - (1e-3f64).ln()).abs() < 1e-6);
        assert!(eig_percentiles(&c, d, 0.0).is_err());
    }
}

