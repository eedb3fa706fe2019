//! Divergences between distributions and between finitely generated hulls.
//!
//! Everything is computed in nats internally and converted to the active
//! log base on the way out. Infinite values never enter arithmetic: they are
//! reported with [`SolverStatus::CappedInfinite`] and the value
//! [`INFINITY_SENTINEL`].

use std::sync::Arc;

use crate::alphabet::{ensure_same_space, Alphabet, Distribution, JointDistribution, ProbabilityVector, StochasticChannel};
use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram};
use crate::units;

/// Stand-in for `+∞` in reported values.
pub const INFINITY_SENTINEL: f64 = 1e300;

/// Frank-Wolfe stops once the certified gap (nats) drops below this.
pub const FW_GAP_TOL: f64 = 1e-8;
pub const FW_MAX_ITERATIONS: usize = 10_000;
/// Floor applied to mixture entries so gradients stay finite.
const Q_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    CappedInfinite,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Test function `A(x) ∈ [0,1]`.
    Test(Vec<f64>),
    /// Optimizing distribution (`P′` or `Q*`).
    Distribution(Vec<f64>),
    /// Mixture weights over generators.
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub value: f64,
    pub optimizer: Option<Certificate>,
    pub status: SolverStatus,
    /// Solver residual: constraint violation for LPs, duality gap for
    /// Frank-Wolfe (both in the active unit where they are log-valued).
    pub residual: f64,
}

impl DivergenceReport {
    pub fn finite(value: f64) -> Self {
        Self {
            value,
            optimizer: None,
            status: SolverStatus::Optimal,
            residual: 0.0,
        }
    }

    pub fn infinite() -> Self {
        Self {
            value: INFINITY_SENTINEL,
            optimizer: None,
            status: SolverStatus::CappedInfinite,
            residual: 0.0,
        }
    }

    fn from_nats(v: Option<f64>) -> Self {
        match v {
            Some(v) => Self::finite(units::nats(v)),
            None => Self::infinite(),
        }
    }

    fn with(mut self, cert: Certificate, residual: f64) -> Self {
        self.optimizer = Some(cert);
        self.residual = residual;
        self
    }

    pub fn is_infinite(&self) -> bool {
        self.status == SolverStatus::CappedInfinite
    }

    pub fn finite_value(&self) -> Option<f64> {
        (self.status == SolverStatus::Optimal).then_some(self.value)
    }

    /// A certified lower bound on the true optimum for minimizations whose
    /// residual is a duality gap.
    pub fn lower_bound(&self) -> f64 {
        if self.is_infinite() {
            INFINITY_SENTINEL
        } else {
            self.value - self.residual
        }
    }
}

/// Convex hull of finitely many joint distributions at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    generators: Vec<JointDistribution>,
}

impl Polytope {
    pub fn new(generators: Vec<JointDistribution>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::domain("polytope needs at least one generator"))?;
        for g in &generators[1..] {
            ensure_same_space(first, g)?;
        }
        Ok(Self { generators })
    }

    pub fn from_distributions(gens: Vec<Distribution>) -> Result<Self> {
        Self::new(gens.into_iter().map(Into::into).collect())
    }

    pub fn generators(&self) -> &[JointDistribution] {
        &self.generators
    }

    pub fn level(&self) -> usize {
        self.generators[0].n()
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.generators[0].shared_alphabet()
    }

    pub fn weight_vectors(&self) -> Vec<Vec<f64>> {
        self.generators.iter().map(|g| g.weights().to_vec()).collect()
    }
}

/// `p ln(p/q)` with the `0 ln(0/q) = 0` and `p ln(p/0) = ∞` conventions;
/// `None` stands for `+∞`.
#[inline]
pub(crate) fn plogpq(p: f64, q: f64) -> Option<f64> {
    if p <= 0.0 {
        Some(0.0)
    } else if q <= 0.0 {
        None
    } else {
        Some(p * (p / q).ln())
    }
}

/// `D(p‖q)` in nats.
pub(crate) fn kl_nats(p: &[f64], q: &[f64]) -> Option<f64> {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        acc += plogpq(a, b)?;
    }
    Some(acc.max(0.0))
}

pub fn kl<P: ProbabilityVector + ?Sized, Q: ProbabilityVector + ?Sized>(p: &P, q: &Q) -> Result<DivergenceReport> {
    ensure_same_space(p, q)?;
    Ok(DivergenceReport::from_nats(kl_nats(p.weights(), q.weights())))
}

pub(crate) fn d_max_nats(p: &[f64], q: &[f64]) -> Option<f64> {
    let mut best: f64 = 0.0;
    let mut any = false;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return None;
            }
            let r = a / b;
            best = if any { best.max(r) } else { r };
            any = true;
        }
    }
    Some(best.ln())
}

/// `log max_x P(x)/Q(x)` over the support of `P`.
pub fn d_max<P: ProbabilityVector + ?Sized, Q: ProbabilityVector + ?Sized>(p: &P, q: &Q) -> Result<DivergenceReport> {
    ensure_same_space(p, q)?;
    Ok(DivergenceReport::from_nats(d_max_nats(p.weights(), q.weights())))
}

/// Smooth max-relative entropy: `min log t` over `P′ ≤ tQ`, `P′` a
/// distribution with `½‖P − P′‖₁ ≤ ε`. Solved as an LP in `(P′, t, u)`
/// with `u ≥ |P − P′|`.
pub fn d_max_smooth<P: ProbabilityVector + ?Sized, Q: ProbabilityVector + ?Sized>(
    p: &P,
    q: &Q,
    eps: f64,
) -> Result<DivergenceReport> {
    ensure_same_space(p, q)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::domain(format!("smoothing eps={eps} outside [0,1)")));
    }
    d_max_smooth_weights(p.weights(), q.weights(), eps)
}

pub(crate) fn d_max_smooth_weights(p: &[f64], q: &[f64], eps: f64) -> Result<DivergenceReport> {
    let k = p.len();
    // Columns: P′ (k), t, u (k).
    let width = 2 * k + 1;
    let t = k;
    let u = |x: usize| k + 1 + x;
    let mut cost = vec![0.0; width];
    cost[t] = 1.0;
    let mut lp = LinearProgram::new(cost);
    for x in 0..k {
        let mut row = vec![0.0; width];
        row[x] = 1.0;
        row[t] = -q[x];
        lp.add_row(row, Cmp::Le, 0.0);
    }
    let mut sum = vec![0.0; width];
    sum[..k].iter_mut().for_each(|v| *v = 1.0);
    lp.add_row(sum, Cmp::Eq, 1.0);
    for x in 0..k {
        let mut lo = vec![0.0; width];
        lo[u(x)] = 1.0;
        lo[x] = -1.0;
        lp.add_row(lo, Cmp::Ge, -p[x]);
        let mut hi = vec![0.0; width];
        hi[u(x)] = 1.0;
        hi[x] = 1.0;
        lp.add_row(hi, Cmp::Ge, p[x]);
    }
    let mut budget = vec![0.0; width];
    (0..k).for_each(|x| budget[u(x)] = 1.0);
    lp.add_row(budget, Cmp::Le, 2.0 * eps);
    match lp.solve() {
        Ok(sol) => {
            let residual = lp.violation(&sol.x);
            let t_star = sol.x[t].max(1.0);
            let p_prime = sol.x[..k].to_vec();
            Ok(DivergenceReport::finite(units::log(t_star))
                .with(Certificate::Distribution(p_prime), residual))
        }
        Err(Error::Infeasible) => Ok(DivergenceReport::infinite()),
        Err(e) => Err(e),
    }
}

/// Hypothesis-testing relative entropy `−log min{A·Q : A·P ≥ 1−ε, 0 ≤ A ≤ 1}`.
pub fn d_hyp<P: ProbabilityVector + ?Sized, Q: ProbabilityVector + ?Sized>(
    p: &P,
    q: &Q,
    eps: f64,
) -> Result<DivergenceReport> {
    ensure_same_space(p, q)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps={eps} outside (0,1)")));
    }
    d_hyp_weights(p.weights(), q.weights(), eps)
}

pub(crate) fn d_hyp_weights(p: &[f64], q: &[f64], eps: f64) -> Result<DivergenceReport> {
    let k = p.len();
    let mut lp = LinearProgram::new(q.to_vec());
    for x in 0..k {
        lp.set_upper(x, 1.0);
    }
    lp.add_row(p.to_vec(), Cmp::Ge, 1.0 - eps);
    let sol = lp.solve()?;
    let residual = lp.violation(&sol.x);
    let beta = sol.objective;
    let report = if beta <= 0.0 {
        DivergenceReport::infinite()
    } else {
        DivergenceReport::finite(-units::log(beta))
    };
    Ok(report.with(Certificate::Test(sol.x), residual))
}

/// Both sides of the weak/strong converse duality between `D_H^ε` and the
/// smooth max-relative entropy.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SandwichReport {
    pub d_hyp: f64,
    /// `D_max^{1−ε} + log(1/ε)`.
    pub lower: f64,
    /// `D_max^{1−ε−μ} + log(1/μ)`.
    pub upper: f64,
    /// `D_H^ε − lower`.
    pub lower_margin: f64,
    /// `upper − D_H^ε`.
    pub upper_margin: f64,
    /// `D_max^{1−ε} + log(1/(1−ε))`, the form of the lower side that holds
    /// for every `ε ∈ (0,1)`.
    pub lower_corrected: f64,
    pub lower_corrected_margin: f64,
    /// Both literal margins at least `-SANDWICH_SLACK`.
    pub holds: bool,
    /// Corrected lower side and upper side at least `-SANDWICH_SLACK`.
    pub corrected_holds: bool,
}

pub const SANDWICH_SLACK: f64 = 1e-6;

pub fn duality_sandwich_check<P: ProbabilityVector + ?Sized, Q: ProbabilityVector + ?Sized>(
    p: &P,
    q: &Q,
    eps: f64,
    mu: f64,
) -> Result<SandwichReport> {
    ensure_same_space(p, q)?;
    if !(eps > 0.0 && eps < 1.0 && mu > 0.0 && mu <= 1.0 - eps) {
        return Err(Error::domain(format!(
            "need 0 < mu <= 1-eps < 1, got eps={eps}, mu={mu}"
        )));
    }
    let (pw, qw) = (p.weights(), q.weights());
    let dh = d_hyp_weights(pw, qw, eps)?;
    let dm = d_max_smooth_weights(pw, qw, 1.0 - eps)?;
    let dm_mu = d_max_smooth_weights(pw, qw, 1.0 - eps - mu)?;
    let lower = dm.value + units::log(1.0 / eps);
    let upper = if dm_mu.is_infinite() {
        INFINITY_SENTINEL
    } else {
        dm_mu.value + units::log(1.0 / mu)
    };
    let lower_corrected = dm.value + units::log(1.0 / (1.0 - eps));
    let lower_margin = dh.value - lower;
    let upper_margin = upper - dh.value;
    let lower_corrected_margin = dh.value - lower_corrected;
    Ok(SandwichReport {
        d_hyp: dh.value,
        lower,
        upper,
        lower_margin,
        upper_margin,
        lower_corrected,
        lower_corrected_margin,
        holds: lower_margin >= -SANDWICH_SLACK && upper_margin >= -SANDWICH_SLACK,
        corrected_holds: lower_corrected_margin >= -SANDWICH_SLACK
            && upper_margin >= -SANDWICH_SLACK,
    })
}

fn h2_nats(x: f64) -> f64 {
    let t = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.ln() };
    t(x) + t(1.0 - x)
}

/// Binary entropy `h₂(x)`; arguments are clamped to `[0,1]`.
pub fn binary_entropy(x: f64) -> f64 {
    units::nats(h2_nats(x.clamp(0.0, 1.0)))
}

/// Binary entropy in nats, independent of the configured base.
pub fn binary_entropy_nats(x: f64) -> f64 {
    h2_nats(x.clamp(0.0, 1.0))
}

/// `D₂(p‖q) = p log(p/q) + (1−p) log((1−p)/(1−q))`.
pub fn binary_rel_ent(p: f64, q: f64) -> Result<DivergenceReport> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("binary arguments p={p}, q={q} outside [0,1]")));
    }
    let v = plogpq(p, q).and_then(|a| plogpq(1.0 - p, 1.0 - q).map(|b| (a + b).max(0.0)));
    Ok(DivergenceReport::from_nats(v))
}

/// `g(x) = (x+1) log(x+1) − x log x`.
pub fn g_func(x: f64) -> f64 {
    let xlx = |v: f64| if v <= 0.0 { 0.0 } else { v * units::log(v) };
    xlx(x + 1.0) - xlx(x)
}

/// `F_c(x)`: `x log(1/c) + h₂(x)` up to `x = 1/(c+1)`, then `log(1 + 1/c)`.
pub fn f_aux(c: f64, x: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) || !(x >= 0.0) {
        return Err(Error::domain(format!("F_c needs c in (0,1], x >= 0; got c={c}, x={x}")));
    }
    Ok(units::nats(f_aux_nats(c, x)))
}

pub(crate) fn f_aux_nats(c: f64, x: f64) -> f64 {
    if x <= 1.0 / (c + 1.0) {
        x * (1.0 / c).ln() + h2_nats(x)
    } else {
        (1.0 + 1.0 / c).ln()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FauxCheck {
    /// `F_{c1}(x) + F_{c2}(x)`.
    pub b_lhs: f64,
    /// `2 F_{min(c1,c2)}(x)`.
    pub b_rhs: f64,
    pub b_holds: bool,
    /// `F_{c1}(x)`.
    pub c_value: f64,
    /// Grid-and-refine infimum of `x log((1−δ)/(c1 δ)) + log(1/(1−δ))`
    /// over `δ ∈ (0, 1/(c1+1)]`.
    pub c_infimum: f64,
    pub c_holds: bool,
}

pub const FAUX_TOL: f64 = 1e-7;

/// Checks the two-point bound and the variational formula for `F_c`.
pub fn f_aux_variational_check(c1: f64, c2: f64, x: f64) -> Result<FauxCheck> {
    let b_lhs = f_aux(c1, x)? + f_aux(c2, x)?;
    let b_rhs = 2.0 * f_aux(c1.min(c2), x)?;
    let c_value = f_aux(c1, x)?;
    let c_infimum = units::nats(variational_infimum_nats(c1, x));
    Ok(FauxCheck {
        b_lhs,
        b_rhs,
        b_holds: b_lhs <= b_rhs + FAUX_TOL,
        c_value,
        c_infimum,
        c_holds: (c_value - c_infimum).abs() <= FAUX_TOL,
    })
}

fn variational_infimum_nats(c: f64, x: f64) -> f64 {
    let f = |d: f64| x * ((1.0 - d) / (c * d)).ln() - (1.0 - d).ln();
    let hi = 1.0 / (c + 1.0);
    // The objective is unimodal in δ (its derivative changes sign once, at
    // δ = x), so a grid bracket followed by ternary search converges.
    const GRID: usize = 4000;
    let pts: Vec<f64> = (1..=GRID).map(|i| hi * i as f64 / GRID as f64).collect();
    let (best_i, _) = pts
        .iter()
        .enumerate()
        .map(|(i, &d)| (i, f(d)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    let mut lo = if best_i == 0 { f64::MIN_POSITIVE } else { pts[best_i - 1] };
    let mut up = pts[(best_i + 1).min(GRID - 1)];
    for _ in 0..200 {
        let m1 = lo + (up - lo) / 3.0;
        let m2 = up - (up - lo) / 3.0;
        if f(m1) <= f(m2) {
            up = m2;
        } else {
            lo = m1;
        }
    }
    let mut best = f(0.5 * (lo + up)).min(f(hi));
    if x == 0.0 {
        // Infimum approached as δ → 0⁺.
        best = best.min(f(1e-300_f64.max(f64::MIN_POSITIVE)));
    }
    best
}

/// Filtered relative entropy `D(W(P)‖W(Q))`.
pub fn filtered_kl(p: &Distribution, q: &Distribution, w: &StochasticChannel) -> Result<DivergenceReport> {
    ensure_same_space(p, q)?;
    kl(&w.apply(p)?, &w.apply(q)?)
}

/// `−2 log Σ √(PQ)`.
pub fn renyi_half<P: ProbabilityVector + ?Sized, Q: ProbabilityVector + ?Sized>(p: &P, q: &Q) -> Result<DivergenceReport> {
    ensure_same_space(p, q)?;
    let fid: f64 = p
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    if fid <= 0.0 {
        return Ok(DivergenceReport::infinite());
    }
    Ok(DivergenceReport::finite(units::nats((-2.0 * fid.ln()).max(0.0))))
}

/// Outcome of a Frank-Wolfe relative-entropy minimization, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct FwOutcome {
    /// `None` when the minimum is `+∞`.
    pub value: Option<f64>,
    /// Final duality gap; `value − gap` lower-bounds the minimum.
    pub gap: f64,
    pub q: Vec<f64>,
    pub weights: Vec<f64>,
    pub iterations: usize,
}

impl FwOutcome {
    pub fn into_report(self) -> DivergenceReport {
        match self.value {
            None => DivergenceReport::infinite(),
            Some(v) => DivergenceReport::finite(units::nats(v))
                .with(Certificate::Distribution(self.q), units::nats(self.gap)),
        }
    }
}

fn mix(gens: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; gens[0].len()];
    for (g, &c) in gens.iter().zip(w) {
        if c != 0.0 {
            for (o, v) in out.iter_mut().zip(g) {
                *o += c * v;
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes a convex function of `γ ∈ [0, hi]` given its nondecreasing
/// derivative; `+∞` derivatives are allowed near the far end.
fn line_search(hi: f64, deriv: impl Fn(f64) -> f64) -> f64 {
    if deriv(0.0) >= 0.0 {
        return 0.0;
    }
    let dh = deriv(hi);
    if dh.is_finite() && dh <= 0.0 {
        return hi;
    }
    let (mut lo, mut up) = (0.0, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo + up);
        if deriv(mid) < 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
        if up - lo <= 1e-17 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + up)
}

/// `min_{Q ∈ co(gens)} D(p‖Q)` by away-step Frank-Wolfe over the mixture
/// weights, starting from the uniform mixture.
pub fn min_kl_to_hull(p: &[f64], gens: &[Vec<f64>]) -> FwOutcome {
    let m = gens.len();
    let d = p.len();
    let covered: Vec<bool> = (0..d).map(|x| gens.iter().any(|g| g[x] > 0.0)).collect();
    if (0..d).any(|x| p[x] > 0.0 && !covered[x]) {
        return FwOutcome {
            value: None,
            gap: 0.0,
            q: mix(gens, &vec![1.0 / m as f64; m]),
            weights: vec![1.0 / m as f64; m],
            iterations: 0,
        };
    }
    let supp: Vec<usize> = (0..d).filter(|&x| p[x] > 0.0).collect();
    let mut w = vec![1.0 / m as f64; m];
    let mut q = mix(gens, &w);
    let objective = |q: &[f64]| -> f64 {
        supp.iter().map(|&x| p[x] * (p[x] / q[x].max(Q_FLOOR)).ln()).sum()
    };
    let mut gap = f64::INFINITY;
    let mut it = 0;
    while it < FW_MAX_ITERATIONS {
        it += 1;
        let ratio: Vec<f64> = (0..d)
            .map(|x| if p[x] > 0.0 { p[x] / q[x].max(Q_FLOOR) } else { 0.0 })
            .collect();
        let scores: Vec<f64> = gens.iter().map(|g| dot(&ratio, g)).collect();
        let (fw, &fw_score) = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty generators");
        // Σ_x P(x) over supp = 1, so ⟨∇, w − e_fw⟩ = fw_score − 1.
        let p_mass: f64 = supp.iter().map(|&x| p[x]).sum();
        gap = (fw_score - p_mass).max(0.0);
        if gap < FW_GAP_TOL {
            break;
        }
        let (away, away_score) = (0..m)
            .filter(|&j| w[j] > 0.0)
            .map(|j| (j, scores[j]))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("some active generator");
        let away_gap = p_mass - away_score;
        let (dir, hi, fw_step) = if gap >= away_gap || w[away] >= 1.0 {
            let dir: Vec<f64> = gens[fw].iter().zip(&q).map(|(g, v)| g - v).collect();
            (dir, 1.0, true)
        } else {
            let dir: Vec<f64> = q.iter().zip(&gens[away]).map(|(v, g)| v - g).collect();
            (dir, w[away] / (1.0 - w[away]), false)
        };
        let step = line_search(hi, |g| {
            let mut s = 0.0;
            for &x in &supp {
                let qx = q[x] + g * dir[x];
                if qx <= 0.0 {
                    return f64::INFINITY;
                }
                s -= p[x] * dir[x] / qx;
            }
            s
        });
        if step <= 0.0 {
            break;
        }
        if fw_step {
            w.iter_mut().for_each(|v| *v *= 1.0 - step);
            w[fw] += step;
        } else {
            w.iter_mut().for_each(|v| *v *= 1.0 + step);
            w[away] -= step;
            if step >= hi * (1.0 - 1e-15) {
                w[away] = 0.0;
            }
        }
        w.iter_mut().for_each(|v| *v = v.max(0.0));
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        q = mix(gens, &w);
    }
    FwOutcome {
        value: Some(objective(&q).max(0.0)),
        gap,
        q,
        weights: w,
        iterations: it,
    }
}

/// `D(P‖co F)` by Frank-Wolfe; the certificate is the optimizer `Q*` and the
/// residual the final duality gap.
pub fn min_kl_to_polytope<P: ProbabilityVector + ?Sized>(p: &P, f: &Polytope) -> Result<DivergenceReport> {
    ensure_same_space(p, &f.generators[0])?;
    Ok(min_kl_to_hull(p.weights(), &f.weight_vectors()).into_report())
}

/// Outcome of minimizing `D(P‖Q)` jointly over two hulls, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct JointFwOutcome {
    pub value: Option<f64>,
    pub gap: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub iterations: usize,
}

/// `min D(P‖Q)` over `P ∈ co(r)`, `Q ∈ co(s)` (jointly convex), by
/// away-step Frank-Wolfe on the product of the two weight simplices.
pub fn min_kl_between_hulls(r: &[Vec<f64>], s: &[Vec<f64>]) -> JointFwOutcome {
    let d = r[0].len();
    let covered: Vec<bool> = (0..d).map(|x| s.iter().any(|g| g[x] > 0.0)).collect();
    // P must vanish off the union of supports of S.
    let r: Vec<Vec<f64>> = r
        .iter()
        .filter(|g| (0..d).all(|x| g[x] <= 0.0 || covered[x]))
        .cloned()
        .collect();
    if r.is_empty() {
        return JointFwOutcome {
            value: None,
            gap: 0.0,
            p: vec![],
            q: vec![],
            iterations: 0,
        };
    }
    if r.len() == 1 {
        let out = min_kl_to_hull(&r[0], s);
        return JointFwOutcome {
            value: out.value,
            gap: out.gap,
            p: r[0].clone(),
            q: out.q,
            iterations: out.iterations,
        };
    }
    let (mr, ms) = (r.len(), s.len());
    let mut a = vec![1.0 / mr as f64; mr];
    let mut b = vec![1.0 / ms as f64; ms];
    let mut p = mix(&r, &a);
    let mut q = mix(s, &b);
    let value = |p: &[f64], q: &[f64]| -> f64 {
        (0..d)
            .filter(|&x| p[x] > 0.0)
            .map(|x| p[x] * (p[x] / q[x].max(Q_FLOOR)).ln())
            .sum()
    };
    let mut gap = f64::INFINITY;
    let mut it = 0;
    while it < FW_MAX_ITERATIONS {
        it += 1;
        // ∂/∂P = ln(P/Q) + 1, ∂/∂Q = −P/Q.
        let gp: Vec<f64> = (0..d)
            .map(|x| (p[x].max(Q_FLOOR) / q[x].max(Q_FLOOR)).ln() + 1.0)
            .collect();
        let gq: Vec<f64> = (0..d).map(|x| -p[x] / q[x].max(Q_FLOOR)).collect();
        let sr: Vec<f64> = r.iter().map(|g| dot(&gp, g)).collect();
        let ss: Vec<f64> = s.iter().map(|g| dot(&gq, g)).collect();
        let argmin = |v: &[f64]| {
            v.iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1).then(x.0.cmp(&y.0)))
                .map(|(i, _)| i)
                .expect("nonempty")
        };
        let argmax_active = |v: &[f64], w: &[f64]| {
            v.iter()
                .enumerate()
                .filter(|(i, _)| w[*i] > 0.0)
                .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
                .map(|(i, _)| i)
                .expect("active")
        };
        let (fi, fj) = (argmin(&sr), argmin(&ss));
        let cur = dot(&gp, &p) + dot(&gq, &q);
        gap = (cur - sr[fi] - ss[fj]).max(0.0);
        if gap < FW_GAP_TOL {
            break;
        }
        let (ai, aj) = (argmax_active(&sr, &a), argmax_active(&ss, &b));
        let away_gap = sr[ai] + ss[aj] - cur;
        let use_fw = gap >= away_gap || (a[ai] >= 1.0 && b[aj] >= 1.0);
        let (dp, dq, hi): (Vec<f64>, Vec<f64>, f64) = if use_fw {
            (
                r[fi].iter().zip(&p).map(|(g, v)| g - v).collect(),
                s[fj].iter().zip(&q).map(|(g, v)| g - v).collect(),
                1.0,
            )
        } else {
            let lim = |w: f64| if w >= 1.0 { f64::INFINITY } else { w / (1.0 - w) };
            (
                p.iter().zip(&r[ai]).map(|(v, g)| v - g).collect(),
                q.iter().zip(&s[aj]).map(|(v, g)| v - g).collect(),
                lim(a[ai]).min(lim(b[aj])),
            )
        };
        let step = line_search(hi, |g| {
            let mut acc = 0.0;
            for x in 0..d {
                let px = p[x] + g * dp[x];
                let qx = q[x] + g * dq[x];
                if px <= 0.0 {
                    if dp[x] > 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    continue;
                }
                if qx <= 0.0 {
                    return f64::INFINITY;
                }
                acc += dp[x] * ((px / qx).ln() + 1.0) - px * dq[x] / qx;
            }
            acc
        });
        if step <= 0.0 {
            break;
        }
        if use_fw {
            a.iter_mut().for_each(|v| *v *= 1.0 - step);
            a[fi] += step;
            b.iter_mut().for_each(|v| *v *= 1.0 - step);
            b[fj] += step;
        } else {
            a.iter_mut().for_each(|v| *v *= 1.0 + step);
            a[ai] -= step;
            b.iter_mut().for_each(|v| *v *= 1.0 + step);
            b[aj] -= step;
        }
        for w in [&mut a, &mut b] {
            w.iter_mut().for_each(|v| {
                if *v < 1e-15 {
                    *v = 0.0
                }
            });
            let t: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= t);
        }
        p = mix(&r, &a);
        q = mix(s, &b);
    }
    JointFwOutcome {
        value: Some(value(&p, &q).max(0.0)),
        gap,
        p,
        q,
        iterations: it,
    }
}

/// `D(co R‖co S)` between two polytopes.
pub fn min_kl_between_polytopes(r: &Polytope, s: &Polytope) -> Result<DivergenceReport> {
    ensure_same_space(&r.generators[0], &s.generators[0])?;
    let out = min_kl_between_hulls(&r.weight_vectors(), &s.weight_vectors());
    Ok(match out.value {
        None => DivergenceReport::infinite(),
        Some(v) => DivergenceReport::finite(units::nats(v))
            .with(Certificate::Distribution(out.q), units::nats(out.gap)),
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ContinuityCheck {
    pub tv: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

pub const CONTINUITY_SLACK: f64 = 1e-6;

/// `D(P_n‖F) ≤ D(P′_n‖F) + nε log(1/c) + n g(ε) + h₂(ε)` with
/// `ε = tv(P_n, P′_n)`. The left side uses the Frank-Wolfe value (an upper
/// bound on the minimum) and the right side its certified lower bound.
pub fn relent_continuity_bound_check(
    pn: &JointDistribution,
    pn_prime: &JointDistribution,
    f: &Polytope,
    r: &Distribution,
    c: f64,
) -> Result<ContinuityCheck> {
    ensure_same_space(pn, pn_prime)?;
    ensure_same_space(pn, &f.generators[0])?;
    if pn.alphabet() != r.alphabet() {
        return Err(Error::AlphabetMismatch(pn.alphabet().size(), r.alphabet().size()));
    }
    let k = r.alphabet().size();
    for (idx, &w) in pn.weights().iter().enumerate() {
        if w > 0.0
            && crate::alphabet::index_string(idx, k, pn.n())
                .iter()
                .any(|&s| r.get(s) <= 0.0)
        {
            return Err(Error::domain("P_n is not supported on supp(R)^n"));
        }
    }
    let cmin = r.support().iter().map(|&x| r.get(x)).fold(1.0, f64::min);
    if !(c > 0.0 && c <= cmin + 1e-15) {
        return Err(Error::domain(format!("c={c} must lie in (0, min R = {cmin}]")));
    }
    let n = pn.n() as f64;
    let eps = crate::alphabet::tv_weights(pn.weights(), pn_prime.weights());
    let lhs = min_kl_to_polytope(pn, f)?;
    let rhs_base = min_kl_to_polytope(pn_prime, f)?;
    let extra = n * eps * units::log(1.0 / c) + n * g_func(eps) + binary_entropy(eps);
    let (lhs_v, rhs_v) = (lhs.value, rhs_base.lower_bound() + extra);
    let margin = if rhs_base.is_infinite() { INFINITY_SENTINEL } else { rhs_v - lhs_v };
    Ok(ContinuityCheck {
        tv: eps,
        lhs: lhs_v,
        rhs: rhs_v.min(INFINITY_SENTINEL),
        margin,
        holds: margin >= -CONTINUITY_SLACK,
    })
}

/// `|H(P) − H(Q)| ≤ F_{1/|X|}(tv(P,Q))`.
pub fn entropy_continuity_check<P: ProbabilityVector + ?Sized, Q: ProbabilityVector + ?Sized>(
    p: &P,
    q: &Q,
) -> Result<ContinuityCheck> {
    ensure_same_space(p, q)?;
    let k = p.weights().len() as f64;
    let tv = crate::alphabet::tv_weights(p.weights(), q.weights());
    let lhs = (crate::alphabet::entropy(p) - crate::alphabet::entropy(q)).abs();
    let rhs = f_aux(1.0 / k, tv)?;
    Ok(ContinuityCheck {
        tv,
        lhs,
        rhs,
        margin: rhs - lhs,
        holds: rhs - lhs >= -CONTINUITY_SLACK,
    })
}
