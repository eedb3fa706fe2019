//! Operational testing quantities: optimal type II errors between composite
//! hypotheses, rate sequences and their single-letter targets, converse
//! bounds, blurring and meta-lemma evaluators, and type-based checks.
//!
//! Families closed under permutations are handled on the space of types:
//! both the optimal test and the hull-to-hull relative entropy can be taken
//! permutation invariant, so only type-class masses matter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::Serialize;

use crate::alphabet::{Alphabet, Distribution, JointDistribution, ProbabilityVector, StochasticChannel};
use crate::divergences::{
    binary_entropy_nats, d_hyp_weights, f_aux_nats, kl_nats, min_kl_between_hulls, min_kl_to_hull, Certificate,
    DivergenceReport, INFINITY_SENTINEL,
};
use crate::error::{Error, Result};
use crate::families::{realize, FamilySpec, GeneratedSet};
use crate::lp::{Cmp, LinearProgram};
use crate::types::{count_vectors, hamming_distance, type_class_size_f64, type_index_of_strings, TypeVector};
use crate::units;

/// Largest dense simplex tableau (rows × columns) we are willing to build.
pub const MAX_LP_CELLS: usize = 20_000_000;

/// Largest dense count-vector grid used by the type-law recursion.
pub const MAX_TYPE_GRID: usize = 10_000_000;

/// `β` values at or below this are treated as exact zeros.
pub const BETA_ZERO: f64 = 1e-15;

pub const CONVERSE_SLACK: f64 = 1e-5;
pub const SUPERADDITIVITY_SLACK: f64 = 1e-5;
pub const SANOV_SLACK: f64 = 1e-12;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("eps={eps} outside (0,1)")))
    }
}

fn ensure_compatible(r: &GeneratedSet, s: &GeneratedSet) -> Result<()> {
    if r.n != s.n {
        return Err(Error::LevelMismatch(r.n, s.n));
    }
    let (a, b) = (r.alphabet().size(), s.alphabet().size());
    if a != b {
        return Err(Error::AlphabetMismatch(a, b));
    }
    if r.generators.is_empty() || s.generators.is_empty() {
        return Err(Error::domain("generator sets must be nonempty"));
    }
    Ok(())
}

/// Removes (numerically) repeated vectors, keeping first occurrences.
fn dedup(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut seen = std::collections::HashSet::new();
    vs.into_iter()
        .filter(|v| seen.insert(v.iter().map(|x| (x * 1e13).round() as i64).collect::<Vec<_>>()))
        .collect()
}

fn type_marginal(w: &[f64], map: &[usize], types: usize) -> Vec<f64> {
    let mut out = vec![0.0; types];
    for (&t, &v) in map.iter().zip(w) {
        out[t] += v;
    }
    out
}

/// Law of the type of `x^n` under a product of `m_i` copies of each
/// `factors[i]`, indexed like [`count_vectors`].
fn product_type_law(factors: &[(&[f64], usize)], k: usize, n: usize) -> Result<Vec<f64>> {
    let grid = (n + 1)
        .checked_pow(k as u32)
        .filter(|&g| g <= MAX_TYPE_GRID)
        .ok_or(Error::Capacity {
            what: "type grid",
            needed: ((n + 1) as u128).saturating_pow(k as u32),
            limit: MAX_TYPE_GRID as u128,
        })?;
    let radix: Vec<usize> = (0..k).map(|x| (n + 1).pow(x as u32)).collect();
    let mut cur = vec![0.0; grid];
    cur[0] = 1.0;
    let mut placed = 0;
    for &(p, m) in factors {
        for _ in 0..m {
            let mut next = vec![0.0; grid];
            for (idx, &v) in cur.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                for x in 0..k {
                    if p[x] > 0.0 {
                        next[idx + radix[x]] += v * p[x];
                    }
                }
            }
            cur = next;
            placed += 1;
        }
    }
    debug_assert_eq!(placed, n);
    Ok(count_vectors(k, n)
        .iter()
        .map(|c| cur[c.iter().zip(&radix).map(|(a, r)| a * r).sum::<usize>()])
        .collect())
}

fn spec_base(spec: &FamilySpec) -> Option<Vec<Vec<f64>>> {
    match spec {
        FamilySpec::SimpleIid { p } => Some(vec![p.clone()]),
        FamilySpec::CompositeIid { base } | FamilySpec::ArbitrarilyVarying { base } => Some(base.clone()),
        _ => None,
    }
}

/// Type-class laws of the generators of an i.i.d. or arbitrarily varying
/// family, computed without realizing the string-level generators.
fn direct_type_generators(spec: &FamilySpec, n: usize) -> Result<Option<Vec<Vec<f64>>>> {
    spec.validate()?;
    let k = spec.alphabet_size()?;
    let Some(base) = spec_base(spec) else {
        return Ok(None);
    };
    let laws = match spec {
        FamilySpec::ArbitrarilyVarying { .. } => count_vectors(base.len(), n)
            .iter()
            .map(|m| {
                let factors: Vec<(&[f64], usize)> = base.iter().map(Vec::as_slice).zip(m.iter().copied()).collect();
                product_type_law(&factors, k, n)
            })
            .collect::<Result<Vec<_>>>()?,
        _ => base
            .iter()
            .map(|b| product_type_law(&[(b.as_slice(), n)], k, n))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(Some(dedup(laws)))
}

/// Generator vectors for a pair of sets at one level: over types when both
/// are permutation closed, over strings otherwise. The third component maps
/// string indices to type indices in the first case.
type ReducedPair = (Vec<Vec<f64>>, Vec<Vec<f64>>, Option<Vec<usize>>);

fn reduce_sets(r: &GeneratedSet, s: &GeneratedSet) -> ReducedPair {
    if r.symmetric && s.symmetric {
        let (types, map) = type_index_of_strings(r.alphabet().size(), r.n);
        let m = |set: &GeneratedSet| {
            dedup(
                set.generators
                    .iter()
                    .map(|g| type_marginal(g.weights(), &map, types.len()))
                    .collect(),
            )
        };
        (m(r), m(s), Some(map))
    } else {
        (dedup(r.weight_vectors()), dedup(s.weight_vectors()), None)
    }
}

fn spec_symmetric_hint(spec: &FamilySpec) -> bool {
    !matches!(spec, FamilySpec::Explicit { .. })
}

/// Generator vectors of two families at level `n` (see [`reduce_sets`]).
fn reduce_specs(r: &FamilySpec, s: &FamilySpec, n: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let (kr, ks) = (r.alphabet_size()?, s.alphabet_size()?);
    if kr != ks {
        return Err(Error::AlphabetMismatch(kr, ks));
    }
    if spec_symmetric_hint(r) && spec_symmetric_hint(s) {
        let side = |spec: &FamilySpec| -> Result<Vec<Vec<f64>>> {
            if let Some(v) = direct_type_generators(spec, n)? {
                return Ok(v);
            }
            let set = realize(spec, n)?;
            let (types, map) = type_index_of_strings(kr, n);
            Ok(dedup(
                set.generators
                    .iter()
                    .map(|g| type_marginal(g.weights(), &map, types.len()))
                    .collect(),
            ))
        };
        return Ok((side(r)?, side(s)?));
    }
    let (rs, ss) = (realize(r, n)?, realize(s, n)?);
    let (a, b, _) = reduce_sets(&rs, &ss);
    Ok((a, b))
}

/// The LP `min t` s.t. `⟨A,Q_j⟩ ≤ t`, `⟨1−A,P_i⟩ ≤ ε`, `0 ≤ A ≤ 1`.
fn beta_lp(r: &[Vec<f64>], s: &[Vec<f64>], eps: f64) -> Result<(f64, Vec<f64>, f64)> {
    let d = r[0].len();
    let rows = r.len() + s.len();
    let cells = rows.saturating_mul(d + 1 + 2 * rows);
    if cells > MAX_LP_CELLS {
        return Err(Error::Capacity {
            what: "hypothesis-testing LP cells",
            needed: cells as u128,
            limit: MAX_LP_CELLS as u128,
        });
    }
    let mut cost = vec![0.0; d + 1];
    cost[d] = 1.0;
    let mut lp = LinearProgram::new(cost);
    for j in 0..=d {
        lp.set_upper(j, 1.0);
    }
    for q in s {
        let mut row = q.clone();
        row.push(-1.0);
        lp.add_row(row, Cmp::Le, 0.0);
    }
    for p in r {
        let mut row = p.clone();
        row.push(0.0);
        lp.add_row(row, Cmp::Ge, 1.0 - eps);
    }
    let sol = lp.solve()?;
    let residual = lp.violation(&sol.x);
    let mut a = sol.x;
    let t = a.pop().unwrap_or(0.0);
    Ok((t.max(0.0), a, residual))
}

/// `β_ε(R‖S)`: the smallest worst-case type II error over tests whose
/// worst-case type I error is at most `ε`. The value is a probability and
/// the certificate the optimal test over strings.
pub fn beta_eps(r: &GeneratedSet, s: &GeneratedSet, eps: f64) -> Result<DivergenceReport> {
    ensure_compatible(r, s)?;
    check_eps(eps)?;
    let (rv, sv, map) = reduce_sets(r, s);
    let (beta, a, residual) = beta_lp(&rv, &sv, eps)?;
    let test = match map {
        Some(map) => map.iter().map(|&t| a[t]).collect(),
        None => a,
    };
    let mut report = DivergenceReport::finite(beta);
    report.optimizer = Some(Certificate::Test(test));
    report.residual = residual;
    Ok(report)
}

fn log_beta_report(beta: f64) -> DivergenceReport {
    if beta <= BETA_ZERO {
        DivergenceReport::infinite()
    } else {
        DivergenceReport::finite(-units::log(beta))
    }
}

/// `D_H^ε(co R‖co S) = −log β_ε(R‖S)`.
pub fn d_hyp_sets(r: &GeneratedSet, s: &GeneratedSet, eps: f64) -> Result<DivergenceReport> {
    if r.generators.len() == 1 && s.generators.len() == 1 {
        ensure_compatible(r, s)?;
        check_eps(eps)?;
        return d_hyp_weights(r.generators[0].weights(), s.generators[0].weights(), eps);
    }
    let b = beta_eps(r, s, eps)?;
    let mut out = log_beta_report(b.value);
    out.optimizer = b.optimizer;
    out.residual = b.residual;
    Ok(out)
}

fn hull_divergence_vectors(r: &[Vec<f64>], s: &[Vec<f64>]) -> DivergenceReport {
    let out = min_kl_between_hulls(r, s);
    match out.value {
        None => DivergenceReport::infinite(),
        Some(v) => {
            let mut rep = DivergenceReport::finite(units::nats(v));
            rep.residual = units::nats(out.gap);
            rep.optimizer = Some(Certificate::Distribution(out.q));
            rep
        }
    }
}

/// `D(co R‖co S)`, computed on types when both sets are permutation closed.
/// The residual is the Frank-Wolfe gap, so `lower_bound()` is certified.
pub fn hull_divergence(r: &GeneratedSet, s: &GeneratedSet) -> Result<DivergenceReport> {
    ensure_compatible(r, s)?;
    let (rv, sv, _) = reduce_sets(r, s);
    Ok(hull_divergence_vectors(&rv, &sv))
}

/// Weak converse at one level: `D(co R‖co S) ≥ −1 + (1−ε) D_H^ε(R‖S)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseReport {
    pub n: usize,
    /// Certified lower bound on `D(co R‖co S)`.
    pub divergence: f64,
    pub d_hyp: f64,
    /// `−1 + (1−ε) D_H^ε`.
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    /// Per-letter cap on the rate implied by the inequality,
    /// `(D + 1) / (n(1−ε))`.
    pub rate_bound: f64,
}

fn converse_from(n: usize, eps: f64, div: &DivergenceReport, dh: &DivergenceReport) -> ConverseReport {
    let divergence = div.lower_bound().max(0.0).min(INFINITY_SENTINEL);
    let rhs = if dh.is_infinite() {
        INFINITY_SENTINEL
    } else {
        -1.0 + (1.0 - eps) * dh.value
    };
    let margin = if div.is_infinite() { INFINITY_SENTINEL } else { divergence - rhs };
    let rate_bound = if div.is_infinite() {
        INFINITY_SENTINEL
    } else {
        (divergence + 1.0) / (n as f64 * (1.0 - eps))
    };
    ConverseReport {
        n,
        divergence,
        d_hyp: dh.value,
        rhs,
        margin,
        holds: margin >= -CONVERSE_SLACK,
        rate_bound,
    }
}

/// Checks the weak converse between two generated sets and reports the
/// regularized bound it implies.
pub fn converse_regularized(r: &GeneratedSet, s: &GeneratedSet, eps: f64) -> Result<ConverseReport> {
    ensure_compatible(r, s)?;
    check_eps(eps)?;
    let (rv, sv, _) = reduce_sets(r, s);
    let div = hull_divergence_vectors(&rv, &sv);
    let dh = log_beta_report(beta_lp(&rv, &sv, eps)?.0);
    Ok(converse_from(r.n, eps, &div, &dh))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinRow {
    pub n: usize,
    /// `(1/n) D_H^ε(co R_n‖co S_n)`.
    pub rate: f64,
    pub d_hyp: f64,
    /// Certified lower bound on `D(co R_n‖co S_n)`.
    pub hull_divergence: f64,
    pub converse_bound: f64,
    pub converse_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinSequence {
    pub eps: f64,
    pub rows: Vec<SteinRow>,
    /// Single-letter value the rates converge to, where known.
    pub single_letter_target: Option<f64>,
    /// Converse bound at the last computed level.
    pub converse_bound: f64,
    /// Set when a level hit a capacity limit and the sequence was cut.
    pub warning: Option<String>,
}

fn base_of(spec: &FamilySpec) -> Result<Vec<Vec<f64>>> {
    Ok(spec.single_copy()?.into_iter().map(|d| d.weights().to_vec()).collect())
}

fn min_pairwise_kl(r: &[Vec<f64>], s: &[Vec<f64>]) -> Option<f64> {
    r.iter()
        .flat_map(|p| s.iter().map(move |q| kl_nats(p, q)))
        .fold(None, |acc: Option<f64>, v| match (acc, v) {
            (None, v) => v,
            (a, None) => a,
            (Some(a), Some(b)) => Some(a.min(b)),
        })
}

fn to_unit(v: Option<f64>) -> f64 {
    v.map(units::nats).unwrap_or(INFINITY_SENTINEL)
}

/// Single-letter Stein value for the family pairs with a closed formula:
/// i.i.d. (simple, composite or almost) nulls and arbitrarily varying nulls
/// against i.i.d. or arbitrarily varying alternatives.
pub fn single_letter_target(r: &FamilySpec, s: &FamilySpec) -> Result<Option<f64>> {
    use FamilySpec::*;
    let iid_like = |f: &FamilySpec| matches!(f, SimpleIid { .. } | CompositeIid { .. });
    let r_iid = iid_like(r) || matches!(r, AlmostIid { .. });
    let r_av = matches!(r, ArbitrarilyVarying { .. });
    let s_iid = iid_like(s);
    let s_av = matches!(s, ArbitrarilyVarying { .. });
    if !((r_iid || r_av) && (s_iid || s_av)) {
        return Ok(None);
    }
    let (rb, sb) = (base_of(r)?, base_of(s)?);
    if rb[0].len() != sb[0].len() {
        return Err(Error::AlphabetMismatch(rb[0].len(), sb[0].len()));
    }
    let nats = match (r_av, s_av) {
        (false, false) => min_pairwise_kl(&rb, &sb),
        (false, true) => rb
            .iter()
            .filter_map(|p| min_kl_to_hull(p, &sb).value)
            .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.min(v)))),
        (true, true) => min_kl_between_hulls(&rb, &sb).value,
        (true, false) => sb
            .iter()
            .filter_map(|q| min_kl_between_hulls(&rb, std::slice::from_ref(q)).value)
            .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.min(v)))),
    };
    Ok(Some(to_unit(nats)))
}

/// Rates `(1/n) D_H^ε` for `n = 1..=n_max` with the converse cap at each
/// level. A capacity error past `n = 1` truncates the sequence.
pub fn stein_sequence(r: &FamilySpec, s: &FamilySpec, eps: f64, n_max: usize) -> Result<SteinSequence> {
    check_eps(eps)?;
    if n_max == 0 {
        return Err(Error::domain("n_max must be positive"));
    }
    let mut rows = Vec::new();
    let mut warning = None;
    for n in 1..=n_max {
        let step = reduce_specs(r, s, n).and_then(|(rv, sv)| {
            let (beta, _, _) = beta_lp(&rv, &sv, eps)?;
            Ok((log_beta_report(beta), hull_divergence_vectors(&rv, &sv)))
        });
        let (dh, div) = match step {
            Ok(v) => v,
            Err(e) if e.is_capacity() && n > 1 => {
                warning = Some(format!("truncated at n={n}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let conv = converse_from(n, eps, &div, &dh);
        rows.push(SteinRow {
            n,
            rate: if dh.is_infinite() { INFINITY_SENTINEL } else { dh.value / n as f64 },
            d_hyp: dh.value,
            hull_divergence: conv.divergence,
            converse_bound: conv.rate_bound,
            converse_holds: conv.holds,
        });
    }
    let converse_bound = rows.last().map(|r| r.converse_bound).unwrap_or(INFINITY_SENTINEL);
    Ok(SteinSequence {
        eps,
        rows,
        single_letter_target: single_letter_target(r, s)?,
        converse_bound,
        warning,
    })
}

/// Hypotheses of the meta-lemma. `o_l` and `o_r` only enter the
/// (non-explicit) threshold length, so the bound itself ignores them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaLemmaInputs {
    pub lambda: f64,
    pub xi: f64,
    pub delta: f64,
    pub c: f64,
    pub alphabet_size: usize,
    pub n: usize,
    pub o_l: f64,
    pub o_r: f64,
}

impl MetaLemmaInputs {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda >= 0.0
            && self.xi >= 0.0
            && self.xi < 1.0 / 3.0
            && self.delta > 0.0
            && self.c > 0.0
            && self.c <= 1.0
            && self.alphabet_size >= 1
            && self.n >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("meta-lemma inputs out of range: {self:?}")))
        }
    }
}

/// Default confidence parameter of the blurring evaluators.
pub const DEFAULT_ETA: f64 = 0.5;

fn xlogy_ratio(xi: f64, k: f64) -> f64 {
    if xi <= 0.0 {
        0.0
    } else {
        xi * (k / xi).ln()
    }
}

/// Type-dependent part of the blurring radius, in nats.
fn blur_core(k: usize, xi: f64) -> f64 {
    let k = k as f64;
    4.0 * xi * k.ln() + 2.0 * (3.0 * xlogy_ratio(xi, k) + binary_entropy_nats(3.0 * xi))
}

fn check_blur_args(k: usize, eta: f64, xi: f64, n: usize) -> Result<()> {
    if k == 0 || n == 0 || !(eta > 0.0 && eta < 1.0) || !(0.0..1.0 / 3.0).contains(&xi) {
        return Err(Error::domain(format!(
            "need |X|>=1, n>=1, eta in (0,1), xi in [0,1/3); got {k}, {n}, {eta}, {xi}"
        )));
    }
    Ok(())
}

/// `θ_{|X|,η}(ξ, n)`, a dimensionless radius.
pub fn theta(k: usize, eta: f64, xi: f64, n: usize) -> Result<f64> {
    check_blur_args(k, eta, xi, n)?;
    let nf = n as f64;
    let a = blur_core(k, xi) + 2.0 * k as f64 * (nf + 1.0).ln() / nf;
    Ok(a.sqrt() + (2.0 / nf * (1.0 / eta).ln()).sqrt() + 2.0 * xi)
}

/// `õ_{|X|,η}(1/n) = (|X| log(n+1) + log(1/(1−η))) / n`.
pub fn o_tilde(k: usize, eta: f64, n: usize) -> Result<f64> {
    check_blur_args(k, eta, 0.0, n)?;
    let nf = n as f64;
    Ok((k as f64 * units::log(nf + 1.0) + units::log(1.0 / (1.0 - eta))) / nf)
}

/// The explicit continuity modulus `φ(ξ)` of the meta-lemma, with
/// `φ(0) = 0`.
pub fn phi_explicit(k: usize, c: f64, xi: f64) -> Result<f64> {
    check_blur_args(k, DEFAULT_ETA, xi, 1)?;
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::domain(format!("c={c} outside (0,1]")));
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    let cc = c.min(1.0 / k as f64);
    Ok(units::nats(2.0 * f_aux_nats(cc, blur_core(k, xi).sqrt() + 2.0 * xi)))
}

/// `λ + φ(ξ) + Δ`.
pub fn meta_lemma_rhs(inp: &MetaLemmaInputs) -> Result<f64> {
    inp.validate()?;
    Ok(inp.lambda + phi_explicit(inp.alphabet_size, inp.c, inp.xi)? + inp.delta)
}

/// Right side of the symbol-by-symbol blurring bound,
/// `λ + 2F_{min(c,1/|X|)}(√(2μ/log e) + θ) + õ(1/n)`; `mu` and `lambda` are in
/// the active unit.
pub fn blurring_rhs(lambda: f64, mu: f64, xi: f64, n: usize, c: f64, k: usize, eta: f64) -> Result<f64> {
    check_blur_args(k, eta, xi, n)?;
    if !(c > 0.0 && c <= 1.0) || mu < 0.0 {
        return Err(Error::domain(format!("need c in (0,1], mu >= 0; got c={c}, mu={mu}")));
    }
    let cc = c.min(1.0 / k as f64);
    let mu_nats = units::log_base().to_nats(mu);
    let arg = (2.0 * mu_nats).sqrt() + theta(k, eta, xi, n)?;
    Ok(lambda + units::nats(2.0 * f_aux_nats(cc, arg)) + o_tilde(k, eta, n)?)
}

/// Exact type-class weight against the Sanov exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SanovCheck {
    pub counts: Vec<usize>,
    /// `sup_Q Q_n(T_V)` over the generators.
    pub weight: f64,
    /// `exp(−n min_B D(V‖B))`.
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

struct SanovPrep {
    base: Vec<Vec<f64>>,
    laws: Vec<Vec<f64>>,
    av: bool,
}

fn sanov_prep(spec: &FamilySpec, n: usize) -> Result<SanovPrep> {
    let av = match spec {
        FamilySpec::ArbitrarilyVarying { .. } => true,
        FamilySpec::CompositeIid { .. } | FamilySpec::SimpleIid { .. } => false,
        other => {
            return Err(Error::domain(format!(
                "Sanov type bound needs an i.i.d. or arbitrarily varying family, got {}",
                other.kind_name()
            )))
        }
    };
    let laws = direct_type_generators(spec, n)?.expect("base families have direct laws");
    Ok(SanovPrep {
        base: spec_base(spec).expect("base family"),
        laws,
        av,
    })
}

fn sanov_one(prep: &SanovPrep, v: &TypeVector, type_idx: usize) -> SanovCheck {
    let n = v.n() as f64;
    let freq = v.frequencies();
    let weight = prep.laws.iter().map(|l| l[type_idx]).fold(0.0, f64::max);
    let vertex = prep
        .base
        .iter()
        .filter_map(|b| kl_nats(&freq, b))
        .fold(f64::INFINITY, f64::min);
    let mut best = vertex;
    if prep.av && prep.base.len() > 1 {
        // A product of varying factors has type-class weight at most
        // exp(−n D(V‖B̄)) with B̄ their average. The Frank-Wolfe value is an
        // upper bound on the hull minimum, so the resulting bound is safe.
        if let Some(h) = min_kl_to_hull(&freq, &prep.base).value {
            best = best.min(h);
        }
    }
    let bound = if best.is_finite() { (-n * best).exp() } else { 0.0 };
    let margin = bound - weight;
    SanovCheck {
        counts: v.counts().to_vec(),
        weight,
        bound,
        margin,
        holds: margin >= -SANOV_SLACK,
    }
}

/// `sup_Q Q_n(T_V) ≤ exp(−n min_B D(V‖B))` for an i.i.d. or arbitrarily
/// varying family; for the latter the minimum runs over `co(base)`.
pub fn sanov_type_bound_check(spec: &FamilySpec, v: &TypeVector) -> Result<SanovCheck> {
    let k = spec.alphabet_size()?;
    if v.alphabet().size() != k {
        return Err(Error::AlphabetMismatch(v.alphabet().size(), k));
    }
    let prep = sanov_prep(spec, v.n())?;
    let idx = count_vectors(k, v.n())
        .iter()
        .position(|c| c == v.counts())
        .expect("every type is enumerated");
    Ok(sanov_one(&prep, v, idx))
}

/// [`sanov_type_bound_check`] for every type at level `n`, sharing work.
pub fn sanov_sweep(spec: &FamilySpec, n: usize) -> Result<Vec<SanovCheck>> {
    let k = spec.alphabet_size()?;
    let prep = sanov_prep(spec, n)?;
    let alphabet = Alphabet::indexed(k);
    crate::types::enumerate_types(&alphabet, n)?
        .iter()
        .enumerate()
        .map(|(i, v)| Ok(sanov_one(&prep, v, i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionCheck {
    pub distance: usize,
    /// Probability that `D_{δ,R}^{⊗n}` maps `x` to `y`.
    pub exact: f64,
    /// `(1−δ)^n (cδ/(1−δ))^d`.
    pub bound: f64,
    pub holds: bool,
}

pub fn transition_bound_check(x: &[usize], y: &[usize], r: &Distribution, c: f64, delta: f64) -> Result<TransitionCheck> {
    let d = hamming_distance(x, y)?;
    if !(delta > 0.0 && delta <= 1.0 / (c + 1.0)) {
        return Err(Error::domain(format!("delta={delta} outside (0, 1/(c+1)]")));
    }
    let k = r.alphabet().size();
    if x.iter().chain(y).any(|&s| s >= k) {
        return Err(Error::domain("symbol outside the alphabet"));
    }
    if y.iter().any(|&s| r.get(s) <= 0.0) {
        return Err(Error::domain("y is not supported on supp(R)^n"));
    }
    let cmin = r.support().iter().map(|&s| r.get(s)).fold(1.0, f64::min);
    if !(c > 0.0 && c <= cmin + 1e-15) {
        return Err(Error::domain(format!("c={c} must lie in (0, min R = {cmin}]")));
    }
    let exact: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| if a == b { 1.0 - delta } else { 0.0 } + delta * r.get(b))
        .product();
    let n = x.len() as i32;
    let bound = (1.0 - delta).powi(n) * (c * delta / (1.0 - delta)).powi(d as i32);
    Ok(TransitionCheck {
        distance: d,
        exact,
        bound,
        holds: exact >= bound * (1.0 - 1e-12),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NastyCheck {
    /// `P^{⊗n}(x)`.
    pub lhs: f64,
    /// `(n+1)^{|X|} exp[n F_{1/|X|}(d/n)] / |T_{V_y}|`.
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

pub fn nasty_estimate_check(x: &[usize], y: &[usize], p: &Distribution) -> Result<NastyCheck> {
    let d = hamming_distance(x, y)?;
    let alphabet = p.shared_alphabet();
    let k = alphabet.size();
    let n = x.len();
    let lhs = crate::types::string_probability(p, x);
    let vy = crate::types::type_of_string(alphabet, y)?;
    let s = d as f64 / n as f64;
    let log_rhs =
        k as f64 * ((n + 1) as f64).ln() + n as f64 * f_aux_nats(1.0 / k as f64, s) - type_class_size_f64(&vy).ln();
    let rhs = log_rhs.exp();
    Ok(NastyCheck {
        lhs,
        rhs,
        margin: rhs - lhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}

/// Accept-iff-close-in-type test: `A(x) = 1` iff the type of `x` lies within
/// total variation `δ` of `co(R₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeDistanceTest {
    generators: Vec<Vec<f64>>,
    delta: f64,
}

impl TypeDistanceTest {
    pub fn new(generators: &[Distribution], delta: f64) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::domain("need at least one generator"))?;
        if !(delta > 0.0) {
            return Err(Error::domain(format!("delta={delta} must be positive")));
        }
        for g in generators {
            if g.alphabet() != first.alphabet() {
                return Err(Error::AlphabetMismatch(g.alphabet().size(), first.alphabet().size()));
            }
        }
        Ok(Self {
            generators: generators.iter().map(|g| g.weights().to_vec()).collect(),
            delta,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.generators[0].len()
    }

    /// `min_{P ∈ co(R₁)} ½‖V − P‖₁`, as a small LP in the mixture weights
    /// and the absolute deviations.
    pub fn distance(&self, freq: &[f64]) -> Result<f64> {
        let k = self.alphabet_size();
        if freq.len() != k {
            return Err(Error::AlphabetMismatch(freq.len(), k));
        }
        let m = self.generators.len();
        let mut cost = vec![0.0; m + k];
        cost[m..].iter_mut().for_each(|c| *c = 0.5);
        let mut lp = LinearProgram::new(cost);
        for j in 0..m {
            lp.set_upper(j, 1.0);
        }
        for x in 0..k {
            lp.set_upper(m + x, 2.0);
            let mut plus = vec![0.0; m + k];
            let mut minus = vec![0.0; m + k];
            for (j, g) in self.generators.iter().enumerate() {
                plus[j] = g[x];
                minus[j] = -g[x];
            }
            plus[m + x] = 1.0;
            minus[m + x] = 1.0;
            lp.add_row(plus, Cmp::Ge, freq[x]);
            lp.add_row(minus, Cmp::Ge, -freq[x]);
        }
        let mut sum = vec![1.0; m];
        sum.extend(std::iter::repeat_n(0.0, k));
        lp.add_row(sum, Cmp::Eq, 1.0);
        Ok(lp.solve()?.objective.max(0.0))
    }

    pub fn accepts_type(&self, v: &TypeVector) -> Result<bool> {
        Ok(self.distance(&v.frequencies())? <= self.delta + 1e-12)
    }

    pub fn accepts(&self, x: &[usize]) -> Result<bool> {
        let alphabet = std::sync::Arc::new(Alphabet::indexed(self.alphabet_size()));
        self.accepts_type(&crate::types::type_of_string(&alphabet, x)?)
    }

    /// Acceptance per type, in [`count_vectors`] order.
    fn acceptance(&self, n: usize) -> Result<Vec<bool>> {
        let alphabet = Alphabet::indexed(self.alphabet_size());
        crate::types::enumerate_types(&alphabet, n)?
            .iter()
            .map(|v| self.accepts_type(v))
            .collect()
    }

    fn worst(&self, set: &GeneratedSet, accepted: bool) -> Result<f64> {
        let k = self.alphabet_size();
        if set.alphabet().size() != k {
            return Err(Error::AlphabetMismatch(set.alphabet().size(), k));
        }
        let acc = self.acceptance(set.n)?;
        let (types, map) = type_index_of_strings(k, set.n);
        Ok(set
            .generators
            .iter()
            .map(|g| {
                type_marginal(g.weights(), &map, types.len())
                    .iter()
                    .zip(&acc)
                    .filter(|(_, &a)| a == accepted)
                    .map(|(w, _)| w)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max))
    }

    /// Worst-case type I error `sup_{P ∈ R} P(A = 0)`.
    pub fn alpha(&self, r: &GeneratedSet) -> Result<f64> {
        self.worst(r, false)
    }

    /// Worst-case type II error `sup_{Q ∈ S} Q(A = 1)`.
    pub fn beta(&self, s: &GeneratedSet) -> Result<f64> {
        self.worst(s, true)
    }
}

/// Tolerance of the symmetry check on de Finetti inputs.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeFinettiCertificate {
    pub n: usize,
    /// `max_x Q_n(x) / Σ_V V^{⊗n}(x)`.
    pub max_ratio: f64,
    /// `(n+1)^{|X|}`.
    pub bound: f64,
    pub holds: bool,
}

/// `Σ_V V^{⊗n}(x)` for `x` of each type, in [`count_vectors`] order.
fn universal_mixture(k: usize, n: usize) -> Vec<f64> {
    let types = count_vectors(k, n);
    types
        .iter()
        .map(|u| {
            types
                .iter()
                .map(|v| {
                    u.iter()
                        .zip(v)
                        .map(|(&a, &b)| (b as f64 / n as f64).powi(a as i32))
                        .product::<f64>()
                })
                .sum()
        })
        .collect()
}

/// Entrywise `Q_n ≤ (n+1)^{|X|} Σ_V V^{⊗n}` for a symmetric `Q_n`.
pub fn definetti_type_bound(q: &JointDistribution) -> Result<DeFinettiCertificate> {
    if !q.is_permutation_symmetric(SYMMETRY_TOL) {
        return Err(Error::domain("Q_n is not permutation symmetric"));
    }
    let (k, n) = (q.alphabet().size(), q.n());
    let mix = universal_mixture(k, n);
    let (_, map) = type_index_of_strings(k, n);
    let max_ratio = q
        .weights()
        .iter()
        .zip(&map)
        .map(|(&w, &t)| w / mix[t])
        .fold(0.0, f64::max);
    let bound = ((n + 1) as f64).powi(k as i32);
    Ok(DeFinettiCertificate {
        n,
        max_ratio,
        bound,
        holds: max_ratio <= bound * (1.0 + 1e-12),
    })
}

/// Monte-Carlo diagnostic of the constrained de Finetti reduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstrainedReport {
    pub n: usize,
    pub samples: usize,
    /// Fraction of entries in `supp(Q_n)` where the sampled bound holds.
    pub coverage: f64,
    /// `max_x (Q_n(x) − estimate(x))`; nonpositive when every entry holds.
    pub worst_deficit: f64,
    /// Largest relative standard error among the per-type estimates.
    pub max_relative_stderr: f64,
    pub note: String,
}

/// Estimates `∫ dP e^{−D(P^{⊗n}‖F_n) + nΔ} P^{⊗n}` with `P = Ψ²` for `Ψ`
/// uniform on the unit sphere over `supp(R)`, and compares it with `Q_n`
/// entrywise.
pub fn definetti_constrained_check(
    q: &JointDistribution,
    spec: &FamilySpec,
    big_delta: f64,
    samples: usize,
    seed: u64,
) -> Result<ConstrainedReport> {
    if !(big_delta > 0.0) || samples == 0 {
        return Err(Error::domain("need Delta > 0 and at least one sample"));
    }
    if !q.is_permutation_symmetric(SYMMETRY_TOL) {
        return Err(Error::domain("Q_n is not permutation symmetric"));
    }
    let (k, n) = (q.alphabet().size(), q.n());
    if spec.alphabet_size()? != k {
        return Err(Error::AlphabetMismatch(spec.alphabet_size()?, k));
    }
    if spec.membership_margin(q)? < 0.0 {
        return Err(Error::domain("Q_n is not a member of the family"));
    }
    let (types, map) = type_index_of_strings(k, n);
    let gens = match direct_type_generators(spec, n)? {
        Some(g) => g,
        None => {
            let set = realize(spec, n)?;
            if !set.symmetric {
                return Err(Error::domain("family is not permutation closed"));
            }
            dedup(
                set.generators
                    .iter()
                    .map(|g| type_marginal(g.weights(), &map, types.len()))
                    .collect(),
            )
        }
    };
    let supp = spec.depolarizing_reference()?.support();
    let class: Vec<f64> = types
        .iter()
        .map(|c| type_class_size_f64(&TypeVector::from_counts(c.clone()).expect("valid counts")))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; types.len()];
    let mut sum_sq = vec![0.0; types.len()];
    let boost = n as f64 * big_delta;
    for _ in 0..samples {
        let psi: Vec<f64> = supp.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm: f64 = psi.iter().map(|v: &f64| v * v).sum();
        let mut p = vec![0.0; k];
        for (&x, v) in supp.iter().zip(&psi) {
            p[x] = v * v / norm;
        }
        // Per-string mass of each type under P^{⊗n}.
        let per: Vec<f64> = types
            .iter()
            .map(|c| c.iter().zip(&p).map(|(&a, &px)| px.powi(a as i32)).product())
            .collect();
        let law: Vec<f64> = per.iter().zip(&class).map(|(a, b)| a * b).collect();
        let d = match min_kl_to_hull(&law, &gens).value {
            Some(d) => d,
            None => continue,
        };
        let w = (boost - d).exp();
        for t in 0..types.len() {
            let v = w * per[t];
            sum[t] += v;
            sum_sq[t] += v * v;
        }
    }
    let nf = samples as f64;
    let est: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let max_relative_stderr = est
        .iter()
        .zip(&sum_sq)
        .filter(|(e, _)| **e > 0.0)
        .map(|(e, s2)| ((s2 / nf - e * e).max(0.0) / nf).sqrt() / e)
        .fold(0.0, f64::max);
    let (mut total, mut good, mut worst) = (0usize, 0usize, f64::NEG_INFINITY);
    for (&w, &t) in q.weights().iter().zip(&map) {
        if w <= 0.0 {
            continue;
        }
        total += 1;
        let deficit = w - est[t];
        worst = worst.max(deficit);
        if deficit <= 0.0 {
            good += 1;
        }
    }
    Ok(ConstrainedReport {
        n,
        samples,
        coverage: good as f64 / total.max(1) as f64,
        worst_deficit: worst,
        max_relative_stderr,
        note: format!(
            "Monte Carlo over {samples} sphere samples; largest relative standard error {max_relative_stderr:.3e}"
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperadditivityCheck {
    pub n: usize,
    /// Certified lower bound on `D(P₁⊗…⊗P_n‖co F_n)`.
    pub lhs: f64,
    /// `D(P₁⊗…⊗P_{n−1}‖co F_{n−1})`, zero for `n = 1`.
    pub prefix: f64,
    /// `D(W(P_n)‖W(co F₁))`.
    pub filtered: f64,
    pub margin: f64,
    pub holds: bool,
}

fn product_of(list: &[Distribution]) -> Result<JointDistribution> {
    crate::alphabet::tensor_product(list)
}

/// `D(P₁⊗…⊗P_n‖F_n) ≥ D(P₁⊗…⊗P_{n−1}‖F_{n−1}) + D^W(P_n‖F₁)` with every
/// family replaced by its hull.
pub fn filtered_superadditivity_check(
    spec: &FamilySpec,
    p_list: &[Distribution],
    w: &StochasticChannel,
) -> Result<SuperadditivityCheck> {
    let n = p_list.len();
    if n == 0 {
        return Err(Error::domain("P list must be nonempty"));
    }
    let k = spec.alphabet_size()?;
    if w.input().size() != k {
        return Err(Error::AlphabetMismatch(w.input().size(), k));
    }
    let full = realize(spec, n)?;
    let lhs = min_kl_to_hull(product_of(p_list)?.weights(), &full.weight_vectors());
    let prefix = if n == 1 {
        Some(0.0)
    } else {
        let set = realize(spec, n - 1)?;
        min_kl_to_hull(product_of(&p_list[..n - 1])?.weights(), &set.weight_vectors()).value
    };
    let one = spec.single_copy()?;
    let filtered_gens = one
        .iter()
        .map(|g| Ok(w.apply(g)?.weights().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let wp = w.apply(&p_list[n - 1])?;
    let filtered = min_kl_to_hull(wp.weights(), &filtered_gens).value;
    let lhs_lower = lhs.value.map(|v| v - lhs.gap);
    let margin = match (lhs_lower, prefix, filtered) {
        (None, _, _) => INFINITY_SENTINEL,
        (Some(_), None, _) | (Some(_), _, None) => -INFINITY_SENTINEL,
        (Some(l), Some(a), Some(b)) => units::nats(l - a - b),
    };
    Ok(SuperadditivityCheck {
        n,
        lhs: to_unit(lhs_lower),
        prefix: to_unit(prefix),
        filtered: to_unit(filtered),
        margin,
        holds: margin >= -SUPERADDITIVITY_SLACK,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleLetterReport {
    /// `D(P‖F₁)` (composite) or `D(P‖co F₁)` (arbitrarily varying).
    pub target: f64,
    /// `(n, (1/n) D(P^{⊗n}‖co F_n))`.
    pub values: Vec<(usize, f64)>,
    pub all_below: bool,
    /// `target − value(n_last)`.
    pub final_gap: f64,
    pub within_gap: bool,
    pub warning: Option<String>,
}

pub const SINGLE_LETTER_SLACK: f64 = 1e-6;

pub fn single_letterization_check(
    spec: &FamilySpec,
    p: &Distribution,
    n_max: usize,
    gap_budget: f64,
) -> Result<SingleLetterReport> {
    let base = match spec {
        FamilySpec::CompositeIid { base } | FamilySpec::ArbitrarilyVarying { base } => base.clone(),
        FamilySpec::SimpleIid { p } => vec![p.clone()],
        other => {
            return Err(Error::domain(format!(
                "single-letterization needs an i.i.d. or arbitrarily varying family, got {}",
                other.kind_name()
            )))
        }
    };
    spec.validate()?;
    let k = base[0].len();
    if p.alphabet().size() != k {
        return Err(Error::AlphabetMismatch(p.alphabet().size(), k));
    }
    if n_max == 0 {
        return Err(Error::domain("n_max must be positive"));
    }
    let target_nats = if matches!(spec, FamilySpec::ArbitrarilyVarying { .. }) {
        min_kl_to_hull(p.weights(), &base).value
    } else {
        min_pairwise_kl(&[p.weights().to_vec()], &base)
    };
    let target = to_unit(target_nats);
    let mut values = Vec::new();
    let mut warning = None;
    for n in 1..=n_max {
        let gens = match direct_type_generators(spec, n) {
            Ok(g) => g.expect("base family"),
            Err(e) if e.is_capacity() && n > 1 => {
                warning = Some(format!("truncated at n={n}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let law = product_type_law(&[(p.weights(), n)], k, n)?;
        let v = to_unit(min_kl_to_hull(&law, &gens).value.map(|v| v / n as f64));
        values.push((n, v));
    }
    let all_below = values.iter().all(|&(_, v)| v <= target + SINGLE_LETTER_SLACK);
    let final_gap = values.last().map(|&(_, v)| target - v).unwrap_or(0.0);
    Ok(SingleLetterReport {
        target,
        values,
        all_below,
        final_gap,
        within_gap: final_gap <= gap_budget,
        warning,
    })
}
