//! Acceptance suite. Prints one line per criterion and exits nonzero when a
//! criterion outside `KNOWN_UNATTAINABLE` fails.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use stein_lab::divergences::{
    d_hyp, d_max_smooth, entropy_continuity_check, f_aux, min_kl_to_polytope, relent_continuity_bound_check, kl,
};
use stein_lab::families::{realize, GeneratedSet};
use stein_lab::stein;
use stein_lab::types::{enumerate_types, hamming_ball_weight, type_class_size, StringSet};
use stein_lab::werner::{werner_channel, werner_membership};
use stein_lab::{
    alphabet::index_string, units, Alphabet, Distribution, FamilySpec, JointDistribution, ProbabilityVector,
    StochasticChannel,
};

/// Criterion 3 asks for the lower side `D_max^{1−ε} + log(1/ε) ≤ D_H^ε` at
/// ε = 0.3. That form is false whenever ε < 1/2: with P = Q,
/// D_H^ε = log(1/(1−ε)) and D_max^{1−ε} = 0, leaving a margin of
/// log(ε/(1−ε)) < 0. The check runs as stated; the form with log(1/(1−ε)),
/// which does hold, is reported alongside.
const KNOWN_UNATTAINABLE: &[usize] = &[3];

struct Verdict {
    pass: bool,
    detail: String,
}

fn nats(v: f64) -> f64 {
    units::log_base().to_nats(v)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dirichlet(k: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(r)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn dist(w: Vec<f64>) -> Distribution {
    Distribution::from_weights(w).unwrap()
}

fn kl_nats(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            if a == 0.0 {
                0.0
            } else if b == 0.0 {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
        .sum()
}

fn h2(x: f64) -> f64 {
    let t = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.ln() };
    t(x) + t(1.0 - x)
}

/// Golden-section maximum of a unimodal function on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let (lo, hi) = (a, b);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let (m1, m2) = (b - g * (b - a), a + g * (b - a));
        if f(m1) < f(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    f(0.5 * (a + b)).max(f(lo)).max(f(hi))
}

/// Grid search refined by golden section.
fn grid_max(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return f(a);
    }
    let m = 400;
    let pts: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
    let i = (0..=m).max_by(|&i, &j| f(pts[i]).total_cmp(&f(pts[j]))).unwrap();
    golden_max(&f, pts[i.saturating_sub(1)], pts[(i + 1).min(m)])
}

fn grid_min(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    -grid_max(|x| -f(x), a, b)
}

/// Optimal Neyman-Pearson type II error at level `eps`: accept symbols in
/// decreasing likelihood-ratio order, randomizing on the threshold symbol.
fn np_beta(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let ratio = |x: usize| if q[x] == 0.0 { f64::INFINITY } else { p[x] / q[x] };
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)));
    let (mut need, mut beta) = (1.0 - eps, 0.0);
    for x in order {
        if need <= 1e-15 {
            break;
        }
        if p[x] > 0.0 {
            let take = (need / p[x]).min(1.0);
            need -= take * p[x];
            beta += take * q[x];
        }
    }
    beta
}

/// Smooth max-divergence by bisection: with `t ≥ 1`, the cheapest
/// smoothing clips `P` at `tQ`, moving `Σ (P − tQ)^+` of mass.
fn dmax_smooth_oracle(p: &[f64], q: &[f64], delta: f64) -> f64 {
    let removed = |t: f64| -> f64 {
        p.iter()
            .zip(q)
            .map(|(&a, &b)| (a - t * b).max(0.0))
            .sum()
    };
    if removed(1.0) <= delta {
        return 0.0;
    }
    let mut hi = p
        .iter()
        .zip(q)
        .filter(|(_, &b)| b > 0.0)
        .map(|(&a, &b)| a / b)
        .fold(1.0, f64::max);
    if removed(hi) > delta + 1e-15 {
        return f64::INFINITY;
    }
    let mut lo = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if removed(mid) <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.ln()
}

/// `F_c(x)` as `max_{0 ≤ y ≤ x} y ln(1/c) + h₂(y)`.
fn faux_oracle(c: f64, x: f64) -> f64 {
    grid_max(|y| y * (1.0 / c).ln() + h2(y), 0.0, x.min(1.0))
}

fn faux_variational_oracle(c: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let f = |d: f64| x * ((1.0 - d) / (c * d)).ln() - (1.0 - d).ln();
    grid_min(f, 1e-12, 1.0 / (c + 1.0))
}

fn c1_gamma_two_copy() -> Verdict {
    let p = Distribution::point_mass(Alphabet::binary(), 0).unwrap();
    let p2 = p.power(2).unwrap();
    let (mut worst_eq, mut worst_cap) = (0.0f64, f64::INFINITY);
    let mut ok = true;
    for gamma in [1.5, 2.0, 2.5] {
        let spec = FamilySpec::WernerGamma { gamma };
        let d1 = nats(min_kl_to_polytope(&p, &realize(&spec, 1).unwrap().polytope()).unwrap().value);
        let q2 = JointDistribution::new(
            Alphabet::binary(),
            2,
            vec![1.0 / (gamma + 1.0), 0.0, 0.0, gamma / (gamma + 1.0)],
        )
        .unwrap();
        let in_family = werner_membership(&q2, gamma).unwrap();
        let ansatz = nats(kl(&p2, &q2).unwrap().value) / 2.0;
        let opt = nats(min_kl_to_polytope(&p2, &realize(&spec, 2).unwrap().polytope()).unwrap().value) / 2.0;
        let cap = 0.5 * (gamma + 1.0f64).ln();
        worst_eq = worst_eq.max((d1 - 2f64.ln()).abs());
        worst_cap = worst_cap.min((cap - ansatz).min(cap - opt));
        ok &= (d1 - 2f64.ln()).abs() <= 1e-6 && in_family && ansatz <= cap + 1e-6 && opt <= cap + 1e-6;
    }
    Verdict {
        pass: ok,
        detail: format!("max |D - ln 2| = {worst_eq:.2e}, min cap slack = {worst_cap:.2e} nats"),
    }
}

fn c2_lp_cross() -> Verdict {
    let mut r = rng(2);
    let (mut worst, mut worst_self) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let k = r.random_range(2..=3);
        let (p, q) = (dirichlet(k, &mut r), dirichlet(k, &mut r));
        let eps = r.random_range(0.01..0.99);
        let lib = nats(d_hyp(&dist(p.clone()), &dist(q.clone()), eps).unwrap().value);
        worst = worst.max((lib + np_beta(&p, &q, eps).ln()).abs());
        let own = nats(d_hyp(&dist(p.clone()), &dist(p.clone()), eps).unwrap().value);
        worst_self = worst_self.max((own + (1.0 - eps).ln()).abs());
    }
    Verdict {
        pass: worst <= 1e-4 && worst_self <= 1e-9,
        detail: format!("max error vs NP oracle {worst:.2e}, identical pair {worst_self:.2e} nats"),
    }
}

fn c3_duality() -> Verdict {
    let (eps, mu) = (0.3, 0.2);
    let mut r = rng(3);
    let (mut literal_bad, mut corrected_bad, mut worst_literal, mut oracle_gap) = (0, 0, f64::INFINITY, 0.0f64);
    for _ in 0..500 {
        let k = r.random_range(2..=3);
        let (p, q) = (dirichlet(k, &mut r), dirichlet(k, &mut r));
        let rep = stein_lab::divergences::duality_sandwich_check(&dist(p.clone()), &dist(q.clone()), eps, mu).unwrap();
        let dh = -np_beta(&p, &q, eps).ln();
        let dm = dmax_smooth_oracle(&p, &q, 1.0 - eps);
        let dm_mu = dmax_smooth_oracle(&p, &q, 1.0 - eps - mu);
        let lib_dm = nats(d_max_smooth(&dist(p.clone()), &dist(q.clone()), 1.0 - eps).unwrap().value);
        oracle_gap = oracle_gap.max((lib_dm - dm).abs());
        let lower = dh - (dm + (1.0 / eps).ln());
        let upper = dm_mu + (1.0 / mu).ln() - dh;
        let corrected = dh - (dm + (1.0 / (1.0 - eps)).ln());
        oracle_gap = oracle_gap
            .max((nats(rep.lower_margin) - lower).abs())
            .max((nats(rep.upper_margin) - upper).abs());
        worst_literal = worst_literal.min(lower.min(upper));
        literal_bad += usize::from(lower.min(upper) < -1e-6);
        corrected_bad += usize::from(corrected.min(upper) < -1e-6);
    }
    Verdict {
        pass: literal_bad == 0,
        detail: format!(
            "literal form violated on {literal_bad}/500 (worst margin {worst_literal:.4} nats); \
             log(1/(1-eps)) form violated on {corrected_bad}/500; library vs oracle {oracle_gap:.1e}"
        ),
    }
}

fn random_set(k: usize, n: usize, r: &mut ChaCha8Rng) -> GeneratedSet {
    let alphabet = Arc::new(Alphabet::indexed(k));
    let m = r.random_range(1..=3);
    let generators = (0..m)
        .map(|_| JointDistribution::with_shared(alphabet.clone(), n, dirichlet(k.pow(n as u32), r)).unwrap())
        .collect();
    GeneratedSet {
        n,
        generators,
        symmetric: false,
        convex: true,
    }
}

fn c4_converse() -> Verdict {
    let mut r = rng(4);
    let (mut worst, mut bad) = (f64::INFINITY, 0);
    for i in 0..200 {
        let n = 1 + i % 3;
        let k = if n == 3 { 2 } else { r.random_range(2..=3) };
        let (a, b) = (random_set(k, n, &mut r), random_set(k, n, &mut r));
        let eps = r.random_range(0.05..0.95);
        let c = stein::converse_regularized(&a, &b, eps).unwrap();
        worst = worst.min(c.margin);
        bad += usize::from(c.margin < -1e-5);
    }
    Verdict {
        pass: bad == 0,
        detail: format!("{bad}/200 violations, worst margin {worst:.3e} {}", units::unit()),
    }
}

fn c5_single_letter() -> Verdict {
    let base_r = vec![vec![0.8, 0.2], vec![0.7, 0.3]];
    let base_s = vec![vec![0.5, 0.5], vec![0.4, 0.6]];
    let seq = stein::stein_sequence(
        &FamilySpec::CompositeIid { base: base_r.clone() },
        &FamilySpec::ArbitrarilyVarying { base: base_s },
        0.2,
        8,
    )
    .unwrap();
    // D(R₁‖co S₁): co S₁ is the segment q ∈ [0.4, 0.5].
    let target = base_r
        .iter()
        .map(|p| -grid_max(|q| -kl_nats(p, &[q, 1.0 - q]), 0.4, 0.5))
        .fold(f64::INFINITY, f64::min);
    let finite = seq.rows.len() == 8 && seq.rows.iter().all(|r| r.rate.is_finite() && r.rate < 1e299);
    let capped = seq.rows.iter().all(|r| r.rate <= r.converse_bound + 1e-5);
    let last = seq.rows.last().map(|r| nats(r.rate)).unwrap_or(f64::NAN);
    let lib_target = seq.single_letter_target.map(nats).unwrap_or(f64::NAN);
    let gap = (last - target).abs();
    Verdict {
        pass: finite && capped && gap <= 0.2 && (lib_target - target).abs() <= 1e-6,
        detail: format!(
            "rate(8) = {last:.4}, target = {target:.4} (library {lib_target:.4}), gap {gap:.4} nats"
        ),
    }
}

/// Largest probability of the type class with `c0` zeros among products of
/// the base laws (all of them equal when `composite`).
fn sanov_weight_oracle(base: &[Vec<f64>], composite: bool, n: usize, c0: usize) -> f64 {
    fn coeffs(mult: &[usize], base: &[Vec<f64>], n: usize) -> Vec<f64> {
        let mut poly = vec![0.0; n + 1];
        poly[0] = 1.0;
        let mut deg = 0;
        for (b, &m) in base.iter().zip(mult) {
            for _ in 0..m {
                for d in (0..=deg + 1).rev() {
                    let keep = if d <= deg { poly[d] * b[1] } else { 0.0 };
                    let add = if d > 0 { poly[d - 1] * b[0] } else { 0.0 };
                    poly[d] = keep + add;
                }
                deg += 1;
            }
        }
        poly
    }
    let mut best = 0.0f64;
    let mut visit = |mult: &[usize]| best = best.max(coeffs(mult, base, n)[c0]);
    if composite {
        for i in 0..base.len() {
            let mut m = vec![0; base.len()];
            m[i] = n;
            visit(&m);
        }
    } else {
        fn rec(i: usize, left: usize, m: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
            if i + 1 == m.len() {
                m[i] = left;
                f(m);
                return;
            }
            for c in 0..=left {
                m[i] = c;
                rec(i + 1, left - c, m, f);
            }
        }
        let mut m = vec![0; base.len()];
        rec(0, n, &mut m, &mut visit);
    }
    best
}

fn c6_sanov() -> Verdict {
    let mut r = rng(6);
    let (mut worst, mut bad, mut weight_gap, mut checked) = (f64::INFINITY, 0, 0.0f64, 0);
    for fam in 0..24 {
        let size = 1 + fam % 3;
        let composite = fam % 2 == 0;
        let base: Vec<Vec<f64>> = (0..size).map(|_| dirichlet(2, &mut r)).collect();
        let spec = if composite {
            FamilySpec::CompositeIid { base: base.clone() }
        } else {
            FamilySpec::ArbitrarilyVarying { base: base.clone() }
        };
        let (lo, hi) = base
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[0]), b.max(p[0])));
        for n in 1..=10 {
            for chk in stein::sanov_sweep(&spec, n).unwrap() {
                let c0 = chk.counts[0];
                let v = [c0 as f64 / n as f64, 1.0 - c0 as f64 / n as f64];
                let exponent = if composite {
                    base.iter().map(|b| kl_nats(&v, b)).fold(f64::INFINITY, f64::min)
                } else {
                    // kl(V‖·) is convex along the segment, so clamp.
                    let q = v[0].clamp(lo, hi);
                    kl_nats(&v, &[q, 1.0 - q])
                };
                let weight = sanov_weight_oracle(&base, composite, n, c0);
                let margin = (-(n as f64) * exponent).exp() - weight;
                weight_gap = weight_gap.max((weight - chk.weight).abs());
                worst = worst.min(margin);
                bad += usize::from(margin < -1e-12 || !chk.holds);
                checked += 1;
            }
        }
    }
    Verdict {
        pass: bad == 0 && weight_gap <= 1e-12,
        detail: format!(
            "{checked} (family, type) pairs, {bad} violations, worst margin {worst:.2e}, weight vs oracle {weight_gap:.1e}"
        ),
    }
}

fn c7_type_counting() -> Verdict {
    fn fact(n: usize) -> u128 {
        (1..=n as u128).product()
    }
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for k in 2..=3usize {
        let alphabet = Alphabet::indexed(k);
        for n in 1..=12usize {
            let types = enumerate_types(&alphabet, n).unwrap();
            ok &= types.len() as u128 == fact(n + k - 1) / (fact(k - 1) * fact(n));
            let mut total = BigUint::from(0u32);
            for v in &types {
                let exact = fact(n) / v.counts().iter().map(|&c| fact(c)).product::<u128>();
                let lib = type_class_size(v);
                ok &= lib == BigUint::from(exact);
                total += lib;
                let nh: f64 = v
                    .counts()
                    .iter()
                    .filter(|&&c| c > 0)
                    .map(|&c| {
                        let f = c as f64 / n as f64;
                        -(n as f64) * f * f.ln()
                    })
                    .sum();
                let ln_t = (exact as f64).ln();
                let slack = (nh - ln_t).min(ln_t - (nh - k as f64 * ((n + 1) as f64).ln()));
                worst = worst.min(slack);
                ok &= slack >= -1e-9;
            }
            ok &= total == BigUint::from(k).pow(n as u32);
        }
    }
    Verdict {
        pass: ok,
        detail: format!("|X| in {{2,3}}, n <= 12; smallest sandwich slack {worst:.3e} nats"),
    }
}

fn c8_hamming() -> Verdict {
    let n = 10usize;
    let len = 1usize << n;
    let alphabet = Arc::new(Alphabet::binary());
    let mut r = rng(8);
    let (mut failures, mut lib_gap, mut worst) = (0, 0.0f64, f64::INFINITY);
    for eps in [0.1f64, 0.3] {
        for eta in [0.1f64, 0.5] {
            let radius = ((2.0 * n as f64 * (1.0 / eps).ln()).sqrt() + (2.0 * n as f64 * (1.0 / eta).ln()).sqrt())
                .ceil() as u32;
            for _ in 0..100 {
                let p = dirichlet(2, &mut r);
                let weight = |idx: usize| -> f64 { index_string(idx, 2, n).iter().map(|&x| p[x]).product() };
                let mut order: Vec<usize> = (0..len).collect();
                rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut r);
                let (mut members, mut mass) = (Vec::new(), 0.0);
                for idx in order {
                    if mass >= eps {
                        break;
                    }
                    mass += weight(idx);
                    members.push(idx);
                }
                let ball: f64 = (0..len)
                    .filter(|&x| members.iter().any(|&y| ((x ^ y) as u32).count_ones() <= radius))
                    .map(weight)
                    .sum();
                let y = StringSet::new(alphabet.clone(), n, members).unwrap();
                let lib = hamming_ball_weight(&y, radius as usize, &dist(p.clone())).unwrap();
                lib_gap = lib_gap.max((lib - ball).abs());
                worst = worst.min(ball - (1.0 - eta));
                failures += usize::from(ball < 1.0 - eta);
            }
        }
    }
    Verdict {
        pass: failures == 0 && lib_gap <= 1e-12,
        detail: format!("{failures}/400 failures, min slack {worst:.3}, library vs oracle {lib_gap:.1e}"),
    }
}

fn c9_faux() -> Verdict {
    let m = 50;
    let cs: Vec<f64> = (1..=m).map(|i| i as f64 / m as f64).collect();
    let xs: Vec<f64> = (0..m).map(|j| j as f64 / (m - 1) as f64).collect();
    let (mut err_a, mut bad_b, mut err_c) = (0.0f64, 0, 0.0f64);
    for (i, &c) in cs.iter().enumerate() {
        let c2 = cs[(i * 17 + 5) % m];
        for &x in &xs {
            let lib = nats(f_aux(c, x).unwrap());
            err_a = err_a.max((lib - faux_oracle(c, x)).abs());
            let lhs = faux_oracle(c, x) + faux_oracle(c2, x);
            let rhs = 2.0 * faux_oracle(c.min(c2), x);
            bad_b += usize::from(lhs > rhs + 1e-7);
            err_c = err_c.max((lib - faux_variational_oracle(c, x)).abs());
        }
    }
    Verdict {
        pass: err_a <= 1e-7 && bad_b == 0 && err_c <= 1e-7,
        detail: format!("(a) {err_a:.1e}, (b) {bad_b} violations, (c) {err_c:.1e} on 50x50"),
    }
}

fn random_joint_on(support: &[usize], k: usize, n: usize, r: &mut ChaCha8Rng) -> JointDistribution {
    let w = (0..k.pow(n as u32))
        .map(|idx| {
            if index_string(idx, k, n).iter().all(|x| support.contains(x)) {
                Exp1.sample(r)
            } else {
                0.0
            }
        })
        .collect();
    JointDistribution::normalized(Arc::new(Alphabet::indexed(k)), n, w).unwrap()
}

fn c10_continuity() -> Verdict {
    let mut r = rng(10);
    let (mut worst_h, mut worst_d, mut bad) = (f64::INFINITY, f64::INFINITY, 0);
    for _ in 0..200 {
        let k = r.random_range(2..=3);
        let (p, q) = (dirichlet(k, &mut r), dirichlet(k, &mut r));
        let h = |v: &[f64]| -> f64 { v.iter().filter(|&&a| a > 0.0).map(|&a| -a * a.ln()).sum() };
        let tv: f64 = 0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let margin = faux_oracle(1.0 / k as f64, tv) - (h(&p) - h(&q)).abs();
        let lib = entropy_continuity_check(&dist(p), &dist(q)).unwrap();
        worst_h = worst_h.min(margin);
        bad += usize::from(margin < -1e-6 || !lib.holds);
    }
    for i in 0..200 {
        let (spec, rref, n) = if i % 2 == 0 {
            (FamilySpec::WernerGamma { gamma: 2.0 }, Distribution::uniform(Alphabet::binary()), 2)
        } else {
            let k = r.random_range(2..=3);
            let base: Vec<Vec<f64>> = (0..2).map(|_| dirichlet(k, &mut r)).collect();
            let spec = FamilySpec::ArbitrarilyVarying { base };
            let rr = spec.depolarizing_reference().unwrap();
            (spec, rr, 1 + (i / 2) % 2)
        };
        let k = rref.alphabet().size();
        let support = rref.support();
        let c = support.iter().map(|&x| rref.get(x)).fold(1.0, f64::min);
        let poly = realize(&spec, n).unwrap().polytope();
        let a = random_joint_on(&support, k, n, &mut r);
        let b = random_joint_on(&support, k, n, &mut r);
        let t: f64 = r.random();
        let a2 = JointDistribution::mixture(&[(1.0 - t, &a), (t, &b)]).unwrap();
        let chk = relent_continuity_bound_check(&a, &a2, &poly, &rref, c).unwrap();
        worst_d = worst_d.min(chk.margin);
        bad += usize::from(chk.margin < -1e-6);
    }
    Verdict {
        pass: bad == 0,
        detail: format!(
            "{bad} violations; worst entropy margin {worst_h:.3e} nats, relative entropy {worst_d:.3e} {}",
            units::unit()
        ),
    }
}

fn c11_definetti() -> Verdict {
    let mut r = rng(11);
    let (mut violations, mut oracle_bad) = (0, 0);
    for i in 0..100 {
        let k = 2 + i % 2;
        let n = 1 + r.random_range(0..if k == 2 { 6 } else { 5 });
        let parts = r.random_range(1..=3);
        let powers: Vec<JointDistribution> = (0..parts).map(|_| dist(dirichlet(k, &mut r)).power(n).unwrap()).collect();
        let w = dirichlet(parts, &mut r);
        let mix: Vec<(f64, &JointDistribution)> = w.iter().copied().zip(powers.iter()).collect();
        let q = JointDistribution::mixture(&mix).unwrap();
        let lib = stein::definetti_type_bound(&q).unwrap();
        violations += usize::from(!lib.holds);
        let types = enumerate_types(&Alphabet::indexed(k), n).unwrap();
        let scale = ((n + 1) as f64).powi(k as i32);
        for (idx, &qx) in q.weights().iter().enumerate() {
            let x = index_string(idx, k, n);
            let universal: f64 = types
                .iter()
                .map(|v| {
                    x.iter()
                        .map(|&s| v.counts()[s] as f64 / n as f64)
                        .product::<f64>()
                })
                .sum();
            oracle_bad += usize::from(qx > scale * universal * (1.0 + 1e-12));
        }
    }
    let q = {
        let spec = FamilySpec::CompositeIid {
            base: vec![vec![0.8, 0.2], vec![0.7, 0.3], vec![0.6, 0.4]],
        };
        let set = realize(&spec, 3).unwrap();
        let parts: Vec<(f64, &JointDistribution)> = set.generators.iter().map(|g| (1.0 / 3.0, g)).collect();
        (spec.clone(), JointDistribution::mixture(&parts).unwrap())
    };
    let rep = stein::definetti_constrained_check(&q.1, &q.0, 1.0, 100_000, 11).unwrap();
    Verdict {
        pass: violations == 0 && oracle_bad == 0 && rep.coverage >= 0.99,
        detail: format!(
            "{violations} library / {oracle_bad} oracle violations over 100 Q_n; constrained coverage {:.4} at Delta = 1, n = 3",
            rep.coverage
        ),
    }
}

fn c12_superadditivity() -> Verdict {
    let mut r = rng(12);
    let comp = FamilySpec::CompositeIid {
        base: vec![vec![0.7, 0.3], vec![0.4, 0.6]],
    };
    let cases: Vec<(FamilySpec, StochasticChannel)> = vec![
        (FamilySpec::WernerGamma { gamma: 2.0 }, werner_channel(2.0).unwrap()),
        (comp, StochasticChannel::identity(Alphabet::binary())),
    ];
    let (mut worst, mut bad) = (f64::INFINITY, 0);
    for (spec, w) in &cases {
        for n in 2..=3 {
            for _ in 0..100 {
                let list: Vec<Distribution> = (0..n).map(|_| dist(dirichlet(2, &mut r))).collect();
                let c = stein::filtered_superadditivity_check(spec, &list, w).unwrap();
                worst = worst.min(c.margin);
                bad += usize::from(c.margin < -1e-5);
            }
        }
    }
    Verdict {
        pass: bad == 0,
        detail: format!("{bad}/400 violations, worst margin {worst:.3e} {}", units::unit()),
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) {
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            collect_files(&p, out);
        } else {
            out.push(p);
        }
    }
}

fn c13_determinism() -> Verdict {
    let suite = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/suite.json");
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &Path, jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_stein-lab"))
            .args(["run", suite.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--seed", "7", "--jobs", jobs])
            .output()
            .unwrap()
            .status
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let (sa, sb) = (run(&a, "1"), run(&b, "4"));
    let mut files = Vec::new();
    collect_files(&a, &mut files);
    files.retain(|p| p.file_name().is_some_and(|n| n != "timings.json"));
    let mut differing = 0;
    for f in &files {
        let rel = f.strip_prefix(&a).unwrap();
        let other = std::fs::read(b.join(rel)).unwrap_or_default();
        differing += usize::from(std::fs::read(f).unwrap() != other);
    }
    let mut fb = Vec::new();
    collect_files(&b, &mut fb);
    let same_count = fb.len() == files.len() + 1;
    Verdict {
        pass: sa.code() == Some(0) && sa.code() == sb.code() && differing == 0 && same_count && !files.is_empty(),
        detail: format!(
            "{} report files compared across --jobs 1 and 4, {differing} differ; exit codes {:?}/{:?}",
            files.len(),
            sa.code(),
            sb.code()
        ),
    }
}

fn main() {
    let criteria: Vec<(usize, &str, fn() -> Verdict)> = vec![
        (1, "gamma family example", c1_gamma_two_copy),
        (2, "LP cross-validation", c2_lp_cross),
        (3, "duality sandwich (literal)", c3_duality),
        (4, "converse bound", c4_converse),
        (5, "single-letter convergence", c5_single_letter),
        (6, "exact Sanov type-class bound", c6_sanov),
        (7, "type-counting identities", c7_type_counting),
        (8, "Hamming concentration", c8_hamming),
        (9, "F_c identities", c9_faux),
        (10, "continuity bounds", c10_continuity),
        (11, "de Finetti bounds", c11_definetti),
        (12, "filtered superadditivity", c12_superadditivity),
        (13, "determinism", c13_determinism),
    ];
    let mut hard_failures = Vec::new();
    for (id, name, f) in criteria {
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        let tag = match (v.pass, KNOWN_UNATTAINABLE.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2}: {tag} {name}: {} [{secs:.1}s]", v.detail);
        if !v.pass && !KNOWN_UNATTAINABLE.contains(&id) {
            hard_failures.push(id);
        }
    }
    if !hard_failures.is_empty() {
        eprintln!("failed criteria: {hard_failures:?}");
        std::process::exit(1);
    }
}
