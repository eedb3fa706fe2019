//! Registry of scenario checks.
//!
//! A hard check turns the run red when it fails; a diagnostic check only
//! reports. Every check is a pure function of the scenario and its seed.

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};
use std::sync::Arc;

use stein_lab::divergences::{
    binary_entropy_nats, d_hyp, duality_sandwich_check, entropy_continuity_check, f_aux, f_aux_variational_check, kl,
    min_kl_to_polytope, relent_continuity_bound_check, FAUX_TOL,
};
use stein_lab::families::{axiom_probe, realize, Axiom};
use stein_lab::stein::{self, MetaLemmaInputs, TypeDistanceTest};
use stein_lab::types::{
    binomial, enumerate_types, hamming_ball_weight, number_of_types, type_class_size, type_class_size_f64, StringSet,
};
use stein_lab::alphabet::entropy;
use stein_lab::{units, werner, Alphabet, Distribution, FamilySpec, JointDistribution, ProbabilityVector, Result};

use crate::config::Scenario;
use crate::table::{Cell, Table, Unit};

pub struct Ctx<'a> {
    pub scenario: &'a Scenario,
    pub seed: u64,
}

impl Ctx<'_> {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub passed: bool,
    /// Smallest margin seen; negative values are violations.
    pub worst_margin: Option<f64>,
    pub message: String,
    pub tables: Vec<Table>,
}

pub struct Check {
    pub id: &'static str,
    pub description: &'static str,
    pub hard: bool,
    pub applies: fn(&Scenario) -> std::result::Result<(), String>,
    pub run: fn(&Ctx) -> Result<CheckOutcome>,
}

pub fn registry() -> &'static [Check] {
    REGISTRY
}

pub fn find(id: &str) -> Option<&'static Check> {
    REGISTRY.iter().find(|c| c.id == id)
}

static REGISTRY: &[Check] = &[
    Check {
        id: "stein-sequence",
        description: "rates (1/n) D_H^eps between the hulls for n <= n_max, with converse caps and the single-letter target",
        hard: true,
        applies: any,
        run: run_stein_sequence,
    },
    Check {
        id: "converse-bound",
        description: "D(co R_n || co S_n) >= -1 + (1-eps) D_H^eps at every level",
        hard: true,
        applies: any,
        run: run_converse,
    },
    Check {
        id: "duality-sandwich",
        description: "D_H^eps against smooth D_max on single-copy pairs; asserts the (1-eps) lower form and the upper side",
        hard: true,
        applies: any,
        run: run_duality,
    },
    Check {
        id: "gamma-two-copy",
        description: "gamma family: D((1,0)||F_1) = log 2 and the two-copy ansatz and optimizer stay below (1/2) log(gamma+1)",
        hard: true,
        applies: alt_werner,
        run: run_gamma_two_copy,
    },
    Check {
        id: "sanov-type-bound",
        description: "exact type-class weights of the alternative against exp(-n min_B D(V||B)), all types",
        hard: true,
        applies: alt_base_family,
        run: run_sanov,
    },
    Check {
        id: "axiom-probes",
        description: "randomized probes of closure axioms I, II, II+, III and the Sanov surrogate of IV for the alternative",
        hard: false,
        applies: any,
        run: run_axioms,
    },
    Check {
        id: "type-counting",
        description: "number of types, total class size and the class-size sandwich, exactly",
        hard: true,
        applies: any,
        run: run_type_counting,
    },
    Check {
        id: "hamming-concentration",
        description: "Hamming-ball blow-up of random sets of weight >= eps keeps weight >= 1-eta",
        hard: true,
        applies: any,
        run: run_hamming,
    },
    Check {
        id: "faux-identities",
        description: "F_c as a constrained maximum, the two-point bound and the variational formula on a grid",
        hard: true,
        applies: any,
        run: run_faux,
    },
    Check {
        id: "continuity",
        description: "entropy and relative-entropy continuity bounds on random perturbations",
        hard: true,
        applies: any,
        run: run_continuity,
    },
    Check {
        id: "definetti-type-bound",
        description: "entrywise Q_n <= (n+1)^|X| sum_V V^n for random symmetric Q_n",
        hard: true,
        applies: any,
        run: run_definetti,
    },
    Check {
        id: "definetti-constrained",
        description: "Monte-Carlo diagnostic of the constrained de Finetti reduction at Delta = 1",
        hard: false,
        applies: alt_base_family,
        run: run_definetti_constrained,
    },
    Check {
        id: "filtered-superadditivity",
        description: "D(P_1..P_n||F_n) >= D(P_1..P_{n-1}||F_{n-1}) + D^W(P_n||F_1) on random product lists",
        hard: true,
        applies: alt_filtered,
        run: run_superadditivity,
    },
    Check {
        id: "single-letterization",
        description: "(1/n) D(P^n||co F_n) stays below the single-letter value for the first null generator",
        hard: true,
        applies: alt_base_family,
        run: run_single_letter,
    },
    Check {
        id: "meta-lemma",
        description: "blurring radius theta, remainder o~(1/n) and modulus phi on an (n, xi) grid",
        hard: false,
        applies: any,
        run: run_meta_lemma,
    },
    Check {
        id: "transition-bound",
        description: "exact depolarizing transition probabilities against (1-d)^n (c d/(1-d))^dist",
        hard: true,
        applies: any,
        run: run_transition,
    },
    Check {
        id: "nasty-estimate",
        description: "P^n(x) <= (n+1)^|X| exp[n F_{1/|X|}(d/n)] / |T_{V_y}| on random pairs",
        hard: true,
        applies: any,
        run: run_nasty,
    },
    Check {
        id: "type-distance-test",
        description: "errors of the accept-if-type-is-close test built from the null single-copy generators",
        hard: false,
        applies: any,
        run: run_type_test,
    },
    Check {
        id: "lp-cross-validation",
        description: "D_H^eps from the LP against Neyman-Pearson likelihood-ratio tests",
        hard: true,
        applies: any,
        run: run_lp_cross,
    },
];

fn any(_: &Scenario) -> std::result::Result<(), String> {
    Ok(())
}

fn alt_werner(s: &Scenario) -> std::result::Result<(), String> {
    match s.alt_family {
        FamilySpec::WernerGamma { .. } => Ok(()),
        _ => Err("needs a werner_gamma alternative".into()),
    }
}

fn alt_base_family(s: &Scenario) -> std::result::Result<(), String> {
    match s.alt_family {
        FamilySpec::SimpleIid { .. } | FamilySpec::CompositeIid { .. } | FamilySpec::ArbitrarilyVarying { .. } => Ok(()),
        _ => Err("needs an i.i.d. or arbitrarily varying alternative".into()),
    }
}

fn alt_filtered(s: &Scenario) -> std::result::Result<(), String> {
    match s.alt_family.filter_channel() {
        Ok(Some(_)) => Ok(()),
        _ => Err("alternative has no fixed filtering channel".into()),
    }
}

fn outcome(passed: bool, worst: Option<f64>, message: impl Into<String>, tables: Vec<Table>) -> CheckOutcome {
    CheckOutcome {
        passed,
        worst_margin: worst,
        message: message.into(),
        tables,
    }
}

fn min_opt(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.min(v)))
}

fn dirichlet(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

fn random_dist(k: usize, rng: &mut ChaCha8Rng) -> Distribution {
    Distribution::from_weights(dirichlet(k, rng)).expect("normalized")
}

fn alphabet_size(s: &Scenario) -> usize {
    s.null_family.alphabet_size().expect("validated config")
}

fn first_null(s: &Scenario) -> Result<Distribution> {
    Ok(s.null_family.single_copy()?.swap_remove(0))
}

fn run_stein_sequence(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let seq = stein::stein_sequence(&s.null_family, &s.alt_family, s.eps, s.n_max)?;
    let mut t = Table::new(
        "stein_sequence",
        &[
            ("n", Unit::Count),
            ("rate", Unit::Log),
            ("d_hyp", Unit::Log),
            ("hull_divergence", Unit::Log),
            ("converse_bound", Unit::Log),
            ("target", Unit::Log),
            ("converse_holds", Unit::Flag),
        ],
    );
    let mut worst = None;
    let mut passed = true;
    for r in &seq.rows {
        t.push(vec![
            r.n.into(),
            r.rate.into(),
            r.d_hyp.into(),
            r.hull_divergence.into(),
            r.converse_bound.into(),
            seq.single_letter_target.into(),
            r.converse_holds.into(),
        ]);
        let m = r.converse_bound - r.rate;
        worst = min_opt(worst, m);
        passed &= r.converse_holds && m >= -stein::CONVERSE_SLACK;
    }
    let mut msg = match (seq.single_letter_target, seq.rows.last()) {
        (Some(target), Some(last)) => format!(
            "rate({}) = {:.6}, target = {:.6} {}",
            last.n,
            last.rate,
            target,
            units::unit()
        ),
        _ => "no single-letter target for this pair".to_string(),
    };
    if let Some(w) = &seq.warning {
        msg = format!("{msg}; {w}");
    }
    Ok(outcome(passed, worst, msg, vec![t]))
}

fn run_converse(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let mut t = Table::new(
        "converse",
        &[
            ("n", Unit::Count),
            ("hull_divergence", Unit::Log),
            ("d_hyp", Unit::Log),
            ("rhs", Unit::Log),
            ("margin", Unit::Log),
            ("holds", Unit::Flag),
        ],
    );
    let (mut worst, mut passed, mut note) = (None, true, String::new());
    for n in 1..=s.n_max {
        let sets = realize(&s.null_family, n).and_then(|r| Ok((r, realize(&s.alt_family, n)?)));
        let (r, a) = match sets {
            Ok(v) => v,
            Err(e) if e.is_capacity() && n > 1 => {
                note = format!("; truncated at n={n}: {e}");
                break;
            }
            Err(e) => return Err(e),
        };
        let c = stein::converse_regularized(&r, &a, s.eps)?;
        t.push(vec![
            n.into(),
            c.divergence.into(),
            c.d_hyp.into(),
            c.rhs.into(),
            c.margin.into(),
            c.holds.into(),
        ]);
        worst = min_opt(worst, c.margin);
        passed &= c.holds;
    }
    Ok(outcome(passed, worst, format!("eps = {}{note}", s.eps), vec![t]))
}

fn run_duality(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let mu = 0.2f64.min((1.0 - s.eps) / 2.0);
    let nulls = s.null_family.single_copy()?;
    let alts = s.alt_family.single_copy()?;
    let mut t = Table::new(
        "duality_sandwich",
        &[
            ("null_index", Unit::Count),
            ("alt_index", Unit::Count),
            ("d_hyp", Unit::Log),
            ("lower_literal", Unit::Log),
            ("lower_corrected", Unit::Log),
            ("upper", Unit::Log),
            ("lower_literal_margin", Unit::Log),
            ("lower_corrected_margin", Unit::Log),
            ("upper_margin", Unit::Log),
            ("literal_holds", Unit::Flag),
            ("corrected_holds", Unit::Flag),
        ],
    );
    let (mut worst, mut passed, mut literal_failures) = (None, true, 0);
    for (i, p) in nulls.iter().enumerate().take(6) {
        for (j, q) in alts.iter().enumerate().take(6) {
            let r = duality_sandwich_check(p, q, s.eps, mu)?;
            t.push(vec![
                i.into(),
                j.into(),
                r.d_hyp.into(),
                r.lower.into(),
                r.lower_corrected.into(),
                r.upper.into(),
                r.lower_margin.into(),
                r.lower_corrected_margin.into(),
                r.upper_margin.into(),
                r.holds.into(),
                r.corrected_holds.into(),
            ]);
            worst = min_opt(worst, r.lower_corrected_margin.min(r.upper_margin));
            passed &= r.corrected_holds;
            literal_failures += usize::from(!r.holds);
        }
    }
    Ok(outcome(
        passed,
        worst,
        format!("mu = {mu}; literal log(1/eps) lower side fails on {literal_failures} pair(s)"),
        vec![t],
    ))
}

fn run_gamma_two_copy(ctx: &Ctx) -> Result<CheckOutcome> {
    let FamilySpec::WernerGamma { gamma } = ctx.scenario.alt_family else {
        unreachable!("guarded by applies")
    };
    let p = Distribution::point_mass(Alphabet::binary(), 0)?;
    let log2 = units::log(2.0);
    let d1 = min_kl_to_polytope(&p, &realize(&ctx.scenario.alt_family, 1)?.polytope())?.value;
    let p2 = p.power(2)?;
    let ansatz = kl(&p2, &werner::ansatz_q2(gamma)?)?.value / 2.0;
    let opt = min_kl_to_polytope(&p2, &realize(&ctx.scenario.alt_family, 2)?.polytope())?.value / 2.0;
    let cap = 0.5 * units::log(gamma + 1.0);
    let mut t = Table::new(
        "gamma_two_copy",
        &[
            ("gamma", Unit::Ratio),
            ("single_copy", Unit::Log),
            ("log2", Unit::Log),
            ("two_copy_ansatz", Unit::Log),
            ("two_copy_optimizer", Unit::Log),
            ("cap", Unit::Log),
            ("additivity_gap", Unit::Log),
        ],
    );
    t.push(vec![
        gamma.into(),
        d1.into(),
        log2.into(),
        ansatz.into(),
        opt.into(),
        cap.into(),
        (d1 - opt).into(),
    ]);
    let m = (1e-6 - (d1 - log2).abs()).min(cap + 1e-6 - ansatz).min(cap + 1e-6 - opt);
    Ok(outcome(
        m >= 0.0,
        Some(m),
        format!("single-copy minus per-copy two-copy value = {:.6}", d1 - opt),
        vec![t],
    ))
}

fn run_sanov(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let mut t = Table::new(
        "sanov_type_bound",
        &[
            ("n", Unit::Count),
            ("counts", Unit::Label),
            ("weight", Unit::Prob),
            ("bound", Unit::Prob),
            ("margin", Unit::Prob),
            ("holds", Unit::Flag),
        ],
    );
    let (mut worst, mut passed) = (None, true);
    for n in 1..=s.n_max.min(10) {
        for c in stein::sanov_sweep(&s.alt_family, n)? {
            let label = c.counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            t.push(vec![
                n.into(),
                label.into(),
                c.weight.into(),
                c.bound.into(),
                c.margin.into(),
                c.holds.into(),
            ]);
            worst = min_opt(worst, c.margin);
            passed &= c.holds;
        }
    }
    Ok(outcome(passed, worst, "", vec![t]))
}

fn axiom_name(a: Axiom) -> String {
    serde_json::to_value(a)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn run_axioms(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let mut t = Table::new(
        "axiom_probes",
        &[
            ("axiom", Unit::Label),
            ("n", Unit::Count),
            ("samples", Unit::Count),
            ("worst_margin", Unit::Ratio),
            ("passed", Unit::Flag),
            ("note", Unit::Label),
        ],
    );
    let mut axioms = vec![Axiom::Depolarizing, Axiom::TensorPowers, Axiom::TensorProducts, Axiom::Permutations];
    if alt_base_family(s).is_ok() {
        axioms.push(Axiom::TypeStabilitySanov);
    }
    let n = 2;
    let mut failing = Vec::new();
    for (i, a) in axioms.into_iter().enumerate() {
        match axiom_probe(&s.alt_family, a, n, 4, ctx.seed.wrapping_add(i as u64)) {
            Ok(r) => {
                if !r.passed {
                    failing.push(axiom_name(a));
                }
                t.push(vec![
                    axiom_name(a).into(),
                    n.into(),
                    r.samples.into(),
                    r.worst_margin.into(),
                    r.passed.into(),
                    r.counterexamples.first().cloned().unwrap_or_default().into(),
                ]);
            }
            Err(e) if e.is_capacity() => return Err(e),
            Err(e) => t.push(vec![
                axiom_name(a).into(),
                n.into(),
                0usize.into(),
                Cell::Empty,
                false.into(),
                e.to_string().into(),
            ]),
        }
    }
    let msg = if failing.is_empty() {
        "all probed axioms hold".to_string()
    } else {
        format!("probes found counterexamples for {}", failing.join(", "))
    };
    Ok(outcome(true, None, msg, vec![t]))
}

fn run_type_counting(ctx: &Ctx) -> Result<CheckOutcome> {
    let k = alphabet_size(ctx.scenario);
    let alphabet = Alphabet::indexed(k);
    let mut t = Table::new(
        "type_counting",
        &[
            ("n", Unit::Count),
            ("types", Unit::Count),
            ("binomial", Unit::Count),
            ("class_size_total", Unit::Label),
            ("strings", Unit::Label),
            ("sandwich_worst", Unit::Ratio),
            ("holds", Unit::Flag),
        ],
    );
    let (mut worst, mut passed) = (None, true);
    for n in 1..=ctx.scenario.n_max.min(12) {
        let types = enumerate_types(&alphabet, n)?;
        let expect = binomial(n + k - 1, k - 1);
        let total = types
            .iter()
            .map(type_class_size)
            .fold(BigUint::from(0u32), |a, b| a + b);
        let strings = BigUint::from(k).pow(n as u32);
        let mut sw = f64::INFINITY;
        for v in &types {
            // ln|T_V| lies in [nH(V) − |X| ln(n+1), nH(V)].
            let h = n as f64 * units::log_base().to_nats(entropy(&v.to_distribution()));
            let ln_t = type_class_size_f64(v).ln();
            let slack = (h - ln_t).min(ln_t - h + k as f64 * ((n + 1) as f64).ln());
            sw = sw.min(slack);
        }
        let ok = number_of_types(k, n) == expect
            && expect == types.len().into()
            && total == strings
            && sw >= -1e-9;
        t.push(vec![
            n.into(),
            types.len().into(),
            expect.to_string().into(),
            total.to_string().into(),
            strings.to_string().into(),
            sw.into(),
            ok.into(),
        ]);
        worst = min_opt(worst, sw);
        passed &= ok;
    }
    Ok(outcome(passed, worst, format!("|X| = {k}"), vec![t]))
}

fn run_hamming(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let p = first_null(s)?;
    let k = p.alphabet().size();
    let n = s.n_max.clamp(1, 10);
    let alphabet = Arc::new(Alphabet::indexed(k));
    let len = alphabet.strings_len(n)?;
    let mut rng = ctx.rng();
    let mut t = Table::new(
        "hamming_concentration",
        &[
            ("n", Unit::Count),
            ("eps", Unit::Prob),
            ("eta", Unit::Prob),
            ("radius", Unit::Count),
            ("trials", Unit::Count),
            ("min_ball_weight", Unit::Prob),
            ("failures", Unit::Count),
        ],
    );
    let (mut worst, mut failures_total) = (None, 0);
    let weights: Vec<f64> = (0..len)
        .map(|idx| {
            stein_lab::alphabet::index_string(idx, k, n)
                .iter()
                .map(|&x| p.get(x))
                .product()
        })
        .collect();
    for eps in [0.1, 0.3] {
        for eta in [0.1, 0.5] {
            let nf = n as f64;
            let radius = ((2.0 * nf * (1.0 / eps as f64).ln()).sqrt() + (2.0 * nf * (1.0 / eta as f64).ln()).sqrt()).ceil()
                as usize;
            let (mut min_w, mut failures) = (f64::INFINITY, 0);
            let trials = 20;
            for _ in 0..trials {
                let mut order: Vec<usize> = (0..len).collect();
                order.shuffle(&mut rng);
                let (mut members, mut mass) = (Vec::new(), 0.0);
                for idx in order {
                    if mass >= eps {
                        break;
                    }
                    members.push(idx);
                    mass += weights[idx];
                }
                let y = StringSet::new(alphabet.clone(), n, members)?;
                let w = hamming_ball_weight(&y, radius, &p)?;
                min_w = min_w.min(w);
                if w < 1.0 - eta - 1e-12 {
                    failures += 1;
                }
                worst = min_opt(worst, w - (1.0 - eta));
            }
            failures_total += failures;
            t.push(vec![
                n.into(),
                eps.into(),
                eta.into(),
                radius.into(),
                trials.into(),
                min_w.into(),
                failures.into(),
            ]);
        }
    }
    Ok(outcome(failures_total == 0, worst, format!("{failures_total} failure(s)"), vec![t]))
}

/// `max_{y ∈ [0,x]} y log(1/c) + h₂(y)` by golden-section search (the
/// objective is concave).
fn faux_oracle(c: f64, x: f64) -> f64 {
    let f = |y: f64| units::nats(y * (1.0 / c).ln() + binary_entropy_nats(y));
    let (mut a, mut b) = (0.0, x);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (m1, m2) = (b - g * (b - a), a + g * (b - a));
        if f(m1) < f(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    f(0.5 * (a + b)).max(f(x)).max(f(0.0))
}

fn run_faux(_: &Ctx) -> Result<CheckOutcome> {
    let grid = 50;
    let mut t = Table::new(
        "faux_identities",
        &[
            ("points", Unit::Count),
            ("max_error_a", Unit::Log),
            ("failures_b", Unit::Count),
            ("max_error_c", Unit::Log),
        ],
    );
    let (mut err_a, mut fail_b, mut err_c) = (0.0f64, 0, 0.0f64);
    for i in 1..=grid {
        let c = i as f64 / grid as f64;
        let c2 = ((i * 17 + 5) % grid + 1) as f64 / grid as f64;
        for j in 0..=grid {
            let x = j as f64 / grid as f64;
            err_a = err_a.max((f_aux(c, x)? - faux_oracle(c, x)).abs());
            let chk = f_aux_variational_check(c, c2, x)?;
            fail_b += usize::from(!chk.b_holds);
            err_c = err_c.max((chk.c_value - chk.c_infimum).abs());
        }
    }
    t.push(vec![(grid * (grid + 1)).into(), err_a.into(), fail_b.into(), err_c.into()]);
    let passed = err_a <= FAUX_TOL && fail_b == 0 && err_c <= FAUX_TOL;
    Ok(outcome(passed, Some(FAUX_TOL - err_a.max(err_c)), "", vec![t]))
}

fn random_joint_on(support: &[usize], k: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<JointDistribution> {
    let len = Alphabet::indexed(k).strings_len(n)?;
    let w: Vec<f64> = (0..len)
        .map(|idx| {
            let inside = stein_lab::alphabet::index_string(idx, k, n)
                .iter()
                .all(|x| support.contains(x));
            if inside {
                Exp1.sample(rng)
            } else {
                0.0
            }
        })
        .collect();
    JointDistribution::normalized(Arc::new(Alphabet::indexed(k)), n, w)
}

fn run_continuity(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let k = alphabet_size(s);
    let mut rng = ctx.rng();
    let trials = 50;
    let (mut worst, mut ent_fail) = (None, 0);
    for _ in 0..trials {
        let (p, q) = (random_dist(k, &mut rng), random_dist(k, &mut rng));
        let c = entropy_continuity_check(&p, &q)?;
        worst = min_opt(worst, c.margin);
        ent_fail += usize::from(!c.holds);
    }
    // A family closed under depolarization towards R: the gamma family
    // with uniform R, or the arbitrarily varying hull of the alternative's
    // single-copy generators with R their average.
    let (family, r) = match s.alt_family {
        FamilySpec::WernerGamma { .. } => (s.alt_family.clone(), Distribution::uniform(Alphabet::binary())),
        _ => {
            let base: Vec<Vec<f64>> = s.alt_family.single_copy()?.iter().map(|d| d.weights().to_vec()).collect();
            let fam = FamilySpec::ArbitrarilyVarying { base };
            let r = fam.depolarizing_reference()?;
            (fam, r)
        }
    };
    let n = 2;
    let poly = realize(&family, n)?.polytope();
    let support = r.support();
    let c = support.iter().map(|&x| r.get(x)).fold(1.0, f64::min);
    let mut rel_fail = 0;
    for _ in 0..trials {
        let pn = random_joint_on(&support, k, n, &mut rng)?;
        let other = random_joint_on(&support, k, n, &mut rng)?;
        let t: f64 = rng.random();
        let pn_prime = JointDistribution::mixture(&[(1.0 - t, &pn), (t, &other)])?;
        let chk = relent_continuity_bound_check(&pn, &pn_prime, &poly, &r, c)?;
        worst = min_opt(worst, chk.margin);
        rel_fail += usize::from(!chk.holds);
    }
    let mut t = Table::new(
        "continuity",
        &[
            ("bound", Unit::Label),
            ("trials", Unit::Count),
            ("failures", Unit::Count),
        ],
    );
    t.push(vec!["entropy".into(), trials.into(), ent_fail.into()]);
    t.push(vec!["relative_entropy".into(), trials.into(), rel_fail.into()]);
    Ok(outcome(
        ent_fail + rel_fail == 0,
        worst,
        format!("relative-entropy family: {}", family.kind_name()),
        vec![t],
    ))
}

fn random_symmetric(k: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<JointDistribution> {
    let parts = rng.random_range(1..=3);
    let powers = (0..parts)
        .map(|_| random_dist(k, rng).power(n))
        .collect::<Result<Vec<_>>>()?;
    let w = dirichlet(parts, rng);
    let mix: Vec<(f64, &JointDistribution)> = w.iter().copied().zip(powers.iter()).collect();
    JointDistribution::mixture(&mix)
}

fn run_definetti(ctx: &Ctx) -> Result<CheckOutcome> {
    let k = alphabet_size(ctx.scenario);
    let mut rng = ctx.rng();
    let mut t = Table::new(
        "definetti_type_bound",
        &[
            ("n", Unit::Count),
            ("trials", Unit::Count),
            ("max_ratio", Unit::Ratio),
            ("bound", Unit::Ratio),
            ("violations", Unit::Count),
        ],
    );
    let (mut worst, mut total_bad) = (None, 0);
    for n in 1..=ctx.scenario.n_max.min(6) {
        let (mut max_ratio, mut bad, mut bound) = (0.0f64, 0, 0.0);
        let trials = 10;
        for _ in 0..trials {
            let q = random_symmetric(k, n, &mut rng)?;
            let c = stein::definetti_type_bound(&q)?;
            max_ratio = max_ratio.max(c.max_ratio);
            bound = c.bound;
            bad += usize::from(!c.holds);
            worst = min_opt(worst, (c.bound - c.max_ratio) / c.bound);
        }
        total_bad += bad;
        t.push(vec![n.into(), trials.into(), max_ratio.into(), bound.into(), bad.into()]);
    }
    Ok(outcome(total_bad == 0, worst, "margin is relative to the bound", vec![t]))
}

fn run_definetti_constrained(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let n = s.n_max.min(3);
    let set = realize(&s.alt_family, n)?;
    let w = 1.0 / set.generators.len() as f64;
    let parts: Vec<(f64, &JointDistribution)> = set.generators.iter().map(|g| (w, g)).collect();
    let q = JointDistribution::mixture(&parts)?;
    let samples = s.samples.unwrap_or(20_000);
    let big_delta = 1.0;
    let rep = stein::definetti_constrained_check(&q, &s.alt_family, big_delta, samples, ctx.seed)?;
    let mut t = Table::new(
        "definetti_constrained",
        &[
            ("n", Unit::Count),
            ("delta", Unit::Ratio),
            ("samples", Unit::Count),
            ("coverage", Unit::Prob),
            ("worst_deficit", Unit::Prob),
            ("max_relative_stderr", Unit::Ratio),
        ],
    );
    t.push(vec![
        n.into(),
        big_delta.into(),
        samples.into(),
        rep.coverage.into(),
        rep.worst_deficit.into(),
        rep.max_relative_stderr.into(),
    ]);
    Ok(outcome(
        true,
        Some(rep.coverage - 0.99),
        format!("coverage {:.4} (diagnostic threshold 0.99); {}", rep.coverage, rep.note),
        vec![t],
    ))
}

fn run_superadditivity(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let k = alphabet_size(s);
    let w = s.alt_family.filter_channel()?.expect("guarded by applies");
    let mut rng = ctx.rng();
    let mut t = Table::new(
        "filtered_superadditivity",
        &[
            ("n", Unit::Count),
            ("trials", Unit::Count),
            ("worst_margin", Unit::Log),
            ("failures", Unit::Count),
        ],
    );
    let (mut worst, mut total_bad) = (None, 0);
    for n in 2..=s.n_max.clamp(2, 3) {
        let (mut wm, mut bad) = (f64::INFINITY, 0);
        let trials = 10;
        for _ in 0..trials {
            let list: Vec<Distribution> = (0..n).map(|_| random_dist(k, &mut rng)).collect();
            let c = stein::filtered_superadditivity_check(&s.alt_family, &list, &w)?;
            wm = wm.min(c.margin);
            bad += usize::from(!c.holds);
        }
        worst = min_opt(worst, wm);
        total_bad += bad;
        t.push(vec![n.into(), trials.into(), wm.into(), bad.into()]);
    }
    Ok(outcome(total_bad == 0, worst, "", vec![t]))
}

fn run_single_letter(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let p = first_null(s)?;
    let rep = stein::single_letterization_check(&s.alt_family, &p, s.n_max.min(8), units::nats(0.25))?;
    let mut t = Table::new(
        "single_letterization",
        &[("n", Unit::Count), ("value", Unit::Log), ("target", Unit::Log)],
    );
    for &(n, v) in &rep.values {
        t.push(vec![n.into(), v.into(), rep.target.into()]);
    }
    let worst = rep
        .values
        .iter()
        .map(|&(_, v)| rep.target + stein::SINGLE_LETTER_SLACK - v)
        .fold(None, min_opt);
    let mut msg = format!("final gap {:.3e} {}", rep.final_gap, units::unit());
    if let Some(w) = &rep.warning {
        msg = format!("{msg}; {w}");
    }
    Ok(outcome(rep.all_below, worst, msg, vec![t]))
}

fn run_meta_lemma(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let k = alphabet_size(s);
    let r = s.alt_family.depolarizing_reference()?;
    let c = r.support().iter().map(|&x| r.get(x)).fold(1.0, f64::min);
    let mut t = Table::new(
        "meta_lemma",
        &[
            ("n", Unit::Count),
            ("xi", Unit::Ratio),
            ("theta", Unit::Ratio),
            ("o_tilde", Unit::Log),
            ("phi", Unit::Log),
            ("rhs_at_lambda_0", Unit::Log),
        ],
    );
    let mut monotone = true;
    for xi in [0.1, 0.01, 0.001] {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for n in [10usize, 100, 1000, 10_000] {
            let th = stein::theta(k, stein::DEFAULT_ETA, xi, n)?;
            let ot = stein::o_tilde(k, stein::DEFAULT_ETA, n)?;
            let phi = stein::phi_explicit(k, c, xi)?;
            let rhs = stein::meta_lemma_rhs(&MetaLemmaInputs {
                lambda: 0.0,
                xi,
                delta: 0.01,
                c,
                alphabet_size: k,
                n,
                o_l: 0.0,
                o_r: 0.0,
            })?;
            monotone &= th <= prev.0 && ot <= prev.1;
            prev = (th, ot);
            t.push(vec![n.into(), xi.into(), th.into(), ot.into(), phi.into(), rhs.into()]);
        }
    }
    Ok(outcome(
        monotone,
        None,
        format!("c = {c:.6}; theta and o~ decrease in n: {monotone}"),
        vec![t],
    ))
}

fn run_transition(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let r = s.alt_family.depolarizing_reference()?;
    let k = r.alphabet().size();
    let support = r.support();
    let c = support.iter().map(|&x| r.get(x)).fold(1.0, f64::min);
    let mut rng = ctx.rng();
    let trials = 200;
    let (mut failures, mut worst) = (0, f64::INFINITY);
    for _ in 0..trials {
        let n = rng.random_range(1..=s.n_max.clamp(1, 10));
        let x: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let y: Vec<usize> = (0..n).map(|_| support[rng.random_range(0..support.len())]).collect();
        let delta = rng.random_range(1e-3..=1.0) / (c + 1.0);
        let chk = stein::transition_bound_check(&x, &y, &r, c, delta)?;
        failures += usize::from(!chk.holds);
        worst = worst.min((chk.exact / chk.bound).ln());
    }
    let mut t = Table::new(
        "transition_bound",
        &[
            ("trials", Unit::Count),
            ("failures", Unit::Count),
            ("min_log_ratio", Unit::Ratio),
        ],
    );
    t.push(vec![trials.into(), failures.into(), worst.into()]);
    Ok(outcome(failures == 0, Some(worst), "ratio is exact / bound, in nats", vec![t]))
}

fn run_nasty(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let p = first_null(s)?;
    let k = p.alphabet().size();
    let mut rng = ctx.rng();
    let trials = 200;
    let (mut failures, mut worst) = (0, f64::INFINITY);
    for _ in 0..trials {
        let n = rng.random_range(1..=s.n_max.clamp(1, 12));
        let x: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let chk = stein::nasty_estimate_check(&x, &y, &p)?;
        failures += usize::from(!chk.holds);
        worst = worst.min((chk.rhs / chk.lhs.max(f64::MIN_POSITIVE)).ln());
    }
    let mut t = Table::new(
        "nasty_estimate",
        &[
            ("trials", Unit::Count),
            ("failures", Unit::Count),
            ("min_log_ratio", Unit::Ratio),
        ],
    );
    t.push(vec![trials.into(), failures.into(), worst.into()]);
    Ok(outcome(failures == 0, Some(worst), "ratio is rhs / lhs, in nats", vec![t]))
}

fn run_type_test(ctx: &Ctx) -> Result<CheckOutcome> {
    let s = ctx.scenario;
    let delta = 0.15;
    let test = TypeDistanceTest::new(&s.null_family.single_copy()?, delta)?;
    let mut t = Table::new(
        "type_distance_test",
        &[
            ("n", Unit::Count),
            ("alpha", Unit::Prob),
            ("beta", Unit::Prob),
            ("beta_exponent", Unit::Log),
        ],
    );
    for n in 1..=s.n_max.min(10) {
        let (r, a) = match realize(&s.null_family, n).and_then(|r| Ok((r, realize(&s.alt_family, n)?))) {
            Ok(v) => v,
            Err(e) if e.is_capacity() && n > 1 => break,
            Err(e) => return Err(e),
        };
        let alpha = test.alpha(&r)?;
        let beta = test.beta(&a)?;
        let exponent = if beta > 0.0 {
            -units::log(beta) / n as f64
        } else {
            stein_lab::divergences::INFINITY_SENTINEL
        };
        t.push(vec![n.into(), alpha.into(), beta.into(), exponent.into()]);
    }
    Ok(outcome(true, None, format!("delta = {delta}"), vec![t]))
}

/// Best Neyman-Pearson type II error at level `eps`.
fn np_beta(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let ratio = |x: usize| if q[x] == 0.0 { f64::INFINITY } else { p[x] / q[x] };
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)));
    let (mut need, mut beta) = (1.0 - eps, 0.0);
    for x in order {
        if need <= 0.0 {
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

fn run_lp_cross(ctx: &Ctx) -> Result<CheckOutcome> {
    let k = alphabet_size(ctx.scenario);
    let mut rng = ctx.rng();
    let trials = 100;
    let (mut max_err, mut max_self_err) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let (p, q) = (random_dist(k, &mut rng), random_dist(k, &mut rng));
        let eps = rng.random_range(0.01..0.99);
        let v = d_hyp(&p, &q, eps)?.value;
        max_err = max_err.max((v + units::log(np_beta(p.weights(), q.weights(), eps))).abs());
        let own = d_hyp(&p, &p, eps)?.value;
        max_self_err = max_self_err.max((own + units::log(1.0 - eps)).abs());
    }
    let mut t = Table::new(
        "lp_cross_validation",
        &[
            ("trials", Unit::Count),
            ("max_error", Unit::Log),
            ("max_error_identical", Unit::Log),
        ],
    );
    t.push(vec![trials.into(), max_err.into(), max_self_err.into()]);
    let passed = max_err <= 1e-6 && max_self_err <= 1e-9;
    Ok(outcome(passed, Some(1e-6 - max_err), "", vec![t]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique_and_plentiful() {
        let mut ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
        assert!(ids.len() >= 12);
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), registry().len());
        assert!(find("duality-sandwich").is_some());
        assert!(find("definetti-type-bound").is_some());
    }

    #[test]
    fn np_oracle_hand_case() {
        assert!((np_beta(&[1.0, 0.0], &[0.5, 0.5], 0.5) - 0.25).abs() < 1e-15);
    }
}
