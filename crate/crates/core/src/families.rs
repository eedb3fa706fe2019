//! Hypothesis families realized at a given block length, plus numeric
//! probes of the closure axioms.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Gamma};
use serde::{Deserialize, Serialize};

use crate::alphabet::{
    apply_channel_per_symbol, depolarizing_channel, index_string, joint_tensor, permute, Alphabet, Distribution,
    JointDistribution, ProbabilityVector, StochasticChannel,
};
use crate::divergences::{min_kl_to_hull, Polytope};
use crate::error::{Error, Result};
use crate::types::enumerate_types;
use crate::werner;

/// Realization refuses to build more generators than this.
pub const MAX_GENERATORS: usize = 100_000;

/// Hull membership threshold on the Frank-Wolfe distance (nats).
pub const MEMBERSHIP_DISTANCE: f64 = 1e-6;

/// Largest defect block for which default (vertex) defect generators exist.
pub const MAX_DEFAULT_DEFECT: usize = 3;

/// Number of defect positions allowed at block length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectBudget {
    Constant(usize),
    /// `⌊√n⌋`.
    FloorSqrt,
    /// `table[n-1]`; the last entry repeats beyond the table.
    Table(Vec<usize>),
}

impl DefectBudget {
    /// `φ(n)`, capped at `n` and with `φ(1) = 0`.
    pub fn at(&self, n: usize) -> usize {
        if n <= 1 {
            return 0;
        }
        let raw = match self {
            DefectBudget::Constant(r) => *r,
            DefectBudget::FloorSqrt => (n as f64).sqrt().floor() as usize,
            DefectBudget::Table(t) => t.get(n - 1).or(t.last()).copied().unwrap_or(0),
        };
        raw.min(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    SimpleIid {
        p: Vec<f64>,
    },
    CompositeIid {
        base: Vec<Vec<f64>>,
    },
    ArbitrarilyVarying {
        base: Vec<Vec<f64>>,
    },
    AlmostIid {
        p: Vec<f64>,
        phi: DefectBudget,
        /// `defects[l-1]`: generators of the defect law on `X^l`; defaults
        /// to all point masses.
        #[serde(default)]
        defects: Option<Vec<Vec<Vec<f64>>>>,
    },
    WernerGamma {
        gamma: f64,
    },
    Explicit {
        /// `levels[n-1]`: generators at block length `n`.
        levels: Vec<Vec<Vec<f64>>>,
    },
}

/// A family at one block length, represented by generators of its hull.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSet {
    pub n: usize,
    pub generators: Vec<JointDistribution>,
    /// The set of generators is closed under permutations of positions.
    pub symmetric: bool,
    /// The family at this level is the full hull of the generators.
    pub convex: bool,
}

impl GeneratedSet {
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.generators[0].shared_alphabet()
    }

    pub fn polytope(&self) -> Polytope {
        Polytope::new(self.generators.clone()).expect("generators share one space")
    }

    pub fn weight_vectors(&self) -> Vec<Vec<f64>> {
        self.generators.iter().map(|g| g.weights().to_vec()).collect()
    }

    /// Frank-Wolfe distance (nats) from `q` to the hull.
    pub fn distance_nats(&self, q: &JointDistribution) -> f64 {
        min_kl_to_hull(q.weights(), &self.weight_vectors())
            .value
            .unwrap_or(f64::INFINITY)
    }
}

fn to_dist(w: &[f64]) -> Result<Distribution> {
    Distribution::from_weights(w.to_vec())
}

impl FamilySpec {
    pub fn alphabet_size(&self) -> Result<usize> {
        let k = match self {
            FamilySpec::SimpleIid { p } | FamilySpec::AlmostIid { p, .. } => p.len(),
            FamilySpec::CompositeIid { base } | FamilySpec::ArbitrarilyVarying { base } => {
                base.first().map(Vec::len).unwrap_or(0)
            }
            FamilySpec::WernerGamma { .. } => 2,
            FamilySpec::Explicit { levels } => levels
                .first()
                .and_then(|l| l.first())
                .map(Vec::len)
                .unwrap_or(0),
        };
        if k == 0 {
            return Err(Error::domain("family has no alphabet"));
        }
        Ok(k)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilySpec::SimpleIid { .. } => "simple_iid",
            FamilySpec::CompositeIid { .. } => "composite_iid",
            FamilySpec::ArbitrarilyVarying { .. } => "arbitrarily_varying",
            FamilySpec::AlmostIid { .. } => "almost_iid",
            FamilySpec::WernerGamma { .. } => "werner_gamma",
            FamilySpec::Explicit { .. } => "explicit",
        }
    }

    /// Checks the invariants that do not depend on `n`.
    pub fn validate(&self) -> Result<()> {
        let k = self.alphabet_size()?;
        let check = |w: &Vec<f64>| -> Result<()> {
            if w.len() != k {
                return Err(Error::AlphabetMismatch(w.len(), k));
            }
            to_dist(w).map(|_| ())
        };
        match self {
            FamilySpec::SimpleIid { p } => check(p),
            FamilySpec::CompositeIid { base } | FamilySpec::ArbitrarilyVarying { base } => {
                if base.is_empty() {
                    return Err(Error::domain("base list must be nonempty"));
                }
                base.iter().try_for_each(check)
            }
            FamilySpec::AlmostIid { p, defects, .. } => {
                check(p)?;
                if let Some(levels) = defects {
                    for (l, gens) in levels.iter().enumerate() {
                        if gens.is_empty() {
                            return Err(Error::domain(format!("no defect generators at level {}", l + 1)));
                        }
                        for g in gens {
                            JointDistribution::new(Alphabet::indexed(k), l + 1, g.clone())?;
                        }
                    }
                }
                Ok(())
            }
            FamilySpec::WernerGamma { gamma } => {
                if !(*gamma >= 1.0 && gamma.is_finite()) {
                    return Err(Error::domain(format!("gamma={gamma} must be >= 1")));
                }
                Ok(())
            }
            FamilySpec::Explicit { levels } => {
                for (l, gens) in levels.iter().enumerate() {
                    if gens.is_empty() {
                        return Err(Error::domain(format!("no generators at level {}", l + 1)));
                    }
                    for g in gens {
                        JointDistribution::new(Alphabet::indexed(k), l + 1, g.clone())?;
                    }
                }
                Ok(())
            }
        }
    }

    /// Single-copy generators (the level-1 set, or its hull generators).
    pub fn single_copy(&self) -> Result<Vec<Distribution>> {
        let set = realize(self, 1)?;
        set.generators
            .iter()
            .map(|g| Distribution::with_shared(g.shared_alphabet().clone(), g.weights().to_vec()))
            .collect()
    }

    /// The filtering channel of the family, where one is fixed.
    pub fn filter_channel(&self) -> Result<Option<StochasticChannel>> {
        let k = self.alphabet_size()?;
        Ok(match self {
            FamilySpec::WernerGamma { gamma } => Some(werner::werner_channel(*gamma)?),
            FamilySpec::ArbitrarilyVarying { .. } | FamilySpec::CompositeIid { .. } | FamilySpec::SimpleIid { .. } => {
                Some(StochasticChannel::identity(Alphabet::indexed(k)))
            }
            _ => None,
        })
    }

    /// The reference `R` used for depolarizing-closure probes.
    pub fn depolarizing_reference(&self) -> Result<Distribution> {
        let k = self.alphabet_size()?;
        match self {
            FamilySpec::WernerGamma { .. } => Ok(Distribution::uniform(Alphabet::binary())),
            FamilySpec::SimpleIid { p } | FamilySpec::AlmostIid { p, .. } => to_dist(p),
            FamilySpec::CompositeIid { base } | FamilySpec::ArbitrarilyVarying { base } => {
                let mut w = vec![0.0; k];
                for b in base {
                    for (a, v) in w.iter_mut().zip(b) {
                        *a += v / base.len() as f64;
                    }
                }
                Distribution::normalized(Alphabet::indexed(k), w)
            }
            FamilySpec::Explicit { levels } => {
                let gens = levels.first().ok_or_else(|| Error::domain("no level-1 generators"))?;
                let mut w = vec![0.0; k];
                for g in gens {
                    for (a, v) in w.iter_mut().zip(g) {
                        *a += v / gens.len() as f64;
                    }
                }
                Distribution::normalized(Alphabet::indexed(k), w)
            }
        }
    }

    /// Membership margin at level `n`: nonnegative iff `q` belongs to the
    /// family (within tolerance). Uses the exact predicate for the gamma
    /// family and the Frank-Wolfe distance elsewhere.
    pub fn membership_margin(&self, q: &JointDistribution) -> Result<f64> {
        match self {
            FamilySpec::WernerGamma { gamma } => Ok(werner::werner_margin(q, *gamma)? + werner::MEMBERSHIP_TOL),
            _ => {
                let set = realize(self, q.n())?;
                Ok(MEMBERSHIP_DISTANCE - set.distance_nats(q))
            }
        }
    }
}

fn capacity(what: &'static str, needed: u128) -> Error {
    Error::Capacity {
        what,
        needed,
        limit: MAX_GENERATORS as u128,
    }
}

/// All products `B_{i_1} ⊗ ... ⊗ B_{i_n}`, in lexicographic order of the
/// index string.
fn av_products(base: &[Distribution], n: usize) -> Result<Vec<JointDistribution>> {
    let m = base.len();
    let count = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > MAX_GENERATORS as u128 {
        return Err(capacity("arbitrarily varying generators", count));
    }
    (0..count as usize)
        .map(|idx| {
            let choice = index_string(idx, m, n);
            let factors: Vec<Distribution> = choice.iter().map(|&i| base[i].clone()).collect();
            crate::alphabet::tensor_product(&factors)
        })
        .collect()
}

fn subsets_of_size(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..l).collect();
    if l == 0 {
        return vec![vec![]];
    }
    if l > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = l;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if cur[i] < n - l + i {
                cur[i] += 1;
                for j in i + 1..l {
                    cur[j] = cur[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return out;
        }
    }
}

/// `P^{⊗I^c} ⊗ Q^I`, with `Q` a joint law on the positions of `I` in order.
fn embed_defect(p: &Distribution, positions: &[usize], defect: &[f64], n: usize) -> Result<JointDistribution> {
    let k = p.alphabet().size();
    let len = p.alphabet().strings_len(n)?;
    let mut w = vec![0.0; len];
    for (idx, slot) in w.iter_mut().enumerate() {
        let x = index_string(idx, k, n);
        let mut prob = 1.0;
        let mut defect_idx = 0;
        let mut next = 0;
        for (pos, &s) in x.iter().enumerate() {
            if next < positions.len() && positions[next] == pos {
                defect_idx = defect_idx * k + s;
                next += 1;
            } else {
                prob *= p.get(s);
            }
        }
        *slot = prob * defect[defect_idx];
    }
    JointDistribution::normalized(p.shared_alphabet().clone(), n, w)
}

/// Generators of the family at block length `n`.
pub fn realize(spec: &FamilySpec, n: usize) -> Result<GeneratedSet> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    spec.validate()?;
    let k = spec.alphabet_size()?;
    let alphabet = Arc::new(Alphabet::indexed(k));
    alphabet.strings_len(n)?;
    let shared = |w: &Vec<f64>| Distribution::with_shared(alphabet.clone(), w.clone());
    let (generators, symmetric, convex) = match spec {
        FamilySpec::SimpleIid { p } => (vec![shared(p)?.power(n)?], true, true),
        FamilySpec::CompositeIid { base } => {
            if base.len() > MAX_GENERATORS {
                return Err(capacity("composite i.i.d. generators", base.len() as u128));
            }
            let gens = base
                .iter()
                .map(|b| shared(b)?.power(n))
                .collect::<Result<Vec<_>>>()?;
            (gens, true, base.len() == 1)
        }
        FamilySpec::ArbitrarilyVarying { base } => {
            let b = base.iter().map(shared).collect::<Result<Vec<_>>>()?;
            (av_products(&b, n)?, true, base.len() == 1)
        }
        FamilySpec::AlmostIid { p, phi, defects } => {
            let p = shared(p)?;
            let budget = phi.at(n);
            let mut gens = Vec::new();
            for l in 0..=budget {
                let defect_gens: Vec<Vec<f64>> = if l == 0 {
                    vec![vec![1.0]]
                } else if let Some(levels) = defects {
                    levels
                        .get(l - 1)
                        .cloned()
                        .ok_or_else(|| Error::domain(format!("no defect generators for {l} positions")))?
                } else {
                    if l > MAX_DEFAULT_DEFECT {
                        return Err(Error::Capacity {
                            what: "default defect block length",
                            needed: l as u128,
                            limit: MAX_DEFAULT_DEFECT as u128,
                        });
                    }
                    let len = k.pow(l as u32);
                    (0..len)
                        .map(|i| {
                            let mut e = vec![0.0; len];
                            e[i] = 1.0;
                            e
                        })
                        .collect()
                };
                let subsets = subsets_of_size(n, l);
                let total = gens.len() as u128 + (subsets.len() * defect_gens.len()) as u128;
                if total > MAX_GENERATORS as u128 {
                    return Err(capacity("almost i.i.d. generators", total));
                }
                for positions in &subsets {
                    for dg in &defect_gens {
                        gens.push(embed_defect(&p, positions, dg, n)?);
                    }
                }
            }
            (gens, true, false)
        }
        FamilySpec::WernerGamma { gamma } => (werner::werner_vertices(n, *gamma)?, true, true),
        FamilySpec::Explicit { levels } => {
            let gens = levels
                .get(n - 1)
                .ok_or_else(|| Error::domain(format!("explicit family has no level {n}")))?;
            let gens = gens
                .iter()
                .map(|g| JointDistribution::with_shared(alphabet.clone(), n, g.clone()))
                .collect::<Result<Vec<_>>>()?;
            let symmetric = is_permutation_closed(&gens);
            (gens, symmetric, true)
        }
    };
    Ok(GeneratedSet {
        n,
        generators,
        symmetric,
        convex,
    })
}

/// Whether every adjacent transposition maps the generator list onto itself.
fn is_permutation_closed(gens: &[JointDistribution]) -> bool {
    let n = gens[0].n();
    (0..n.saturating_sub(1)).all(|i| {
        let mut pi: Vec<usize> = (0..n).collect();
        pi.swap(i, i + 1);
        gens.iter().all(|g| {
            let h = permute(g, &pi).expect("valid permutation");
            gens.iter().any(|o| {
                o.weights()
                    .iter()
                    .zip(h.weights())
                    .all(|(a, b)| (a - b).abs() < 1e-12)
            })
        })
    })
}

/// Applies `D_{δ,R}^{⊗n}` to every generator.
pub fn blur_set(set: &GeneratedSet, delta: f64, r: &Distribution) -> Result<GeneratedSet> {
    let w = depolarizing_channel(delta, r)?;
    let generators = set
        .generators
        .iter()
        .map(|g| apply_channel_per_symbol(g, &w))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratedSet {
        n: set.n,
        generators,
        symmetric: set.symmetric,
        convex: set.convex,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    /// Closure under symbol-by-symbol depolarization.
    #[serde(rename = "I")]
    Depolarizing,
    /// `Q^{⊗n} ∈ F_n` for `Q ∈ F_1`.
    #[serde(rename = "II")]
    TensorPowers,
    /// `F_n ⊗ F_m ⊆ F_{n+m}`.
    #[serde(rename = "II+")]
    TensorProducts,
    #[serde(rename = "III")]
    Permutations,
    /// Exact Sanov decay of type-class weights, standing in for type
    /// stability.
    #[serde(rename = "IV-sanov-surrogate")]
    TypeStabilitySanov,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub n: usize,
    pub samples: usize,
    /// Smallest margin observed; negative means a counterexample.
    pub worst_margin: f64,
    pub passed: bool,
    pub counterexamples: Vec<String>,
}

fn random_mixture(set: &GeneratedSet, rng: &mut ChaCha8Rng) -> Result<JointDistribution> {
    let g = Gamma::new(1.0, 1.0).expect("valid gamma");
    let w: Vec<f64> = set.generators.iter().map(|_| g.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let parts: Vec<(f64, &JointDistribution)> =
        w.iter().map(|c| c / total).zip(set.generators.iter()).collect();
    JointDistribution::mixture(&parts)
}

fn fmt_weights(q: &JointDistribution) -> String {
    let parts: Vec<String> = q.weights().iter().map(|w| format!("{w:.6}")).collect();
    format!("[{}]", parts.join(","))
}

/// Numeric probe of one closure axiom at level `n`.
pub fn axiom_probe(spec: &FamilySpec, axiom: Axiom, n: usize, samples: usize, seed: u64) -> Result<AxiomReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = realize(spec, n)?;
    let mut worst = f64::INFINITY;
    let mut bad = Vec::new();
    let mut record = |margin: f64, what: String, worst: &mut f64| {
        *worst = worst.min(margin);
        if margin < 0.0 && bad.len() < 5 {
            bad.push(what);
        }
    };
    let mut taken = 0;
    match axiom {
        Axiom::Depolarizing => {
            let r = spec.depolarizing_reference()?;
            let deltas = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0];
            for _ in 0..samples {
                let q = random_mixture(&set, &mut rng)?;
                for &delta in &deltas {
                    let w = depolarizing_channel(delta, &r)?;
                    let blurred = apply_channel_per_symbol(&q, &w)?;
                    let m = spec.membership_margin(&blurred)?;
                    record(m, format!("delta={delta} Q={}", fmt_weights(&q)), &mut worst);
                    taken += 1;
                }
            }
        }
        Axiom::TensorPowers => {
            for q in spec.single_copy()? {
                let power = q.power(n)?;
                let m = spec.membership_margin(&power)?;
                record(m, format!("Q={q}"), &mut worst);
                taken += 1;
            }
        }
        Axiom::TensorProducts => {
            if n < 2 {
                return Err(Error::domain("tensor-product probe needs n >= 2"));
            }
            for _ in 0..samples {
                let split = rng.random_range(1..n);
                let a = random_mixture(&realize(spec, split)?, &mut rng)?;
                let b = random_mixture(&realize(spec, n - split)?, &mut rng)?;
                let ab = joint_tensor(&a, &b)?;
                let m = spec.membership_margin(&ab)?;
                record(m, format!("split={split} A={} B={}", fmt_weights(&a), fmt_weights(&b)), &mut worst);
                taken += 1;
            }
            // Products of distinct generators are the sharpest witnesses.
            let one = realize(spec, 1)?;
            if one.generators.len() > 1 {
                let (a, b) = (&one.generators[0], &one.generators[1]);
                let mut ab = joint_tensor(a, b)?;
                for _ in 2..n {
                    ab = joint_tensor(&ab, a)?;
                }
                let m = spec.membership_margin(&ab)?;
                record(m, format!("G0⊗G1⊗... = {}", fmt_weights(&ab)), &mut worst);
                taken += 1;
            }
        }
        Axiom::Permutations => {
            for _ in 0..samples {
                let q = random_mixture(&set, &mut rng)?;
                let mut pi: Vec<usize> = (0..n).collect();
                pi.shuffle(&mut rng);
                let m = spec.membership_margin(&permute(&q, &pi)?)?;
                record(m, format!("pi={pi:?} Q={}", fmt_weights(&q)), &mut worst);
                taken += 1;
            }
        }
        Axiom::TypeStabilitySanov => {
            let alphabet = Alphabet::indexed(spec.alphabet_size()?);
            for v in enumerate_types(&alphabet, n)? {
                let chk = crate::stein::sanov_type_bound_check(spec, &v)?;
                record(chk.margin + crate::stein::SANOV_SLACK, format!("type {:?}", v.counts()), &mut worst);
                taken += 1;
            }
        }
    }
    Ok(AxiomReport {
        axiom,
        n,
        samples: taken,
        worst_margin: worst,
        passed: worst >= 0.0,
        counterexamples: bad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn av(base: Vec<Vec<f64>>) -> FamilySpec {
        FamilySpec::ArbitrarilyVarying { base }
    }

    #[test]
    fn composite_simple_case() {
        let spec = FamilySpec::CompositeIid { base: vec![vec![0.3, 0.7]] };
        let set = realize(&spec, 3).unwrap();
        assert_eq!(set.generators.len(), 1);
        let p = Distribution::from_weights(vec![0.3, 0.7]).unwrap();
        assert_eq!(set.generators[0].weights(), p.power(3).unwrap().weights());
    }

    #[test]
    fn av_generator_count() {
        let set = realize(&av(vec![vec![0.5, 0.5], vec![0.9, 0.1]]), 3).unwrap();
        assert_eq!(set.generators.len(), 8);
        let big = av(vec![vec![0.5, 0.5], vec![0.9, 0.1], vec![0.2, 0.8], vec![0.1, 0.9]]);
        assert!(realize(&big, 9).unwrap_err().is_capacity());
    }

    #[test]
    fn almost_iid_level_one_is_p() {
        let spec = FamilySpec::AlmostIid {
            p: vec![0.6, 0.4],
            phi: DefectBudget::Constant(1),
            defects: None,
        };
        let one = realize(&spec, 1).unwrap();
        assert_eq!(one.generators.len(), 1);
        assert_eq!(one.generators[0].weights(), &[0.6, 0.4]);
        let two = realize(&spec, 2).unwrap();
        // iid plus 2 positions × 2 point masses
        assert_eq!(two.generators.len(), 5);
        assert!(two.generators.iter().any(|g| g.weights() == [0.6, 0.4, 0.0, 0.0]));
    }

    #[test]
    fn defect_budget_rules() {
        assert_eq!(DefectBudget::Constant(3).at(1), 0);
        assert_eq!(DefectBudget::Constant(3).at(2), 2);
        assert_eq!(DefectBudget::FloorSqrt.at(10), 3);
        assert_eq!(DefectBudget::Table(vec![5, 1, 2]).at(7), 2);
    }

    #[test]
    fn composite_is_inside_av() {
        let base = vec![vec![0.5, 0.5], vec![0.9, 0.1]];
        let c = realize(&FamilySpec::CompositeIid { base: base.clone() }, 3).unwrap();
        let a = realize(&av(base), 3).unwrap();
        for g in &c.generators {
            assert!(a.generators.contains(g));
        }
    }

    #[test]
    fn blur_examples() {
        let set = realize(&av(vec![vec![0.5, 0.5], vec![0.9, 0.1]]), 2).unwrap();
        let r = Distribution::from_weights(vec![0.2, 0.8]).unwrap();
        assert_eq!(blur_set(&set, 0.0, &r).unwrap().generators, set.generators);
        let full = blur_set(&set, 1.0, &r).unwrap();
        for g in &full.generators {
            let target = r.power(2).unwrap();
            assert!(g.weights().iter().zip(target.weights()).all(|(a, b)| (a - b).abs() < 1e-12));
        }
        // Blurring an av set equals the av set of the blurred base.
        let delta = 0.3;
        let blurred = blur_set(&set, delta, &r).unwrap();
        let w = depolarizing_channel(delta, &r).unwrap();
        let base2: Vec<Vec<f64>> = [vec![0.5, 0.5], vec![0.9, 0.1]]
            .iter()
            .map(|b| w.apply(&Distribution::from_weights(b.clone()).unwrap()).unwrap().weights().to_vec())
            .collect();
        let direct = realize(&av(base2), 2).unwrap();
        for (a, b) in blurred.generators.iter().zip(&direct.generators) {
            assert!(a.weights().iter().zip(b.weights()).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn werner_probes() {
        let spec = FamilySpec::WernerGamma { gamma: 2.0 };
        for axiom in [Axiom::Depolarizing, Axiom::TensorPowers, Axiom::Permutations] {
            let rep = axiom_probe(&spec, axiom, 2, 20, 7).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn composite_fails_tensor_products() {
        let spec = FamilySpec::CompositeIid { base: vec![vec![0.9, 0.1], vec![0.2, 0.8]] };
        let rep = axiom_probe(&spec, Axiom::TensorProducts, 2, 5, 1).unwrap();
        assert!(!rep.passed);
        assert!(!rep.counterexamples.is_empty());
        let av_rep = axiom_probe(&av(vec![vec![0.9, 0.1], vec![0.2, 0.8]]), Axiom::TensorProducts, 2, 5, 1).unwrap();
        assert!(av_rep.passed, "{av_rep:?}");
    }

    #[test]
    fn av_passes_permutations() {
        let spec = av(vec![vec![0.9, 0.1], vec![0.2, 0.8]]);
        assert!(axiom_probe(&spec, Axiom::Permutations, 3, 10, 3).unwrap().passed);
        assert!(axiom_probe(&spec, Axiom::Depolarizing, 2, 5, 3).unwrap().passed);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = FamilySpec::AlmostIid {
            p: vec![0.5, 0.5],
            phi: DefectBudget::FloorSqrt,
            defects: None,
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"kind\":\"almost_iid\""));
        assert_eq!(serde_json::from_str::<FamilySpec>(&s).unwrap(), spec);
        let w: FamilySpec = serde_json::from_str(r#"{"kind":"werner_gamma","gamma":2.0}"#).unwrap();
        assert_eq!(w, FamilySpec::WernerGamma { gamma: 2.0 });
    }
}
