//! Finite alphabets, probability vectors on `X` and `X^n`, and channels.
//!
//! Strings `x^n` are stored as symbol indices; the joint weight vector is
//! indexed lexicographically with the first position most significant, so
//! `"01"` over `{0,1}` is index 1 and `"10"` is index 2.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::units;

/// Tolerance on the sum of weights accepted at construction.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

/// Largest dense joint distribution we agree to build (`|X|^n` entries).
pub const MAX_JOINT_ENTRIES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::domain("alphabet must be nonempty"));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::domain(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// The alphabet `{0, 1, ..., size-1}`.
    pub fn indexed(size: usize) -> Self {
        assert!(size > 0, "alphabet must be nonempty");
        Self {
            symbols: (0..size).map(|i| i.to_string()).collect(),
        }
    }

    pub fn binary() -> Self {
        Self::indexed(2)
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Parses a string of single-character symbols (e.g. `"aab"`).
    pub fn parse_string(&self, s: &str) -> Result<Vec<usize>> {
        s.chars()
            .map(|c| {
                self.index_of(c.encode_utf8(&mut [0; 4]))
                    .ok_or_else(|| Error::domain(format!("symbol {c:?} not in alphabet")))
            })
            .collect()
    }

    pub fn format_string(&self, x: &[usize]) -> String {
        x.iter().map(|&i| self.symbols[i].as_str()).collect()
    }

    /// Number of strings of length `n`, or a capacity error beyond the dense cap.
    pub fn strings_len(&self, n: usize) -> Result<usize> {
        let mut total: usize = 1;
        for _ in 0..n {
            total = total
                .checked_mul(self.size())
                .filter(|&t| t <= MAX_JOINT_ENTRIES)
                .ok_or(Error::Capacity {
                    what: "joint distribution entries",
                    needed: (self.size() as u128).saturating_pow(n as u32),
                    limit: MAX_JOINT_ENTRIES as u128,
                })?;
        }
        Ok(total)
    }
}

/// Lexicographic index of a string over an alphabet of size `k`.
pub fn string_index(x: &[usize], k: usize) -> usize {
    x.iter().fold(0, |acc, &s| acc * k + s)
}

/// Inverse of [`string_index`].
pub fn index_string(mut idx: usize, k: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = idx % k;
        idx /= k;
    }
    out
}

/// Common view of single-symbol and joint distributions.
pub trait ProbabilityVector {
    fn alphabet(&self) -> &Alphabet;
    fn level(&self) -> usize;
    fn weights(&self) -> &[f64];

    fn support(&self) -> Vec<usize> {
        self.weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidDistribution(format!("weight {i} is {w}")));
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > CONSTRUCTION_TOL {
        return Err(Error::InvalidDistribution(format!("weights sum to {sum}")));
    }
    Ok(())
}

fn renormalize(mut weights: Vec<f64>) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    if sum != 1.0 {
        weights.iter_mut().for_each(|w| *w /= sum);
    }
    weights
}

/// Probability distribution on a single symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    alphabet: Arc<Alphabet>,
    weights: Vec<f64>,
}

impl Distribution {
    pub fn new(alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        Self::with_shared(Arc::new(alphabet), weights)
    }

    pub fn with_shared(alphabet: Arc<Alphabet>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != alphabet.size() {
            return Err(Error::AlphabetMismatch(weights.len(), alphabet.size()));
        }
        check_weights(&weights)?;
        Ok(Self {
            alphabet,
            weights: renormalize(weights),
        })
    }

    /// Distribution on `{0,..,k-1}` from its weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::domain("empty weight vector"));
        }
        Self::new(Alphabet::indexed(k), weights)
    }

    /// Rescales any nonnegative, not-all-zero vector to a distribution.
    pub fn normalized(alphabet: Alphabet, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("cannot normalize".into()));
        }
        Self::new(alphabet, weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn point_mass(alphabet: Alphabet, symbol: usize) -> Result<Self> {
        if symbol >= alphabet.size() {
            return Err(Error::domain("symbol out of range"));
        }
        let mut w = vec![0.0; alphabet.size()];
        w[symbol] = 1.0;
        Self::new(alphabet, w)
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.size();
        Self {
            alphabet: Arc::new(alphabet),
            weights: vec![1.0 / k as f64; k],
        }
    }

    pub fn shared_alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn get(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn into_joint(self) -> JointDistribution {
        JointDistribution {
            alphabet: self.alphabet,
            n: 1,
            weights: self.weights,
        }
    }

    /// `P^{⊗n}`.
    pub fn power(&self, n: usize) -> Result<JointDistribution> {
        tensor_product(&vec![self.clone(); n])
    }
}

impl ProbabilityVector for Distribution {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
    fn level(&self) -> usize {
        1
    }
    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

/// Dense probability vector on `X^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    alphabet: Arc<Alphabet>,
    n: usize,
    weights: Vec<f64>,
}

impl JointDistribution {
    pub fn new(alphabet: Alphabet, n: usize, weights: Vec<f64>) -> Result<Self> {
        Self::with_shared(Arc::new(alphabet), n, weights)
    }

    pub fn with_shared(alphabet: Arc<Alphabet>, n: usize, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("level n must be positive"));
        }
        let len = alphabet.strings_len(n)?;
        if weights.len() != len {
            return Err(Error::domain(format!(
                "expected {len} weights for n={n}, got {}",
                weights.len()
            )));
        }
        check_weights(&weights)?;
        Ok(Self {
            alphabet,
            n,
            weights: renormalize(weights),
        })
    }

    /// Rescales a nonnegative vector to a joint distribution.
    pub fn normalized(alphabet: Arc<Alphabet>, n: usize, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("cannot normalize".into()));
        }
        Self::with_shared(alphabet, n, weights.into_iter().map(|w| w / sum).collect())
    }

    /// Uniform distribution over a set of strings (given as indices).
    pub fn uniform_on(alphabet: Arc<Alphabet>, n: usize, indices: &[usize]) -> Result<Self> {
        let len = alphabet.strings_len(n)?;
        let mut w = vec![0.0; len];
        for &i in indices {
            if i >= len {
                return Err(Error::domain("string index out of range"));
            }
            w[i] += 1.0;
        }
        Self::normalized(alphabet, n, w)
    }

    pub fn shared_alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.weights[idx]
    }

    pub fn prob_of(&self, x: &[usize]) -> f64 {
        self.weights[string_index(x, self.alphabet.size())]
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Total mass on a set of string indices.
    pub fn mass_of(&self, indices: impl IntoIterator<Item = usize>) -> f64 {
        indices.into_iter().map(|i| self.weights[i]).sum()
    }

    /// Convex combination `Σ c_i G_i` of joint distributions at one level.
    pub fn mixture(parts: &[(f64, &JointDistribution)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::domain("empty mixture"))?
            .1;
        let mut w = vec![0.0; first.weights.len()];
        for (c, g) in parts {
            ensure_same_space(first, *g)?;
            for (a, b) in w.iter_mut().zip(&g.weights) {
                *a += c * b;
            }
        }
        Self::normalized(first.alphabet.clone(), first.n, w)
    }

    /// Whether `Q∘τ = Q` for every adjacent transposition `τ`, within `tol`.
    pub fn is_permutation_symmetric(&self, tol: f64) -> bool {
        let k = self.alphabet.size();
        (0..self.n.saturating_sub(1)).all(|i| {
            self.weights.iter().enumerate().all(|(idx, &w)| {
                let mut x = index_string(idx, k, self.n);
                x.swap(i, i + 1);
                (w - self.weights[string_index(&x, k)]).abs() <= tol
            })
        })
    }
}

impl ProbabilityVector for JointDistribution {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
    fn level(&self) -> usize {
        self.n
    }
    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl From<Distribution> for JointDistribution {
    fn from(p: Distribution) -> Self {
        p.into_joint()
    }
}

pub(crate) fn ensure_same_space<P: ProbabilityVector + ?Sized, Q: ProbabilityVector + ?Sized>(
    p: &P,
    q: &Q,
) -> Result<()> {
    if p.alphabet() != q.alphabet() {
        return Err(Error::AlphabetMismatch(p.alphabet().size(), q.alphabet().size()));
    }
    if p.level() != q.level() {
        return Err(Error::LevelMismatch(p.level(), q.level()));
    }
    Ok(())
}

/// `P_1 ⊗ ... ⊗ P_n`.
pub fn tensor_product(factors: &[Distribution]) -> Result<JointDistribution> {
    let first = factors
        .first()
        .ok_or_else(|| Error::domain("tensor product of an empty list"))?;
    let alphabet = first.alphabet.clone();
    alphabet.strings_len(factors.len())?;
    let mut weights = vec![1.0];
    for f in factors {
        if *f.alphabet != *alphabet {
            return Err(Error::AlphabetMismatch(f.alphabet.size(), alphabet.size()));
        }
        let mut next = Vec::with_capacity(weights.len() * f.weights.len());
        for &w in &weights {
            next.extend(f.weights.iter().map(|&v| w * v));
        }
        weights = next;
    }
    Ok(JointDistribution {
        alphabet,
        n: factors.len(),
        weights: renormalize(weights),
    })
}

/// `Q_n ⊗ Q'_m` for joint distributions on the same alphabet.
pub fn joint_tensor(a: &JointDistribution, b: &JointDistribution) -> Result<JointDistribution> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch(a.alphabet.size(), b.alphabet.size()));
    }
    let n = a.n + b.n;
    a.alphabet.strings_len(n)?;
    let mut weights = Vec::with_capacity(a.weights.len() * b.weights.len());
    for &w in &a.weights {
        weights.extend(b.weights.iter().map(|&v| w * v));
    }
    Ok(JointDistribution {
        alphabet: a.alphabet.clone(),
        n,
        weights: renormalize(weights),
    })
}

/// Marginal on the (0-based) positions in `keep`, in the order given.
pub fn marginalize(joint: &JointDistribution, keep: &[usize]) -> Result<JointDistribution> {
    if keep.is_empty() {
        return Err(Error::domain("marginal must keep at least one position"));
    }
    for (i, &p) in keep.iter().enumerate() {
        if p >= joint.n || keep[..i].contains(&p) {
            return Err(Error::domain(format!("invalid kept position {p}")));
        }
    }
    let k = joint.alphabet.size();
    let len = joint.alphabet.strings_len(keep.len())?;
    let mut weights = vec![0.0; len];
    for (idx, &w) in joint.weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let x = index_string(idx, k, joint.n);
        let kept = keep.iter().fold(0, |acc, &p| acc * k + x[p]);
        weights[kept] += w;
    }
    Ok(JointDistribution {
        alphabet: joint.alphabet.clone(),
        n: keep.len(),
        weights: renormalize(weights),
    })
}

/// `(Q∘π)(x_1..x_n) = Q(x_{π(1)}, .., x_{π(n)})`, with `pi` 0-based.
pub fn permute(joint: &JointDistribution, pi: &[usize]) -> Result<JointDistribution> {
    let n = joint.n;
    if pi.len() != n {
        return Err(Error::domain("permutation length differs from n"));
    }
    let mut seen = vec![false; n];
    for &p in pi {
        if p >= n || seen[p] {
            return Err(Error::domain("not a permutation"));
        }
        seen[p] = true;
    }
    let k = joint.alphabet.size();
    let mut weights = vec![0.0; joint.weights.len()];
    let mut y = vec![0; n];
    for (idx, w) in weights.iter_mut().enumerate() {
        let x = index_string(idx, k, n);
        for (slot, &p) in y.iter_mut().zip(pi) {
            *slot = x[p];
        }
        *w = joint.weights[string_index(&y, k)];
    }
    Ok(JointDistribution {
        alphabet: joint.alphabet.clone(),
        n,
        weights,
    })
}

pub fn inverse_permutation(pi: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; pi.len()];
    for (i, &p) in pi.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Conditional probability matrix `W(y|x)`, stored row-major by input.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticChannel {
    input: Arc<Alphabet>,
    output: Arc<Alphabet>,
    // entry x * |Y| + y holds W(y|x)
    matrix: Vec<f64>,
}

impl StochasticChannel {
    /// `rows[x][y] = W(y|x)`; every row must sum to one.
    pub fn new(input: Alphabet, output: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != input.size() {
            return Err(Error::AlphabetMismatch(rows.len(), input.size()));
        }
        let mut matrix = Vec::with_capacity(input.size() * output.size());
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != output.size() {
                return Err(Error::AlphabetMismatch(row.len(), output.size()));
            }
            check_weights(&row).map_err(|e| {
                Error::InvalidDistribution(format!("channel row for input {x}: {e}"))
            })?;
            matrix.extend(renormalize(row));
        }
        Ok(Self {
            input: Arc::new(input),
            output: Arc::new(output),
            matrix,
        })
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let k = alphabet.size();
        let a = Arc::new(alphabet);
        let mut matrix = vec![0.0; k * k];
        for x in 0..k {
            matrix[x * k + x] = 1.0;
        }
        Self {
            input: a.clone(),
            output: a,
            matrix,
        }
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.matrix[x * self.output.size() + y]
    }

    pub fn apply(&self, p: &Distribution) -> Result<Distribution> {
        if *p.alphabet != *self.input {
            return Err(Error::AlphabetMismatch(p.alphabet.size(), self.input.size()));
        }
        let ny = self.output.size();
        let mut out = vec![0.0; ny];
        for (x, &px) in p.weights.iter().enumerate() {
            for (y, o) in out.iter_mut().enumerate() {
                *o += px * self.matrix[x * ny + y];
            }
        }
        Ok(Distribution {
            alphabet: self.output.clone(),
            weights: renormalize(out),
        })
    }

    /// Whether the matrix has full rank `|X|`.
    pub fn is_informationally_complete(&self) -> bool {
        let (nx, ny) = (self.input.size(), self.output.size());
        let mut m: Vec<Vec<f64>> = (0..nx)
            .map(|x| self.matrix[x * ny..(x + 1) * ny].to_vec())
            .collect();
        let mut rank = 0;
        for col in 0..ny {
            let Some(piv) = (rank..nx).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            else {
                break;
            };
            if m[piv][col].abs() < 1e-12 {
                continue;
            }
            m.swap(rank, piv);
            for r in 0..nx {
                if r != rank {
                    let f = m[r][col] / m[rank][col];
                    for c in 0..ny {
                        m[r][c] -= f * m[rank][c];
                    }
                }
            }
            rank += 1;
            if rank == nx {
                break;
            }
        }
        rank == nx
    }
}

/// The depolarizing map: keep the symbol with probability `1-δ`, otherwise
/// redraw it from `R`.
pub fn depolarizing_channel(delta: f64, r: &Distribution) -> Result<StochasticChannel> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::domain(format!("delta={delta} outside [0,1]")));
    }
    let k = r.alphabet.size();
    let mut matrix = Vec::with_capacity(k * k);
    for x in 0..k {
        for y in 0..k {
            let stay = if x == y { 1.0 - delta } else { 0.0 };
            matrix.push(stay + delta * r.weights[y]);
        }
    }
    Ok(StochasticChannel {
        input: r.alphabet.clone(),
        output: r.alphabet.clone(),
        matrix,
    })
}

/// `W^{⊗n}` applied axis by axis.
pub fn apply_channel_per_symbol(
    joint: &JointDistribution,
    w: &StochasticChannel,
) -> Result<JointDistribution> {
    if *joint.alphabet != *w.input {
        return Err(Error::AlphabetMismatch(joint.alphabet.size(), w.input.size()));
    }
    let (nx, ny) = (w.input.size(), w.output.size());
    w.output.strings_len(joint.n)?;
    let mut data = joint.weights.clone();
    // After processing `axis` positions, layout is (Y^axis, X^(n-axis)).
    for axis in 0..joint.n {
        let outer = ny.pow(axis as u32);
        let inner = nx.pow((joint.n - axis - 1) as u32);
        let mut next = vec![0.0; outer * ny * inner];
        for o in 0..outer {
            for x in 0..nx {
                let src = &data[(o * nx + x) * inner..(o * nx + x + 1) * inner];
                for y in 0..ny {
                    let wyx = w.matrix[x * ny + y];
                    if wyx == 0.0 {
                        continue;
                    }
                    let dst = &mut next[(o * ny + y) * inner..(o * ny + y + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += wyx * s;
                    }
                }
            }
        }
        data = next;
    }
    Ok(JointDistribution {
        alphabet: w.output.clone(),
        n: joint.n,
        weights: renormalize(data),
    })
}

/// Total variation distance `½ Σ |p - q|`.
pub fn tv_distance<P: ProbabilityVector + ?Sized, Q: ProbabilityVector + ?Sized>(
    p: &P,
    q: &Q,
) -> Result<f64> {
    ensure_same_space(p, q)?;
    Ok(tv_weights(p.weights(), q.weights()))
}

pub(crate) fn tv_weights(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Shannon entropy in the active log base, with `0 log 0 = 0`.
pub fn entropy<P: ProbabilityVector + ?Sized>(p: &P) -> f64 {
    entropy_weights(p.weights())
}

pub(crate) fn entropy_weights(w: &[f64]) -> f64 {
    -w.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * units::log(v))
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(w: &[f64]) -> Distribution {
        Distribution::from_weights(w.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn tensor_product_examples() {
        assert!(close(tensor_product(&[d(&[1.0, 0.0])]).unwrap().weights(), &[1.0, 0.0]));
        let u = tensor_product(&[d(&[0.5, 0.5]), d(&[0.5, 0.5])]).unwrap();
        assert!(close(u.weights(), &[0.25; 4]));
        let t = tensor_product(&[d(&[1.0, 0.0]), d(&[0.25, 0.75])]).unwrap();
        assert!(close(t.weights(), &[0.25, 0.75, 0.0, 0.0]));
    }

    #[test]
    fn tensor_product_rejects_mixed_alphabets() {
        let err = tensor_product(&[d(&[0.5, 0.5]), d(&[0.2, 0.3, 0.5])]).unwrap_err();
        assert!(matches!(err, Error::AlphabetMismatch(..)));
        assert!(tensor_product(&[]).is_err());
    }

    #[test]
    fn marginal_examples() {
        let (p, q) = (d(&[0.3, 0.7]), d(&[0.6, 0.4]));
        let pq = tensor_product(&[p.clone(), q.clone()]).unwrap();
        assert!(close(marginalize(&pq, &[0]).unwrap().weights(), p.weights()));
        assert!(close(marginalize(&pq, &[1]).unwrap().weights(), q.weights()));
        let j = JointDistribution::new(Alphabet::binary(), 2, vec![0.25, 0.75, 0.0, 0.0]).unwrap();
        assert!(close(marginalize(&j, &[1]).unwrap().weights(), &[0.25, 0.75]));
        assert!(marginalize(&j, &[]).is_err());
        let sym = JointDistribution::new(Alphabet::binary(), 2, vec![0.1, 0.2, 0.2, 0.5]).unwrap();
        assert!(close(
            marginalize(&sym, &[0]).unwrap().weights(),
            marginalize(&sym, &[1]).unwrap().weights()
        ));
    }

    #[test]
    fn permute_examples() {
        let j = JointDistribution::new(Alphabet::binary(), 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(permute(&j, &[0, 1]).unwrap(), j);
        assert!(close(permute(&j, &[1, 0]).unwrap().weights(), &[0.1, 0.3, 0.2, 0.4]));
        let (p, q) = (d(&[0.3, 0.7]), d(&[0.6, 0.4]));
        let pq = tensor_product(&[p.clone(), q.clone()]).unwrap();
        let qp = tensor_product(&[q, p]).unwrap();
        assert!(close(permute(&pq, &[1, 0]).unwrap().weights(), qp.weights()));
        assert!(permute(&j, &[0, 0]).is_err());
    }

    #[test]
    fn permutation_inverse_round_trips() {
        let w: Vec<f64> = (1..=8).map(|i| i as f64 / 36.0).collect();
        let j = JointDistribution::new(Alphabet::binary(), 3, w).unwrap();
        let pi = [2, 0, 1];
        let back = permute(&permute(&j, &pi).unwrap(), &inverse_permutation(&pi)).unwrap();
        assert!(close(back.weights(), j.weights()));
    }

    #[test]
    fn depolarizing_examples() {
        let r = d(&[0.5, 0.5]);
        let p = d(&[1.0, 0.0]);
        let id = depolarizing_channel(0.0, &r).unwrap();
        assert!(close(id.apply(&p).unwrap().weights(), p.weights()));
        let full = depolarizing_channel(1.0, &r).unwrap();
        assert!(close(full.apply(&p).unwrap().weights(), r.weights()));
        let half = depolarizing_channel(0.5, &r).unwrap();
        assert!(close(half.apply(&p).unwrap().weights(), &[0.75, 0.25]));
        assert!(depolarizing_channel(1.5, &r).is_err());
        assert!(depolarizing_channel(-0.1, &r).is_err());
    }

    #[test]
    fn per_symbol_channel_examples() {
        let (p, q) = (d(&[0.3, 0.7]), d(&[0.6, 0.4]));
        let pq = tensor_product(&[p.clone(), q.clone()]).unwrap();
        let id = StochasticChannel::identity(Alphabet::binary());
        assert!(close(apply_channel_per_symbol(&pq, &id).unwrap().weights(), pq.weights()));

        let w = StochasticChannel::new(
            Alphabet::binary(),
            Alphabet::indexed(3),
            vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3]],
        )
        .unwrap();
        let lhs = apply_channel_per_symbol(&pq, &w).unwrap();
        let rhs = tensor_product(&[w.apply(&p).unwrap(), w.apply(&q).unwrap()]).unwrap();
        assert!(close(lhs.weights(), rhs.weights()));

        let r = d(&[0.2, 0.8]);
        let full = depolarizing_channel(1.0, &r).unwrap();
        let j = JointDistribution::new(Alphabet::binary(), 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let out = apply_channel_per_symbol(&j, &full).unwrap();
        assert!(close(out.weights(), r.power(2).unwrap().weights()));
    }

    #[test]
    fn tv_and_entropy_examples() {
        let p = d(&[0.5, 0.5]);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(tv_distance(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 1.0);
        assert!((tv_distance(&p, &d(&[0.25, 0.75])).unwrap() - 0.25).abs() < 1e-15);
        assert!(tv_distance(&p, &p.power(2).unwrap()).is_err());

        assert_eq!(entropy(&d(&[1.0, 0.0, 0.0])), 0.0);
        let u = Distribution::uniform(Alphabet::indexed(3));
        assert!((entropy(&u) - units::log(3.0)).abs() < 1e-12);
        let h = -(0.25 * units::log(0.25) + 0.75 * units::log(0.75));
        assert!((entropy(&d(&[0.25, 0.75])) - h).abs() < 1e-15);
    }

    #[test]
    fn construction_guards() {
        assert!(Distribution::from_weights(vec![0.5, 0.6]).is_err());
        assert!(Distribution::from_weights(vec![-0.1, 1.1]).is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
        let err = Alphabet::binary().strings_len(25).unwrap_err();
        assert!(err.is_capacity());
        assert!(Alphabet::binary().strings_len(24).is_ok());
    }

    #[test]
    fn string_indexing_is_lexicographic() {
        let a = Alphabet::new(["a", "b"]).unwrap();
        let x = a.parse_string("aab").unwrap();
        assert_eq!(x, vec![0, 0, 1]);
        assert_eq!(string_index(&x, 2), 1);
        assert_eq!(index_string(6, 2, 3), vec![1, 1, 0]);
        assert_eq!(a.format_string(&index_string(6, 2, 3)), "bba");
        assert!(a.parse_string("abc").is_err());
    }

    #[test]
    fn informational_completeness() {
        assert!(StochasticChannel::identity(Alphabet::indexed(3)).is_informationally_complete());
        let r = d(&[0.5, 0.5]);
        assert!(!depolarizing_channel(1.0, &r).unwrap().is_informationally_complete());
    }
}
