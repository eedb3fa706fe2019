//! Method of types: count vectors, type classes, and Hamming balls.

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::alphabet::{index_string, string_index, Alphabet, Distribution, ProbabilityVector};
use crate::error::{Error, Result};

/// Largest type class [`enumerate_type_class`] will materialize.
pub const MAX_TYPE_CLASS: u64 = 10_000_000;

/// An `n`-type, stored as symbol counts summing to `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeVector {
    alphabet: Arc<Alphabet>,
    counts: Vec<usize>,
    n: usize,
}

impl TypeVector {
    pub fn new(alphabet: Arc<Alphabet>, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != alphabet.size() {
            return Err(Error::AlphabetMismatch(counts.len(), alphabet.size()));
        }
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(Error::domain("a type needs n >= 1"));
        }
        Ok(Self { alphabet, counts, n })
    }

    /// Type over `{0,..,k-1}` from raw counts.
    pub fn from_counts(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::domain("empty count vector"));
        }
        Self::new(Arc::new(Alphabet::indexed(counts.len())), counts)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `V(x) = k(x)/n`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&k| k as f64 / self.n as f64)
            .collect()
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::with_shared(self.alphabet.clone(), self.frequencies())
            .expect("type frequencies form a distribution")
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.counts.len()).filter(|&i| self.counts[i] > 0).collect()
    }
}

/// Sorted set of strings in `X^n`, by lexicographic index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringSet {
    alphabet: Arc<Alphabet>,
    n: usize,
    indices: Vec<usize>,
}

impl StringSet {
    pub fn new(alphabet: Arc<Alphabet>, n: usize, mut indices: Vec<usize>) -> Result<Self> {
        let len = alphabet.strings_len(n)?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= len) {
            return Err(Error::domain(format!("string index {bad} out of range")));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Self { alphabet, n, indices })
    }

    pub fn from_strings(alphabet: Arc<Alphabet>, n: usize, strings: &[Vec<usize>]) -> Result<Self> {
        let k = alphabet.size();
        for s in strings {
            if s.len() != n || s.iter().any(|&c| c >= k) {
                return Err(Error::domain("string does not belong to X^n"));
            }
        }
        let idx = strings.iter().map(|s| string_index(s, k)).collect();
        Self::new(alphabet, n, idx)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.indices.binary_search(&idx).is_ok()
    }

    pub fn strings(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let k = self.alphabet.size();
        self.indices.iter().map(move |&i| index_string(i, k, self.n))
    }
}

/// All `n`-types over the alphabet, in decreasing lexicographic order of
/// count vectors (`(n,0,..)` first).
pub fn enumerate_types(alphabet: &Alphabet, n: usize) -> Result<Vec<TypeVector>> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let shared = Arc::new(alphabet.clone());
    Ok(count_vectors(alphabet.size(), n)
        .into_iter()
        .map(|counts| TypeVector {
            alphabet: shared.clone(),
            counts,
            n,
        })
        .collect())
}

/// Count vectors of length `k` summing to `n`, decreasing lexicographically.
pub fn count_vectors(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == k {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(k, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, n, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Number of `n`-types, `C(n+k-1, k-1)`.
pub fn number_of_types(k: usize, n: usize) -> BigUint {
    binomial(n + k - 1, k - 1)
}

pub fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::from(0u32);
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn type_of_string(alphabet: &Arc<Alphabet>, x: &[usize]) -> Result<TypeVector> {
    let mut counts = vec![0; alphabet.size()];
    for &s in x {
        *counts
            .get_mut(s)
            .ok_or_else(|| Error::domain(format!("symbol index {s} not in alphabet")))? += 1;
    }
    TypeVector::new(alphabet.clone(), counts)
}

/// Type of a string given by its labels, e.g. `"aab"`.
pub fn type_of_labels(alphabet: &Arc<Alphabet>, s: &str) -> Result<TypeVector> {
    type_of_string(alphabet, &alphabet.parse_string(s)?)
}

/// `|T_{n,V}| = n! / Π k(x)!`, exactly.
pub fn type_class_size(v: &TypeVector) -> BigUint {
    let denom = v
        .counts
        .iter()
        .fold(BigUint::one(), |acc, &k| acc * factorial(k));
    factorial(v.n) / denom
}

pub fn type_class_size_f64(v: &TypeVector) -> f64 {
    type_class_size(v).to_f64().unwrap_or(f64::INFINITY)
}

/// Every string of type `V`, in lexicographic order.
pub fn enumerate_type_class(v: &TypeVector) -> Result<StringSet> {
    let size = type_class_size(v);
    if size > BigUint::from(MAX_TYPE_CLASS) {
        return Err(Error::Capacity {
            what: "type class members",
            needed: size.to_u128().unwrap_or(u128::MAX),
            limit: MAX_TYPE_CLASS as u128,
        });
    }
    let k = v.alphabet.size();
    let mut out = Vec::new();
    let mut left = v.counts.clone();
    fn rec(pos: usize, n: usize, k: usize, left: &mut [usize], acc: usize, out: &mut Vec<usize>) {
        if pos == n {
            out.push(acc);
            return;
        }
        for s in 0..k {
            if left[s] > 0 {
                left[s] -= 1;
                rec(pos + 1, n, k, left, acc * k + s, out);
                left[s] += 1;
            }
        }
    }
    rec(0, v.n, k, &mut left, 0, &mut out);
    debug_assert_eq!(out.len() as u64, size.to_u64().unwrap());
    StringSet::new(v.alphabet.clone(), v.n, out)
}

/// `P^{⊗n}(x^n)`.
pub fn string_probability(p: &Distribution, x: &[usize]) -> f64 {
    x.iter().map(|&s| p.get(s)).product()
}

/// `P^{⊗n}(T_{n,V}) = |T_{n,V}| Π P(x)^{k(x)}`.
pub fn iid_weight_of_type_class(p: &Distribution, v: &TypeVector) -> Result<f64> {
    if p.alphabet() != &**v.alphabet() {
        return Err(Error::AlphabetMismatch(p.alphabet().size(), v.alphabet().size()));
    }
    let mut prod = 1.0;
    for (x, &k) in v.counts.iter().enumerate() {
        if k > 0 {
            if p.get(x) == 0.0 {
                return Ok(0.0);
            }
            prod *= p.get(x).powi(k as i32);
        }
    }
    Ok(type_class_size_f64(v) * prod)
}

pub fn hamming_distance(x: &[usize], y: &[usize]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "strings of different length {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.iter().zip(y).filter(|(a, b)| a != b).count())
}

/// Indices of the Hamming ball `B_d(Y, K)`, by multi-source BFS.
pub fn hamming_ball(y: &StringSet, radius: usize) -> Result<StringSet> {
    if y.is_empty() {
        return Err(Error::domain("empty string set"));
    }
    let k = y.alphabet.size();
    let n = y.n;
    let len = y.alphabet.strings_len(n)?;
    if radius >= n {
        return StringSet::new(y.alphabet.clone(), n, (0..len).collect());
    }
    let mut dist = vec![usize::MAX; len];
    let mut queue = VecDeque::new();
    for &i in &y.indices {
        dist[i] = 0;
        queue.push_back(i);
    }
    let pow: Vec<usize> = (0..n).map(|p| k.pow((n - 1 - p) as u32)).collect();
    while let Some(i) = queue.pop_front() {
        let d = dist[i];
        if d == radius {
            continue;
        }
        for &w in &pow {
            let digit = (i / w) % k;
            for s in 0..k {
                if s == digit {
                    continue;
                }
                let j = i - digit * w + s * w;
                if dist[j] == usize::MAX {
                    dist[j] = d + 1;
                    queue.push_back(j);
                }
            }
        }
    }
    let members = (0..len).filter(|&i| dist[i] != usize::MAX).collect();
    StringSet::new(y.alphabet.clone(), n, members)
}

/// `P^{⊗n}(B_d(Y, K))`.
pub fn hamming_ball_weight(y: &StringSet, radius: usize, p: &Distribution) -> Result<f64> {
    if p.alphabet() != &**y.alphabet() {
        return Err(Error::AlphabetMismatch(p.alphabet().size(), y.alphabet().size()));
    }
    let ball = hamming_ball(y, radius)?;
    Ok(set_weight(&ball, p))
}

/// `P^{⊗n}(Y)`.
pub fn set_weight(y: &StringSet, p: &Distribution) -> f64 {
    y.strings().map(|x| string_probability(p, &x)).sum()
}

/// `½‖V − P‖₁`.
pub fn type_tv_distance(v: &TypeVector, p: &Distribution) -> Result<f64> {
    if p.alphabet() != &**v.alphabet() {
        return Err(Error::AlphabetMismatch(p.alphabet().size(), v.alphabet().size()));
    }
    Ok(crate::alphabet::tv_weights(&v.frequencies(), p.weights()))
}

/// Returns `(½‖V_x − V_y‖₁, d(x,y)/n)`; the first never exceeds the second.
pub fn type_distance_vs_hamming(alphabet: &Arc<Alphabet>, x: &[usize], y: &[usize]) -> Result<(f64, f64)> {
    let d = hamming_distance(x, y)?;
    let (vx, vy) = (type_of_string(alphabet, x)?, type_of_string(alphabet, y)?);
    let tv = crate::alphabet::tv_weights(&vx.frequencies(), &vy.frequencies());
    Ok((tv, d as f64 / x.len() as f64))
}

/// For each string index of `X^n`, the position of its type in
/// [`enumerate_types`] order.
pub fn type_index_of_strings(k: usize, n: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let types = count_vectors(k, n);
    let lookup: std::collections::HashMap<&[usize], usize> = types
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i))
        .collect();
    let len = k.pow(n as u32);
    let mut counts = vec![0; k];
    let map = (0..len)
        .map(|idx| {
            counts.iter_mut().for_each(|c| *c = 0);
            for s in index_string(idx, k, n) {
                counts[s] += 1;
            }
            lookup[counts.as_slice()]
        })
        .collect();
    (types, map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin() -> Arc<Alphabet> {
        Arc::new(Alphabet::binary())
    }

    #[test]
    fn enumerate_binary_n2() {
        let t = enumerate_types(&Alphabet::binary(), 2).unwrap();
        let counts: Vec<_> = t.iter().map(|v| v.counts().to_vec()).collect();
        assert_eq!(counts, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let one = enumerate_types(&Alphabet::indexed(3), 1).unwrap();
        assert_eq!(one.len(), 3);
        assert!(enumerate_types(&Alphabet::binary(), 0).is_err());
    }

    #[test]
    fn string_types() {
        let a = Arc::new(Alphabet::new(["a", "b"]).unwrap());
        assert_eq!(type_of_labels(&a, "aab").unwrap().counts(), &[2, 1]);
        assert_eq!(type_of_labels(&a, "bbbb").unwrap().counts(), &[0, 4]);
        assert!(type_of_labels(&a, "abc").is_err());
    }

    #[test]
    fn class_sizes() {
        assert_eq!(type_class_size(&TypeVector::from_counts(vec![2, 2]).unwrap()), BigUint::from(6u32));
        assert_eq!(type_class_size(&TypeVector::from_counts(vec![0, 5]).unwrap()), BigUint::one());
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(number_of_types(3, 4), BigUint::from(15u32));
    }

    #[test]
    fn class_enumeration() {
        let v = TypeVector::from_counts(vec![1, 1]).unwrap();
        let set = enumerate_type_class(&v).unwrap();
        let strs: Vec<_> = set.strings().collect();
        assert_eq!(strs, vec![vec![0, 1], vec![1, 0]]);
        let point = TypeVector::from_counts(vec![0, 0, 3]).unwrap();
        assert_eq!(enumerate_type_class(&point).unwrap().indices(), &[26]);
    }

    #[test]
    fn class_enumeration_guard() {
        // 12-symbol alphabet, one of each at n=12: 12! > 1e7
        let v = TypeVector::from_counts(vec![1; 12]).unwrap();
        assert!(enumerate_type_class(&v).unwrap_err().is_capacity());
    }

    #[test]
    fn iid_weights() {
        let p = Distribution::from_weights(vec![0.5, 0.5]).unwrap();
        let v = TypeVector::from_counts(vec![2, 2]).unwrap();
        assert!((iid_weight_of_type_class(&p, &v).unwrap() - 6.0 / 16.0).abs() < 1e-15);
        let q = Distribution::from_weights(vec![0.3, 0.7]).unwrap();
        let pm = TypeVector::from_counts(vec![4, 0]).unwrap();
        assert!((iid_weight_of_type_class(&q, &pm).unwrap() - 0.3f64.powi(4)).abs() < 1e-15);
        let total: f64 = enumerate_types(&Alphabet::binary(), 7)
            .unwrap()
            .iter()
            .map(|v| iid_weight_of_type_class(&q, v).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        let zero = Distribution::from_weights(vec![1.0, 0.0]).unwrap();
        assert_eq!(iid_weight_of_type_class(&zero, &v).unwrap(), 0.0);
    }

    #[test]
    fn hamming() {
        let a = Arc::new(Alphabet::new(["a", "b"]).unwrap());
        let x = a.parse_string("aab").unwrap();
        let y = a.parse_string("abb").unwrap();
        assert_eq!(hamming_distance(&x, &y).unwrap(), 1);
        assert_eq!(hamming_distance(&[0, 0], &[1, 1]).unwrap(), 2);
        assert!(hamming_distance(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn ball_weights() {
        let p = Distribution::from_weights(vec![0.5, 0.5]).unwrap();
        let y = StringSet::new(bin(), 3, vec![0]).unwrap();
        assert!((hamming_ball_weight(&y, 1, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!((hamming_ball_weight(&y, 0, &p).unwrap() - 0.125).abs() < 1e-15);
        assert!((hamming_ball_weight(&y, 3, &p).unwrap() - 1.0).abs() < 1e-15);
        let empty = StringSet::new(bin(), 3, vec![]).unwrap();
        assert!(hamming_ball_weight(&empty, 1, &p).is_err());
    }

    #[test]
    fn type_tv() {
        let v = TypeVector::from_counts(vec![3, 1]).unwrap();
        let p = Distribution::from_weights(vec![0.5, 0.5]).unwrap();
        assert!((type_tv_distance(&v, &p).unwrap() - 0.25).abs() < 1e-15);
        let exact = TypeVector::from_counts(vec![2, 2]).unwrap();
        assert_eq!(type_tv_distance(&exact, &p).unwrap(), 0.0);
    }

    #[test]
    fn string_type_map_agrees_with_type_of_string() {
        let a = Arc::new(Alphabet::indexed(3));
        let (types, map) = type_index_of_strings(3, 4);
        for (idx, &t) in map.iter().enumerate() {
            let v = type_of_string(&a, &index_string(idx, 3, 4)).unwrap();
            assert_eq!(v.counts(), types[t].as_slice());
        }
    }
}
