//! The binary family `F_{γ,n} = {Q : H_γ^{⊗n} Q ≥ 0}` with
//! `H_γ = [[γ, 1], [−1, 1]]`, its filtering channel, and vertex lists.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};

use crate::alphabet::{Alphabet, JointDistribution, ProbabilityVector, StochasticChannel};
use crate::error::{Error, Result};

/// Entries of `H_γ^{⊗n} Q` down to this value count as nonnegative.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Largest `n` for which [`werner_vertices`] enumerates active sets.
pub const MAX_VERTEX_LEVEL: usize = 3;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma={gamma} must be >= 1")));
    }
    Ok(())
}

pub fn h_gamma(gamma: f64) -> [[f64; 2]; 2] {
    [[gamma, 1.0], [-1.0, 1.0]]
}

/// Applies a 2×2 matrix on every axis of a vector indexed by `{0,1}^n`.
pub fn apply_binary_tensor(m: &[[f64; 2]; 2], v: &[f64]) -> Vec<f64> {
    let len = v.len();
    let n = len.trailing_zeros() as usize;
    debug_assert_eq!(1usize << n, len);
    let mut out = v.to_vec();
    for axis in 0..n {
        let stride = 1usize << (n - 1 - axis);
        for base in 0..len {
            if base & stride == 0 {
                let (a, b) = (out[base], out[base | stride]);
                out[base] = m[0][0] * a + m[0][1] * b;
                out[base | stride] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
    out
}

/// Smallest entry of `H_γ^{⊗n} Q`.
pub fn werner_margin(q: &JointDistribution, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if q.alphabet().size() != 2 {
        return Err(Error::domain("the gamma family lives on a binary alphabet"));
    }
    let h = apply_binary_tensor(&h_gamma(gamma), q.weights());
    Ok(h.into_iter().fold(f64::INFINITY, f64::min))
}

pub fn werner_membership(q: &JointDistribution, gamma: f64) -> Result<bool> {
    Ok(werner_margin(q, gamma)? >= -MEMBERSHIP_TOL)
}

/// The informationally complete filter `W_γ`: `W(0|0)=1`, `W(0|1)=1/γ`,
/// `W(1|1)=1−1/γ`.
pub fn werner_channel(gamma: f64) -> Result<StochasticChannel> {
    check_gamma(gamma)?;
    StochasticChannel::new(
        Alphabet::binary(),
        Alphabet::binary(),
        vec![vec![1.0, 0.0], vec![1.0 / gamma, 1.0 - 1.0 / gamma]],
    )
}

/// `(1,0,0,γ)/(γ+1)`, a level-2 member far from `(1,0)^{⊗2}` only by
/// `log(γ+1)`.
pub fn ansatz_q2(gamma: f64) -> Result<JointDistribution> {
    check_gamma(gamma)?;
    JointDistribution::new(
        Alphabet::binary(),
        2,
        vec![1.0 / (gamma + 1.0), 0.0, 0.0, gamma / (gamma + 1.0)],
    )
}

/// Vertices of `{Q ≥ 0, H_γ^{⊗n} Q ≥ 0, ΣQ = 1}`.
///
/// Every basis of `d−1` active inequalities plus the normalization is
/// solved in floating point; feasible candidates are then re-solved in
/// exact rational arithmetic (with `γ` taken as its exact binary value) and
/// deduplicated there. The output is in lexicographic order of weights.
pub fn werner_vertices(n: usize, gamma: f64) -> Result<Vec<JointDistribution>> {
    check_gamma(gamma)?;
    if n == 0 || n > MAX_VERTEX_LEVEL {
        return Err(Error::Capacity {
            what: "gamma-family vertex enumeration level",
            needed: n as u128,
            limit: MAX_VERTEX_LEVEL as u128,
        });
    }
    let d = 1usize << n;
    // Inequality rows a·Q ≥ 0: identity rows then rows of H^{⊗n}.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * d);
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        rows.push(e);
    }
    let h = h_gamma(gamma);
    // Row i of H^{⊗n} is the transpose action on e_i.
    let ht = [[h[0][0], h[1][0]], [h[0][1], h[1][1]]];
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        rows.push(apply_binary_tensor(&ht, &e));
    }
    let g = BigRational::from_f64(gamma).expect("finite gamma");
    let exact_rows = exact_inequalities(n, &g);

    let mut found: Vec<Vec<BigRational>> = Vec::new();
    let mut combo: Vec<usize> = (0..d - 1).collect();
    loop {
        if let Some(q) = solve_active(&rows, &combo, d) {
            let feasible = rows
                .iter()
                .all(|r| r.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>() >= -1e-9);
            if feasible {
                if let Some(exact) = solve_active_exact(&exact_rows, &combo, d) {
                    let ok = exact_rows.iter().all(|r| !dot_exact(r, &exact).is_negative());
                    if ok && !found.contains(&exact) {
                        found.push(exact);
                    }
                }
            }
        }
        if !next_combination(&mut combo, rows.len()) {
            break;
        }
    }
    found.sort();
    let alphabet = Arc::new(Alphabet::binary());
    found
        .into_iter()
        .map(|v| {
            let w: Vec<f64> = v.iter().map(rational_to_f64).collect();
            JointDistribution::normalized(alphabet.clone(), n, w)
        })
        .collect()
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(0.0)
}

fn exact_inequalities(n: usize, g: &BigRational) -> Vec<Vec<BigRational>> {
    let d = 1usize << n;
    let one = BigRational::from_integer(BigInt::from(1));
    let ht = [
        [g.clone(), -one.clone()],
        [one.clone(), one.clone()],
    ];
    let mut rows = Vec::with_capacity(2 * d);
    for i in 0..d {
        let mut e = vec![BigRational::zero(); d];
        e[i] = one.clone();
        rows.push(e);
    }
    for i in 0..d {
        let mut e = vec![BigRational::zero(); d];
        e[i] = one.clone();
        for axis in 0..n {
            let stride = 1usize << (n - 1 - axis);
            for base in 0..d {
                if base & stride == 0 {
                    let (a, b) = (e[base].clone(), e[base | stride].clone());
                    e[base] = &ht[0][0] * &a + &ht[0][1] * &b;
                    e[base | stride] = &ht[1][0] * &a + &ht[1][1] * &b;
                }
            }
        }
        rows.push(e);
    }
    rows
}

fn dot_exact(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves `{a_i·Q = 0 for i in active} ∪ {ΣQ = 1}` by partial pivoting.
fn solve_active(rows: &[Vec<f64>], active: &[usize], d: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| {
            let mut r = rows[i].clone();
            r.push(0.0);
            r
        })
        .collect();
    let mut norm = vec![1.0; d];
    norm.push(1.0);
    m.push(norm);
    for col in 0..d {
        let piv = (col..d).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..d {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=d {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some((0..d).map(|i| m[i][d] / m[i][i]).collect())
}

fn solve_active_exact(rows: &[Vec<BigRational>], active: &[usize], d: usize) -> Option<Vec<BigRational>> {
    let one = BigRational::from_integer(BigInt::from(1));
    let mut m: Vec<Vec<BigRational>> = active
        .iter()
        .map(|&i| {
            let mut r = rows[i].clone();
            r.push(BigRational::zero());
            r
        })
        .collect();
    let mut norm = vec![one.clone(); d];
    norm.push(one);
    m.push(norm);
    for col in 0..d {
        let piv = (col..d).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        for r in 0..d {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..=d {
                    let sub = &f * &m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
    }
    Some((0..d).map(|i| &m[i][d] / &m[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Distribution;

    fn joint(w: &[f64]) -> JointDistribution {
        let n = w.len().trailing_zeros() as usize;
        JointDistribution::new(Alphabet::binary(), n, w.to_vec()).unwrap()
    }

    #[test]
    fn single_copy_membership() {
        for gamma in [1.0, 2.0, 2.5] {
            let h = apply_binary_tensor(&h_gamma(gamma), &[0.5, 0.5]);
            assert!((h[0] - (gamma + 1.0) / 2.0).abs() < 1e-15 && h[1].abs() < 1e-15);
            assert!(werner_membership(&joint(&[0.5, 0.5]), gamma).unwrap());
            let h = apply_binary_tensor(&h_gamma(gamma), &[1.0, 0.0]);
            assert_eq!(h, vec![gamma, -1.0]);
            assert!(!werner_membership(&joint(&[1.0, 0.0]), gamma).unwrap());
            assert!(werner_membership(&joint(&[0.3, 0.7]), gamma).unwrap());
            assert!(!werner_membership(&joint(&[0.51, 0.49]), gamma).unwrap());
        }
    }

    #[test]
    fn ansatz_is_a_member() {
        for gamma in [1.5, 2.0, 2.5] {
            assert!(werner_membership(&ansatz_q2(gamma).unwrap(), gamma).unwrap());
        }
    }

    #[test]
    fn non_binary_rejected() {
        let q = Distribution::uniform(Alphabet::indexed(3)).into_joint();
        assert!(werner_membership(&q, 2.0).is_err());
        assert!(werner_channel(0.5).is_err());
    }

    #[test]
    fn level_one_vertices() {
        let v = werner_vertices(1, 2.0).unwrap();
        let w: Vec<_> = v.iter().map(|q| q.weights().to_vec()).collect();
        assert_eq!(w, vec![vec![0.0, 1.0], vec![0.5, 0.5]]);
    }

    #[test]
    fn level_two_vertices_are_members_and_span_the_ansatz() {
        let gamma = 2.0;
        let v = werner_vertices(2, gamma).unwrap();
        assert!(v.len() >= 3);
        for q in &v {
            assert!(werner_membership(q, gamma).unwrap());
        }
        let gens: Vec<Vec<f64>> = v.iter().map(|q| q.weights().to_vec()).collect();
        let target = ansatz_q2(gamma).unwrap();
        let out = crate::divergences::min_kl_to_hull(target.weights(), &gens);
        assert!(out.value.unwrap() < 1e-9);
    }

    #[test]
    fn channel_factorizes_through_h() {
        // W_γ = T_γ H_γ with T_γ entrywise nonnegative.
        for gamma in [1.5, 2.0, 3.0] {
            let w = werner_channel(gamma).unwrap();
            assert!(w.is_informationally_complete());
            let t = [
                [(gamma + 1.0) / (gamma * (gamma + 1.0)), 0.0],
                [(gamma - 1.0) / (gamma * (gamma + 1.0)), gamma * (gamma - 1.0) / (gamma * (gamma + 1.0))],
            ];
            let h = h_gamma(gamma);
            for y in 0..2 {
                for x in 0..2 {
                    let th: f64 = (0..2).map(|k| t[y][k] * h[k][x]).sum();
                    assert!((th - w.prob(y, x)).abs() < 1e-12);
                }
            }
        }
    }
}
