//! Subshifts of finite type and the machinery around their orbits.
//!
//! A [`TransitionSystem`] is a 0/1 matrix over a finite alphabet; admissible
//! words are walks in that graph. One-sided sequences carry the usual metric
//! `2^-j` where `j` is the length of the common prefix, so "within `delta`" is
//! a prefix-agreement test at window `ceil(log2(1/delta))`. Return-time search
//! and the closing construction below follow that convention exactly.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Alphabet plus allowed-transition matrix. Rows index the current symbol,
/// columns the next one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    k: usize,
    allowed: Vec<bool>,
}

impl TransitionSystem {
    /// Full shift on `k` symbols: every transition allowed.
    pub fn full_shift(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("alphabet must be non-empty"));
        }
        Ok(TransitionSystem { k, allowed: vec![true; k * k] })
    }

    /// Builds a system from a 0/1 matrix. Every symbol must have at least one
    /// outgoing and one incoming transition; stranded symbols would make word
    /// enumeration silently empty.
    pub fn from_matrix(rows: &[Vec<u8>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::input("transition matrix must be non-empty"));
        }
        let mut allowed = vec![false; k * k];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::input(format!(
                    "transition matrix must be square: row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => allowed[i * k + j] = true,
                    _ => {
                        return Err(Error::input(format!(
                            "transition matrix entries must be 0 or 1, got {v} at ({i},{j})"
                        )))
                    }
                }
            }
        }
        for s in 0..k {
            if !(0..k).any(|j| allowed[s * k + j]) {
                return Err(Error::input(format!("symbol {s} has no outgoing transition")));
            }
            if !(0..k).any(|i| allowed[i * k + s]) {
                return Err(Error::input(format!("symbol {s} has no incoming transition")));
            }
        }
        Ok(TransitionSystem { k, allowed })
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn allows(&self, a: u8, b: u8) -> bool {
        self.allowed[a as usize * self.k + b as usize]
    }

    pub fn is_full_shift(&self) -> bool {
        self.allowed.iter().all(|&b| b)
    }

    /// The transition matrix as nested 0/1 rows.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| u8::from(self.allowed[i * self.k + j])).collect())
            .collect()
    }

    /// The same system with every edge reversed. Word enumeration over the
    /// transpose visits exactly the reversals of admissible words, which lets
    /// running products be extended by left multiplication.
    pub fn transposed(&self) -> TransitionSystem {
        let k = self.k;
        let mut allowed = vec![false; k * k];
        for i in 0..k {
            for j in 0..k {
                allowed[j * k + i] = self.allowed[i * k + j];
            }
        }
        TransitionSystem { k, allowed }
    }

    fn check_symbol(&self, s: u8) -> Result<()> {
        if (s as usize) < self.k {
            Ok(())
        } else {
            Err(Error::input(format!(
                "symbol {s} out of range for alphabet of size {}",
                self.k
            )))
        }
    }
}

/// A finite block of symbols. Validity against a particular system is checked
/// by the operations that need it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteWord {
    symbols: Vec<u8>,
}

impl FiniteWord {
    pub fn new(symbols: Vec<u8>) -> Self {
        FiniteWord { symbols }
    }

    /// Parses a digit string like `"0110"`. Only meaningful for alphabets of
    /// at most ten symbols.
    pub fn parse(digits: &str) -> Result<Self> {
        let symbols = digits
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::input(format!("non-digit symbol {c:?} in word")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(FiniteWord { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn prefix(&self, n: usize) -> FiniteWord {
        FiniteWord { symbols: self.symbols[..n.min(self.symbols.len())].to_vec() }
    }
}

impl std::fmt::Display for FiniteWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.symbols.iter().all(|&s| s < 10) {
            for s in &self.symbols {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join(" "))
        }
    }
}

/// True when every adjacent pair of `w` is an allowed transition.
pub fn is_admissible(w: &FiniteWord, sys: &TransitionSystem) -> Result<bool> {
    for &s in w.symbols() {
        sys.check_symbol(s)?;
    }
    Ok(w.symbols().windows(2).all(|p| sys.allows(p[0], p[1])))
}

/// Booth's least-rotation algorithm; returns the start index of the
/// lexicographically smallest rotation in O(n).
fn least_rotation_start(s: &[u8]) -> usize {
    let n = s.len();
    if n <= 1 {
        return 0;
    }
    let mut f: Vec<isize> = vec![-1; 2 * n];
    let mut k: usize = 0;
    for j in 1..2 * n {
        let sj = s[j % n];
        let mut i = f[j - k - 1];
        while i != -1 && sj != s[(k + i as usize + 1) % n] {
            if sj < s[(k + i as usize + 1) % n] {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if i == -1 && sj != s[k % n] {
            if sj < s[k % n] {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k
}

fn minimal_period(s: &[u8]) -> usize {
    let n = s.len();
    for d in 1..n {
        if n.is_multiple_of(d) && s.iter().enumerate().all(|(i, &c)| c == s[i % d]) {
            return d;
        }
    }
    n
}

/// A rotation class of cyclically admissible words, stored as its
/// lexicographically least rotation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicWord {
    symbols: Vec<u8>,
    primitive: bool,
}

impl CyclicWord {
    /// Canonicalizes `symbols` to the least rotation after checking cyclic
    /// admissibility, wrap transition included.
    pub fn new(symbols: Vec<u8>, sys: &TransitionSystem) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::input("cyclic word must be non-empty"));
        }
        for &s in &symbols {
            sys.check_symbol(s)?;
        }
        let n = symbols.len();
        for i in 0..n {
            let a = symbols[i];
            let b = symbols[(i + 1) % n];
            if !sys.allows(a, b) {
                return Err(Error::input(format!(
                    "cyclic word {} has forbidden transition {a}->{b}",
                    FiniteWord::new(symbols.clone())
                )));
            }
        }
        let start = least_rotation_start(&symbols);
        let mut canonical = Vec::with_capacity(n);
        canonical.extend_from_slice(&symbols[start..]);
        canonical.extend_from_slice(&symbols[..start]);
        let primitive = minimal_period(&canonical) == n;
        Ok(CyclicWord { symbols: canonical, primitive })
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    /// The number of distinct rotations, i.e. how many periodic points this
    /// class accounts for.
    pub fn distinct_rotations(&self) -> usize {
        minimal_period(&self.symbols)
    }

    pub fn to_word(&self) -> FiniteWord {
        FiniteWord::new(self.symbols.clone())
    }
}

impl std::fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.to_word())
    }
}

/// All rotation classes of period-`p` points, sorted by canonical
/// representative.
pub fn periodic_points(sys: &TransitionSystem, p: usize) -> Result<Vec<CyclicWord>> {
    if p == 0 {
        return Err(Error::input("period must be positive"));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut classes = Vec::new();
    let mut word: Vec<u8> = Vec::with_capacity(p);
    // Depth-first enumeration with prefix-admissibility pruning.
    fn rec(
        sys: &TransitionSystem,
        p: usize,
        word: &mut Vec<u8>,
        seen: &mut std::collections::BTreeSet<Vec<u8>>,
        classes: &mut Vec<CyclicWord>,
    ) {
        if word.len() == p {
            if sys.allows(word[p - 1], word[0]) {
                let cw = CyclicWord::new(word.clone(), sys).expect("checked admissible");
                if seen.insert(cw.symbols().to_vec()) {
                    classes.push(cw);
                }
            }
            return;
        }
        for s in 0..sys.alphabet_size() as u8 {
            if word.last().is_none_or(|&prev| sys.allows(prev, s)) {
                word.push(s);
                rec(sys, p, word, seen, classes);
                word.pop();
            }
        }
    }
    rec(sys, p, &mut word, &mut seen, &mut classes);
    classes.sort_by(|a, b| a.symbols().cmp(b.symbols()));
    Ok(classes)
}

/// Power of the 0-1 transition matrix over exact unsigned integers, row-major.
fn transition_power(sys: &TransitionSystem, e: usize) -> Vec<BigUint> {
    let k = sys.alphabet_size();
    let base: Vec<BigUint> = (0..k * k)
        .map(|idx| {
            let (i, j) = (idx / k, idx % k);
            if sys.allows(i as u8, j as u8) { BigUint::from(1u32) } else { BigUint::zero() }
        })
        .collect();
    let mul = |a: &[BigUint], b: &[BigUint]| -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); k * k];
        for i in 0..k {
            for l in 0..k {
                if a[i * k + l].is_zero() {
                    continue;
                }
                for j in 0..k {
                    let term = &a[i * k + l] * &b[l * k + j];
                    out[i * k + j] += term;
                }
            }
        }
        out
    };
    // Square-and-multiply on the exponent bits.
    let mut result: Option<Vec<BigUint>> = None;
    let mut sq = base;
    let mut rem = e;
    while rem > 0 {
        if rem & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some(r) => mul(&r, &sq),
            });
        }
        rem >>= 1;
        if rem > 0 {
            sq = mul(&sq, &sq);
        }
    }
    result.expect("exponent >= 1")
}

/// Number of period-`p` points, computed exactly as the trace of the `p`-th
/// power of the transition matrix.
pub fn count_periodic(sys: &TransitionSystem, p: usize) -> Result<BigUint> {
    if p == 0 {
        return Err(Error::input("period must be positive"));
    }
    let k = sys.alphabet_size();
    let m = transition_power(sys, p);
    Ok((0..k).fold(BigUint::zero(), |acc, i| acc + &m[i * k + i]))
}

/// Number of admissible words of length `n`, computed exactly as the full
/// entry sum of the `(n-1)`-th matrix power.
pub fn count_words(sys: &TransitionSystem, n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::input("word length must be positive"));
    }
    let k = sys.alphabet_size();
    if n == 1 {
        return Ok(BigUint::from(k));
    }
    let m = transition_power(sys, n - 1);
    Ok(m.iter().fold(BigUint::zero(), |acc, v| acc + v))
}

/// Metric on one-sided sequences truncated to a window: `2^-j` for `j` agreeing
/// leading symbols, `2^-window` when the whole window agrees.
pub fn shift_distance(x: &FiniteWord, y: &FiniteWord, window: usize) -> Result<f64> {
    if window == 0 {
        return Err(Error::input("window must be positive"));
    }
    if x.len() < window || y.len() < window {
        return Err(Error::input(format!(
            "both words must cover the window: lengths {} and {}, window {window}",
            x.len(),
            y.len()
        )));
    }
    let j = x
        .symbols()
        .iter()
        .zip(y.symbols())
        .take(window)
        .take_while(|(a, b)| a == b)
        .count();
    Ok(0.5f64.powi(j as i32))
}

/// Window width that makes "distance below delta" a prefix-agreement test.
pub fn window_for(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::input(format!("delta must lie in (0,1), got {delta}")));
    }
    Ok((1.0 / delta).log2().ceil() as usize)
}

/// Smallest return time `k` strictly inside `(n(1+eps), n(1+2 eps))` at which
/// the orbit comes back within `delta` of its start, i.e. the leading
/// `window_for(delta)` symbols recur at offset `k`. `None` when no admissible
/// `k` exists; a degenerate interval is a normal `None`, not an error.
pub fn find_return(x: &FiniteWord, n: usize, eps: f64, delta: f64) -> Result<Option<usize>> {
    if n == 0 {
        return Err(Error::input("n must be positive"));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
    let m = window_for(delta)?;
    let lo = n as f64 * (1.0 + eps);
    let hi = n as f64 * (1.0 + 2.0 * eps);
    let k_lo = lo.floor() as usize + 1;
    let k_hi = (hi.ceil() as usize).saturating_sub(1);
    if k_hi >= k_lo && x.len() < k_hi + m {
        return Err(Error::input(format!(
            "word of length {} too short to scan returns up to offset {k_hi} at window {m}",
            x.len()
        )));
    }
    let s = x.symbols();
    for k in k_lo..=k_hi {
        if s[..m] == s[k..k + m] {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Closes the first `k` symbols of `x` into a periodic word. Callers obtain
/// `k` from [`find_return`] with `delta <= 1/2`, which forces `x_k = x_0` and
/// makes the wrap transition admissible; a forbidden wrap therefore indicates
/// a broken caller, not bad data.
pub fn close_to_periodic(x: &FiniteWord, k: usize, sys: &TransitionSystem) -> Result<CyclicWord> {
    if k == 0 || x.len() < k {
        return Err(Error::input(format!(
            "period {k} must be positive and within the word length {}",
            x.len()
        )));
    }
    CyclicWord::new(x.symbols()[..k].to_vec(), sys).map_err(|e| match e {
        Error::Input(msg) => Error::invariant(format!("closing produced an inadmissible cycle: {msg}")),
        other => other,
    })
}

/// Constants of the closing estimate: orbits that return within `delta` stay
/// within `c * delta * exp(-gamma * min(i, k-i))` of the closed periodic orbit.
/// For the shift metric, contraction is exactly one symbol per step.
#[derive(Clone, Copy, Debug)]
pub struct ClosingConstants {
    pub c: f64,
    pub gamma: f64,
    pub delta0: f64,
}

impl Default for ClosingConstants {
    fn default() -> Self {
        ClosingConstants { c: 1.0, gamma: std::f64::consts::LN_2, delta0: 1.0 }
    }
}

/// Row-stochastic transition probabilities together with their stationary
/// distribution.
#[derive(Clone, Debug)]
pub struct MarkovChain {
    p: Vec<Vec<f64>>,
    pi: Vec<f64>,
}

const STATIONARY_RESIDUAL: f64 = 1e-12;

impl MarkovChain {
    /// Validates `p` and solves for the stationary distribution.
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        let k = p.len();
        if k == 0 {
            return Err(Error::input("transition probabilities must be non-empty"));
        }
        for (i, row) in p.iter().enumerate() {
            if row.len() != k {
                return Err(Error::input(format!(
                    "probability matrix must be square: row {i} has {} entries",
                    row.len()
                )));
            }
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::input(format!("row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::input(format!("row {i} sums to {sum}, expected 1")));
            }
        }
        let pi = stationary_distribution(&p)?;
        Ok(MarkovChain { p, pi })
    }

    /// I.i.d. chain: every row equals `weights`.
    pub fn bernoulli(weights: &[f64]) -> Result<Self> {
        MarkovChain::new(vec![weights.to_vec(); weights.len()])
    }

    /// Maximal-entropy chain of a transition system, built from the Perron
    /// vector of the transition matrix.
    pub fn parry(sys: &TransitionSystem) -> Result<Self> {
        let k = sys.alphabet_size();
        let mut v = vec![1.0f64; k];
        let mut lambda = 0.0;
        let mut converged = false;
        // (A + I) has the same Perron vector and is aperiodic whenever A is
        // irreducible, so plain power iteration settles.
        for _ in 0..200_000 {
            let mut next = vec![0.0f64; k];
            for i in 0..k {
                let mut acc = v[i];
                for (j, vj) in v.iter().enumerate() {
                    if sys.allows(i as u8, j as u8) {
                        acc += vj;
                    }
                }
                next[i] = acc;
            }
            let norm: f64 = next.iter().sum();
            for x in next.iter_mut() {
                *x /= norm;
            }
            let delta =
                v.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
            v = next;
            if delta < 1e-16 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::input("transition matrix has no stable Perron vector"));
        }
        if v.iter().any(|&x| x <= 1e-13) {
            return Err(Error::input(
                "transition matrix is reducible; maximal-entropy chain undefined",
            ));
        }
        // lambda + 1 is the (A+I)-eigenvalue; recover lambda from one row.
        let av0: f64 = (0..k).map(|j| if sys.allows(0, j as u8) { v[j] } else { 0.0 }).sum();
        lambda += av0 / v[0];
        let mut p = vec![vec![0.0f64; k]; k];
        for i in 0..k {
            for j in 0..k {
                if sys.allows(i as u8, j as u8) {
                    p[i][j] = v[j] / (lambda * v[i]);
                }
            }
            let sum: f64 = p[i].iter().sum();
            for x in p[i].iter_mut() {
                *x /= sum;
            }
        }
        MarkovChain::new(p)
    }

    pub fn dimension(&self) -> usize {
        self.p.len()
    }

    pub fn probabilities(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    /// Positive transition probabilities must be allowed transitions.
    pub fn compatible_with(&self, sys: &TransitionSystem) -> Result<()> {
        if self.dimension() != sys.alphabet_size() {
            return Err(Error::input(format!(
                "chain dimension {} does not match alphabet size {}",
                self.dimension(),
                sys.alphabet_size()
            )));
        }
        for i in 0..self.dimension() {
            for j in 0..self.dimension() {
                if self.p[i][j] > 0.0 && !sys.allows(i as u8, j as u8) {
                    return Err(Error::input(format!(
                        "chain assigns probability {} to forbidden transition {i}->{j}",
                        self.p[i][j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Entropy rate `-sum_i pi_i sum_j P_ij log P_ij`, with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (i, row) in self.p.iter().enumerate() {
            for &pij in row {
                if pij > 0.0 {
                    h -= self.pi[i] * pij * pij.ln();
                }
            }
        }
        h
    }
}

/// Solves `pi P = pi`, `sum pi = 1` by Gaussian elimination with partial
/// pivoting; rejects chains without a unique stationary distribution.
fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = p.len();
    // Rows 0..k-1: (P^T - I) pi = 0 with the last equation replaced by sum = 1.
    let mut a = vec![vec![0.0f64; k + 1]; k];
    for i in 0..k - 1 {
        for j in 0..k {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[k - 1].fill(1.0);
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::input("chain has no unique stationary distribution"));
        }
        a.swap(col, pivot);
        for row in 0..k {
            if row != col {
                let factor = a[row][col] / a[col][col];
                if factor != 0.0 {
                    // Two rows of `a` are touched at once, so no iterator form.
                    #[allow(clippy::needless_range_loop)]
                    for c in col..=k {
                        a[row][c] -= factor * a[col][c];
                    }
                }
            }
        }
    }
    let mut pi: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
    for x in pi.iter_mut() {
        if *x < 0.0 {
            if *x < -1e-9 {
                return Err(Error::input("stationary solve produced negative mass"));
            }
            *x = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    for x in pi.iter_mut() {
        *x /= total;
    }
    let mut residual = 0.0f64;
    for j in 0..k {
        let col: f64 = (0..k).map(|i| pi[i] * p[i][j]).sum();
        residual = residual.max((col - pi[j]).abs());
    }
    if residual > STATIONARY_RESIDUAL {
        return Err(Error::invariant(format!(
            "stationary distribution residual {residual:.3e} exceeds {STATIONARY_RESIDUAL:.0e}"
        )));
    }
    Ok(pi)
}

/// Samples `n` symbols of the chain, seeded and fully deterministic.
pub fn sample_orbit(chain: &MarkovChain, n: usize, seed: u64) -> Result<FiniteWord> {
    if n == 0 {
        return Err(Error::input("orbit length must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |weights: &[f64]| -> u8 {
        let u: f64 = rng.gen::<f64>();
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i as u8;
            }
        }
        (weights.len() - 1) as u8
    };
    let mut symbols = Vec::with_capacity(n);
    let mut state = draw(chain.stationary());
    symbols.push(state);
    for _ in 1..n {
        state = draw(&chain.probabilities()[state as usize]);
        symbols.push(state);
    }
    Ok(FiniteWord::new(symbols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn golden_mean() -> TransitionSystem {
        TransitionSystem::from_matrix(&[vec![1, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn rejects_stranded_symbols_and_bad_entries() {
        assert!(TransitionSystem::from_matrix(&[vec![1, 0], vec![1, 0]]).is_err());
        assert!(TransitionSystem::from_matrix(&[vec![0, 1], vec![0, 1]]).is_err());
        assert!(TransitionSystem::from_matrix(&[vec![1, 2], vec![1, 1]]).is_err());
        assert!(TransitionSystem::from_matrix(&[vec![1, 1]]).is_err());
        assert!(TransitionSystem::from_matrix(&[]).is_err());
    }

    #[test]
    fn admissibility_follows_the_matrix() {
        let sys = golden_mean();
        let w = |s: &str| FiniteWord::parse(s).unwrap();
        assert!(is_admissible(&w("0101"), &sys).unwrap());
        assert!(!is_admissible(&w("0110"), &sys).unwrap());
        assert!(is_admissible(&w(""), &sys).unwrap());
        assert!(is_admissible(&w("0"), &sys).unwrap());
        assert!(is_admissible(&FiniteWord::new(vec![2]), &sys).is_err());
    }

    #[test]
    fn period_two_classes_full_shift() {
        let sys = TransitionSystem::full_shift(2).unwrap();
        let classes = periodic_points(&sys, 2).unwrap();
        let reps: Vec<(&[u8], bool)> =
            classes.iter().map(|c| (c.symbols(), c.is_primitive())).collect();
        assert_eq!(
            reps,
            vec![(&[0u8, 0][..], false), (&[0u8, 1][..], true), (&[1u8, 1][..], false)]
        );
    }

    #[test]
    fn period_two_classes_golden_mean() {
        let sys = golden_mean();
        let classes = periodic_points(&sys, 2).unwrap();
        let reps: Vec<&[u8]> = classes.iter().map(|c| c.symbols()).collect();
        assert_eq!(reps, vec![&[0u8, 0][..], &[0u8, 1][..]]);
        assert_eq!(count_periodic(&sys, 2).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn counts_match_known_values() {
        let sys = golden_mean();
        assert_eq!(count_periodic(&sys, 4).unwrap(), BigUint::from(7u32));
        assert_eq!(count_periodic(&sys, 1).unwrap(), BigUint::from(1u32));
        let full = TransitionSystem::full_shift(2).unwrap();
        assert_eq!(count_periodic(&full, 3).unwrap(), BigUint::from(8u32));
    }

    #[test]
    fn word_counts_are_fibonacci_on_the_golden_mean_shift() {
        let sys = golden_mean();
        // 2, 3, 5, 8, ... without the factor-11 words.
        let mut a = 2u64;
        let mut b = 3u64;
        assert_eq!(count_words(&sys, 1).unwrap(), BigUint::from(a));
        assert_eq!(count_words(&sys, 2).unwrap(), BigUint::from(b));
        for n in 3..=20 {
            let c = a + b;
            a = b;
            b = c;
            assert_eq!(count_words(&sys, n).unwrap(), BigUint::from(b), "length {n}");
        }
        assert_eq!(count_words(&sys, 24).unwrap(), BigUint::from(121393u64));
        let full = TransitionSystem::full_shift(2).unwrap();
        assert_eq!(count_words(&full, 10).unwrap(), BigUint::from(1024u64));
        assert!(count_words(&full, 0).is_err());
    }

    #[test]
    fn trace_count_equals_enumerated_points() {
        // Each rotation class accounts for as many points as it has distinct
        // rotations, so the totals must agree with the exact trace count.
        let three = TransitionSystem::from_matrix(&[
            vec![1, 1, 0],
            vec![0, 1, 1],
            vec![1, 0, 1],
        ])
        .unwrap();
        for sys in [golden_mean(), TransitionSystem::full_shift(2).unwrap(), three] {
            for p in 1..=12 {
                let classes = periodic_points(&sys, p).unwrap();
                let total: usize = classes.iter().map(|c| c.distinct_rotations()).sum();
                assert_eq!(
                    BigUint::from(total),
                    count_periodic(&sys, p).unwrap(),
                    "period {p}"
                );
            }
        }
    }

    #[test]
    fn booth_matches_naive_rotation_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let n = 1 + (rng.next_u32() as usize % 17);
            let s: Vec<u8> = (0..n).map(|_| (rng.next_u32() % 3) as u8).collect();
            let naive = (0..n)
                .map(|r| {
                    let mut rot = s[r..].to_vec();
                    rot.extend_from_slice(&s[..r]);
                    rot
                })
                .min()
                .unwrap();
            let start = least_rotation_start(&s);
            let mut booth = s[start..].to_vec();
            booth.extend_from_slice(&s[..start]);
            assert_eq!(booth, naive);
        }
    }

    #[test]
    fn cyclic_word_canonicalizes_and_checks_wrap() {
        let full = TransitionSystem::full_shift(2).unwrap();
        let cw = CyclicWord::new(vec![0, 1, 0], &full).unwrap();
        assert_eq!(cw.symbols(), &[0, 0, 1]);
        assert!(cw.is_primitive());
        let sq = CyclicWord::new(vec![0, 1, 0, 1], &full).unwrap();
        assert!(!sq.is_primitive());
        assert_eq!(sq.distinct_rotations(), 2);
        let sys = golden_mean();
        assert!(CyclicWord::new(vec![1, 1], &sys).is_err());
        // Wrap transition 1 -> 0 is fine, 0 -> 1 inside is fine.
        assert!(CyclicWord::new(vec![0, 1], &sys).is_ok());
        assert!(CyclicWord::new(vec![1], &sys).is_err());
    }

    #[test]
    fn distance_is_two_to_minus_agreement() {
        let w = |s: &str| FiniteWord::parse(s).unwrap();
        assert_eq!(shift_distance(&w("0110"), &w("0110"), 4).unwrap(), 0.0625);
        assert_eq!(shift_distance(&w("0110"), &w("0010"), 4).unwrap(), 0.5);
        assert_eq!(shift_distance(&w("1110"), &w("0110"), 4).unwrap(), 1.0);
        assert!(shift_distance(&w("01"), &w("0110"), 4).is_err());
        assert!(shift_distance(&w("01"), &w("01"), 0).is_err());
    }

    #[test]
    fn window_rounds_up() {
        assert_eq!(window_for(0.125).unwrap(), 3);
        assert_eq!(window_for(0.5).unwrap(), 1);
        assert_eq!(window_for(0.3).unwrap(), 2);
        assert!(window_for(1.0).is_err());
        assert!(window_for(0.0).is_err());
    }

    #[test]
    fn find_return_respects_the_open_interval() {
        // (012)^inf with n=4, eps=0.5: the open interval (6, 8) admits only
        // k=7, which is not a multiple of the period, so there is no return.
        let x = FiniteWord::parse("012012012012").unwrap();
        assert_eq!(find_return(&x, 4, 0.5, 0.125).unwrap(), None);
        // Widening to eps=0.4 puts 6 inside (5.6, 7.2) and the exact return
        // at one full period-multiple offset is found.
        assert_eq!(find_return(&x, 4, 0.4, 0.125).unwrap(), Some(6));
    }

    #[test]
    fn find_return_parity_examples() {
        let x = FiniteWord::parse("010101010101010101").unwrap();
        // (10.5, 11) holds no integer at all.
        assert_eq!(find_return(&x, 10, 0.05, 0.5).unwrap(), None);
        // (11.5, 13) holds 12, which matches parity.
        assert_eq!(find_return(&x, 10, 0.15, 0.5).unwrap(), Some(12));
    }

    #[test]
    fn find_return_validates_input() {
        let x = FiniteWord::parse("0101").unwrap();
        assert!(find_return(&x, 10, 0.15, 0.5).is_err());
        assert!(find_return(&x, 0, 0.15, 0.5).is_err());
        assert!(find_return(&x, 2, -0.1, 0.5).is_err());
        assert!(find_return(&x, 2, 0.1, 1.5).is_err());
    }

    #[test]
    fn closing_examples() {
        let full3 = TransitionSystem::full_shift(3).unwrap();
        let x = FiniteWord::parse("012012012012").unwrap();
        let cw = close_to_periodic(&x, 6, &full3).unwrap();
        assert_eq!(cw.symbols(), &[0, 1, 2, 0, 1, 2]);
        assert!(!cw.is_primitive());

        let full2 = TransitionSystem::full_shift(2).unwrap();
        let y = FiniteWord::parse("010110").unwrap();
        let cw = close_to_periodic(&y, 3, &full2).unwrap();
        assert_eq!(cw.symbols(), &[0, 0, 1]);
        assert!(cw.is_primitive());

        let sys = golden_mean();
        let z = FiniteWord::parse("01001").unwrap();
        let cw = close_to_periodic(&z, 2, &sys).unwrap();
        assert_eq!(cw.symbols(), &[0, 1]);

        let bad = FiniteWord::parse("110").unwrap();
        match close_to_periodic(&bad, 2, &sys) {
            Err(Error::Invariant(_)) => {}
            other => panic!("expected invariant violation, got {other:?}"),
        }
    }

    #[test]
    fn chain_validation_and_stationarity() {
        assert!(MarkovChain::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
        assert!(MarkovChain::new(vec![vec![0.5, 0.5]]).is_err());
        assert!(MarkovChain::new(vec![vec![-0.1, 1.1], vec![0.5, 0.5]]).is_err());
        let chain = MarkovChain::new(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let pi = chain.stationary();
        // pi = (0.75, 0.25) for this chain.
        assert!((pi[0] - 0.75).abs() < 1e-12);
        assert!((pi[1] - 0.25).abs() < 1e-12);
        let mut residual = 0.0f64;
        for j in 0..2 {
            let col: f64 = (0..2).map(|i| pi[i] * chain.probabilities()[i][j]).sum();
            residual = residual.max((col - pi[j]).abs());
        }
        assert!(residual < 1e-12);
    }

    #[test]
    fn periodic_chain_has_uniform_stationary() {
        let chain = MarkovChain::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((chain.stationary()[0] - 0.5).abs() < 1e-12);
        assert_eq!(chain.entropy(), 0.0);
    }

    #[test]
    fn entropies_match_closed_forms() {
        let uniform = MarkovChain::bernoulli(&[0.5, 0.5]).unwrap();
        assert!((uniform.entropy() - std::f64::consts::LN_2).abs() < 1e-14);
        let skew = MarkovChain::bernoulli(&[0.25, 0.75]).unwrap();
        assert!((skew.entropy() - 0.5623351446188083).abs() < 1e-14);
        // Entropy always lands in [0, log k].
        let chain = MarkovChain::new(vec![vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap();
        assert!(chain.entropy() >= 0.0 && chain.entropy() <= std::f64::consts::LN_2);
    }

    #[test]
    fn parry_chain_of_golden_mean() {
        let sys = golden_mean();
        let chain = MarkovChain::parry(&sys).unwrap();
        chain.compatible_with(&sys).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((chain.probabilities()[0][0] - 1.0 / phi).abs() < 1e-10);
        assert!((chain.probabilities()[1][0] - 1.0).abs() < 1e-12);
        // Maximal-entropy chain realizes the growth rate of the word count.
        assert!((chain.entropy() - phi.ln()).abs() < 1e-10);
    }

    #[test]
    fn compatibility_rejects_forbidden_mass() {
        let sys = golden_mean();
        let chain = MarkovChain::bernoulli(&[0.5, 0.5]).unwrap();
        assert!(chain.compatible_with(&sys).is_err());
        let ok = MarkovChain::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        assert!(ok.compatible_with(&sys).is_ok());
    }

    #[test]
    fn orbits_are_seeded_and_admissible() {
        let sys = golden_mean();
        let chain = MarkovChain::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let a = sample_orbit(&chain, 5000, 42).unwrap();
        let b = sample_orbit(&chain, 5000, 42).unwrap();
        assert_eq!(a, b);
        assert!(is_admissible(&a, &sys).unwrap());
        let c = sample_orbit(&chain, 5000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn deterministic_chain_alternates() {
        let chain = MarkovChain::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let x = sample_orbit(&chain, 100, 9).unwrap();
        for w in x.symbols().windows(2) {
            assert_eq!(w[1], 1 - w[0]);
        }
    }

    #[test]
    fn bernoulli_frequencies_converge() {
        let chain = MarkovChain::bernoulli(&[0.25, 0.75]).unwrap();
        let x = sample_orbit(&chain, 100_000, 1).unwrap();
        let ones = x.symbols().iter().filter(|&&s| s == 1).count() as f64;
        assert!((ones / 1e5 - 0.75).abs() < 0.01);
    }
}
