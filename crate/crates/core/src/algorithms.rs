//! Growth-rate procedures built on cocycles: Lyapunov drift along sampled
//! orbits, periodic-orbit approximation of that drift, two-sided brackets for
//! the maximal growth rate, optimal periodic orbits with a realizing marking
//! curve, and subadditive pressure with a zero-temperature scan.
//!
//! Word enumeration runs over the transposed transition system, so that
//! extending an enumeration word prepends a generator to the product and the
//! marking-curve images update with one action per step. All reductions are
//! max/min or sums in a canonical order, which keeps every result bit
//! identical across thread counts.

use rayon::prelude::*;

use crate::cocycle::{
    curve_growth, displacement, translation_length, Cocycle, CocycleTarget, Marking,
};
use crate::error::{Error, Result};
use crate::numeric::ln_biguint;
use crate::symbolic::{
    close_to_periodic, count_words, find_return, periodic_points, sample_orbit, window_for,
    CyclicWord, MarkovChain, TransitionSystem,
};

/// Iteration budget and tolerance for translation-length estimates used by
/// the bracket and orbit routines.
const TL_MAX_ITER: usize = 4096;
const TL_TOL: f64 = 1e-10;

/// Drift of one sampled orbit: displacement of the running product over n
/// steps, divided by n.
#[derive(Clone, Debug)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub n: usize,
    pub seed: u64,
    /// (j, displacement/j) at powers of two and at n.
    pub trace: Vec<(usize, f64)>,
}

/// Checkpoints where traces are recorded: powers of two up to n, then n.
fn checkpoints(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut j = 1;
    while j <= n {
        out.push(j);
        j *= 2;
    }
    if *out.last().expect("n >= 1") != n {
        out.push(n);
    }
    out
}

/// Samples one orbit of the chain and returns the displacement average at n,
/// with the trace of partial averages. The displacement at each checkpoint is
/// evaluated through curve actions on the word prefix; the total work over
/// all checkpoints stays within a small factor of one full pass.
pub fn lyapunov<T: CocycleTarget>(
    c: &Cocycle<T>,
    chain: &MarkovChain,
    n: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if n == 0 {
        return Err(Error::input("orbit length must be positive"));
    }
    chain.compatible_with(c.system())?;
    let orbit = sample_orbit(chain, n, seed)?;
    let marking = c.default_marking()?;
    let mut trace = Vec::new();
    for j in checkpoints(n) {
        let d = c.word_displacement(&orbit.symbols()[..j], &marking)?;
        trace.push((j, d.value / j as f64));
    }
    let value = trace.last().expect("at least one checkpoint").1;
    Ok(LyapunovEstimate { value, n, seed, trace })
}

/// Outcome of the closing pipeline: a periodic word whose displacement
/// average approximates the sampled drift.
#[derive(Clone, Debug)]
pub struct PeriodicApprox {
    pub converged: bool,
    pub word: Option<CyclicWord>,
    pub period: Option<usize>,
    pub periodic_value: Option<f64>,
    pub lambda_hat: f64,
    pub gap: Option<f64>,
    pub n_used: usize,
    pub attempts: usize,
    pub seed: u64,
}

/// Samples an orbit, estimates the drift at n, finds a return time k in the
/// open interval (n(1+eps), n(1+2eps)), and closes the first k symbols into a
/// periodic word. The cocycle reads one symbol, so agreement radius 1/2 (one
/// leading symbol) already gives an exact closing: the periodic value is the
/// orbit's own length-k displacement average, and the gap against lambda_hat
/// measures only how far the finite-n average is from its limit.
///
/// A missing return in the interval doubles n, twice; a run with no return
/// after that comes back flagged rather than as an error. The same seed is
/// reused across attempts, so a longer attempt extends the same orbit.
pub fn periodic_approx<T: CocycleTarget>(
    c: &Cocycle<T>,
    chain: &MarkovChain,
    eps: f64,
    seed: u64,
    n0: usize,
) -> Result<PeriodicApprox> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::input("eps must be positive"));
    }
    if n0 == 0 {
        return Err(Error::input("initial orbit length must be positive"));
    }
    chain.compatible_with(c.system())?;
    let delta = 0.5;
    let window = window_for(delta)?;
    let marking = c.default_marking()?;
    let mut lambda_hat = 0.0;
    let mut n_used = n0;
    for attempt in 0..3usize {
        let n = n0 << attempt;
        n_used = n;
        let k_hi = (n as f64 * (1.0 + 2.0 * eps)).ceil() as usize;
        let orbit = sample_orbit(chain, k_hi + window + 1, seed)?;
        lambda_hat = c.word_displacement(&orbit.symbols()[..n], &marking)?.value / n as f64;
        if let Some(k) = find_return(&orbit, n, eps, delta)? {
            let word = close_to_periodic(&orbit, k, c.system())?;
            let periodic_value =
                c.word_displacement(&orbit.symbols()[..k], &marking)?.value / k as f64;
            return Ok(PeriodicApprox {
                converged: true,
                word: Some(word),
                period: Some(k),
                periodic_value: Some(periodic_value),
                lambda_hat,
                gap: Some((lambda_hat - periodic_value).abs()),
                n_used,
                attempts: attempt + 1,
                seed,
            });
        }
    }
    Ok(PeriodicApprox {
        converged: false,
        word: None,
        period: None,
        periodic_value: None,
        lambda_hat,
        gap: None,
        n_used,
        attempts: 3,
        seed,
    })
}

fn node_displacement<T: CocycleTarget>(
    target: &T,
    images: &[T::Curve],
    marking: &Marking<T::Curve>,
) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for (i, img) in images.iter().enumerate() {
        let v = crate::numeric::ln_bigrational(&target.curve_size(img)?) - marking.base_ln(i);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Depth-first walk over reversed admissible words, tracking marking-curve
/// images and recording the per-depth displacement maxima. A subtree is cut
/// when even the per-letter growth bound cannot improve any deeper maximum
/// already on record; the recorded maxima are exact either way.
#[allow(clippy::too_many_arguments)]
fn depth_max_dfs<T: CocycleTarget>(
    c: &Cocycle<T>,
    transposed: &TransitionSystem,
    marking: &Marking<T::Curve>,
    images: &[T::Curve],
    last: u8,
    depth: usize,
    n: usize,
    step: f64,
    best: &mut [f64],
) -> Result<()> {
    let d = node_displacement(c.target(), images, marking)?;
    if d > best[depth] {
        best[depth] = d;
    }
    if depth == n {
        return Ok(());
    }
    let can_improve = (depth + 1..=n).any(|j| d + (j - depth) as f64 * step > best[j]);
    if !can_improve {
        return Ok(());
    }
    for s in 0..c.system().alphabet_size() as u8 {
        if transposed.allows(last, s) {
            let next: Vec<T::Curve> =
                images.iter().map(|v| c.target().act(c.generator_for(s), v)).collect();
            depth_max_dfs(c, transposed, marking, &next, s, depth + 1, n, step, best)?;
        }
    }
    Ok(())
}

/// Exact per-length maxima of word displacement, `out[j]` for word length j
/// (entry 0 unused, kept at 0). Enumeration is parallel over the last symbol
/// of the word; the merge is a plain per-depth max.
pub fn max_displacement_by_length<T: CocycleTarget>(
    c: &Cocycle<T>,
    n: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::input("word length must be positive"));
    }
    let marking = c.default_marking()?;
    let transposed = c.system().transposed();
    let mut gen_max = f64::NEG_INFINITY;
    for s in 0..c.system().alphabet_size() as u8 {
        gen_max = gen_max.max(displacement(c.target(), c.generator_for(s), &marking)?.value);
    }
    let step = gen_max + c.target().subadditivity_slack();
    let roots: Vec<u8> = (0..c.system().alphabet_size() as u8).collect();
    let per_root: Vec<Vec<f64>> = roots
        .par_iter()
        .map(|&s| {
            let mut best = vec![f64::NEG_INFINITY; n + 1];
            let images: Vec<T::Curve> = marking
                .curves()
                .iter()
                .map(|v| c.target().act(c.generator_for(s), v))
                .collect();
            depth_max_dfs(c, &transposed, &marking, &images, s, 1, n, step, &mut best)?;
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0f64; n + 1];
    for j in 1..=n {
        let m = per_root.iter().map(|b| b[j]).fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(Error::invariant(format!("no admissible word of length {j}")));
        }
        out[j] = m;
    }
    Ok(out)
}

/// Upper bound for the maximal growth rate: the running minimum over j of
/// (M_j + slack)/j, where M_j is the per-length displacement maximum. Any
/// long word splits into length-j blocks at one slack per block, so every
/// level is a certified bound; exactly subadditive targets have zero slack
/// and this is the plain Fekete bound M_j/j.
pub fn jsr_upper<T: CocycleTarget>(c: &Cocycle<T>, n: usize) -> Result<(f64, Vec<(usize, f64)>)> {
    let maxima = max_displacement_by_length(c, n)?;
    let slack = c.target().subadditivity_slack();
    let mut best = f64::INFINITY;
    let mut trace = Vec::with_capacity(n);
    for (j, m) in maxima.iter().enumerate().skip(1) {
        best = best.min((m + slack) / j as f64);
        trace.push((j, best));
    }
    Ok((best, trace))
}

/// Best periodic lower bound: max over primitive admissible cycles of length
/// at most k_max of translation length per symbol, with the witness cycle.
/// Cycles are scanned shortest first in canonical order, so the reported
/// witness is the lexicographically least among the shortest maximizers.
pub fn jsr_lower<T: CocycleTarget>(c: &Cocycle<T>, k_max: usize) -> Result<(f64, CyclicWord)> {
    if k_max == 0 {
        return Err(Error::input("cycle length bound must be positive"));
    }
    let marking = c.default_marking()?;
    let mut best: Option<(f64, CyclicWord)> = None;
    for p in 1..=k_max {
        for cw in periodic_points(c.system(), p)? {
            if !cw.is_primitive() {
                continue;
            }
            let z = c.evaluate(&cw.to_word())?;
            let tl = translation_length(c.target(), &z, &marking, TL_MAX_ITER, TL_TOL)?;
            let value = tl.exponent / p as f64;
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, cw));
            }
        }
    }
    best.ok_or_else(|| {
        Error::input(format!("no admissible cycle of length <= {k_max}; raise the bound"))
    })
}

/// Two-sided bracket for the maximal growth rate.
#[derive(Clone, Debug)]
pub struct JsrBracket {
    pub lower: f64,
    pub upper: f64,
    /// exp of the two ends: the bracket for the spectral radius itself.
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub witness: CyclicWord,
    pub witness_translation_length: f64,
    pub upper_level: usize,
    pub upper_trace: Vec<(usize, f64)>,
    pub slack: f64,
}

/// Assembles the periodic lower bound and the word-maximum upper bound.
/// The ends must be consistent up to the quasi-subadditivity slack spread
/// over the witness period; a wider inversion means a broken invariant.
pub fn metric_jsr<T: CocycleTarget>(c: &Cocycle<T>, n: usize, k_max: usize) -> Result<JsrBracket> {
    let (upper, upper_trace) = jsr_upper(c, n)?;
    let (lower, witness) = jsr_lower(c, k_max)?;
    let slack = c.target().subadditivity_slack();
    let allowance = 2.0 * slack / witness.len() as f64 + 1e-9;
    if lower > upper + allowance {
        return Err(Error::invariant(format!(
            "bracket inverted: lower {lower} exceeds upper {upper} beyond allowance {allowance}"
        )));
    }
    Ok(JsrBracket {
        lower,
        upper,
        rho_lower: lower.exp(),
        rho_upper: upper.exp(),
        witness_translation_length: lower * witness.len() as f64,
        witness,
        upper_level: n,
        upper_trace,
        slack,
    })
}

/// Periodic orbit attaining the best known growth rate, together with the
/// marking curve that realizes it.
#[derive(Clone, Debug)]
pub struct OptimalOrbit {
    pub word: CyclicWord,
    pub exponent: f64,
    /// Index into the marking of the realizing curve.
    pub eta: usize,
    /// (m, per-symbol growth after m applications of the cycle product).
    pub trace: Vec<(usize, f64)>,
}

/// Takes the best periodic word and finds the marking curve whose iterated
/// growth realizes the orbit exponent. Some curve always must: the orbit
/// exponent is itself a max of per-curve growth rates, so a mismatch beyond
/// tolerance signals a marking that does not see the cocycle's growth.
pub fn optimal_orbit<T: CocycleTarget>(c: &Cocycle<T>, k_max: usize) -> Result<OptimalOrbit> {
    let (value, witness) = jsr_lower(c, k_max)?;
    let z = c.evaluate(&witness.to_word())?;
    let k = witness.len() as f64;
    let marking = c.default_marking()?;
    #[allow(clippy::type_complexity)]
    let mut best: Option<(f64, usize, Vec<(usize, f64)>)> = None;
    for (i, curve) in marking.curves().iter().enumerate() {
        let e = curve_growth(c.target(), &z, curve, TL_MAX_ITER, TL_TOL)?;
        let per_symbol = e.exponent / k;
        if best.as_ref().is_none_or(|(b, _, _)| per_symbol > *b) {
            let trace = e.trace.iter().map(|&(m, v)| (m, v / k)).collect();
            best = Some((per_symbol, i, trace));
        }
    }
    let (exponent, eta, trace) = best.expect("marking is non-empty");
    if (exponent - value).abs() > 1e-6 {
        return Err(Error::invariant(format!(
            "no marking curve realizes the orbit exponent: best curve gives {exponent}, \
             orbit gives {value}"
        )));
    }
    Ok(OptimalOrbit { word: witness, exponent, eta, trace })
}

/// Leaf-only displacement collection over all admissible words of length n,
/// in a canonical order (parallel over the last symbol, depth-first in symbol
/// order below it).
#[allow(clippy::too_many_arguments)]
fn collect_dfs<T: CocycleTarget>(
    c: &Cocycle<T>,
    transposed: &TransitionSystem,
    marking: &Marking<T::Curve>,
    images: &[T::Curve],
    last: u8,
    depth: usize,
    n: usize,
    out: &mut Vec<f64>,
) -> Result<()> {
    if depth == n {
        out.push(node_displacement(c.target(), images, marking)?);
        return Ok(());
    }
    for s in 0..c.system().alphabet_size() as u8 {
        if transposed.allows(last, s) {
            let next: Vec<T::Curve> =
                images.iter().map(|v| c.target().act(c.generator_for(s), v)).collect();
            collect_dfs(c, transposed, marking, &next, s, depth + 1, n, out)?;
        }
    }
    Ok(())
}

/// Displacements of every admissible n-word, canonical order.
fn displacement_values<T: CocycleTarget>(c: &Cocycle<T>, n: usize) -> Result<Vec<f64>> {
    let marking = c.default_marking()?;
    let transposed = c.system().transposed();
    let roots: Vec<u8> = (0..c.system().alphabet_size() as u8).collect();
    let per_root: Vec<Vec<f64>> = roots
        .par_iter()
        .map(|&s| {
            let mut out = Vec::new();
            let images: Vec<T::Curve> = marking
                .curves()
                .iter()
                .map(|v| c.target().act(c.generator_for(s), v))
                .collect();
            collect_dfs(c, &transposed, &marking, &images, s, 1, n, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_root.into_iter().flatten().collect())
}

/// Stable log of a sum of exponentials, summed in slice order.
fn log_sum_exp(vals: &[f64]) -> f64 {
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return f64::NEG_INFINITY;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Natural log of the number of admissible n-words.
fn ln_admissible_count(sys: &TransitionSystem, n: usize) -> Result<f64> {
    if sys.is_full_shift() {
        return Ok(n as f64 * (sys.alphabet_size() as f64).ln());
    }
    Ok(ln_biguint(&count_words(sys, n)?))
}

/// Finite-n pressure: (1/n) log sum over admissible n-words of
/// exp(q * displacement). The potential is constant on each length-n
/// cylinder, so the cylinder sum is exact, not an estimate. At q = 0 the
/// value is the exact word-count entropy (and exactly log k on a full
/// shift).
pub fn pressure<T: CocycleTarget>(c: &Cocycle<T>, q: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::input("pressure level n must be positive"));
    }
    if !q.is_finite() {
        return Err(Error::input("q must be finite"));
    }
    if q == 0.0 {
        if c.system().is_full_shift() {
            return Ok((c.system().alphabet_size() as f64).ln());
        }
        return Ok(ln_admissible_count(c.system(), n)? / n as f64);
    }
    let vals = displacement_values(c, n)?;
    let scaled: Vec<f64> = vals.iter().map(|d| q * d).collect();
    Ok(log_sum_exp(&scaled) / n as f64)
}

/// Per-chain slack in the finite-n variational inequality: pressure minus
/// (entropy + q * exact cylinder drift). Non-negative up to float error for
/// every compatible chain, because the word-entropy of a stationary chain is
/// at least n times its entropy rate.
pub fn variational_gap<T: CocycleTarget>(
    c: &Cocycle<T>,
    q: f64,
    chains: &[MarkovChain],
    n: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::input("cylinder length n must be positive"));
    }
    for chain in chains {
        chain.compatible_with(c.system())?;
    }
    let p_n = pressure(c, q, n)?;
    let marking = c.default_marking()?;
    let mut gaps = Vec::with_capacity(chains.len());
    for chain in chains {
        let drift = cylinder_drift(c, chain, n, &marking)?;
        gaps.push(p_n - (chain.entropy() + q * drift));
    }
    Ok(gaps)
}

/// Exact expectation of the per-symbol displacement over length-n cylinders:
/// sum of mu(w) * D(w)/n over admissible words with positive chain measure.
fn cylinder_drift<T: CocycleTarget>(
    c: &Cocycle<T>,
    chain: &MarkovChain,
    n: usize,
    marking: &Marking<T::Curve>,
) -> Result<f64> {
    let k = c.system().alphabet_size();
    let mut word: Vec<u8> = Vec::with_capacity(n);
    let mut total = 0.0f64;
    #[allow(clippy::too_many_arguments)]
    fn rec<T: CocycleTarget>(
        c: &Cocycle<T>,
        chain: &MarkovChain,
        n: usize,
        marking: &Marking<T::Curve>,
        word: &mut Vec<u8>,
        prob: f64,
        total: &mut f64,
        k: usize,
    ) -> Result<()> {
        if word.len() == n {
            let d = c.word_displacement(word, marking)?.value;
            *total += prob * d;
            return Ok(());
        }
        for s in 0..k as u8 {
            let p = match word.last() {
                None => chain.stationary()[s as usize],
                Some(&prev) => prob_step(chain, prev, s),
            };
            if p <= 0.0 {
                continue;
            }
            let next = if word.is_empty() { p } else { prob * p };
            word.push(s);
            rec(c, chain, n, marking, word, next, total, k)?;
            word.pop();
        }
        Ok(())
    }
    fn prob_step(chain: &MarkovChain, a: u8, b: u8) -> f64 {
        chain.probabilities()[a as usize][b as usize]
    }
    rec(c, chain, n, marking, &mut word, 1.0, &mut total, k)?;
    Ok(total / n as f64)
}

/// Pressure scan along increasing q with Gibbs-weight statistics.
#[derive(Clone, Debug)]
pub struct PressureCurve {
    pub n: usize,
    pub qs: Vec<f64>,
    /// P_n(q) per grid point.
    pub pressures: Vec<f64>,
    /// P_n(q)/q: upper estimates of the maximal growth rate, decreasing in q.
    pub ratios: Vec<f64>,
    /// Mean per-symbol displacement under the Gibbs weights at q.
    pub gibbs_mean: Vec<f64>,
    /// Gibbs mass on words within 5% of the maximal displacement.
    pub concentration: Vec<f64>,
    /// Best word displacement average, the scan's limit point.
    pub max_word_average: f64,
    pub ln_word_count: f64,
}

/// Evaluates P_n(q)/q along the grid and checks the zero-temperature
/// sandwich on every point: each ratio lies between the best word average
/// and that average plus (log word count)/(qn), the ratios do not increase,
/// and the Gibbs mass near the top does not decrease. Violations are
/// invariant errors because all three are theorems for exact cylinder sums.
pub fn zero_temperature_scan<T: CocycleTarget>(
    c: &Cocycle<T>,
    q_list: &[f64],
    n: usize,
) -> Result<PressureCurve> {
    if n == 0 {
        return Err(Error::input("cylinder length n must be positive"));
    }
    if q_list.is_empty() {
        return Err(Error::input("q grid must be non-empty"));
    }
    for pair in q_list.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::input("q grid must be strictly increasing"));
        }
    }
    if q_list[0] <= 0.0 {
        return Err(Error::input("q grid must be positive"));
    }
    let vals = displacement_values(c, n)?;
    let a_n = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_word_average = a_n / n as f64;
    // Sign-safe 5% band below the maximum.
    let threshold = a_n - 0.05 * a_n.abs();
    let ln_count = ln_admissible_count(c.system(), n)?;
    let mut pressures = Vec::with_capacity(q_list.len());
    let mut ratios = Vec::with_capacity(q_list.len());
    let mut gibbs_mean = Vec::with_capacity(q_list.len());
    let mut concentration = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let scaled: Vec<f64> = vals.iter().map(|d| q * d).collect();
        let ln_z = log_sum_exp(&scaled);
        let p_n = ln_z / n as f64;
        let ratio = p_n / q;
        let mut mean = 0.0f64;
        let mut mass = 0.0f64;
        for (d, s) in vals.iter().zip(&scaled) {
            let w = (s - ln_z).exp();
            mean += w * d;
            if *d >= threshold - 1e-12 {
                mass += w;
            }
        }
        let sandwich_hi = max_word_average + ln_count / (q * n as f64);
        if ratio < max_word_average - 1e-9 || ratio > sandwich_hi + 1e-9 {
            return Err(Error::invariant(format!(
                "P_n(q)/q = {ratio} at q = {q} escapes [{max_word_average}, {sandwich_hi}]"
            )));
        }
        if let Some(&prev) = ratios.last() {
            if ratio > prev + 1e-9 {
                return Err(Error::invariant(format!(
                    "P_n(q)/q increased along the grid at q = {q}"
                )));
            }
        }
        if let Some(&prev) = concentration.last() {
            if mass < prev - 1e-9 {
                return Err(Error::invariant(format!(
                    "Gibbs concentration decreased along the grid at q = {q}"
                )));
            }
        }
        pressures.push(p_n);
        ratios.push(ratio);
        gibbs_mean.push(mean / n as f64);
        concentration.push(mass);
    }
    Ok(PressureCurve {
        n,
        qs: q_list.to_vec(),
        pressures,
        ratios,
        gibbs_mean,
        concentration,
        max_word_average,
        ln_word_count: ln_count,
    })
}
