//! Runtime property suites: the invariants and cross-checks that every
//! configured system is expected to satisfy, packaged as named pass/fail
//! results for the `oracle-check` command and the acceptance tests.
//!
//! Each check either verifies a mathematical identity in exact arithmetic
//! (submultiplicativity, the closing estimate, displacement route agreement)
//! or compares two independent computations of the same quantity (flip
//! growth against homology spectral radius, closed form against iteration).
//! A failed property comes back as a result, not an error; errors are
//! reserved for malformed inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithms::{lyapunov, max_displacement_by_length, metric_jsr, pressure};
use crate::cocycle::{
    displacement, iterated_translation_length, translation_length, Cocycle, CocycleTarget,
    Marking,
};
use crate::error::{Error, Result};
use crate::lamination::{flip, FlipWordClass, LaminationTarget};
use crate::matrix::{log_spectral_radius_2x2, MatrixTarget};
use crate::symbolic::{
    close_to_periodic, find_return, sample_orbit, window_for, FiniteWord, MarkovChain,
    TransitionSystem,
};

/// One named property with its outcome and a human-readable account.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn named(name: &str, passed: bool, detail: String) -> PropertyResult {
    PropertyResult { name: name.to_string(), passed, detail }
}

/// Verifies the closing estimate on random golden-mean orbits: when an orbit
/// returns within delta of its start at time k, the closed periodic word p
/// satisfies d(T^i x, T^i p) <= delta * exp(-(ln 2) * min(i, k-i)) for every
/// 0 <= i <= k. With delta a power of two the bound is the dyadic statement
/// that x and the k-periodic extension of its prefix agree for at least
/// min(i, k-i) + log2(1/delta) symbols past position i, which is checked
/// exactly. Trials that find no return in the search interval are redrawn.
pub fn closing_inequality_check(trials: usize, seed: u64) -> Result<PropertyResult> {
    let sys = TransitionSystem::from_matrix(&[vec![1, 1], vec![1, 0]])?;
    let chain = MarkovChain::parry(&sys)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deltas = [0.5, 0.25, 0.125];
    let mut closings = 0usize;
    let mut violations = 0usize;
    let mut attempts = 0usize;
    let mut min_period = usize::MAX;
    let mut max_period = 0usize;
    while closings < trials && attempts < 20 * trials {
        attempts += 1;
        let n: usize = rng.gen_range(20..=100);
        let eps: f64 = rng.gen_range(0.1..0.8);
        let delta = deltas[rng.gen_range(0..deltas.len())];
        let m = window_for(delta)?;
        let horizon = (n as f64 * (1.0 + 2.0 * eps)).ceil() as usize + m + 1;
        let x = sample_orbit(&chain, horizon, rng.gen::<u64>())?;
        let Some(k) = find_return(&x, n, eps, delta)? else {
            continue;
        };
        closings += 1;
        min_period = min_period.min(k);
        max_period = max_period.max(k);
        // The return time must lie strictly inside the stated interval.
        if !((k as f64) > n as f64 * (1.0 + eps) && (k as f64) < n as f64 * (1.0 + 2.0 * eps)) {
            violations += 1;
            continue;
        }
        // The closed word must be admissible around the wrap.
        if close_to_periodic(&x, k, &sys).is_err() {
            violations += 1;
            continue;
        }
        let s = x.symbols();
        for i in 0..=k {
            let lag = i.min(k - i);
            let agree_len = lag + m;
            let ok = (0..agree_len).all(|j| s[i + j] == s[(i + j) % k]);
            if !ok {
                violations += 1;
            }
        }
    }
    let passed = violations == 0 && closings == trials;
    Ok(named(
        "closing-inequality",
        passed,
        format!(
            "{closings} closings in {attempts} draws, {violations} violations, \
             periods {min_period}..={max_period}"
        ),
    ))
}

/// Random admissible word of the given length, drawn from a Parry chain with
/// a fresh seed off the check's stream.
fn random_word(chain: &MarkovChain, len: usize, rng: &mut ChaCha8Rng) -> Result<FiniteWord> {
    sample_orbit(chain, len, rng.gen::<u64>())
}

/// Splits random words and checks that the product of the parts is the whole,
/// both as elements and in their action on every marking curve.
pub fn cocycle_property_check<T: CocycleTarget>(
    c: &Cocycle<T>,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<PropertyResult> {
    let chain = MarkovChain::parry(c.system())?;
    let marking = c.default_marking()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    for _ in 0..trials {
        let len = rng.gen_range(2..=max_len);
        let w = random_word(&chain, len, &mut rng)?;
        let cut = rng.gen_range(1..len);
        let u = FiniteWord::new(w.symbols()[..cut].to_vec());
        let v = FiniteWord::new(w.symbols()[cut..].to_vec());
        let whole = c.evaluate(&w)?;
        let left = c.evaluate(&u)?;
        let right = c.evaluate(&v)?;
        let split = c.target().compose(&left, &right);
        let mut ok = whole == split;
        for curve in marking.curves() {
            let direct = c.target().act(&whole, curve);
            let staged = c.target().act(&left, &c.target().act(&right, curve));
            ok &= direct == staged;
        }
        if !ok {
            failures += 1;
        }
    }
    Ok(named(
        "cocycle-property",
        failures == 0,
        format!("{trials} random splits up to length {max_len}, {failures} failures"),
    ))
}

/// The incremental displacement along a word must equal the displacement of
/// the evaluated product bit for bit, witness included; both sides reduce to
/// the same exact arithmetic.
pub fn displacement_route_check<T: CocycleTarget>(
    c: &Cocycle<T>,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<PropertyResult> {
    let chain = MarkovChain::parry(c.system())?;
    let marking = c.default_marking()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    for _ in 0..trials {
        let len = rng.gen_range(1..=max_len);
        let w = random_word(&chain, len, &mut rng)?;
        let incremental = c.word_displacement(w.symbols(), &marking)?;
        let via_element = displacement(c.target(), &c.evaluate(&w)?, &marking)?;
        if incremental.value != via_element.value || incremental.witness != via_element.witness {
            failures += 1;
        }
    }
    Ok(named(
        "displacement-route-agreement",
        failures == 0,
        format!("{trials} words up to length {max_len}, {failures} disagreements"),
    ))
}

/// Displacement under concatenation exceeds the sum of the parts by at most
/// the target's declared slack.
pub fn quasi_subadditivity_check<T: CocycleTarget>(
    c: &Cocycle<T>,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<PropertyResult> {
    let chain = MarkovChain::parry(c.system())?;
    let marking = c.default_marking()?;
    let slack = c.target().subadditivity_slack();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let len = rng.gen_range(2..=max_len);
        let w = random_word(&chain, len, &mut rng)?;
        let cut = rng.gen_range(1..len);
        let whole = c.word_displacement(w.symbols(), &marking)?.value;
        let left = c.word_displacement(&w.symbols()[..cut], &marking)?.value;
        let right = c.word_displacement(&w.symbols()[cut..], &marking)?.value;
        let excess = whole - left - right;
        worst = worst.max(excess);
        if excess > slack + 1e-9 {
            failures += 1;
        }
    }
    Ok(named(
        "quasi-subadditivity",
        failures == 0,
        format!(
            "{trials} splits, slack {slack:.6}, worst excess {worst:.3e}, {failures} failures"
        ),
    ))
}

/// Exhaustive subadditivity of the per-length displacement maxima up to the
/// declared slack: a[n+m] <= a[n] + a[m] + slack for all n + m <= n_max.
pub fn fekete_check<T: CocycleTarget>(c: &Cocycle<T>, n_max: usize) -> Result<PropertyResult> {
    let a = max_displacement_by_length(c, n_max)?;
    let slack = c.target().subadditivity_slack();
    let mut failures = 0usize;
    let mut pairs = 0usize;
    for n in 1..n_max {
        for m in 1..=(n_max - n) {
            pairs += 1;
            if a[n + m] > a[n] + a[m] + slack + 1e-12 {
                failures += 1;
            }
        }
    }
    Ok(named(
        "fekete-subadditivity",
        failures == 0,
        format!("all {pairs} pairs with n+m <= {n_max}, slack {slack:.6}, {failures} failures"),
    ))
}

/// The bracket's own consistency invariant, surfaced as a property: an
/// inverted bracket comes back as a failure instead of an error.
pub fn bracket_consistency_check<T: CocycleTarget>(
    c: &Cocycle<T>,
    n: usize,
    k_max: usize,
) -> Result<PropertyResult> {
    match metric_jsr(c, n, k_max) {
        Ok(b) => Ok(named(
            "bracket-consistency",
            true,
            format!(
                "[{:.6}, {:.6}] at n = {n}, k_max = {k_max}, witness {}",
                b.lower,
                b.upper,
                b.witness.to_word()
            ),
        )),
        Err(Error::Invariant(msg)) => Ok(named("bracket-consistency", false, msg)),
        Err(e) => Err(e),
    }
}

/// Every sampled orbit drift must stay below the certified upper bound, up to
/// the statistical tolerance of a finite sample.
pub fn lyapunov_bound_check<T: CocycleTarget>(
    c: &Cocycle<T>,
    n: usize,
    level: usize,
    seeds: &[u64],
) -> Result<PropertyResult> {
    let chain = MarkovChain::parry(c.system())?;
    let (upper, _) = crate::algorithms::jsr_upper(c, level)?;
    let mut failures = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for &seed in seeds {
        let e = lyapunov(c, &chain, n, seed)?;
        worst = worst.max(e.value - upper);
        if e.value > upper + 0.02 {
            failures += 1;
        }
    }
    Ok(named(
        "lyapunov-below-upper-bound",
        failures == 0,
        format!(
            "{} seeds at n = {n}, upper bound {upper:.6}, worst margin {worst:.3e}, \
             {failures} failures",
            seeds.len()
        ),
    ))
}

/// Reruns a bracket and a pressure evaluation inside thread pools of size 1,
/// 4 and 8 and demands bit-identical results.
pub fn determinism_check<T: CocycleTarget>(c: &Cocycle<T>) -> Result<PropertyResult> {
    #[allow(clippy::type_complexity)]
    let run = || -> Result<(f64, f64, Vec<(usize, f64)>, f64)> {
        let b = metric_jsr(c, 8, 3)?;
        let p = pressure(c, 1.5, 8)?;
        Ok((b.lower, b.upper, b.upper_trace, p))
    };
    let base = run()?;
    let mut failures = 0usize;
    for threads in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::input(format!("thread pool of size {threads}: {e}")))?;
        let got = pool.install(run)?;
        if got != base {
            failures += 1;
        }
    }
    Ok(named(
        "thread-count-determinism",
        failures == 0,
        format!("pools of 1, 4, 8 threads, {failures} mismatches"),
    ))
}

/// Exact submultiplicativity of the matrix size: the L1 operator norm of a
/// product never exceeds the product of norms, compared in rational
/// arithmetic with no tolerance.
pub fn submultiplicativity_check(
    target: &MatrixTarget,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<PropertyResult> {
    let names = target.generator_names();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_product = |rng: &mut ChaCha8Rng| {
        let len = rng.gen_range(1..=max_len);
        let mut acc = target.identity();
        for _ in 0..len {
            let g = target
                .generator(&names[rng.gen_range(0..names.len())])
                .expect("name came from the target");
            acc = target.compose(&acc, g);
        }
        acc
    };
    let mut failures = 0usize;
    for _ in 0..trials {
        let a = random_product(&mut rng);
        let b = random_product(&mut rng);
        let ab = target.compose(&a, &b);
        if ab.l1_operator_norm() > a.l1_operator_norm() * b.l1_operator_norm() {
            failures += 1;
        }
    }
    Ok(named(
        "norm-submultiplicativity",
        failures == 0,
        format!("{trials} exact rational products, {failures} failures"),
    ))
}

/// Translation length is a conjugacy invariant. With a closed form the two
/// sides must agree exactly; with the iterative route they must agree within
/// the supplied tolerance and both converge.
pub fn conjugacy_check<T: CocycleTarget>(
    c: &Cocycle<T>,
    trials: usize,
    max_len: usize,
    seed: u64,
    tol: Option<f64>,
) -> Result<PropertyResult> {
    let chain = MarkovChain::parry(c.system())?;
    let marking = c.default_marking()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let g = c.evaluate(&random_word(&chain, rng.gen_range(1..=max_len), &mut rng)?)?;
        let h = c.evaluate(&random_word(&chain, rng.gen_range(1..=max_len), &mut rng)?)?;
        let h_inv = c.target().inverse(&h)?;
        let conj = c.target().compose(&c.target().compose(&h, &g), &h_inv);
        let plain = translation_length(c.target(), &g, &marking, 4096, 1e-10)?;
        let moved = translation_length(c.target(), &conj, &marking, 4096, 1e-10)?;
        let diff = (plain.exponent - moved.exponent).abs();
        worst = worst.max(diff);
        let ok = match tol {
            None => plain.exponent == moved.exponent,
            Some(t) => plain.converged && moved.converged && diff <= t,
        };
        if !ok {
            failures += 1;
        }
    }
    Ok(named(
        "translation-length-conjugacy",
        failures == 0,
        format!("{trials} conjugations, worst difference {worst:.3e}, {failures} failures"),
    ))
}

/// Random element of the group generated by the target's generators and
/// their inverses.
fn random_class(
    target: &LaminationTarget,
    letters: &[FlipWordClass],
    max_len: usize,
    rng: &mut ChaCha8Rng,
) -> FlipWordClass {
    let len = rng.gen_range(1..=max_len);
    let mut acc = target.identity();
    for _ in 0..len {
        acc = target.compose(&acc, &letters[rng.gen_range(0..letters.len())]);
    }
    acc
}

fn generator_letters(target: &LaminationTarget) -> Result<Vec<FlipWordClass>> {
    let mut letters = Vec::new();
    for name in target.generator_names() {
        let g = target.generator(&name).expect("name came from the target").clone();
        letters.push(target.inverse(&g)?);
        letters.push(g);
    }
    Ok(letters)
}

/// Growth exponent through flip iteration against the log spectral radius of
/// the declared homology image, on random words in the generators and their
/// inverses. Skipped (as a pass) when the target declares no 2x2 homology.
pub fn homology_agreement_check(
    target: &LaminationTarget,
    trials: usize,
    max_len: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyResult> {
    let letters = generator_letters(target)?;
    if letters.iter().any(|l| l.homology().map(|h| h.dimension()) != Some(2)) {
        return Ok(named(
            "flip-vs-homology-growth",
            true,
            "skipped: target declares no 2x2 homology".to_string(),
        ));
    }
    let marking = Marking::default_for(target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let cls = random_class(target, &letters, max_len, &mut rng);
        let expected = log_spectral_radius_2x2(cls.homology().expect("letters carry homology"));
        let got = iterated_translation_length(target, &cls, &marking, 2048, 1e-10)?;
        let diff = (got.exponent - expected).abs();
        worst = worst.max(diff);
        if !got.converged || diff > tol {
            failures += 1;
        }
    }
    Ok(named(
        "flip-vs-homology-growth",
        failures == 0,
        format!(
            "{trials} words up to length {max_len}, tolerance {tol:.1e}, \
             worst difference {worst:.3e}, {failures} failures"
        ),
    ))
}

/// Every generator whose homology trace has absolute value at most 2 is a
/// shear or a finite-order class, so its iterated growth must come out as an
/// exact zero. Skipped (as a pass) without 2x2 homology.
pub fn generator_shear_check(target: &LaminationTarget) -> Result<PropertyResult> {
    let names = target.generator_names();
    if names
        .iter()
        .any(|n| target.generator(n).unwrap().homology().map(|h| h.dimension()) != Some(2))
    {
        return Ok(named(
            "twist-generator-zero-growth",
            true,
            "skipped: target declares no 2x2 homology".to_string(),
        ));
    }
    let marking = Marking::default_for(target)?;
    let two = num_rational::BigRational::from_integer(2.into());
    let mut failures = 0usize;
    let mut checked = 0usize;
    for name in &names {
        let g = target.generator(name).unwrap();
        let trace = g.homology().expect("checked above").trace();
        if num_traits::Signed::abs(&trace) > two {
            continue;
        }
        for cls in [g.clone(), target.inverse(g)?] {
            checked += 1;
            let e = iterated_translation_length(target, &cls, &marking, 2048, 1e-10)?;
            if !(e.converged && e.exponent == 0.0) {
                failures += 1;
            }
        }
    }
    Ok(named(
        "twist-generator-zero-growth",
        failures == 0,
        format!("{checked} shear or finite-order generators, {failures} nonzero exponents"),
    ))
}

/// Flipping the same edge twice returns every curve to itself, on random
/// curves obtained by pushing marking curves around with random words.
pub fn flip_involution_check(
    target: &LaminationTarget,
    trials: usize,
    seed: u64,
) -> Result<PropertyResult> {
    let letters = generator_letters(target)?;
    let tri = target.triangulation();
    let flippable: Vec<usize> =
        (0..tri.num_edges()).filter(|&e| tri.flip_preserves_gluing(e)).collect();
    if flippable.is_empty() {
        return Ok(named(
            "flip-involution",
            true,
            "skipped: no edge admits a gluing-preserving flip".to_string(),
        ));
    }
    let curves = target.default_marking_curves();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut checked = 0usize;
    for _ in 0..trials {
        let cls = random_class(target, &letters, 6, &mut rng);
        let x = target.act(&cls, &curves[rng.gen_range(0..curves.len())]);
        for &e in &flippable {
            checked += 1;
            let once = flip(tri, &x, e)?;
            let twice = flip(tri, &once, e)?;
            if twice != x {
                failures += 1;
            }
        }
    }
    Ok(named(
        "flip-involution",
        failures == 0,
        format!("{checked} double flips on random curves, {failures} failures"),
    ))
}

/// Applying generators must preserve the parity and triangle constraints of
/// lamination coordinates at every intermediate step.
pub fn lamination_invariant_check(
    target: &LaminationTarget,
    trials: usize,
    seed: u64,
) -> Result<PropertyResult> {
    let letters = generator_letters(target)?;
    let curves = target.default_marking_curves();
    let tri = target.triangulation();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut checked = 0usize;
    for _ in 0..trials {
        let mut cur = curves[rng.gen_range(0..curves.len())].clone();
        for _ in 0..rng.gen_range(1..=8usize) {
            cur = target.act(&letters[rng.gen_range(0..letters.len())], &cur);
            checked += 1;
            if tri.validate_coords(cur.values()).is_err() {
                failures += 1;
            }
        }
    }
    Ok(named(
        "coordinate-invariants",
        failures == 0,
        format!("{checked} generator applications validated, {failures} failures"),
    ))
}

/// The shared part of the suite: properties meaningful for any target.
fn shared_suite<T: CocycleTarget>(c: &Cocycle<T>, seed: u64) -> Result<Vec<PropertyResult>> {
    Ok(vec![
        closing_inequality_check(1000, seed)?,
        cocycle_property_check(c, 200, 10, seed ^ 1)?,
        displacement_route_check(c, 200, 12, seed ^ 2)?,
        quasi_subadditivity_check(c, 200, 12, seed ^ 3)?,
        fekete_check(c, 12)?,
        bracket_consistency_check(c, 10, 4)?,
        lyapunov_bound_check(c, 4096, 12, &[seed ^ 4, seed ^ 5, seed ^ 6])?,
        determinism_check(c)?,
    ])
}

/// Full suite for a matrix cocycle.
pub fn matrix_suite(c: &Cocycle<MatrixTarget>, seed: u64) -> Result<Vec<PropertyResult>> {
    let mut out = shared_suite(c, seed)?;
    out.push(submultiplicativity_check(c.target(), 200, 6, seed ^ 7)?);
    out.push(conjugacy_check(c, 100, 6, seed ^ 8, None)?);
    Ok(out)
}

/// Full suite for a lamination cocycle, including the homology cross-checks.
pub fn lamination_suite(c: &Cocycle<LaminationTarget>, seed: u64) -> Result<Vec<PropertyResult>> {
    let mut out = shared_suite(c, seed)?;
    out.push(conjugacy_check(c, 10, 4, seed ^ 8, Some(1e-6))?);
    out.push(homology_agreement_check(c.target(), 50, 10, 1e-6, seed ^ 9)?);
    out.push(generator_shear_check(c.target())?);
    out.push(flip_involution_check(c.target(), 200, seed ^ 10)?);
    out.push(lamination_invariant_check(c.target(), 200, seed ^ 11)?);
    Ok(out)
}
