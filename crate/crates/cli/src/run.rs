//! Command execution: parameter schemas, algorithm calls, and result
//! serialization. Every command returns a JSON result plus an optional CSV
//! trace with fixed, documented columns.

use std::fmt::Write as _;

use curverad::algorithms::{
    jsr_lower, lyapunov, metric_jsr, optimal_orbit, periodic_approx, pressure,
    zero_temperature_scan,
};
use curverad::cocycle::{Cocycle, CocycleTarget};
use curverad::oracle::{lamination_suite, matrix_suite, PropertyResult};
use curverad::symbolic::MarkovChain;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{Built, LoadedConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Lyapunov,
    PeriodicApprox,
    Jsr,
    OptimalOrbit,
    Pressure,
    ZeroTemp,
    OracleCheck,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Lyapunov => "lyapunov",
            CommandKind::PeriodicApprox => "periodic-approx",
            CommandKind::Jsr => "jsr",
            CommandKind::OptimalOrbit => "optimal-orbit",
            CommandKind::Pressure => "pressure",
            CommandKind::ZeroTemp => "zero-temp",
            CommandKind::OracleCheck => "oracle-check",
        }
    }
}

pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
    /// One human line for stdout.
    pub summary: String,
    /// Some estimate did not converge; exit stays zero, the flag is in the JSON.
    pub flagged: bool,
    /// A property suite reported failures; maps to the invariant exit code.
    pub suite_failure: Option<String>,
}

pub fn execute(kind: CommandKind, cfg: &LoadedConfig) -> curverad::Result<Outcome> {
    match (&cfg.built, kind) {
        (Built::Matrix(c), CommandKind::OracleCheck) => {
            let _: OracleParams = params_for(cfg, kind)?;
            report_suite("matrix", matrix_suite(c, cfg.seed)?, cfg.seed)
        }
        (Built::Lamination(c), CommandKind::OracleCheck) => {
            let _: OracleParams = params_for(cfg, kind)?;
            report_suite("lamination", lamination_suite(c, cfg.seed)?, cfg.seed)
        }
        (Built::Matrix(c), _) => dispatch(kind, c, cfg),
        (Built::Lamination(c), _) => dispatch(kind, c, cfg),
    }
}

fn dispatch<T: CocycleTarget>(
    kind: CommandKind,
    c: &Cocycle<T>,
    cfg: &LoadedConfig,
) -> curverad::Result<Outcome> {
    match kind {
        CommandKind::Lyapunov => run_lyapunov(c, cfg),
        CommandKind::PeriodicApprox => run_periodic(c, cfg),
        CommandKind::Jsr => run_jsr(c, cfg),
        CommandKind::OptimalOrbit => run_optimal(c, cfg),
        CommandKind::Pressure => run_pressure(c, cfg),
        CommandKind::ZeroTemp => run_zero_temp(c, cfg),
        CommandKind::OracleCheck => unreachable!("handled per target"),
    }
}

fn params_for<P: serde::de::DeserializeOwned>(
    cfg: &LoadedConfig,
    kind: CommandKind,
) -> curverad::Result<P> {
    serde_json::from_value(cfg.params.clone())
        .map_err(|e| curverad::Error::input(format!("parameters for {}: {e}", kind.name())))
}

/// Chain driving the sampled-orbit commands. Defaults to the maximal-entropy
/// chain of the configured system.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ChainSpec {
    Parry,
    Bernoulli { p: Vec<f64> },
    Markov { transition: Vec<Vec<f64>> },
}

fn chain_for<T: CocycleTarget>(
    c: &Cocycle<T>,
    spec: &Option<ChainSpec>,
) -> curverad::Result<MarkovChain> {
    match spec {
        None | Some(ChainSpec::Parry) => MarkovChain::parry(c.system()),
        Some(ChainSpec::Bernoulli { p }) => MarkovChain::bernoulli(p),
        Some(ChainSpec::Markov { transition }) => MarkovChain::new(transition.clone()),
    }
}

fn seed_list(explicit: &Option<Vec<u64>>, default_seed: u64) -> curverad::Result<Vec<u64>> {
    match explicit {
        None => Ok(vec![default_seed]),
        Some(s) if s.is_empty() => Err(curverad::Error::input("\"seeds\" must be non-empty")),
        Some(s) => Ok(s.clone()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LyapunovParams {
    n: usize,
    #[serde(default)]
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    chain: Option<ChainSpec>,
}

fn run_lyapunov<T: CocycleTarget>(c: &Cocycle<T>, cfg: &LoadedConfig) -> curverad::Result<Outcome> {
    let p: LyapunovParams = params_for(cfg, CommandKind::Lyapunov)?;
    let chain = chain_for(c, &p.chain)?;
    let seeds = seed_list(&p.seeds, cfg.seed)?;
    let mut runs = Vec::with_capacity(seeds.len());
    let mut csv = String::from("seed,n,average\n");
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &s in &seeds {
        let est = lyapunov(c, &chain, p.n, s)?;
        for (j, avg) in &est.trace {
            let _ = writeln!(csv, "{s},{j},{avg}");
        }
        lo = lo.min(est.value);
        hi = hi.max(est.value);
        runs.push(json!({
            "seed": s,
            "value": est.value,
            "trace": est.trace,
        }));
    }
    let summary = if seeds.len() == 1 {
        format!("drift average {lo:.6} at n = {}", p.n)
    } else {
        format!("drift averages in [{lo:.6}, {hi:.6}] at n = {} over {} seeds", p.n, seeds.len())
    };
    Ok(Outcome {
        result: json!({ "n": p.n, "runs": runs }),
        csv: Some(csv),
        summary,
        flagged: false,
        suite_failure: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PeriodicParams {
    eps: f64,
    n0: usize,
    #[serde(default)]
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    chain: Option<ChainSpec>,
}

fn run_periodic<T: CocycleTarget>(c: &Cocycle<T>, cfg: &LoadedConfig) -> curverad::Result<Outcome> {
    let p: PeriodicParams = params_for(cfg, CommandKind::PeriodicApprox)?;
    let chain = chain_for(c, &p.chain)?;
    let seeds = seed_list(&p.seeds, cfg.seed)?;
    let mut runs = Vec::with_capacity(seeds.len());
    let mut csv = String::from("seed,converged,period,periodic_value,lambda_hat,gap,n_used,attempts\n");
    let mut successes = 0usize;
    for &s in &seeds {
        let r = periodic_approx(c, &chain, p.eps, s, p.n0)?;
        successes += r.converged as usize;
        let period = r.period.map(|k| k.to_string()).unwrap_or_default();
        let pv = r.periodic_value.map(|v| v.to_string()).unwrap_or_default();
        let gap = r.gap.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{s},{},{period},{pv},{},{gap},{},{}",
            r.converged, r.lambda_hat, r.n_used, r.attempts
        );
        runs.push(json!({
            "seed": s,
            "converged": r.converged,
            "attempts": r.attempts,
            "n_used": r.n_used,
            "period": r.period,
            "word": r.word.as_ref().map(|w| w.symbols().to_vec()),
            "periodic_value": r.periodic_value,
            "lambda_hat": r.lambda_hat,
            "gap": r.gap,
        }));
    }
    let flagged = successes < seeds.len();
    let summary = format!(
        "{successes}/{} seeds closed into a periodic word (eps = {}, n0 = {})",
        seeds.len(),
        p.eps,
        p.n0
    );
    Ok(Outcome {
        result: json!({
            "eps": p.eps,
            "n0": p.n0,
            "successes": successes,
            "runs": runs,
        }),
        csv: Some(csv),
        summary,
        flagged,
        suite_failure: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsrParams {
    n: usize,
    k_max: usize,
}

fn run_jsr<T: CocycleTarget>(c: &Cocycle<T>, cfg: &LoadedConfig) -> curverad::Result<Outcome> {
    let p: JsrParams = params_for(cfg, CommandKind::Jsr)?;
    let bracket = metric_jsr(c, p.n, p.k_max)?;
    // Lower bounds per level for the trace; short levels may have no
    // admissible cycle yet, which is an empty cell rather than an error.
    let mut lower_by_level: Vec<Option<f64>> = Vec::with_capacity(p.n);
    let mut last = None;
    for j in 1..=p.n {
        if j <= p.k_max {
            last = match jsr_lower(c, j) {
                Ok((v, _)) => Some(v),
                Err(curverad::Error::Input(_)) => None,
                Err(e) => return Err(e),
            };
        }
        lower_by_level.push(last);
    }
    let mut csv = String::from("n,upper,lower\n");
    let mut trace = Vec::with_capacity(p.n);
    for ((j, upper), lower) in bracket.upper_trace.iter().zip(&lower_by_level) {
        match lower {
            Some(l) => {
                let _ = writeln!(csv, "{j},{upper},{l}");
            }
            None => {
                let _ = writeln!(csv, "{j},{upper},");
            }
        }
        trace.push(json!([j, upper, lower]));
    }
    let summary = format!(
        "bracket [{:.6}, {:.6}] (width {:.2e}), witness period {}",
        bracket.lower,
        bracket.upper,
        bracket.upper - bracket.lower,
        bracket.witness.len()
    );
    Ok(Outcome {
        result: json!({
            "n": p.n,
            "k_max": p.k_max,
            "lower": bracket.lower,
            "upper": bracket.upper,
            "rho_lower": bracket.rho_lower,
            "rho_upper": bracket.rho_upper,
            "witness": bracket.witness.symbols().to_vec(),
            "witness_translation_length": bracket.witness_translation_length,
            "upper_level": bracket.upper_level,
            "slack": bracket.slack,
            "trace": trace,
        }),
        csv: Some(csv),
        summary,
        flagged: false,
        suite_failure: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimalParams {
    k_max: usize,
}

fn run_optimal<T: CocycleTarget>(c: &Cocycle<T>, cfg: &LoadedConfig) -> curverad::Result<Outcome> {
    let p: OptimalParams = params_for(cfg, CommandKind::OptimalOrbit)?;
    let orbit = optimal_orbit(c, p.k_max)?;
    let mut csv = String::from("m,average\n");
    for (m, avg) in &orbit.trace {
        let _ = writeln!(csv, "{m},{avg}");
    }
    let summary = format!(
        "exponent {:.6} on a period-{} cycle, realized by marking curve {}",
        orbit.exponent,
        orbit.word.len(),
        orbit.eta
    );
    Ok(Outcome {
        result: json!({
            "k_max": p.k_max,
            "word": orbit.word.symbols().to_vec(),
            "exponent": orbit.exponent,
            "eta": orbit.eta,
            "trace": orbit.trace,
        }),
        csv: Some(csv),
        summary,
        flagged: false,
        suite_failure: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PressureParams {
    n: usize,
    q_list: Vec<f64>,
}

fn run_pressure<T: CocycleTarget>(c: &Cocycle<T>, cfg: &LoadedConfig) -> curverad::Result<Outcome> {
    let p: PressureParams = params_for(cfg, CommandKind::Pressure)?;
    if p.q_list.is_empty() {
        return Err(curverad::Error::input("\"q_list\" must be non-empty"));
    }
    if p.q_list.iter().any(|q| !q.is_finite()) {
        return Err(curverad::Error::input("\"q_list\" entries must be finite"));
    }
    let mut values = Vec::with_capacity(p.q_list.len());
    let mut pairs = Vec::with_capacity(p.q_list.len());
    let mut csv = String::from("q,pressure\n");
    for &q in &p.q_list {
        let v = pressure(c, q, p.n)?;
        let _ = writeln!(csv, "{q},{v}");
        values.push(json!({ "q": q, "pressure": v }));
        pairs.push((q, v));
    }
    let summary = match pairs.as_slice() {
        [(q, v)] => format!("pressure at n = {}: P({q}) = {v:.6}", p.n),
        _ => format!("pressure at n = {} for {} values of q", p.n, pairs.len()),
    };
    Ok(Outcome {
        result: json!({ "n": p.n, "values": values }),
        csv: Some(csv),
        summary,
        flagged: false,
        suite_failure: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZeroTempParams {
    n: usize,
    q_list: Vec<f64>,
}

fn run_zero_temp<T: CocycleTarget>(c: &Cocycle<T>, cfg: &LoadedConfig) -> curverad::Result<Outcome> {
    let p: ZeroTempParams = params_for(cfg, CommandKind::ZeroTemp)?;
    let curve = zero_temperature_scan(c, &p.q_list, p.n)?;
    let mut csv = String::from("q,pressure,ratio,gibbs_mean,concentration\n");
    for i in 0..curve.qs.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            curve.qs[i], curve.pressures[i], curve.ratios[i], curve.gibbs_mean[i],
            curve.concentration[i]
        );
    }
    let summary = format!(
        "P_n(q)/q falls to {:.6} at q = {} against best word average {:.6}",
        curve.ratios.last().expect("non-empty grid"),
        curve.qs.last().expect("non-empty grid"),
        curve.max_word_average
    );
    Ok(Outcome {
        result: json!({
            "n": curve.n,
            "qs": curve.qs,
            "pressures": curve.pressures,
            "ratios": curve.ratios,
            "gibbs_mean": curve.gibbs_mean,
            "concentration": curve.concentration,
            "max_word_average": curve.max_word_average,
            "ln_word_count": curve.ln_word_count,
        }),
        csv: Some(csv),
        summary,
        flagged: false,
        suite_failure: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleParams {}

fn report_suite(
    suite: &str,
    results: Vec<PropertyResult>,
    seed: u64,
) -> curverad::Result<Outcome> {
    let failed: Vec<&str> =
        results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    let properties: Vec<Value> = results
        .iter()
        .map(|r| json!({ "name": r.name, "passed": r.passed, "detail": r.detail }))
        .collect();
    let summary = format!(
        "{}/{} properties passed ({suite} suite)",
        results.len() - failed.len(),
        results.len()
    );
    let suite_failure = (!failed.is_empty())
        .then(|| format!("{suite} suite failed: {}", failed.join(", ")));
    Ok(Outcome {
        result: json!({
            "suite": suite,
            "seed": seed,
            "all_passed": failed.is_empty(),
            "properties": properties,
        }),
        csv: None,
        summary,
        flagged: false,
        suite_failure,
    })
}
