//! Experiment configs: JSON schema, validation, and construction of the
//! configured system, target, and cocycle.
//!
//! Configs are plain JSON objects. Validation errors carry a line hint: exact
//! for parse errors, best-effort (first occurrence of the offending token)
//! for semantic ones. The original parsed document is kept as the echo that
//! result files embed, with the effective seed and thread cap substituted, so
//! a result can be re-run from its own echo byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use curverad::cocycle::{Cocycle, GeneratorWord};
use curverad::lamination::{
    preset_punctured_torus, FlipWordClass, LamCoords, LaminationTarget, Move, Triangulation,
};
use curverad::matrix::{MatrixTarget, RationalMatrix};
use curverad::numeric::parse_rational;
use curverad::symbolic::TransitionSystem;
use curverad::{BigInt, BigRational};
use serde_json::{Map, Value};

/// Config-stage failure with an optional token to locate in the source text.
#[derive(Debug)]
struct ConfigError {
    message: String,
    line: Option<usize>,
    needle: Option<String>,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        ConfigError { message: message.into(), line: None, needle: None }
    }

    fn at(message: impl Into<String>, needle: impl Into<String>) -> Self {
        ConfigError { message: message.into(), line: None, needle: Some(needle.into()) }
    }
}

type CResult<T> = Result<T, ConfigError>;

/// 1-based line of the first occurrence of `needle`, preferring its quoted
/// form so field names match keys rather than prose.
fn locate(raw: &str, needle: &str) -> Option<usize> {
    let quoted = format!("{needle:?}");
    let idx = raw.find(&quoted).or_else(|| raw.find(needle))?;
    Some(raw[..idx].bytes().filter(|&b| b == b'\n').count() + 1)
}

/// First `"quoted"` or `` `ticked` `` token of a message, for line lookup of
/// errors that bubble up from the library or serde.
fn quoted_token(message: &str) -> Option<String> {
    for (open, close) in [('"', '"'), ('`', '`')] {
        if let Some(start) = message.find(open) {
            let rest = &message[start + 1..];
            if let Some(len) = rest.find(close) {
                if len > 0 {
                    return Some(rest[..len].to_string());
                }
            }
        }
    }
    None
}

fn render(err: &ConfigError, path: &Path, raw: &str) -> String {
    let line = err
        .line
        .or_else(|| err.needle.as_deref().and_then(|n| locate(raw, n)))
        .or_else(|| quoted_token(&err.message).and_then(|n| locate(raw, &n)));
    match line {
        Some(l) => format!("config error: {}:{l}: {}", path.display(), err.message),
        None => format!("config error: {}: {}", path.display(), err.message),
    }
}

/// Formats a runtime `Error::Input` against the config it came from, with the
/// same line-hint heuristics as load-time errors.
pub fn describe_input_error(path: &Path, raw: &str, message: &str) -> String {
    render(&ConfigError::new(message), path, raw)
}

/// The configured cocycle, one variant per target family.
pub enum Built {
    Matrix(Cocycle<MatrixTarget>),
    Lamination(Cocycle<LaminationTarget>),
}

pub struct OutputPaths {
    pub json: Option<String>,
    pub csv: Option<String>,
}

pub struct LoadedConfig {
    pub raw: String,
    /// Original document with the effective seed and thread cap filled in.
    pub echo: Value,
    pub seed: u64,
    pub threads: Option<usize>,
    pub params: Value,
    pub output: OutputPaths,
    pub built: Built,
}

/// Reads, validates, and builds a config. Flag values override the file.
/// Errors come back fully rendered for stderr.
pub fn load(
    path: &Path,
    seed_flag: Option<u64>,
    threads_flag: Option<usize>,
) -> Result<LoadedConfig, String> {
    let raw = match fs::read_to_string(path) {
        Ok(r) => r,
        Err(e) => return Err(format!("config error: {}: {e}", path.display())),
    };
    match build(&raw, seed_flag, threads_flag) {
        Ok(l) => Ok(l),
        Err(e) => Err(render(&e, path, &raw)),
    }
}

fn build(raw: &str, seed_flag: Option<u64>, threads_flag: Option<usize>) -> CResult<LoadedConfig> {
    let root: Value = serde_json::from_str(raw).map_err(|e| ConfigError {
        message: format!("malformed JSON: {e}"),
        line: Some(e.line().max(1)),
        needle: None,
    })?;
    let obj = root.as_object().ok_or_else(|| ConfigError {
        message: "top level must be a JSON object".to_string(),
        line: Some(1),
        needle: None,
    })?;
    const KNOWN: [&str; 8] =
        ["system", "target", "cocycle", "marking", "seed", "threads", "params", "output"];
    for k in obj.keys() {
        if !KNOWN.contains(&k.as_str()) {
            return Err(ConfigError::at(format!("unknown field {k:?}"), k));
        }
    }

    let system = parse_system(required(obj, "system")?)?;
    let built = build_cocycle(obj, &system)?;

    let seed = match obj.get("seed") {
        None => seed_flag.unwrap_or(0),
        Some(v) => seed_flag.unwrap_or(as_u64(v, "seed")?),
    };
    let threads = match obj.get("threads") {
        None => threads_flag,
        Some(v) => {
            let t = as_usize(v, "threads")?;
            if t == 0 {
                return Err(ConfigError::at("thread count must be positive", "threads"));
            }
            Some(threads_flag.unwrap_or(t))
        }
    };
    let params = match obj.get("params") {
        None => Value::Object(Map::new()),
        Some(v) if v.is_object() => v.clone(),
        Some(_) => return Err(ConfigError::at("\"params\" must be an object", "params")),
    };
    let output = parse_output(obj.get("output"))?;

    let mut echo = root.clone();
    echo["seed"] = Value::from(seed);
    if let Some(t) = threads {
        echo["threads"] = Value::from(t);
    }

    Ok(LoadedConfig { raw: raw.to_string(), echo, seed, threads, params, output, built })
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str) -> CResult<&'a Value> {
    obj.get(key).ok_or_else(|| ConfigError::new(format!("missing required field {key:?}")))
}

fn as_section<'a>(v: &'a Value, name: &str) -> CResult<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| ConfigError::at(format!("{name:?} must be an object"), name))
}

fn as_u64(v: &Value, name: &str) -> CResult<u64> {
    v.as_u64()
        .ok_or_else(|| ConfigError::at(format!("{name:?} must be a non-negative integer"), name))
}

fn as_usize(v: &Value, name: &str) -> CResult<usize> {
    Ok(as_u64(v, name)? as usize)
}

fn as_str<'a>(v: &'a Value, name: &str) -> CResult<&'a str> {
    v.as_str().ok_or_else(|| ConfigError::at(format!("{name:?} must be a string"), name))
}

fn as_array<'a>(v: &'a Value, name: &str) -> CResult<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| ConfigError::at(format!("{name:?} must be an array"), name))
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], section: &str) -> CResult<()> {
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(ConfigError::at(format!("unknown field {k:?} in {section:?}"), k));
        }
    }
    Ok(())
}

fn kind_of<'a>(obj: &'a Map<String, Value>, section: &str) -> CResult<&'a str> {
    match obj.get("kind") {
        Some(v) => as_str(v, "kind"),
        None => Err(ConfigError::at(format!("{section:?} needs a \"kind\" field"), section)),
    }
}

/// Wraps a library rejection, pointing the line hint at `hint` unless the
/// message itself names a token that appears in the config.
fn from_core(e: curverad::Error, hint: &str) -> ConfigError {
    let msg = e.to_string();
    match quoted_token(&msg) {
        Some(tok) => ConfigError::at(msg, tok),
        None => ConfigError::at(msg, hint),
    }
}

fn parse_system(v: &Value) -> CResult<TransitionSystem> {
    let obj = as_section(v, "system")?;
    match kind_of(obj, "system")? {
        "full_shift" => {
            check_keys(obj, &["kind", "alphabet"], "system")?;
            let k = as_usize(required(obj, "alphabet")?, "alphabet")?;
            TransitionSystem::full_shift(k).map_err(|e| from_core(e, "alphabet"))
        }
        "sft" => {
            check_keys(obj, &["kind", "transitions"], "system")?;
            let rows_v = as_array(required(obj, "transitions")?, "transitions")?;
            let mut rows = Vec::with_capacity(rows_v.len());
            for row_v in rows_v {
                let row = as_array(row_v, "transitions")?;
                let mut out = Vec::with_capacity(row.len());
                for e in row {
                    match e.as_u64() {
                        Some(0) => out.push(0u8),
                        Some(1) => out.push(1u8),
                        _ => {
                            return Err(ConfigError::at(
                                "transition entries must be 0 or 1",
                                "transitions",
                            ))
                        }
                    }
                }
                rows.push(out);
            }
            TransitionSystem::from_matrix(&rows).map_err(|e| from_core(e, "transitions"))
        }
        other => Err(ConfigError::at(
            format!("unknown system kind {other:?}; expected \"full_shift\" or \"sft\""),
            other,
        )),
    }
}

/// Integer literal or `"a/b"` rational string.
fn scalar(v: &Value, context: &str) -> CResult<BigRational> {
    if let Some(i) = v.as_i64() {
        return Ok(BigRational::from_integer(BigInt::from(i)));
    }
    if let Some(s) = v.as_str() {
        return parse_rational(s).map_err(|e| from_core(e, context));
    }
    Err(ConfigError::at(
        format!("entries in {context:?} must be integers or rational strings like \"3/2\""),
        context,
    ))
}

fn parse_rows(v: &Value, context: &str) -> CResult<Vec<Vec<BigRational>>> {
    let rows_v = as_array(v, context)?;
    let mut rows = Vec::with_capacity(rows_v.len());
    for row_v in rows_v {
        let row = as_array(row_v, context)?;
        rows.push(row.iter().map(|e| scalar(e, context)).collect::<CResult<Vec<_>>>()?);
    }
    Ok(rows)
}

fn parse_matrix(v: &Value, context: &str) -> CResult<RationalMatrix> {
    RationalMatrix::from_rows(&parse_rows(v, context)?).map_err(|e| from_core(e, context))
}

fn parse_edge_tuple<const N: usize>(v: &Value, context: &str) -> CResult<[usize; N]> {
    let items = as_array(v, context)?;
    if items.len() != N {
        return Err(ConfigError::at(
            format!("each entry of {context:?} must list exactly {N} edges"),
            context,
        ));
    }
    let mut out = [0usize; N];
    for (slot, item) in out.iter_mut().zip(items) {
        *slot = as_usize(item, context)?;
    }
    Ok(out)
}

fn parse_moves(v: &Value, gen_name: &str) -> CResult<Vec<Move>> {
    let items = as_array(v, gen_name)?;
    let mut moves = Vec::with_capacity(items.len());
    for item in items {
        let parts = as_array(item, gen_name)?;
        let tag = parts.first().and_then(Value::as_str);
        match tag {
            Some("flip") if parts.len() == 2 => {
                moves.push(Move::Flip(as_usize(&parts[1], gen_name)?));
            }
            Some("relabel") if parts.len() == 2 => {
                let perm = as_array(&parts[1], gen_name)?
                    .iter()
                    .map(|e| as_usize(e, gen_name))
                    .collect::<CResult<Vec<_>>>()?;
                moves.push(Move::Relabel(perm));
            }
            _ => {
                return Err(ConfigError::at(
                    format!(
                        "moves of generator {gen_name:?} must be [\"flip\", edge] or \
                         [\"relabel\", [permutation]]"
                    ),
                    gen_name,
                ))
            }
        }
    }
    Ok(moves)
}

fn parse_coords(v: &Value, tri: &Triangulation, context: &str) -> CResult<Vec<LamCoords>> {
    let rows = as_array(v, context)?;
    let mut out = Vec::with_capacity(rows.len());
    for row_v in rows {
        let row = as_array(row_v, context)?;
        let mut ints = Vec::with_capacity(row.len());
        for e in row {
            ints.push(e.as_i64().ok_or_else(|| {
                ConfigError::at(
                    format!("curve coordinates in {context:?} must be integers"),
                    context,
                )
            })?);
        }
        out.push(LamCoords::from_ints(tri, &ints).map_err(|e| from_core(e, context))?);
    }
    Ok(out)
}

fn parse_surface(v: &Value) -> CResult<LaminationTarget> {
    let obj = as_section(v, "surface")?;
    check_keys(obj, &["edges", "triangles", "quads", "generators", "marking"], "surface")?;
    let edges = as_usize(required(obj, "edges")?, "edges")?;
    let triangles = as_array(required(obj, "triangles")?, "triangles")?
        .iter()
        .map(|t| parse_edge_tuple::<3>(t, "triangles"))
        .collect::<CResult<Vec<_>>>()?;
    let quads = as_array(required(obj, "quads")?, "quads")?
        .iter()
        .map(|q| parse_edge_tuple::<4>(q, "quads"))
        .collect::<CResult<Vec<_>>>()?;
    let tri = Triangulation::new(edges, triangles, quads).map_err(|e| from_core(e, "edges"))?;

    let gens_obj = as_section(required(obj, "generators")?, "generators")?;
    let mut generators = BTreeMap::new();
    for (name, spec) in gens_obj {
        let spec_obj = as_section(spec, name)?;
        check_keys(spec_obj, &["moves", "homology"], name)?;
        let moves = parse_moves(required(spec_obj, "moves")?, name)?;
        let homology = match spec_obj.get("homology") {
            None => None,
            Some(h) => Some(parse_matrix(h, name)?),
        };
        generators.insert(name.clone(), FlipWordClass::new(moves, homology));
    }

    let marking = parse_coords(required(obj, "marking")?, &tri, "marking")?;
    LaminationTarget::new(tri, generators, marking).map_err(|e| from_core(e, "generators"))
}

fn build_cocycle(obj: &Map<String, Value>, system: &TransitionSystem) -> CResult<Built> {
    let target_obj = as_section(required(obj, "target")?, "target")?;
    let words = parse_words(required(obj, "cocycle")?)?;
    let marking = obj.get("marking");

    match kind_of(target_obj, "target")? {
        "matrix" => {
            if marking.is_some() {
                return Err(ConfigError::at(
                    "marking override is not supported for matrix targets; displacement over \
                     the basis marking is the exact operator norm the bounds are certified by",
                    "marking",
                ));
            }
            check_keys(target_obj, &["kind", "dimension", "generators"], "target")?;
            let d = as_usize(required(target_obj, "dimension")?, "dimension")?;
            let gens_obj = as_section(required(target_obj, "generators")?, "generators")?;
            let mut generators = BTreeMap::new();
            for (name, rows) in gens_obj {
                generators.insert(name.clone(), parse_matrix(rows, name)?);
            }
            let target = MatrixTarget::new(d, generators).map_err(|e| from_core(e, "dimension"))?;
            let c = Cocycle::new(system.clone(), target, words)
                .map_err(|e| from_core(e, "cocycle"))?;
            Ok(Built::Matrix(c))
        }
        "lamination" => {
            check_keys(target_obj, &["kind", "preset", "surface"], "target")?;
            let target = match (target_obj.get("preset"), target_obj.get("surface")) {
                (Some(p), None) => {
                    let name = as_str(p, "preset")?;
                    if name != "punctured_torus" {
                        return Err(ConfigError::at(
                            format!("unknown preset {name:?}; available: \"punctured_torus\""),
                            name,
                        ));
                    }
                    preset_punctured_torus()
                }
                (None, Some(s)) => parse_surface(s)?,
                _ => {
                    return Err(ConfigError::at(
                        "lamination target needs exactly one of \"preset\" or \"surface\"",
                        "target",
                    ))
                }
            };
            let target = match marking {
                None => target,
                Some(m) => {
                    let curves = parse_coords(m, target.triangulation(), "marking")?;
                    target.with_marking(curves).map_err(|e| from_core(e, "marking"))?
                }
            };
            let c = Cocycle::new(system.clone(), target, words)
                .map_err(|e| from_core(e, "cocycle"))?;
            Ok(Built::Lamination(c))
        }
        other => Err(ConfigError::at(
            format!("unknown target kind {other:?}; expected \"matrix\" or \"lamination\""),
            other,
        )),
    }
}

fn parse_words(v: &Value) -> CResult<Vec<GeneratorWord>> {
    let items = as_array(v, "cocycle")?;
    items
        .iter()
        .map(|w| {
            let text = as_str(w, "cocycle")?;
            GeneratorWord::parse(text).map_err(|e| from_core(e, "cocycle"))
        })
        .collect()
}

fn parse_output(v: Option<&Value>) -> CResult<OutputPaths> {
    let Some(v) = v else {
        return Ok(OutputPaths { json: None, csv: None });
    };
    let obj = as_section(v, "output")?;
    check_keys(obj, &["json", "csv"], "output")?;
    let get = |key: &str| -> CResult<Option<String>> {
        match obj.get(key) {
            None => Ok(None),
            Some(p) => Ok(Some(as_str(p, key)?.to_string())),
        }
    };
    Ok(OutputPaths { json: get("json")?, csv: get("csv")? })
}
