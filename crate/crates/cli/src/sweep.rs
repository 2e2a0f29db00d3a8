//! One-parameter sweeps: one artifact directory per grid point.

use serde_json::{json, Value};

use crate::config::{from_value, Mode, RunConfig};
use crate::error::{CliError, Result};
use crate::output::json_bytes;
use crate::run::{self, Artifacts, Options};

/// Seed of sweep point `index`, a SplitMix64 mix of the base seed.
pub fn derive_seed(base: u64, index: usize) -> u64 {
    let mut z = base.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
enum Step {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> Result<Vec<Step>> {
    let bad = || CliError::config("sweep.param", format!("cannot parse path `{path}`"));
    let mut steps = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if key.is_empty() {
            return Err(bad());
        }
        steps.push(Step::Key(key.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            if !rest.starts_with('[') {
                return Err(bad());
            }
            steps.push(Step::Index(rest[1..close].parse().map_err(|_| bad())?));
            rest = &rest[close + 1..];
        }
    }
    Ok(steps)
}

/// Replaces the scalar at `path` (e.g. `system.kappa[0][1]`). Integral
/// fields stay integral.
pub fn set_scalar(doc: &mut Value, path: &str, value: f64) -> Result<()> {
    let missing = || CliError::config("sweep.param", format!("`{path}` does not name a field of the config"));
    let mut cur = doc;
    for step in parse_path(path)? {
        cur = match step {
            Step::Key(k) => cur.get_mut(&k),
            Step::Index(i) => cur.get_mut(i),
        }
        .ok_or_else(missing)?;
    }
    let new = match cur {
        Value::Number(n) if n.is_u64() || n.is_i64() => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(CliError::config(path, format!("integer field cannot take the value {value}")));
            }
            json!(value as u64)
        }
        Value::Number(_) => json!(value),
        _ => return Err(CliError::config(path, "sweep target must be a numeric scalar")),
    };
    *cur = new;
    Ok(())
}

/// Runs every grid point of `cfg.sweep`, each in `point_NNNN/`.
pub fn compute(cfg: &RunConfig, opts: &Options) -> Result<Artifacts> {
    let section = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::config("sweep", "sweep mode needs a `sweep` section or --param/--values"))?;
    let mut base = serde_json::to_value(cfg)?;
    base.as_object_mut().expect("config is an object").remove("sweep");
    let points: Vec<Result<(RunConfig, Artifacts)>> = opts.policy.map_range(section.values.len(), |i| {
        let mut doc = base.clone();
        set_scalar(&mut doc, &section.param, section.values[i])?;
        let mut point = from_value(doc)?;
        point.run.mode = section.point_mode;
        point.run.seed = derive_seed(cfg.run.seed, i);
        let point_opts = Options { seed: None, ..opts.clone() };
        let artifacts = run::compute(&point, &point_opts)?;
        Ok((point, artifacts))
    });
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for (i, point) in points.into_iter().enumerate() {
        let (point, artifacts) = point?;
        let dir = format!("point_{i:04}");
        rows.push(json!({
            "index": i,
            "value": section.values[i],
            "seed": point.run.seed,
            "directory": dir,
            "config_sha256": run::config_hash(&point)?,
            "achieved": artifacts.summary,
        }));
        for (name, bytes) in artifacts.files {
            files.push((format!("{dir}/{name}"), bytes));
        }
    }
    let summary = json!({ "param": section.param, "point_mode": section.point_mode.name(), "points": rows });
    files.push(("sweep.json".to_string(), json_bytes(&summary)?));
    let manifest = run::manifest(cfg, opts, &files, &summary)?;
    files.push((cfg.output.manifest.clone(), json_bytes(&manifest)?));
    debug_assert_eq!(cfg.run.mode, Mode::Sweep);
    Ok(Artifacts { files, summary })
}
