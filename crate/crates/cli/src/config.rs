use std::fmt;
use std::path::Path;

use gibbs_core::models::ModelSpec;
use gibbs_core::GibbsError;
use serde::Deserialize;
use serde_json::{Map, Value};

/// Error carrying the process exit code: 1 for a failed run or check, 2 for
/// bad usage or configuration.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: msg.into(),
        }
    }

    pub fn failure(msg: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<GibbsError> for CliError {
    fn from(e: GibbsError) -> Self {
        match e {
            GibbsError::Estimation { .. } | GibbsError::Numerical(_) => Self::failure(e.to_string()),
            _ => Self::usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::failure(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Keys read by the front end; everything else describes the model.
const RUN_KEYS: [&str; 7] = [
    "boltzmann_constant",
    "b",
    "omega",
    "beta",
    "delta",
    "epsilon",
    "closed_form_bias",
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub boltzmann_constant: f64,
    /// Parameter given in the file, used when no `--b` flag is passed.
    pub b: Option<Vec<f64>>,
    /// Test hook: multiplies the closed-form partition function by `1 + bias`.
    pub closed_form_bias: f64,
}

fn number(map: &Map<String, Value>, key: &str) -> CliResult<Option<f64>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| CliError::usage(format!("`{key}` must be a number"))),
    }
}

fn vector(map: &Map<String, Value>, key: &str, len: Option<usize>) -> CliResult<Option<Vec<f64>>> {
    let Some(v) = map.get(key) else {
        return Ok(None);
    };
    let out: Vec<f64> = match v {
        Value::Number(n) => vec![n.as_f64().unwrap_or(f64::NAN)],
        Value::Array(a) => a
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| CliError::usage(format!("`{key}` must hold numbers")))
            })
            .collect::<CliResult<_>>()?,
        _ => return Err(CliError::usage(format!("`{key}` must be a number or an array"))),
    };
    if let Some(n) = len {
        if out.len() != n {
            return Err(CliError::usage(format!(
                "`{key}` needs {n} components, got {}",
                out.len()
            )));
        }
    }
    Ok(Some(out))
}

impl RunConfig {
    pub fn from_value(value: Value) -> CliResult<Self> {
        let Value::Object(mut map) = value else {
            return Err(CliError::usage("config must be a JSON object"));
        };
        let boltzmann_constant = number(&map, "boltzmann_constant")?.unwrap_or(1.0);
        if !(boltzmann_constant > 0.0 && boltzmann_constant.is_finite()) {
            return Err(CliError::usage("boltzmann_constant must be positive"));
        }
        let closed_form_bias = number(&map, "closed_form_bias")?.unwrap_or(0.0);
        if !(closed_form_bias > -1.0 && closed_form_bias.is_finite()) {
            return Err(CliError::usage("closed_form_bias must exceed -1"));
        }
        let mut b = vector(&map, "b", None)?;
        if let Some(eps) = number(&map, "epsilon")? {
            if b.is_some() {
                return Err(CliError::usage("give either `b` or omega/beta/delta/epsilon"));
            }
            let mut g = Vec::with_capacity(10);
            for key in ["omega", "beta", "delta"] {
                g.extend(vector(&map, key, Some(3))?.unwrap_or_else(|| vec![0.0; 3]));
            }
            g.push(eps);
            b = Some(g);
        } else if ["omega", "beta", "delta"].iter().any(|k| map.contains_key(*k)) {
            return Err(CliError::usage("omega/beta/delta need `epsilon`"));
        }
        for k in RUN_KEYS {
            map.remove(k);
        }
        let model: ModelSpec = serde_json::from_value(Value::Object(map))
            .map_err(|e| CliError::usage(format!("bad model config: {e}")))?;
        Ok(Self {
            model,
            boltzmann_constant,
            b,
            closed_form_bias,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_value(read_json(path)?)
    }
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{} is not valid JSON: {e}", path.display())))
}

/// Two subsystems exchanging energy.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibrateConfig {
    pub model_a: Value,
    pub model_b: Value,
    pub b_a: f64,
    pub b_b: f64,
    #[serde(default = "unit")]
    pub boltzmann_constant: f64,
}

fn unit() -> f64 {
    1.0
}

impl EquilibrateConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        serde_json::from_value(read_json(path)?).map_err(|e| CliError::usage(format!("bad equilibrate config: {e}")))
    }
}

/// Parses `0.5` or `0.1,0.2,0.3`.
pub fn parse_vector(text: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("cannot parse `{s}` as a number")))
        })
        .collect::<CliResult<_>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::usage(format!("non-finite value in `{text}`")));
    }
    Ok(v)
}

/// `steps` points from `lo` to `hi` inclusive, componentwise.
pub fn linear_grid(lo: &[f64], hi: &[f64], steps: usize) -> CliResult<Vec<Vec<f64>>> {
    if lo.len() != hi.len() {
        return Err(CliError::usage("--b-min and --b-max have different lengths"));
    }
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return Err(CliError::usage("b range must be ascending"));
    }
    if steps == 0 {
        return Err(CliError::usage("empty b grid: --steps must be at least 1"));
    }
    if steps == 1 {
        return Ok(vec![lo.to_vec()]);
    }
    Ok((0..steps)
        .map(|k| {
            let t = k as f64 / (steps - 1) as f64;
            lo.iter().zip(hi).map(|(a, b)| a + t * (b - a)).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn splits_run_keys_from_model() {
        let c = RunConfig::from_value(json!({
            "model": "ideal_gas", "volume": 2.0, "masses": [1.0],
            "boltzmann_constant": 2.0, "b": 0.5
        }))
        .unwrap();
        assert_eq!(c.model.name(), "ideal_gas");
        assert_eq!(c.boltzmann_constant, 2.0);
        assert_eq!(c.b, Some(vec![0.5]));
    }

    #[test]
    fn galilean_keys_assemble_b() {
        let c = RunConfig::from_value(json!({
            "model": "vessel", "cylinder_radius": 1.0, "height": 1.0, "masses": [1.0],
            "omega": [0.0, 0.0, 2.0], "epsilon": -1.0
        }))
        .unwrap();
        let b = c.b.unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b[2], 2.0);
        assert_eq!(b[9], -1.0);
        assert!(RunConfig::from_value(json!({"model": "sphere", "radius": 1.0, "omega": [1, 0, 0]})).is_err());
    }

    #[test]
    fn grids() {
        let g = linear_grid(&[0.5], &[5.0], 10).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[9], vec![5.0]);
        assert!(linear_grid(&[1.0], &[0.5], 3).is_err());
        assert_eq!(linear_grid(&[1.0], &[2.0], 0).unwrap_err().code, 2);
        assert_eq!(parse_vector("0.1, 0.2,3").unwrap(), vec![0.1, 0.2, 3.0]);
        assert!(parse_vector("x").is_err());
    }
}
