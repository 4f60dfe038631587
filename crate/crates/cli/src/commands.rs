use std::io::Write;

use gibbs_core::engine::Biased;
use gibbs_core::models::ModelSpec;
use gibbs_core::verify::{verify, VerifyOptions};
use gibbs_core::{Engine, GibbsError, ThermoModel};

use crate::config::{CliError, CliResult, EquilibrateConfig, RunConfig};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Temperature `1/(k b)` for scalar models, `−1/(k ε)` for the vessel.
fn temperature(model: &ModelSpec, b: &[f64], k: f64) -> Option<f64> {
    match (model, b) {
        (ModelSpec::Vessel(_), _) if b.len() == 10 => Some(-1.0 / (k * b[9])),
        (ModelSpec::Sphere(_), _) => None,
        (_, [x]) => Some(1.0 / (k * x)),
        _ => None,
    }
}

fn thermo_header(dim: usize) -> String {
    if dim == 1 {
        return "b,T,log_p,energy,entropy,var_h,status".into();
    }
    let cols = |p: &str| (0..dim).map(|i| format!("{p}_{i}")).collect::<Vec<_>>().join(",");
    format!("{},T,log_p,{},entropy,{},status", cols("b"), cols("mean"), cols("var"))
}

/// One row per grid point: `b, T, log_p, energy, entropy, var_h, status`.
/// Vector parameters expand `b`, the mean and the variance diagonal into one
/// column per component.
pub fn thermo<W: Write>(cfg: &RunConfig, grid: &[Vec<f64>], engine: &Engine, mut out: W) -> CliResult<()> {
    if grid.is_empty() {
        return Err(CliError::usage("empty b grid"));
    }
    let model = Biased {
        inner: cfg.model.build()?,
        bias: cfg.closed_form_bias,
    };
    let dim = model.dim();
    writeln!(out, "{}", thermo_header(dim))?;
    for b in grid {
        if b.len() != dim {
            return Err(CliError::usage(format!(
                "{} takes {dim} components of b, got {}",
                cfg.model.name(),
                b.len()
            )));
        }
        let bcols = b.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",");
        let t = temperature(&cfg.model, b, cfg.boltzmann_constant)
            .map(num)
            .unwrap_or_default();
        match engine.report(&model, b) {
            Ok(r) => {
                let mean = r.mean.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",");
                let var = (0..dim).map(|i| num(r.variance[i][i])).collect::<Vec<_>>().join(",");
                writeln!(out, "{bcols},{t},{},{mean},{},{var},ok", num(r.log_p), num(r.entropy))?;
            }
            Err(GibbsError::Inadmissible(_)) => {
                let blanks = ",".repeat(2 * dim + 1);
                writeln!(out, "{bcols},{t},{blanks},inadmissible")?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// Prints one `PASS`/`FAIL` line per check; fails with exit code 1 if any check fails.
pub fn verify_cmd<W: Write>(cfg: &RunConfig, b: &[f64], n: usize, seed: u64, mut out: W) -> CliResult<()> {
    let opts = VerifyOptions {
        n_samples: n,
        seed,
        closed_form_bias: cfg.closed_form_bias,
    };
    let report = verify(&cfg.model, b, &opts)?;
    for c in &report.checks {
        writeln!(
            out,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::failure(format!("failed checks: {}", names.join(", "))))
    }
}

pub fn sample<W: Write>(cfg: &RunConfig, b: &[f64], n: usize, seed: u64, out: W) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::usage("--n must be positive"));
    }
    let batch = cfg.model.sample(b, n, seed)?;
    batch.write_csv(out)?;
    Ok(())
}

fn scalar_model(value: &serde_json::Value, which: &str) -> CliResult<Box<dyn ThermoModel>> {
    let spec: ModelSpec =
        serde_json::from_value(value.clone()).map_err(|e| CliError::usage(format!("bad {which}: {e}")))?;
    let model = spec.build()?;
    if model.dim() != 1 {
        return Err(CliError::usage(format!("{which} must have a scalar parameter")));
    }
    Ok(model)
}

/// `b,T,transfer,iterations`, the transfer going from the smaller-b part to the other.
pub fn equilibrate<W: Write>(cfg: &EquilibrateConfig, engine: &Engine, mut out: W) -> CliResult<()> {
    let a = scalar_model(&cfg.model_a, "model_a")?;
    let b = scalar_model(&cfg.model_b, "model_b")?;
    let eq = engine
        .equilibrate(a.as_ref(), b.as_ref(), cfg.b_a, cfg.b_b)
        .map_err(|e| match e {
            GibbsError::Inadmissible(m) => CliError::usage(format!("inadmissible input: {m}")),
            other => other.into(),
        })?;
    writeln!(out, "b,T,transfer,iterations")?;
    writeln!(
        out,
        "{},{},{},{}",
        num(eq.b),
        num(1.0 / (cfg.boltzmann_constant * eq.b)),
        num(eq.transfer),
        eq.iterations
    )?;
    Ok(())
}
