//! Flags and config-file keys. Every subcommand flag has a config key of the
//! same name; values given on the command line win over the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use curvmax_core::geometry::{Cutoff, SurfaceSpec};
use num_rational::Rational64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Keys shared by every subcommand.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GlobalArgs {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomly generated data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// A surface given inline or as a path to a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecSource {
    Path(PathBuf),
    Inline(SurfaceSpec),
}

fn parse_spec_path(s: &str) -> Result<SpecSource, String> {
    Ok(SpecSource::Path(PathBuf::from(s)))
}

/// Which curve to average over.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SurfaceArgs {
    /// `homogeneous` for (x, x^d) with dilation (t, t^d), `finite-type` for
    /// (x, x^d + c) with isotropic dilation.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub d: Option<u32>,
    /// Vertical offset of the finite-type curve.
    #[arg(long)]
    pub c: Option<f64>,
    /// Support radius of the parametrization.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Full surface description; overrides family, d, c and radius.
    #[arg(long, value_parser = parse_spec_path)]
    pub spec: Option<SpecSource>,
    /// `bump`, `unit-interval` or `bump-on:LO:HI`.
    #[arg(long)]
    pub cutoff: Option<String>,
}

impl SurfaceArgs {
    pub fn resolve(
        &self,
        default_family: &str,
        default_d: u32,
    ) -> Result<(SurfaceSpec, Cutoff), CliError> {
        let family = self.family.as_deref().unwrap_or(default_family);
        let d = self.d.unwrap_or(default_d);
        let spec = match &self.spec {
            Some(SpecSource::Inline(s)) => s.clone(),
            Some(SpecSource::Path(p)) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => match family {
                "homogeneous" => SurfaceSpec::homogeneous_curve(d, self.radius.unwrap_or(1.0))?,
                "finite-type" => SurfaceSpec::finite_type_curve(
                    d,
                    self.c.unwrap_or(0.0),
                    vec![1.0],
                    1,
                    self.radius.unwrap_or(1.0),
                )?,
                other => return Err(CliError::Config(format!("unknown family {other:?}"))),
            },
        };
        let default_cutoff = if spec.family() == curvmax_core::geometry::Family::HomogeneousCurve {
            "bump-on:0.5:1"
        } else {
            "bump"
        };
        let cutoff = parse_cutoff(self.cutoff.as_deref().unwrap_or(default_cutoff), &spec)?;
        Ok((spec, cutoff))
    }
}

fn parse_cutoff(s: &str, spec: &SurfaceSpec) -> Result<Cutoff, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    Ok(match parts.as_slice() {
        ["bump"] => Cutoff::bump(spec.param_dim(), spec.support_radius())?,
        ["unit-interval"] => Cutoff::unit_interval(),
        ["bump-on", lo, hi] => Cutoff::bump_on(parse_f64(lo)?, parse_f64(hi)?)?,
        _ => return Err(CliError::Config(format!("unknown cutoff {s:?}"))),
    })
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.parse()
        .map_err(|_| CliError::Config(format!("not a number: {s:?}")))
}

/// A rational exponent such as `3/2` or `4`.
pub fn parse_exponent(s: &str) -> Result<Rational64, CliError> {
    let r = Rational64::from_str(s.trim())
        .map_err(|_| CliError::Config(format!("not a rational exponent: {s:?}")))?;
    if r < Rational64::from_integer(1) {
        return Err(CliError::Config(format!("exponent {s} is below 1")));
    }
    Ok(r)
}

/// `p:q` pairs.
pub fn parse_pair(s: &str) -> Result<(Rational64, Rational64), CliError> {
    let (p, q) = s
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("expected p:q, got {s:?}")))?;
    Ok((parse_exponent(p)?, parse_exponent(q)?))
}

pub fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Overlays the non-null fields of `flags` on the config file and decodes
/// the result. Keys the subcommand does not know are rejected.
pub fn merge<A>(
    flags: &A,
    global: &GlobalArgs,
    config: Option<&Path>,
) -> Result<(A, GlobalArgs), CliError>
where
    A: Serialize + DeserializeOwned,
{
    let as_object = |v: Value| match v {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    let flag_values =
        as_object(serde_json::to_value(flags).map_err(|e| CliError::Config(e.to_string()))?);
    let global_values =
        as_object(serde_json::to_value(global).map_err(|e| CliError::Config(e.to_string()))?);
    let mut file = match config {
        None => Map::new(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            match serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            {
                Value::Object(m) => m,
                _ => {
                    return Err(CliError::Config(
                        "config file must hold a JSON object".into(),
                    ))
                }
            }
        }
    };
    for key in file.keys() {
        if !flag_values.contains_key(key) && !global_values.contains_key(key) {
            return Err(CliError::Config(format!("unknown config key {key:?}")));
        }
    }
    let mut overlay = |defaults: Map<String, Value>| {
        let mut out = Map::new();
        for (key, flag) in defaults {
            let value = if flag.is_null() {
                file.remove(&key).unwrap_or(Value::Null)
            } else {
                flag
            };
            out.insert(key, value);
        }
        Value::Object(out)
    };
    let args = serde_json::from_value(overlay(flag_values))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut merged_global: GlobalArgs = serde_json::from_value(overlay(global_values))
        .map_err(|e| CliError::Config(e.to_string()))?;
    merged_global.config = global.config.clone();
    Ok((args, merged_global))
}
