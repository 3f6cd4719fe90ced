//! Problem specification files.
//!
//! ```toml
//! [thermal]
//! beta = 1.0
//! hbar = 1.0            # optional, default 1
//!
//! [spectral_density]
//! family = "gldd"       # gldd | tgldd | mt | power_law | tabulated
//!
//! [[term]]              # gldd, tgldd, mt
//! lambda = 1.0
//! gamma = 1.0
//! omega_tilde = 0.0
//!
//! [task]                # all optional
//! k = 3
//! ```
//!
//! `power_law` takes `amplitude`, `exponent`, `omega_c` and optional
//! `stretch`; `tabulated` takes `file`, a CSV of `(omega, J)` relative to the
//! specification file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::influence::Splitting;
use crate::model::{LorentzianTerm, PowerLawCutoff, SpectralDensity, TabulatedDensity, ThermalContext};

use super::table::{read_file, read_rows};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    thermal: RawThermal,
    spectral_density: Option<RawDensity>,
    #[serde(default)]
    term: Vec<RawTerm>,
    #[serde(default)]
    task: TaskSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermal {
    beta: f64,
    hbar: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    family: String,
    amplitude: Option<f64>,
    exponent: Option<f64>,
    omega_c: Option<f64>,
    stretch: Option<f64>,
    file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    lambda: f64,
    gamma: f64,
    #[serde(default)]
    omega_tilde: f64,
}

/// Optional task parameters; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub pade_order: Option<usize>,
    pub tolerance: Option<f64>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub splitting: Option<String>,
    pub seed: Option<u64>,
    pub alpha_file: Option<PathBuf>,
    pub weights_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub thermal: ThermalContext,
    pub density: Option<SpectralDensity>,
    pub task: TaskSpec,
}

fn within(prefix: &str, e: Error) -> Error {
    match e {
        Error::InvalidInput { field, reason } => Error::InvalidInput {
            field: format!("{prefix}.{field}"),
            reason,
        },
        other => other,
    }
}

fn need(v: Option<f64>, field: &str) -> Result<f64> {
    v.ok_or_else(|| Error::invalid(format!("spectral_density.{field}"), "missing"))
}

pub fn parse_splitting(s: &str) -> Result<Splitting> {
    match s.to_ascii_lowercase().as_str() {
        "trotter" => Ok(Splitting::Trotter),
        "strang" => Ok(Splitting::Strang),
        other => Err(Error::invalid("splitting", format!("unknown splitting `{other}`"))),
    }
}

impl ProblemSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = read_file(path, "spec")?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses `text`; relative file names resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| {
            let span = e
                .span()
                .map(|s| format!(" (bytes {}..{})", s.start, s.end))
                .unwrap_or_default();
            Error::invalid("spec", format!("{}{span}", e.message()))
        })?;
        let thermal =
            ThermalContext::new(raw.thermal.beta, raw.thermal.hbar.unwrap_or(1.0)).map_err(|e| within("thermal", e))?;
        let terms = raw
            .term
            .iter()
            .enumerate()
            .map(|(i, t)| {
                LorentzianTerm::new(t.lambda, t.gamma, t.omega_tilde).map_err(|e| within(&format!("term[{i}]"), e))
            })
            .collect::<Result<Vec<_>>>()?;

        let density = match raw.spectral_density {
            None => {
                if !terms.is_empty() {
                    return Err(Error::invalid("spectral_density", "terms given without a family"));
                }
                None
            }
            Some(d) => {
                let family = d.family.to_ascii_lowercase();
                let lorentzian = matches!(family.as_str(), "gldd" | "tgldd" | "mt" | "meier_tannor");
                if lorentzian && terms.is_empty() {
                    return Err(Error::invalid(
                        "term",
                        format!("family `{family}` needs at least one [[term]]"),
                    ));
                }
                if !lorentzian && !terms.is_empty() {
                    return Err(Error::invalid(
                        "term",
                        format!("family `{family}` takes no [[term]] entries"),
                    ));
                }
                Some(match family.as_str() {
                    "gldd" => SpectralDensity::Gldd(terms),
                    "tgldd" => SpectralDensity::Tgldd { terms, thermal },
                    "mt" | "meier_tannor" => SpectralDensity::MeierTannor(terms),
                    "power_law" => SpectralDensity::PowerLaw(
                        PowerLawCutoff::new(
                            need(d.amplitude, "amplitude")?,
                            need(d.exponent, "exponent")?,
                            need(d.omega_c, "omega_c")?,
                            d.stretch.unwrap_or(1.0),
                        )
                        .map_err(|e| within("spectral_density", e))?,
                    ),
                    "tabulated" => {
                        let file = d
                            .file
                            .ok_or_else(|| Error::invalid("spectral_density.file", "missing"))?;
                        let text = read_file(&base.join(file), "spectral_density.file")?;
                        let rows = read_rows(&text, "spectral_density.file")?;
                        let samples = rows
                            .iter()
                            .enumerate()
                            .map(
                                |(i, r)| match (r.first().copied().flatten(), r.get(1).copied().flatten()) {
                                    (Some(w), Some(j)) if r.len() == 2 => Ok((w, j)),
                                    _ => Err(Error::invalid(
                                        "spectral_density.file",
                                        format!("row {}: expected two columns (omega, J)", i + 1),
                                    )),
                                },
                            )
                            .collect::<Result<Vec<_>>>()?;
                        SpectralDensity::Tabulated(
                            TabulatedDensity::new(samples).map_err(|e| within("spectral_density", e))?,
                        )
                    }
                    other => {
                        return Err(Error::invalid(
                            "spectral_density.family",
                            format!("unknown family `{other}`"),
                        ))
                    }
                })
            }
        };

        let mut task = raw.task;
        if let Some(s) = &task.splitting {
            parse_splitting(s).map_err(|e| within("task", e))?;
        }
        if let Some(tol) = task.tolerance {
            if !(tol > 0.0) {
                return Err(Error::invalid("task.tolerance", "must be positive"));
            }
        }
        if let Some(t) = task.t_max {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid("task.t_max", "must be positive"));
            }
        }
        if let Some(dt) = task.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::invalid("task.dt", "must be positive"));
            }
        }
        if task.k == Some(0) || task.k_max == Some(0) {
            return Err(Error::invalid("task.k", "must be at least 1"));
        }
        task.alpha_file = task.alpha_file.map(|p| base.join(p));
        task.weights_file = task.weights_file.map(|p| base.join(p));
        Ok(Self { thermal, density, task })
    }

    pub fn require_density(&self) -> Result<&SpectralDensity> {
        self.density
            .as_ref()
            .ok_or_else(|| Error::invalid("spectral_density", "missing section"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ProblemSpec> {
        ProblemSpec::parse(text, Path::new("."))
    }

    fn field_of(e: Error) -> String {
        match e {
            Error::InvalidInput { field, .. } => field,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lorentzian_spec() {
        let s = parse(
            "[thermal]\nbeta = 2.0\n[spectral_density]\nfamily = \"tgldd\"\n[[term]]\nlambda = 1\ngamma = 1\nomega_tilde = 1\n[task]\nk = 4\n",
        )
        .unwrap();
        assert_eq!(s.thermal.beta_hbar(), 2.0);
        assert!(matches!(s.density, Some(SpectralDensity::Tgldd { .. })));
        assert_eq!(s.task.k, Some(4));
    }

    #[test]
    fn power_law_spec() {
        let s = parse(
            "[thermal]\nbeta = 1\n[spectral_density]\nfamily = \"power_law\"\namplitude = 1\nexponent = 1\nomega_c = 2\n",
        )
        .unwrap();
        assert!(matches!(s.density, Some(SpectralDensity::PowerLaw(_))));
    }

    #[test]
    fn errors_name_fields() {
        let e = parse("[thermal]\nbeta = -1\n").unwrap_err();
        assert_eq!(field_of(e), "thermal.beta");
        let e = parse("[thermal]\nbeta = 1\n[spectral_density]\nfamily = \"gldd\"\n[[term]]\nlambda = 1\ngamma = 0\n")
            .unwrap_err();
        assert_eq!(field_of(e), "term[0].gamma");
        let e = parse("[thermal]\nbeta = 1\n[spectral_density]\nfamily = \"power_law\"\nexponent = 1\nomega_c = 1\n")
            .unwrap_err();
        assert_eq!(field_of(e), "spectral_density.amplitude");
        let e = parse("[thermal]\nbeta = 1\n[spectral_density]\nfamily = \"drude\"\n").unwrap_err();
        assert_eq!(field_of(e), "spectral_density.family");
        let e = parse("[thermal]\nbeta = 1\nbogus = 3\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = parse("[thermal]\nbeta = 1\n[task]\nsplitting = \"lie\"\n").unwrap_err();
        assert_eq!(field_of(e), "task.splitting");
    }

    #[test]
    fn tabulated_spec_reads_relative_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("j.csv"), "omega,J\n0,0\n1,0.5\n2,0.25\n").unwrap();
        let spec = dir.path().join("bath.toml");
        std::fs::write(
            &spec,
            "[thermal]\nbeta = 1\n[spectral_density]\nfamily = \"tabulated\"\nfile = \"j.csv\"\n",
        )
        .unwrap();
        let s = ProblemSpec::from_path(&spec).unwrap();
        assert_eq!(s.require_density().unwrap().eval(1.5), 0.375);
    }
}
