//! Flat sectioned key=value configuration (INI-like): `[section]` headers,
//! one `key = value` per line, `#` or `;` comment lines. Unknown sections
//! and keys are rejected so typos cannot silently change a run.

use crate::error::{Result, VpbError};
use crate::fluid::{PerturbationShape, PerturbationSpec, SolverConfig};
use crate::transport::{TransportModel, TransportModels};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Riemann,
    Ansatz,
    Simulate,
    KineticCheck,
    Fit,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Riemann => "riemann",
            Scenario::Ansatz => "ansatz",
            Scenario::Simulate => "simulate",
            Scenario::KineticCheck => "kinetic-check",
            Scenario::Fit => "fit",
        }
    }
}

/// End-state block: the left triple plus either an explicit right triple
/// or forward-construction strengths.
#[derive(Debug, Clone)]
pub struct EndStateConfig {
    pub v_left: f64,
    pub u_left: f64,
    pub theta_left: f64,
    pub right: Option<(f64, f64, f64)>,
    pub construct: Option<(f64, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ContactConfig {
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct AnsatzConfig {
    pub times: Vec<f64>,
    pub x_half_width: f64,
    pub x_points: usize,
    pub fit_t0: f64,
    pub fit_t1: f64,
    pub fit_points: usize,
    pub fd_step: f64,
}

#[derive(Debug, Clone)]
pub struct KineticConfig {
    pub gh_order: usize,
    pub box_n: usize,
    /// Box half-width in units of sqrt(theta).
    pub box_halfwidth: f64,
    pub n_phi: usize,
    pub n_mu: usize,
    pub threshold: f64,
    pub samples: usize,
    pub invert_rhs: usize,
    pub conservation_pairs: usize,
    pub refine: bool,
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub input: String,
    pub t_column: usize,
    pub v_column: usize,
    pub t0: f64,
    pub t1: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub out_dir: String,
    pub end_states: EndStateConfig,
    pub perturbation: PerturbationSpec,
    pub solver: SolverConfig,
    pub contact: ContactConfig,
    pub ansatz: AnsatzConfig,
    pub kinetic: KineticConfig,
    pub fit: Option<FitConfig>,
    /// Times at which `simulate` writes full-field snapshots.
    pub snapshot_times: Vec<f64>,
}

struct Taker {
    path: String,
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl Taker {
    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        self.sections
            .get_mut(section)
            .and_then(|s| s.remove(key))
            .map(|(v, _)| v)
    }

    fn take_f64(&mut self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.take(section, key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| VpbError::Validation {
                key: format!("{section}.{key}"),
                msg: format!("expected a number, got `{s}`"),
            }),
        }
    }

    fn take_usize(&mut self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.take(section, key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| VpbError::Validation {
                key: format!("{section}.{key}"),
                msg: format!("expected an integer, got `{s}`"),
            }),
        }
    }

    fn take_opt_f64(&mut self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.take(section, key) {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|_| VpbError::Validation {
                key: format!("{section}.{key}"),
                msg: format!("expected a number, got `{s}`"),
            }),
        }
    }

    fn finish(self) -> Result<()> {
        for (sec, keys) in &self.sections {
            if let Some((key, (_, line))) = keys.iter().next() {
                return Err(VpbError::Parse {
                    path: self.path.clone(),
                    line: *line,
                    msg: format!("unknown key `{key}` in section [{sec}]"),
                });
            }
        }
        Ok(())
    }
}

fn parse_sections(path: &str, text: &str) -> Result<Taker> {
    let known = [
        "run",
        "end_states",
        "perturbation",
        "grid",
        "solver",
        "transport",
        "contact",
        "ansatz",
        "kinetic",
        "fit",
        "weight",
    ];
    let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
    let mut current = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let n = lineno + 1;
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !known.contains(&name.as_str()) {
                return Err(VpbError::Parse {
                    path: path.into(),
                    line: n,
                    msg: format!("unknown section [{name}]"),
                });
            }
            current = name;
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(VpbError::Parse {
                path: path.into(),
                line: n,
                msg: format!("expected `key = value`, got `{line}`"),
            });
        };
        if current.is_empty() {
            return Err(VpbError::Parse {
                path: path.into(),
                line: n,
                msg: "key outside of any [section]".into(),
            });
        }
        let prev = sections.entry(current.clone()).or_default().insert(
            key.trim().to_string(),
            (value.trim().to_string(), n),
        );
        if prev.is_some() {
            return Err(VpbError::Parse {
                path: path.into(),
                line: n,
                msg: format!("duplicate key `{}`", key.trim()),
            });
        }
    }
    Ok(Taker {
        path: path.into(),
        sections,
    })
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(VpbError::Validation {
            key: key.into(),
            msg: format!("must be positive, got {v}"),
        })
    }
}

/// Parse and validate a configuration from text.
pub fn parse_config_str(path: &str, text: &str) -> Result<RunConfig> {
    let mut t = parse_sections(path, text)?;

    let scenario = match t
        .take("run", "scenario")
        .unwrap_or_else(|| "riemann".into())
        .as_str()
    {
        "riemann" => Scenario::Riemann,
        "ansatz" => Scenario::Ansatz,
        "simulate" => Scenario::Simulate,
        "kinetic-check" => Scenario::KineticCheck,
        "fit" => Scenario::Fit,
        other => {
            return Err(VpbError::Validation {
                key: "run.scenario".into(),
                msg: format!(
                    "must be one of riemann|ansatz|simulate|kinetic-check|fit, got `{other}`"
                ),
            })
        }
    };
    let seed = t.take_usize("run", "seed", 0)? as u64;
    let out_dir = t.take("run", "out").unwrap_or_else(|| "out".into());

    let v_left = positive("end_states.v_left", t.take_f64("end_states", "v_left", 1.0)?)?;
    let u_left = t.take_f64("end_states", "u_left", 0.0)?;
    let theta_left = positive(
        "end_states.theta_left",
        t.take_f64("end_states", "theta_left", 1.0)?,
    )?;
    let vr = t.take_opt_f64("end_states", "v_right")?;
    let ur = t.take_opt_f64("end_states", "u_right")?;
    let thr = t.take_opt_f64("end_states", "theta_right")?;
    let right = match (vr, ur, thr) {
        (None, None, None) => None,
        (Some(v), Some(u), Some(th)) => {
            positive("end_states.v_right", v)?;
            positive("end_states.theta_right", th)?;
            Some((v, u, th))
        }
        _ => {
            return Err(VpbError::Validation {
                key: "end_states.v_right".into(),
                msg: "the right state needs all of v_right, u_right, theta_right".into(),
            })
        }
    };
    let dvm = t.take_opt_f64("end_states", "dv_minus")?;
    let jump = t.take_opt_f64("end_states", "contact_jump")?;
    let dvp = t.take_opt_f64("end_states", "dv_plus")?;
    let construct = match (dvm, jump, dvp) {
        (None, None, None) => None,
        (a, b, c) => Some((a.unwrap_or(0.0), b.unwrap_or(0.0), c.unwrap_or(0.0))),
    };
    if right.is_some() && construct.is_some() {
        return Err(VpbError::Validation {
            key: "end_states.dv_minus".into(),
            msg: "give either an explicit right state or construction strengths, not both".into(),
        });
    }
    let end_states = EndStateConfig {
        v_left,
        u_left,
        theta_left,
        right,
        construct,
    };

    let shape_name = t
        .take("perturbation", "shape")
        .unwrap_or_else(|| "bump".into());
    let amplitude = t.take_f64("perturbation", "amplitude", 0.01)?;
    if amplitude < 0.0 {
        return Err(VpbError::Validation {
            key: "perturbation.amplitude".into(),
            msg: "must be nonnegative".into(),
        });
    }
    let width = positive(
        "perturbation.width",
        t.take_f64("perturbation", "width", 5.0)?,
    )?;
    let charge_offset = t.take_f64("perturbation", "charge_offset", 2.0)?;
    let modes = t.take_usize("perturbation", "modes", 4)?;
    let shape = match shape_name.as_str() {
        "bump" => PerturbationShape::Bump,
        "random" => PerturbationShape::Random { seed, modes },
        other => {
            return Err(VpbError::Validation {
                key: "perturbation.shape".into(),
                msg: format!("must be bump|random, got `{other}`"),
            })
        }
    };
    let perturbation = PerturbationSpec {
        shape,
        amplitude,
        width,
        charge_offset,
    };

    let transport = TransportModels {
        mu: TransportModel::new(
            positive("transport.mu0", t.take_f64("transport", "mu0", 1.0)?)?,
            t.take_f64("transport", "mu_exponent", 0.5)?,
        ),
        kappa: TransportModel::new(
            positive("transport.kappa0", t.take_f64("transport", "kappa0", 1.0)?)?,
            t.take_f64("transport", "kappa_exponent", 0.5)?,
        ),
        kappa1: TransportModel::new(
            positive(
                "transport.kappa1_0",
                t.take_f64("transport", "kappa1_0", 1.0)?,
            )?,
            t.take_f64("transport", "kappa1_exponent", 0.5)?,
        ),
    };

    let mut snapshot_times = Vec::new();
    if let Some(raw) = t.take("solver", "snapshot_times") {
        for part in raw.split(',') {
            snapshot_times.push(part.trim().parse::<f64>().map_err(|_| {
                VpbError::Validation {
                    key: "solver.snapshot_times".into(),
                    msg: format!("bad time value `{part}`"),
                }
            })?);
        }
    }

    let solver = SolverConfig {
        h: positive("grid.h", t.take_f64("grid", "h", 0.05)?)?,
        half_width: positive(
            "grid.half_width",
            t.take_f64("grid", "half_width", 100.0)?,
        )?,
        t_end: positive("solver.t_end", t.take_f64("solver", "t_end", 200.0)?)?,
        cfl: positive("solver.cfl", t.take_f64("solver", "cfl", 0.4)?)?,
        dt: t.take_opt_f64("solver", "dt")?,
        output_every: positive(
            "solver.output_every",
            t.take_f64("solver", "output_every", 1.0)?,
        )?,
        transport,
        weight_alpha: positive("weight.alpha", t.take_f64("weight", "alpha", 0.25)?)?,
        boundary_drift_tol: t.take_f64("solver", "boundary_drift_tol", 1e-8)?,
    };

    let contact = ContactConfig {
        half_width: positive(
            "contact.half_width",
            t.take_f64("contact", "half_width", 12.0)?,
        )?,
        n: t.take_usize("contact", "n", 4001)?,
    };

    let times_raw = t
        .take("ansatz", "times")
        .unwrap_or_else(|| "0,1,10,100".into());
    let mut times = Vec::new();
    for part in times_raw.split(',') {
        times.push(part.trim().parse::<f64>().map_err(|_| VpbError::Validation {
            key: "ansatz.times".into(),
            msg: format!("bad time value `{part}`"),
        })?);
    }
    let ansatz = AnsatzConfig {
        times,
        x_half_width: positive(
            "ansatz.x_half_width",
            t.take_f64("ansatz", "x_half_width", 50.0)?,
        )?,
        x_points: t.take_usize("ansatz", "x_points", 1001)?,
        fit_t0: t.take_f64("ansatz", "fit_t0", 10.0)?,
        fit_t1: t.take_f64("ansatz", "fit_t1", 1000.0)?,
        fit_points: t.take_usize("ansatz", "fit_points", 12)?,
        fd_step: positive("ansatz.fd_step", t.take_f64("ansatz", "fd_step", 1e-3)?)?,
    };

    let kinetic = KineticConfig {
        gh_order: t.take_usize("kinetic", "gh_order", 24)?,
        box_n: t.take_usize("kinetic", "box_n", 16)?,
        box_halfwidth: positive(
            "kinetic.box_halfwidth",
            t.take_f64("kinetic", "box_halfwidth", 7.0)?,
        )?,
        n_phi: t.take_usize("kinetic", "n_phi", 8)?,
        n_mu: t.take_usize("kinetic", "n_mu", 8)?,
        threshold: t.take_f64("kinetic", "threshold", 1e-8)?,
        samples: t.take_usize("kinetic", "samples", 20)?,
        invert_rhs: t.take_usize("kinetic", "invert_rhs", 3)?,
        conservation_pairs: t.take_usize("kinetic", "conservation_pairs", 2)?,
        refine: t
            .take("kinetic", "refine")
            .map(|s| s == "true" || s == "1")
            .unwrap_or(false),
    };

    let fit = match t.take("fit", "input") {
        Some(input) => Some(FitConfig {
            input,
            t_column: t.take_usize("fit", "t_column", 0)?,
            v_column: t.take_usize("fit", "v_column", 1)?,
            t0: t.take_f64("fit", "t0", 10.0)?,
            t1: t.take_f64("fit", "t1", 1000.0)?,
        }),
        None => None,
    };
    if scenario == Scenario::Fit && fit.is_none() {
        return Err(VpbError::Validation {
            key: "fit.input".into(),
            msg: "scenario `fit` needs an input series path".into(),
        });
    }

    t.finish()?;
    Ok(RunConfig {
        scenario,
        seed,
        out_dir,
        end_states,
        perturbation,
        solver,
        contact,
        ansatz,
        kinetic,
        fit,
        snapshot_times,
    })
}

/// Parse and validate a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&path.display().to_string(), &text)
}

impl RunConfig {
    /// Canonical text form of the effective configuration; re-parsing it
    /// reproduces the same configuration.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "scenario = {}", self.scenario.as_str());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out = {}", self.out_dir);
        let _ = writeln!(s, "\n[end_states]");
        let _ = writeln!(s, "v_left = {:e}", self.end_states.v_left);
        let _ = writeln!(s, "u_left = {:e}", self.end_states.u_left);
        let _ = writeln!(s, "theta_left = {:e}", self.end_states.theta_left);
        if let Some((v, u, th)) = self.end_states.right {
            let _ = writeln!(s, "v_right = {v:e}");
            let _ = writeln!(s, "u_right = {u:e}");
            let _ = writeln!(s, "theta_right = {th:e}");
        }
        if let Some((a, b, c)) = self.end_states.construct {
            let _ = writeln!(s, "dv_minus = {a:e}");
            let _ = writeln!(s, "contact_jump = {b:e}");
            let _ = writeln!(s, "dv_plus = {c:e}");
        }
        let _ = writeln!(s, "\n[perturbation]");
        let (shape, modes) = match self.perturbation.shape {
            PerturbationShape::Bump => ("bump", None),
            PerturbationShape::Random { modes, .. } => ("random", Some(modes)),
        };
        let _ = writeln!(s, "shape = {shape}");
        if let Some(m) = modes {
            let _ = writeln!(s, "modes = {m}");
        }
        let _ = writeln!(s, "amplitude = {:e}", self.perturbation.amplitude);
        let _ = writeln!(s, "width = {:e}", self.perturbation.width);
        let _ = writeln!(s, "charge_offset = {:e}", self.perturbation.charge_offset);
        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "h = {:e}", self.solver.h);
        let _ = writeln!(s, "half_width = {:e}", self.solver.half_width);
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "t_end = {:e}", self.solver.t_end);
        let _ = writeln!(s, "cfl = {:e}", self.solver.cfl);
        if let Some(dt) = self.solver.dt {
            let _ = writeln!(s, "dt = {dt:e}");
        }
        let _ = writeln!(s, "output_every = {:e}", self.solver.output_every);
        if !self.snapshot_times.is_empty() {
            let times: Vec<String> = self.snapshot_times.iter().map(|t| format!("{t:e}")).collect();
            let _ = writeln!(s, "snapshot_times = {}", times.join(","));
        }
        let _ = writeln!(
            s,
            "boundary_drift_tol = {:e}",
            self.solver.boundary_drift_tol
        );
        let _ = writeln!(s, "\n[transport]");
        let _ = writeln!(s, "mu0 = {:e}", self.solver.transport.mu.coeff);
        let _ = writeln!(s, "mu_exponent = {:e}", self.solver.transport.mu.exponent);
        let _ = writeln!(s, "kappa0 = {:e}", self.solver.transport.kappa.coeff);
        let _ = writeln!(
            s,
            "kappa_exponent = {:e}",
            self.solver.transport.kappa.exponent
        );
        let _ = writeln!(s, "kappa1_0 = {:e}", self.solver.transport.kappa1.coeff);
        let _ = writeln!(
            s,
            "kappa1_exponent = {:e}",
            self.solver.transport.kappa1.exponent
        );
        let _ = writeln!(s, "\n[weight]");
        let _ = writeln!(s, "alpha = {:e}", self.solver.weight_alpha);
        let _ = writeln!(s, "\n[contact]");
        let _ = writeln!(s, "half_width = {:e}", self.contact.half_width);
        let _ = writeln!(s, "n = {}", self.contact.n);
        let _ = writeln!(s, "\n[ansatz]");
        let times: Vec<String> = self.ansatz.times.iter().map(|t| format!("{t:e}")).collect();
        let _ = writeln!(s, "times = {}", times.join(","));
        let _ = writeln!(s, "x_half_width = {:e}", self.ansatz.x_half_width);
        let _ = writeln!(s, "x_points = {}", self.ansatz.x_points);
        let _ = writeln!(s, "fit_t0 = {:e}", self.ansatz.fit_t0);
        let _ = writeln!(s, "fit_t1 = {:e}", self.ansatz.fit_t1);
        let _ = writeln!(s, "fit_points = {}", self.ansatz.fit_points);
        let _ = writeln!(s, "fd_step = {:e}", self.ansatz.fd_step);
        let _ = writeln!(s, "\n[kinetic]");
        let _ = writeln!(s, "gh_order = {}", self.kinetic.gh_order);
        let _ = writeln!(s, "box_n = {}", self.kinetic.box_n);
        let _ = writeln!(s, "box_halfwidth = {:e}", self.kinetic.box_halfwidth);
        let _ = writeln!(s, "n_phi = {}", self.kinetic.n_phi);
        let _ = writeln!(s, "n_mu = {}", self.kinetic.n_mu);
        let _ = writeln!(s, "threshold = {:e}", self.kinetic.threshold);
        let _ = writeln!(s, "samples = {}", self.kinetic.samples);
        let _ = writeln!(s, "invert_rhs = {}", self.kinetic.invert_rhs);
        let _ = writeln!(s, "conservation_pairs = {}", self.kinetic.conservation_pairs);
        let _ = writeln!(s, "refine = {}", self.kinetic.refine);
        if let Some(fit) = &self.fit {
            let _ = writeln!(s, "\n[fit]");
            let _ = writeln!(s, "input = {}", fit.input);
            let _ = writeln!(s, "t_column = {}", fit.t_column);
            let _ = writeln!(s, "v_column = {}", fit.v_column);
            let _ = writeln!(s, "t0 = {:e}", fit.t0);
            let _ = writeln!(s, "t1 = {:e}", fit.t1);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config_str(
            "test",
            "[end_states]\nv_left = 1.0\nu_left = 0\ntheta_left = 1.0\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, Scenario::Riemann);
        assert_eq!(cfg.solver.h, 0.05);
        assert_eq!(cfg.kinetic.gh_order, 24);
        assert!(cfg.end_states.right.is_none());
    }

    #[test]
    fn negative_temperature_is_rejected() {
        let err = parse_config_str("test", "[end_states]\ntheta_left = -1.0\n");
        match err {
            Err(VpbError::Validation { key, msg }) => {
                assert_eq!(key, "end_states.theta_left");
                assert!(msg.contains("positive"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let err = parse_config_str("cfg.ini", "[solver]\nbogus = 3\n");
        match err {
            Err(VpbError::Parse { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("bogus"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn emit_reparse_roundtrip() {
        let text = "[run]\nscenario = simulate\nseed = 7\n[end_states]\nv_left = 1.0\n\
                    u_left = 0.1\ntheta_left = 0.9\ndv_minus = 0.04\ncontact_jump = 0.01\n\
                    dv_plus = 0.03\n[grid]\nh = 0.1\n[solver]\nt_end = 5.0\n";
        let cfg = parse_config_str("a", text).unwrap();
        let emitted = cfg.emit();
        let cfg2 = parse_config_str("b", &emitted).unwrap();
        assert_eq!(cfg2.emit(), emitted);
        assert_eq!(cfg2.scenario, Scenario::Simulate);
        assert_eq!(cfg2.seed, 7);
        assert_eq!(cfg2.solver.h, 0.1);
        assert_eq!(cfg2.end_states.construct, Some((0.04, 0.01, 0.03)));
    }

    #[test]
    fn fit_scenario_requires_input() {
        let err = parse_config_str("t", "[run]\nscenario = fit\n[end_states]\nv_left = 1\n");
        assert!(matches!(err, Err(VpbError::Validation { .. })));
    }
}
