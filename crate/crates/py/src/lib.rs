//! Thin Python bindings over the core library: the equation-of-state and
//! star-state operations, the composite wave with its residuals, the
//! diffusion weight, decay fits and a small simulation runner.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use vpbwave_core::composite::{weight_g, weight_hat_w, CompositeWave, ContactGrid};
use vpbwave_core::diagnostics;
use vpbwave_core::eos::{self, EndStates, Family, ThermoState};
use vpbwave_core::fluid::{self, PerturbationSpec, SolverConfig};
use vpbwave_core::kinetic::{inner_product, MaxwellParams, Projector, VelocityGrid};
use vpbwave_core::transport::TransportModels;
use vpbwave_core::VpbError;

fn err(e: VpbError) -> PyErr {
    match e {
        VpbError::Domain(_) | VpbError::Validation { .. } | VpbError::Parse { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn family(name: &str) -> PyResult<Family> {
    match name {
        "first" | "minus" | "1" => Ok(Family::First),
        "third" | "plus" | "3" => Ok(Family::Third),
        other => Err(PyValueError::new_err(format!(
            "family must be first|third, got `{other}`"
        ))),
    }
}

fn state(t: (f64, f64, f64)) -> PyResult<ThermoState> {
    ThermoState::new(t.0, t.1, t.2).map_err(err)
}

#[pyfunction]
fn pressure(v: f64, theta: f64) -> PyResult<f64> {
    eos::pressure(v, theta).map_err(err)
}

#[pyfunction]
fn entropy(v: f64, theta: f64) -> PyResult<f64> {
    eos::entropy(v, theta).map_err(err)
}

#[pyfunction]
fn theta_from_vs(v: f64, s: f64) -> PyResult<f64> {
    eos::theta_from_vs(v, s).map_err(err)
}

#[pyfunction]
#[pyo3(name = "lambda_speed")]
fn lambda_speed(v: f64, s: f64, fam: &str) -> PyResult<f64> {
    eos::lambda(v, s, family(fam)?).map_err(err)
}

#[pyfunction]
fn rarefaction_u(v_start: f64, u_start: f64, v_end: f64, s: f64, fam: &str) -> PyResult<f64> {
    eos::rarefaction_u(v_start, u_start, v_end, s, family(fam)?).map_err(err)
}

fn stars_dict(py: Python<'_>, stars: &eos::StarStates) -> PyResult<Py<PyAny>> {
    let d = pyo3::types::PyDict::new(py);
    d.set_item("v_minus_star", stars.v_minus_star)?;
    d.set_item("v_plus_star", stars.v_plus_star)?;
    d.set_item("u_star", stars.u_star)?;
    d.set_item("theta_minus_star", stars.theta_minus_star)?;
    d.set_item("theta_plus_star", stars.theta_plus_star)?;
    d.set_item("p_star", stars.p_star)?;
    Ok(d.into_any().unbind())
}

#[pyfunction]
fn solve_star_states(
    py: Python<'_>,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
    tol: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let ends = EndStates {
        left: state(left)?,
        right: state(right)?,
    };
    let stars = eos::solve_star_states(&ends, tol.unwrap_or(1e-11)).map_err(err)?;
    stars_dict(py, &stars)
}

#[pyfunction]
fn construct_end_states(
    py: Python<'_>,
    left: (f64, f64, f64),
    dv_minus: f64,
    contact_jump: f64,
    dv_plus: f64,
) -> PyResult<Py<PyAny>> {
    let (ends, stars) =
        eos::construct_end_states(state(left)?, dv_minus, contact_jump, dv_plus).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item(
        "right",
        (ends.right.v, ends.right.u[0], ends.right.theta),
    )?;
    d.set_item("stars", stars_dict(py, &stars)?)?;
    Ok(d.into_any().unbind())
}

#[pyfunction]
#[pyo3(signature = (x, t, alpha))]
fn weight_hat(x: f64, t: f64, alpha: f64) -> f64 {
    weight_hat_w(x, t, alpha)
}

#[pyfunction]
#[pyo3(signature = (x, t, alpha))]
fn weight_primitive(x: f64, t: f64, alpha: f64) -> f64 {
    weight_g(x, t, alpha)
}

#[pyfunction]
fn decay_fit(series: Vec<(f64, f64)>, t0: f64, t1: f64) -> PyResult<(f64, f64)> {
    diagnostics::decay_fit(&series, t0, t1).map_err(err)
}

/// Worst Gram-matrix deviation of the chi-basis from the identity on a
/// Gauss-Hermite grid.
#[pyfunction]
fn chi_gram_deviation(order: usize, rho: f64, u1: f64, theta: f64) -> PyResult<f64> {
    let params = MaxwellParams::new(rho, [u1, 0.0, 0.0], theta).map_err(err)?;
    let grid = VelocityGrid::gauss_hermite(order, &params).map_err(err)?;
    let proj = Projector::new(params, &grid);
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner_product(&proj.chis[i], &proj.chis[j], &proj.m) - want).abs());
        }
    }
    Ok(worst)
}

/// The assembled composite wave.
#[pyclass(name = "CompositeWave")]
struct PyCompositeWave {
    inner: CompositeWave,
}

#[pymethods]
impl PyCompositeWave {
    #[new]
    #[pyo3(signature = (left, right, contact_half_width=12.0, contact_n=4001))]
    fn new(
        left: (f64, f64, f64),
        right: (f64, f64, f64),
        contact_half_width: f64,
        contact_n: usize,
    ) -> PyResult<Self> {
        let ends = EndStates {
            left: state(left)?,
            right: state(right)?,
        };
        let wave = CompositeWave::build(
            ends,
            TransportModels::default(),
            ContactGrid {
                half_width: contact_half_width,
                n: contact_n,
            },
            1e-11,
        )
        .map_err(err)?;
        Ok(Self { inner: wave })
    }

    /// (v, u1, theta) at a space-time point.
    fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let st = self.inner.eval(x, t);
        (st.v, st.u[0], st.theta)
    }

    /// (mass, momentum, transverse, energy) equation residuals.
    #[pyo3(signature = (x, t, fd_step=1e-3))]
    fn residuals(&self, x: f64, t: f64, fd_step: f64) -> (f64, f64, f64, f64) {
        let r = self.inner.residuals(x, t, fd_step);
        (r.mass, r.momentum, r.transverse, r.energy)
    }

    fn star_states(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        stars_dict(py, &self.inner.stars)
    }

    fn strengths(&self) -> (f64, f64, f64, f64) {
        let s = &self.inner.strengths;
        (s.rare_minus, s.contact, s.rare_plus, s.total)
    }

    /// Fitted Gaussian-tail constants (c1, c2) of the contact profile.
    fn contact_tail(&self) -> (f64, f64) {
        (self.inner.contact.c1_est, self.inner.contact.c2_est)
    }

    /// Contact table as (eta, Theta, Theta') triples.
    fn contact_table(&self) -> Vec<(f64, f64, f64)> {
        let c = &self.inner.contact;
        (0..c.eta_grid.len())
            .map(|i| (c.eta_grid[i], c.theta[i], c.theta_prime[i]))
            .collect()
    }
}

/// Run the fluid solver around a composite wave; returns the diagnostics
/// series as a list of dicts.
#[pyfunction]
#[pyo3(signature = (left, right, t_end=10.0, h=0.1, half_width=30.0, amplitude=0.01, output_every=1.0))]
fn simulate(
    py: Python<'_>,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
    t_end: f64,
    h: f64,
    half_width: f64,
    amplitude: f64,
    output_every: f64,
) -> PyResult<Py<PyAny>> {
    let ends = EndStates {
        left: state(left)?,
        right: state(right)?,
    };
    let wave = CompositeWave::build(
        ends,
        TransportModels::default(),
        ContactGrid {
            half_width: 12.0,
            n: 2001,
        },
        1e-11,
    )
    .map_err(err)?;
    let cfg = SolverConfig {
        h,
        half_width,
        t_end,
        output_every,
        ..SolverConfig::default()
    };
    let pert = PerturbationSpec {
        amplitude,
        ..PerturbationSpec::default()
    };
    let out = fluid::run(&cfg, &wave, &pert).map_err(err)?;
    let list = pyo3::types::PyList::empty(py);
    for r in &out.records {
        let d = pyo3::types::PyDict::new(py);
        d.set_item("t", r.t)?;
        d.set_item("linf_pert", r.linf_pert)?;
        d.set_item("l2_pert", r.l2_pert)?;
        d.set_item("linf_charge", r.linf_charge)?;
        d.set_item("energy_fluid", r.energy_fluid)?;
        list.append(d)?;
    }
    Ok(list.into_any().unbind())
}

#[pymodule]
fn vpbwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(pressure, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(theta_from_vs, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_speed, m)?)?;
    m.add_function(wrap_pyfunction!(rarefaction_u, m)?)?;
    m.add_function(wrap_pyfunction!(solve_star_states, m)?)?;
    m.add_function(wrap_pyfunction!(construct_end_states, m)?)?;
    m.add_function(wrap_pyfunction!(weight_hat, m)?)?;
    m.add_function(wrap_pyfunction!(weight_primitive, m)?)?;
    m.add_function(wrap_pyfunction!(decay_fit, m)?)?;
    m.add_function(wrap_pyfunction!(chi_gram_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_class::<PyCompositeWave>()?;
    Ok(())
}
