//! CSV and JSON emitters. CSV is comma-separated with a '.' decimal
//! point, a header row and LF line endings; floats print with full
//! precision so seeded reruns are byte-identical.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::Result;
use crate::fluid::{ChargeField, FluidField};
use std::path::Path;

pub fn records_to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from(
        "t,l2_pert,h1_pert,linf_pert,l2_charge,linf_charge,weighted_l2,energy_fluid,poisson_residual,boundary_drift\n",
    );
    for r in records {
        s.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            r.t,
            r.l2_pert,
            r.h1_pert,
            r.linf_pert,
            r.l2_charge,
            r.linf_charge,
            r.weighted_l2,
            r.energy_fluid,
            r.poisson_residual,
            r.boundary_drift
        ));
    }
    s
}

pub fn snapshot_to_csv(field: &FluidField, charge: &ChargeField) -> String {
    let mut s = String::from("x,v,u1,theta,n2,Phi_x\n");
    for i in 0..field.x.len() {
        s.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            field.x[i], field.v[i], field.u1[i], field.theta[i], charge.n2[i], charge.phi_x[i]
        ));
    }
    s
}

/// Profile table of the composite wave at one time.
pub fn profile_to_csv(xs: &[f64], rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("x,v,u1,theta\n");
    for (x, (v, u1, th)) in xs.iter().zip(rows) {
        s.push_str(&format!("{x:.17e},{v:.17e},{u1:.17e},{th:.17e}\n"));
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Read a (t, value) series from two columns of a CSV file with a header.
pub fn read_series_csv(path: &Path, t_col: usize, v_col: usize) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let parse = |idx: usize| -> Result<f64> {
            cells
                .get(idx)
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| crate::error::VpbError::Validation {
                    key: format!("{}:{}", path.display(), i + 1),
                    msg: format!("cannot read column {idx}"),
                })
        };
        out.push((parse(t_col)?, parse(v_col)?));
    }
    Ok(out)
}
