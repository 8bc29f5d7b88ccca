//! CSV writers. All output uses `.` decimals, a header row, and a fixed
//! column order (Rust's float formatting is locale-independent by
//! construction).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::inverse::InverseLossRecord;
use crate::train::LossRecord;

pub fn write_loss_history(path: &Path, history: &[LossRecord]) -> Result<()> {
    let mut out = String::from("iteration,loss_eq,loss_bd,total\n");
    for r in history {
        writeln!(out, "{},{:e},{:e},{:e}", r.iteration, r.eq, r.bd, r.total).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_inverse_history(path: &Path, history: &[InverseLossRecord]) -> Result<()> {
    let mut out = String::from("iteration,loss_eq,loss_bd,loss_obs,loss_prior,total\n");
    for r in history {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e}",
            r.iteration, r.eq, r.bd, r.obs, r.prior, r.total
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// `x,value` rows for a 1D field.
pub fn write_field_1d(path: &Path, xs: &[f64], values: &[f64]) -> Result<()> {
    let mut out = String::from("x,value\n");
    for (x, v) in xs.iter().zip(values) {
        writeln!(out, "{x:e},{v:e}").unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// `x,y,value` rows for a 2D field sampled on a tensor grid (x fastest).
pub fn write_field_2d(path: &Path, xs: &[f64], ys: &[f64], values: &[f64]) -> Result<()> {
    assert_eq!(values.len(), xs.len() * ys.len());
    let mut out = String::from("x,y,value\n");
    for (j, y) in ys.iter().enumerate() {
        for (i, x) in xs.iter().enumerate() {
            writeln!(out, "{x:e},{y:e},{:e}", values[j * xs.len() + i]).unwrap();
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Stehfest weights as `i,mu` rows.
pub fn write_coefficients(path: &Path, coefficients: &[f64]) -> Result<()> {
    let mut out = String::from("i,mu\n");
    for (i, c) in coefficients.iter().enumerate() {
        writeln!(out, "{},{c:e}", i + 1).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Inversion table `t,numeric,exact,abs_error`.
pub fn write_nilt_table(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = String::from("t,numeric,exact,abs_error\n");
    for &(t, numeric, exact) in rows {
        writeln!(out, "{t:e},{numeric:e},{exact:e},{:e}", (numeric - exact).abs()).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}
