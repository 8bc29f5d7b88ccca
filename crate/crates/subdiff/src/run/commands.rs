//! The experiment front end: named presets in, artifacts out (CSV tables,
//! grid files, PNG plots, checkpoints, and a manifest tying them together).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::RunConfig;
use super::manifest::RunManifest;
use super::{csvio, plot};
use crate::error::{Error, Result};
use crate::fdm::{relative_l2, solve_l1, Axis, Grid, GridFile};
use crate::inverse::{synthesize_measurements, train_inverse};
use crate::laplace::StehfestRule;
use crate::nn::JetMode;
use crate::problem::presets::{self, InverseProblem};
use crate::problem::{ExactSolution, LaplaceField, ProblemSpec};
use crate::train::{derive_seed, reconstruct, streams, train_forward, SInterval, TrainResult};

enum ForwardReference {
    /// Validate against the L1 finite-difference solution (1D/2D).
    Fdm,
    /// Validate against a manufactured exact solution.
    Exact(ExactSolution),
}

fn forward_problem(cfg: &RunConfig) -> Result<(ProblemSpec, ForwardReference)> {
    let alpha = cfg.problem.alpha;
    match cfg.run.preset.as_str() {
        "forward1d" => {
            let (spec, exact) = presets::manufactured_1d(alpha);
            Ok((spec, ForwardReference::Exact(exact)))
        }
        "forward2d-t1" => Ok((presets::forward2d_t1(alpha), ForwardReference::Fdm)),
        "forward2d-t10" => Ok((presets::forward2d_t10(alpha), ForwardReference::Fdm)),
        "forward3d" => {
            let (spec, exact) = presets::forward3d(alpha);
            Ok((spec, ForwardReference::Exact(exact)))
        }
        other => Err(Error::Config(format!(
            "'{other}' is not a forward preset (expected one of {:?})",
            RunConfig::FORWARD_PRESETS
        ))),
    }
}

fn inverse_problem(cfg: &RunConfig) -> Result<InverseProblem> {
    let alpha = cfg.problem.alpha;
    match cfg.run.preset.as_str() {
        "inverse3d" => Ok(presets::inverse3d(alpha)),
        "inverse2d-desk" => Ok(presets::inverse2d(alpha)),
        other => Err(Error::Config(format!(
            "'{other}' is not an inverse preset (expected one of {:?})",
            RunConfig::INVERSE_PRESETS
        ))),
    }
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.run.out_dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Tensor evaluation grid over the problem box, `n` nodes per axis, axis 0
/// fastest. Returns flattened points (`count × d` row-major).
fn tensor_points(spec: &ProblemSpec, n: usize) -> Vec<f64> {
    let d = spec.dim();
    let count = n.pow(d as u32);
    let mut xs = Vec::with_capacity(count * d);
    for idx in 0..count {
        let mut rem = idx;
        for axis in 0..d {
            let (lo, hi) = spec.domain()[axis];
            let i = rem % n;
            rem /= n;
            xs.push(lo + (hi - lo) * i as f64 / (n - 1) as f64);
        }
    }
    xs
}

fn axis_coords(spec: &ProblemSpec, axis: usize, n: usize) -> Vec<f64> {
    let (lo, hi) = spec.domain()[axis];
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Trains a forward model, reconstructs it, scores it against the preset's
/// reference, and writes all artifacts. Returns the saved manifest.
pub fn cmd_forward(cfg: &RunConfig) -> Result<RunManifest> {
    let start = Instant::now();
    let (spec, reference) = forward_problem(cfg)?;
    let out_dir = ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::new("forward", cfg.clone());

    let hidden = vec![cfg.network.width; cfg.network.hidden_layers];
    let TrainResult { net, history } = train_forward(&spec, &hidden, &cfg.training, cfg.run.seed)?;

    let rule = StehfestRule::new(cfg.training.stehfest_m)?;
    let sint = cfg.training.s_interval(&spec)?;
    let t1 = cfg.training.t1;
    let t_final = spec.t_final();

    let rel_l2 = match &reference {
        ForwardReference::Fdm => {
            let grid = Grid::for_problem(&spec, cfg.fdm.space_nodes, cfg.fdm.time_nodes)?;
            let hist = solve_l1(&spec, &grid)?;
            // Score over the full space-time reference, excluding t = 0
            // (reconstruction starts at t1 > 0).
            let points: Vec<f64> = (0..grid.node_count())
                .flat_map(|i| grid.node_coord(i))
                .collect();
            let times: Vec<f64> = (1..grid.time_nodes()).map(|n| grid.time(n)).collect();
            let approx = reconstruct(&net, &points, &times, &rule, &sint, t1, t_final)?;
            let mut reference_values = Vec::with_capacity(approx.len());
            for n in 1..grid.time_nodes() {
                reference_values.extend_from_slice(hist.level(n));
            }
            let rel = relative_l2(&reference_values, &approx)?;

            if spec.dim() == 2 {
                export_2d_snapshots(
                    cfg, &spec, &net, &rule, &sint, t1, t_final, &grid, &hist, &out_dir,
                    &mut manifest,
                )?;
            }
            rel
        }
        ForwardReference::Exact(exact) => {
            let n = cfg.output.metric_grid.max(2);
            let points = tensor_points(&spec, n);
            let times: Vec<f64> = cfg
                .output
                .eval_times
                .iter()
                .copied()
                .filter(|&t| t >= t1 && t <= t_final)
                .collect();
            if times.is_empty() {
                return Err(Error::Config(
                    "no eval_times inside the reconstructable range [t1, T]".into(),
                ));
            }
            let approx = reconstruct(&net, &points, &times, &rule, &sint, t1, t_final)?;
            let count = points.len() / spec.dim();
            let mut reference_values = Vec::with_capacity(approx.len());
            for &t in &times {
                for j in 0..count {
                    reference_values
                        .push(exact.value(&points[j * spec.dim()..(j + 1) * spec.dim()], t));
                }
            }
            let rel = relative_l2(&reference_values, &approx)?;
            export_exact_snapshots(
                cfg, &spec, exact, &net, &rule, &sint, t1, t_final, &out_dir, &mut manifest,
            )?;
            rel
        }
    };

    csvio::write_loss_history(&out_dir.join("loss_history.csv"), &history)?;
    manifest.outputs.push("loss_history.csv".into());
    if cfg.output.heatmaps {
        let pts: Vec<(f64, f64)> = history.iter().map(|r| (r.iteration as f64, r.total)).collect();
        plot::loss_curve(&out_dir.join("loss_curve.png"), &pts)?;
        manifest.outputs.push("loss_curve.png".into());
    }
    net.save(&out_dir.join("model.ckpt"))?;
    manifest.outputs.push("model.ckpt".into());

    manifest.metrics.insert("relative_l2".into(), rel_l2);
    if let Some(last) = history.last() {
        manifest.metrics.insert("final_loss_total".into(), last.total);
        manifest.metrics.insert("final_loss_eq".into(), last.eq);
        manifest.metrics.insert("final_loss_bd".into(), last.bd);
    }
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    manifest.save(&out_dir.join("manifest.toml"))?;
    Ok(manifest)
}

/// Reference/predicted/error snapshots on the FDM grid at each eval time.
#[allow(clippy::too_many_arguments)]
fn export_2d_snapshots(
    cfg: &RunConfig,
    spec: &ProblemSpec,
    net: &dyn LaplaceField,
    rule: &StehfestRule,
    sint: &SInterval,
    t1: f64,
    t_final: f64,
    grid: &Grid,
    hist: &crate::fdm::FieldHistory,
    out_dir: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let nx = grid.space_nodes()[0];
    let ny = grid.space_nodes()[1];
    let xs: Vec<f64> = (0..nx).map(|i| grid.coord(0, i)).collect();
    let ys: Vec<f64> = (0..ny).map(|j| grid.coord(1, j)).collect();
    let points: Vec<f64> = (0..grid.node_count())
        .flat_map(|i| grid.node_coord(i))
        .collect();
    let tau = grid.tau();
    for &t in &cfg.output.eval_times {
        if !(t >= t1 && t <= t_final) {
            continue;
        }
        let level = (t / tau).round() as usize;
        let level = level.min(grid.time_nodes() - 1).max(1);
        let t_snap = grid.time(level);
        let approx = reconstruct(net, &points, &[t_snap], rule, sint, t1, t_final)?;
        let reference = hist.level(level);
        let tag = format!("t{t_snap:.4}");
        let diff: Vec<f64> = reference.iter().zip(&approx).map(|(&r, &a)| r - a).collect();
        csvio::write_field_2d(&out_dir.join(format!("u_ref_{tag}.csv")), &xs, &ys, reference)?;
        csvio::write_field_2d(&out_dir.join(format!("u_nn_{tag}.csv")), &xs, &ys, &approx)?;
        csvio::write_field_2d(&out_dir.join(format!("u_err_{tag}.csv")), &xs, &ys, &diff)?;
        manifest.outputs.push(format!("u_ref_{tag}.csv"));
        manifest.outputs.push(format!("u_nn_{tag}.csv"));
        manifest.outputs.push(format!("u_err_{tag}.csv"));
        if cfg.output.heatmaps {
            plot::heatmap(&out_dir.join(format!("u_ref_{tag}.png")), nx, ny, reference)?;
            plot::heatmap(&out_dir.join(format!("u_nn_{tag}.png")), nx, ny, &approx)?;
            plot::heatmap(&out_dir.join(format!("u_err_{tag}.png")), nx, ny, &diff)?;
            manifest.outputs.push(format!("u_ref_{tag}.png"));
            manifest.outputs.push(format!("u_nn_{tag}.png"));
            manifest.outputs.push(format!("u_err_{tag}.png"));
        }
        let _ = spec;
    }
    Ok(())
}

/// Snapshots against a manufactured solution: 1D profiles or 2D slices of a
/// 3D box at `z = slice_z`.
#[allow(clippy::too_many_arguments)]
fn export_exact_snapshots(
    cfg: &RunConfig,
    spec: &ProblemSpec,
    exact: &ExactSolution,
    net: &dyn LaplaceField,
    rule: &StehfestRule,
    sint: &SInterval,
    t1: f64,
    t_final: f64,
    out_dir: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let n = cfg.output.metric_grid.max(2);
    let d = spec.dim();
    for &t in &cfg.output.eval_times {
        if !(t >= t1 && t <= t_final) {
            continue;
        }
        let tag = format!("t{t:.4}");
        match d {
            1 => {
                let xs = axis_coords(spec, 0, n);
                let approx = reconstruct(net, &xs, &[t], rule, sint, t1, t_final)?;
                let mut out = String::from("x,u_exact,u_nn,error\n");
                for (j, &x) in xs.iter().enumerate() {
                    let e = exact.value(&[x], t);
                    writeln!(out, "{x:e},{e:e},{:e},{:e}", approx[j], e - approx[j]).unwrap();
                }
                let name = format!("u_{tag}.csv");
                std::fs::write(out_dir.join(&name), out)?;
                manifest.outputs.push(name);
            }
            2 | 3 => {
                // For 3D, slice at z = slice_z; for 2D use the full plane.
                let xs = axis_coords(spec, 0, n);
                let ys = axis_coords(spec, 1, n);
                let mut points = Vec::with_capacity(n * n * d);
                for &y in &ys {
                    for &x in &xs {
                        points.push(x);
                        points.push(y);
                        if d == 3 {
                            points.push(cfg.output.slice_z);
                        }
                    }
                }
                let approx = reconstruct(net, &points, &[t], rule, sint, t1, t_final)?;
                let reference: Vec<f64> = (0..n * n)
                    .map(|j| exact.value(&points[j * d..(j + 1) * d], t))
                    .collect();
                let diff: Vec<f64> =
                    reference.iter().zip(&approx).map(|(&r, &a)| r - a).collect();
                csvio::write_field_2d(&out_dir.join(format!("u_exact_{tag}.csv")), &xs, &ys, &reference)?;
                csvio::write_field_2d(&out_dir.join(format!("u_nn_{tag}.csv")), &xs, &ys, &approx)?;
                manifest.outputs.push(format!("u_exact_{tag}.csv"));
                manifest.outputs.push(format!("u_nn_{tag}.csv"));
                if cfg.output.heatmaps {
                    plot::heatmap(&out_dir.join(format!("u_exact_{tag}.png")), n, n, &reference)?;
                    plot::heatmap(&out_dir.join(format!("u_nn_{tag}.png")), n, n, &approx)?;
                    plot::heatmap(&out_dir.join(format!("u_err_{tag}.png")), n, n, &diff)?;
                    manifest.outputs.push(format!("u_exact_{tag}.png"));
                    manifest.outputs.push(format!("u_nn_{tag}.png"));
                    manifest.outputs.push(format!("u_err_{tag}.png"));
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(())
}

/// Trains the dual networks on an inverse preset, scores the recovered
/// coefficient over the observation window, and writes all artifacts.
pub fn cmd_inverse(cfg: &RunConfig) -> Result<RunManifest> {
    let start = Instant::now();
    let problem = inverse_problem(cfg)?;
    let spec = &problem.spec;
    let out_dir = ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::new("inverse", cfg.clone());
    let d = spec.dim();

    let result = train_inverse(&problem, &cfg.inverse, cfg.run.seed)?;

    // Coefficient error over the observation window.
    let n = cfg.output.metric_grid.max(2);
    let icfg = &cfg.inverse;
    let omega_points = {
        let coords: Vec<f64> = (0..n)
            .map(|i| icfg.omega_lo + (icfg.omega_hi - icfg.omega_lo) * i as f64 / (n - 1) as f64)
            .collect();
        let count = n.pow(d as u32);
        let mut xs = Vec::with_capacity(count * d);
        for idx in 0..count {
            let mut rem = idx;
            for _ in 0..d {
                xs.push(coords[rem % n]);
                rem /= n;
            }
        }
        xs
    };
    let a_recovered = result
        .a_net
        .forward_batch(&omega_points, None, JetMode::Value)
        .values;
    let a_reference: Vec<f64> = (0..omega_points.len() / d)
        .map(|j| problem.a_true.eval(&omega_points[j * d..(j + 1) * d]))
        .collect();
    let coeff_rel = relative_l2(&a_reference, &a_recovered)?;

    // Coefficient export over the full box (CSV + grid file), plus slices.
    let full_points = tensor_points(spec, n);
    let a_full = result
        .a_net
        .forward_batch(&full_points, None, JetMode::Value)
        .values;
    let mut axes = Vec::new();
    let names = ["x", "y", "z"];
    for axis in (0..d).rev() {
        let (lo, hi) = spec.domain()[axis];
        axes.push(Axis::new(names[axis], n, lo, hi));
    }
    GridFile::new(axes, a_full.clone())?.save(&out_dir.join("a_recovered.sdgf"))?;
    manifest.outputs.push("a_recovered.sdgf".into());

    let xs = axis_coords(spec, 0, n);
    let ys_or_vals: Vec<f64> = if d >= 2 { axis_coords(spec, 1, n) } else { vec![] };
    match d {
        2 => {
            let a_true_grid: Vec<f64> = (0..n * n)
                .map(|j| problem.a_true.eval(&full_points[j * 2..(j + 1) * 2]))
                .collect();
            let diff: Vec<f64> = a_true_grid.iter().zip(&a_full).map(|(&r, &v)| r - v).collect();
            csvio::write_field_2d(&out_dir.join("a_true.csv"), &xs, &ys_or_vals, &a_true_grid)?;
            csvio::write_field_2d(&out_dir.join("a_recovered.csv"), &xs, &ys_or_vals, &a_full)?;
            manifest.outputs.push("a_true.csv".into());
            manifest.outputs.push("a_recovered.csv".into());
            if cfg.output.heatmaps {
                plot::heatmap(&out_dir.join("a_true.png"), n, n, &a_true_grid)?;
                plot::heatmap(&out_dir.join("a_recovered.png"), n, n, &a_full)?;
                plot::heatmap(&out_dir.join("a_error.png"), n, n, &diff)?;
                manifest.outputs.push("a_true.png".into());
                manifest.outputs.push("a_recovered.png".into());
                manifest.outputs.push("a_error.png".into());
            }
        }
        3 => {
            // Slice at z = slice_z.
            let mut slice_points = Vec::with_capacity(n * n * 3);
            for &y in &ys_or_vals {
                for &x in &xs {
                    slice_points.extend_from_slice(&[x, y, cfg.output.slice_z]);
                }
            }
            let a_slice = result
                .a_net
                .forward_batch(&slice_points, None, JetMode::Value)
                .values;
            let a_true_slice: Vec<f64> = (0..n * n)
                .map(|j| problem.a_true.eval(&slice_points[j * 3..(j + 1) * 3]))
                .collect();
            let diff: Vec<f64> = a_true_slice.iter().zip(&a_slice).map(|(&r, &v)| r - v).collect();
            csvio::write_field_2d(&out_dir.join("a_true_slice.csv"), &xs, &ys_or_vals, &a_true_slice)?;
            csvio::write_field_2d(&out_dir.join("a_recovered_slice.csv"), &xs, &ys_or_vals, &a_slice)?;
            manifest.outputs.push("a_true_slice.csv".into());
            manifest.outputs.push("a_recovered_slice.csv".into());
            if cfg.output.heatmaps {
                plot::heatmap(&out_dir.join("a_true_slice.png"), n, n, &a_true_slice)?;
                plot::heatmap(&out_dir.join("a_recovered_slice.png"), n, n, &a_slice)?;
                plot::heatmap(&out_dir.join("a_error_slice.png"), n, n, &diff)?;
                manifest.outputs.push("a_true_slice.png".into());
                manifest.outputs.push("a_recovered_slice.png".into());
                manifest.outputs.push("a_error_slice.png".into());
            }
        }
        _ => {}
    }

    // Solution snapshot at (slice_z, slice_t) against the fabricated solution.
    let rule = StehfestRule::new(icfg.stehfest_m)?;
    let sint = icfg.s_interval(spec)?;
    let t = cfg.output.slice_t.clamp(icfg.t1, spec.t_final());
    if d >= 2 {
        let mut slice_points = Vec::with_capacity(n * n * d);
        for &y in &ys_or_vals {
            for &x in &xs {
                slice_points.push(x);
                slice_points.push(y);
                if d == 3 {
                    slice_points.push(cfg.output.slice_z);
                }
            }
        }
        let u_nn = reconstruct(
            &result.u_net,
            &slice_points,
            &[t],
            &rule,
            &sint,
            icfg.t1,
            spec.t_final(),
        )?;
        let u_exact: Vec<f64> = (0..n * n)
            .map(|j| problem.exact.value(&slice_points[j * d..(j + 1) * d], t))
            .collect();
        let rel_u = relative_l2(&u_exact, &u_nn)?;
        manifest.metrics.insert("solution_relative_l2_slice".into(), rel_u);
        csvio::write_field_2d(&out_dir.join("u_exact_slice.csv"), &xs, &ys_or_vals, &u_exact)?;
        csvio::write_field_2d(&out_dir.join("u_nn_slice.csv"), &xs, &ys_or_vals, &u_nn)?;
        manifest.outputs.push("u_exact_slice.csv".into());
        manifest.outputs.push("u_nn_slice.csv".into());
        if cfg.output.heatmaps {
            let diff: Vec<f64> = u_exact.iter().zip(&u_nn).map(|(&r, &v)| r - v).collect();
            plot::heatmap(&out_dir.join("u_exact_slice.png"), n, n, &u_exact)?;
            plot::heatmap(&out_dir.join("u_nn_slice.png"), n, n, &u_nn)?;
            plot::heatmap(&out_dir.join("u_err_slice.png"), n, n, &diff)?;
            manifest.outputs.push("u_exact_slice.png".into());
            manifest.outputs.push("u_nn_slice.png".into());
            manifest.outputs.push("u_err_slice.png".into());
        }
    }

    // Archive the measurement set actually used (reproducible from the seed).
    let mut obs_rng = rand::SeedableRng::seed_from_u64(derive_seed(cfg.run.seed, streams::MEASUREMENTS));
    let measurements = synthesize_measurements(spec, &problem.exact, icfg, &mut obs_rng)?;
    measurements.save_csv(&out_dir.join("measurements.csv"))?;
    manifest.outputs.push("measurements.csv".into());

    csvio::write_inverse_history(&out_dir.join("loss_history.csv"), &result.history)?;
    manifest.outputs.push("loss_history.csv".into());
    if cfg.output.heatmaps {
        let pts: Vec<(f64, f64)> = result
            .history
            .iter()
            .map(|r| (r.iteration as f64, r.total))
            .collect();
        plot::loss_curve(&out_dir.join("loss_curve.png"), &pts)?;
        manifest.outputs.push("loss_curve.png".into());
    }
    result.u_net.save(&out_dir.join("u_model.ckpt"))?;
    result.a_net.save(&out_dir.join("a_model.ckpt"))?;
    manifest.outputs.push("u_model.ckpt".into());
    manifest.outputs.push("a_model.ckpt".into());

    manifest
        .metrics
        .insert("coefficient_relative_l2_omega".into(), coeff_rel);
    if let Some(last) = result.history.last() {
        manifest.metrics.insert("final_loss_total".into(), last.total);
        manifest.metrics.insert("final_loss_eq".into(), last.eq);
        manifest.metrics.insert("final_loss_bd".into(), last.bd);
        manifest.metrics.insert("final_loss_obs".into(), last.obs);
        manifest.metrics.insert("final_loss_prior".into(), last.prior);
    }
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    manifest.save(&out_dir.join("manifest.toml"))?;
    Ok(manifest)
}

/// Runs the reference solver alone and exports the solution history.
pub fn cmd_fdm(cfg: &RunConfig) -> Result<RunManifest> {
    let start = Instant::now();
    let (spec, _) = forward_problem(cfg)?;
    if spec.dim() > 2 {
        return Err(Error::Config(
            "the reference solver covers 1D/2D presets only".into(),
        ));
    }
    let out_dir = ensure_out_dir(cfg)?;
    let mut manifest = RunManifest::new("fdm", cfg.clone());

    let grid = Grid::for_problem(&spec, cfg.fdm.space_nodes, cfg.fdm.time_nodes)?;
    let hist = solve_l1(&spec, &grid)?;
    hist.to_grid_file().save(&out_dir.join("reference.sdgf"))?;
    manifest.outputs.push("reference.sdgf".into());

    let last = hist.level(grid.time_nodes() - 1);
    match spec.dim() {
        1 => {
            let xs: Vec<f64> = (0..grid.space_nodes()[0]).map(|i| grid.coord(0, i)).collect();
            csvio::write_field_1d(&out_dir.join("u_final.csv"), &xs, last)?;
            manifest.outputs.push("u_final.csv".into());
        }
        2 => {
            let xs: Vec<f64> = (0..grid.space_nodes()[0]).map(|i| grid.coord(0, i)).collect();
            let ys: Vec<f64> = (0..grid.space_nodes()[1]).map(|j| grid.coord(1, j)).collect();
            csvio::write_field_2d(&out_dir.join("u_final.csv"), &xs, &ys, last)?;
            manifest.outputs.push("u_final.csv".into());
            if cfg.output.heatmaps {
                plot::heatmap(
                    &out_dir.join("u_final.png"),
                    grid.space_nodes()[0],
                    grid.space_nodes()[1],
                    last,
                )?;
                manifest.outputs.push("u_final.png".into());
            }
        }
        _ => unreachable!(),
    }

    let max_abs = last.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    manifest.metrics.insert("final_level_max_abs".into(), max_abs);
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    manifest.save(&out_dir.join("manifest.toml"))?;
    Ok(manifest)
}

/// What `subdiff nilt` should invert or export.
pub enum NiltRequest {
    /// A named transform/inverse pair evaluated at the given times.
    Pair {
        name: String,
        times: Vec<f64>,
        m: usize,
    },
    /// Export the Stehfest weights for inspection.
    Coefficients { m: usize },
    /// Invert a checkpointed network's s-slice at a fixed spatial point.
    Checkpoint {
        path: PathBuf,
        point: Vec<f64>,
        times: Vec<f64>,
        m: usize,
        t1: f64,
        t_final: f64,
    },
}

/// Result rows for printing: `(t, numeric, exact)`; `exact` is NaN when no
/// closed form applies.
pub fn cmd_nilt(request: &NiltRequest, out_dir: &Path) -> Result<Vec<(f64, f64, f64)>> {
    std::fs::create_dir_all(out_dir)?;
    match request {
        NiltRequest::Coefficients { m } => {
            let rule = StehfestRule::new(*m)?;
            csvio::write_coefficients(
                &out_dir.join(format!("stehfest_m{m}.csv")),
                rule.coefficients(),
            )?;
            Ok(rule
                .coefficients()
                .iter()
                .enumerate()
                .map(|(i, &c)| ((i + 1) as f64, c, f64::NAN))
                .collect())
        }
        NiltRequest::Pair { name, times, m } => {
            let rule = StehfestRule::new(*m)?;
            type Pair = (fn(f64) -> f64, fn(f64) -> f64);
            let (f_tilde, exact): Pair = match name.as_str() {
                "one-over-s" => (|s| 1.0 / s, |_| 1.0),
                "one-over-s2" => (|s| 1.0 / (s * s), |t| t),
                "exp-decay" => (|s| 1.0 / (s + 1.0), |t| (-t).exp()),
                other => {
                    return Err(Error::Config(format!(
                        "unknown transform pair '{other}' (one-over-s, one-over-s2, exp-decay)"
                    )))
                }
            };
            let mut rows = Vec::new();
            for &t in times {
                rows.push((t, rule.invert(f_tilde, t)?, exact(t)));
            }
            csvio::write_nilt_table(&out_dir.join(format!("nilt_{name}_m{m}.csv")), &rows)?;
            Ok(rows)
        }
        NiltRequest::Checkpoint {
            path,
            point,
            times,
            m,
            t1,
            t_final,
        } => {
            let net = crate::nn::NeuralField::load(path)?;
            if point.len() != net.spatial_dim() {
                return Err(Error::Config(format!(
                    "point has {} coordinates, checkpoint expects {}",
                    point.len(),
                    net.spatial_dim()
                )));
            }
            let rule = StehfestRule::new(*m)?;
            let sint = SInterval::new(*t_final, *t1, *m)?;
            let values = reconstruct(&net, point, times, &rule, &sint, *t1, *t_final)?;
            let rows: Vec<(f64, f64, f64)> = times
                .iter()
                .zip(&values)
                .map(|(&t, &v)| (t, v, f64::NAN))
                .collect();
            csvio::write_nilt_table(&out_dir.join("nilt_checkpoint.csv"), &rows)?;
            Ok(rows)
        }
    }
}
