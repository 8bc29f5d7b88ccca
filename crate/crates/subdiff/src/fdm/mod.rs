//! L1-scheme finite-difference reference solver for the subdiffusion
//! equation on tensor grids (1D/2D), plus the relative-l2 metric.
//!
//! The Caputo derivative at level `n` is discretized with the L1 weights
//! `b_j = (j+1)^{1−α} − j^{1−α}`:
//!
//! ```text
//! ∂t^α u(t_n) ≈ γ [ u^n − Σ_{j=1}^{n−1} (b_{j−1}−b_j) u^{n−j} − b_{n−1} u^0 ],
//! γ = 1 / (Γ(2−α) τ^α),
//! ```
//!
//! which pairs with a conservative central stencil for `∇·(a∇u)` into one
//! implicit solve per step, `(γI − A_h − C) u^n = γ·(memory term) + f^n`.
//! The matrix is time-independent, so it is factorized once (banded LU) and
//! reused; the memory term rereads the whole history each step, which is why
//! the history is stored in full. Temporal accuracy is order `2−α`.

pub mod banded;
pub mod gridfile;

use crate::error::{Error, Result};
use crate::laplace::gamma::gamma;
use crate::problem::ProblemSpec;
use banded::BandedMatrix;

pub use gridfile::{Axis, GridFile};

/// Full-history storage cap; `solve_l1` refuses grids whose history would
/// exceed it. `bytes = time_nodes · Π space_nodes · 8`.
pub const HISTORY_BYTE_LIMIT: usize = 2 << 30;

/// Uniform tensor grid over the problem box plus a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Vec<(f64, f64)>,
    space_nodes: Vec<usize>,
    t_final: f64,
    time_nodes: usize,
}

impl Grid {
    pub fn new(
        domain: Vec<(f64, f64)>,
        space_nodes: Vec<usize>,
        t_final: f64,
        time_nodes: usize,
    ) -> Result<Self> {
        if domain.len() != space_nodes.len() {
            return Err(Error::Domain("axis count mismatch".into()));
        }
        if space_nodes.iter().any(|&n| n < 3) {
            return Err(Error::Domain("need at least 3 nodes per axis".into()));
        }
        if time_nodes < 2 {
            return Err(Error::Domain("need at least 2 time levels".into()));
        }
        if !(t_final > 0.0) {
            return Err(Error::Domain("final time must be positive".into()));
        }
        Ok(Self {
            domain,
            space_nodes,
            t_final,
            time_nodes,
        })
    }

    /// Grid matching a problem's box: `n` nodes per space axis, `nt` levels.
    pub fn for_problem(spec: &ProblemSpec, n: usize, nt: usize) -> Result<Self> {
        Self::new(spec.domain().to_vec(), vec![n; spec.dim()], spec.t_final(), nt)
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn space_nodes(&self) -> &[usize] {
        &self.space_nodes
    }

    pub fn time_nodes(&self) -> usize {
        self.time_nodes
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn tau(&self) -> f64 {
        self.t_final / (self.time_nodes - 1) as f64
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let (lo, hi) = self.domain[axis];
        (hi - lo) / (self.space_nodes[axis] - 1) as f64
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = self.domain[axis];
        lo + (hi - lo) * i as f64 / (self.space_nodes[axis] - 1) as f64
    }

    pub fn time(&self, level: usize) -> f64 {
        self.t_final * level as f64 / (self.time_nodes - 1) as f64
    }

    /// Total space nodes per level.
    pub fn node_count(&self) -> usize {
        self.space_nodes.iter().product()
    }

    /// Node coordinates, row-major with axis 0 fastest.
    pub fn node_coord(&self, idx: usize) -> Vec<f64> {
        let mut rem = idx;
        let mut x = Vec::with_capacity(self.dim());
        for axis in 0..self.dim() {
            let n = self.space_nodes[axis];
            x.push(self.coord(axis, rem % n));
            rem /= n;
        }
        x
    }

    fn is_boundary(&self, idx: usize) -> bool {
        let mut rem = idx;
        for axis in 0..self.dim() {
            let n = self.space_nodes[axis];
            let i = rem % n;
            if i == 0 || i == n - 1 {
                return true;
            }
            rem /= n;
        }
        false
    }
}

/// Solution values at every grid node for every time level.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    grid: Grid,
    /// `levels[n]` is the field at `t_n`, row-major with axis 0 fastest.
    levels: Vec<Vec<f64>>,
}

impl FieldHistory {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Exports the full history as a grid file with axes `(t, .., y, x)` —
    /// listed slowest-first, so the payload order matches the in-memory
    /// layout (axis 0 fastest).
    pub fn to_grid_file(&self) -> GridFile {
        let g = &self.grid;
        let mut axes = vec![Axis::new("t", g.time_nodes, 0.0, g.t_final)];
        let names = ["x", "y", "z"];
        for axis in (0..g.dim()).rev() {
            let (lo, hi) = g.domain[axis];
            axes.push(Axis::new(names[axis], g.space_nodes[axis], lo, hi));
        }
        let mut values = Vec::with_capacity(g.time_nodes * g.node_count());
        for level in &self.levels {
            values.extend_from_slice(level);
        }
        GridFile::new(axes, values).expect("consistent by construction")
    }
}

/// L1 weights `b_j = (j+1)^{1−α} − j^{1−α}`, `j = 0..count-1`.
pub fn l1_weights(alpha: f64, count: usize) -> Vec<f64> {
    let e = 1.0 - alpha;
    (0..count)
        .map(|j| ((j + 1) as f64).powf(e) - (j as f64).powf(e))
        .collect()
}

/// Implicit L1 time stepping on the grid. Supports 1D and 2D problems with
/// smooth coefficient fields.
pub fn solve_l1(spec: &ProblemSpec, grid: &Grid) -> Result<FieldHistory> {
    if spec.dim() != grid.dim() {
        return Err(Error::Domain("grid and problem dimension differ".into()));
    }
    if spec.dim() > 2 {
        return Err(Error::Domain(
            "the reference solver covers 1D and 2D; higher dimensions use manufactured solutions"
                .into(),
        ));
    }
    let bytes = grid.time_nodes * grid.node_count() * 8;
    if bytes > HISTORY_BYTE_LIMIT {
        return Err(Error::Domain(format!(
            "history would need {bytes} bytes (time_nodes·space_nodes·8), over the {HISTORY_BYTE_LIMIT} cap"
        )));
    }

    let alpha = spec.alpha();
    let tau = grid.tau();
    let gamma_factor = 1.0 / (gamma(2.0 - alpha) * tau.powf(alpha));
    let weights = l1_weights(alpha, grid.time_nodes);

    // Interior numbering, axis 0 fastest.
    let nodes = grid.node_count();
    let interior: Vec<usize> = (0..nodes).filter(|&i| !grid.is_boundary(i)).collect();
    let mut interior_pos = vec![usize::MAX; nodes];
    for (k, &idx) in interior.iter().enumerate() {
        interior_pos[idx] = k;
    }

    let matrix = assemble_matrix(spec, grid, &interior, &interior_pos, gamma_factor)?;
    let lu = matrix.factorize()?;

    // Level 0: the initial value (boundary nodes included as sampled).
    let mut levels = Vec::with_capacity(grid.time_nodes);
    let coords: Vec<Vec<f64>> = (0..nodes).map(|i| grid.node_coord(i)).collect();
    levels.push(coords.iter().map(|x| spec.initial_value().eval(x)).collect::<Vec<_>>());

    let m = interior.len();
    let mut rhs = vec![0.0; m];
    for n in 1..grid.time_nodes {
        let t_n = grid.time(n);
        for (k, &idx) in interior.iter().enumerate() {
            // Memory term: Σ_{j=1}^{n-1} (b_{j-1} − b_j) u^{n-j} + b_{n-1} u^0.
            let mut mem = weights[n - 1] * levels[0][idx];
            for j in 1..n {
                mem += (weights[j - 1] - weights[j]) * levels[n - j][idx];
            }
            rhs[k] = gamma_factor * mem + spec.source_value(&coords[idx], t_n);
        }
        lu.solve_into(&mut rhs);
        let mut level = vec![0.0; nodes]; // Dirichlet boundary pinned to zero
        for (k, &idx) in interior.iter().enumerate() {
            level[idx] = rhs[k];
        }
        levels.push(level);
    }

    Ok(FieldHistory {
        grid: grid.clone(),
        levels,
    })
}

/// `γI − A_h − C` over the interior nodes, conservative stencil for
/// `∇·(a∇u)` with `a` at cell midpoints.
fn assemble_matrix(
    spec: &ProblemSpec,
    grid: &Grid,
    interior: &[usize],
    interior_pos: &[usize],
    gamma_factor: f64,
) -> Result<BandedMatrix> {
    let d = grid.dim();
    let bandwidth = match d {
        1 => 1,
        2 => grid.space_nodes[0] - 2,
        _ => unreachable!(),
    };
    let mut mat = BandedMatrix::zeros(interior.len(), bandwidth, bandwidth);

    let nx = grid.space_nodes[0];
    for (k, &idx) in interior.iter().enumerate() {
        let x = grid.node_coord(idx);
        let mut diag = gamma_factor - spec.reaction().eval(&x);
        for axis in 0..d {
            let h = grid.spacing(axis);
            let stride = if axis == 0 { 1 } else { nx };
            let mut x_mid = x.clone();
            x_mid[axis] = x[axis] + 0.5 * h;
            let a_plus = spec.diffusion().eval(&x_mid);
            x_mid[axis] = x[axis] - 0.5 * h;
            let a_minus = spec.diffusion().eval(&x_mid);
            diag += (a_plus + a_minus) / (h * h);
            // Neighbors on the Dirichlet boundary contribute zero.
            let up = idx + stride;
            if interior_pos[up] != usize::MAX {
                mat.set(k, interior_pos[up], -a_plus / (h * h));
            }
            let down = idx - stride;
            if interior_pos[down] != usize::MAX {
                mat.set(k, interior_pos[down], -a_minus / (h * h));
            }
        }
        mat.set(k, k, diag);
    }
    Ok(mat)
}

/// Relative l2 error `‖ref − approx‖₂ / ‖ref‖₂` over matching sample sets.
pub fn relative_l2(u_ref: &[f64], u_approx: &[f64]) -> Result<f64> {
    if u_ref.len() != u_approx.len() {
        return Err(Error::Domain(format!(
            "sample sets differ in size: {} vs {}",
            u_ref.len(),
            u_approx.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&r, &a) in u_ref.iter().zip(u_approx) {
        num += (r - a) * (r - a);
        den += r * r;
    }
    if den == 0.0 {
        return Err(Error::Domain("reference field has zero norm".into()));
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::presets;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn l1_weights_are_positive_and_decreasing() {
        for &alpha in &[0.1, 0.3, 0.5, 0.8, 0.95] {
            let w = l1_weights(alpha, 64);
            assert_eq!(w[0], 1.0);
            for j in 1..w.len() {
                assert!(w[j] > 0.0, "alpha={alpha} j={j}");
                assert!(w[j] < w[j - 1], "alpha={alpha} j={j}");
            }
        }
    }

    #[test]
    fn l1_weights_approach_backward_euler_as_alpha_approaches_one() {
        let w = l1_weights(0.999, 32);
        assert_eq!(w[0], 1.0);
        for j in 1..w.len() {
            assert!(w[j].abs() < 1e-2, "j={j}: {}", w[j]);
        }
    }

    #[test]
    fn zero_data_gives_zero_history() {
        let spec = crate::problem::ProblemSpec::new(
            "null",
            vec![(0.0, 1.0)],
            0.5,
            1.0,
            crate::problem::Coefficient::constant(1.0),
            crate::problem::ScalarField::constant(0.0),
            crate::problem::ScalarField::constant(0.0),
            vec![],
        )
        .unwrap();
        let grid = Grid::for_problem(&spec, 21, 11).unwrap();
        let hist = solve_l1(&spec, &grid).unwrap();
        for level in hist.levels() {
            assert!(level.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn manufactured_1d_field_is_accurate_at_the_center() {
        // u = (2t+5) sin(πx) at (0.5, 1): exactly 7.
        let (spec, _) = presets::manufactured_1d(0.5);
        let grid = Grid::for_problem(&spec, 201, 201).unwrap();
        let hist = solve_l1(&spec, &grid).unwrap();
        let center = 100; // x = 0.5
        let got = hist.level(200)[center];
        assert_abs_diff_eq!(got, 7.0, epsilon = 1e-2);
    }

    #[test]
    fn boundary_stays_pinned_and_initial_level_matches_u0() {
        let (spec, _) = presets::manufactured_2d(0.5);
        let grid = Grid::for_problem(&spec, 17, 9).unwrap();
        let hist = solve_l1(&spec, &grid).unwrap();
        for idx in 0..grid.node_count() {
            let x = grid.node_coord(idx);
            assert_relative_eq!(
                hist.level(0)[idx],
                spec.initial_value().eval(&x),
                max_relative = 1e-14
            );
        }
        for n in 1..grid.time_nodes() {
            for idx in 0..grid.node_count() {
                if grid.is_boundary(idx) {
                    assert_eq!(hist.level(n)[idx], 0.0);
                }
            }
        }
    }

    #[test]
    fn nonnegative_data_keeps_the_solution_nonnegative() {
        // Discrete maximum-principle smoke test: f ≥ 0, u0 ≥ 0, c = 0.
        let spec = crate::problem::ProblemSpec::new(
            "positivity",
            vec![(0.0, 1.0)],
            0.5,
            1.0,
            crate::problem::Coefficient::constant(1.0),
            crate::problem::ScalarField::constant(0.0),
            crate::problem::ScalarField::new(|x| x[0] * (1.0 - x[0])),
            vec![crate::problem::SourceTerm {
                spatial: crate::problem::ScalarField::constant(1.0),
                profile: crate::laplace::TimeProfile::constant(1.0),
            }],
        )
        .unwrap();
        let grid = Grid::for_problem(&spec, 41, 41).unwrap();
        let hist = solve_l1(&spec, &grid).unwrap();
        for level in hist.levels() {
            for &v in level {
                assert!(v >= -1e-12, "maximum principle violated: {v}");
            }
        }
    }

    #[test]
    fn variable_coefficient_2d_manufactured_solution_converges() {
        // The inverse-problem spec has a genuinely variable a(x); a coarse and
        // a finer grid must both track the exact solution, the finer better.
        let prob = presets::inverse2d(0.5);
        let exact = |x: &[f64], t: f64| prob.exact.value(x, t);
        let err = |n: usize, nt: usize| -> f64 {
            let grid = Grid::for_problem(&prob.spec, n, nt).unwrap();
            let hist = solve_l1(&prob.spec, &grid).unwrap();
            let approx = hist.level(nt - 1);
            let refv: Vec<f64> = (0..grid.node_count())
                .map(|i| exact(&grid.node_coord(i), grid.t_final()))
                .collect();
            relative_l2(&refv, approx).unwrap()
        };
        let coarse = err(21, 41);
        let fine = err(41, 81);
        assert!(fine < coarse, "refinement must reduce error: {coarse} -> {fine}");
        assert!(fine < 5e-3, "fine-grid error too large: {fine}");
    }

    #[test]
    fn relative_l2_basics() {
        let a = vec![1.0, -2.0, 3.0];
        assert_eq!(relative_l2(&a, &a).unwrap(), 0.0);
        let scaled: Vec<f64> = a.iter().map(|v| 1.1 * v).collect();
        assert_relative_eq!(relative_l2(&a, &scaled).unwrap(), 0.1, max_relative = 1e-12);
        assert!(relative_l2(&[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(relative_l2(&a, &a[..2]).is_err());
    }

    #[test]
    fn history_exports_to_grid_file() {
        let (spec, _) = presets::manufactured_1d(0.5);
        let grid = Grid::for_problem(&spec, 11, 5).unwrap();
        let hist = solve_l1(&spec, &grid).unwrap();
        let gf = hist.to_grid_file();
        assert_eq!(gf.axes.len(), 2);
        assert_eq!(gf.axes[0].name, "t");
        assert_eq!(gf.axes[1].name, "x");
        assert_eq!(gf.values.len(), 11 * 5);
        assert_eq!(&gf.values[..11], hist.level(0));
    }

    #[test]
    fn oversized_history_is_refused() {
        let (spec, _) = presets::manufactured_2d(0.5);
        let grid = Grid::new(
            spec.domain().to_vec(),
            vec![4097, 4097],
            1.0,
            4097,
        )
        .unwrap();
        assert!(solve_l1(&spec, &grid).is_err());
    }
}
