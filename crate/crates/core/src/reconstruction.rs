//! Rebuilding an immersion from compatible data by integrating the
//! moving-frame system
//!
//! ```text
//! A^{-1} dA = Omega + L(A),    df = B(f) A omega,
//! ```
//!
//! where the columns of `A` are the canonical-frame components of
//! `(e1, e2, N)`, `Omega` is the connection matrix of the surface,
//! `L(A)` carries the connection of the ambient frame, and
//! `omega = (omega^1, omega^2, 0)` is the coframe dual to `(e1, e2)`.
//!
//! Integration runs along grid lines with classical RK4 (coefficients
//! interpolated between nodes by cubic Lagrange polynomials) and projects
//! `A` back onto SO(3) after every grid edge.

use nalgebra::{Matrix3, SymmetricEigen, Vector2, Vector3};

use crate::ambient::{AmbientPoint, ModelSpace};
use crate::compatibility::{default_tol, verify_with};
use crate::error::{Error, Result};
use crate::fd::{self, Order};
use crate::immersion::{tangent_frame_inverse, Grid, QuadrupleField, SurfacePatch};
use crate::par::{map_indices, try_map_indices, Execution};

/// Largest `|A^T A - I|` accepted for a matrix treated as a rotation.
pub const ORTHOGONALITY_TOL: f64 = 1e-6;

/// Tolerance on the last row of the initial frame.
pub const INITIAL_ROW_TOL: f64 = 1e-9;

/// The connection matrix of the surface and its coframe, per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionForms {
    pub grid: Grid,
    /// `Omega(e1)`, `Omega(e2)` with `Omega[a][b] = omega^a_b`.
    pub on_frame: Vec<[Matrix3<f64>; 2]>,
    /// `Omega(d/du)`, `Omega(d/dv)`.
    pub on_params: Vec<[Matrix3<f64>; 2]>,
    /// `(omega^1, omega^2, 0)` evaluated on `d/du` and `d/dv`.
    pub coframe: Vec<[Vector3<f64>; 2]>,
}

/// Builds `Omega` from `q`. The tangential block `omega^2_1` comes from the
/// first structure equation `d omega^i + omega^i_p ^ omega^p = 0`
/// (fourth-order differences of the coframe); the normal blocks are
/// `omega^3_j(e_k) = <S e_k, e_j>`.
pub fn connection_forms(q: &QuadrupleField) -> Result<ConnectionForms> {
    connection_forms_with(q, Execution::default())
}

pub fn connection_forms_with(q: &QuadrupleField, exec: Execution) -> Result<ConnectionForms> {
    let grid = q.grid;
    grid.require(fd::min_nodes(Order::Fourth))?;
    // coframe[k][a] = (omega^1(d_a), omega^2(d_a))
    let coframe2: Vec<[Vector2<f64>; 2]> = q
        .points
        .iter()
        .map(|p| {
            let pi = tangent_frame_inverse(&p.g);
            [pi.column(0).into(), pi.column(1).into()]
        })
        .collect();
    let (du, dv) = (grid.du(), grid.dv());
    let results = map_indices(exec, grid.len(), |k| {
        let (i, j) = grid.coords(k);
        let d_u_of_v = fd::line_derivative(|ii| coframe2[grid.index(ii, j)][1], grid.nu, i, du, Order::Fourth);
        let d_v_of_u = fd::line_derivative(|jj| coframe2[grid.index(i, jj)][0], grid.nv, j, dv, Order::Fourth);
        // d omega^i (d_u, d_v)
        let d = d_u_of_v - d_v_of_u;
        let det_p = 1.0 / q.points[k].g.determinant().sqrt();
        let c = [d[0] * det_p, d[1] * det_p];
        let s = q.points[k].s;
        let on_frame: [Matrix3<f64>; 2] = std::array::from_fn(|e| {
            Matrix3::new(
                0.0,
                -c[e],
                -s[(0, e)],
                c[e],
                0.0,
                -s[(1, e)],
                s[(0, e)],
                s[(1, e)],
                0.0,
            )
        });
        let cf = coframe2[k];
        let on_params: [Matrix3<f64>; 2] =
            std::array::from_fn(|a| on_frame[0] * cf[a][0] + on_frame[1] * cf[a][1]);
        let coframe: [Vector3<f64>; 2] =
            std::array::from_fn(|a| Vector3::new(cf[a][0], cf[a][1], 0.0));
        (on_frame, on_params, coframe)
    });
    let mut out = ConnectionForms {
        grid,
        on_frame: Vec::with_capacity(grid.len()),
        on_params: Vec::with_capacity(grid.len()),
        coframe: Vec::with_capacity(grid.len()),
    };
    for (a, b, c) in results {
        out.on_frame.push(a);
        out.on_params.push(b);
        out.coframe.push(c);
    }
    Ok(out)
}

fn orthogonality_defect(z: &Matrix3<f64>) -> f64 {
    (z.transpose() * z - Matrix3::identity()).amax()
}

/// `L(Z)(e_k)[a][b] = sum Z[e][a] Z[c][k] Z[d][b] <nabla_{E_c} E_e, E_d>`
/// for `k = 1, 2`, from the frame connection coefficients at `p`.
pub fn l_general(m: &ModelSpace, z: &Matrix3<f64>, p: &AmbientPoint) -> Result<[Matrix3<f64>; 2]> {
    let dev = orthogonality_defect(z);
    if !(dev < ORTHOGONALITY_TOL) {
        return Err(Error::NotOrthogonal(dev));
    }
    let gam = m.frame_christoffels(p)?;
    Ok(std::array::from_fn(|k| {
        let mut l = Matrix3::zeros();
        for a in 0..3 {
            for b in 0..3 {
                let mut s = 0.0;
                for e in 0..3 {
                    for c in 0..3 {
                        for d in 0..3 {
                            s += z[(e, a)] * z[(c, k)] * z[(d, b)] * gam.get(d, c, e);
                        }
                    }
                }
                l[(a, b)] = s;
            }
        }
        l
    }))
}

/// Closed form of `L(Z)` for `tau != 0`, in terms of the last row `T` of
/// `Z`: `(2 tau - sigma) [T]_x eta + tau K1 omega^1 + tau K2 omega^2`
/// with `eta = T1 omega^1 + T2 omega^2`.
pub fn l_closed_form(m: &ModelSpace, z: &Matrix3<f64>) -> Result<[Matrix3<f64>; 2]> {
    let sigma = m
        .sigma()
        .ok_or_else(|| Error::InvalidParameter("closed form of L needs tau != 0".into()))?;
    let dev = orthogonality_defect(z);
    if !(dev < ORTHOGONALITY_TOL) {
        return Err(Error::NotOrthogonal(dev));
    }
    let tau = m.tau();
    let t = Vector3::new(z[(2, 0)], z[(2, 1)], z[(2, 2)]);
    let cross = t.cross_matrix();
    let k1 = Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0);
    let k2 = Matrix3::new(0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let c = 2.0 * tau - sigma;
    Ok([cross * (c * t[0]) + k1 * tau, cross * (c * t[1]) + k2 * tau])
}

/// The rotation with last row `(T1, T2, nu)` whose first row is the
/// Gram-Schmidt projection of `(1, 0, 0)` (or `(0, 1, 0)` when that is
/// nearly parallel to the last row).
pub fn initial_frame(t: &Vector2<f64>, nu: f64) -> Result<Matrix3<f64>> {
    let r = Vector3::new(t[0], t[1], nu);
    let n = r.norm();
    if !((n - 1.0).abs() < 1e-6) {
        return Err(Error::InitialFrame((n - 1.0).abs()));
    }
    let r = r / n;
    let mut a = Vector3::x() - r * r[0];
    if a.norm() < 0.1 {
        a = Vector3::y() - r * r[1];
    }
    let a = a.normalize();
    let b = r.cross(&a);
    Ok(Matrix3::from_rows(&[a.transpose(), b.transpose(), r.transpose()]))
}

/// Nearest rotation to `a` (polar factor).
pub fn project_to_rotation(a: &Matrix3<f64>) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(a.transpose() * a);
    let inv_sqrt = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    a * (eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameState {
    pub a: Matrix3<f64>,
    pub f: AmbientPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    /// Grid node where `(A0, x0)` is imposed.
    pub start: (usize, usize),
    /// RK4 steps per grid edge.
    pub substeps: usize,
    /// Compatibility tolerance checked before integrating; `None` uses
    /// the grid default.
    pub tol: Option<f64>,
    pub check_compatibility: bool,
    pub exec: Execution,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            start: (0, 0),
            substeps: 4,
            tol: None,
            check_compatibility: true,
            exec: Execution::default(),
        }
    }
}

/// Frames and positions on every node of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub model: ModelSpace,
    pub grid: Grid,
    pub states: Vec<FrameState>,
    /// Largest `|A^T A - I|` seen before re-projection.
    pub max_drift: f64,
}

impl Reconstruction {
    pub fn points(&self) -> Vec<AmbientPoint> {
        self.states.iter().map(|s| s.f).collect()
    }

    pub fn patch(&self) -> Result<SurfacePatch> {
        SurfacePatch::sampled(self.model, self.grid, self.points())
    }

    /// Largest deviation of the last row of `A` from `(T1, T2, nu)`.
    pub fn max_last_row_deviation(&self, q: &QuadrupleField) -> f64 {
        self.states
            .iter()
            .zip(&q.points)
            .map(|(s, p)| {
                let r = Vector3::new(p.t[0], p.t[1], p.nu);
                (s.a.row(2).transpose() - r).amax()
            })
            .fold(0.0, f64::max)
    }
}

/// Coefficients along one grid line, per unit of node index.
struct Line {
    omega: Vec<Matrix3<f64>>,
    coframe: Vec<Vector3<f64>>,
}

impl Line {
    fn row(forms: &ConnectionForms, j: usize) -> Line {
        let g = &forms.grid;
        let du = g.du();
        Line {
            omega: (0..g.nu).map(|i| forms.on_params[g.index(i, j)][0] * du).collect(),
            coframe: (0..g.nu).map(|i| forms.coframe[g.index(i, j)][0] * du).collect(),
        }
    }

    fn column(forms: &ConnectionForms, i: usize) -> Line {
        let g = &forms.grid;
        let dv = g.dv();
        Line {
            omega: (0..g.nv).map(|j| forms.on_params[g.index(i, j)][1] * dv).collect(),
            coframe: (0..g.nv).map(|j| forms.coframe[g.index(i, j)][1] * dv).collect(),
        }
    }

    fn at(&self, x: f64) -> (Matrix3<f64>, Vector3<f64>) {
        let n = self.omega.len();
        if n < 4 {
            // linear interpolation on very short lines
            let i = (x.floor() as usize).min(n - 2);
            let t = x - i as f64;
            return (
                self.omega[i] * (1.0 - t) + self.omega[i + 1] * t,
                self.coframe[i] * (1.0 - t) + self.coframe[i + 1] * t,
            );
        }
        (
            fd::line_interpolate(|k| self.omega[k], n, x),
            fd::line_interpolate(|k| self.coframe[k], n, x),
        )
    }
}

struct Integrator<'a> {
    m: &'a ModelSpace,
    substeps: usize,
}

impl Integrator<'_> {
    /// `(dA/dx, df/dx)` at line position `x`.
    fn rhs(
        &self,
        line: &Line,
        x: f64,
        a: &Matrix3<f64>,
        f: &Vector3<f64>,
    ) -> Option<(Matrix3<f64>, Vector3<f64>)> {
        let p = AmbientPoint::from_coords(f);
        let frame = self.m.canonical_frame_at(&p).ok()?;
        let gam = self.m.frame_christoffels(&p).ok()?;
        let (omega, w) = line.at(x);
        let dir = a * w;
        // (nabla_dir E_e)[d] = g_dir[d][e]
        let mut g_dir = Matrix3::zeros();
        for d in 0..3 {
            for e in 0..3 {
                g_dir[(d, e)] = (0..3).map(|c| dir[c] * gam.get(d, c, e)).sum();
            }
        }
        Some((a * omega - g_dir * a, frame.to_coordinate(&dir)))
    }

    /// Advances one grid edge from node `x0` to `x0 +- 1`. Returns the
    /// projected state and the drift before projection.
    fn edge(&self, line: &Line, x0: f64, x1: f64, s: &FrameState) -> Option<(FrameState, f64)> {
        let h = (x1 - x0) / self.substeps as f64;
        let mut a = s.a;
        let mut f = s.f.coords();
        for n in 0..self.substeps {
            let x = x0 + n as f64 * h;
            let (ka1, kf1) = self.rhs(line, x, &a, &f)?;
            let (ka2, kf2) = self.rhs(line, x + 0.5 * h, &(a + ka1 * (0.5 * h)), &(f + kf1 * (0.5 * h)))?;
            let (ka3, kf3) = self.rhs(line, x + 0.5 * h, &(a + ka2 * (0.5 * h)), &(f + kf2 * (0.5 * h)))?;
            let (ka4, kf4) = self.rhs(line, x + h, &(a + ka3 * h), &(f + kf3 * h))?;
            a += (ka1 + ka2 * 2.0 + ka3 * 2.0 + ka4) * (h / 6.0);
            f += (kf1 + kf2 * 2.0 + kf3 * 2.0 + kf4) * (h / 6.0);
        }
        let p = AmbientPoint::from_coords(&f);
        self.m.check_domain(&p).ok()?;
        let drift = orthogonality_defect(&a);
        Some((FrameState { a: project_to_rotation(&a), f: p }, drift))
    }

    /// Integrates along `line` from node `from` to node `to`, returning the
    /// states at every node in between (inclusive) in order of travel.
    fn sweep(
        &self,
        line: &Line,
        from: usize,
        to: usize,
        start: FrameState,
        node: impl Fn(usize) -> (usize, usize),
    ) -> Result<(Vec<FrameState>, f64)> {
        let mut states = vec![start];
        let mut drift: f64 = 0.0;
        let mut k = from;
        while k != to {
            let next = if to > k { k + 1 } else { k - 1 };
            let cur = *states.last().expect("non-empty");
            let (s, d) = self.edge(line, k as f64, next as f64, &cur).ok_or_else(|| {
                let (i, j) = node(k);
                Error::ChartExit { i, j }
            })?;
            drift = drift.max(d);
            states.push(s);
            k = next;
        }
        Ok((states, drift))
    }
}

fn check_initial(q: &QuadrupleField, m: &ModelSpace, a0: &Matrix3<f64>, x0: &AmbientPoint, node: (usize, usize)) -> Result<()> {
    let dev = orthogonality_defect(a0);
    if !(dev < 1e-9) || a0.determinant() < 0.0 {
        return Err(Error::NotOrthogonal(dev));
    }
    let p = q.at(node.0, node.1);
    let r = Vector3::new(p.t[0], p.t[1], p.nu);
    let dev = (a0.row(2).transpose() - r).amax();
    if !(dev < INITIAL_ROW_TOL) {
        return Err(Error::InitialFrame(dev));
    }
    m.check_domain(x0)
}

/// Integrates along an explicit path of neighbouring grid nodes starting
/// from `(A0, x0)` at `path[0]`.
pub fn integrate_frame(
    q: &QuadrupleField,
    m: &ModelSpace,
    a0: &Matrix3<f64>,
    x0: &AmbientPoint,
    path: &[(usize, usize)],
) -> Result<Vec<FrameState>> {
    let Some(&first) = path.first() else {
        return Ok(Vec::new());
    };
    check_initial(q, m, a0, x0, first)?;
    let forms = connection_forms(q)?;
    let integ = Integrator { m, substeps: 4 };
    let mut states = vec![FrameState { a: *a0, f: *x0 }];
    for w in path.windows(2) {
        let ((i0, j0), (i1, j1)) = (w[0], w[1]);
        let cur = *states.last().expect("non-empty");
        let step = if j0 == j1 && i0.abs_diff(i1) == 1 {
            integ.edge(&Line::row(&forms, j0), i0 as f64, i1 as f64, &cur)
        } else if i0 == i1 && j0.abs_diff(j1) == 1 {
            integ.edge(&Line::column(&forms, i0), j0 as f64, j1 as f64, &cur)
        } else {
            return Err(Error::InvalidParameter(format!(
                "path step ({i0},{j0}) -> ({i1},{j1}) is not a grid edge"
            )));
        };
        let (s, _) = step.ok_or(Error::ChartExit { i: i0, j: j0 })?;
        states.push(s);
    }
    Ok(states)
}

/// Rebuilds the immersion on the whole grid with default options.
pub fn reconstruct(
    q: &QuadrupleField,
    m: &ModelSpace,
    a0: &Matrix3<f64>,
    x0: &AmbientPoint,
) -> Result<Reconstruction> {
    reconstruct_with(q, m, a0, x0, &ReconstructOptions::default())
}

/// Integrates along the start row in both directions, then along every
/// column (independently, in parallel) from that row.
pub fn reconstruct_with(
    q: &QuadrupleField,
    m: &ModelSpace,
    a0: &Matrix3<f64>,
    x0: &AmbientPoint,
    opts: &ReconstructOptions,
) -> Result<Reconstruction> {
    let grid = q.grid;
    let (i0, j0) = opts.start;
    if i0 >= grid.nu || j0 >= grid.nv {
        return Err(Error::InvalidParameter(format!("start node ({i0},{j0}) outside the grid")));
    }
    if opts.check_compatibility {
        let tol = opts.tol.unwrap_or_else(|| default_tol(&grid));
        let report = verify_with(q, m, tol, opts.exec)?;
        if !report.passed() {
            return Err(Error::Incompatible { worst: report.worst(), tol });
        }
    }
    check_initial(q, m, a0, x0, opts.start)?;
    let forms = connection_forms_with(q, opts.exec)?;
    let integ = Integrator { m, substeps: opts.substeps.max(1) };
    let start = FrameState { a: *a0, f: *x0 };

    let row = Line::row(&forms, j0);
    let (right, d1) = integ.sweep(&row, i0, grid.nu - 1, start, |i| (i, j0))?;
    let (left, d2) = integ.sweep(&row, i0, 0, start, |i| (i, j0))?;
    let mut on_row = vec![start; grid.nu];
    for (k, s) in right.into_iter().enumerate() {
        on_row[i0 + k] = s;
    }
    for (k, s) in left.into_iter().enumerate() {
        on_row[i0 - k] = s;
    }

    let columns = try_map_indices(opts.exec, grid.nu, |i| {
        let col = Line::column(&forms, i);
        let (up, d3) = integ.sweep(&col, j0, grid.nv - 1, on_row[i], |j| (i, j))?;
        let (down, d4) = integ.sweep(&col, j0, 0, on_row[i], |j| (i, j))?;
        Ok::<_, Error>((up, down, d3.max(d4)))
    })?;

    let mut states = vec![start; grid.len()];
    let mut drift = d1.max(d2);
    for (i, (up, down, d)) in columns.into_iter().enumerate() {
        drift = drift.max(d);
        for (k, s) in up.into_iter().enumerate() {
            states[grid.index(i, j0 + k)] = s;
        }
        for (k, s) in down.into_iter().enumerate() {
            states[grid.index(i, j0 - k)] = s;
        }
    }
    Ok(Reconstruction { model: *m, grid, states, max_drift: drift })
}

/// Frobenius distance between the frames obtained at the far corner by
/// the two boundary paths (along u then v, and along v then u).
pub fn corner_holonomy(q: &QuadrupleField, m: &ModelSpace, a0: &Matrix3<f64>, x0: &AmbientPoint) -> Result<f64> {
    let (nu, nv) = (q.grid.nu, q.grid.nv);
    let mut p1: Vec<(usize, usize)> = (0..nu).map(|i| (i, 0)).collect();
    p1.extend((1..nv).map(|j| (nu - 1, j)));
    let mut p2: Vec<(usize, usize)> = (0..nv).map(|j| (0, j)).collect();
    p2.extend((1..nu).map(|i| (i, nv - 1)));
    let a = integrate_frame(q, m, a0, x0, &p1)?;
    let b = integrate_frame(q, m, a0, x0, &p2)?;
    Ok((a.last().expect("path").a - b.last().expect("path").a).norm())
}
