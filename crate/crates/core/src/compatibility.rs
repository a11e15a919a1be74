//! Residuals of the compatibility equations of a quadruple `(g, S, T, nu)`
//! against a model space E(kappa, tau):
//!
//! ```text
//! Gauss      K = det S + tau^2 + (kappa - 4 tau^2) nu^2
//! Codazzi    nabla_X SY - nabla_Y SX - S[X,Y] = (kappa - 4 tau^2) nu (<Y,T> X - <X,T> Y)
//! Killing T  nabla_X T = nu (SX - tau JX)
//! Killing nu dnu(X) + <SX - tau JX, T> = 0
//! unit norm  |T|^2 + nu^2 = 1
//! ```
//!
//! Derivatives are second-order central differences on the grid, so every
//! residual is defined on interior nodes only. Pointwise residuals are
//! measured with Euclidean (vectors) or Frobenius (matrices) norms in the
//! orthonormal tangent frame.

use std::fmt;

use nalgebra::{Matrix2, Vector2};

use crate::ambient::ModelSpace;
use crate::error::Result;
use crate::immersion::{quarter_turn, tangent_frame, Grid, QuadrupleField};
use crate::par::{map_indices, Execution};

/// Tolerance for an 81x81 grid.
pub const BASE_TOL: f64 = 1e-4;

/// Default tolerance for `grid`, scaled with the square of the step
/// relative to an 81x81 grid.
pub fn default_tol(grid: &Grid) -> f64 {
    let n = grid.nu.min(grid.nv).max(2) as f64;
    BASE_TOL * (80.0 / (n - 1.0)).powi(2)
}

/// Values on interior nodes `1 <= i <= nu-2`, `1 <= j <= nv-2`, i fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorField<T> {
    pub nu: usize,
    pub nv: usize,
    pub values: Vec<T>,
}

impl<T> InteriorField<T> {
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.values[(i - 1) + (j - 1) * (self.nu - 2)]
    }

    /// Grid coordinates of the `k`-th stored value.
    pub fn node(&self, k: usize) -> (usize, usize) {
        (k % (self.nu - 2) + 1, k / (self.nu - 2) + 1)
    }
}

/// Max-abs and RMS of a pointwise norm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualStats {
    pub max: f64,
    pub rms: f64,
}

impl ResidualStats {
    pub fn from_norms(norms: impl Iterator<Item = f64>) -> Self {
        let (mut max, mut sum, mut n) = (0.0f64, 0.0, 0usize);
        for x in norms {
            // NaN must not vanish in the max
            max = if x.is_nan() || max.is_nan() { f64::NAN } else { max.max(x) };
            sum += x * x;
            n += 1;
        }
        let rms = if n == 0 { 0.0 } else { (sum / n as f64).sqrt() };
        ResidualStats { max, rms }
    }
}

/// All residual fields of one quadruple against one model.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub gauss: InteriorField<f64>,
    /// Codazzi vector for `(X, Y) = (e1, e2)`, frame components.
    pub codazzi: InteriorField<Vector2<f64>>,
    /// Column `k` is `nabla_{e_k} T - nu (S e_k - tau J e_k)`.
    pub killing_t: InteriorField<Matrix2<f64>>,
    /// Entry `k` is `dnu(e_k) + <S e_k - tau J e_k, T>`.
    pub killing_nu: InteriorField<Vector2<f64>>,
    pub unit_norm: InteriorField<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatReport {
    pub kappa: f64,
    pub tau: f64,
    pub nu: usize,
    pub nv: usize,
    pub du: f64,
    pub dv: f64,
    pub gauss: ResidualStats,
    pub codazzi: ResidualStats,
    pub killing_t: ResidualStats,
    pub killing_nu: ResidualStats,
    pub unit_norm: ResidualStats,
    pub tol: f64,
}

impl CompatReport {
    pub fn entries(&self) -> [(&'static str, ResidualStats); 5] {
        [
            ("gauss", self.gauss),
            ("codazzi", self.codazzi),
            ("killing_T", self.killing_t),
            ("killing_nu", self.killing_nu),
            ("unit_norm", self.unit_norm),
        ]
    }

    /// Largest max-abs residual over all equations (NaN if any is NaN).
    pub fn worst(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, (_, s)| {
            if m.is_nan() || s.max.is_nan() {
                f64::NAN
            } else {
                m.max(s.max)
            }
        })
    }

    pub fn passed(&self) -> bool {
        self.worst() <= self.tol
    }
}

impl fmt::Display for CompatReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::io::fmt_num as n;
        writeln!(
            f,
            "#compat kappa={} tau={} nu={} nv={} du={} dv={}",
            n(self.kappa),
            n(self.tau),
            self.nu,
            self.nv,
            n(self.du),
            n(self.dv)
        )?;
        for (name, s) in self.entries() {
            writeln!(f, "{name} {} {}", n(s.max), n(s.rms))?;
        }
        writeln!(f, "{} tol={}", if self.passed() { "PASS" } else { "FAIL" }, n(self.tol))
    }
}

/// Per-node quantities shared by the stencils.
struct Node {
    g: Matrix2<f64>,
    g_inv: Matrix2<f64>,
    p: Matrix2<f64>,
    p_inv: Matrix2<f64>,
    /// Shape operator acting on parameter components.
    s_p: Matrix2<f64>,
    j_p: Matrix2<f64>,
    /// T in parameter components.
    t_p: Vector2<f64>,
}

struct Stencil<'a> {
    q: &'a QuadrupleField,
    nodes: Vec<Node>,
    du: f64,
    dv: f64,
}

impl<'a> Stencil<'a> {
    fn new(q: &'a QuadrupleField, exec: Execution) -> Self {
        let j = quarter_turn();
        let nodes = map_indices(exec, q.grid.len(), |k| {
            let r = &q.points[k];
            let p = tangent_frame(&r.g);
            let p_inv = p.try_inverse().unwrap_or_else(Matrix2::zeros);
            Node {
                g: r.g,
                g_inv: r.g.try_inverse().unwrap_or_else(Matrix2::zeros),
                p,
                p_inv,
                s_p: p * r.s * p_inv,
                j_p: p * j * p_inv,
                t_p: p * r.t,
            }
        });
        Stencil { q, nodes, du: q.grid.du(), dv: q.grid.dv() }
    }

    fn node(&self, i: usize, j: usize) -> &Node {
        &self.nodes[self.q.grid.index(i, j)]
    }

    fn d_u<T: crate::fd::Linear>(&self, i: usize, j: usize, f: impl Fn(&Node, usize) -> T) -> T {
        let g = &self.q.grid;
        (f(self.node(i + 1, j), g.index(i + 1, j)) - f(self.node(i - 1, j), g.index(i - 1, j)))
            * (0.5 / self.du)
    }

    fn d_v<T: crate::fd::Linear>(&self, i: usize, j: usize, f: impl Fn(&Node, usize) -> T) -> T {
        let g = &self.q.grid;
        (f(self.node(i, j + 1), g.index(i, j + 1)) - f(self.node(i, j - 1), g.index(i, j - 1)))
            * (0.5 / self.dv)
    }

    /// `[Gamma_u, Gamma_v]` with `(Gamma_i)[k][m] = Gamma^k_{i m}`.
    fn christoffels(&self, i: usize, j: usize) -> [Matrix2<f64>; 2] {
        let dg = [self.d_u(i, j, |n, _| n.g), self.d_v(i, j, |n, _| n.g)];
        let gi = self.node(i, j).g_inv;
        let mut out = [Matrix2::zeros(); 2];
        for (a, oa) in out.iter_mut().enumerate() {
            for k in 0..2 {
                for m in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        s += gi[(k, l)] * (dg[a][(l, m)] + dg[m][(l, a)] - dg[l][(a, m)]);
                    }
                    oa[(k, m)] = 0.5 * s;
                }
            }
        }
        out
    }

    fn gauss_curvature(&self, i: usize, j: usize) -> f64 {
        let n = self.node(i, j);
        let (e, f, g) = (n.g[(0, 0)], n.g[(0, 1)], n.g[(1, 1)]);
        let gu = self.d_u(i, j, |n, _| n.g);
        let gv = self.d_v(i, j, |n, _| n.g);
        let (eu, fu, g_u) = (gu[(0, 0)], gu[(0, 1)], gu[(1, 1)]);
        let (ev, fv, g_v) = (gv[(0, 0)], gv[(0, 1)], gv[(1, 1)]);
        let (du, dv) = (self.du, self.dv);
        let e_vv = (self.node(i, j + 1).g[(0, 0)] - 2.0 * e + self.node(i, j - 1).g[(0, 0)]) / (dv * dv);
        let g_uu = (self.node(i + 1, j).g[(1, 1)] - 2.0 * g + self.node(i - 1, j).g[(1, 1)]) / (du * du);
        let f_uv = (self.node(i + 1, j + 1).g[(0, 1)] - self.node(i + 1, j - 1).g[(0, 1)]
            - self.node(i - 1, j + 1).g[(0, 1)]
            + self.node(i - 1, j - 1).g[(0, 1)])
            / (4.0 * du * dv);
        let m1 = nalgebra::Matrix3::new(
            -0.5 * e_vv + f_uv - 0.5 * g_uu,
            0.5 * eu,
            fu - 0.5 * ev,
            fv - 0.5 * g_u,
            e,
            f,
            0.5 * g_v,
            f,
            g,
        );
        let m2 = nalgebra::Matrix3::new(0.0, 0.5 * ev, 0.5 * g_u, 0.5 * ev, e, f, 0.5 * g_u, f, g);
        let w = e * g - f * f;
        (m1.determinant() - m2.determinant()) / (w * w)
    }
}

fn interior<T: Send>(
    q: &QuadrupleField,
    exec: Execution,
    f: impl Fn(usize, usize) -> T + Sync + Send,
) -> InteriorField<T> {
    let (nu, nv) = (q.grid.nu, q.grid.nv);
    let w = nu - 2;
    let values = map_indices(exec, w * (nv - 2), |k| f(k % w + 1, k / w + 1));
    InteriorField { nu, nv, values }
}

/// Evaluates every residual field.
pub fn residuals(q: &QuadrupleField, m: &ModelSpace) -> Result<Residuals> {
    residuals_with(q, m, Execution::default())
}

pub fn residuals_with(q: &QuadrupleField, m: &ModelSpace, exec: Execution) -> Result<Residuals> {
    q.grid.require(3)?;
    let st = Stencil::new(q, exec);
    let tau = m.tau();
    let aniso = m.aniso();
    let jf = quarter_turn();

    let gauss = interior(q, exec, |i, j| {
        let r = q.at(i, j);
        st.gauss_curvature(i, j) - r.s.determinant() - tau * tau - aniso * r.nu * r.nu
    });

    let codazzi = interior(q, exec, |i, j| {
        let n = st.node(i, j);
        let r = q.at(i, j);
        let [cu, cv] = st.christoffels(i, j);
        let sv = |n: &Node, _: usize| -> Vector2<f64> { n.s_p.column(1).into() };
        let su = |n: &Node, _: usize| -> Vector2<f64> { n.s_p.column(0).into() };
        let lhs = st.d_u(i, j, sv) + cu * sv(n, 0) - st.d_v(i, j, su) - cv * su(n, 0);
        let gt = n.g * n.t_p;
        let rhs = aniso * r.nu * Vector2::new(gt[1], -gt[0]);
        n.p.determinant() * (n.p_inv * (lhs - rhs))
    });

    let killing_t = interior(q, exec, |i, j| {
        let n = st.node(i, j);
        let r = q.at(i, j);
        let [cu, cv] = st.christoffels(i, j);
        let tp = |n: &Node, _: usize| n.t_p;
        let along = |x: usize, dt: Vector2<f64>, c: &Matrix2<f64>| -> Vector2<f64> {
            let mut e = Vector2::zeros();
            e[x] = 1.0;
            dt + c * n.t_p - r.nu * (n.s_p * e - tau * n.j_p * e)
        };
        let ru = along(0, st.d_u(i, j, tp), &cu);
        let rv = along(1, st.d_v(i, j, tp), &cv);
        let mut out = Matrix2::zeros();
        for k in 0..2 {
            let col = ru * n.p[(0, k)] + rv * n.p[(1, k)];
            out.set_column(k, &(n.p_inv * col));
        }
        out
    });

    let killing_nu = interior(q, exec, |i, j| {
        let n = st.node(i, j);
        let r = q.at(i, j);
        let dnu = Vector2::new(
            st.d_u(i, j, |_, k| q.points[k].nu),
            st.d_v(i, j, |_, k| q.points[k].nu),
        );
        let mut out = Vector2::zeros();
        for k in 0..2 {
            let e: Vector2<f64> = n.p.column(k).into();
            let mut ek = Vector2::zeros();
            ek[k] = 1.0;
            out[k] = dnu.dot(&e) + (r.s * ek - tau * jf * ek).dot(&r.t);
        }
        out
    });

    let unit_norm = interior(q, exec, |i, j| q.at(i, j).unit_defect());

    Ok(Residuals { gauss, codazzi, killing_t, killing_nu, unit_norm })
}

pub fn gauss_residual(q: &QuadrupleField, m: &ModelSpace) -> Result<InteriorField<f64>> {
    Ok(residuals(q, m)?.gauss)
}

pub fn codazzi_residual(q: &QuadrupleField, m: &ModelSpace) -> Result<InteriorField<Vector2<f64>>> {
    Ok(residuals(q, m)?.codazzi)
}

pub fn killing_residuals(
    q: &QuadrupleField,
    m: &ModelSpace,
) -> Result<(InteriorField<Matrix2<f64>>, InteriorField<Vector2<f64>>)> {
    let r = residuals(q, m)?;
    Ok((r.killing_t, r.killing_nu))
}

impl Residuals {
    pub fn report(&self, q: &QuadrupleField, m: &ModelSpace, tol: f64) -> CompatReport {
        CompatReport {
            kappa: m.kappa(),
            tau: m.tau(),
            nu: q.grid.nu,
            nv: q.grid.nv,
            du: q.grid.du(),
            dv: q.grid.dv(),
            gauss: ResidualStats::from_norms(self.gauss.values.iter().map(|x| x.abs())),
            codazzi: ResidualStats::from_norms(self.codazzi.values.iter().map(|x| x.norm())),
            killing_t: ResidualStats::from_norms(self.killing_t.values.iter().map(|x| x.norm())),
            killing_nu: ResidualStats::from_norms(self.killing_nu.values.iter().map(|x| x.norm())),
            unit_norm: ResidualStats::from_norms(self.unit_norm.values.iter().map(|x| x.abs())),
            tol,
        }
    }
}

/// Aggregated pass/fail check at tolerance `tol`.
pub fn verify(q: &QuadrupleField, m: &ModelSpace, tol: f64) -> Result<CompatReport> {
    verify_with(q, m, tol, Execution::default())
}

pub fn verify_with(
    q: &QuadrupleField,
    m: &ModelSpace,
    tol: f64,
    exec: Execution,
) -> Result<CompatReport> {
    Ok(residuals_with(q, m, exec)?.report(q, m, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::{fundamental_data, CatalogSurface, QuadruplePoint, Rect, SurfacePatch};

    fn data(s: CatalogSurface, n: usize) -> QuadrupleField {
        let p = SurfacePatch::catalog(s);
        fundamental_data(&p, &p.grid(n, n).unwrap()).unwrap()
    }

    #[test]
    fn vertical_plane_is_exactly_compatible() {
        let q = data(CatalogSurface::VerticalPlane, 11);
        let r = verify(&q, &ModelSpace::nil3(), 1e-4).unwrap();
        assert!(r.worst() < 1e-9, "{r}");
        assert!(r.passed());
    }

    #[test]
    fn wrong_model_fails_gauss() {
        let q = data(CatalogSurface::VerticalPlane, 11);
        let m = ModelSpace::new(0.0, 1.0).unwrap();
        let r = residuals(&q, &m).unwrap();
        for g in &r.gauss.values {
            assert!((g + 0.75).abs() < 1e-9);
        }
        assert!(!r.report(&q, &m, 1e-4).passed());
    }

    #[test]
    fn polar_flat_metric_has_zero_curvature() {
        // g = diag(1, u^2) with S = 0 checks Brioschi and the Christoffels.
        let grid = Grid::new(21, 21, Rect::new(1.0, 2.0, 0.0, 1.0)).unwrap();
        let points = (0..grid.len())
            .map(|k| {
                let u = grid.u(k % 21);
                QuadruplePoint {
                    g: Matrix2::new(1.0, 0.0, 0.0, u * u),
                    s: Matrix2::zeros(),
                    t: Vector2::zeros(),
                    nu: 1.0,
                }
            })
            .collect();
        let q = QuadrupleField::new(ModelSpace::nil3(), grid, points).unwrap();
        let m = ModelSpace::new(-1.0, 0.0).unwrap();
        let r = residuals(&q, &m).unwrap();
        // K = 0, det S = 0, tau = 0, aniso nu^2 = -1
        for g in &r.gauss.values {
            assert!((g - 1.0).abs() < 1e-9, "{g}");
        }
    }

    /// Index-notation Codazzi operator for nu = 0: the symmetric tensor
    /// b_ij = g_ik S^k_j must satisfy b_ij;k = b_ik;j.
    fn codazzi_oracle(q: &QuadrupleField, i: usize, j: usize) -> Vector2<f64> {
        let grid = &q.grid;
        let b = |i: usize, j: usize| {
            let r = q.at(i, j);
            let p = tangent_frame(&r.g);
            let pi = p.try_inverse().unwrap();
            r.g * p * r.s * pi
        };
        let g = |i: usize, j: usize| q.at(i, j).g;
        let db = [
            (b(i + 1, j) - b(i - 1, j)) / (2.0 * grid.du()),
            (b(i, j + 1) - b(i, j - 1)) / (2.0 * grid.dv()),
        ];
        let dg = [
            (g(i + 1, j) - g(i - 1, j)) / (2.0 * grid.du()),
            (g(i, j + 1) - g(i, j - 1)) / (2.0 * grid.dv()),
        ];
        let gi = g(i, j).try_inverse().unwrap();
        let gam = |k: usize, a: usize, c: usize| -> f64 {
            (0..2).map(|l| 0.5 * gi[(k, l)] * (dg[a][(l, c)] + dg[c][(l, a)] - dg[l][(a, c)])).sum()
        };
        let bb = b(i, j);
        // covariant derivative b_{ac;d}
        let cov = |a: usize, c: usize, d: usize| -> f64 {
            db[d][(a, c)]
                - (0..2).map(|l| gam(l, d, a) * bb[(l, c)] + gam(l, d, c) * bb[(a, l)]).sum::<f64>()
        };
        let w = Vector2::new(cov(0, 1, 0) - cov(0, 0, 1), cov(1, 1, 0) - cov(1, 0, 1));
        // raise the index, evaluate on (e1, e2), express in the frame
        let p = tangent_frame(&g(i, j));
        p.determinant() * (p.try_inverse().unwrap() * (gi * w))
    }

    #[test]
    fn codazzi_matches_index_oracle_when_nu_vanishes() {
        // Perturb the shape operator of the horocycle cylinder so both
        // sides are nonzero but comparable.
        let mut q = data(CatalogSurface::HorocycleCylinder, 21);
        let grid = q.grid;
        for k in 0..grid.len() {
            let (i, j) = grid.coords(k);
            let (u, v) = (grid.u(i), grid.v(j));
            let extra = Matrix2::new(u * v, u.sin(), u.sin(), v * v);
            q.points[k].s += extra;
        }
        let r = residuals(&q, &ModelSpace::h2xr()).unwrap();
        for k in 0..r.codazzi.values.len() {
            let (i, j) = r.codazzi.node(k);
            let ours = r.codazzi.values[k];
            let oracle = codazzi_oracle(&q, i, j);
            assert!(ours.norm() > 1e-3);
            assert!((ours - oracle).amax() < 1e-9, "{ours} vs {oracle}");
        }
    }

    #[test]
    fn stats_propagate_nan() {
        let s = ResidualStats::from_norms([1.0, f64::NAN, 0.5].into_iter());
        assert!(s.max.is_nan());
        let s = ResidualStats::from_norms([3.0, 4.0].into_iter());
        assert_eq!(s.max, 4.0);
        assert!((s.rms - 12.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn default_tolerance_scales_with_step() {
        let r = Rect::new(0.0, 1.0, 0.0, 1.0);
        assert_eq!(default_tol(&Grid::new(81, 81, r).unwrap()), 1e-4);
        assert!((default_tol(&Grid::new(41, 41, r).unwrap()) - 4e-4).abs() < 1e-18);
    }
}
