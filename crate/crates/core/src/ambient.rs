//! The model spaces E(kappa, tau) in their cylindrical chart.
//!
//! Every model is R^3 (or a disk times R when kappa < 0) with the metric
//!
//! ```text
//! ds^2 = lambda^2 (dx^2 + dy^2) + (tau lambda (y dx - x dy) + dz)^2,
//! lambda = 1 / (1 + kappa/4 (x^2 + y^2)),
//! ```
//!
//! and an orthonormal frame (E1, E2, E3) with E3 = d/dz the unit Killing
//! field tangent to the fibers. For tau != 0 the frame rotates with the
//! height (angle sigma z, sigma = kappa / (2 tau)) so that its connection
//! coefficients are constant. For tau = 0 the frame does not rotate and its
//! coefficients are computed from finite-difference Lie brackets.
//!
//! Christoffel symbols are stored as `gamma[a][b][c]`:
//! * frame symbols: `<nabla_{E_b} E_c, E_a>`,
//! * coordinate symbols: the usual `Gamma^a_{bc}` of the chart metric.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::fd::{self, Order};

/// Relative tolerance used to reject kappa = 4 tau^2.
const DEGENERACY_TOL: f64 = 1e-12;

/// Default step for first derivatives of chart quantities.
pub const H_FIRST: f64 = 1e-4;
/// Default step for curvature (second derivatives).
pub const H_CURVATURE: f64 = 1e-3;

/// Step and order of the stencil used for the tau = 0 frame brackets.
const BRACKET_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AmbientPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        AmbientPoint { x, y, z }
    }

    pub fn coords(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_coords(c: &Vector3<f64>) -> Self {
        AmbientPoint::new(c[0], c[1], c[2])
    }
}

/// Which basis the components of an [`AmbientVector`] refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// (d/dx, d/dy, d/dz)
    Coordinate,
    /// (E1, E2, E3)
    Frame,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientVector {
    pub comps: Vector3<f64>,
    pub basis: Basis,
}

impl AmbientVector {
    pub fn coordinate(comps: Vector3<f64>) -> Self {
        AmbientVector { comps, basis: Basis::Coordinate }
    }

    pub fn frame(comps: Vector3<f64>) -> Self {
        AmbientVector { comps, basis: Basis::Frame }
    }

    /// The canonical frame vector E_{i+1}.
    pub fn e(i: usize) -> Self {
        let mut c = Vector3::zeros();
        c[i] = 1.0;
        AmbientVector::frame(c)
    }

    pub fn checked_add(&self, other: &AmbientVector) -> Result<AmbientVector> {
        if self.basis != other.basis {
            return Err(Error::MixedBasis);
        }
        Ok(AmbientVector { comps: self.comps + other.comps, basis: self.basis })
    }

    pub fn checked_sub(&self, other: &AmbientVector) -> Result<AmbientVector> {
        if self.basis != other.basis {
            return Err(Error::MixedBasis);
        }
        Ok(AmbientVector { comps: self.comps - other.comps, basis: self.basis })
    }

    pub fn scale(&self, s: f64) -> AmbientVector {
        AmbientVector { comps: self.comps * s, basis: self.basis }
    }
}

/// Columns are the canonical frame (E1, E2, E3) in coordinate components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMatrix {
    b: Matrix3<f64>,
    b_inv: Matrix3<f64>,
}

impl FrameMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.b
    }

    /// Rows are the dual coframe; maps coordinate components to frame
    /// components.
    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.b_inv
    }

    pub fn to_frame(&self, coord: &Vector3<f64>) -> Vector3<f64> {
        self.b_inv * coord
    }

    pub fn to_coordinate(&self, frame: &Vector3<f64>) -> Vector3<f64> {
        self.b * frame
    }
}

/// A 3x3x3 table of connection coefficients, `gamma[a][b][c]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Christoffels(pub [[[f64; 3]; 3]; 3]);

impl Christoffels {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.0[a][b][c]
    }

    /// `sum_{b,c} gamma[.][b][c] x^b y^c`
    pub fn contract(&self, x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for a in 0..3 {
            let mut s = 0.0;
            for b in 0..3 {
                for c in 0..3 {
                    s += self.0[a][b][c] * x[b] * y[c];
                }
            }
            out[a] = s;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Christoffels) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    m = m.max((self.0[a][b][c] - other.0[a][b][c]).abs());
                }
            }
        }
        m
    }
}

/// Conformal factor of the base, `1 / (1 + kappa/4 (x^2+y^2))`.
pub fn conformal_factor(kappa: f64, x: f64, y: f64) -> f64 {
    1.0 / (1.0 + 0.25 * kappa * (x * x + y * y))
}

/// Chart metric for arbitrary (kappa, tau), including the excluded
/// space forms. Only checks the disk bound for kappa < 0.
pub fn chart_metric(kappa: f64, tau: f64, p: &AmbientPoint) -> Result<Matrix3<f64>> {
    check_chart(kappa, p)?;
    let lam = conformal_factor(kappa, p.x, p.y);
    let w = Vector3::new(tau * lam * p.y, -tau * lam * p.x, 1.0);
    let mut g = w * w.transpose();
    g[(0, 0)] += lam * lam;
    g[(1, 1)] += lam * lam;
    Ok(g)
}

/// Canonical frame `E1, E2, E3 = xi` of the chart metric for arbitrary
/// (kappa, tau), including the excluded space forms.
pub fn canonical_frame(kappa: f64, tau: f64, p: &AmbientPoint) -> Result<FrameMatrix> {
    check_chart(kappa, p)?;
    let lam = conformal_factor(kappa, p.x, p.y);
    let rate = if tau != 0.0 { kappa / (2.0 * tau) } else { 0.0 };
    let (s, c) = (rate * p.z).sin_cos();
    let t = tau;
    let b = Matrix3::new(
        c / lam,
        -s / lam,
        0.0,
        s / lam,
        c / lam,
        0.0,
        t * (p.x * s - p.y * c),
        t * (p.x * c + p.y * s),
        1.0,
    );
    let b_inv = Matrix3::new(
        lam * c,
        lam * s,
        0.0,
        -lam * s,
        lam * c,
        0.0,
        t * lam * p.y,
        -t * lam * p.x,
        1.0,
    );
    Ok(FrameMatrix { b, b_inv })
}

fn check_chart(kappa: f64, p: &AmbientPoint) -> Result<()> {
    let r2 = p.x * p.x + p.y * p.y;
    let finite = p.x.is_finite() && p.y.is_finite() && p.z.is_finite();
    if kappa < 0.0 {
        let bound = 4.0 / -kappa;
        if !finite || r2 >= bound {
            return Err(Error::OutsideChart { x: p.x, y: p.y, z: p.z, bound });
        }
    } else if !finite {
        return Err(Error::OutsideChart { x: p.x, y: p.y, z: p.z, bound: f64::INFINITY });
    }
    Ok(())
}

/// Coordinate Christoffel symbols of an arbitrary chart metric, by
/// second-order central differences with step `h`.
pub fn coordinate_christoffels_of<G>(metric: G, p: &AmbientPoint, h: f64) -> Result<Christoffels>
where
    G: Fn(&AmbientPoint) -> Result<Matrix3<f64>>,
{
    let g = metric(p)?;
    let g_inv = g.try_inverse().ok_or(Error::InvalidParameter("singular metric".into()))?;
    // dg[k] = d g / d x^k
    let mut dg = [Matrix3::zeros(); 3];
    for (k, dgk) in dg.iter_mut().enumerate() {
        *dgk = fd::central(
            |t| {
                let mut c = p.coords();
                c[k] = t;
                metric(&AmbientPoint::from_coords(&c))
            },
            p.coords()[k],
            h,
            Order::Second,
        )?;
    }
    let mut out = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in b..3 {
                let mut s = 0.0;
                for d in 0..3 {
                    s += g_inv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                out[a][b][c] = 0.5 * s;
                out[a][c][b] = 0.5 * s;
            }
        }
    }
    Ok(Christoffels(out))
}

/// A homogeneous 3-manifold E(kappa, tau) with 4-dimensional isometry group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpace {
    kappa: f64,
    tau: f64,
}

impl ModelSpace {
    pub fn new(kappa: f64, tau: f64) -> Result<Self> {
        if !kappa.is_finite() || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite model ({kappa}, {tau})")));
        }
        let aniso = kappa - 4.0 * tau * tau;
        if aniso.abs() <= DEGENERACY_TOL * kappa.abs().max(1.0) {
            return Err(Error::DegenerateModel { kappa, tau });
        }
        Ok(ModelSpace { kappa, tau })
    }

    /// Heisenberg space with its standard metric (kappa = 0, tau = 1/2).
    pub fn nil3() -> Self {
        ModelSpace { kappa: 0.0, tau: 0.5 }
    }

    /// H^2 x R (kappa = -1, tau = 0).
    pub fn h2xr() -> Self {
        ModelSpace { kappa: -1.0, tau: 0.0 }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// kappa - 4 tau^2, shared by sister spaces.
    pub fn aniso(&self) -> f64 {
        self.kappa - 4.0 * self.tau * self.tau
    }

    /// kappa / (2 tau), defined only for tau != 0.
    pub fn sigma(&self) -> Option<f64> {
        (self.tau != 0.0).then(|| self.kappa / (2.0 * self.tau))
    }

    pub fn check_domain(&self, p: &AmbientPoint) -> Result<()> {
        check_chart(self.kappa, p)
    }

    pub fn contains(&self, p: &AmbientPoint) -> bool {
        self.check_domain(p).is_ok()
    }

    pub fn metric_at(&self, p: &AmbientPoint) -> Result<Matrix3<f64>> {
        chart_metric(self.kappa, self.tau, p)
    }

    pub fn canonical_frame_at(&self, p: &AmbientPoint) -> Result<FrameMatrix> {
        canonical_frame(self.kappa, self.tau, p)
    }

    /// Connection coefficients of the canonical frame. Constant for
    /// tau != 0; numerical (Koszul formula on finite-difference brackets)
    /// for tau = 0.
    pub fn frame_christoffels(&self, p: &AmbientPoint) -> Result<Christoffels> {
        match self.sigma() {
            Some(sigma) => {
                let t = self.tau;
                let mut g = [[[0.0; 3]; 3]; 3];
                g[2][0][1] = t;
                g[0][1][2] = t;
                g[2][1][0] = -t;
                g[1][0][2] = -t;
                g[0][2][1] = t - sigma;
                g[1][2][0] = -(t - sigma);
                Ok(Christoffels(g))
            }
            None => self.frame_christoffels_numeric(p, BRACKET_STEP, Order::Fourth),
        }
    }

    /// Structure constants `c[a][b][k]` with `[E_a, E_b] = sum_k c[a][b][k] E_k`,
    /// from finite-difference Jacobians of the frame fields.
    pub fn structure_constants(
        &self,
        p: &AmbientPoint,
        h: f64,
        order: Order,
    ) -> Result<[[[f64; 3]; 3]; 3]> {
        let frame = self.canonical_frame_at(p)?;
        // jac[k] = d B / d x^k; column a of jac[k] is d E_a / d x^k
        let mut jac = [Matrix3::zeros(); 3];
        for (k, jk) in jac.iter_mut().enumerate() {
            *jk = fd::central(
                |t| {
                    let mut c = p.coords();
                    c[k] = t;
                    self.canonical_frame_at(&AmbientPoint::from_coords(&c)).map(|f| f.b)
                },
                p.coords()[k],
                h,
                order,
            )?;
        }
        let b = frame.b;
        // directional derivative of E_c along X (coordinate comps)
        let along = |x: &Vector3<f64>, c: usize| -> Vector3<f64> {
            let mut out = Vector3::zeros();
            for k in 0..3 {
                out += jac[k].column(c) * x[k];
            }
            out
        };
        let mut out = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for bb in 0..3 {
                let ea: Vector3<f64> = b.column(a).into();
                let eb: Vector3<f64> = b.column(bb).into();
                let br = along(&ea, bb) - along(&eb, a);
                let fr = frame.to_frame(&br);
                for k in 0..3 {
                    out[a][bb][k] = fr[k];
                }
            }
        }
        Ok(out)
    }

    /// Frame Christoffels from the Koszul formula for an orthonormal frame,
    /// `<nabla_{E_b} E_c, E_a> = (c_{bc}^a + c_{ab}^c - c_{ca}^b) / 2`.
    pub fn frame_christoffels_numeric(
        &self,
        p: &AmbientPoint,
        h: f64,
        order: Order,
    ) -> Result<Christoffels> {
        let c = self.structure_constants(p, h, order)?;
        let mut g = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    g[a][b][cc] = 0.5 * (c[b][cc][a] + c[a][b][cc] - c[cc][a][b]);
                }
            }
        }
        Ok(Christoffels(g))
    }

    pub fn coordinate_christoffels(&self, p: &AmbientPoint, h: f64) -> Result<Christoffels> {
        coordinate_christoffels_of(|q| self.metric_at(q), p, h)
    }

    /// Frame components of `v` at `p`.
    pub fn to_frame(&self, p: &AmbientPoint, v: &AmbientVector) -> Result<Vector3<f64>> {
        match v.basis {
            Basis::Frame => Ok(v.comps),
            Basis::Coordinate => Ok(self.canonical_frame_at(p)?.to_frame(&v.comps)),
        }
    }

    /// Coordinate components of `v` at `p`.
    pub fn to_coordinate(&self, p: &AmbientPoint, v: &AmbientVector) -> Result<Vector3<f64>> {
        match v.basis {
            Basis::Coordinate => Ok(v.comps),
            Basis::Frame => Ok(self.canonical_frame_at(p)?.to_coordinate(&v.comps)),
        }
    }

    pub fn inner(&self, p: &AmbientPoint, x: &AmbientVector, y: &AmbientVector) -> Result<f64> {
        if x.basis == Basis::Coordinate && y.basis == Basis::Coordinate {
            let g = self.metric_at(p)?;
            return Ok(x.comps.dot(&(g * y.comps)));
        }
        Ok(self.to_frame(p, x)?.dot(&self.to_frame(p, y)?))
    }

    /// Vector product, returned in frame components.
    pub fn cross(&self, p: &AmbientPoint, x: &AmbientVector, y: &AmbientVector) -> Result<AmbientVector> {
        let a = self.to_frame(p, x)?;
        let b = self.to_frame(p, y)?;
        Ok(AmbientVector::frame(a.cross(&b)))
    }

    /// `<R(X,Y)Z, W>` from the closed form
    /// `(kappa - 3 tau^2) <R0(X,Y)Z,W> + (kappa - 4 tau^2) <R1(xi;X,Y)Z,W>`.
    /// Sign convention: `<R(X,Y)X,Y>` is the sectional curvature.
    pub fn curvature_tensor(
        &self,
        p: &AmbientPoint,
        x: &AmbientVector,
        y: &AmbientVector,
        z: &AmbientVector,
        w: &AmbientVector,
    ) -> Result<f64> {
        let basis = x.basis;
        if [y, z, w].iter().any(|v| v.basis != basis) {
            return Err(Error::MixedBasis);
        }
        let x = self.to_frame(p, x)?;
        let y = self.to_frame(p, y)?;
        let z = self.to_frame(p, z)?;
        let w = self.to_frame(p, w)?;
        Ok(curvature_frame(self.kappa, self.tau, &x, &y, &z, &w))
    }

    /// Matrix of the curvature operator in the basis
    /// (E2^E3, E3^E1, E1^E2).
    pub fn curvature_operator(&self) -> Matrix3<f64> {
        let pairs = [(1, 2), (2, 0), (0, 1)];
        let mut m = Matrix3::zeros();
        for (r, &(i, j)) in pairs.iter().enumerate() {
            for (c, &(k, l)) in pairs.iter().enumerate() {
                let e = |n: usize| {
                    let mut v = Vector3::zeros();
                    v[n] = 1.0;
                    v
                };
                m[(r, c)] = curvature_frame(self.kappa, self.tau, &e(i), &e(j), &e(k), &e(l));
            }
        }
        m
    }
}

/// `<R(X,Y)Z, W>` in closed form from frame components, for arbitrary
/// (kappa, tau).
pub fn curvature_frame(
    kappa: f64,
    tau: f64,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
    z: &Vector3<f64>,
    w: &Vector3<f64>,
) -> f64 {
    let r0 = x.dot(z) * y.dot(w) - y.dot(z) * x.dot(w);
    // xi = E3
    let (xv, yv, zv, wv) = (x[2], y[2], z[2], w[2]);
    let r1 = yv * zv * x.dot(w) + y.dot(z) * xv * wv - x.dot(z) * yv * wv - xv * zv * y.dot(w);
    (kappa - 3.0 * tau * tau) * r0 + (kappa - 4.0 * tau * tau) * r1
}
