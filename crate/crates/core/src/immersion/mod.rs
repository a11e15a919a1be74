//! Surface patches and their fundamental data `(g, S, T, nu)`.
//!
//! `g` is the first fundamental form in the parameter basis
//! `(d/du, d/dv)`. `S` and `T` are expressed in the tangent frame
//! `(e1, e2)` obtained from `d/du` by Gram-Schmidt, and `nu = <N, xi>` with
//! `N` chosen so that `(e1, e2, N)` is direct.

pub mod catalog;
mod extract;

use nalgebra::{Matrix2, Vector2};

use crate::ambient::{AmbientPoint, ModelSpace};
use crate::error::{Error, Result};

pub use catalog::CatalogSurface;
pub use extract::{adapted_frame, fundamental_data, fundamental_data_with, ExtractOptions, NormalRoute};

/// Smallest admissible `det g`.
pub const EPS_IMMERSION: f64 = 1e-12;

/// Default number of grid points per direction.
pub const DEFAULT_GRID: usize = 41;

/// Parameter rectangle `[u0, u1] x [v0, v1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Rect {
    pub const fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        Rect { u0, u1, v0, v1 }
    }
}

/// Uniform grid on a rectangle, nodes indexed `i + j * nu` (u fastest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nu: usize,
    pub nv: usize,
    pub rect: Rect,
}

impl Grid {
    pub fn new(nu: usize, nv: usize, rect: Rect) -> Result<Self> {
        if nu < 2 || nv < 2 {
            return Err(Error::GridTooSmall { nu, nv, needed: 2 });
        }
        let Rect { u0, u1, v0, v1 } = rect;
        if !(u1 > u0 && v1 > v0) || ![u0, u1, v0, v1].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "empty rectangle [{u0}, {u1}] x [{v0}, {v1}]"
            )));
        }
        Ok(Grid { nu, nv, rect })
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn du(&self) -> f64 {
        (self.rect.u1 - self.rect.u0) / (self.nu - 1) as f64
    }

    pub fn dv(&self) -> f64 {
        (self.rect.v1 - self.rect.v0) / (self.nv - 1) as f64
    }

    pub fn u(&self, i: usize) -> f64 {
        if i == self.nu - 1 {
            self.rect.u1
        } else {
            self.rect.u0 + i as f64 * self.du()
        }
    }

    pub fn v(&self, j: usize) -> f64 {
        if j == self.nv - 1 {
            self.rect.v1
        } else {
            self.rect.v0 + j as f64 * self.dv()
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + j * self.nu
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nu, k / self.nu)
    }

    /// The grid with every other node (requires odd sizes).
    pub fn coarsened(&self) -> Result<Grid> {
        if self.nu.is_multiple_of(2) || self.nv.is_multiple_of(2) {
            return Err(Error::InvalidParameter("coarsening needs odd grid sizes".into()));
        }
        Grid::new(self.nu / 2 + 1, self.nv / 2 + 1, self.rect)
    }

    pub(crate) fn require(&self, needed: usize) -> Result<()> {
        if self.nu < needed || self.nv < needed {
            return Err(Error::GridTooSmall { nu: self.nu, nv: self.nv, needed });
        }
        Ok(())
    }
}

/// How positions along the patch are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Parametrization {
    Catalog(CatalogSurface),
    /// Positions on a grid, e.g. the output of a reconstruction.
    Sampled { grid: Grid, points: Vec<AmbientPoint> },
}

/// How the first derivatives of a catalog map are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Second-order central differences with this step.
    FiniteDifference(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatch {
    pub model: ModelSpace,
    pub param: Parametrization,
    pub rect: Rect,
    pub mode: DerivativeMode,
}

impl SurfacePatch {
    pub fn catalog(surface: CatalogSurface) -> Self {
        SurfacePatch {
            model: surface.model(),
            param: Parametrization::Catalog(surface),
            rect: surface.default_rect(),
            mode: DerivativeMode::Analytic,
        }
    }

    pub fn sampled(model: ModelSpace, grid: Grid, points: Vec<AmbientPoint>) -> Result<Self> {
        if points.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points for a {}x{} grid",
                points.len(),
                grid.nu,
                grid.nv
            )));
        }
        for p in &points {
            model.check_domain(p)?;
        }
        Ok(SurfacePatch {
            model,
            rect: grid.rect,
            param: Parametrization::Sampled { grid, points },
            mode: DerivativeMode::FiniteDifference(grid.du().min(grid.dv())),
        })
    }

    pub fn with_rect(mut self, rect: Rect) -> Self {
        self.rect = rect;
        self
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    /// Uniform grid over the patch rectangle.
    pub fn grid(&self, nu: usize, nv: usize) -> Result<Grid> {
        match &self.param {
            Parametrization::Sampled { grid, .. } => Ok(*grid),
            Parametrization::Catalog(_) => Grid::new(nu, nv, self.rect),
        }
    }

    pub fn points(&self, grid: &Grid) -> Vec<AmbientPoint> {
        match &self.param {
            Parametrization::Sampled { points, .. } => points.clone(),
            Parametrization::Catalog(s) => (0..grid.len())
                .map(|k| {
                    let (i, j) = grid.coords(k);
                    s.point(grid.u(i), grid.v(j))
                })
                .collect(),
        }
    }
}

/// Catalog lookup by name.
pub fn catalog(name: &str, h: Option<f64>) -> Result<SurfacePatch> {
    Ok(SurfacePatch::catalog(CatalogSurface::from_name(name, h)?))
}

/// The direct orthonormal frame `(e1, e2)` of `g` with `e1` along `d/du`,
/// as the columns of a 2x2 matrix in parameter components.
pub fn tangent_frame(g: &Matrix2<f64>) -> Matrix2<f64> {
    let g11 = g[(0, 0)];
    let g12 = g[(0, 1)];
    let det = g.determinant();
    let a = g11.sqrt();
    let b = a * det.sqrt();
    Matrix2::new(1.0 / a, -g12 / b, 0.0, g11 / b)
}

/// Inverse of [`tangent_frame`]: maps parameter components to frame
/// components.
pub fn tangent_frame_inverse(g: &Matrix2<f64>) -> Matrix2<f64> {
    let g11 = g[(0, 0)];
    let g12 = g[(0, 1)];
    let det = g.determinant();
    let a = g11.sqrt();
    Matrix2::new(a, g12 / a, 0.0, (det / g11).sqrt())
}

/// The quarter turn `J e1 = e2` in frame components.
pub fn quarter_turn() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// Rotation by `theta` in frame components.
pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// The fundamental data at one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadruplePoint {
    /// First fundamental form in the parameter basis.
    pub g: Matrix2<f64>,
    /// Shape operator in the tangent frame.
    pub s: Matrix2<f64>,
    /// Tangential part of the vertical field in the tangent frame.
    pub t: Vector2<f64>,
    pub nu: f64,
}

impl QuadruplePoint {
    pub fn mean_curvature(&self) -> f64 {
        0.5 * self.s.trace()
    }

    pub fn frame(&self) -> Matrix2<f64> {
        tangent_frame(&self.g)
    }

    pub fn unit_defect(&self) -> f64 {
        self.t.norm_squared() + self.nu * self.nu - 1.0
    }

    pub fn max_abs_diff(&self, other: &QuadruplePoint) -> f64 {
        (self.g - other.g)
            .amax()
            .max((self.s - other.s).amax())
            .max((self.t - other.t).amax())
            .max((self.nu - other.nu).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadrupleField {
    pub model: ModelSpace,
    pub grid: Grid,
    pub points: Vec<QuadruplePoint>,
    /// Largest `|S12 - S21|` seen before symmetrization.
    pub asymmetry: f64,
}

impl QuadrupleField {
    pub fn new(model: ModelSpace, grid: Grid, points: Vec<QuadruplePoint>) -> Result<Self> {
        if points.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} records for a {}x{} grid",
                points.len(),
                grid.nu,
                grid.nv
            )));
        }
        for (k, p) in points.iter().enumerate() {
            let det = p.g.determinant();
            if !(p.g[(0, 0)] > 0.0 && det > EPS_IMMERSION) {
                let (i, j) = grid.coords(k);
                return Err(Error::DegenerateMetric { u: grid.u(i), v: grid.v(j), det });
            }
        }
        Ok(QuadrupleField { model, grid, points, asymmetry: 0.0 })
    }

    pub fn at(&self, i: usize, j: usize) -> &QuadruplePoint {
        &self.points[self.grid.index(i, j)]
    }

    pub fn mean_curvature(&self) -> Vec<f64> {
        self.points.iter().map(QuadruplePoint::mean_curvature).collect()
    }

    /// Mean and standard deviation of the mean curvature.
    pub fn mean_curvature_stats(&self) -> (f64, f64) {
        let h = self.mean_curvature();
        let n = h.len() as f64;
        let mean = h.iter().sum::<f64>() / n;
        let var = h.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    pub fn max_unit_defect(&self) -> f64 {
        self.points.iter().map(|p| p.unit_defect().abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &QuadrupleField) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Keeps every other node in both directions.
    pub fn coarsened(&self) -> Result<QuadrupleField> {
        let grid = self.grid.coarsened()?;
        let points = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.coords(k);
                *self.at(2 * i, 2 * j)
            })
            .collect();
        Ok(QuadrupleField { model: self.model, grid, points, asymmetry: self.asymmetry })
    }
}

/// Mean curvature field `tr S / 2`.
pub fn mean_curvature(q: &QuadrupleField) -> Vec<f64> {
    q.mean_curvature()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_frame_is_orthonormal_and_direct() {
        let g = Matrix2::new(2.0, 0.3, 0.3, 0.7);
        let p = tangent_frame(&g);
        let e = p.transpose() * g * p - Matrix2::identity();
        assert!(e.amax() < 1e-14);
        assert!(p.determinant() > 0.0);
        assert!(p[(1, 0)] == 0.0);
        assert!((tangent_frame_inverse(&g) * p - Matrix2::identity()).amax() < 1e-14);
    }

    #[test]
    fn grid_nodes() {
        let g = Grid::new(3, 5, Rect::new(0.0, 1.0, -1.0, 1.0)).unwrap();
        assert_eq!(g.u(2), 1.0);
        assert_eq!(g.v(0), -1.0);
        assert_eq!(g.v(2), 0.0);
        assert_eq!(g.index(2, 1), 5);
        assert_eq!(g.coords(5), (2, 1));
        assert!(Grid::new(1, 5, g.rect).is_err());
        assert!(Grid::new(3, 3, Rect::new(1.0, 0.0, 0.0, 1.0)).is_err());
        let c = g.coarsened().unwrap();
        assert_eq!((c.nu, c.nv), (2, 3));
    }

    #[test]
    fn rejects_degenerate_metric() {
        let grid = Grid::new(2, 2, Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap();
        let mut pts = vec![
            QuadruplePoint {
                g: Matrix2::identity(),
                s: Matrix2::zeros(),
                t: Vector2::new(1.0, 0.0),
                nu: 0.0
            };
            4
        ];
        pts[3].g = Matrix2::new(1.0, 1.0, 1.0, 1.0);
        assert!(matches!(
            QuadrupleField::new(ModelSpace::nil3(), grid, pts),
            Err(Error::DegenerateMetric { .. })
        ));
    }
}
