//! Explicit surfaces with closed-form parametrizations and first
//! derivatives.

use nalgebra::Vector3;

use crate::ambient::{AmbientPoint, ModelSpace};
use crate::error::{Error, Result};

use super::Rect;

/// Names accepted by [`CatalogSurface::from_name`].
pub const NAMES: [&str; 6] =
    ["vertical-plane", "nil-z0", "horocycle-cylinder", "cmc-graph-B", "tube", "sphere"];

/// Mean curvature used for `tube` and `sphere` when none is given.
pub const DEFAULT_H: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogSurface {
    /// `(v, 0, u)` in Nil: flat and minimal.
    VerticalPlane,
    /// `(u cos v, u sin v, 0)` in Nil: minimal, rotationally invariant.
    NilZ0,
    /// Vertical cylinder over a horocycle in H^2 x R, arclength-parametrized.
    HorocycleCylinder,
    /// Rotational graph in H^2 x R with constant mean curvature 1/2.
    CmcGraphB,
    /// CMC `h` surface in Nil invariant by translations along x.
    Tube { h: f64 },
    /// Rotational CMC sphere in Nil (mean curvature `-h` with the
    /// orientation induced by the parametrization).
    Sphere { h: f64 },
}

impl CatalogSurface {
    pub fn from_name(name: &str, h: Option<f64>) -> Result<Self> {
        let with_h = |h: Option<f64>| -> Result<f64> {
            let h = h.unwrap_or(DEFAULT_H);
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!("H must be positive, got {h}")));
            }
            Ok(h)
        };
        match name {
            "vertical-plane" => Ok(CatalogSurface::VerticalPlane),
            "nil-z0" => Ok(CatalogSurface::NilZ0),
            "horocycle-cylinder" => Ok(CatalogSurface::HorocycleCylinder),
            "cmc-graph-B" => Ok(CatalogSurface::CmcGraphB),
            "tube" => Ok(CatalogSurface::Tube { h: with_h(h)? }),
            "sphere" => Ok(CatalogSurface::Sphere { h: with_h(h)? }),
            other => Err(Error::UnknownSurface(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CatalogSurface::VerticalPlane => "vertical-plane",
            CatalogSurface::NilZ0 => "nil-z0",
            CatalogSurface::HorocycleCylinder => "horocycle-cylinder",
            CatalogSurface::CmcGraphB => "cmc-graph-B",
            CatalogSurface::Tube { .. } => "tube",
            CatalogSurface::Sphere { .. } => "sphere",
        }
    }

    /// The model space the surface lives in.
    pub fn model(&self) -> ModelSpace {
        match self {
            CatalogSurface::HorocycleCylinder | CatalogSurface::CmcGraphB => ModelSpace::h2xr(),
            _ => ModelSpace::nil3(),
        }
    }

    pub fn default_rect(&self) -> Rect {
        match self {
            CatalogSurface::VerticalPlane | CatalogSurface::HorocycleCylinder => {
                Rect::new(-1.0, 1.0, -1.0, 1.0)
            }
            CatalogSurface::NilZ0 | CatalogSurface::CmcGraphB => Rect::new(1.5, 2.5, -0.5, 0.5),
            CatalogSurface::Tube { .. } | CatalogSurface::Sphere { .. } => {
                Rect::new(-0.35, 0.35, -0.35, 0.35)
            }
        }
    }

    pub fn point(&self, u: f64, v: f64) -> AmbientPoint {
        self.eval(u, v).0
    }

    /// `(phi, phi_u, phi_v)` in chart coordinates.
    pub fn eval(&self, u: f64, v: f64) -> (AmbientPoint, Vector3<f64>, Vector3<f64>) {
        match *self {
            CatalogSurface::VerticalPlane => (
                AmbientPoint::new(v, 0.0, u),
                Vector3::new(0.0, 0.0, 1.0),
                Vector3::new(1.0, 0.0, 0.0),
            ),
            CatalogSurface::NilZ0 => {
                let (s, c) = v.sin_cos();
                (
                    AmbientPoint::new(u * c, u * s, 0.0),
                    Vector3::new(c, s, 0.0),
                    Vector3::new(-u * s, u * c, 0.0),
                )
            }
            CatalogSurface::HorocycleCylinder => {
                // The horocycle y = 1 of the half-plane, carried to the
                // radius-2 disk and parametrized by arclength.
                let d = u * u + 4.0;
                (
                    AmbientPoint::new(2.0 * u * u / d, 4.0 * u / d, v),
                    Vector3::new(16.0 * u / (d * d), 4.0 * (4.0 - u * u) / (d * d), 0.0),
                    Vector3::new(0.0, 0.0, 1.0),
                )
            }
            CatalogSurface::CmcGraphB => {
                let (sv, cv) = v.sin_cos();
                let s = (1.0 + 0.25 * u * u).sqrt();
                let s3 = s * s * s;
                (
                    AmbientPoint::new(u * cv / s, u * sv / s, 2.0 * s),
                    Vector3::new(cv / s3, sv / s3, u / (2.0 * s)),
                    Vector3::new(-u * sv / s, u * cv / s, 0.0),
                )
            }
            CatalogSurface::Tube { h } => {
                let (sv, cv) = v.sin_cos();
                let (f, df) = profile(h, v);
                (
                    AmbientPoint::new(u, cv / (2.0 * h), (u * cv + f) / (4.0 * h)),
                    Vector3::new(1.0, 0.0, cv / (4.0 * h)),
                    Vector3::new(0.0, -sv / (2.0 * h), (-u * sv + df) / (4.0 * h)),
                )
            }
            CatalogSurface::Sphere { h } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                let (f, df) = profile(h, v);
                (
                    AmbientPoint::new(cu * cv / h, su * cv / h, f / (2.0 * h)),
                    Vector3::new(-su * cv / h, cu * cv / h, 0.0),
                    Vector3::new(-cu * sv / h, -su * sv / h, df / (2.0 * h)),
                )
            }
        }
    }
}

/// `f(v) = Q sin v + (1+4h^2)/(2h) asin(sin v / sqrt(1+4h^2))` with
/// `Q = sqrt(1 + cos^2 v / (4h^2))`, and its derivative `2 Q cos v`.
pub fn profile(h: f64, v: f64) -> (f64, f64) {
    let (sv, cv) = v.sin_cos();
    let q = (1.0 + cv * cv / (4.0 * h * h)).sqrt();
    let m = 1.0 + 4.0 * h * h;
    let f = q * sv + m / (2.0 * h) * (sv / m.sqrt()).asin();
    (f, 2.0 * q * cv)
}
