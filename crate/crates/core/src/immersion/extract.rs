use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::ambient::{AmbientPoint, ModelSpace, H_FIRST};
use crate::error::{Error, Result};
use crate::fd::{self, Order};
use crate::par::{try_map_indices, Execution};

use super::{
    tangent_frame, tangent_frame_inverse, DerivativeMode, Grid, Parametrization, QuadrupleField,
    QuadruplePoint, SurfacePatch, EPS_IMMERSION,
};

/// How the covariant derivative of the unit normal is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalRoute {
    /// Frame components of `N` differentiated along the patch, plus the
    /// frame connection coefficients.
    Frame,
    /// Coordinate components of `N` plus the coordinate Christoffel
    /// symbols of the chart metric.
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    /// Parameter step for derivatives of the normal along analytic patches.
    pub h_normal: f64,
    /// Step of the coordinate Christoffel stencil.
    pub h_amb: f64,
    pub route: NormalRoute,
    pub exec: Execution,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            h_normal: 1e-3,
            h_amb: H_FIRST,
            route: NormalRoute::Frame,
            exec: Execution::default(),
        }
    }
}

/// Fundamental data of `patch` on `grid` with default options.
pub fn fundamental_data(patch: &SurfacePatch, grid: &Grid) -> Result<QuadrupleField> {
    fundamental_data_with(patch, grid, &ExtractOptions::default())
}

pub fn fundamental_data_with(
    patch: &SurfacePatch,
    grid: &Grid,
    opts: &ExtractOptions,
) -> Result<QuadrupleField> {
    let records = match &patch.param {
        Parametrization::Catalog(_) => try_map_indices(opts.exec, grid.len(), |k| {
            let (i, j) = grid.coords(k);
            analytic_node(patch, grid.u(i), grid.v(j), opts)
        })?,
        Parametrization::Sampled { grid: own, points } => {
            if own != grid {
                return Err(Error::InvalidParameter(
                    "sampled patches are evaluated on their own grid".into(),
                ));
            }
            sampled_nodes(&patch.model, grid, points, opts)?
        }
    };
    let asymmetry = records.iter().map(|r| r.1).fold(0.0, f64::max);
    let points = records.into_iter().map(|r| r.0).collect();
    let mut q = QuadrupleField::new(patch.model, *grid, points)?;
    q.asymmetry = asymmetry;
    Ok(q)
}

/// Position and coordinate tangents of a catalog patch.
/// Frame components of `(e1, e2, N)` at `(u, v)` as the columns of a
/// rotation, for an analytic patch. The tangent frame is the one used by
/// the quadruple data.
pub fn adapted_frame(patch: &SurfacePatch, u: f64, v: f64) -> Result<Matrix3<f64>> {
    if !matches!(patch.param, Parametrization::Catalog(_)) {
        return Err(Error::InvalidParameter("adapted frame needs an analytic patch".into()));
    }
    let (p, pu, pv) = tangents(patch, u, v);
    let frame = patch.model.canonical_frame_at(&p)?;
    let a = frame.to_frame(&pu);
    let b = frame.to_frame(&pv);
    check_metric(&a, &b, u, v)?;
    let g = Matrix2::new(a.dot(&a), a.dot(&b), a.dot(&b), b.dot(&b));
    let t = tangent_frame(&g);
    let e1 = a * t[(0, 0)] + b * t[(1, 0)];
    let e2 = a * t[(0, 1)] + b * t[(1, 1)];
    Ok(Matrix3::from_columns(&[e1, e2, unit_normal(&a, &b)]))
}

fn tangents(patch: &SurfacePatch, u: f64, v: f64) -> (AmbientPoint, Vector3<f64>, Vector3<f64>) {
    let Parametrization::Catalog(s) = &patch.param else {
        unreachable!("analytic evaluation of a sampled patch")
    };
    match patch.mode {
        DerivativeMode::Analytic => s.eval(u, v),
        DerivativeMode::FiniteDifference(h) => {
            let du = (s.point(u + h, v).coords() - s.point(u - h, v).coords()) / (2.0 * h);
            let dv = (s.point(u, v + h).coords() - s.point(u, v - h).coords()) / (2.0 * h);
            (s.point(u, v), du, dv)
        }
    }
}

fn unit_normal(a: &Vector3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
    a.cross(b).normalize()
}

fn check_metric(a: &Vector3<f64>, b: &Vector3<f64>, u: f64, v: f64) -> Result<()> {
    let det = a.norm_squared() * b.norm_squared() - a.dot(b).powi(2);
    if !(det > EPS_IMMERSION) {
        return Err(Error::DegenerateMetric { u, v, det });
    }
    Ok(())
}

fn analytic_node(
    patch: &SurfacePatch,
    u: f64,
    v: f64,
    opts: &ExtractOptions,
) -> Result<(QuadruplePoint, f64)> {
    let m = &patch.model;
    let (p, pu, pv) = tangents(patch, u, v);
    let frame = m.canonical_frame_at(&p)?;
    let a = frame.to_frame(&pu);
    let b = frame.to_frame(&pv);
    check_metric(&a, &b, u, v)?;
    let n = unit_normal(&a, &b);
    let h = opts.h_normal;
    let (cov_u, cov_v) = match opts.route {
        NormalRoute::Frame => {
            let normal_at = |uu: f64, vv: f64| -> Result<Vector3<f64>> {
                let (q, qu, qv) = tangents(patch, uu, vv);
                let f = m.canonical_frame_at(&q)?;
                Ok(unit_normal(&f.to_frame(&qu), &f.to_frame(&qv)))
            };
            let dn_u = fd::central(|s| normal_at(s, v), u, h, Order::Fourth)?;
            let dn_v = fd::central(|s| normal_at(u, s), v, h, Order::Fourth)?;
            let gam = m.frame_christoffels(&p)?;
            (dn_u + gam.contract(&a, &n), dn_v + gam.contract(&b, &n))
        }
        NormalRoute::Coordinate => {
            let normal_at = |uu: f64, vv: f64| -> Result<Vector3<f64>> {
                let (q, qu, qv) = tangents(patch, uu, vv);
                let f = m.canonical_frame_at(&q)?;
                Ok(f.to_coordinate(&unit_normal(&f.to_frame(&qu), &f.to_frame(&qv))))
            };
            let big_n = frame.to_coordinate(&n);
            let dn_u = fd::central(|s| normal_at(s, v), u, h, Order::Fourth)?;
            let dn_v = fd::central(|s| normal_at(u, s), v, h, Order::Fourth)?;
            let gam = m.coordinate_christoffels(&p, opts.h_amb)?;
            (
                frame.to_frame(&(dn_u + gam.contract(&pu, &big_n))),
                frame.to_frame(&(dn_v + gam.contract(&pv, &big_n))),
            )
        }
    };
    Ok(assemble(&a, &b, &n, &cov_u, &cov_v))
}

fn sampled_nodes(
    m: &ModelSpace,
    grid: &Grid,
    points: &[AmbientPoint],
    opts: &ExtractOptions,
) -> Result<Vec<(QuadruplePoint, f64)>> {
    grid.require(fd::min_nodes(Order::Fourth))?;
    let (nu, nv) = (grid.nu, grid.nv);
    let (du, dv) = (grid.du(), grid.dv());
    let coords: Vec<Vector3<f64>> = points.iter().map(AmbientPoint::coords).collect();
    let d_u = |k: usize, f: &dyn Fn(usize) -> Vector3<f64>| {
        let (i, j) = grid.coords(k);
        fd::line_derivative(|ii| f(grid.index(ii, j)), nu, i, du, Order::Fourth)
    };
    let d_v = |k: usize, f: &dyn Fn(usize) -> Vector3<f64>| {
        let (i, j) = grid.coords(k);
        fd::line_derivative(|jj| f(grid.index(i, jj)), nv, j, dv, Order::Fourth)
    };
    // Per node: frame components of the tangents and the normal.
    let first = try_map_indices(opts.exec, grid.len(), |k| {
        let frame = m.canonical_frame_at(&points[k])?;
        let pu = d_u(k, &|l| coords[l]);
        let pv = d_v(k, &|l| coords[l]);
        let a = frame.to_frame(&pu);
        let b = frame.to_frame(&pv);
        let (i, j) = grid.coords(k);
        check_metric(&a, &b, grid.u(i), grid.v(j))?;
        let n = unit_normal(&a, &b);
        Ok::<_, Error>((frame, pu, pv, a, b, n))
    })?;
    let normals: Vec<Vector3<f64>> = match opts.route {
        NormalRoute::Frame => first.iter().map(|r| r.5).collect(),
        NormalRoute::Coordinate => first.iter().map(|r| r.0.to_coordinate(&r.5)).collect(),
    };
    try_map_indices(opts.exec, grid.len(), |k| {
        let (frame, pu, pv, a, b, n) = &first[k];
        let dn_u = d_u(k, &|l| normals[l]);
        let dn_v = d_v(k, &|l| normals[l]);
        let (cov_u, cov_v) = match opts.route {
            NormalRoute::Frame => {
                let gam = m.frame_christoffels(&points[k])?;
                (dn_u + gam.contract(a, n), dn_v + gam.contract(b, n))
            }
            NormalRoute::Coordinate => {
                let gam = m.coordinate_christoffels(&points[k], opts.h_amb)?;
                (
                    frame.to_frame(&(dn_u + gam.contract(pu, &normals[k]))),
                    frame.to_frame(&(dn_v + gam.contract(pv, &normals[k]))),
                )
            }
        };
        Ok(assemble(a, b, n, &cov_u, &cov_v))
    })
}

/// Builds the record at one node from frame components of the tangents
/// `a = phi_u`, `b = phi_v`, the unit normal `n`, and the covariant
/// derivatives of the normal along `d/du` and `d/dv`.
fn assemble(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    n: &Vector3<f64>,
    cov_u: &Vector3<f64>,
    cov_v: &Vector3<f64>,
) -> (QuadruplePoint, f64) {
    let g = Matrix2::new(a.dot(a), a.dot(b), a.dot(b), b.dot(b));
    let nu = n[2];
    // <xi, phi_u>, <xi, phi_v> with xi = E3
    let rhs = Vector2::new(a[2], b[2]);
    let t_param = g.try_inverse().map(|gi| gi * rhs).unwrap_or_else(Vector2::zeros);
    let t = tangent_frame_inverse(&g) * t_param;
    // second fundamental form II(d_i, d_l) = -<nabla_{d_i} N, d_l>
    let tang = [a, b];
    let cov = [cov_u, cov_v];
    let mut ii = Matrix2::zeros();
    for i in 0..2 {
        for l in 0..2 {
            ii[(i, l)] = -cov[i].dot(tang[l]);
        }
    }
    let p = tangent_frame(&g);
    // S[j][k] = <S e_k, e_j> = II(e_k, e_j)
    let s_raw = p.transpose() * ii.transpose() * p;
    let asym = (s_raw[(0, 1)] - s_raw[(1, 0)]).abs();
    let s = 0.5 * (s_raw + s_raw.transpose());
    (QuadruplePoint { g, s, t, nu }, asym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::{CatalogSurface, Rect};

    fn field(surface: CatalogSurface, n: usize) -> QuadrupleField {
        let patch = SurfacePatch::catalog(surface);
        fundamental_data(&patch, &patch.grid(n, n).unwrap()).unwrap()
    }

    #[test]
    fn vertical_plane_data() {
        let q = field(CatalogSurface::VerticalPlane, 9);
        let s = Matrix2::new(0.0, -0.5, -0.5, 0.0);
        for p in &q.points {
            assert!(p.nu.abs() < 1e-12);
            assert!((p.t - Vector2::new(1.0, 0.0)).amax() < 1e-12);
            assert!((p.s - s).amax() < 1e-10);
            assert!((p.g - Matrix2::identity()).amax() < 1e-14);
        }
    }

    #[test]
    fn nil_z0_at_u_two() {
        let patch = SurfacePatch::catalog(CatalogSurface::NilZ0).with_rect(Rect::new(1.0, 2.0, -0.2, 0.2));
        let q = fundamental_data(&patch, &patch.grid(5, 5).unwrap()).unwrap();
        let p = q.at(4, 2);
        assert!((p.nu - 0.5f64.sqrt()).abs() < 1e-12);
        // direct oracle: <xi, phi_u> = 0, <xi, phi_v> = -u^2 / 2, g = diag(1, u^2 + u^4/4)
        let u: f64 = 2.0;
        let gvv = u * u + 0.25 * u.powi(4);
        let tv = (-0.5 * u * u) / gvv;
        assert!((p.t.norm_squared() - tv * tv * gvv).abs() < 1e-12);
        assert!((p.t.norm_squared() - 0.5).abs() < 1e-12);
        assert!(p.t[0].abs() < 1e-12 && p.t[1] < 0.0);
        assert!(p.mean_curvature().abs() < 1e-9);
    }

    #[test]
    fn cmc_values() {
        let tube = field(CatalogSurface::Tube { h: 1.0 }, 9);
        let sphere = field(CatalogSurface::Sphere { h: 1.0 }, 9);
        let graph = field(CatalogSurface::CmcGraphB, 9);
        let cyl = field(CatalogSurface::HorocycleCylinder, 9);
        for (q, h) in [(&tube, 1.0), (&sphere, -1.0), (&graph, 0.5), (&cyl, 0.5)] {
            for p in &q.points {
                assert!((p.mean_curvature() - h).abs() < 1e-9, "{}", p.mean_curvature());
                assert!(p.unit_defect().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coordinate_route_agrees() {
        for s in [CatalogSurface::Tube { h: 0.8 }, CatalogSurface::CmcGraphB, CatalogSurface::NilZ0] {
            let patch = SurfacePatch::catalog(s);
            let grid = patch.grid(7, 7).unwrap();
            let a = fundamental_data(&patch, &grid).unwrap();
            let opts = ExtractOptions { route: NormalRoute::Coordinate, ..Default::default() };
            let b = fundamental_data_with(&patch, &grid, &opts).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-6, "{}: {}", s.name(), a.max_abs_diff(&b));
        }
    }

    #[test]
    fn finite_difference_mode_is_second_order() {
        let s = CatalogSurface::Sphere { h: 1.0 };
        let base = SurfacePatch::catalog(s);
        let grid = base.grid(5, 5).unwrap();
        let exact = fundamental_data(&base, &grid).unwrap();
        let err = |h: f64| {
            let p = base.clone().with_mode(DerivativeMode::FiniteDifference(h));
            fundamental_data(&p, &grid).unwrap().max_abs_diff(&exact)
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 < 1e-3 && (e1 / e2 - 4.0).abs() < 1.0, "{e1} {e2}");
    }

    #[test]
    fn sampled_patch_matches_analytic() {
        let s = CatalogSurface::Tube { h: 1.0 };
        let patch = SurfacePatch::catalog(s);
        let grid = patch.grid(41, 41).unwrap();
        let exact = fundamental_data(&patch, &grid).unwrap();
        let sampled = SurfacePatch::sampled(patch.model, grid, patch.points(&grid)).unwrap();
        let q = fundamental_data(&sampled, &grid).unwrap();
        assert!(q.max_abs_diff(&exact) < 1e-4, "{}", q.max_abs_diff(&exact));
    }

    #[test]
    fn degenerate_patch_is_rejected() {
        let s = CatalogSurface::NilZ0;
        let patch = SurfacePatch::catalog(s).with_rect(Rect::new(0.0, 1.0, 0.0, 1.0));
        let grid = patch.grid(5, 5).unwrap();
        assert!(matches!(fundamental_data(&patch, &grid), Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn chart_boundary_is_reported() {
        let grid = Grid::new(5, 5, Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap();
        let pts = (0..25)
            .map(|k| AmbientPoint::new(1.0 + 0.3 * (k % 5) as f64, 0.1 * (k / 5) as f64, 0.0))
            .collect();
        assert!(matches!(
            SurfacePatch::sampled(ModelSpace::h2xr(), grid, pts),
            Err(Error::OutsideChart { .. })
        ));
    }
}
