mod common;

use homsurf::ambient::AmbientPoint;
use homsurf::compatibility::{default_tol, verify};
use homsurf::correspondence::{sister, twin};
use homsurf::immersion::{
    adapted_frame, fundamental_data, CatalogSurface, DerivativeMode, QuadrupleField, SurfacePatch,
};
use homsurf::reconstruction::{initial_frame, integrate_frame, reconstruct, reconstruct_with, ReconstructOptions};
use homsurf::{Error, Execution, ModelSpace};
use nalgebra::{Rotation3, Vector3};

fn field(s: CatalogSurface, n: usize) -> (SurfacePatch, QuadrupleField) {
    let p = SurfacePatch::catalog(s);
    let q = fundamental_data(&p, &p.grid(n, n).unwrap()).unwrap();
    (p, q)
}

#[test]
fn sister_of_nil_z0_is_the_rotational_graph() {
    let (_, a) = field(CatalogSurface::NilZ0, 21);
    let (_, b) = field(CatalogSurface::CmcGraphB, 21);
    let (s, ph) = sister(&a, &ModelSpace::nil3(), &ModelSpace::h2xr(), 1.0).unwrap();
    assert!((ph.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!(s.max_abs_diff(&b) < 1e-10, "{}", s.max_abs_diff(&b));
}

#[test]
fn sister_of_vertical_plane_is_the_horocycle_cylinder() {
    let (_, a) = field(CatalogSurface::VerticalPlane, 21);
    let (_, b) = field(CatalogSurface::HorocycleCylinder, 21);
    let (s, _) = sister(&a, &ModelSpace::nil3(), &ModelSpace::h2xr(), 1.0).unwrap();
    assert!(s.max_abs_diff(&b) < 1e-10, "{}", s.max_abs_diff(&b));
}

#[test]
fn sister_and_twin_data_pass_verification() {
    let (_, q) = field(CatalogSurface::Tube { h: 1.0 }, 41);
    let tol = default_tol(&q.grid);
    let m2 = ModelSpace::new(-1.0, 0.0).unwrap();
    let (s, _) = sister(&q, &ModelSpace::nil3(), &m2, -1.0).unwrap();
    assert!(verify(&s, &m2, tol).unwrap().passed());
    let (t, _) = twin(&q, &ModelSpace::nil3(), 1.0).unwrap();
    assert!(verify(&t, &ModelSpace::nil3(), tol).unwrap().passed());
    // the source data are not compatible with the wrong model
    assert!(!verify(&q, &m2, tol).unwrap().passed());
}

/// Reconstructing the sister data gives a surface whose own data are the
/// sister data.
#[test]
fn reconstructed_sister_reproduces_its_data() {
    let (_, q) = field(CatalogSurface::NilZ0, 41);
    let m2 = ModelSpace::h2xr();
    let (s, _) = sister(&q, &ModelSpace::nil3(), &m2, 1.0).unwrap();
    let a0 = initial_frame(&s.points[0].t, s.points[0].nu).unwrap();
    let r = reconstruct(&s, &m2, &a0, &AmbientPoint::new(0.1, -0.2, 0.0)).unwrap();
    let back = fundamental_data(&r.patch().unwrap(), &s.grid).unwrap();
    assert!(back.max_abs_diff(&s) < 1e-3, "{}", back.max_abs_diff(&s));
    assert!(r.max_last_row_deviation(&s) < 1e-6);
}

/// Any admissible initial frame and point give a congruent surface with
/// the same data.
#[test]
fn uniqueness_up_to_fiber_preserving_isometry() {
    for s in [CatalogSurface::Sphere { h: 1.0 }, CatalogSurface::CmcGraphB] {
        let (_, q) = field(s, 41);
        let a0 = initial_frame(&q.points[0].t, q.points[0].nu).unwrap();
        let base = reconstruct(&q, &s.model(), &a0, &AmbientPoint::new(0.0, 0.0, 0.0)).unwrap();
        let qb = fundamental_data(&base.patch().unwrap(), &q.grid).unwrap();
        for angle in [0.7, -2.0] {
            let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), angle).into_inner();
            let x0 = AmbientPoint::new(0.3, -0.1, 2.0);
            let r = reconstruct(&q, &s.model(), &(rz * a0), &x0).unwrap();
            let qr = fundamental_data(&r.patch().unwrap(), &q.grid).unwrap();
            // In Nil the aligning isometries are affine in the chart, so the
            // sampled extractions agree to roundoff; in H^2 x R they only
            // agree to truncation error.
            let tol = if s.model().tau() != 0.0 { 1e-6 } else { 1e-3 };
            assert!(qr.max_abs_diff(&qb) < tol, "{} {}", s.name(), qr.max_abs_diff(&qb));
            assert!(qr.max_abs_diff(&q) < 1e-3);
        }
    }
}

#[test]
fn start_node_and_execution_do_not_matter() {
    let (p, q) = field(CatalogSurface::Tube { h: 1.0 }, 41);
    let g = q.grid;
    let pts = p.points(&g);
    let run = |i: usize, j: usize, exec: Execution| {
        let a0 = adapted_frame(&p, g.u(i), g.v(j)).unwrap();
        let opts = ReconstructOptions { start: (i, j), exec, ..ReconstructOptions::default() };
        reconstruct_with(&q, &p.model, &a0, &pts[g.index(i, j)], &opts).unwrap()
    };
    let a = run(0, 0, Execution::Sequential);
    let b = run(0, 0, Execution::Parallel);
    assert_eq!(a, b);
    let c = run(20, 13, Execution::Parallel);
    for (x, y) in c.points().iter().zip(&pts) {
        assert!((x.coords() - y.coords()).norm() < 1e-6);
    }
}

#[test]
fn path_integration_follows_the_surface() {
    let (p, q) = field(CatalogSurface::NilZ0, 21);
    let g = q.grid;
    let a0 = adapted_frame(&p, g.u(0), g.v(0)).unwrap();
    let pts = p.points(&g);
    // staircase alternating u and v steps
    let path: Vec<(usize, usize)> = (0..19usize).map(|k| (k.div_ceil(2), k / 2)).collect();
    let states = integrate_frame(&q, &p.model, &a0, &pts[0], &path).unwrap();
    for (s, &(i, j)) in states.iter().zip(&path) {
        assert!((s.f.coords() - pts[g.index(i, j)].coords()).norm() < 1e-8);
        let want = adapted_frame(&p, g.u(i), g.v(j)).unwrap();
        assert!((s.a - want).amax() < 1e-6, "{}", (s.a - want).amax());
    }
    let bad = integrate_frame(&q, &p.model, &a0, &pts[0], &[(0, 0), (1, 1)]);
    assert!(matches!(bad, Err(Error::InvalidParameter(_))));
}

#[test]
fn finite_difference_extraction_reconstructs() {
    let p = SurfacePatch::catalog(CatalogSurface::Sphere { h: 1.0 }).with_mode(DerivativeMode::FiniteDifference(1e-5));
    let g = p.grid(41, 41).unwrap();
    let q = fundamental_data(&p, &g).unwrap();
    let a0 = adapted_frame(&p, g.u(0), g.v(0)).unwrap();
    let r = reconstruct(&q, &p.model, &a0, &p.points(&g)[0]).unwrap();
    let err = r.points().iter().zip(p.points(&g)).map(|(a, b)| (a.coords() - b.coords()).norm()).fold(0.0, f64::max);
    assert!(err < 1e-5, "{err}");
}
