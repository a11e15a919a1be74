//! Independent oracles and sampling helpers for the integration tests.
#![allow(dead_code)]

use homsurf::ambient::{chart_metric, AmbientPoint};
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rotation(r: &mut ChaCha8Rng) -> Matrix3<f64> {
    let axis = random_unit(r);
    let angle = r.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).into_inner()
}

pub fn random_unit(r: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// A point well inside the chart of E(kappa, tau).
pub fn random_point(r: &mut ChaCha8Rng, kappa: f64) -> AmbientPoint {
    let radius = if kappa < 0.0 { 1.0 / (-kappa).sqrt() } else { 1.0 };
    loop {
        let (x, y) = (r.gen_range(-radius..radius), r.gen_range(-radius..radius));
        if x * x + y * y < radius * radius {
            return AmbientPoint::new(x, y, r.gen_range(-1.0..1.0));
        }
    }
}

fn metric(kappa: f64, tau: f64, c: &Vector3<f64>) -> Matrix3<f64> {
    chart_metric(kappa, tau, &AmbientPoint::from_coords(c)).expect("inside chart")
}

/// `gam[a][b][c] = Gamma^a_{bc}` of the chart metric by central differences.
pub fn christoffel_fd(kappa: f64, tau: f64, c: &Vector3<f64>, h: f64) -> [[[f64; 3]; 3]; 3] {
    let g_inv = metric(kappa, tau, c).try_inverse().expect("metric");
    let dg: Vec<Matrix3<f64>> = (0..3)
        .map(|k| {
            let mut e = Vector3::zeros();
            e[k] = h;
            (metric(kappa, tau, &(c + e)) - metric(kappa, tau, &(c - e))) / (2.0 * h)
        })
        .collect();
    let mut out = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for cc in 0..3 {
                out[a][b][cc] = (0..3)
                    .map(|d| 0.5 * g_inv[(a, d)] * (dg[b][(d, cc)] + dg[cc][(d, b)] - dg[d][(b, cc)]))
                    .sum();
            }
        }
    }
    out
}

/// `<R(X,Y)Z, W>` with `R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`, from
/// finite differences of the chart metric; coordinate components.
pub fn riemann_fd(
    kappa: f64,
    tau: f64,
    p: &AmbientPoint,
    h: f64,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
    z: &Vector3<f64>,
    w: &Vector3<f64>,
) -> f64 {
    let c = p.coords();
    let gam = christoffel_fd(kappa, tau, &c, h);
    let dgam: Vec<[[[f64; 3]; 3]; 3]> = (0..3)
        .map(|k| {
            let mut e = Vector3::zeros();
            e[k] = h;
            let a = christoffel_fd(kappa, tau, &(c + e), h);
            let b = christoffel_fd(kappa, tau, &(c - e), h);
            let mut d = [[[0.0; 3]; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for l in 0..3 {
                        d[i][j][l] = (a[i][j][l] - b[i][j][l]) / (2.0 * h);
                    }
                }
            }
            d
        })
        .collect();
    let g = metric(kappa, tau, &c);
    // r[a][b][cc][d] = R^a_{b cc d}: R(d_cc, d_d) d_b = R^a_{b cc d} d_a
    let mut total = 0.0;
    for a in 0..3 {
        let mut ra = 0.0;
        for b in 0..3 {
            for cc in 0..3 {
                for d in 0..3 {
                    let mut r = dgam[cc][a][d][b] - dgam[d][a][cc][b];
                    for e in 0..3 {
                        r += gam[a][cc][e] * gam[e][d][b] - gam[a][d][e] * gam[e][cc][b];
                    }
                    ra += r * z[b] * x[cc] * y[d];
                }
            }
        }
        total += (g * w)[a] * ra;
    }
    total
}
