//! Sister and twin correspondences and the sign flip on quadruple data.
//!
//! Two model spaces with the same `kappa - 4 tau^2` admit isometric CMC
//! surfaces whose data are related by a rotation of angle `theta` in the
//! tangent plane, where `tau2 + i H2 = e^{i theta} (tau1 + i H1)`:
//!
//! ```text
//! T2 = e^{theta J} T1,   S2 = e^{theta J} (S1 - H1 I) + H2 I,   g and nu unchanged.
//! ```
//!
//! The traceless part is split off with the pointwise mean curvature and
//! `H2` is recomputed pointwise from `tau1^2 + H1^2 = tau2^2 + H2^2`, so
//! discretization noise in `tr S1` does not leak into the Gauss equation
//! and the twin map is an exact involution.

use nalgebra::Matrix2;

use crate::ambient::ModelSpace;
use crate::error::{Error, Result};
use crate::immersion::{quarter_turn, rotation, QuadrupleField, QuadruplePoint};

/// Tolerance on `tau1^2 + H1^2 = tau2^2 + H2^2` and on anisotropy equality.
pub const NORM_TOL: f64 = 1e-9;

/// Largest standard deviation of `tr S / 2` accepted as constant.
pub const CONSTANT_H_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub theta: f64,
    pub tau1: f64,
    pub h1: f64,
    pub tau2: f64,
    pub h2: f64,
}

impl Phase {
    pub fn rotation(&self) -> Matrix2<f64> {
        rotation(self.theta)
    }
}

/// The angle `theta` in `(-pi, pi]` with
/// `tau2 + i H2 = e^{i theta} (tau1 + i H1)`.
pub fn phase_angle(tau1: f64, h1: f64, tau2: f64, h2: f64) -> Result<Phase> {
    let n1 = tau1 * tau1 + h1 * h1;
    let n2 = tau2 * tau2 + h2 * h2;
    if n1 == 0.0 {
        return Err(Error::ZeroPhaseSource);
    }
    if (n1 - n2).abs() > NORM_TOL {
        return Err(Error::PhaseNormMismatch { source_norm: n1, target_norm: n2 });
    }
    // (tau2 + i H2) * conj(tau1 + i H1)
    let re = tau2 * tau1 + h2 * h1;
    let im = h2 * tau1 - tau2 * h1;
    let mut theta = im.atan2(re);
    if theta == -std::f64::consts::PI {
        theta = std::f64::consts::PI;
    }
    Ok(Phase { theta, tau1, h1, tau2, h2 })
}

/// Checks that the mean curvature of `q` is constant and returns it.
pub fn constant_mean_curvature(q: &QuadrupleField) -> Result<f64> {
    let (h, std) = q.mean_curvature_stats();
    if !(std < CONSTANT_H_TOL) {
        return Err(Error::NonConstantMeanCurvature(std));
    }
    Ok(h)
}

/// Sister immersion data of `q` (in `m1`) inside `m2`. `h2_sign` picks the
/// root of `H2^2 = tau1^2 + H1^2 - tau2^2`.
pub fn sister(
    q: &QuadrupleField,
    m1: &ModelSpace,
    m2: &ModelSpace,
    h2_sign: f64,
) -> Result<(QuadrupleField, Phase)> {
    if (m1.aniso() - m2.aniso()).abs() > NORM_TOL {
        return Err(Error::AnisotropyMismatch { source_aniso: m1.aniso(), target_aniso: m2.aniso() });
    }
    let h1 = constant_mean_curvature(q)?;
    let (tau1, tau2) = (m1.tau(), m2.tau());
    let sign = if h2_sign < 0.0 { -1.0 } else { 1.0 };
    let target_h = |h: f64| -> Result<f64> {
        let disc = tau1 * tau1 + h * h - tau2 * tau2;
        if disc < -NORM_TOL {
            return Err(Error::NoRealMeanCurvature(disc));
        }
        Ok(sign * disc.max(0.0).sqrt())
    };
    let h2 = target_h(h1)?;
    let phase = phase_angle(tau1, h1, tau2, h2)?;
    let r = phase.rotation();
    let points = q
        .points
        .iter()
        .map(|p| {
            let hp = p.mean_curvature();
            let traceless = p.s - Matrix2::identity() * hp;
            let s = r * traceless + Matrix2::identity() * target_h(hp)?;
            Ok(QuadruplePoint { g: p.g, s: 0.5 * (s + s.transpose()), t: r * p.t, nu: p.nu })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = QuadrupleField::new(*m2, q.grid, points)?;
    out.asymmetry = q.asymmetry;
    Ok((out, phase))
}

/// Twin immersion data: the sister inside the same space with mean
/// curvature `-H`. `h` must match the mean curvature of `q`.
pub fn twin(q: &QuadrupleField, m: &ModelSpace, h: f64) -> Result<(QuadrupleField, Phase)> {
    if m.tau() == 0.0 || h == 0.0 {
        return Err(Error::TwinUndefined);
    }
    let found = constant_mean_curvature(q)?;
    if (found - h).abs() > CONSTANT_H_TOL {
        return Err(Error::MeanCurvatureMismatch { expected: h, found });
    }
    sister(q, m, m, -h.signum())
}

/// The twin shape operator in its second form,
/// `e^{theta J} (S - tau J) + tau J`.
pub fn twin_shape_alternative(s: &Matrix2<f64>, tau: f64, theta: f64) -> Matrix2<f64> {
    let j = quarter_turn();
    rotation(theta) * (s - j * tau) + j * tau
}

/// `(g, S, -T, -nu)`: the data of the same surface after composing with
/// an isometry reversing the fibers.
pub fn sign_flip(q: &QuadrupleField) -> QuadrupleField {
    let mut out = q.clone();
    for p in &mut out.points {
        p.t = -p.t;
        p.nu = -p.nu;
    }
    out
}
