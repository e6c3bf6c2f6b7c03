//! Randomized residual checks of the analytic identities the library relies on.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bethe::{mahler_integral, ModelParams};
use crate::complexfn::{b_fn, bloch_wigner, dilog};
use crate::limitshape::{angle_moment, shape_coordinates, shape_denominator};
use crate::numeric::GaussLegendre;
use crate::thermo::{feasible, solve_tilt, SlopePoint};
use crate::{ComplexValue, Result};

/// Residual bound applied to every identity.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Bound on the imaginary part of the coordinate-map denominator.
pub const REALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

fn check(name: &str, samples: usize, residuals: impl Iterator<Item = f64>, tolerance: f64) -> IdentityCheck {
    // NaN residuals count as failures
    let max_residual = residuals.fold(0.0, |m: f64, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) });
    IdentityCheck { name: name.into(), samples, max_residual, tolerance, passed: max_residual <= tolerance }
}

fn away_from_poles(rng: &mut ChaCha8Rng, half_plane: bool) -> ComplexValue {
    loop {
        let im = if half_plane { rng.random_range(0.01..3.0) } else { rng.random_range(-3.0..3.0) };
        let z = c(rng.random_range(-3.0..3.0), im);
        if z.norm() > 0.05 && (z - 1.0).norm() > 0.05 && z.im.abs() > 1e-3 {
            return z;
        }
    }
}

/// Largest deviation among the five transforms of the Bloch-Wigner function.
pub fn bloch_wigner_symmetry_residual(z: ComplexValue) -> f64 {
    let one = c(1.0, 0.0);
    let d = bloch_wigner(z);
    [
        bloch_wigner(one - one / z) - d,
        bloch_wigner(one / (one - z)) - d,
        bloch_wigner(one / z) + d,
        bloch_wigner(one - z) + d,
        bloch_wigner(-z / (one - z)) + d,
    ]
    .iter()
    .fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// `|B(z) - log|z| - B(1 - 1/z)|` for `Im z > 0`.
pub fn b_inversion_residual(z: ComplexValue) -> Result<f64> {
    let one = c(1.0, 0.0);
    Ok((b_fn(z)? - z.norm().ln() - b_fn(one - one / z)?).abs())
}

/// Quadrature of `log|1 - r e^{it}|` over `[theta, 2 pi - theta]` against `2 Im Li2(r e^{i theta})`.
pub fn arc_integral_residual(r: f64, theta: f64) -> Result<f64> {
    let gl = GaussLegendre::new(30);
    let quad = gl.integrate_panels(
        |t| (c(1.0, 0.0) - ComplexValue::from_polar(r, t)).norm().ln(),
        theta,
        2.0 * PI - theta,
        16,
    );
    Ok((quad - 2.0 * dilog(ComplexValue::from_polar(r, theta))?.im).abs())
}

/// Circle average of `log|q|` by the trapezoid rule against the root formula.
pub fn circle_average_residual(roots: &[ComplexValue], radius: f64) -> Result<f64> {
    let m = 4096;
    let avg = (0..m)
        .map(|k| {
            let w = ComplexValue::from_polar(radius, 2.0 * PI * k as f64 / m as f64);
            roots.iter().map(|z| (w - z).norm().ln()).sum::<f64>()
        })
        .sum::<f64>()
        / m as f64;
    Ok((avg - mahler_integral(roots, radius)?).abs())
}

/// `|Im|` of the coordinate-map denominator.
pub fn denominator_imaginary_part(u: ComplexValue, r: f64) -> f64 {
    shape_denominator(u, r).im.abs()
}

/// Relative mismatch between a five-point Wirtinger derivative of the denominator and its closed form.
///
/// For `r < 1` the holomorphic derivative equals `-A(z) conj(u)`; for `r > 1` the antiholomorphic
/// derivative equals `-(A(z) + 1 - 2z) u`.
pub fn denominator_derivative_residual(u: ComplexValue, r: f64) -> f64 {
    let h = 1e-3;
    let d = |dir: ComplexValue| {
        let f = |k: f64| shape_denominator(u + dir * (k * h), r);
        (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h)
    };
    let dx = d(c(1.0, 0.0));
    let dy = d(c(0.0, 1.0));
    let (_, z) = shape_coordinates(u, r);
    let (got, expect) = if r < 1.0 {
        (0.5 * (dx - c(0.0, 1.0) * dy), -angle_moment(z) * u.conj())
    } else {
        (0.5 * (dx + c(0.0, 1.0) * dy), -(angle_moment(z) + 1.0 - 2.0 * z) * u)
    };
    (got - expect).norm() / expect.norm().max(1.0)
}

/// `|1 - w - z + (1 - r^2) w z|` at the tilt point of an interior slope.
pub fn tilt_relation_residual(s: f64, t: f64, r: f64) -> Result<f64> {
    let params = ModelParams::new(r, 0.0, 0.0)?;
    Ok(solve_tilt(SlopePoint::new(s, t)?, params)?.relation_residual(r))
}

fn sample_r(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.5) {
        rng.random_range(0.1..0.95)
    } else {
        rng.random_range(1.05..3.0)
    }
}

/// Runs every identity on `samples` random points drawn from a seeded stream.
pub fn identity_suite(seed: u64, samples: usize) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let pts: Vec<ComplexValue> = (0..samples).map(|_| away_from_poles(&mut rng, false)).collect();
    checks.push(check(
        "bloch-wigner-six-fold",
        samples,
        pts.iter().map(|&z| bloch_wigner_symmetry_residual(z)),
        IDENTITY_TOL,
    ));

    let pts: Vec<ComplexValue> = (0..samples).map(|_| away_from_poles(&mut rng, true)).collect();
    let res = pts.iter().map(|&z| b_inversion_residual(z)).collect::<Result<Vec<_>>>()?;
    checks.push(check("b-inversion", samples, res.into_iter(), IDENTITY_TOL));

    let mut res = Vec::with_capacity(samples);
    for _ in 0..samples {
        let r = rng.random_range(0.05..0.95);
        let theta = rng.random_range(0.05..PI);
        res.push(arc_integral_residual(r, theta)?);
    }
    checks.push(check("arc-integral", samples, res.into_iter(), IDENTITY_TOL));

    let mut res = Vec::with_capacity(samples);
    while res.len() < samples {
        let degree = rng.random_range(2..=8);
        let roots: Vec<ComplexValue> = (0..degree)
            .map(|_| ComplexValue::from_polar(rng.random_range(0.0..3.0), rng.random_range(0.0..2.0 * PI)))
            .collect();
        let radius = rng.random_range(0.5..2.5);
        if roots.iter().all(|z| (z.norm() - radius).abs() > 0.15) {
            res.push(circle_average_residual(&roots, radius)?);
        }
    }
    checks.push(check("circle-average", samples, res.into_iter(), IDENTITY_TOL));

    let mut reality = Vec::with_capacity(samples);
    let mut deriv = Vec::with_capacity(samples);
    for _ in 0..samples {
        let r = sample_r(&mut rng);
        let u = c(rng.random_range(-2.0..3.0), rng.random_range(0.05..2.0));
        reality.push(denominator_imaginary_part(u, r));
        deriv.push(denominator_derivative_residual(u, r));
    }
    checks.push(check("denominator-real", samples, reality.into_iter(), REALITY_TOL));
    checks.push(check("denominator-derivative", samples, deriv.into_iter(), IDENTITY_TOL));

    let mut res = Vec::with_capacity(samples);
    while res.len() < samples {
        let r = sample_r(&mut rng);
        let s = rng.random_range(0.02..0.98);
        let t = rng.random_range(0.02..0.98);
        let params = ModelParams::new(r, 0.0, 0.0)?;
        if s + t < 0.98 && SlopePoint::new(s, t).is_ok_and(|st| feasible(st, params)) {
            res.push(tilt_relation_residual(s, t, r)?);
        }
    }
    checks.push(check("tilt-relation", samples, res.into_iter(), IDENTITY_TOL));

    let passed = checks.iter().all(|ch| ch.passed);
    Ok(IdentityReport { seed, checks, passed })
}
