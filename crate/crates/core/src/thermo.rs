//! Thermodynamic limit: microcanonical and grand-canonical free energy, surface tension.
//!
//! Slopes `(s, t)` are the densities of vertical and horizontal path edges. Both regimes are
//! parametrized by an angle `theta` along which the leading Bethe roots condense; every
//! quantity below is a closed form in the point `u0` reached at that angle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bethe::{ModelParams, Regime};
use crate::complexfn::b_odd;
use crate::numeric::{brent, golden_max};
use crate::{ComplexValue, Error, Result};

const THETA_EDGE: f64 = 1e-13;

/// A slope in the triangle `s, t >= 0, s + t <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopePoint {
    pub s: f64,
    pub t: f64,
}

impl SlopePoint {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !(s >= 0.0 && t >= 0.0 && s + t <= 1.0 + 1e-15) {
            return Err(Error::Domain(format!("slope ({s}, {t}) outside the triangle")));
        }
        Ok(SlopePoint { s, t })
    }
}

/// Geometry attached to an interior slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltSolve {
    pub s: f64,
    pub t: f64,
    pub u0: ComplexValue,
    pub w0: ComplexValue,
    pub z0: ComplexValue,
    pub theta: f64,
    /// `arg u0`.
    pub phi: f64,
    /// `|u0|`.
    pub rho: f64,
}

/// Grand-canonical free energy and the maximizing vertical density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergy {
    pub value: f64,
    pub s_star: f64,
}

fn theta_range(s: f64, regime: Regime) -> (f64, f64) {
    match regime {
        Regime::Small => (THETA_EDGE, PI - THETA_EDGE),
        Regime::Large => (PI + THETA_EDGE, PI / s.max(1.0 - s) - THETA_EDGE),
    }
}

fn w0_of_theta(theta: f64, s: f64, regime: Regime) -> ComplexValue {
    match regime {
        Regime::Small => ComplexValue::from_polar(((1.0 - s) * theta).sin() / theta.sin(), s * theta),
        Regime::Large => {
            ComplexValue::from_polar(((1.0 - s) * theta).sin() / (-theta.sin()), PI - s * theta)
        }
    }
}

fn u0_of_w0(w0: ComplexValue, r: f64, regime: Regime) -> ComplexValue {
    let one = ComplexValue::new(1.0, 0.0);
    match regime {
        Regime::Small => one - w0.conj() * (1.0 - r * r),
        Regime::Large => one + w0 * (r * r - 1.0),
    }
}

/// Field `Y` dual to the point `w` of the foliation (also gives `X` when fed `conj z0`).
fn field_of_point(w: ComplexValue, r: f64, regime: Regime) -> f64 {
    let one = ComplexValue::new(1.0, 0.0);
    match regime {
        Regime::Small => -(1.0 - r * r).ln() - b_odd(w),
        Regime::Large => -(r * r - 1.0).ln() + b_odd(w) - (w * (one - w)).norm().ln(),
    }
}

fn y_of_theta(theta: f64, s: f64, r: f64, regime: Regime) -> f64 {
    field_of_point(w0_of_theta(theta, s, regime), r, regime)
}

fn t_of_theta(theta: f64, s: f64, r: f64, regime: Regime) -> f64 {
    let u0 = u0_of_w0(w0_of_theta(theta, s, regime), r, regime);
    1.0 - s - u0.arg() / theta
}

/// `(1-s) B(u0) + s B(1 - r^2/u0)`.
fn b_pair(u0: ComplexValue, s: f64, r: f64) -> f64 {
    let one = ComplexValue::new(1.0, 0.0);
    (1.0 - s) * b_odd(u0) + s * b_odd(one - r * r / u0)
}

/// Field value above which `r > 1, s = 1/2` is in its two-component phase.
pub fn two_component_threshold(r: f64) -> f64 {
    4f64.ln() - (r * r - 1.0).ln()
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("density s = {s} outside [0, 1]")));
    }
    Ok(())
}

fn theta_for_field(s: f64, y: f64, r: f64, regime: Regime) -> Result<f64> {
    let (a, b) = theta_range(s, regime);
    brent(|th| y_of_theta(th, s, r, regime) - y, a, b, 1e-15)
}

/// The point `w0` on the foliation curve of density `s` with field `Y`.
pub fn solve_w0(s: f64, y: f64, params: ModelParams) -> Result<ComplexValue> {
    let regime = params.regime()?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("solve_w0 needs 0 < s < 1, got {s}")));
    }
    if y >= params.y_ceiling() {
        return Err(Error::Range(format!("Y = {y} at or above {}", params.y_ceiling())));
    }
    let theta = theta_for_field(s, y, params.r, regime)?;
    Ok(w0_of_theta(theta, s, regime))
}

/// Microcanonical free energy `F_m(s, Y)`.
pub fn microcanonical_f(s: f64, y: f64, params: ModelParams) -> Result<f64> {
    check_s(s)?;
    let regime = params.regime()?;
    let r = params.r;
    if s == 0.0 {
        return Ok(y.max(0.0));
    }
    if s == 1.0 {
        return Ok(0.0);
    }
    if regime == Regime::Small && y >= params.y_ceiling() - 1e-12 {
        return Ok((1.0 - s) * y);
    }
    if regime == Regime::Large && s == 0.5 && y >= two_component_threshold(r) {
        return Ok(0.5 * y + r.ln());
    }
    let (a, b) = theta_range(s, regime);
    let (ya, yb) = (y_of_theta(a, s, r, regime), y_of_theta(b, s, r, regime));
    let (ylo, yhi) = (ya.min(yb), ya.max(yb));
    if y <= ylo {
        // horizontal edges are exponentially rare
        return Ok(0.0);
    }
    if y >= yhi {
        return Ok(match regime {
            Regime::Small => (1.0 - s) * y,
            Regime::Large => (1.0 - s) * y + 2.0 * s.min(1.0 - s) * r.ln(),
        });
    }
    let theta = brent(|th| y_of_theta(th, s, r, regime) - y, a, b, 1e-15)?;
    let u0 = u0_of_w0(w0_of_theta(theta, s, regime), r, regime);
    Ok((1.0 - s) * y + b_pair(u0, s, r))
}

/// `F(X, Y) = max_s (X s + F_m(s, Y))`.
pub fn free_energy(params: ModelParams) -> Result<FreeEnergy> {
    params.regime()?;
    let mut failure = None;
    let mut obj = |s: f64| match microcanonical_f(s, params.y, params) {
        Ok(f) => params.x * s + f,
        Err(e) => {
            failure = Some(e);
            f64::NEG_INFINITY
        }
    };
    let (mut s_star, mut value) = golden_max(&mut obj, 0.0, 1.0, 1e-10);
    for s in [0.0, 1.0] {
        let v = obj(s);
        if v > value {
            s_star = s;
            value = v;
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(FreeEnergy { value, s_star })
}

/// Whether `(s, t)` lies strictly inside the region where the surface tension is curved.
pub fn feasible(st: SlopePoint, params: ModelParams) -> bool {
    let (s, t) = (st.s, st.t);
    if !(s > 0.0 && t > 0.0 && s + t < 1.0) {
        return false;
    }
    let r2 = params.r * params.r;
    if params.r < 1.0 {
        (1.0 - r2) / r2 * s * t + s + t - 1.0 < 0.0
    } else {
        true
    }
}

/// Solve for `u0` given an interior slope.
pub fn solve_tilt(st: SlopePoint, params: ModelParams) -> Result<TiltSolve> {
    let regime = params.regime()?;
    if !feasible(st, params) {
        return Err(Error::Infeasible(format!("({}, {}) at r = {}", st.s, st.t, params.r)));
    }
    let (s, t, r) = (st.s, st.t, params.r);
    let (a, b) = theta_range(s, regime);
    let theta = brent(|th| t_of_theta(th, s, r, regime) - t, a, b, 1e-15)?;
    let w0 = w0_of_theta(theta, s, regime);
    let u0 = u0_of_w0(w0, r, regime);
    let r2 = r * r;
    let one = ComplexValue::new(1.0, 0.0);
    let z0 = match regime {
        Regime::Small => (one - r2 / u0.conj()) / (1.0 - r2),
        Regime::Large => (r2 / u0 - one) / (r2 - 1.0),
    };
    Ok(TiltSolve { s, t, u0, w0, z0, theta, phi: u0.arg(), rho: u0.norm() })
}

impl TiltSolve {
    /// Foliation angle recomputed from the triangle `0, 1, w0`.
    pub fn theta_from_w0(&self, regime: Regime) -> f64 {
        let one = ComplexValue::new(1.0, 0.0);
        match regime {
            Regime::Small => self.w0.arg() - (one - self.w0).arg(),
            Regime::Large => 2.0 * PI - self.w0.arg() + (one - self.w0).arg(),
        }
    }

    /// `1 - w - z + (1-r^2) w z`.
    pub fn relation_residual(&self, r: f64) -> f64 {
        let one = ComplexValue::new(1.0, 0.0);
        (one - self.w0 - self.z0 + self.w0 * self.z0 * (1.0 - r * r)).norm()
    }

    /// Dual fields `(X, Y)`.
    pub fn fields(&self, r: f64, regime: Regime) -> (f64, f64) {
        (field_of_point(self.z0.conj(), r, regime), field_of_point(self.w0, r, regime))
    }
}

/// Surface tension `sigma(s, t)`.
///
/// For `r < 1` the slope triangle outside the curved region carries the affine function
/// `(1-s-t) log(1-r^2)`. For `r > 1` the edge `s + t = 1` takes the limit
/// `-2 min(s, t) log r`.
pub fn surface_tension(st: SlopePoint, params: ModelParams) -> Result<f64> {
    let regime = params.regime()?;
    let (s, t, r) = (st.s, st.t, params.r);
    if s == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    match regime {
        Regime::Small if !feasible(st, params) => return Ok((1.0 - s - t) * (1.0 - r * r).ln()),
        Regime::Large if s + t >= 1.0 => return Ok(-2.0 * s.min(t) * r.ln()),
        _ => {}
    }
    let ts = solve_tilt(st, params)?;
    let y = field_of_point(ts.w0, r, regime);
    Ok(-(1.0 - s - t) * y - b_pair(ts.u0, s, r))
}

/// `(d sigma / ds, d sigma / dt)`, the fields dual to the slope.
pub fn tension_gradient(st: SlopePoint, params: ModelParams) -> Result<(f64, f64)> {
    let regime = params.regime()?;
    if regime == Regime::Small && !feasible(st, params) {
        let c = -(1.0 - params.r * params.r).ln();
        return Ok((c, c));
    }
    Ok(solve_tilt(st, params)?.fields(params.r, regime))
}
