//! Dilogarithm family on the complex plane.
//!
//! All arguments use the principal `arg` in `(-pi, pi]`.

use std::f64::consts::PI;

use crate::{ComplexValue, Error, Result};

const PI2_6: f64 = PI * PI / 6.0;

/// `B_{2k} / (2k+1)!` for `k = 1..`.
const BERNOULLI_SERIES: [f64; 15] = [
    2.777_777_777_777_777_6e-2,
    -2.777_777_777_777_777_8e-4,
    4.724_111_866_969_009_8e-6,
    -9.185_773_074_661_964e-8,
    1.897_886_998_897_100e-9,
    -4.064_761_645_144_225_6e-11,
    8.921_691_020_456_452e-13,
    -1.993_929_586_072_107_4e-14,
    4.518_980_029_619_918e-16,
    -1.035_651_761_218_124_7e-17,
    2.395_218_621_026_187e-19,
    -5.581_785_874_325_009e-21,
    1.309_150_755_418_321_2e-22,
    -3.087_419_802_426_740_3e-24,
    7.315_975_652_702_203e-26,
];

/// Angles of the triangle with vertices `0`, `1`, `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleAngles {
    /// At the vertex `0`.
    pub alpha: f64,
    /// At the vertex `1`.
    pub beta: f64,
    /// At the vertex `z`.
    pub gamma: f64,
}

impl TriangleAngles {
    /// Requires `Im z >= 0`.
    pub fn of(z: ComplexValue) -> Result<Self> {
        check_finite(z)?;
        if z.im < 0.0 {
            return Err(Error::Domain(format!("triangle angles need Im z >= 0, got {z}")));
        }
        let alpha = z.arg();
        let beta = -(ComplexValue::new(1.0, 0.0) - z).arg();
        let (alpha, beta) = if z.im == 0.0 {
            if z.re > 1.0 {
                (0.0, PI)
            } else if z.re < 0.0 {
                (PI, 0.0)
            } else {
                (0.0, 0.0)
            }
        } else {
            (alpha, beta)
        };
        Ok(TriangleAngles { alpha, beta, gamma: PI - alpha - beta })
    }
}

fn check_finite(z: ComplexValue) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite argument {z}")))
    }
}

fn bernoulli_sum(u: ComplexValue) -> ComplexValue {
    let u2 = u * u;
    let mut term = u;
    let mut acc = u - u2 * 0.25;
    for c in BERNOULLI_SERIES {
        term *= u2;
        let add = term * c;
        acc += add;
        if add.norm() < 1e-18 * acc.norm() {
            break;
        }
    }
    acc
}

fn power_series(z: ComplexValue) -> ComplexValue {
    let mut acc = ComplexValue::new(0.0, 0.0);
    let mut zk = z;
    for k in 1..200 {
        let add = zk / (k * k) as f64;
        acc += add;
        if add.norm() < 1e-17 * acc.norm() {
            break;
        }
        zk *= z;
    }
    acc
}

/// Dilogarithm `Li2(z)` on the principal branch.
///
/// Points on `[1, inf)` are rejected except `z = 1` itself. Points with `Im z == 0.0`
/// and `Re z > 1` but reached as `x + 0i` are treated as on the cut.
pub fn dilog(z: ComplexValue) -> Result<ComplexValue> {
    check_finite(z)?;
    if z.im == 0.0 && z.re >= 1.0 {
        if z.re == 1.0 {
            return Ok(ComplexValue::new(PI2_6, 0.0));
        }
        return Err(Error::Domain(format!("dilog branch cut at {z}")));
    }
    Ok(dilog_unchecked(z))
}

/// Upper-half-plane limit of the dilogarithm; on `(1, inf)` this is the value from above.
pub fn dilog_upper(z: ComplexValue) -> Result<ComplexValue> {
    check_finite(z)?;
    if z.im == 0.0 && z.re > 1.0 {
        let x = z.re;
        let re = PI2_6 - x.ln() * (x - 1.0).ln() - dilog_unchecked(ComplexValue::new(1.0 - x, 0.0)).re;
        return Ok(ComplexValue::new(re, PI * x.ln()));
    }
    dilog(z)
}

fn dilog_unchecked(z: ComplexValue) -> ComplexValue {
    let one = ComplexValue::new(1.0, 0.0);
    if z.norm_sqr() == 0.0 {
        return ComplexValue::new(0.0, 0.0);
    }
    if z.norm() <= 0.5 {
        return power_series(z);
    }
    let n2 = z.norm_sqr();
    if z.re <= 0.5 {
        if n2 > 1.0 {
            let u = -(one - one / z).ln();
            let l = (-z).ln();
            -bernoulli_sum(u) - l * l * 0.5 - PI2_6
        } else {
            bernoulli_sum(-(one - z).ln())
        }
    } else if n2 <= 2.0 * z.re {
        let u = -z.ln();
        -bernoulli_sum(u) + u * (one - z).ln() + PI2_6
    } else {
        let u = -(one - one / z).ln();
        let l = (-z).ln();
        -bernoulli_sum(u) - l * l * 0.5 - PI2_6
    }
}

/// Bloch-Wigner function `D(z) = arg(1-z) log|z| + Im Li2(z)`, zero on the real line.
pub fn bloch_wigner(z: ComplexValue) -> f64 {
    if !(z.re.is_finite() && z.im.is_finite()) || z.im == 0.0 {
        return 0.0;
    }
    let one = ComplexValue::new(1.0, 0.0);
    (one - z).arg() * z.norm().ln() + dilog_unchecked(z).im
}

/// Lobachevsky function `L(theta) = -int_0^theta log|2 sin t| dt`.
pub fn lobachevsky(theta: f64) -> f64 {
    let z = ComplexValue::from_polar(1.0, 2.0 * theta);
    if (z.re - 1.0).abs() < 1e-300 || z.im == 0.0 {
        return 0.0;
    }
    0.5 * dilog_unchecked(z).im
}

/// `B(z) = (arg z log|1-z| + Im Li2(z)) / pi` on the closed upper half plane.
pub fn b_fn(z: ComplexValue) -> Result<f64> {
    check_finite(z)?;
    if z.im < 0.0 {
        return Err(Error::Domain(format!("B requires Im z >= 0, got {z}")));
    }
    Ok(b_upper(z))
}

/// `B` extended to the lower half plane by `B(conj z) = -B(z)`.
pub(crate) fn b_odd(z: ComplexValue) -> f64 {
    if z.im < 0.0 {
        -b_upper(z.conj())
    } else {
        b_upper(z)
    }
}

fn b_upper(z: ComplexValue) -> f64 {
    if z.im == 0.0 {
        let x = z.re;
        return if (0.0..=1.0).contains(&x) {
            0.0
        } else if x > 1.0 {
            x.ln()
        } else {
            (1.0 - x).ln()
        };
    }
    let one = ComplexValue::new(1.0, 0.0);
    (z.arg() * (one - z).norm().ln() + dilog_unchecked(z).im) / PI
}

/// `B` through the triangle decomposition `(D(z) + alpha log|1-z| + beta log|z|) / pi`.
pub fn b_fn_triangle(z: ComplexValue) -> Result<f64> {
    let ang = TriangleAngles::of(z)?;
    let one = ComplexValue::new(1.0, 0.0);
    if z.im == 0.0 {
        return b_fn(z);
    }
    Ok((bloch_wigner(z) + ang.alpha * (one - z).norm().ln() + ang.beta * z.norm().ln()) / PI)
}

/// `B_x - i B_y = -(arg z / (1-z) + arg(1-z) / z) / pi`.
pub fn b_deriv(z: ComplexValue) -> Result<ComplexValue> {
    check_finite(z)?;
    if z.im <= 0.0 {
        return Err(Error::Domain(format!("B derivative needs Im z > 0, got {z}")));
    }
    let one = ComplexValue::new(1.0, 0.0);
    if z.norm() < 1e-300 || (one - z).norm() < 1e-300 {
        return Err(Error::Singular(format!("B derivative at {z}")));
    }
    Ok(-(z.arg() / (one - z) + (one - z).arg() / z) / PI)
}

/// `Im z / (pi |z|^2 |1-z|^2)`, equal to half the Laplacian of `B`.
pub fn b_half_laplacian(z: ComplexValue) -> Result<f64> {
    check_finite(z)?;
    if z.im <= 0.0 {
        return Err(Error::Domain(format!("B Laplacian needs Im z > 0, got {z}")));
    }
    let one = ComplexValue::new(1.0, 0.0);
    Ok(z.im / (PI * z.norm_sqr() * (one - z).norm_sqr()))
}
