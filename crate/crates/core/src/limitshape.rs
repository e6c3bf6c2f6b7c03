//! Limit shapes parametrized by a point `u` of the upper half plane, and the
//! piecewise-analytic arctic boundaries obtained as `u` approaches the real axis.
//!
//! A shape is driven by an analytic boundary function `g`. Its potential
//! `F(u) = ∫ r^2 g(u) / ((1-u)(u-r^2)) du` enters the coordinate formula; the
//! potential is normalized to vanish at the midpoint of `r^2` and `1`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bethe::{ModelParams, Regime};
use crate::numeric::GaussLegendre;
use crate::{ComplexValue, Error, Result};

/// Minimal distance from the poles `{0, r^2, 1}` accepted on the real axis.
pub const POLE_MARGIN: f64 = 1e-6;
/// Default lower bound on `Im u` for interior sampling grids.
pub const MIN_INTERIOR_IM: f64 = 1e-4;
/// Tolerance for path independence of the potential.
pub const PATH_TOL: f64 = 1e-9;

const GL_ORDER: usize = 20;

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

/// Sign of the square root used by the boxed-plane-partition boundary function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }
}

/// Evaluator returning `(g(u), g'(u))`.
pub type BoundaryEval = Arc<dyn Fn(ComplexValue) -> (ComplexValue, ComplexValue) + Send + Sync>;

/// Analytic boundary data `g` of a limit shape.
#[derive(Clone)]
pub enum BoundaryFunction {
    Zero,
    /// Real coefficients in ascending order.
    Polynomial(Vec<f64>),
    /// Boxed plane partition data at corner weight `r`.
    Bpp { r: f64, sheet: Sheet },
    Custom { eval: BoundaryEval, real_analytic: bool },
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryFunction::Zero => write!(f, "Zero"),
            BoundaryFunction::Polynomial(cs) => f.debug_tuple("Polynomial").field(cs).finish(),
            BoundaryFunction::Bpp { r, sheet } => {
                f.debug_struct("Bpp").field("r", r).field("sheet", sheet).finish()
            }
            BoundaryFunction::Custom { real_analytic, .. } => f
                .debug_struct("Custom")
                .field("real_analytic", real_analytic)
                .finish_non_exhaustive(),
        }
    }
}

fn horner(cs: &[f64], u: ComplexValue) -> ComplexValue {
    cs.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * u + k)
}

fn poly_deriv(cs: &[f64]) -> Vec<f64> {
    cs.iter().enumerate().skip(1).map(|(k, &v)| k as f64 * v).collect()
}

fn bpp_b(r: f64) -> f64 {
    (-3.0 + 2.0 * r - 3.0 * r * r) / 4.0
}

impl BoundaryFunction {
    /// The quadratic data `(1-u)(u-r^2)/r^2`, whose potential is `u`.
    pub fn quadratic(r: f64) -> Self {
        let r2 = r * r;
        BoundaryFunction::Polynomial(vec![-1.0, (1.0 + r2) / r2, -1.0 / r2])
    }

    pub fn custom<F>(eval: F, real_analytic: bool) -> Self
    where
        F: Fn(ComplexValue) -> (ComplexValue, ComplexValue) + Send + Sync + 'static,
    {
        BoundaryFunction::Custom { eval: Arc::new(eval), real_analytic }
    }

    pub fn real_analytic(&self) -> bool {
        match self {
            BoundaryFunction::Custom { real_analytic, .. } => *real_analytic,
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BoundaryFunction::Zero => true,
            BoundaryFunction::Polynomial(cs) => cs.iter().all(|&v| v == 0.0),
            _ => false,
        }
    }

    /// `(g, g')` at `u`.
    pub fn eval(&self, u: ComplexValue) -> (ComplexValue, ComplexValue) {
        match self {
            BoundaryFunction::Zero => (c(0.0, 0.0), c(0.0, 0.0)),
            BoundaryFunction::Polynomial(cs) => (horner(cs, u), horner(&poly_deriv(cs), u)),
            BoundaryFunction::Bpp { r, sheet } => {
                let (q, dq, _) = bpp_radicand(*r, u);
                let sq = q.sqrt();
                let s = sheet.sign();
                let lead = 1.0 - *r / u;
                let g = lead * sq * s;
                let dg = (*r / (u * u) * sq + lead * dq / (2.0 * sq)) * s;
                (g, dg)
            }
            BoundaryFunction::Custom { eval, .. } => eval(u),
        }
    }

    pub fn value(&self, u: ComplexValue) -> ComplexValue {
        self.eval(u).0
    }

    pub fn deriv(&self, u: ComplexValue) -> ComplexValue {
        self.eval(u).1
    }

    pub fn second_deriv(&self, u: ComplexValue) -> ComplexValue {
        match self {
            BoundaryFunction::Zero => c(0.0, 0.0),
            BoundaryFunction::Polynomial(cs) => horner(&poly_deriv(&poly_deriv(cs)), u),
            BoundaryFunction::Bpp { r, sheet } => {
                let (q, dq, ddq) = bpp_radicand(*r, u);
                let sq = q.sqrt();
                let lead = 1.0 - *r / u;
                let v = -2.0 * *r * sq / (u * u * u)
                    + (*r / (u * u)) * dq / sq
                    + lead * (ddq / (2.0 * sq) - dq * dq / (4.0 * q * sq));
                v * sheet.sign()
            }
            BoundaryFunction::Custom { eval, .. } => {
                let h = 1e-3 * (1.0 + u.norm());
                let d = |k: f64| eval(u + h * k).1;
                (d(-2.0) - d(2.0) + 8.0 * (d(1.0) - d(-1.0))) / (12.0 * h)
            }
        }
    }

    /// `g(p)` at a real point, which must be real for real-analytic data.
    pub fn real_value(&self, p: f64) -> Result<f64> {
        let v = self.value(c(p, 0.0));
        if !v.re.is_finite() || v.im.abs() > 1e-9 * (1.0 + v.re.abs()) {
            return Err(Error::Domain(format!("g({p}) = {v} is not real")));
        }
        Ok(v.re)
    }

    /// Checks that `g` is real on the given real sample points.
    pub fn check_real_analytic(&self, samples: &[f64]) -> Result<()> {
        if !self.real_analytic() {
            return Err(Error::Domain("boundary function is not declared real analytic".into()));
        }
        for &p in samples {
            self.real_value(p)?;
        }
        Ok(())
    }

    /// Simple poles of `g` on the real axis, with residues of `g`.
    fn poles(&self) -> Vec<(f64, ComplexValue)> {
        match self {
            BoundaryFunction::Bpp { r, sheet } => vec![(0.0, c(-r * r * sheet.sign(), 0.0))],
            _ => Vec::new(),
        }
    }

    /// Height at which quadrature paths run parallel to the real axis.
    fn path_height(&self, r: f64) -> f64 {
        let base = 0.2f64.min(0.25 * (1.0 - r * r).abs()).max(1e-3);
        match self {
            BoundaryFunction::Bpp { r, .. } => match bpp_branch_point(*r) {
                Some(beta) if beta.im > 0.0 => base.min(0.5 * beta.im),
                _ => base,
            },
            _ => base,
        }
    }
}

fn bpp_radicand(r: f64, u: ComplexValue) -> (ComplexValue, ComplexValue, ComplexValue) {
    let b = bpp_b(r);
    (u * u + b * u + r * r, 2.0 * u + b, c(2.0, 0.0))
}

/// Branch point of the radicand in the closed upper half plane (the larger one if both are real).
pub fn bpp_branch_point(r: f64) -> Option<ComplexValue> {
    let b = bpp_b(r);
    let disc = b * b - 4.0 * r * r;
    if disc < 0.0 {
        Some(c(-0.5 * b, 0.5 * (-disc).sqrt()))
    } else {
        Some(c(0.5 * (-b + disc.sqrt()), 0.0))
    }
}

/// Real branch points of the radicand, if any.
pub fn bpp_real_branch_points(r: f64) -> Option<(f64, f64)> {
    let b = bpp_b(r);
    let disc = b * b - 4.0 * r * r;
    (disc >= 0.0).then(|| (0.5 * (-b - disc.sqrt()), 0.5 * (-b + disc.sqrt())))
}

/// Boxed plane partition boundary function on the `+` sheet.
pub fn bpp_g(params: ModelParams) -> Result<BoundaryFunction> {
    bpp_g_sheet(params, Sheet::Plus)
}

pub fn bpp_g_sheet(params: ModelParams, sheet: Sheet) -> Result<BoundaryFunction> {
    if params.r <= 1.0 / 3.0 {
        return Err(Error::Degenerate(format!(
            "boxed plane partition data needs r > 1/3, got {}",
            params.r
        )));
    }
    Ok(BoundaryFunction::Bpp { r: params.r, sheet })
}

/// `-v arg v - (1-v) arg(1-v)`.
pub fn angle_moment(v: ComplexValue) -> ComplexValue {
    -v * v.arg() - (1.0 - v) * (1.0 - v).arg()
}

/// The pair `(w, z)` attached to `u`.
pub fn shape_coordinates(u: ComplexValue, r: f64) -> (ComplexValue, ComplexValue) {
    let r2 = r * r;
    if r < 1.0 {
        let ub = u.conj();
        ((1.0 - ub) / (1.0 - r2), (1.0 - r2 / ub) / (1.0 - r2))
    } else {
        ((u - 1.0) / (r2 - 1.0), (r2 / u - 1.0) / (r2 - 1.0))
    }
}

/// The real denominator of the coordinate map, returned with its imaginary round-off.
pub fn shape_denominator(u: ComplexValue, r: f64) -> ComplexValue {
    let (w, z) = shape_coordinates(u, r);
    let rho2 = u.norm_sqr();
    let r2 = r * r;
    if r < 1.0 {
        r2 * angle_moment(w) - rho2 * angle_moment(z)
    } else {
        r2 * (angle_moment(w) + 2.0 * w - 1.0) - rho2 * (angle_moment(z) + 1.0 - 2.0 * z)
    }
}

/// `log(1-u)` continued from the upper half plane onto the real axis.
fn log_one_minus(u: ComplexValue) -> ComplexValue {
    (u - 1.0).ln() - c(0.0, PI)
}

/// Quadrature data for the potential of a non-polynomial boundary function.
struct PotentialIntegrand<'a> {
    g: &'a BoundaryFunction,
    r2: f64,
    at_one: ComplexValue,
    at_r2: ComplexValue,
    poles: Vec<(f64, ComplexValue)>,
}

impl<'a> PotentialIntegrand<'a> {
    fn new(g: &'a BoundaryFunction, r: f64) -> Self {
        let r2 = r * r;
        let at_one = r2 * g.value(c(1.0, 0.0)) / (1.0 - r2);
        let at_r2 = r2 * g.value(c(r2, 0.0)) / (1.0 - r2);
        // residue of the potential's derivative at a pole of g
        let poles = g
            .poles()
            .into_iter()
            .map(|(p, res)| (p, r2 * res / ((1.0 - p) * (p - r2))))
            .collect();
        PotentialIntegrand { g, r2, at_one, at_r2, poles }
    }

    fn derivative(&self, u: ComplexValue) -> ComplexValue {
        self.r2 * self.g.value(u) / ((1.0 - u) * (u - self.r2))
    }

    fn smooth(&self, u: ComplexValue) -> ComplexValue {
        let mut v = self.derivative(u) - self.at_one / (1.0 - u) - self.at_r2 / (u - self.r2);
        for &(p, a) in &self.poles {
            v -= a / (u - p);
        }
        v
    }

    fn singular(&self, u: ComplexValue) -> ComplexValue {
        let mut v = -self.at_one * log_one_minus(u) + self.at_r2 * (u - self.r2).ln();
        for &(p, a) in &self.poles {
            v += a * (u - p).ln();
        }
        v
    }

    /// Antiderivative relative to the reference point `p0`, along a path at height `h`.
    fn from_reference(&self, gl: &GaussLegendre, p0: f64, h: f64, u: ComplexValue) -> ComplexValue {
        let pts = [c(p0, 0.0), c(p0, h), c(u.re, h), u];
        let mut acc = self.singular(u) - self.singular(pts[0]);
        for win in pts.windows(2) {
            let len = (win[1] - win[0]).norm();
            if len == 0.0 {
                continue;
            }
            let panels = ((len / h).ceil() as usize).clamp(1, 400);
            acc += gl.integrate_segment(|z| self.smooth(z), win[0], win[1], panels);
        }
        acc
    }
}

/// Midpoint of `r^2` and `1`, where the potential is normalized to zero.
pub fn reference_point(r: f64) -> f64 {
    0.5 * (1.0 + r * r)
}

fn check_pole_distance(u: ComplexValue, r: f64, g: &BoundaryFunction) -> Result<()> {
    let mut poles = vec![1.0, r * r];
    poles.extend(g.poles().into_iter().map(|(p, _)| p));
    for p in poles {
        if (u - p).norm() < POLE_MARGIN {
            return Err(Error::Singular(format!("u = {u} is within {POLE_MARGIN} of the pole {p}")));
        }
    }
    if u.im < 0.0 {
        return Err(Error::Domain(format!("u = {u} is below the real axis")));
    }
    Ok(())
}

/// Closed-form antiderivative for polynomial data.
fn polynomial_potential(cs: &[f64], r: f64, u: ComplexValue) -> ComplexValue {
    let r2 = r * r;
    // P = r^2 g, divided by u^2 - (1+r^2) u + r^2
    let mut rem: Vec<f64> = cs.iter().map(|v| v * r2).collect();
    let mut quot = vec![0.0; rem.len().saturating_sub(2)];
    for k in (2..rem.len()).rev() {
        let lead = rem[k];
        quot[k - 2] = lead;
        rem[k] = 0.0;
        rem[k - 1] += lead * (1.0 + r2);
        rem[k - 2] -= lead * r2;
    }
    let rem_at = |x: f64| rem.first().copied().unwrap_or(0.0) + rem.get(1).copied().unwrap_or(0.0) * x;
    let a = rem_at(1.0) / (1.0 - r2);
    let b = rem_at(r2) / (1.0 - r2);
    let integral: Vec<f64> = std::iter::once(0.0)
        .chain(quot.iter().enumerate().map(|(k, &q)| -q / (k as f64 + 1.0)))
        .collect();
    horner(&integral, u) - a * log_one_minus(u) + b * (u - r2).ln()
}

fn potential_from_reference(g: &BoundaryFunction, r: f64, u: ComplexValue, h_scale: f64) -> ComplexValue {
    let p0 = c(reference_point(r), 0.0);
    match g {
        BoundaryFunction::Zero => c(0.0, 0.0),
        BoundaryFunction::Polynomial(cs) => polynomial_potential(cs, r, u) - polynomial_potential(cs, r, p0),
        _ => {
            let gl = GaussLegendre::new(GL_ORDER);
            PotentialIntegrand::new(g, r).from_reference(&gl, p0.re, g.path_height(r) * h_scale, u)
        }
    }
}

/// The potential `F(u) - F(basepoint)`, with path independence verified for quadrature kinds.
pub fn script_f(
    g: &BoundaryFunction,
    u: ComplexValue,
    params: ModelParams,
    basepoint: ComplexValue,
) -> Result<ComplexValue> {
    let r = params.r;
    if r == 1.0 {
        return Err(Error::Unsupported("the potential has a double pole at r = 1".into()));
    }
    check_pole_distance(u, r, g)?;
    check_pole_distance(basepoint, r, g)?;
    let v = potential_from_reference(g, r, u, 1.0) - potential_from_reference(g, r, basepoint, 1.0);
    if matches!(g, BoundaryFunction::Bpp { .. } | BoundaryFunction::Custom { .. }) {
        let alt = potential_from_reference(g, r, u, 0.55) - potential_from_reference(g, r, basepoint, 0.55);
        if (alt - v).norm() > PATH_TOL * (1.0 + v.norm()) {
            return Err(Error::Domain(format!(
                "potential depends on the path ({v} vs {alt}); g is not analytic there"
            )));
        }
    }
    Ok(v)
}

/// One point of the macroscopic height surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitShapeSample {
    pub u: ComplexValue,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "H")]
    pub h: f64,
    /// Imaginary part discarded from the height.
    pub im_residual: f64,
}

/// Interior point of the limit shape for parameter `u` in the upper half plane.
pub fn interior_map(g: &BoundaryFunction, u: ComplexValue, params: ModelParams) -> Result<LimitShapeSample> {
    interior_map_with_constant(g, u, params, c(0.0, 0.0))
}

/// As [`interior_map`], with an additive constant on the potential.
pub fn interior_map_with_constant(
    g: &BoundaryFunction,
    u: ComplexValue,
    params: ModelParams,
    constant: ComplexValue,
) -> Result<LimitShapeSample> {
    let r = params.r;
    let regime = params.regime()?;
    if !(u.im > 0.0) {
        return Err(Error::Domain(format!("u = {u} must lie in the open upper half plane")));
    }
    if g.is_zero() {
        return zero_field_map(u, params, -constant.im);
    }
    if regime == Regime::Large {
        return Err(Error::Unsupported("interior map for r > 1 is available only for g = 0".into()));
    }
    check_pole_distance(u, r, g)?;
    let r2 = r * r;
    let (_, z) = shape_coordinates(u, r);
    let theta = -(z / (1.0 - z)).arg();
    let rho2 = u.norm_sqr();
    let gu = g.value(u);
    let k = gu.im / u.im;
    let den = conditioned_denominator(u, r)?;
    let pot = potential_from_reference(g, r, u, 1.0) + constant;
    let bracket = pot.im + (-(r2 * gu) * theta / (1.0 - r2) + angle_moment(z) * rho2 * k).re;
    let x = -bracket / den;
    let y = rho2 / r2 * (x - k);
    let gb = if g.real_analytic() { gu.conj() } else { g.value(u.conj()) };
    let ub = u.conj();
    let hc = (-gb + (ub - r2) * x + r2 * (1.0 / ub - 1.0) * y) / (1.0 - r2);
    Ok(LimitShapeSample { u, x, y, h: hc.re, im_residual: hc.im })
}

fn conditioned_denominator(u: ComplexValue, r: f64) -> Result<f64> {
    let den = shape_denominator(u, r);
    if den.re.abs() < 1e-13 || !den.re.is_finite() {
        return Err(Error::Conditioning(format!("denominator {} at u = {u}", den.re)));
    }
    Ok(den.re)
}

/// Closed-form shape for `g = 0` with real matching constant `constant`, in either regime.
pub fn zero_field_map(u: ComplexValue, params: ModelParams, constant: f64) -> Result<LimitShapeSample> {
    let r = params.r;
    params.regime()?;
    if !(u.im > 0.0) {
        return Err(Error::Domain(format!("u = {u} must lie in the open upper half plane")));
    }
    let den = conditioned_denominator(u, r)?;
    let x = constant / den;
    let y = u.norm_sqr() / (r * r) * x;
    let (w, z) = shape_coordinates(u, r);
    let hc = (1.0 - w) * x + (1.0 - z) * y;
    Ok(LimitShapeSample { u, x, y, h: hc.re, im_residual: hc.im })
}

/// Interior samples on a rectangular `u` grid, skipping ill-conditioned points.
pub fn shape_grid(
    g: &BoundaryFunction,
    params: ModelParams,
    re_range: (f64, f64),
    im_range: (f64, f64),
    counts: (usize, usize),
) -> Result<Vec<LimitShapeSample>> {
    let lo_im = im_range.0.max(MIN_INTERIOR_IM);
    let mut out = Vec::with_capacity(counts.0 * counts.1);
    for i in 0..counts.0 {
        let a = lerp(re_range, i, counts.0);
        for j in 0..counts.1 {
            let b = lerp((lo_im, im_range.1.max(lo_im)), j, counts.1);
            match interior_map(g, c(a, b), params) {
                Ok(s) => out.push(s),
                Err(Error::Conditioning(_)) | Err(Error::Singular(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

fn lerp(range: (f64, f64), i: usize, n: usize) -> f64 {
    if n <= 1 {
        range.0
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
    }
}

/// The four real intervals of `p` on which the boundary is analytic, in increasing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Piece {
    /// `p < 0`: facet of constant height.
    Constant,
    /// `0 < p < min(r^2, 1)`: facet with height `y + const`.
    SlopeY,
    /// Between `min(r^2, 1)` and `max(r^2, 1)`.
    Middle,
    /// `p > max(r^2, 1)`: facet with height `x + const`.
    SlopeX,
}

impl Piece {
    pub const ALL: [Piece; 4] = [Piece::Constant, Piece::SlopeY, Piece::Middle, Piece::SlopeX];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Piece::Constant => "constant",
            Piece::SlopeY => "slope-y",
            Piece::Middle => "middle",
            Piece::SlopeX => "slope-x",
        }
    }

    /// Open interval of `p` covered by the piece.
    pub fn interval(self, r: f64) -> (f64, f64) {
        let r2 = r * r;
        let (lo, hi) = (r2.min(1.0), r2.max(1.0));
        match self {
            Piece::Constant => (f64::NEG_INFINITY, 0.0),
            Piece::SlopeY => (0.0, lo),
            Piece::Middle => (lo, hi),
            Piece::SlopeX => (hi, f64::INFINITY),
        }
    }

    pub fn of(p: f64, r: f64) -> Result<Piece> {
        let r2 = r * r;
        for s in [0.0, r2, 1.0] {
            if (p - s).abs() < POLE_MARGIN {
                return Err(Error::Singular(format!("p = {p} is within {POLE_MARGIN} of {s}")));
            }
        }
        Ok(*Piece::ALL
            .iter()
            .find(|pc| {
                let (a, b) = pc.interval(r);
                p > a && p < b
            })
            .expect("intervals cover the line"))
    }
}

/// Declared facet heights: `H = constant`, `H = y + slope_y`, `H = (x+y)/2 + diagonal` (`r > 1`),
/// `H = x + slope_x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FacetHeights {
    pub constant: Option<f64>,
    pub slope_y: Option<f64>,
    pub diagonal: Option<f64>,
    pub slope_x: Option<f64>,
}

impl FacetHeights {
    pub fn all_zero() -> Self {
        FacetHeights { constant: Some(0.0), slope_y: Some(0.0), diagonal: Some(0.0), slope_x: Some(0.0) }
    }

    /// Heights of the boxed plane partition facets for the given sheet.
    pub fn bpp(sheet: Sheet) -> Self {
        let s = sheet.sign();
        FacetHeights {
            constant: Some(-0.5 * s),
            slope_y: Some(0.5 * s),
            diagonal: Some(0.0),
            slope_x: Some(-0.5 * s),
        }
    }

    fn get(&self, piece: Piece) -> Option<f64> {
        match piece {
            Piece::Constant => self.constant,
            Piece::SlopeY => self.slope_y,
            Piece::Middle => self.diagonal,
            Piece::SlopeX => self.slope_x,
        }
    }
}

/// One boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcticSample {
    pub piece: Piece,
    pub p: f64,
    pub x: f64,
    pub y: f64,
    /// Boundary height, from the height relation in the limit `u -> p`.
    #[serde(rename = "H")]
    pub h: f64,
}

/// Piecewise-analytic arctic boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcticCurve {
    pub regime: Regime,
    pub samples: Vec<ArcticSample>,
    /// Local constants of the four pieces, `None` where the piece carries none.
    pub facet_constants: [Option<f64>; 4],
}

impl ArcticCurve {
    pub fn piece_samples(&self, piece: Piece) -> impl Iterator<Item = &ArcticSample> {
        self.samples.iter().filter(move |s| s.piece == piece)
    }
}

/// Real derivatives of the potential at `p`: `F'`, `F''`, `F'''`.
fn potential_derivatives(g: &BoundaryFunction, r: f64, p: f64) -> Result<(f64, f64, f64)> {
    let r2 = r * r;
    let gv = g.real_value(p)?;
    let g1 = g.deriv(c(p, 0.0)).re;
    let g2 = g.second_deriv(c(p, 0.0)).re;
    let d = (1.0 - p) * (p - r2);
    let d1 = 1.0 + r2 - 2.0 * p;
    let d2 = -2.0;
    let num1 = g1 * d - gv * d1;
    let f1 = r2 * gv / d;
    let f2 = r2 * num1 / (d * d);
    let f3 = r2 * ((g2 * d - gv * d2) / (d * d) - 2.0 * d1 * num1 / (d * d * d));
    Ok((f1, f2, f3))
}

/// Boundary point at real `p`, with the facet constant `cst` of its piece.
fn boundary_x(g: &BoundaryFunction, r: f64, piece: Piece, p: f64, cst: f64) -> Result<f64> {
    let r2 = r * r;
    let (f1, f2, f3) = potential_derivatives(g, r, p)?;
    let x = match piece {
        Piece::Constant => {
            let e = p * p - 2.0 * p + r2;
            let q = (1.0 - p) * (1.0 - p) / (r2 * e);
            f1 * (r2 - 2.0 * p) * q + f2 * p * (r2 - p) * q - cst * (1.0 - r2) / (PI * r2 * e)
        }
        Piece::SlopeY => {
            f1 * (1.0 - 2.0 * p) / r2 + f2 * p * (1.0 - p) / r2 - cst * (1.0 - r2) / (PI * (p - r2) * (p - r2))
        }
        Piece::Middle if r < 1.0 => {
            f1 * (1.0 + r2 - 3.0 * p) / r2
                + f2 * (-r2 + 2.0 * p + 2.0 * r2 * p - 3.0 * p * p) / r2
                + f3 * (1.0 - p) * (p - r2) * p / (2.0 * r2)
        }
        Piece::Middle => {
            let r4 = r2 * r2;
            let e = r4 + r2 * p * p - 4.0 * r2 * p + r2 + p * p;
            let n1 = r4 * p * p - 4.0 * r4 * p + 2.0 * r4 - 2.0 * r2 * p.powi(3) + 8.0 * r2 * p * p
                - 4.0 * r2 * p
                - 2.0 * p.powi(3)
                + p * p;
            let n2 = (p - 1.0) * p * (r2 - p) * (p * r2 + p - 2.0 * r2);
            f1 * n1 / (r2 * e) + f2 * n2 / (r2 * e) + 2.0 * cst * (r2 - 1.0) / (PI * e)
        }
        Piece::SlopeX => {
            f1 * (r2 - 2.0 * p) / r2 + f2 * p * (r2 - p) / r2
                - cst * (1.0 - r2) / (PI * r2 * (p - 1.0) * (p - 1.0))
        }
    };
    Ok(x)
}

/// Height at a boundary point from the height relation in the limit `u -> p`.
pub fn boundary_height(g: &BoundaryFunction, r: f64, p: f64, x: f64, y: f64) -> Result<f64> {
    let r2 = r * r;
    Ok((-g.real_value(p)? + (p - r2) * x + r2 * (1.0 / p - 1.0) * y) / (1.0 - r2))
}

/// Arctic boundary on the given `p` values.
pub fn arctic_boundary(
    g: &BoundaryFunction,
    params: ModelParams,
    p_grid: &[f64],
    heights: FacetHeights,
) -> Result<ArcticCurve> {
    let r = params.r;
    let regime = params.regime()?;
    if !g.real_analytic() {
        return Err(Error::Domain("arctic boundary requires real-analytic g".into()));
    }
    let mut constants = [None; 4];
    for piece in Piece::ALL {
        if piece == Piece::Middle && regime == Regime::Small {
            continue;
        }
        constants[piece.index()] = heights.get(piece).map(|h| PI * r * r * h);
    }
    let mut ps = p_grid.to_vec();
    ps.sort_by(f64::total_cmp);
    let mut samples = Vec::with_capacity(ps.len());
    for p in ps {
        let piece = Piece::of(p, r)?;
        let cst = if piece == Piece::Middle && regime == Regime::Small {
            0.0
        } else {
            constants[piece.index()].ok_or_else(|| {
                Error::InvalidParameter(format!("missing facet height for the {} piece", piece.name()))
            })?
        };
        let x = boundary_x(g, r, piece, p, cst)?;
        let y = p * p / (r * r) * (x - g.deriv(c(p, 0.0)).re);
        let h = boundary_height(g, r, p, x, y)?;
        samples.push(ArcticSample { piece, p, x, y, h });
    }
    Ok(ArcticCurve { regime, samples, facet_constants: constants })
}

/// `count` parameter values inside a piece, spread so that infinite pieces are covered.
pub fn piece_grid(piece: Piece, r: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = piece.interval(r);
    piece_grid_on(lo, hi, count)
}

fn piece_grid_on(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| {
            let t = k as f64 / (count + 1) as f64;
            if lo.is_infinite() {
                hi - (0.5 * PI * (1.0 - t)).tan()
            } else if hi.is_infinite() {
                lo + (0.5 * PI * t).tan()
            } else {
                lo + (hi - lo) * t
            }
        })
        .collect()
}

/// Boundary grid for `g`, leaving out real intervals where `g` is not real.
pub fn default_grid(g: &BoundaryFunction, r: f64, per_piece: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for piece in Piece::ALL {
        let (lo, hi) = piece.interval(r);
        let gap = match g {
            BoundaryFunction::Bpp { r, .. } => bpp_real_branch_points(*r),
            _ => None,
        };
        match gap {
            Some((a, b)) if a > lo && b < hi => {
                out.extend(piece_grid_on(lo, a, per_piece / 2));
                out.extend(piece_grid_on(b, hi, per_piece / 2));
            }
            _ => out.extend(piece_grid_on(lo, hi, per_piece)),
        }
    }
    out
}

/// Both sheets of the boxed plane partition boundary.
#[derive(Debug, Clone)]
pub struct BppBoundary {
    pub r: f64,
    pub sheets: [ArcticCurve; 2],
}

/// Vertices of the unit hexagon in the plane of the limit shape.
pub const HEXAGON: [(f64, f64); 6] = [(-1.0, -1.0), (0.0, -1.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (-1.0, 0.0)];

impl BppBoundary {
    pub fn new(params: ModelParams, per_piece: usize) -> Result<Self> {
        let mut sheets = Vec::with_capacity(2);
        for sheet in [Sheet::Plus, Sheet::Minus] {
            let g = bpp_g_sheet(params, sheet)?;
            let grid = default_grid(&g, params.r, per_piece);
            sheets.push(arctic_boundary(&g, params, &grid, FacetHeights::bpp(sheet))?);
        }
        let [a, b]: [ArcticCurve; 2] = sheets.try_into().expect("two sheets");
        Ok(BppBoundary { r: params.r, sheets: [a, b] })
    }

    /// Closed polygon: the `+` sheet in increasing `p`, followed by the `-` sheet.
    pub fn polygon(&self) -> Vec<(f64, f64)> {
        self.sheets.iter().flat_map(|s| s.samples.iter().map(|q| (q.x, q.y))).collect()
    }

    /// Enclosed area by the shoelace formula.
    pub fn area(&self) -> f64 {
        polygon_area(&self.polygon()).abs()
    }

    /// Neck half-width at the centre, measured by `x - y` at the tip of the middle piece.
    pub fn neck(&self) -> Option<f64> {
        if let Some((a, b)) = bpp_real_branch_points(self.r) {
            let r2 = self.r * self.r;
            if a > 1.0 && b < r2 {
                return None;
            }
        }
        self.sheets[0]
            .piece_samples(Piece::Middle)
            .map(|s| s.x - s.y)
            .min_by(f64::total_cmp)
    }

    /// Number of connected components of the region enclosed by the boundary.
    pub fn component_count(&self) -> usize {
        match self.neck() {
            Some(n) if n > 0.0 => 1,
            Some(_) | None if self.r > 1.0 => 2,
            _ => 1,
        }
    }
}

pub fn polygon_area(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (x1, y1) = pts[i];
            let (x2, y2) = pts[(i + 1) % n];
            x1 * y2 - x2 * y1
        })
        .sum::<f64>()
        * 0.5
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(pt: (f64, f64), poly: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[(i + n - 1) % n];
        if (yi > pt.1) != (yj > pt.1) && pt.0 < (xj - xi) * (pt.1 - yi) / (yj - yi) + xi {
            inside = !inside;
        }
    }
    inside
}

/// Distance from a point to a closed polyline.
pub fn distance_to_polygon(pt: (f64, f64), poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 { (((pt.0 - a.0) * dx + (pt.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
            ((a.0 + t * dx - pt.0).powi(2) + (a.1 + t * dy - pt.1).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Boxed plane partition height predicted inside the repulsive region, by inverting the interior map.
#[derive(Debug, Clone)]
pub struct BppShape {
    pub params: ModelParams,
    sheets: [BoundaryFunction; 2],
    cloud: Vec<(usize, LimitShapeSample)>,
}

impl BppShape {
    pub fn new(params: ModelParams) -> Result<Self> {
        if params.regime()? != Regime::Small {
            return Err(Error::Unsupported("boxed plane partition interior needs r < 1".into()));
        }
        let sheets = [bpp_g_sheet(params, Sheet::Plus)?, bpp_g_sheet(params, Sheet::Minus)?];
        let mut cloud = Vec::new();
        for (k, g) in sheets.iter().enumerate() {
            for i in 0..160 {
                let a = (PI * (i as f64 + 0.5) / 160.0 - 0.5 * PI).tan() + reference_point(params.r);
                for j in 0..60 {
                    let b = 10f64.powf(-3.0 + 4.5 * j as f64 / 59.0);
                    if let Ok(s) = interior_map(g, c(a, b), params) {
                        if s.x.is_finite() && s.y.is_finite() {
                            cloud.push((k, s));
                        }
                    }
                }
            }
        }
        // the centre of the region is the image of the branch point
        if let Some(beta) = bpp_branch_point(params.r) {
            for (k, g) in sheets.iter().enumerate() {
                for i in 0..40 {
                    let rad = 10f64.powf(-4.0 + 3.5 * i as f64 / 39.0);
                    for j in 0..48 {
                        let u = beta + ComplexValue::from_polar(rad, 2.0 * PI * (j as f64 + 0.5) / 48.0);
                        if u.im <= 0.0 {
                            continue;
                        }
                        if let Ok(s) = interior_map(g, u, params) {
                            if s.x.is_finite() && s.y.is_finite() {
                                cloud.push((k, s));
                            }
                        }
                    }
                }
            }
        }
        Ok(BppShape { params, sheets, cloud })
    }

    fn solve(&self, sheet: usize, start: ComplexValue, target: (f64, f64)) -> Option<LimitShapeSample> {
        let g = &self.sheets[sheet];
        let map = |u: ComplexValue| interior_map(g, u, self.params).ok();
        let mut u = start;
        let mut cur = map(u)?;
        for _ in 0..60 {
            let (fx, fy) = (cur.x - target.0, cur.y - target.1);
            if fx.hypot(fy) < 1e-11 {
                return Some(cur);
            }
            let h = 1e-7 * (1.0 + u.norm()).min(u.im * 1e3);
            let sa = map(u + h)?;
            let sb = map(u + c(0.0, h))?;
            let (j11, j21) = ((sa.x - cur.x) / h, (sa.y - cur.y) / h);
            let (j12, j22) = ((sb.x - cur.x) / h, (sb.y - cur.y) / h);
            let det = j11 * j22 - j12 * j21;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let mut step = c(-(j22 * fx - j12 * fy) / det, -(-j21 * fx + j11 * fy) / det);
            let mut accepted = false;
            for _ in 0..30 {
                let cand = u + step;
                if cand.im > 0.0 {
                    if let Some(s) = map(cand) {
                        if (s.x - target.0).hypot(s.y - target.1) < fx.hypot(fy) {
                            u = cand;
                            cur = s;
                            accepted = true;
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        ((cur.x - target.0).hypot(cur.y - target.1) < 1e-8).then_some(cur)
    }

    /// Predicted height at `(x, y)`, or `None` if no parameter maps there.
    ///
    /// Falls back to inverse-distance weighting of nearby samples where Newton's method
    /// fails, which happens next to the branch point.
    pub fn height_at(&self, x: f64, y: f64) -> Option<LimitShapeSample> {
        self.height_near(x, y, None).map(|(_, s)| s)
    }

    /// Predicted heights at many points, warm-starting each solve from the previous one.
    pub fn heights_at(&self, points: &[(f64, f64)]) -> Vec<Option<LimitShapeSample>> {
        let mut hint = None;
        points
            .iter()
            .map(|&(x, y)| {
                let found = self.height_near(x, y, hint);
                if let Some((k, s)) = found {
                    hint = Some((k, s.u));
                }
                found.map(|(_, s)| s)
            })
            .collect()
    }

    fn height_near(
        &self,
        x: f64,
        y: f64,
        hint: Option<(usize, ComplexValue)>,
    ) -> Option<(usize, LimitShapeSample)> {
        if let Some((k, u)) = hint {
            if let Some(s) = self.solve(k, u, (x, y)) {
                return Some((k, s));
            }
        }
        let d = |s: &LimitShapeSample| (s.x - x).hypot(s.y - y);
        let mut near: Vec<&(usize, LimitShapeSample)> = self.cloud.iter().collect();
        let take = 8.min(near.len());
        if take == 0 {
            return None;
        }
        near.select_nth_unstable_by(take - 1, |a, b| d(&a.1).total_cmp(&d(&b.1)));
        near.truncate(take);
        near.sort_by(|a, b| d(&a.1).total_cmp(&d(&b.1)));
        if let Some(found) = near.iter().take(6).find_map(|(k, s)| self.solve(*k, s.u, (x, y)).map(|v| (*k, v))) {
            return Some(found);
        }
        let close: Vec<&LimitShapeSample> = near.iter().take(8).map(|(_, s)| s).filter(|s| d(s) < 0.02).collect();
        if close.is_empty() {
            return None;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for s in &close {
            let wgt = 1.0 / (d(s) + 1e-12);
            num += wgt * s.h;
            den += wgt;
        }
        let k = near[0].0;
        Some((k, LimitShapeSample { u: close[0].u, x, y, h: num / den, im_residual: 0.0 }))
    }
}

/// Writes `(u_re, u_im, x, y, H)` rows.
pub fn write_shape_csv<W: Write>(out: &mut W, samples: &[LimitShapeSample]) -> Result<()> {
    writeln!(out, "u_re,u_im,x,y,H")?;
    for s in samples {
        writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", s.u.re, s.u.im, s.x, s.y, s.h)?;
    }
    Ok(())
}

/// Writes `(piece, p, x, y)` rows.
pub fn write_boundary_csv<W: Write>(out: &mut W, samples: &[ArcticSample]) -> Result<()> {
    writeln!(out, "piece,p,x,y")?;
    for s in samples {
        writeln!(out, "{},{:.17e},{:.17e},{:.17e}", s.piece.name(), s.p, s.x, s.y)?;
    }
    Ok(())
}

/// SVG with one polyline per piece and sheet; the view box fits the points.
pub fn boundary_svg(curves: &[ArcticCurve]) -> String {
    let colors = ["green", "blue", "red", "purple"];
    let pts: Vec<(f64, f64)> = curves
        .iter()
        .flat_map(|cv| cv.samples.iter().map(|s| (s.x, s.y)))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
        x0 - pad,
        -(y1 + pad),
        x1 - x0 + 2.0 * pad,
        y1 - y0 + 2.0 * pad
    );
    let width = 0.003 * (x1 - x0).max(y1 - y0).max(1e-9);
    for cv in curves {
        for piece in Piece::ALL {
            let line: Vec<String> = cv
                .piece_samples(piece)
                .filter(|q| q.x.is_finite() && q.y.is_finite())
                .map(|q| format!("{:.6},{:.6}", q.x, -q.y))
                .collect();
            if line.is_empty() {
                continue;
            }
            s.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{width}\" points=\"{}\"/>\n",
                colors[piece.index()],
                line.join(" ")
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: f64) -> ModelParams {
        ModelParams::new(r, 0.0, 0.0).unwrap()
    }

    /// Boundary point from the height relation and the imaginary-part relation,
    /// solved as two linear equations with the facet height plugged in.
    fn facet_oracle(g: &BoundaryFunction, r: f64, piece: Piece, p: f64, h: f64) -> f64 {
        let r2 = r * r;
        let gv = g.real_value(p).unwrap();
        let gp = g.deriv(c(p, 0.0)).re;
        match piece {
            Piece::Constant => -((1.0 - r2) * h + gv + p * (1.0 - p) * gp) / (p * p - 2.0 * p + r2),
            Piece::SlopeY => -r2 * ((1.0 - r2) * h + gv) / ((p - r2) * (p - r2)) + p * gp / (p - r2),
            Piece::Middle => {
                let a = p - 0.5 * (r2 + 1.0);
                let cc = r2 / p - 0.5 * (r2 + 1.0);
                (gv - (r2 - 1.0) * h + cc * p * p * gp / r2) / (a + cc * p * p / r2)
            }
            Piece::SlopeX => (p * (p - 1.0) * gp - gv - (1.0 - r2) * h) / ((p - 1.0) * (p - 1.0)),
        }
    }

    #[test]
    fn quadratic_potential_is_identity() {
        let pr = params(0.7);
        let g = BoundaryFunction::quadratic(0.7);
        let p0 = c(reference_point(0.7), 0.0);
        for u in [c(0.3, 0.4), c(-2.0, 0.1), c(1.5, 3.0)] {
            let f = script_f(&g, u, pr, p0).unwrap();
            assert!((f - (u - p0)).norm() < 1e-13, "{f}");
        }
    }

    #[test]
    fn polynomial_closed_form_matches_quadrature() {
        let r = 0.6;
        let pr = params(r);
        let cs = vec![0.3, -1.2, 0.7, 0.25];
        let poly = BoundaryFunction::Polynomial(cs.clone());
        let cs2 = cs.clone();
        let wrapped = BoundaryFunction::custom(
            move |u| (horner(&cs2, u), horner(&poly_deriv(&cs2), u)),
            true,
        );
        let base = c(reference_point(r), 0.0);
        for u in [c(0.2, 0.5), c(0.9, 0.01), c(-1.0, 2.0)] {
            let a = script_f(&poly, u, pr, base).unwrap();
            let b = script_f(&wrapped, u, pr, base).unwrap();
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn bpp_potential_derivative_by_finite_difference() {
        let pr = params(0.7);
        let g = bpp_g(pr).unwrap();
        let base = c(reference_point(0.7), 0.0);
        let u = c(0.0, 1.0);
        let h = 1e-4;
        let fd = (script_f(&g, u + h, pr, base).unwrap() - script_f(&g, u - h, pr, base).unwrap()) / (2.0 * h);
        let exact = 0.49 * g.value(u) / ((1.0 - u) * (u - 0.49));
        assert!((fd - exact).norm() < 1e-8, "{fd} vs {exact}");
    }

    #[test]
    fn potential_is_real_on_reference_interval() {
        let pr = params(0.7);
        let g = bpp_g(pr).unwrap();
        let base = c(reference_point(0.7), 0.0);
        for p in [0.55, 0.7, 0.95] {
            let f = script_f(&g, c(p, 0.0), pr, base).unwrap();
            assert!(f.im.abs() < 1e-10, "{f}");
        }
    }

    #[test]
    fn pole_proximity_is_rejected() {
        let pr = params(0.7);
        let g = BoundaryFunction::quadratic(0.7);
        let err = script_f(&g, c(1.0, 1e-8), pr, c(0.7, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Singular(_)));
    }

    #[test]
    fn denominator_is_real() {
        for r in [0.4, 0.7, 1.5, 2.5] {
            for u in [c(0.3, 0.2), c(-1.0, 0.7), c(2.2, 1.3), c(0.6, 0.05)] {
                let d = shape_denominator(u, r);
                assert!(d.im.abs() < 1e-10 * (1.0 + d.re.abs()), "r {r} u {u}: {d}");
            }
        }
    }

    #[test]
    fn denominator_derivative_identity() {
        let h = 1e-6;
        for r in [0.5f64, 0.8] {
            for u in [c(0.3, 0.4), c(-0.7, 1.1), c(1.6, 0.3)] {
                let (_, z) = shape_coordinates(u, r);
                let dx = (shape_denominator(u + h, r) - shape_denominator(u - h, r)) / (2.0 * h);
                let dy = (shape_denominator(u + c(0.0, h), r) - shape_denominator(u - c(0.0, h), r)) / (2.0 * h);
                let du = 0.5 * (dx - c(0.0, 1.0) * dy);
                let expect = -angle_moment(z) * u.conj();
                assert!((du - expect).norm() < 1e-7, "{du} vs {expect}");
            }
        }
        for r in [1.5f64, 2.5] {
            for u in [c(0.3, 0.4), c(-0.7, 1.1), c(1.6, 0.3)] {
                let (_, z) = shape_coordinates(u, r);
                let dx = (shape_denominator(u + h, r) - shape_denominator(u - h, r)) / (2.0 * h);
                let dy = (shape_denominator(u + c(0.0, h), r) - shape_denominator(u - c(0.0, h), r)) / (2.0 * h);
                let dub = 0.5 * (dx + c(0.0, 1.0) * dy);
                let expect = -(angle_moment(z) + 1.0 - 2.0 * z) * u;
                assert!((dub - expect).norm() < 1e-7, "{dub} vs {expect}");
            }
        }
    }

    #[test]
    fn coordinates_lie_on_the_relation() {
        for r in [0.5f64, 1.7] {
            let u = c(0.4, 0.9);
            let (w, z) = shape_coordinates(u, r);
            let rel = 1.0 - w - z + (1.0 - r * r) * w * z;
            assert!(rel.norm() < 1e-14);
        }
    }

    #[test]
    fn zero_field_closed_forms() {
        for r in [0.6, 1.8] {
            let pr = params(r);
            let u = c(0.5, 0.8);
            let s = zero_field_map(u, pr, 1.3).unwrap();
            assert!((s.y - u.norm_sqr() / (r * r) * s.x).abs() < 1e-14);
            assert!(s.im_residual.abs() < 1e-12);
            assert!((s.x * shape_denominator(u, r).re - 1.3).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_invariants_quadratic() {
        let r = 0.7;
        let pr = params(r);
        let g = BoundaryFunction::quadratic(r);
        for u in [c(0.35, 0.3), c(-0.5, 0.5), c(0.8, 0.2), c(1.7, 0.6)] {
            let s = interior_map(&g, u, pr).unwrap();
            let k = g.value(u).im / u.im;
            assert!((s.x - r * r / u.norm_sqr() * s.y - k).abs() < 1e-9);
            assert!(s.im_residual.abs() < 1e-8);
        }
    }

    #[test]
    fn imaginary_constant_shifts_x() {
        let r = 0.7;
        let pr = params(r);
        let g = BoundaryFunction::quadratic(r);
        let u = c(0.2, 0.6);
        let a = interior_map(&g, u, pr).unwrap();
        let b = interior_map_with_constant(&g, u, pr, c(5.0, 0.3)).unwrap();
        let den = shape_denominator(u, r).re;
        assert!((b.x - a.x + 0.3 / den).abs() < 1e-12);
        let real_shift = interior_map_with_constant(&g, u, pr, c(5.0, 0.0)).unwrap();
        assert!((real_shift.h - a.h).abs() < 1e-12);
    }

    #[test]
    fn first_order_equation_residual() {
        let r = 0.7;
        let pr = params(r);
        let g = bpp_g(pr).unwrap();
        let h = 1e-5;
        for u in [c(0.3, 0.5), c(0.9, 0.3), c(-0.3, 0.4)] {
            let s = |v: ComplexValue| interior_map(&g, v, pr).unwrap();
            let (a, b) = (s(u + h), s(u - h));
            let (cc, d) = (s(u + c(0.0, h)), s(u - c(0.0, h)));
            let xu = 0.5 * c((a.x - b.x) / (2.0 * h), -(cc.x - d.x) / (2.0 * h));
            let yu = 0.5 * c((a.y - b.y) / (2.0 * h), -(cc.y - d.y) / (2.0 * h));
            let (w, z) = shape_coordinates(u, r);
            let res = angle_moment(w) * xu - angle_moment(z) * yu;
            let scale = (angle_moment(w) * xu).norm() + (angle_moment(z) * yu).norm();
            assert!(res.norm() < 1e-4 * scale, "{res} vs {scale}");
        }
    }

    #[test]
    fn quadratic_boundary_displays() {
        let r = 0.7f64;
        let r2 = r * r;
        let g = BoundaryFunction::quadratic(r);
        let grid: Vec<f64> = Piece::ALL.iter().flat_map(|&pc| piece_grid(pc, r, 25)).collect();
        let cv = arctic_boundary(&g, params(r), &grid, FacetHeights::all_zero()).unwrap();
        for s in &cv.samples {
            let p = s.p;
            let (x, y) = match s.piece {
                Piece::Constant => {
                    let d = p * p - 2.0 * p + r2;
                    (
                        (r2 - 2.0 * p) * (1.0 - p).powi(2) / (r2 * d),
                        -p * p * (p - r2).powi(2) / (r2 * r2 * d),
                    )
                }
                Piece::SlopeY => ((1.0 - 2.0 * p) / r2, -p * p / r2),
                Piece::Middle => ((r2 - 3.0 * p + 1.0) / r2, -p.powi(3) / (r2 * r2)),
                Piece::SlopeX => (1.0 - 2.0 * p / r2, -p * p / (r2 * r2)),
            };
            let scale = 1.0 + x.abs() + y.abs();
            assert!((s.x - x).abs() < 1e-10 * scale && (s.y - y).abs() < 1e-10 * scale, "{s:?}");
        }
    }

    #[test]
    fn facet_constants_match_height_relations() {
        let r = 0.7;
        let g = bpp_g(params(r)).unwrap();
        let hs = FacetHeights::bpp(Sheet::Plus);
        let grid = default_grid(&g, r, 12);
        let cv = arctic_boundary(&g, params(r), &grid, hs).unwrap();
        for s in &cv.samples {
            let want = match s.piece {
                Piece::Constant => Some(-0.5),
                Piece::SlopeY => Some(s.y + 0.5),
                Piece::SlopeX => Some(s.x - 0.5),
                Piece::Middle => None,
            };
            if let Some(hw) = want {
                assert!((s.h - hw).abs() < 1e-9 * (1.0 + s.x.abs() + s.y.abs()), "{s:?}");
                let hdecl = match s.piece {
                    Piece::Constant => -0.5,
                    Piece::SlopeY => 0.5,
                    _ => -0.5,
                };
                let ox = facet_oracle(&g, r, s.piece, s.p, hdecl);
                assert!((ox - s.x).abs() < 1e-9 * (1.0 + ox.abs()), "{s:?} vs {ox}");
            }
        }
    }

    #[test]
    fn large_r_pieces_match_height_relations() {
        let r = 2.0;
        let g = bpp_g(params(r)).unwrap();
        let hs = FacetHeights { constant: Some(0.2), slope_y: Some(-0.3), diagonal: Some(0.15), slope_x: Some(0.4) };
        let grid = default_grid(&g, r, 10);
        let cv = arctic_boundary(&g, params(r), &grid, hs).unwrap();
        for s in &cv.samples {
            let h = hs.get(s.piece).unwrap();
            let ox = facet_oracle(&g, r, s.piece, s.p, h);
            assert!((ox - s.x).abs() < 1e-8 * (1.0 + ox.abs()), "{s:?} vs {ox}");
            let want = match s.piece {
                Piece::Constant => h,
                Piece::SlopeY => s.y + h,
                Piece::Middle => 0.5 * (s.x + s.y) + h,
                Piece::SlopeX => s.x + h,
            };
            assert!((s.h - want).abs() < 1e-8 * (1.0 + s.x.abs() + s.y.abs()), "{s:?}");
        }
    }

    #[test]
    fn missing_height_is_an_error() {
        let g = BoundaryFunction::quadratic(0.7);
        let err = arctic_boundary(&g, params(0.7), &[-0.5], FacetHeights::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
        let ok = arctic_boundary(&g, params(0.7), &[0.7], FacetHeights::default());
        assert!(ok.is_ok());
    }

    #[test]
    fn middle_expansion_leading_order() {
        let r = 0.7f64;
        let r2 = r * r;
        let p = 0.7;
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4] {
            let u = c(p, eps);
            let (_, z) = shape_coordinates(u, r);
            let v = u.norm_sqr() * angle_moment(z);
            let lead = c(0.0, -r2 * eps * eps / ((1.0 - p) * (p - r2)));
            let rel = (v - lead).norm() / lead.norm();
            assert!(rel < prev);
            prev = rel;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn bpp_branch_points_complex_below_three() {
        assert!(bpp_real_branch_points(0.7).is_none());
        assert!(bpp_real_branch_points(2.9).is_none());
        assert!(bpp_real_branch_points(3.1).is_some());
        let beta = bpp_branch_point(0.7).unwrap();
        let b = bpp_b(0.7);
        assert!((beta * beta + b * beta + 0.49).norm() < 1e-14);
    }

    #[test]
    fn bpp_rejects_small_r() {
        assert!(matches!(bpp_g(params(0.3)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bpp_second_derivative() {
        let g = bpp_g(params(0.7)).unwrap();
        let u = c(0.4, 0.3);
        let h = 1e-5;
        let fd = (g.deriv(u + h) - g.deriv(u - h)) / (2.0 * h);
        assert!((fd - g.second_deriv(u)).norm() < 1e-7);
        let fd1 = (g.value(u + h) - g.value(u - h)) / (2.0 * h);
        assert!((fd1 - g.deriv(u)).norm() < 1e-8);
    }

    #[test]
    fn bpp_region_is_closed_and_inside_hexagon() {
        let b = BppBoundary::new(params(0.7), 200).unwrap();
        let poly = b.polygon();
        let first = poly.first().unwrap();
        let last = poly.last().unwrap();
        let gap = (first.0 - last.0).hypot(first.1 - last.1);
        assert!(gap < 0.05, "gap {gap}");
        let area = b.area();
        assert!(area > 0.5 && area < 3.0, "area {area}");
        assert_eq!(b.component_count(), 1);
    }

    #[test]
    fn bpp_shape_inversion_is_odd_about_centre() {
        let shape = BppShape::new(params(0.7)).unwrap();
        let centre = shape.height_at(0.0, 0.0).unwrap();
        assert!(centre.h.abs() < 1e-6);
        for (x, y) in [(0.2, 0.1), (-0.3, 0.25), (0.45, 0.4)] {
            let a = shape.height_at(x, y).unwrap();
            let b = shape.height_at(-x, -y).unwrap();
            assert!((a.x - x).abs() < 1e-8 && (a.y - y).abs() < 1e-8);
            assert!((a.h + b.h).abs() < 1e-7, "{} vs {}", a.h, b.h);
        }
    }

    #[test]
    fn svg_and_csv_outputs() {
        let g = BoundaryFunction::quadratic(0.7);
        let cv = arctic_boundary(&g, params(0.7), &default_grid(&g, 0.7, 5), FacetHeights::all_zero()).unwrap();
        let svg = boundary_svg(&[cv.clone()]);
        assert_eq!(svg.matches("<polyline").count(), 4);
        let mut buf = Vec::new();
        write_boundary_csv(&mut buf, &cv.samples).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + cv.samples.len());
    }
}
