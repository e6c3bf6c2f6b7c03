//! Finite-size exact solution on a cylinder of circumference `N` with `n` paths.
//!
//! Bethe roots solve `w^(N-n) (1-w)^n = y`. They are located through the change of
//! variables `w = 1 / (1 + e^(-v))`, which maps the strip `0 < Im v < pi` onto the upper
//! half plane and turns the root equation into
//! `G(v) = -(N-n) log(1+e^(-v)) - n log(1+e^v) = log|y| + i (2k+1) pi`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::numeric::brent;
use crate::{ComplexValue, Error, Result};

/// Largest row length accepted by the dense oracle.
pub const ORACLE_MAX_N: usize = 14;
/// Largest row length accepted by the completeness check.
pub const COMPLETENESS_MAX_N: usize = 12;
/// Real-part gap below which root selection is considered ambiguous.
pub const TIE_TOL: f64 = 1e-9;

/// Vertex weights: corner weight `r` and field parameters `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub r: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
}

impl ModelParams {
    pub fn new(r: f64, x: f64, y: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite() && x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidParameter(format!("r = {r}, X = {x}, Y = {y}")));
        }
        Ok(ModelParams { r, x, y })
    }

    pub fn regime(&self) -> Result<Regime> {
        Regime::of(self.r)
    }

    /// Upper end of the attainable `Y` range, `-log(1-r^2)` for `r < 1`, infinite otherwise.
    pub fn y_ceiling(&self) -> f64 {
        if self.r < 1.0 {
            -(1.0 - self.r * self.r).ln()
        } else {
            f64::INFINITY
        }
    }
}

/// Which side of the free-fermion point `r = 1` the corner weight lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `r < 1`: corners are suppressed.
    Small,
    /// `r > 1`: corners are favoured.
    Large,
}

impl Regime {
    pub fn of(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("corner weight {r}")));
        }
        if r < 1.0 {
            Ok(Regime::Small)
        } else if r > 1.0 {
            Ok(Regime::Large)
        } else {
            Err(Error::Unsupported("r = 1 has no Bethe asymptotics here".into()))
        }
    }
}

/// A row of vertical-edge occupations, bit `i` for column `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowConfig {
    pub occupancy: u32,
}

impl RowConfig {
    pub fn count(&self) -> u32 {
        self.occupancy.count_ones()
    }

    pub fn bit(&self, i: usize) -> u8 {
        ((self.occupancy >> i) & 1) as u8
    }
}

/// Selected Bethe roots, consistency constant and leading eigenvalue of a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheSolution {
    pub big_n: usize,
    pub n: usize,
    /// `log|y|`; kept separately because `y` underflows for large `N`.
    pub log_abs_y: f64,
    pub y: f64,
    pub roots: Vec<ComplexValue>,
    pub log_lambda: f64,
    pub lambda: f64,
    /// Residual of the consistency relation at the returned `y`.
    pub consistency_residual: f64,
}

/// All `N` roots of `w^(N-n) (1-w)^n = y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CassiniRoots {
    /// Sorted by real part.
    pub roots: Vec<ComplexValue>,
    pub two_components: bool,
    /// `n^n (N-n)^(N-n) / N^N`.
    pub threshold: f64,
}

// ---------------------------------------------------------------------------
// strip coordinates

fn softplus(z: ComplexValue) -> ComplexValue {
    let one = ComplexValue::new(1.0, 0.0);
    if z.re > 0.0 {
        z + (one + (-z).exp()).ln()
    } else {
        (one + z.exp()).ln()
    }
}

fn w_of_v(v: ComplexValue) -> ComplexValue {
    let one = ComplexValue::new(1.0, 0.0);
    if v.re > -30.0 {
        one / (one + (-v).exp())
    } else {
        v.exp() / (one + v.exp())
    }
}

fn one_minus_w_of_v(v: ComplexValue) -> ComplexValue {
    let one = ComplexValue::new(1.0, 0.0);
    if v.re < 30.0 {
        one / (one + v.exp())
    } else {
        (-v).exp() / (one + (-v).exp())
    }
}

/// Root finder for `G(v) = S` inside the strip `0 < Im v < pi`.
#[derive(Debug, Clone, Copy)]
struct StripSolver {
    a: f64,
    b: f64,
}

impl StripSolver {
    fn new(big_n: usize, n: usize) -> Self {
        StripSolver { a: (big_n - n) as f64, b: n as f64 }
    }

    fn g(&self, v: ComplexValue) -> ComplexValue {
        -softplus(-v) * self.a - softplus(v) * self.b
    }

    fn dg(&self, v: ComplexValue) -> ComplexValue {
        one_minus_w_of_v(v) * self.a - w_of_v(v) * self.b
    }

    fn newton(&self, mut v: ComplexValue, s: ComplexValue, maxit: usize) -> Option<ComplexValue> {
        for _ in 0..maxit {
            let f = self.g(v) - s;
            if f.norm() <= 1e-15 * (1.0 + s.norm()) {
                return Some(v);
            }
            let d = f / self.dg(v);
            let mut lam = 1.0;
            loop {
                let vn = v - d * lam;
                if vn.im > 0.0 && vn.im < PI && (self.g(vn) - s).norm() < f.norm() * (1.0 - 1e-4 * lam) {
                    v = vn;
                    break;
                }
                lam *= 0.5;
                if lam < 1e-14 {
                    return if f.norm() < 1e-11 * (1.0 + s.norm()) { Some(v) } else { None };
                }
            }
        }
        None
    }

    /// Point on the top edge `Im v = pi` where `Re G` matches `Re S`.
    fn boundary_start(&self, s: ComplexValue) -> ComplexValue {
        let sgn = if s.im > 0.0 { -1.0 } else { 1.0 };
        let top = PI * (1.0 - 1e-15);
        let f = |a: f64| self.g(ComplexValue::new(sgn * a, top)).re - s.re;
        let (mut lo, mut hi) = (1e-300_f64, 1.0_f64);
        while f(hi) > 0.0 && hi < 1e300 {
            hi *= 2.0;
        }
        for _ in 0..2000 {
            let m = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if f(m) > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        ComplexValue::new(sgn * 0.5 * (lo + hi), PI)
    }

    fn solve(&self, s: ComplexValue) -> Result<ComplexValue> {
        let top = PI * (1.0 - 1e-15);
        let v0 = self.boundary_start(s);
        let s0 = self.g(ComplexValue::new(v0.re, top));
        let mut guess = if v0.re != 0.0 { v0 - (self.g(v0) - s) / self.dg(v0) } else { v0 };
        guess.im = guess.im.clamp(1e-300, top);
        if let Some(v) = self.newton(guess, s, 100) {
            return Ok(v);
        }
        let mut steps = 4;
        while steps < 1 << 14 {
            let mut v = Some(ComplexValue::new(v0.re, PI * (1.0 - 1e-12)));
            for k in 1..=steps {
                let target = ComplexValue::new(s.re, s0.im + (s.im - s0.im) * k as f64 / steps as f64);
                v = v.and_then(|v| self.newton(v, target, 30));
                if v.is_none() {
                    break;
                }
            }
            if let Some(v) = v {
                return Ok(v);
            }
            steps *= 2;
        }
        Err(Error::NonConvergence(format!("strip solve failed for G(v) = {s}")))
    }

    /// Root on curve `m` (odd, `-n < m < N-n`) in the upper half plane.
    fn root_on_curve(&self, log_abs_y: f64, m: i64) -> Result<ComplexValue> {
        Ok(w_of_v(self.solve(ComplexValue::new(log_abs_y, m as f64 * PI))?))
    }
}

/// `n^n (N-n)^(N-n) / N^N`, the level at which the oval pinches.
pub fn component_threshold(big_n: usize, n: usize) -> f64 {
    component_log_threshold(big_n, n).exp()
}

fn component_log_threshold(big_n: usize, n: usize) -> f64 {
    let (bn, nn) = (big_n as f64, n as f64);
    let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    xlogx(nn) + xlogx(bn - nn) - xlogx(bn)
}

fn check_sizes(big_n: usize, n: usize) -> Result<()> {
    if big_n == 0 || n == 0 || n >= big_n {
        return Err(Error::InvalidParameter(format!("need 0 < n < N, got N = {big_n}, n = {n}")));
    }
    if big_n % 2 == 1 || n % 2 == 1 {
        return Err(Error::InvalidParameter(format!("N and n must be even, got N = {big_n}, n = {n}")));
    }
    Ok(())
}

/// Odd curve labels `m` of the upper-half-plane roots.
fn upper_labels(big_n: usize, n: usize) -> impl Iterator<Item = i64> {
    let (bn, nn) = (big_n as i64, n as i64);
    (-nn + 1..bn - nn).step_by(2)
}

/// Every root of `w^(N-n) (1-w)^n = y`, one per phase curve.
pub fn cassini_roots(big_n: usize, n: usize, y: f64) -> Result<CassiniRoots> {
    check_sizes(big_n, n)?;
    if !(y < 0.0) {
        return Err(Error::InvalidParameter(format!("y must be negative, got {y}")));
    }
    let solver = StripSolver::new(big_n, n);
    let ly = (-y).ln();
    let mut roots = Vec::with_capacity(big_n);
    for m in upper_labels(big_n, n) {
        let w = solver.root_on_curve(ly, m)?;
        let res = root_residual(w, big_n, n, ly);
        if res > 1e-10 {
            return Err(Error::NonConvergence(format!("curve {m}: residual {res:e}")));
        }
        roots.push(w);
        roots.push(w.conj());
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let log_thr = component_log_threshold(big_n, n);
    Ok(CassiniRoots { roots, two_components: ly < log_thr, threshold: log_thr.exp() })
}

/// Relative residual `|w^(N-n) (1-w)^n / y - 1|` evaluated in log form.
pub fn root_residual(w: ComplexValue, big_n: usize, n: usize, log_abs_y: f64) -> f64 {
    let one = ComplexValue::new(1.0, 0.0);
    let lg = w.ln() * (big_n - n) as f64 + (one - w).ln() * n as f64;
    let d = lg - ComplexValue::new(log_abs_y, PI);
    let im = (d.im + PI).rem_euclid(2.0 * PI) - PI;
    (ComplexValue::new(d.re, im).exp() - one).norm()
}

/// The `n` roots that carry the leading eigenvalue: largest real parts for `r < 1`,
/// smallest for `r > 1`.
pub fn select_roots(roots: &[ComplexValue], n: usize, regime: Regime) -> Result<Vec<ComplexValue>> {
    if n > roots.len() {
        return Err(Error::InvalidParameter(format!("cannot select {n} of {} roots", roots.len())));
    }
    let mut sorted = roots.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re));
    let (chosen, cut) = match regime {
        Regime::Small => {
            let k = sorted.len() - n;
            (sorted[k..].to_vec(), if k > 0 { Some((sorted[k - 1].re, sorted[k].re)) } else { None })
        }
        Regime::Large => {
            (sorted[..n].to_vec(), if n < sorted.len() { Some((sorted[n - 1].re, sorted[n].re)) } else { None })
        }
    };
    if let Some((a, b)) = cut {
        if (b - a).abs() < TIE_TOL {
            return Err(Error::Degenerate(format!("real parts {a} and {b} tie at the selection cut")));
        }
    }
    Ok(chosen)
}

/// Selected upper-half-plane roots directly from their curve labels.
fn selected_upper(solver: &StripSolver, big_n: usize, n: usize, regime: Regime, ly: f64) -> Result<Vec<ComplexValue>> {
    let half = n / 2;
    let labels: Vec<i64> = match regime {
        Regime::Small => (0..half as i64).map(|j| -1 - 2 * j).collect(),
        Regime::Large => {
            let top = (big_n - n) as i64 - 1;
            (0..half as i64).map(|j| top - 2 * j).collect()
        }
    };
    labels.into_iter().map(|m| solver.root_on_curve(ly, m)).collect()
}

fn consistency_gap(ws: &[ComplexValue], n: usize, target: f64) -> f64 {
    2.0 * ws.iter().map(|w| w.norm().ln()).sum::<f64>() / n as f64 - target
}

/// Solve the consistency relation `(1/n) sum log|w_j| = -log(|1-r^2| e^Y)` for `y < 0`.
pub fn solve_consistency(big_n: usize, n: usize, params: ModelParams) -> Result<BetheSolution> {
    check_sizes(big_n, n)?;
    let regime = params.regime()?;
    if params.y >= params.y_ceiling() {
        return Err(Error::Range(format!(
            "Y = {} is at or above the attainable bound {}",
            params.y,
            params.y_ceiling()
        )));
    }
    let r2 = params.r * params.r;
    let target = -((1.0 - r2).abs().ln() + params.y);
    let solver = StripSolver::new(big_n, n);
    let gap = |ly: f64| -> Result<f64> {
        Ok(consistency_gap(&selected_upper(&solver, big_n, n, regime, ly)?, n, target))
    };
    let mut lo = -2.0 * big_n as f64;
    let mut hi = 2.0 * big_n as f64;
    let mut guard = 0;
    while gap(lo)? > 0.0 {
        lo *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::Range("no lower bracket for log|y|".into()));
        }
    }
    while gap(hi)? < 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::Range("no upper bracket for log|y|".into()));
        }
    }
    let mut failure = None;
    let ly = brent(
        |ly| match gap(ly) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-14 * big_n as f64,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let ly = ly?;
    let upper = selected_upper(&solver, big_n, n, regime, ly)?;
    let residual = consistency_gap(&upper, n, target).abs();
    let mut roots: Vec<ComplexValue> = upper.iter().flat_map(|w| [*w, w.conj()]).collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut sol = BetheSolution {
        big_n,
        n,
        log_abs_y: ly,
        y: -ly.exp(),
        roots,
        log_lambda: 0.0,
        lambda: 0.0,
        consistency_residual: residual,
    };
    sol.log_lambda = log_eigenvalue(&sol, params);
    sol.lambda = sol.log_lambda.exp();
    Ok(sol)
}

/// `log Lambda` in the reduced absolute-value form.
pub fn log_eigenvalue(sol: &BetheSolution, params: ModelParams) -> f64 {
    let (bn, nn) = (sol.big_n as f64, sol.n as f64);
    let r2 = params.r * params.r;
    let a = 1.0 - r2;
    let lt = sol.log_abs_y - nn * r2.ln() + bn * a.abs().ln();
    let term = if lt < 30.0 { lt.exp().ln_1p() } else { lt + (-lt).exp().ln_1p() };
    let one = ComplexValue::new(1.0, 0.0);
    let prod: f64 = sol.roots.iter().map(|w| (r2 / (one - *w * a).norm()).ln()).sum();
    params.x * nn + params.y * (bn - nn) + term + prod
}

/// Leading eigenvalue of the block; may overflow to infinity for large `N`.
pub fn eigenvalue(sol: &BetheSolution, params: ModelParams) -> f64 {
    log_eigenvalue(sol, params).exp()
}

/// Eigenvalue from the product form
/// `e^(Xn) a^n [prod (1-w)/(1-aw) + e^(YN) prod r^2 w/(1-aw)]` with `a = 1-r^2`.
pub fn eigenvalue_product_form(roots: &[ComplexValue], big_n: usize, params: ModelParams) -> ComplexValue {
    let n = roots.len();
    let r2 = params.r * params.r;
    let a = 1.0 - r2;
    let one = ComplexValue::new(1.0, 0.0);
    let mut p1 = one;
    let mut p2 = one;
    for w in roots {
        let den = one - *w * a;
        p1 *= (one - *w) / den;
        p2 *= *w * r2 / den;
    }
    (p1 + p2 * (params.y * big_n as f64).exp()) * (params.x * n as f64).exp() * a.powi(n as i32)
}

/// Leading eigenvalue of block `n`, including the closed-form blocks `n = 0` and `n = N`.
pub fn leading_log_eigenvalue(big_n: usize, n: usize, params: ModelParams) -> Result<f64> {
    let bn = big_n as f64;
    if n == 0 {
        let ly = params.y * bn;
        return Ok(if ly > 0.0 { ly + (-ly).exp().ln_1p() } else { ly.exp().ln_1p() });
    }
    if n == big_n {
        return Ok(params.x * bn);
    }
    Ok(solve_consistency(big_n, n, params)?.log_lambda)
}

/// Circulant eigenvalues of the one-path block,
/// `e^X (1 + r^2 e^Y / (omega - e^Y) + e^(YN) omega r^2 / (e^Y - omega))`.
pub fn one_path_spectrum(big_n: usize, params: ModelParams) -> Vec<ComplexValue> {
    let ey = params.y.exp();
    let r2 = params.r * params.r;
    let eyn = (params.y * big_n as f64).exp();
    (0..big_n)
        .map(|j| {
            let om = ComplexValue::from_polar(1.0, 2.0 * PI * j as f64 / big_n as f64);
            (ComplexValue::new(1.0, 0.0) + r2 * ey / (om - ey) + om * r2 * eyn / (ey - om)) * params.x.exp()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// dense oracle

/// One block `T_n` of the row transfer matrix, indexed by row configurations.
#[derive(Debug, Clone)]
pub struct TransferBlock {
    pub big_n: usize,
    pub n: usize,
    pub configs: Vec<RowConfig>,
    pub matrix: DMatrix<f64>,
}

fn vertex_weight(south: u8, east: u8, north: u8, west: u8, params: ModelParams) -> f64 {
    match (south, east, north, west) {
        (0, 0, 0, 0) => 1.0,
        (1, 0, 1, 0) => params.x.exp(),
        (0, 1, 0, 1) => params.y.exp(),
        (1, 0, 0, 1) | (0, 1, 1, 0) => params.r * (0.5 * (params.x + params.y)).exp(),
        _ => 0.0,
    }
}

/// Dense block `T_n` by enumerating the horizontal edges of one row.
pub fn transfer_matrix_oracle(big_n: usize, n: usize, params: ModelParams) -> Result<TransferBlock> {
    if big_n == 0 || big_n > ORACLE_MAX_N {
        return Err(Error::Size(format!("oracle supports 1 <= N <= {ORACLE_MAX_N}, got {big_n}")));
    }
    if n > big_n {
        return Err(Error::InvalidParameter(format!("n = {n} exceeds N = {big_n}")));
    }
    let configs: Vec<RowConfig> = (0u32..1 << big_n)
        .map(|occupancy| RowConfig { occupancy })
        .filter(|c| c.count() as usize == n)
        .collect();
    let dim = configs.len();
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut horiz = vec![0u8; big_n];
    for (i, lower) in configs.iter().enumerate() {
        for (j, upper) in configs.iter().enumerate() {
            let mut total = 0.0;
            for last in 0..2u8 {
                // horiz[k] is the edge east of column k; the edge west of column 0 wraps to horiz[N-1]
                horiz[big_n - 1] = last;
                let mut ok = true;
                for k in (0..big_n).rev() {
                    let west = lower.bit(k) as i32 + horiz[k] as i32 - upper.bit(k) as i32;
                    if !(0..=1).contains(&west) {
                        ok = false;
                        break;
                    }
                    if k > 0 {
                        horiz[k - 1] = west as u8;
                    } else if west as u8 != last {
                        ok = false;
                    }
                }
                if !ok {
                    continue;
                }
                let mut wgt = 1.0;
                for k in 0..big_n {
                    let west = if k == 0 { horiz[big_n - 1] } else { horiz[k - 1] };
                    wgt *= vertex_weight(lower.bit(k), horiz[k], upper.bit(k), west, params);
                }
                total += wgt;
            }
            matrix[(i, j)] = total;
        }
    }
    Ok(TransferBlock { big_n, n, configs, matrix })
}

impl TransferBlock {
    /// Perron eigenvalue by power iteration.
    pub fn leading_eigenvalue(&self) -> Result<f64> {
        let dim = self.matrix.nrows();
        if dim == 1 {
            return Ok(self.matrix[(0, 0)]);
        }
        let t = self.matrix.transpose();
        let mut v = nalgebra::DVector::from_element(dim, 1.0 / (dim as f64).sqrt());
        let mut lam = 0.0;
        for _ in 0..200_000 {
            let tv = &t * &v;
            let norm = tv.norm();
            if norm == 0.0 {
                return Err(Error::Degenerate("transfer block annihilates the start vector".into()));
            }
            lam = v.dot(&tv);
            let res = (&tv - &v * lam).norm() / lam.abs();
            v = tv / norm;
            if res < 1e-14 {
                return Ok(lam);
            }
        }
        Err(Error::NonConvergence(format!("power iteration stalled at {lam}")))
    }

    pub fn spectrum(&self) -> Vec<ComplexValue> {
        self.matrix.complex_eigenvalues().iter().copied().collect()
    }
}

// ---------------------------------------------------------------------------
// completeness

/// Result of matching Bethe eigenvalues against the dense spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub big_n: usize,
    pub n: usize,
    pub subsets: usize,
    pub solved: usize,
    pub failures: Vec<Vec<usize>>,
    /// Largest matched distance relative to the spectral radius.
    pub max_distance: f64,
    pub bethe_eigenvalues: Vec<ComplexValue>,
}

struct LabelledRoot {
    w: ComplexValue,
    one_minus_w: ComplexValue,
    dg: ComplexValue,
}

fn labelled_root(solver: &StripSolver, big_n: usize, n: usize, l: ComplexValue, k: usize) -> Result<LabelledRoot> {
    let (bn, nn) = (big_n as f64, n as f64);
    let t_full = l.im + 2.0 * PI * k as f64;
    let t = (t_full + nn * PI).rem_euclid(2.0 * bn * PI) - nn * PI;
    if t < (bn - nn) * PI {
        let v = solver.solve(ComplexValue::new(l.re, t))?;
        Ok(LabelledRoot { w: w_of_v(v), one_minus_w: one_minus_w_of_v(v), dg: solver.dg(v) })
    } else {
        let v = solver.solve(ComplexValue::new(l.re, -(t - 2.0 * PI * (bn - nn))))?;
        Ok(LabelledRoot {
            w: w_of_v(v).conj(),
            one_minus_w: one_minus_w_of_v(v).conj(),
            dg: solver.dg(v).conj(),
        })
    }
}

/// Eigenvalue attached to a choice of `n` phase curves, or `None` if the solve fails.
fn subset_eigenvalue(
    solver: &StripSolver,
    subset: &[usize],
    big_n: usize,
    n: usize,
    params: ModelParams,
) -> Option<ComplexValue> {
    let r2 = params.r * params.r;
    let a = 1.0 - r2;
    let log_a = ComplexValue::new(a, 0.0).ln() + params.y;
    let i_pi = ComplexValue::new(0.0, PI);
    let phi = |l: ComplexValue| -> Result<(ComplexValue, ComplexValue, Vec<LabelledRoot>)> {
        let roots: Vec<LabelledRoot> = subset
            .iter()
            .map(|&k| labelled_root(solver, big_n, n, l, k))
            .collect::<Result<_>>()?;
        let mut log_amp = i_pi - log_a * big_n as f64;
        let mut dphi = ComplexValue::new(-1.0, 0.0);
        for rt in &roots {
            log_amp += rt.one_minus_w.ln() - rt.w.ln() + i_pi;
            let one = ComplexValue::new(1.0, 0.0);
            dphi += (one / (rt.w - one) - one / rt.w) * rt.w * rt.one_minus_w / rt.dg;
        }
        let mut p = log_amp - l;
        p.im = (p.im + PI).rem_euclid(2.0 * PI) - PI;
        Ok((p, dphi, roots))
    };
    let re_phi = |x: f64| phi(ComplexValue::new(x, PI)).map(|p| p.0.re).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (-2.0 * big_n as f64, 2.0 * big_n as f64);
    for _ in 0..40 {
        if re_phi(lo) > 0.0 {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..40 {
        if re_phi(hi) < 0.0 {
            break;
        }
        hi *= 2.0;
    }
    let x0 = brent(re_phi, lo, hi, 1e-12).ok()?;
    let mut l = ComplexValue::new(x0, PI);
    for _ in 0..80 {
        let (p, dp, roots) = phi(l).ok()?;
        if p.norm() < 1e-12 {
            let ws: Vec<ComplexValue> = roots.iter().map(|r| r.w).collect();
            return Some(eigenvalue_product_form(&ws, big_n, params));
        }
        l -= p / dp;
    }
    None
}

fn combinations(big_n: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    if n == 0 {
        return vec![vec![]];
    }
    loop {
        out.push(cur.clone());
        let mut i = n;
        while i > 0 && cur[i - 1] == big_n - n + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..n {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Greedy nearest matching of `a` into `b`; returns the largest matched distance.
pub fn multiset_distance(a: &[ComplexValue], b: &[ComplexValue]) -> f64 {
    let mut rem: Vec<ComplexValue> = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        if rem.is_empty() {
            return f64::INFINITY;
        }
        let (j, d) = rem
            .iter()
            .enumerate()
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(d);
        rem.swap_remove(j);
    }
    worst
}

/// Solve the Bethe equations for every choice of `n` of the `N` phase curves and match the
/// resulting eigenvalues against the dense spectrum of `T_n`.
pub fn spectrum_completeness(big_n: usize, n: usize, params: ModelParams) -> Result<CompletenessReport> {
    if big_n > COMPLETENESS_MAX_N {
        return Err(Error::Size(format!("completeness supports N <= {COMPLETENESS_MAX_N}")));
    }
    check_sizes(big_n, n)?;
    params.regime()?;
    let block = transfer_matrix_oracle(big_n, n, params)?;
    let spectrum = block.spectrum();
    let solver = StripSolver::new(big_n, n);
    let subsets = combinations(big_n, n);
    let mut bethe = Vec::with_capacity(subsets.len());
    let mut failures = Vec::new();
    for s in &subsets {
        match subset_eigenvalue(&solver, s, big_n, n, params) {
            Some(l) => bethe.push(l),
            None => failures.push(s.clone()),
        }
    }
    let scale = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_distance = multiset_distance(&bethe, &spectrum) / scale;
    Ok(CompletenessReport {
        big_n,
        n,
        subsets: subsets.len(),
        solved: bethe.len(),
        failures,
        max_distance,
        bethe_eigenvalues: bethe,
    })
}

// ---------------------------------------------------------------------------
// Mahler measure

/// `sum_{|z|>R} log|z| + sum_{|z|<R} log R`, the circle average of `log|q|` for monic `q`.
pub fn mahler_integral(poly_roots: &[ComplexValue], radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {radius}")));
    }
    let mut acc = 0.0;
    for z in poly_roots {
        let m = z.norm();
        if (m - radius).abs() <= 1e-12 * radius {
            return Err(Error::Degenerate(format!("root {z} lies on the circle of radius {radius}")));
        }
        acc += if m > radius { m.ln() } else { radius.ln() };
    }
    Ok(acc)
}

/// Machine-readable comparison of a Bethe eigenvalue with the dense oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub r: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    pub lambda_bethe: f64,
    pub lambda_oracle: f64,
    pub rel_err: f64,
}

/// Compare the Bethe leading eigenvalue of block `n` with power iteration on the dense block.
pub fn verify_against_oracle(big_n: usize, n: usize, params: ModelParams) -> Result<VerificationRecord> {
    let bethe = leading_log_eigenvalue(big_n, n, params)?.exp();
    let oracle = transfer_matrix_oracle(big_n, n, params)?.leading_eigenvalue()?;
    Ok(VerificationRecord {
        big_n,
        n,
        r: params.r,
        x: params.x,
        y: params.y,
        lambda_bethe: bethe,
        lambda_oracle: oracle,
        rel_err: (bethe - oracle).abs() / oracle.abs(),
    })
}
