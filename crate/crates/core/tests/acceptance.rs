//! Acceptance criteria, one line per criterion.
//!
//! Run with `cargo test --release -p fivevertex --test acceptance`. Numeric arguments select
//! criteria, e.g. `-- 3 5`. A criterion whose only failing checks are listed deviations prints
//! `FAIL (documented deviation)` and does not change the exit status; any other failure exits 1.

use std::time::Instant;

use fivevertex::bethe::{
    cassini_roots, component_threshold, leading_log_eigenvalue, one_path_spectrum, select_roots,
    spectrum_completeness, transfer_matrix_oracle, multiset_distance, verify_against_oracle, ModelParams, Regime,
};
use fivevertex::identities::identity_suite;
use fivevertex::limitshape::{
    arctic_boundary, distance_to_polygon, interior_map, piece_grid, point_in_polygon, BoundaryFunction, BppBoundary,
    BppShape, FacetHeights, Piece, HEXAGON, polygon_area,
};
use fivevertex::mcmc::{sample_mean_height, stationary_check, ChainConfig, HexDomain};
use fivevertex::numeric::golden_max;
use fivevertex::thermo::{free_energy, microcanonical_f, surface_tension, tension_gradient, two_component_threshold, SlopePoint};
use fivevertex::{ComplexValue, Result};

struct Check {
    label: String,
    pass: bool,
    documented: bool,
    detail: String,
}

impl Check {
    fn new(label: &str, pass: bool, detail: String) -> Self {
        Check { label: label.into(), pass, documented: false, detail }
    }

    fn deviation(label: &str, pass: bool, detail: String) -> Self {
        Check { label: label.into(), pass, documented: true, detail }
    }
}

fn p(r: f64, x: f64, y: f64) -> ModelParams {
    ModelParams::new(r, x, y).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn c1() -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for big_n in [4usize, 6, 8] {
        for n in (2..=big_n).step_by(2) {
            for r in [0.5, 0.7, 1.3] {
                for x in [-1.0, 0.0, 1.0] {
                    for y in [-1.0, 0.0, 1.0] {
                        let prm = p(r, x, y);
                        if y >= prm.y_ceiling() {
                            continue;
                        }
                        worst = worst.max(verify_against_oracle(big_n, n, prm)?.rel_err);
                        cases += 1;
                    }
                }
            }
        }
    }
    Ok(vec![Check::new("leading eigenvalue", worst < 1e-9, format!("{cases} cases, max rel err {worst:.2e}"))])
}

fn c2() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in [2usize, 4] {
        for r in [0.7, 1.3] {
            let prm = p(r, 0.2, -0.3);
            let rep = spectrum_completeness(8, n, prm)?;
            let scale = transfer_matrix_oracle(8, n, prm)?.spectrum().iter().map(|z| z.norm()).fold(0.0, f64::max);
            let abs = rep.max_distance * scale;
            let ok = rep.failures.is_empty() && rep.solved == rep.subsets && abs < 1e-6;
            out.push(Check::new(
                &format!("n={n} r={r}"),
                ok,
                format!("{}/{} solved, max distance {abs:.1e}", rep.solved, rep.subsets),
            ));
        }
    }
    Ok(out)
}

fn c3() -> Result<Vec<Check>> {
    let (mut e0, mut en, mut e1): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for big_n in [4usize, 6, 8, 10] {
        for (r, x, y) in [(0.6, 0.3, -0.4), (1.4, -0.5, 0.2), (0.9, 1.0, -1.0)] {
            let prm = p(r, x, y);
            let t0 = transfer_matrix_oracle(big_n, 0, prm)?.spectrum();
            e0 = e0.max(rel(t0[0].re, 1.0 + (y * big_n as f64).exp()) + t0[0].im.abs());
            let tn = transfer_matrix_oracle(big_n, big_n, prm)?.spectrum();
            en = en.max(rel(tn[0].re, (x * big_n as f64).exp()) + tn[0].im.abs());
            let t1 = transfer_matrix_oracle(big_n, 1, prm)?.spectrum();
            let closed = one_path_spectrum(big_n, prm);
            let scale = t1.iter().map(|z| z.norm()).fold(0.0, f64::max);
            e1 = e1.max(multiset_distance(&closed, &t1).max(multiset_distance(&t1, &closed)) / scale);
        }
    }
    let tol = 1e-12;
    Ok(vec![
        Check::new("T0", e0 < tol, format!("{e0:.1e}")),
        Check::new("TN", en < tol, format!("{en:.1e}")),
        Check::new("T1 circulant", e1 < tol, format!("{e1:.1e}")),
    ])
}

fn c4() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (r, y) in [(0.6, -2.0), (1.3, 0.0)] {
        let x = 0.3;
        let prm = p(r, x, y);
        let limit = x * 0.5 + microcanonical_f(0.5, y, prm)?;
        let mut errs = Vec::new();
        for big_n in [40usize, 80, 160, 320] {
            errs.push((leading_log_eigenvalue(big_n, big_n / 2, prm)? / big_n as f64 - limit).abs());
        }
        let mono = errs.windows(2).all(|w| w[1] < w[0]);
        let last = errs[3];
        out.push(Check::new(
            &format!("r={r} Y={y}"),
            mono && last < 2e-3,
            format!("errors {}", errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")),
        ));
    }
    Ok(out)
}

fn c5() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut worst: f64 = 0.0;
    for r in [0.5, 0.8] {
        let ceiling = -(1.0f64 - r * r).ln();
        for x in [-1.0, 0.0, 0.3, 1.0, 2.0] {
            // approach the ceiling from below so the generic branch is exercised
            let f = free_energy(p(r, x, ceiling - 1e-8))?.value;
            worst = worst.max((f - ceiling.max(x)).abs());
        }
    }
    out.push(Check::new("F on the Y ceiling", worst < 1e-6, format!("max err {worst:.1e}")));

    let r = 1.3;
    let thr = two_component_threshold(r);
    let mut worst: f64 = 0.0;
    let mut finite = String::new();
    for y in [thr + 0.2, thr + 1.0, thr + 3.0] {
        let fm = microcanonical_f(0.5, y, p(r, 0.0, y))?;
        worst = worst.max((fm - 0.5 * y).abs());
        if finite.is_empty() {
            let big_n = 320;
            let fin = leading_log_eigenvalue(big_n, big_n / 2, p(r, 0.0, y))? / big_n as f64;
            finite = format!(
                "; at Y={y:.3}: F_m={fm:.6}, Y/2={:.6}, N=320 Bethe {fin:.6}, Y/2+log r={:.6}",
                0.5 * y,
                0.5 * y + r.ln()
            );
        }
    }
    out.push(Check::deviation(
        "F_m(1/2,Y)=Y/2, r>1 two-component",
        worst < 1e-6,
        format!("max |F_m - Y/2| {worst:.4}{finite}"),
    ));

    let mut worst: f64 = 0.0;
    for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let delta = 1e-9;
        let sigma = surface_tension(SlopePoint::new(s, 1.0 - s - delta)?, p(r, 0.0, 0.0))?;
        let edge = s.min(1.0 - s) * 2.0 * r.ln();
        worst = worst.max((-sigma - edge).abs());
    }
    out.push(Check::new(
        "minus sigma on s+t=1, r>1 (interior limit)",
        worst < 1e-6,
        format!("max err {worst:.1e}"),
    ));
    Ok(out)
}

fn c6() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for r in [0.8, 1.3] {
        let ceiling = p(r, 0.0, 0.0).y_ceiling();
        let mut worst: f64 = 0.0;
        for s in [0.2, 0.3, 0.4] {
            for t in [0.2, 0.3, 0.4] {
                let st = SlopePoint::new(s, t)?;
                let sigma = surface_tension(st, p(r, 0.0, 0.0))?;
                let (x0, y0) = tension_gradient(st, p(r, 0.0, 0.0))?;
                let g = |x: f64, y: f64| -> f64 {
                    match free_energy(p(r, x, y)) {
                        Ok(f) => f.value - s * x - t * y,
                        Err(_) => f64::INFINITY,
                    }
                };
                // F is convex, so F - sX - tY has a finite infimum and no finite maximum
                let inner = |x: f64| -> f64 {
                    let hi = (y0 + 0.5).min(ceiling - 1e-9);
                    -golden_max(|y| -g(x, y), y0 - 0.5, hi, 1e-7).1
                };
                let (_, best) = golden_max(|x| -inner(x), x0 - 0.5, x0 + 0.5, 1e-7);
                worst = worst.max((-sigma - (-best)).abs());
            }
        }
        out.push(Check::new(&format!("r={r} (infimum over X,Y)"), worst < 1e-5, format!("max err {worst:.1e}")));
    }
    Ok(out)
}

fn c7() -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    let h = 1e-5;
    for r in [0.8, 1.3] {
        let prm = p(r, 0.0, 0.0);
        let sig = |s: f64, t: f64| surface_tension(SlopePoint::new(s, t).unwrap(), prm).unwrap();
        for s in [0.15, 0.25, 0.35, 0.45] {
            for t in [0.15, 0.25, 0.35] {
                let (gx, gy) = tension_gradient(SlopePoint::new(s, t)?, prm)?;
                let ds = (sig(s + h, t) - sig(s - h, t)) / (2.0 * h);
                let dt = (sig(s, t + h) - sig(s, t - h)) / (2.0 * h);
                worst = worst.max((ds - gx).abs()).max((dt - gy).abs());
            }
        }
    }
    Ok(vec![Check::new("dsigma vs (X, Y)", worst < 1e-4, format!("max err {worst:.1e}"))])
}

fn quadratic_display(piece: Piece, p: f64, r2: f64) -> (f64, f64) {
    match piece {
        Piece::Constant => {
            let d = p * p - 2.0 * p + r2;
            ((r2 - 2.0 * p) * (1.0 - p).powi(2) / (r2 * d), -p * p * (p - r2).powi(2) / (r2 * r2 * d))
        }
        Piece::SlopeY => ((1.0 - 2.0 * p) / r2, -p * p / r2),
        Piece::Middle => ((r2 - 3.0 * p + 1.0) / r2, -p.powi(3) / (r2 * r2)),
        Piece::SlopeX => (1.0 - 2.0 * p / r2, -p * p / (r2 * r2)),
    }
}

fn c8() -> Result<Vec<Check>> {
    let r = 0.7f64;
    let r2 = r * r;
    let prm = p(r, 0.0, 0.0);
    let g = BoundaryFunction::quadratic(r);
    let mut grid = Vec::new();
    for piece in Piece::ALL {
        let (lo, hi) = piece.interval(r);
        let (lo, hi) = (lo.max(-10.0), hi.min(11.0));
        grid.extend((1..=100).map(|k| lo + (hi - lo) * k as f64 / 101.0));
    }
    let cv = arctic_boundary(&g, prm, &grid, FacetHeights::all_zero())?;
    let mut worst: f64 = 0.0;
    for s in &cv.samples {
        let (x, y) = quadratic_display(s.piece, s.p, r2);
        worst = worst.max(((s.x - x).abs() + (s.y - y).abs()) / (1.0 + x.abs() + y.abs()));
    }
    let mut eps_worst: f64 = 0.0;
    for piece in Piece::ALL {
        for pv in piece_grid(piece, r, 12) {
            if pv.abs() > 10.0 {
                continue;
            }
            let s = interior_map(&g, ComplexValue::new(pv, 1e-4), prm)?;
            let (x, y) = quadratic_display(piece, pv, r2);
            eps_worst = eps_worst.max((s.x - x).abs().max((s.y - y).abs()));
        }
    }
    Ok(vec![
        Check::new(
            "displays, 4 x 100 points",
            worst < 1e-10 && cv.samples.len() == 400,
            format!("max err {worst:.1e} (relative to 1+|x|+|y|)"),
        ),
        Check::new("interior limit at eps=1e-4", eps_worst < 1e-4, format!("max err {eps_worst:.1e}")),
    ])
}

fn c9() -> Result<Vec<Check>> {
    let hex = polygon_area(&HEXAGON).abs();
    let mut seq = Vec::new();
    for r in [0.99, 0.7, 0.5, 0.4, 0.34] {
        seq.push((r, BppBoundary::new(p(r, 0.0, 0.0), 400)?.area() / hex));
    }
    let last = seq[seq.len() - 1].1;
    let shrinking = seq.windows(2).all(|w| w[1].1 < w[0].1);
    let detail = seq.iter().map(|(r, a)| format!("{r}:{:.1}%", 100.0 * a)).collect::<Vec<_>>().join(" ");
    let count = |r: f64| -> Result<usize> { Ok(BppBoundary::new(p(r, 0.0, 0.0), 200)?.component_count()) };
    let (mut lo, mut hi) = (2.5, 3.5);
    let ends = (count(lo)?, count(hi)?);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if count(mid)? == 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let at = 0.5 * (lo + hi);
    Ok(vec![
        Check::deviation(
            "area below 1% at r=0.34",
            last < 0.01 && shrinking,
            format!("area/hexagon by r {detail}"),
        ),
        Check::new(
            "component count 1 -> 2 near r=3",
            ends == (1, 2) && (at - 3.0).abs() <= 0.05,
            format!("counts {ends:?} at 2.5/3.5, transition at r={at:.3}"),
        ),
    ])
}

fn c10() -> Result<Vec<Check>> {
    let rep = identity_suite(20_240_601, 1000)?;
    Ok(rep
        .checks
        .iter()
        .map(|ch| Check::new(&ch.name, ch.passed, format!("{:.1e} <= {:.0e}", ch.max_residual, ch.tolerance)))
        .collect())
}

fn c11() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (big_n, n) in [(16usize, 4usize), (20, 10)] {
        let log_thr = component_threshold(big_n, n).ln();
        for regime in [Regime::Small, Regime::Large] {
            let mut prods = Vec::new();
            for k in 0..50 {
                let ly = log_thr - 10.0 + 20.0 * k as f64 / 49.0;
                let all = cassini_roots(big_n, n, -ly.exp())?.roots;
                let chosen = select_roots(&all, n, regime)?;
                prods.push(chosen.iter().map(|w| w.norm().ln()).sum::<f64>());
            }
            let inc = prods.windows(2).all(|w| w[1] > w[0]);
            out.push(Check::new(&format!("N={big_n} n={n} {regime:?}"), inc, "50 levels".into()));
        }
    }
    Ok(out)
}

fn c12() -> Result<Vec<Check>> {
    let n = 64;
    let r = 0.7;
    let dom = HexDomain::new(n)?;
    let cfg = ChainConfig::with_defaults(r, n, 1_000_000, 42);
    let t = Instant::now();
    let field = sample_mean_height(&dom, &cfg)?;
    let mc_time = t.elapsed().as_secs_f64();
    let prm = p(r, 0.0, 0.0);
    let poly = BppBoundary::new(prm, 400)?.polygon();
    let shape = BppShape::new(prm)?;
    let mut faces = Vec::new();
    let mut pts = Vec::new();
    for j in 0..dom.side() {
        for i in 0..dom.side() {
            if !dom.contains(i as isize, j as isize) {
                continue;
            }
            let xy = dom.to_plane(i, j);
            if point_in_polygon(xy, &poly) && distance_to_polygon(xy, &poly) >= 0.1 {
                faces.push((i, j));
                pts.push(xy);
            }
        }
    }
    let (mut worst, mut misses): (f64, usize) = (0.0, 0);
    for (&(i, j), pred) in faces.iter().zip(shape.heights_at(&pts)) {
        match pred {
            Some(s) => worst = worst.max((field.at(i, j) / n as f64 - 0.5 - s.h).abs()),
            None => misses += 1,
        }
    }
    let small = ChainConfig { r, sweeps: 2_000_000, burnin: 1000, seed: 7, thinning: 1 };
    let chk = stationary_check(2, &small)?;
    Ok(vec![
        Check::new(
            "n=64 mean height vs limit shape",
            worst < 0.05 && misses == 0 && !faces.is_empty(),
            format!(
                "{} faces, sup dev {worst:.4} (rescaled), {misses} unpredicted, {} samples, MC {mc_time:.0}s",
                faces.len(),
                field.samples
            ),
        ),
        Check::new(
            "n=2 stationary distribution",
            chk.max_z < 3.0,
            format!("{} states, max |z| {:.2}", chk.exact.len(), chk.max_z),
        ),
    ])
}

type Criterion = (u32, &'static str, fn() -> Result<Vec<Check>>);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "Bethe vs dense oracle", c1),
        (2, "spectrum completeness", c2),
        (3, "closed-form blocks", c3),
        (4, "thermodynamic limit", c4),
        (5, "exact edge values", c5),
        (6, "Legendre duality", c6),
        (7, "tension gradients", c7),
        (8, "quadratic arctic curves", c8),
        (9, "boxed plane partition topology", c9),
        (10, "identity suites", c10),
        (11, "increasing product", c11),
        (12, "Monte Carlo validation", c12),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut hard_failures = 0;
    for (id, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let checks = match f() {
            Ok(c) => c,
            Err(e) => vec![Check::new("evaluation", false, format!("error: {e}"))],
        };
        let failing: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
        let status = if failing.is_empty() {
            "PASS"
        } else if failing.iter().all(|c| c.documented) {
            "FAIL (documented deviation)"
        } else {
            hard_failures += 1;
            "FAIL"
        };
        let parts: Vec<String> = checks
            .iter()
            .map(|c| format!("{} [{}] {}", c.label, if c.pass { "ok" } else { "fail" }, c.detail))
            .collect();
        println!("criterion {id:>2} {name}: {status} ({:.1}s) | {}", t.elapsed().as_secs_f64(), parts.join(" | "));
    }
    if hard_failures > 0 {
        std::process::exit(1);
    }
}
