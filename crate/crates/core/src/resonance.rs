//! Resonance location, band continuation, Bloch–Siegert shifts and band maps.
//!
//! A resonance is a zero of the indicator `d(ω₀)` with `P̄ = (1 − d²)/2`.
//! Sign changes on a scan grid are refined by bisection. A band of order
//! `2n+1` starts at `(n+1)ω₁ − nω₂` (lower branch) or `(n+1)ω₂ − nω₁`
//! (upper branch) in the weak-drive limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DriveParams;
use crate::solvers::{gft_averaged_with, FloquetOptions, FrameSolution, GftOptions, Method};

/// Default `|d|` at which bisection stops early.
pub const D_TOL: f64 = 1e-10;
/// Default final bracket width.
pub const BRACKET_WIDTH: f64 = 1e-7;
/// Default scan density per unit ω₀.
pub const POINTS_PER_UNIT: f64 = 400.0;
/// A point counts as resolved when `P̄ > ½ − RESOLVED_MARGIN`.
pub const RESOLVED_MARGIN: f64 = 1e-4;

/// Drive parameters with `A₂` tied to `A₁` through a fixed ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanTemplate {
    pub params: DriveParams,
    /// When present, `A₂ = r·A₁` at every point; otherwise `A₂` stays fixed.
    pub r: Option<f64>,
}

impl ScanTemplate {
    pub fn new(params: DriveParams) -> Self {
        ScanTemplate { params, r: params.ratio() }
    }

    /// Units of ω₁, `ω₂ = 1 + Δ`, zero phases.
    pub fn with_ratio(a1: f64, r: f64, delta: f64) -> Self {
        ScanTemplate { params: DriveParams::with_ratio(1.0, a1, r, delta), r: Some(r) }
    }

    pub fn at(&self, omega0: f64) -> DriveParams {
        self.params.with_omega0(omega0)
    }

    pub fn with_a1(&self, a1: f64) -> ScanTemplate {
        let mut p = self.params;
        p.a1 = a1;
        if let Some(r) = self.r {
            p.a2 = r * a1;
        }
        ScanTemplate { params: p, r: self.r }
    }
}

/// Which branch of a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Starts at `(n+1)ω₁ − nω₂`.
    Lower,
    /// Starts at `(n+1)ω₂ − nω₁`.
    Upper,
}

/// A band: `n` gives photon order `2n+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BandId {
    pub n: u32,
    pub branch: Branch,
}

impl BandId {
    pub fn photon_order(&self) -> u32 {
        2 * self.n + 1
    }

    /// Weak-drive position of this branch.
    pub fn endpoint(&self, p: &DriveParams) -> f64 {
        let n = self.n as f64;
        let (w1, w2) = (p.omega1, p.omega2);
        let (lo, hi) = if w1 < w2 { (w1, w2) } else { (w2, w1) };
        match self.branch {
            Branch::Lower => (n + 1.0) * lo - n * hi,
            Branch::Upper => (n + 1.0) * hi - n * lo,
        }
    }

    /// `((n+1)ω₁ − nω₂, (n+1)ω₂ − nω₁)`.
    pub fn endpoints(n: u32, p: &DriveParams) -> (f64, f64) {
        let n = n as f64;
        ((n + 1.0) * p.omega1 - n * p.omega2, (n + 1.0) * p.omega2 - n * p.omega1)
    }
}

/// Largest amplitude, in units of ω₁, at which the endpoint rule labels a
/// resonance; stronger drives move bands past neighbouring endpoints.
pub const LABEL_AMPLITUDE: f64 = 0.2;

/// Nearest weak-drive endpoint, or `None` when the point sits closer than a
/// quarter spacing to the midpoint between two endpoints or the drive is
/// stronger than [`LABEL_AMPLITUDE`]. Traced bands carry reliable labels.
pub fn photon_order(p: &DriveParams, omega0: f64) -> Option<u32> {
    if p.a1.max(p.a2) > LABEL_AMPLITUDE * p.omega1 {
        return None;
    }
    let spacing = p.beat().abs();
    let mut best: Option<(f64, u32)> = None;
    for n in 0..200u32 {
        let (a, b) = BandId::endpoints(n, p);
        if a <= 0.0 && b <= 0.0 {
            break;
        }
        for e in [a, b] {
            let dist = (omega0 - e).abs();
            if best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, 2 * n + 1));
            }
        }
    }
    best.filter(|(d, _)| *d < 0.25 * spacing).map(|(_, order)| order)
}

/// One located resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonancePoint {
    pub omega0_star: f64,
    pub a1: f64,
    pub method: Method,
    pub photon_order: Option<u32>,
    pub bracket_width_final: f64,
    /// `d` at `omega0_star`.
    pub d_value: f64,
    /// `P̄(ω₀*) > ½ − 1e-4`; false when the resonance is narrower than double
    /// precision can resolve or the sign change is a level crossing.
    pub resolved: bool,
}

/// A traced band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceBand {
    pub band: BandId,
    pub method: Method,
    pub points: Vec<ResonancePoint>,
    /// `((n+1)ω₁ − nω₂, (n+1)ω₂ − nω₁)`.
    pub endpoints: (f64, f64),
}

/// Evaluation of the indicator on a scan grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub omega0: f64,
    pub d: Option<f64>,
    pub error: Option<String>,
}

/// Knobs shared by the resonance routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOptions {
    pub method: Method,
    pub d_tol: f64,
    pub bracket_width: f64,
    pub floquet: FloquetOptions,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        ResonanceOptions {
            method: Method::Chrw,
            d_tol: D_TOL,
            bracket_width: BRACKET_WIDTH,
            floquet: FloquetOptions::default(),
        }
    }
}

impl ResonanceOptions {
    pub fn method(method: Method) -> Self {
        ResonanceOptions { method, ..ResonanceOptions::default() }
    }
}

/// `d(ω₀)` for the CHRW or RWA backend.
pub fn d_value(t: &ScanTemplate, omega0: f64, opts: &ResonanceOptions) -> Result<f64> {
    let sol = FrameSolution::new(opts.method, &t.at(omega0), &opts.floquet)?;
    Ok(sol.indicator().re)
}

/// `d` on a grid; failures are reported per point.
pub fn d_scan(t: &ScanTemplate, grid: &[f64]) -> Vec<ScanPoint> {
    d_scan_with(t, grid, &ResonanceOptions::default())
}

pub fn d_scan_with(t: &ScanTemplate, grid: &[f64], opts: &ResonanceOptions) -> Vec<ScanPoint> {
    grid.par_iter()
        .map(|&w| match d_value(t, w, opts) {
            Ok(d) => ScanPoint { omega0: w, d: Some(d), error: None },
            Err(e) => ScanPoint { omega0: w, d: None, error: Some(e.to_string()) },
        })
        .collect()
}

/// Inclusive uniform grid.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect(),
    }
}

fn refine(
    t: &ScanTemplate,
    (mut a, mut da): (f64, f64),
    (mut b, db): (f64, f64),
    opts: &ResonanceOptions,
) -> ResonancePoint {
    let _ = db;
    let mut mid = 0.5 * (a + b);
    let mut dm = f64::NAN;
    let floor = 4.0 * f64::EPSILON * a.abs().max(b.abs());
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        dm = match d_value(t, mid, opts) {
            Ok(d) => d,
            Err(_) => break,
        };
        if dm.abs() < opts.d_tol {
            break;
        }
        if (dm < 0.0) == (da < 0.0) {
            a = mid;
            da = dm;
        } else {
            b = mid;
        }
        let width = b - a;
        // stop at the requested width once resolved; keep halving otherwise
        if width < opts.bracket_width && resolved(dm) {
            mid = 0.5 * (a + b);
            dm = d_value(t, mid, opts).unwrap_or(dm);
            break;
        }
        if width <= floor {
            break;
        }
    }
    ResonancePoint {
        omega0_star: mid,
        a1: t.params.a1,
        method: opts.method,
        photon_order: photon_order(&t.params, mid),
        bracket_width_final: b - a,
        d_value: dm,
        resolved: resolved(dm),
    }
}

fn resolved(d: f64) -> bool {
    0.5 * d * d < RESOLVED_MARGIN
}

/// Bisect every sign change of `d` found on `scan_points` uniform points.
pub fn find_resonances(
    t: &ScanTemplate,
    range: (f64, f64),
    scan_points: usize,
    d_tol: f64,
) -> Result<Vec<ResonancePoint>> {
    find_resonances_with(t, range, scan_points, &ResonanceOptions { d_tol, ..ResonanceOptions::default() })
}

pub fn find_resonances_with(
    t: &ScanTemplate,
    range: (f64, f64),
    scan_points: usize,
    opts: &ResonanceOptions,
) -> Result<Vec<ResonancePoint>> {
    if !(range.0 < range.1) {
        return Err(Error::InvalidInput("resonance range must be nonempty".into()));
    }
    if scan_points < 16 {
        return Err(Error::InvalidInput("at least 16 scan points are required".into()));
    }
    let grid = linspace(range.0, range.1, scan_points);
    let scan = d_scan_with(t, &grid, opts);
    let mut brackets = Vec::new();
    for w in scan.windows(2) {
        if let (Some(a), Some(b)) = (w[0].d, w[1].d) {
            if a == 0.0 {
                brackets.push(((w[0].omega0, a), (w[0].omega0, a)));
            } else if (a < 0.0) != (b < 0.0) && b != 0.0 {
                brackets.push(((w[0].omega0, a), (w[1].omega0, b)));
            }
        }
    }
    if let Some(last) = scan.last() {
        if last.d == Some(0.0) {
            brackets.push(((last.omega0, 0.0), (last.omega0, 0.0)));
        }
    }
    let mut points: Vec<ResonancePoint> = brackets
        .par_iter()
        .map(|&(a, b)| {
            if a.0 == b.0 {
                ResonancePoint {
                    omega0_star: a.0,
                    a1: t.params.a1,
                    method: opts.method,
                    photon_order: photon_order(&t.params, a.0),
                    bracket_width_final: 0.0,
                    d_value: 0.0,
                    resolved: true,
                }
            } else {
                refine(t, a, b, opts)
            }
        })
        .collect();
    points.sort_by(|a, b| a.omega0_star.total_cmp(&b.omega0_star));
    Ok(points)
}

/// Half width of the resonance at `omega0_star`: on each side, the distance at
/// which `|d|` climbs back to half of its level a quarter beat away, averaged
/// over the two sides. Strong drives leave a background `P̄` between bands, so
/// a fixed `P̄ = ¼` level is not reached in general.
pub fn half_width(t: &ScanTemplate, omega0_star: f64, opts: &ResonanceOptions) -> Result<f64> {
    let reach = 0.25 * t.params.beat().abs();
    let mut sides = [0.0; 2];
    for (k, dir) in [1.0f64, -1.0].into_iter().enumerate() {
        let target = 0.5 * d_value(t, omega0_star + dir * reach, opts)?.abs();
        let excess = |x: f64| -> Result<f64> { Ok(d_value(t, omega0_star + dir * x, opts)?.abs() - target) };
        let mut inner = 0.0;
        let mut outer = 1e-10;
        let mut found = false;
        while outer < reach {
            if excess(outer)? > 0.0 {
                found = true;
                break;
            }
            inner = outer;
            outer *= 2.0;
        }
        if !found {
            outer = reach;
            if excess(outer)? <= 0.0 {
                return Err(Error::InvalidInput("no half-height point found near the resonance".into()));
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (inner + outer);
            if excess(mid)? > 0.0 {
                outer = mid;
            } else {
                inner = mid;
            }
            if outer - inner < 1e-3 * outer {
                break;
            }
        }
        sides[k] = 0.5 * (inner + outer);
    }
    Ok(0.5 * (sides[0] + sides[1]))
}

/// Continue a resonance from `seed_range` at the first amplitude through the
/// rest of `a1_grid`.
pub fn band_trace(t: &ScanTemplate, a1_grid: &[f64], seed_range: (f64, f64)) -> Result<ResonanceBand> {
    band_trace_with(t, a1_grid, seed_range, &ResonanceOptions::default())
}

pub fn band_trace_with(
    t: &ScanTemplate,
    a1_grid: &[f64],
    seed_range: (f64, f64),
    opts: &ResonanceOptions,
) -> Result<ResonanceBand> {
    if a1_grid.is_empty() || a1_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("A1 grid must be nonempty and increasing".into()));
    }
    let centre = 0.5 * (seed_range.0 + seed_range.1);
    let first = t.with_a1(a1_grid[0]);
    let found = find_resonances_with(&first, seed_range, 64, opts)?;
    let seed = pick(&found, centre).ok_or(Error::BandLost { a1: a1_grid[0] })?;
    let mut points = vec![seed];
    let min_window = 0.05 * t.params.beat().abs();
    for &a1 in &a1_grid[1..] {
        let tt = t.with_a1(a1);
        let n = points.len();
        let last = points[n - 1].omega0_star;
        let predicted = if n >= 2 { 2.0 * last - points[n - 2].omega0_star } else { last };
        let movement = (predicted - last).abs();
        let mut half = min_window.max(3.0 * movement);
        let mut next = None;
        for _ in 0..2 {
            let range = (predicted - half, predicted + half);
            let found = find_resonances_with(&tt, range, 32, opts)?;
            if let Some(p) = pick(&found, predicted) {
                next = Some(p);
                break;
            }
            half *= 3.0;
        }
        points.push(next.ok_or(Error::BandLost { a1 })?);
    }
    let band = band_from_seed(&t.params, seed.omega0_star);
    Ok(ResonanceBand { band, method: opts.method, points, endpoints: BandId::endpoints(band.n, &t.params) })
}

fn pick(found: &[ResonancePoint], target: f64) -> Option<ResonancePoint> {
    let nearest = |it: &mut dyn Iterator<Item = &ResonancePoint>| {
        it.min_by(|a, b| (a.omega0_star - target).abs().total_cmp(&(b.omega0_star - target).abs())).copied()
    };
    nearest(&mut found.iter().filter(|p| p.resolved)).or_else(|| nearest(&mut found.iter()))
}

fn band_from_seed(p: &DriveParams, omega0: f64) -> BandId {
    let mut best = (f64::INFINITY, BandId { n: 0, branch: Branch::Lower });
    for n in 0..200u32 {
        for branch in [Branch::Lower, Branch::Upper] {
            let id = BandId { n, branch };
            let d = (id.endpoint(p) - omega0).abs();
            if d < best.0 {
                best = (d, id);
            }
        }
    }
    best.1
}

/// Trace `band` from the weak-drive limit up to `a1` and return the resonance there.
pub fn resonance_on_band(t: &ScanTemplate, band: BandId, a1: f64, opts: &ResonanceOptions) -> Result<ResonancePoint> {
    let e = band.endpoint(&t.params);
    let start = (0.02 * t.params.omega1).min(a1);
    let steps = ((a1 - start) / (0.02 * t.params.omega1)).ceil().max(0.0) as usize;
    let grid: Vec<f64> = if steps == 0 { vec![a1] } else { linspace(start, a1, steps + 1) };
    let half = 0.1 * t.params.beat().abs();
    let traced = band_trace_with(t, &grid, (e - half, e + half), opts)?;
    traced.points.last().copied().ok_or(Error::BandLost { a1 })
}

/// `ω₀*_CHRW − ω₀*_RWA` on `band` at amplitude `a1`.
pub fn bloch_siegert_shift(t: &ScanTemplate, a1: f64, band: BandId) -> Result<f64> {
    let c = resonance_on_band(t, band, a1, &ResonanceOptions::method(Method::Chrw))?;
    let r = resonance_on_band(t, band, a1, &ResonanceOptions::method(Method::Rwa))?;
    Ok(c.omega0_star - r.omega0_star)
}

/// `P̄` on an `A₁ × ω₀` grid, rows indexed by `A₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandMap {
    pub method: Method,
    pub omega0: Vec<f64>,
    pub a1: Vec<f64>,
    /// Row-major: entry `i * omega0.len() + j` is `(a1[i], omega0[j])`.
    pub pbar: Vec<Option<f64>>,
    pub status: Vec<String>,
    /// The failure behind each `None` cell.
    #[serde(skip)]
    pub errors: Vec<Option<Error>>,
}

impl BandMap {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.pbar[i * self.omega0.len() + j]
    }

    pub fn all_ok(&self) -> bool {
        self.pbar.iter().all(|v| v.is_some())
    }
}

/// `P̄` for one point by the chosen backend.
pub fn pbar_value(p: &DriveParams, method: Method, floquet: &FloquetOptions, gft: &GftOptions) -> Result<f64> {
    match method {
        Method::Chrw | Method::Rwa => Ok(FrameSolution::new(method, p, floquet)?.averaged().p_bar),
        Method::Gft => Ok(gft_averaged_with(p, gft)?.p_bar),
        Method::Rk => Err(Error::InvalidInput("the RK backend has no time-averaged form".into())),
    }
}

pub fn band_map(t: &ScanTemplate, omega0_grid: &[f64], a1_grid: &[f64], method: Method) -> Result<BandMap> {
    let gft = GftOptions::scan();
    band_map_with(t, omega0_grid, a1_grid, method, &FloquetOptions::default(), &gft)
}

pub fn band_map_with(
    t: &ScanTemplate,
    omega0_grid: &[f64],
    a1_grid: &[f64],
    method: Method,
    floquet: &FloquetOptions,
    gft: &GftOptions,
) -> Result<BandMap> {
    if omega0_grid.is_empty() || a1_grid.is_empty() {
        return Err(Error::InvalidInput("band map grids must be nonempty".into()));
    }
    let cells: Vec<(f64, f64)> = a1_grid.iter().flat_map(|&a| omega0_grid.iter().map(move |&w| (a, w))).collect();
    let results: Vec<Result<f64>> =
        cells.par_iter().map(|&(a, w)| pbar_value(&t.with_a1(a).at(w), method, floquet, gft)).collect();
    let mut pbar = Vec::with_capacity(results.len());
    let mut status = Vec::with_capacity(results.len());
    let mut errors = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(v) => {
                pbar.push(Some(v));
                status.push("ok".to_string());
                errors.push(None);
            }
            Err(e) => {
                pbar.push(None);
                status.push(e.to_string());
                errors.push(Some(e));
            }
        }
    }
    Ok(BandMap { method, omega0: omega0_grid.to_vec(), a1: a1_grid.to_vec(), pbar, status, errors })
}
