//! Symmetric decreasing rearrangement on the star graph, computed exactly for
//! piecewise-linear functions.
//!
//! For `λ(s) = |{|Φ| ≥ s}|` the rearrangement is `Φ* = (g, …, g)` with
//! `g(t) = sup{s : λ(s) > N t}`. Between consecutive breakpoint levels `λ` is
//! affine, so `g` is obtained without sampling: walk the levels from the top,
//! add a plateau of width `(λ(ℓ) − μ(ℓ))/N` at every level whose level set has
//! positive measure (`μ(s) = |{|Φ| > s}|`), and join plateaus by the inverted
//! affine pieces of `λ`.

use std::io::{Read, Write};

use serde::Serialize;

use crate::graph::{fmt_f64, GraphFunction};
use crate::{Error, Result};

/// A continuous, compactly supported, piecewise-linear edge function.
#[derive(Debug, Clone, PartialEq)]
pub struct PLEdge {
    /// Strictly increasing breakpoints starting at `0`.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PLEdge {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::Shape("breakpoint and value lists must be non-empty and equally long".into()));
        }
        if x[0] != 0.0 {
            return Err(Error::Precondition(format!("first breakpoint must be 0, got {}", x[0])));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Precondition("non-finite breakpoint data".into()));
        }
        if let Some(w) = x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition(format!(
                "breakpoints must increase strictly (x[{}] = {}, x[{}] = {}); repeated x would be a jump",
                w,
                x[w],
                w + 1,
                x[w + 1]
            )));
        }
        if *y.last().expect("non-empty") != 0.0 {
            return Err(Error::Precondition("edge function must end at value 0 (compact support)".into()));
        }
        Ok(PLEdge { x, y })
    }

    pub fn zero() -> Self {
        PLEdge { x: vec![0.0], y: vec![0.0] }
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        // (length, |y| at left, |y| at right), split at sign changes
        self.x.windows(2).zip(self.y.windows(2)).flat_map(|(xw, yw)| {
            let h = xw[1] - xw[0];
            let (a, b) = (yw[0], yw[1]);
            if a * b < 0.0 {
                let z = h * a.abs() / (a.abs() + b.abs());
                vec![(z, a.abs(), 0.0), (h - z, 0.0, b.abs())]
            } else {
                vec![(h, a.abs(), b.abs())]
            }
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 || t > *self.x.last().expect("non-empty") {
            return 0.0;
        }
        let i = self.x.partition_point(|&v| v <= t);
        if i == self.x.len() {
            return *self.y.last().expect("non-empty");
        }
        let (x0, x1, y0, y1) = (self.x[i - 1], self.x[i], self.y[i - 1], self.y[i]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }
}

/// Exact piecewise-linear function on the star graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PLGraphFunction {
    pub edges: Vec<PLEdge>,
}

/// `(λ(s), μ(s))`: measures of `{|Φ| ≥ s}` and `{|Φ| > s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelMeasure {
    pub lambda: f64,
    pub mu_strict: f64,
}

fn segment_measure(h: f64, a: f64, b: f64, s: f64) -> LevelMeasure {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if lo == hi {
        return LevelMeasure { lambda: if lo >= s { h } else { 0.0 }, mu_strict: if lo > s { h } else { 0.0 } };
    }
    let frac = |s: f64| h * (hi - s) / (hi - lo);
    LevelMeasure {
        lambda: if s <= lo {
            h
        } else if s > hi {
            0.0
        } else {
            frac(s)
        },
        mu_strict: if s < lo {
            h
        } else if s >= hi {
            0.0
        } else {
            frac(s)
        },
    }
}

impl PLGraphFunction {
    pub fn new(edges: Vec<PLEdge>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::domain(format!("need N >= 2 edges, got {}", edges.len())));
        }
        Ok(PLGraphFunction { edges })
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Every edge starts from the same value.
    pub fn is_vertex_continuous(&self) -> bool {
        let v = self.edges[0].y[0];
        self.edges.iter().all(|e| e.y[0] == v)
    }

    /// Piecewise-linear interpolant of a sampled graph function's modulus.
    pub fn from_samples(f: &GraphFunction) -> Self {
        let grid = f.grid();
        let edges = f
            .values()
            .iter()
            .map(|e| {
                let x = (0..e.len()).map(|k| grid.x(k)).collect();
                let mut y: Vec<f64> = e.iter().map(|z| z.norm()).collect();
                *y.last_mut().expect("non-empty") = 0.0;
                PLEdge { x, y }
            })
            .collect();
        PLGraphFunction { edges }
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.edges.iter().flat_map(|e| e.segments().collect::<Vec<_>>())
    }

    /// Sorted distinct values of `|Φ|` at breakpoints (and zero crossings), including `0`.
    pub fn levels(&self) -> Vec<f64> {
        let mut lv: Vec<f64> = self.segments().flat_map(|(_, a, b)| [a, b]).collect();
        lv.push(0.0);
        lv.sort_by(f64::total_cmp);
        lv.dedup();
        lv
    }
}

pub fn level_measure(f: &PLGraphFunction, s: f64) -> Result<LevelMeasure> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("level must be nonnegative, got {s}")));
    }
    let mut acc = LevelMeasure { lambda: 0.0, mu_strict: 0.0 };
    for (h, a, b) in f.segments() {
        let m = segment_measure(h, a, b, s);
        acc.lambda += m.lambda;
        acc.mu_strict += m.mu_strict;
    }
    Ok(acc)
}

/// The symmetric decreasing rearrangement `Φ*`: every edge carries the same
/// nonincreasing profile `g`.
pub fn rearrange(f: &PLGraphFunction) -> Result<PLGraphFunction> {
    let n = f.n_edges() as f64;
    let levels = f.levels();
    // points (τ = N·t, level) of g, from the vertex outwards
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * levels.len());
    for (i, &lv) in levels.iter().enumerate().rev() {
        let m = level_measure(f, lv)?;
        if i + 1 < levels.len() {
            let prev = pts.last().copied().unwrap_or((0.0, lv));
            if m.mu_strict <= prev.0 && lv < prev.1 {
                // λ is flat on (lv, next level): the profile would jump
                return Err(Error::Precondition(format!(
                    "|f| skips the levels between {lv} and {}; the input is discontinuous",
                    prev.1
                )));
            }
            pts.push((m.mu_strict, lv));
        } else {
            pts.push((0.0, lv));
        }
        let plateau: f64 = f.segments().filter(|&(_, a, b)| a == lv && b == lv).map(|(h, _, _)| h).sum();
        if plateau > 0.0 {
            let tau = pts.last().expect("pushed").0;
            pts.push((tau + plateau, lv));
        }
    }
    pts.dedup();
    let mut x: Vec<f64> = pts.iter().map(|&(tau, _)| tau / n).collect();
    let mut y: Vec<f64> = pts.iter().map(|&(_, s)| s).collect();
    if x.is_empty() || x[0] != 0.0 {
        x.insert(0, 0.0);
        y.insert(0, y.first().copied().unwrap_or(0.0));
    }
    if *y.last().expect("non-empty") != 0.0 {
        return Err(Error::Precondition("rearranged profile does not reach zero".into()));
    }
    let edge = PLEdge::new(x, y)?;
    Ok(PLGraphFunction { edges: vec![edge; f.n_edges()] })
}

/// `∫_0^h |a + (b − a)x/h|^p dx` for `a, b ≥ 0`.
fn segment_power(h: f64, a: f64, b: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p <= 64.0 {
        // h·Σ_{k=0}^{p} a^k b^{p−k} / (p+1), free of cancellation
        let k = p as i32;
        let sum: f64 = (0..=k).map(|i| a.powi(i) * b.powi(k - i)).sum();
        return h * sum / (p + 1.0);
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi - lo <= 1e-6 * hi {
        // expansion around the midpoint
        let m = 0.5 * (lo + hi);
        let d = 0.5 * (hi - lo);
        return h * m.powf(p) * (1.0 + p * (p - 1.0) / 6.0 * (d / m).powi(2));
    }
    h * (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / ((p + 1.0) * (hi - lo))
}

/// `‖Φ‖_p` integrated exactly on every affine piece.
pub fn pl_lp_norm(f: &PLGraphFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.segments().map(|(_, a, b)| a.max(b)).fold(0.0, f64::max));
    }
    let s: f64 = f.segments().map(|(h, a, b)| segment_power(h, a, b, p)).sum();
    Ok(s.powf(1.0 / p))
}

/// `‖Φ'‖² = Σ slope²·length`.
pub fn pl_kinetic(f: &PLGraphFunction) -> f64 {
    f.edges
        .iter()
        .flat_map(|e| e.x.windows(2).zip(e.y.windows(2)))
        .map(|(xw, yw)| {
            let h = xw[1] - xw[0];
            (yw[1] - yw[0]).powi(2) / h
        })
        .sum()
}

/// Norms before and after rearrangement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RearrangementReport {
    pub edges: usize,
    pub lp_norms_before: Vec<(f64, f64)>,
    pub lp_norms_after: Vec<(f64, f64)>,
    pub kinetic_before: f64,
    pub kinetic_after: f64,
    #[serde(rename = "N_over_2_bound_satisfied")]
    pub n_over_2_bound_satisfied: bool,
}

/// Relative slack allowed on the Pólya–Szegő bound for floating-point rounding.
pub const BOUND_SLACK: f64 = 1e-12;

/// `‖Φ*'‖² ≤ (N²/4)‖Φ'‖²` up to [`BOUND_SLACK`].
pub fn polya_szego_holds(before: f64, after: f64, edges: usize) -> bool {
    let c = (edges * edges) as f64 / 4.0;
    after <= c * before * (1.0 + BOUND_SLACK) + f64::MIN_POSITIVE
}

pub fn report(f: &PLGraphFunction, star: &PLGraphFunction) -> Result<RearrangementReport> {
    let ps = [1.0, 2.0, 4.0];
    let before = ps.iter().map(|&p| Ok((p, pl_lp_norm(f, p)?))).collect::<Result<Vec<_>>>()?;
    let after = ps.iter().map(|&p| Ok((p, pl_lp_norm(star, p)?))).collect::<Result<Vec<_>>>()?;
    let (kb, ka) = (pl_kinetic(f), pl_kinetic(star));
    Ok(RearrangementReport {
        edges: f.n_edges(),
        lp_norms_before: before,
        lp_norms_after: after,
        kinetic_before: kb,
        kinetic_after: ka,
        n_over_2_bound_satisfied: polya_szego_holds(kb, ka, f.n_edges()),
    })
}

/// Reads the `edge,x,y` breakpoint format (edges numbered from `0`, rows
/// sorted by edge then `x`).
pub fn read_pl_csv<R: Read>(input: R) -> Result<PLGraphFunction> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["edge", "x", "y"] {
        return Err(Error::parse(1, "expected header edge,x,y"));
    }
    let mut raw: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(line, e.to_string()))?;
        if rec.len() != 3 {
            return Err(Error::parse(line, "expected 3 fields"));
        }
        let edge: usize = rec[0].parse().map_err(|_| Error::parse(line, "bad edge index"))?;
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| Error::parse(line, format!("bad number {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line, "non-finite value"))
            }
        };
        let (x, y) = (num(&rec[1])?, num(&rec[2])?);
        if edge == raw.len() {
            raw.push((Vec::new(), Vec::new()));
        } else if edge + 1 != raw.len() {
            return Err(Error::parse(line, "rows must be sorted by edge, starting at 0"));
        }
        let cur = raw.last_mut().expect("pushed above");
        cur.0.push(x);
        cur.1.push(y);
    }
    let edges = raw.into_iter().map(|(x, y)| PLEdge::new(x, y)).collect::<Result<Vec<_>>>()?;
    PLGraphFunction::new(edges)
}

pub fn write_pl_csv<W: Write>(f: &PLGraphFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["edge", "x", "y"]).map_err(io)?;
    for (j, e) in f.edges.iter().enumerate() {
        for (x, y) in e.x.iter().zip(&e.y) {
            w.write_record([j.to_string(), fmt_f64(*x), fmt_f64(*y)]).map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Tent of height `1` on `[0, 2]` of edge `0`, zero on the other edges.
pub fn tent(edges: usize) -> PLGraphFunction {
    let mut es = vec![PLEdge::zero(); edges];
    es[0] = PLEdge { x: vec![0.0, 1.0, 2.0], y: vec![0.0, 1.0, 0.0] };
    PLGraphFunction { edges: es }
}
