//! Bjøntegaard delta rate over shape-preserving cubic interpolation of
//! log-rate against PSNR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::PlaneSel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RDPoint {
    pub rate_kbps: f64,
    pub psnr_y: f64,
    pub psnr_u: f64,
    pub psnr_v: f64,
}

impl RDPoint {
    pub fn psnr(&self, sel: PlaneSel) -> f64 {
        match sel {
            PlaneSel::U => self.psnr_u,
            PlaneSel::V => self.psnr_v,
            _ => self.psnr_y,
        }
    }
}

pub const MIN_CURVE_POINTS: usize = 4;

/// At least four RD points sorted by rate. Construction checks rates only;
/// per-component monotonicity is checked when a component is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct RDCurve {
    points: Vec<RDPoint>,
}

impl RDCurve {
    pub fn new(mut points: Vec<RDPoint>) -> Result<Self> {
        if points.len() < MIN_CURVE_POINTS {
            return Err(Error::Curve(format!("{} points, need {MIN_CURVE_POINTS}", points.len())));
        }
        for p in &points {
            if !(p.rate_kbps.is_finite() && p.rate_kbps > 0.0) {
                return Err(Error::Curve(format!("rate {} is not positive", p.rate_kbps)));
            }
        }
        points.sort_by(|a, b| a.rate_kbps.total_cmp(&b.rate_kbps));
        if points.windows(2).any(|w| w[0].rate_kbps == w[1].rate_kbps) {
            return Err(Error::Curve("duplicate rate".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[RDPoint] {
        &self.points
    }

    /// `(psnr, log10 rate)` knots for one component, ascending.
    fn knots(&self, sel: PlaneSel) -> Result<Vec<(f64, f64)>> {
        let k: Vec<(f64, f64)> = self.points.iter().map(|p| (p.psnr(sel), p.rate_kbps.log10())).collect();
        if k.iter().any(|&(q, _)| !q.is_finite()) {
            return Err(Error::Curve(format!("non-finite {sel:?} PSNR")));
        }
        if k.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Curve(format!("{sel:?} PSNR is not strictly increasing with rate")));
        }
        Ok(k)
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes with
/// the usual three-point end conditions).
#[derive(Clone, Debug)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Curve("interpolant needs two or more knots".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Curve("knots must be strictly increasing".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (a, b) = (delta[k - 1], delta[k]);
                if a * b > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / a + w2 / b);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn piece(&self, t: f64) -> usize {
        self.x.partition_point(|&k| k <= t).clamp(1, self.x.len() - 1) - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.piece(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }

    /// Exact integral over `[a, b]` inside the domain: Simpson's rule is exact
    /// on each cubic piece.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        let mut lo = a;
        while lo < b {
            let k = self.piece(lo);
            let hi = if k + 2 == self.x.len() { b } else { self.x[k + 1].min(b) };
            let hi = if hi <= lo { b } else { hi };
            total += (hi - lo) / 6.0 * (self.eval(lo) + 4.0 * self.eval(0.5 * (lo + hi)) + self.eval(hi));
            lo = hi;
        }
        total
    }
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentBd {
    pub bd_rate_percent: f64,
    /// PSNR interval both curves cover, in dB.
    pub overlap_db: [f64; 2],
}

/// Luma must be computable; a chroma component that is not monotone is
/// reported as `None` with a note.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BDResult {
    pub y: ComponentBd,
    pub u: Option<ComponentBd>,
    pub v: Option<ComponentBd>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn bd_rate_component(anchor: &RDCurve, test: &RDCurve, sel: PlaneSel) -> Result<ComponentBd> {
    let fit = |c: &RDCurve| -> Result<Pchip> {
        let (x, y): (Vec<f64>, Vec<f64>) = c.knots(sel)?.into_iter().unzip();
        Pchip::new(&x, &y)
    };
    let (fa, ft) = (fit(anchor)?, fit(test)?);
    let (a0, a1) = fa.domain();
    let (t0, t1) = ft.domain();
    let (lo, hi) = (a0.max(t0), a1.min(t1));
    if hi <= lo {
        return Err(Error::Curve(format!("{sel:?} PSNR ranges do not overlap")));
    }
    let mean_diff = (ft.integrate(lo, hi) - fa.integrate(lo, hi)) / (hi - lo);
    Ok(ComponentBd {
        bd_rate_percent: (10f64.powf(mean_diff) - 1.0) * 100.0,
        overlap_db: [lo, hi],
    })
}

/// Average rate change of `test` relative to `anchor` at equal quality.
/// Negative means `test` needs fewer bits.
pub fn bd_rate(anchor: &RDCurve, test: &RDCurve) -> Result<BDResult> {
    let y = bd_rate_component(anchor, test, PlaneSel::Y)?;
    let mut notes = Vec::new();
    let mut chroma = |sel| match bd_rate_component(anchor, test, sel) {
        Ok(c) => Some(c),
        Err(e) => {
            notes.push(format!("{sel:?}: {e}"));
            None
        }
    };
    let u = chroma(PlaneSel::U);
    let v = chroma(PlaneSel::V);
    Ok(BDResult { y, u, v, notes })
}
