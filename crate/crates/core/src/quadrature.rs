//! Adaptive Simpson quadrature on finite intervals.
//!
//! Integration ranges are split at caller-supplied breakpoints so that
//! discontinuities (cut edges, support boundaries) fall on panel edges.

use crate::error::{Error, Result};

/// Default relative tolerance for density and moment integrals.
pub const DEFAULT_RTOL: f64 = 1e-6;
/// Maximum bisection depth below each initial panel.
pub const MAX_DEPTH: u32 = 20;

const INITIAL_PANELS: usize = 16;
const EDGE_NUDGE: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rtol: f64,
    /// Absolute floor on the tolerance, for integrals whose value is near zero.
    pub atol: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_RTOL,
            atol: 1e-14,
            max_depth: MAX_DEPTH,
        }
    }
}

struct State {
    err: f64,
    failed: bool,
}

impl Quadrature {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]`, splitting at every breakpoint that lies
    /// strictly inside the interval.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64, breakpoints: &[f64]) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        if b <= a {
            return Ok(0.0);
        }
        let mut edges = Vec::with_capacity(breakpoints.len() + 2);
        edges.push(a);
        edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
        edges.push(b);
        edges.sort_by(|x, y| x.total_cmp(y));
        edges.dedup();

        // Coarse composite estimate sets the absolute tolerance scale.
        let mut panels = Vec::new();
        let mut coarse = 0.0;
        for w in edges.windows(2) {
            let h = (w[1] - w[0]) / INITIAL_PANELS as f64;
            for k in 0..INITIAL_PANELS {
                let lo = w[0] + k as f64 * h;
                let hi = if k + 1 == INITIAL_PANELS {
                    w[1]
                } else {
                    lo + h
                };
                let mid = 0.5 * (lo + hi);
                // Segment ends are evaluated as one-sided limits so that a
                // jump at a breakpoint does not leak into the next segment.
                let nudge = EDGE_NUDGE * (w[1] - w[0]);
                let flo = if k == 0 { f(lo + nudge) } else { f(lo) };
                let fhi = if k + 1 == INITIAL_PANELS {
                    f(hi - nudge)
                } else {
                    f(hi)
                };
                let fmid = f(mid);
                let s = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
                coarse += s.abs();
                panels.push((lo, hi, flo, fmid, fhi, s));
            }
        }
        let tol = (self.rtol * coarse).max(self.atol);
        let per_panel = tol / panels.len() as f64;

        let mut state = State {
            err: 0.0,
            failed: false,
        };
        let mut total = 0.0;
        for (lo, hi, flo, fmid, fhi, s) in panels {
            total += self.recurse(&f, lo, hi, flo, fmid, fhi, s, per_panel, 0, &mut state);
        }
        if state.failed && state.err > tol {
            return Err(Error::Quadrature {
                achieved: state.err,
                requested: tol,
            });
        }
        Ok(total)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
        state: &mut State,
    ) -> f64
    where
        F: Fn(f64) -> f64,
    {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * eps {
            state.err += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        if depth >= self.max_depth {
            state.failed = true;
            state.err += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        self.recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1, state)
            + self.recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1, state)
    }

    /// Nested 2-D integral: `outer` over x, `inner` over y for each x.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate_2d<F>(
        &self,
        f: F,
        (x_lo, x_hi): (f64, f64),
        x_breaks: &[f64],
        y_range: impl Fn(f64) -> (f64, f64),
        y_breaks: impl Fn(f64) -> Vec<f64>,
    ) -> Result<f64>
    where
        F: Fn(f64, f64) -> f64,
    {
        let inner_q = Quadrature {
            rtol: self.rtol * 1e-2,
            ..*self
        };
        let err = std::cell::Cell::new(None);
        let outer = |x: f64| {
            let (lo, hi) = y_range(x);
            let breaks = y_breaks(x);
            match inner_q.integrate(|y| f(x, y), lo, hi, &breaks) {
                Ok(v) => v,
                Err(e) => {
                    err.set(Some(e));
                    0.0
                }
            }
        };
        let value = self.integrate(outer, x_lo, x_hi, x_breaks)?;
        match err.take() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] (10 points).
pub(crate) const GL10: [(f64, f64); 10] = [
    (-0.973_906_528_517_171_7, 0.066_671_344_308_688_14),
    (-0.865_063_366_688_984_5, 0.149_451_349_150_580_6),
    (-0.679_409_568_299_024_4, 0.219_086_362_515_982),
    (-0.433_395_394_129_247_2, 0.269_266_719_309_996_4),
    (-0.148_874_338_981_631_2, 0.295_524_224_714_752_9),
    (0.148_874_338_981_631_2, 0.295_524_224_714_752_9),
    (0.433_395_394_129_247_2, 0.269_266_719_309_996_4),
    (0.679_409_568_299_024_4, 0.219_086_362_515_982),
    (0.865_063_366_688_984_5, 0.149_451_349_150_580_6),
    (0.973_906_528_517_171_7, 0.066_671_344_308_688_14),
];

/// Fixed 10-point Gauss-Legendre rule on `[a, b]`.
pub(crate) fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL10.iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}
