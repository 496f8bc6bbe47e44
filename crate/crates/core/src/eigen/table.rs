//! Piecewise Chebyshev tabulation of dρ/dx for fast repeated evaluation.
//!
//! Each panel holds exact samples at Chebyshev–Lobatto points and is
//! evaluated with the barycentric formula. Panels are bisected until the
//! interpolant matches the exact function at off-node checkpoints.

const DEGREE: usize = 16;

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    values: [f64; DEGREE + 1],
}

#[derive(Debug, Clone)]
pub(crate) struct ChebTable {
    breaks: Vec<f64>,
    panels: Vec<Panel>,
}

fn lobatto(a: f64, b: f64, k: usize) -> f64 {
    let t = (std::f64::consts::PI * k as f64 / DEGREE as f64).cos();
    0.5 * (a + b) + 0.5 * (b - a) * t
}

fn barycentric(p: &Panel, x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..=DEGREE {
        let xk = lobatto(p.a, p.b, k);
        let d = x - xk;
        if d == 0.0 {
            return p.values[k];
        }
        let mut w = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k == 0 || k == DEGREE {
            w *= 0.5;
        }
        let t = w / d;
        num += t * p.values[k];
        den += t;
    }
    num / den
}

impl ChebTable {
    /// Tabulate `f` on [a, b]. `rel_tol` is relative to the panel maximum and
    /// `abs_floor` stops refinement where the function is negligible.
    ///
    /// A panel within a factor 1e3 of the target whose error no longer
    /// shrinks on bisection has hit the evaluation noise of `f` and is kept.
    pub fn build(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_floor: f64) -> Self {
        let mut panels = Vec::new();
        let mut stack = vec![(a, b, f64::INFINITY)];
        let min_width = (b - a) * 1e-6;
        while let Some((lo, hi, parent_err)) = stack.pop() {
            let mut values = [0.0; DEGREE + 1];
            for (k, v) in values.iter_mut().enumerate() {
                *v = f(lobatto(lo, hi, k));
            }
            let panel = Panel { a: lo, b: hi, values };
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut err = 0.0f64;
            for k in 0..DEGREE {
                // Midpoints between adjacent nodes in the angle variable.
                let t = (std::f64::consts::PI * (k as f64 + 0.5) / DEGREE as f64).cos();
                let x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
                if k % 3 == 0 {
                    err = err.max((barycentric(&panel, x) - f(x)).abs());
                }
            }
            let target = rel_tol * scale + abs_floor;
            let stalled = err > 0.25 * parent_err && err <= 1e3 * target;
            if err <= target || stalled || hi - lo <= min_width {
                panels.push(panel);
            } else {
                let mid = 0.5 * (lo + hi);
                // Push right first so panels come out left to right.
                stack.push((mid, hi, err));
                stack.push((lo, mid, err));
            }
        }
        let mut breaks: Vec<f64> = panels.iter().map(|p| p.a).collect();
        breaks.push(b);
        ChebTable { breaks, panels }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.breaks.partition_point(|&v| v <= x).saturating_sub(1).min(self.panels.len() - 1);
        barycentric(&self.panels[i], x)
    }

    #[cfg(test)]
    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }
}
