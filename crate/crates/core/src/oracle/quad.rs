//! One-dimensional quadrature rules for the reference computations.

use crate::error::{Error, Result};

/// Uniform grid on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    points: Vec<f64>,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, num_points: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!("grid bounds [{lo}, {hi}]")));
        }
        if num_points < 3 {
            return Err(Error::InvalidParameter("grid needs at least 3 points".into()));
        }
        let step = (hi - lo) / (num_points - 1) as f64;
        let points = (0..num_points).map(|i| lo + step * i as f64).collect();
        Ok(Grid1D { lo, hi, points })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points.len() - 1) as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Trapezoid rule over the grid.
pub fn grid_integrate(f: impl Fn(f64) -> f64, grid: &Grid1D) -> f64 {
    let pts = grid.points();
    let h = grid.step();
    let inner: f64 = pts[1..pts.len() - 1].iter().map(|&x| f(x)).sum();
    h * (inner + 0.5 * (f(pts[0]) + f(pts[pts.len() - 1])))
}

/// Trapezoid rule for values already tabulated on the grid.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    step * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1]))
}

/// A node of the tanh-sinh rule on `(0, 1)`, with both logs available so
/// that integrands can be evaluated near either endpoint without
/// cancellation.
#[derive(Debug, Clone, Copy)]
pub struct UnitNode {
    pub x: f64,
    pub ln_x: f64,
    pub ln_1mx: f64,
    /// Log of quadrature weight times step.
    pub ln_weight: f64,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Tanh-sinh nodes on `(0, 1)`. The abscissae cluster double-exponentially
/// at both ends, which handles integrable algebraic endpoint singularities.
pub fn tanh_sinh_nodes(step: f64, t_max: f64) -> Vec<UnitNode> {
    let half = (t_max / step).ceil() as i64;
    (-half..=half)
        .map(|j| {
            let t = j as f64 * step;
            let u = std::f64::consts::PI * t.sinh();
            let ln_x = -softplus(-u);
            let ln_1mx = -softplus(u);
            UnitNode {
                x: ln_x.exp(),
                ln_x,
                ln_1mx,
                ln_weight: step.ln() + (std::f64::consts::PI * t.cosh()).ln() + ln_x + ln_1mx,
            }
        })
        .collect()
}

/// Default node set: fine enough for 1e-12 relative accuracy on the smooth
/// and endpoint-singular integrands used here.
pub fn default_nodes() -> Vec<UnitNode> {
    tanh_sinh_nodes(1.0 / 32.0, 10.0)
}

pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().filter(|x| !x.is_nan()).collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln int_0^1 exp(log_f(node)) dx`.
pub fn log_integrate_unit(nodes: &[UnitNode], log_f: impl Fn(&UnitNode) -> f64) -> f64 {
    log_sum_exp(nodes.iter().map(|n| n.ln_weight + log_f(n)))
}

/// A node mapped to the half line via `s = x / (1 - x)`.
#[derive(Debug, Clone, Copy)]
pub struct HalfLineNode {
    pub s: f64,
    pub ln_s: f64,
    pub ln_weight: f64,
}

pub fn half_line_nodes(unit: &[UnitNode]) -> Vec<HalfLineNode> {
    unit.iter()
        .map(|n| {
            let ln_s = n.ln_x - n.ln_1mx;
            HalfLineNode {
                s: ln_s.exp(),
                ln_s,
                ln_weight: n.ln_weight - 2.0 * n.ln_1mx,
            }
        })
        .filter(|n| n.s.is_finite() && n.s > 0.0)
        .collect()
}

/// `ln int_0^inf exp(log_f(s)) ds`.
pub fn log_integrate_half_line(nodes: &[HalfLineNode], log_f: impl Fn(&HalfLineNode) -> f64) -> f64 {
    log_sum_exp(nodes.iter().map(|n| n.ln_weight + log_f(n)))
}
