//! Adaptive Gauss–Legendre quadrature over intervals and rectangles.
//!
//! Each panel is integrated with a tensor-product rule of `n` and `2n` points
//! per axis. The `2n × 2n` value is kept; the per-axis error is the change
//! when that axis drops to `n` points. A global loop always bisects the panel
//! with the largest error, on its worse axis, until the summed error meets the
//! relative tolerance or the panel budget runs out.
//!
//! Integrands are vector valued (`[f64; N]`) so several kernels sharing a
//! base evaluation can be integrated on one panel tree.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{GainError, Result};
use crate::geometry::Rect;
use crate::summation::pairwise_sum_slice;

/// Accuracy and budget settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    rel_tol: f64,
    max_panels: usize,
    base_order: usize,
}

impl QuadratureSpec {
    pub const DEFAULT_REL_TOL: f64 = 1e-9;
    pub const DEFAULT_MAX_PANELS: usize = 1 << 20;
    pub const DEFAULT_BASE_ORDER: usize = 16;

    pub fn new(rel_tol: f64, max_panels: usize, base_order: usize) -> Result<Self> {
        if !(rel_tol > 1e-14 && rel_tol < 1e-2) {
            return Err(GainError::InvalidTolerance(rel_tol));
        }
        if base_order < 4 {
            return Err(GainError::InvalidBaseOrder(base_order));
        }
        if max_panels == 0 {
            return Err(GainError::InvalidPanelBudget);
        }
        Ok(Self { rel_tol, max_panels, base_order })
    }

    /// Default budget and order with a custom tolerance.
    pub fn with_tolerance(rel_tol: f64) -> Result<Self> {
        Self::new(rel_tol, Self::DEFAULT_MAX_PANELS, Self::DEFAULT_BASE_ORDER)
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_panels(&self) -> usize {
        self.max_panels
    }

    pub fn base_order(&self) -> usize {
        self.base_order
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: Self::DEFAULT_REL_TOL,
            max_panels: Self::DEFAULT_MAX_PANELS,
            base_order: Self::DEFAULT_BASE_ORDER,
        }
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub abs_error: [f64; N],
    pub converged: bool,
    pub panels: usize,
}

/// Location and width of a sharp peak; seeds the initial panel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakHint {
    pub x: f64,
    pub z: f64,
    pub width: f64,
}

/// Breakpoints `[lo, hi]` plus `center` and `center ± width·4^k` where inside.
fn seeded_breaks(lo: f64, hi: f64, center: Option<(f64, f64)>) -> Vec<f64> {
    let mut breaks = vec![lo, hi];
    if let Some((c, w)) = center {
        if w > 0.0 {
            let span = hi - lo;
            let min_gap = 1e-9 * span;
            let mut push = |v: f64| {
                if v > lo + min_gap && v < hi - min_gap {
                    breaks.push(v);
                }
            };
            push(c);
            let mut step = w;
            while step < 2.0 * span {
                push(c - step);
                push(c + step);
                step *= 4.0;
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (hi - lo));
    breaks
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    rect: Rect,
    value: [f64; N],
    err_x: [f64; N],
    err_z: [f64; N],
}

impl<const N: usize> Panel<N> {
    fn err(&self) -> [f64; N] {
        std::array::from_fn(|i| self.err_x[i] + self.err_z[i])
    }

    fn worse_axis_is_x(&self, scale: &[f64; N]) -> bool {
        weighted_max(&self.err_x, scale) >= weighted_max(&self.err_z, scale)
    }
}

fn weighted_max<const N: usize>(err: &[f64; N], scale: &[f64; N]) -> f64 {
    err.iter().zip(scale).map(|(e, s)| e / s).fold(0.0, f64::max)
}

#[derive(Debug, PartialEq)]
struct Queued {
    priority: f64,
    id: usize,
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority).then_with(|| other.id.cmp(&self.id))
    }
}

struct Rules {
    low: GaussLegendre,
    high: GaussLegendre,
}

impl Rules {
    fn new(base_order: usize) -> Self {
        Self { low: GaussLegendre::new(base_order), high: GaussLegendre::new(2 * base_order) }
    }
}

fn tensor_rule<const N: usize>(
    f: &impl Fn(f64, f64) -> [f64; N],
    rect: &Rect,
    rx: &GaussLegendre,
    rz: &GaussLegendre,
) -> [f64; N] {
    let cx = 0.5 * (rect.x0 + rect.x1);
    let hx = 0.5 * (rect.x1 - rect.x0);
    let cz = 0.5 * (rect.z0 + rect.z1);
    let hz = 0.5 * (rect.z1 - rect.z0);
    let mut acc = [0.0; N];
    for (tx, wx) in rx.nodes().iter().zip(rx.weights()) {
        let x = cx + hx * tx;
        let mut row = [0.0; N];
        for (tz, wz) in rz.nodes().iter().zip(rz.weights()) {
            let v = f(x, cz + hz * tz);
            for i in 0..N {
                row[i] += wz * v[i];
            }
        }
        for i in 0..N {
            acc[i] += wx * row[i];
        }
    }
    let jac = hx * hz;
    acc.map(|a| a * jac)
}

fn eval_panel<const N: usize>(f: &impl Fn(f64, f64) -> [f64; N], rect: Rect, rules: &Rules) -> Panel<N> {
    let hh = tensor_rule(f, &rect, &rules.high, &rules.high);
    let lh = tensor_rule(f, &rect, &rules.low, &rules.high);
    let hl = tensor_rule(f, &rect, &rules.high, &rules.low);
    let mut err_x = [0.0; N];
    let mut err_z = [0.0; N];
    for i in 0..N {
        err_x[i] = (lh[i] - hh[i]).abs();
        err_z[i] = (hl[i] - hh[i]).abs();
    }
    Panel { rect, value: hh, err_x, err_z }
}

/// Integrates `f` over `rect`.
///
/// With a [`PeakHint`] the initial grid places panel edges on the peak and
/// on a geometric ladder around it, so no coarse panel straddles the peak.
pub fn integrate_2d<const N: usize>(
    f: impl Fn(f64, f64) -> [f64; N],
    rect: Rect,
    spec: &QuadratureSpec,
    peak: Option<PeakHint>,
) -> Estimate<N> {
    if rect.width() == 0.0 || rect.height() == 0.0 {
        return Estimate { value: [0.0; N], abs_error: [0.0; N], converged: true, panels: 0 };
    }
    let rules = Rules::new(spec.base_order());
    let xs = seeded_breaks(rect.x0, rect.x1, peak.map(|p| (p.x, p.width)));
    let zs = seeded_breaks(rect.z0, rect.z1, peak.map(|p| (p.z, p.width)));

    let mut panels: Vec<Panel<N>> = Vec::new();
    for xw in xs.windows(2) {
        for zw in zs.windows(2) {
            panels.push(eval_panel(&f, Rect::new(xw[0], xw[1], zw[0], zw[1]), &rules));
        }
    }
    refine(panels, spec, |p, split_x| {
        let r = p.rect;
        let (a, b) = if split_x {
            let m = 0.5 * (r.x0 + r.x1);
            (Rect::new(r.x0, m, r.z0, r.z1), Rect::new(m, r.x1, r.z0, r.z1))
        } else {
            let m = 0.5 * (r.z0 + r.z1);
            (Rect::new(r.x0, r.x1, r.z0, m), Rect::new(r.x0, r.x1, m, r.z1))
        };
        let tiny = (r.width().max(r.height())) < 1e-14 * (rect.width().max(rect.height()));
        if tiny {
            return None;
        }
        Some((eval_panel(&f, a, &rules), eval_panel(&f, b, &rules)))
    })
}

/// Integrates `f` over `[a, b]`, with optional interior breakpoints.
pub fn integrate_1d<const N: usize>(
    f: impl Fn(f64) -> [f64; N],
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    peak: Option<(f64, f64)>,
) -> Estimate<N> {
    if a == b {
        return Estimate { value: [0.0; N], abs_error: [0.0; N], converged: true, panels: 0 };
    }
    let rules = Rules::new(spec.base_order());
    let eval = |lo: f64, hi: f64| -> Panel<N> {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let rule = |g: &GaussLegendre| {
            let mut acc = [0.0; N];
            for (t, w) in g.nodes().iter().zip(g.weights()) {
                let v = f(c + h * t);
                for i in 0..N {
                    acc[i] += w * v[i];
                }
            }
            acc.map(|s| s * h)
        };
        let hi_v = rule(&rules.high);
        let lo_v = rule(&rules.low);
        let mut err_x = [0.0; N];
        for i in 0..N {
            err_x[i] = (hi_v[i] - lo_v[i]).abs();
        }
        Panel { rect: Rect::new(lo, hi, 0.0, 0.0), value: hi_v, err_x, err_z: [0.0; N] }
    };
    let breaks = seeded_breaks(a.min(b), a.max(b), peak);
    let sign = if b < a { -1.0 } else { 1.0 };
    let panels: Vec<Panel<N>> = breaks.windows(2).map(|w| eval(w[0], w[1])).collect();
    let span = (b - a).abs();
    let mut est = refine(panels, spec, |p, _| {
        let r = p.rect;
        if r.width() < 1e-14 * span {
            return None;
        }
        let m = 0.5 * (r.x0 + r.x1);
        Some((eval(r.x0, m), eval(m, r.x1)))
    });
    est.value = est.value.map(|v| sign * v);
    est
}

fn refine<const N: usize>(
    mut panels: Vec<Panel<N>>,
    spec: &QuadratureSpec,
    mut split: impl FnMut(&Panel<N>, bool) -> Option<(Panel<N>, Panel<N>)>,
) -> Estimate<N> {
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    for p in &panels {
        let e = p.err();
        for i in 0..N {
            total[i] += p.value[i];
            total_err[i] += e[i];
        }
    }
    let scale = total.map(|t| t.abs().max(f64::MIN_POSITIVE));

    let mut alive = vec![true; panels.len()];
    let mut heap: BinaryHeap<Queued> =
        panels.iter().enumerate().map(|(id, p)| Queued { priority: weighted_max(&p.err(), &scale), id }).collect();
    let mut active = panels.len();

    let done =
        |total: &[f64; N], err: &[f64; N]| (0..N).all(|i| err[i] <= spec.rel_tol() * total[i].abs() || err[i] == 0.0);

    let mut converged = done(&total, &total_err);
    while !converged {
        if active >= spec.max_panels() {
            break;
        }
        let Some(top) = heap.pop() else { break };
        let parent = panels[top.id];
        let Some((a, b)) = split(&parent, parent.worse_axis_is_x(&scale)) else {
            break;
        };
        alive[top.id] = false;
        let pe = parent.err();
        let (ae, be) = (a.err(), b.err());
        for i in 0..N {
            total[i] += a.value[i] + b.value[i] - parent.value[i];
            total_err[i] += ae[i] + be[i] - pe[i];
        }
        for child in [a, b] {
            let id = panels.len();
            heap.push(Queued { priority: weighted_max(&child.err(), &scale), id });
            panels.push(child);
            alive.push(true);
        }
        active += 1;
        converged = done(&total, &total_err);
    }

    let mut live: Vec<&Panel<N>> = panels.iter().zip(&alive).filter(|(_, a)| **a).map(|(p, _)| p).collect();
    live.sort_by(|p, q| p.rect.x0.total_cmp(&q.rect.x0).then(p.rect.z0.total_cmp(&q.rect.z0)));
    let values: Vec<[f64; N]> = live.iter().map(|p| p.value).collect();
    let errors: Vec<[f64; N]> = live.iter().map(|p| p.err()).collect();
    let value = pairwise_sum_slice(&values);
    let abs_error = pairwise_sum_slice(&errors);
    let converged = (0..N).all(|i| abs_error[i] <= spec.rel_tol() * value[i].abs() || abs_error[i] == 0.0);
    Estimate { value, abs_error, converged, panels: live.len() }
}
