//! Radial integrals `∫ g(t) dt/t` evaluated in log coordinates.
//!
//! With `u = ln t` the measure `dt/t` becomes `du`, so power-law integrands
//! turn into exponentials and every octave has the same width. Each panel is
//! integrated with composite midpoint sums under repeated halving (at most
//! [`MAX_LEVELS`] levels), accelerated by Richardson extrapolation in `h²`.
//! Improper integrals are accumulated octave by octave; divergence is a value
//! (`None`), not an error.

/// Maximum number of halvings per panel.
pub const MAX_LEVELS: usize = 20;

/// Relative tolerance for a single panel.
pub const PANEL_TOL: f64 = 1e-12;

/// Relative contribution below which an octave counts as "no change".
pub const TAIL_TOL: f64 = 1e-10;

const TINY_T: f64 = 1e-300;
const HUGE_T: f64 = 1e300;

fn midpoint_sum(g: &dyn Fn(f64) -> f64, ua: f64, ub: f64, m: usize) -> f64 {
    let h = (ub - ua) / m as f64;
    let mut s = 0.0;
    for i in 0..m {
        s += g((ua + (i as f64 + 0.5) * h).exp());
    }
    s * h
}

/// Integrates `g(e^u)` over `[ua, ub]` with midpoint halving and a Richardson
/// table. Returns non-finite values unchanged so callers can flag divergence.
fn panel(g: &dyn Fn(f64) -> f64, ua: f64, ub: f64) -> f64 {
    if ub <= ua {
        return 0.0;
    }
    let mut table: Vec<f64> = Vec::with_capacity(MAX_LEVELS + 1);
    let mut m = 1usize;
    let mut best = f64::NAN;
    for level in 0..=MAX_LEVELS {
        let mut row = Vec::with_capacity(level + 1);
        row.push(midpoint_sum(g, ua, ub, m));
        if !row[0].is_finite() {
            return row[0];
        }
        let mut factor = 4.0;
        for j in 1..=level {
            let prev = row[j - 1];
            let r = prev + (prev - table[j - 1]) / (factor - 1.0);
            row.push(r);
            factor *= 4.0;
        }
        let est = row[level];
        if level >= 3 {
            let diff = (est - best).abs();
            if diff <= PANEL_TOL * est.abs() || diff <= 1e-300 {
                return est;
            }
        }
        best = est;
        table = row;
        m *= 2;
    }
    best
}

/// `∫_a^b g(t) dt/t`, split at every breakpoint strictly inside `(a, b)`.
pub fn log_integral(g: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let mut lo = a;
    let mut total = 0.0;
    for c in cuts.into_iter().chain(std::iter::once(b)) {
        total += panel(g, lo.ln(), c.ln());
        lo = c;
    }
    total
}

fn accumulate_octaves(
    g: &dyn Fn(f64) -> f64,
    start: f64,
    breaks: &[f64],
    downward: bool,
) -> Option<f64> {
    let mut sum = 0.0;
    let mut prev_c = f64::NAN;
    let mut quiet = 0;
    let mut edge = start;
    loop {
        let (a, b, next) = if downward {
            let a = edge * 0.5;
            (a, edge, a)
        } else {
            let b = edge * 2.0;
            (edge, b, b)
        };
        if (downward && a < TINY_T) || (!downward && b > HUGE_T) {
            return None;
        }
        let c = log_integral(g, a, b, breaks);
        if !c.is_finite() {
            return None;
        }
        sum += c;
        if c.abs() <= TAIL_TOL * sum.abs() || (c == 0.0 && sum == 0.0) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 2 {
            let theta = c / prev_c;
            if theta.is_finite() && (0.0..1.0).contains(&theta) {
                sum += c * theta / (1.0 - theta);
            }
            return Some(sum);
        }
        prev_c = c;
        edge = next;
    }
}

/// `∫_0^r g(t) dt/t`, halving the lower truncation until two successive
/// halvings change the value by less than [`TAIL_TOL`]. `None` on divergence.
pub fn integral_to_zero(g: &dyn Fn(f64) -> f64, r: f64, breaks: &[f64]) -> Option<f64> {
    accumulate_octaves(g, r, breaks, true)
}

/// `∫_r^∞ g(t) dt/t`, doubling the upper truncation. `None` on divergence.
pub fn integral_to_infinity(g: &dyn Fn(f64) -> f64, r: f64, breaks: &[f64]) -> Option<f64> {
    accumulate_octaves(g, r, breaks, false)
}

/// Integrals of `g(t) dt/t` between consecutive points of an increasing grid,
/// plus the improper tails below the first and above the last point.
#[derive(Debug, Clone)]
pub struct GridIntegrals {
    /// `∫_0^{t_i}` (None when the lower tail diverges).
    pub from_zero: Vec<Option<f64>>,
    /// `∫_{t_i}^∞` (None when the upper tail diverges).
    pub to_infinity: Vec<Option<f64>>,
}

impl GridIntegrals {
    pub fn new(g: &dyn Fn(f64) -> f64, points: &[f64], breaks: &[f64]) -> Self {
        let n = points.len();
        let panels: Vec<f64> = points
            .windows(2)
            .map(|w| log_integral(g, w[0], w[1], breaks))
            .collect();
        let below = integral_to_zero(g, points[0], breaks);
        let above = integral_to_infinity(g, points[n - 1], breaks);

        let mut from_zero = Vec::with_capacity(n);
        let mut acc = below;
        from_zero.push(acc);
        for p in &panels {
            acc = acc.and_then(|a| {
                let v = a + p;
                v.is_finite().then_some(v)
            });
            from_zero.push(acc);
        }
        let mut to_infinity = vec![None; n];
        let mut acc = above;
        to_infinity[n - 1] = acc;
        for i in (0..n - 1).rev() {
            acc = acc.and_then(|a| {
                let v = a + panels[i];
                v.is_finite().then_some(v)
            });
            to_infinity[i] = acc;
        }
        Self {
            from_zero,
            to_infinity,
        }
    }
}
