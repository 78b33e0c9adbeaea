//! Integral conditions on weights and kernels, reported as ratio profiles
//! over a probe grid rather than yes/no verdicts.

use serde::Serialize;

use super::{ProbeGrid, WeightFunction};
use crate::error::{Error, Result};
use crate::quadrature::{integral_to_zero, log_integral, GridIntegrals};

/// Tolerance constant in the power-improvement search of [`integral_condition_z0`].
pub const Z0_EPS_TOL: f64 = 4.0;

/// Growth factor of the sup under range doubling that counts as divergence.
const DOUBLING_GROWTH: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ConditionKind {
    ZygmundUpper { gamma: f64 },
    ZygmundLower { gamma: f64 },
    Growth { k1: f64, k2: f64 },
    Spanne,
    AdamsFull,
    AdamsSimple,
    Dini,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    Spanne,
    AdamsFull,
    AdamsSimple,
}

/// `LHS(r)/RHS(r)` over the probe. Divergent inner integrals show up as
/// infinite profile entries, `sup_ratio = None` and `divergent = true`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub kind: ConditionKind,
    pub r: Vec<f64>,
    pub ratio_profile: Vec<f64>,
    pub sup_ratio: Option<f64>,
    pub argsup: Option<f64>,
    pub divergent: bool,
    /// Sup over the top decade of the probe divided by the sup over the
    /// bottom decade.
    pub scale_drift: f64,
    /// Whether `w(t)` visibly tends to 0 as `t ↓ 0`; only checked on request.
    pub vanishing: Option<bool>,
}

impl ConditionReport {
    fn from_profile(kind: ConditionKind, r: Vec<f64>, ratio_profile: Vec<f64>) -> Self {
        let divergent = ratio_profile.iter().any(|x| !x.is_finite());
        let (mut sup, mut arg) = (f64::NEG_INFINITY, None);
        for (&x, &y) in r.iter().zip(&ratio_profile) {
            if y > sup {
                sup = y;
                arg = Some(x);
            }
        }
        let scale_drift = if divergent {
            f64::INFINITY
        } else {
            let lo_cut = r[0] * 10.0;
            let hi_cut = r[r.len() - 1] / 10.0;
            let bottom = r
                .iter()
                .zip(&ratio_profile)
                .filter(|(x, _)| **x <= lo_cut)
                .map(|(_, y)| *y)
                .fold(0.0f64, f64::max);
            let top = r
                .iter()
                .zip(&ratio_profile)
                .filter(|(x, _)| **x >= hi_cut)
                .map(|(_, y)| *y)
                .fold(0.0f64, f64::max);
            if bottom == 0.0 && top == 0.0 {
                1.0
            } else {
                top / bottom
            }
        };
        Self {
            kind,
            r,
            ratio_profile,
            sup_ratio: (!divergent).then_some(sup),
            argsup: if divergent { None } else { arg },
            divergent,
            scale_drift,
            vanishing: None,
        }
    }

    /// Condition counted as satisfied: finite, and the ratio neither grows
    /// nor shrinks by `threshold` or more between the two ends of the probe.
    pub fn holds(&self, threshold: f64) -> bool {
        !self.divergent
            && self.scale_drift < threshold
            && self.scale_drift > 1.0 / threshold
            && self.vanishing != Some(false)
    }
}

fn union_breaks(a: &WeightFunction, b: &WeightFunction) -> Vec<f64> {
    let mut v = a.breakpoints();
    v.extend(b.breakpoints());
    v
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 && den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Zygmund-type comparison of `∫ w(t) t^{-γ-1} dt` against `w(r) r^{-γ}`,
/// integrating over `(0, r]` (upper class) or `[r, ∞)` (lower class).
pub fn zygmund_membership(
    w: &WeightFunction,
    gamma: f64,
    side: Side,
    probe: &ProbeGrid,
    require_vanishing_limit: bool,
) -> Result<ConditionReport> {
    probe.validate()?;
    let r = probe.points();
    let g = |t: f64| w.value(t) * t.powf(-gamma);
    let gi = GridIntegrals::new(&g, &r, &w.breakpoints());
    let profile: Vec<f64> = r
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let integral = match side {
                Side::Upper => gi.from_zero[i],
                Side::Lower => gi.to_infinity[i],
            };
            match integral {
                Some(v) => ratio(v, g(x)),
                None => f64::INFINITY,
            }
        })
        .collect();
    let kind = match side {
        Side::Upper => ConditionKind::ZygmundUpper { gamma },
        Side::Lower => ConditionKind::ZygmundLower { gamma },
    };
    let mut rep = ConditionReport::from_profile(kind, r, profile);
    if require_vanishing_limit {
        rep.vanishing = Some(vanishes_at_zero(w, probe));
    }
    Ok(rep)
}

/// Log-log slope of `w` over the bottom decade of the probe is positive.
fn vanishes_at_zero(w: &WeightFunction, probe: &ProbeGrid) -> bool {
    let a = probe.t_min;
    let b = (a * 10.0).min(probe.t_max);
    let (wa, wb) = (w.value(a), w.value(b));
    if wa == 0.0 {
        return true;
    }
    (wb / wa).ln() / (b / a).ln() > 1e-3
}

/// `∫_r^∞ dt/(w(t) t)` times `w(r)` over the probe, with the minimal jump
/// exponent and the largest admissible power improvement.
#[derive(Debug, Clone, Serialize)]
pub struct Z0Report {
    pub r: Vec<f64>,
    pub constant_profile: Vec<f64>,
    pub sup_constant: Option<f64>,
    pub divergent: bool,
    pub m0: Option<u32>,
    pub epsilon_star: Option<f64>,
}

fn z0_sup(inv: &WeightFunction, w: &WeightFunction, probe: &ProbeGrid) -> (Vec<f64>, Vec<f64>, Option<f64>) {
    let r = probe.points();
    let g = |t: f64| 1.0 / w.value(t);
    let gi = GridIntegrals::new(&g, &r, &inv.breakpoints());
    let profile: Vec<f64> = r
        .iter()
        .zip(&gi.to_infinity)
        .map(|(&x, v)| match v {
            Some(v) => w.value(x) * v,
            None => f64::INFINITY,
        })
        .collect();
    let sup = profile.iter().copied().fold(0.0f64, f64::max);
    let sup = sup.is_finite().then_some(sup);
    (r, profile, sup)
}

/// The integral condition `∫_r^∞ dt/(φ(t)t) ≲ 1/φ(r)`.
///
/// The sup is recomputed on the probe with its log-range doubled twice; if it
/// grows by more than 10% at both doublings it is declared divergent. The jump
/// exponent `m0` is searched on the same widest range, so that both notions
/// see the same scales.
pub fn integral_condition_z0(
    w: &WeightFunction,
    q: f64,
    n: usize,
    probe: &ProbeGrid,
    m_cap: u32,
) -> Result<Z0Report> {
    let _ = (q, n);
    probe.validate()?;
    let (r, profile, sup0) = z0_sup(w, w, probe);
    let wide1 = probe.doubled();
    let wide2 = wide1.doubled();
    let sup_constant = match sup0 {
        None => None,
        Some(s0) => {
            let s1 = z0_sup(w, w, &wide1).2;
            let s2 = z0_sup(w, w, &wide2).2;
            match (s1, s2) {
                (Some(s1), Some(s2)) if !(s1 > DOUBLING_GROWTH * s0 && s2 > DOUBLING_GROWTH * s1) => Some(s0),
                _ => None,
            }
        }
    };

    let wide_pts = wide2.points();
    let vals: Vec<f64> = wide_pts.iter().map(|&t| w.value(t)).collect();
    let m0 = (1..=m_cap).find(|&m| {
        let f = (m as f64).exp2();
        wide_pts.iter().zip(&vals).all(|(&t, &v)| w.value(t * f) > 2.0 * v)
    });

    let epsilon_star = sup_constant.and_then(|_| epsilon_star(w, probe, Z0_EPS_TOL));

    Ok(Z0Report {
        r,
        constant_profile: profile,
        divergent: sup_constant.is_none(),
        sup_constant,
        m0,
        epsilon_star,
    })
}

/// `max_{t ≥ r} (t/r)^ε w(r)/w(t)` over probe pairs.
pub fn power_improvement_sup(w: &WeightFunction, probe: &ProbeGrid, eps: f64) -> f64 {
    let t = probe.points();
    let h: Vec<f64> = t.iter().map(|&x| eps * x.ln() - w.value(x).ln()).collect();
    let mut best = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for i in (0..h.len()).rev() {
        best = best.max(h[i]);
        worst = worst.max(best - h[i]);
    }
    worst.exp()
}

fn epsilon_star(w: &WeightFunction, probe: &ProbeGrid, tol: f64) -> Option<f64> {
    let ok = |e: f64| power_improvement_sup(w, probe, e) <= tol;
    if !ok(0.0) {
        return None;
    }
    let mut hi = 1.0;
    while ok(hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return Some(hi);
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo > 0.0).then_some(lo)
}

/// `ρ̃(r) = ∫_0^r ρ(t) dt/t`.
pub fn dini_tilde(rho: &WeightFunction, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("dini_tilde needs r > 0, got {r}")));
    }
    integral_to_zero(&|t| rho.value(t), r, &rho.breakpoints())
        .ok_or_else(|| Error::DiniViolation(format!("∫_0^{r} ρ(t)/t dt diverges for ρ = {rho}")))
}

/// Number of sub-grid points per band `(r/2, r]` in [`growth_constant`].
const GROWTH_SUBGRID: usize = 64;

/// `sup_{r/2<s≤r} ρ(s)` against `∫_{k1 r}^{k2 r} ρ(s)/s ds`.
pub fn growth_constant(rho: &WeightFunction, k1: f64, k2: f64, probe: &ProbeGrid) -> Result<ConditionReport> {
    probe.validate()?;
    if !(k1 > 0.0 && 2.0 * k1 < k2 && k2.is_finite()) {
        return Err(Error::Precondition(format!("growth condition needs 0 < 2·k1 < k2, got k1 = {k1}, k2 = {k2}")));
    }
    let breaks = rho.breakpoints();
    let r = probe.points();
    let profile = r
        .iter()
        .map(|&x| {
            let mut num = (0..GROWTH_SUBGRID)
                .map(|j| rho.value(x * (-(j as f64) / GROWTH_SUBGRID as f64).exp2()))
                .fold(0.0f64, f64::max);
            let lo = breaks.partition_point(|&b| b <= x / 2.0);
            for &b in &breaks[lo..] {
                if b > x {
                    break;
                }
                num = num.max(rho.value(b));
            }
            let den = log_integral(&|t| rho.value(t), k1 * x, k2 * x, &breaks);
            ratio(num, den)
        })
        .collect();
    Ok(ConditionReport::from_profile(ConditionKind::Growth { k1, k2 }, r, profile))
}

/// Spanne and Adams conditions for `I_ρ` between Morrey spaces.
///
/// * Spanne: `(1/φ(r))∫_0^r ρ/t + ∫_r^∞ ρ/(tφ)` against `1/ψ(r)`
/// * AdamsFull: the same left side against `φ(r)^{-p/q}`
/// * AdamsSimple: `ρ̃(r)` against `φ(r)^{1-p/q}`
pub fn operator_condition(
    kind: OperatorKind,
    rho: &WeightFunction,
    phi: &WeightFunction,
    psi: Option<&WeightFunction>,
    p: f64,
    q: f64,
    probe: &ProbeGrid,
) -> Result<ConditionReport> {
    probe.validate()?;
    if kind == OperatorKind::Spanne && psi.is_none() {
        return Err(Error::Precondition("Spanne condition needs a target weight ψ".into()));
    }
    if kind != OperatorKind::Spanne && !(0.0 < p && p < q) {
        return Err(Error::Precondition(format!("Adams conditions need 0 < p < q, got p = {p}, q = {q}")));
    }
    let r = probe.points();
    let near = GridIntegrals::new(&|t| rho.value(t), &r, &rho.breakpoints());
    let far = if kind == OperatorKind::AdamsSimple {
        None
    } else {
        Some(GridIntegrals::new(&|t| rho.value(t) / phi.value(t), &r, &union_breaks(rho, phi)))
    };
    let profile = r
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let Some(inner) = near.from_zero[i] else {
                return f64::INFINITY;
            };
            let f = phi.value(x);
            match kind {
                OperatorKind::AdamsSimple => inner / f.powf(1.0 - p / q),
                _ => {
                    let Some(tail) = far.as_ref().and_then(|g| g.to_infinity[i]) else {
                        return f64::INFINITY;
                    };
                    let lhs = inner / f + tail;
                    match kind {
                        OperatorKind::Spanne => lhs * psi.map_or(1.0, |w| w.value(x)),
                        _ => lhs * f.powf(p / q),
                    }
                }
            }
        })
        .collect();
    let ck = match kind {
        OperatorKind::Spanne => ConditionKind::Spanne,
        OperatorKind::AdamsFull => ConditionKind::AdamsFull,
        OperatorKind::AdamsSimple => ConditionKind::AdamsSimple,
    };
    Ok(ConditionReport::from_profile(ck, r, profile))
}
