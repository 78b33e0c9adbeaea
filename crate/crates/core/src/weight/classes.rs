//! Class `G_q` membership, normalization into `G_q` and the continuous,
//! strictly increasing equivalent of a `G_q` weight.

use serde::Serialize;

use super::{ProbeGrid, WeightFunction};
use crate::error::{Error, Result};

/// Default tolerance on the relative monotonicity defects.
pub const GQ_TOL: f64 = 1e-9;

/// Outcome of [`classify_gq`]. Witnesses are pairs of probe radii `(s, t)`
/// with `s < t` attaining the corresponding defect.
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub member: bool,
    pub monotone_defect: f64,
    pub decay_defect: f64,
    pub almost_increasing_constant: f64,
    pub almost_decreasing_constant: f64,
    pub doubling_constant: f64,
    pub monotone_witness: Option<(f64, f64)>,
    pub decay_witness: Option<(f64, f64)>,
    pub doubling_witness: Option<f64>,
    /// First probe radius where the weight vanishes, if any.
    pub zero_witness: Option<f64>,
}

pub fn classify_gq(w: &WeightFunction, q: f64, n: usize, probe: &ProbeGrid) -> Result<ClassReport> {
    classify_gq_tol(w, q, n, probe, GQ_TOL)
}

pub fn classify_gq_tol(w: &WeightFunction, q: f64, n: usize, probe: &ProbeGrid, tol: f64) -> Result<ClassReport> {
    check_qn(q, n)?;
    probe.validate()?;
    let t = probe.points();
    let v: Vec<f64> = t.iter().map(|&x| w.value(x)).collect();
    let e = n as f64 / q;

    let zero_witness = t.iter().zip(&v).find(|(_, &y)| !(y > 0.0)).map(|(&x, _)| x);

    // w(s)/w(t) - 1 maximised over s ≤ t
    let mut monotone_defect = 0.0f64;
    let mut monotone_witness = None;
    let mut best = 0usize;
    for i in 0..t.len() {
        if v[i] > v[best] {
            best = i;
        }
        let d = v[best] / v[i] - 1.0;
        let d = if d.is_nan() { 0.0 } else { d };
        if d > monotone_defect {
            monotone_defect = d;
            monotone_witness = Some((t[best], t[i]));
        }
    }

    // g(t)/g(s) - 1 maximised over s ≤ t, g(t) = t^{-n/q} w(t)
    let g: Vec<f64> = t.iter().zip(&v).map(|(&x, &y)| y * x.powf(-e)).collect();
    let mut decay_defect = 0.0f64;
    let mut decay_witness = None;
    let mut best = t.len() - 1;
    for i in (0..t.len()).rev() {
        if g[i] > g[best] {
            best = i;
        }
        let d = g[best] / g[i] - 1.0;
        let d = if d.is_nan() { 0.0 } else { d };
        if d > decay_defect {
            decay_defect = d;
            decay_witness = Some((t[i], t[best]));
        }
    }

    let ppo = probe.points_per_octave;
    let mut doubling_constant = 1.0f64;
    let mut doubling_witness = None;
    for i in 0..t.len().saturating_sub(ppo) {
        let r = v[i + ppo] / v[i];
        let r = if r.is_nan() { 1.0 } else { r };
        if r > doubling_constant {
            doubling_constant = r;
            doubling_witness = Some(t[i]);
        }
    }

    Ok(ClassReport {
        member: zero_witness.is_none() && monotone_defect <= tol && decay_defect <= tol,
        monotone_defect,
        decay_defect,
        almost_increasing_constant: 1.0 + monotone_defect,
        almost_decreasing_constant: 1.0 + decay_defect,
        doubling_constant,
        monotone_witness,
        decay_witness,
        doubling_witness,
        zero_witness,
    })
}

fn check_qn(q: f64, n: usize) -> Result<()> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Domain(format!("exponent q must be positive, got {q}")));
    }
    if n == 0 {
        return Err(Error::Domain("dimension n must be at least 1".into()));
    }
    Ok(())
}

/// Octaves added on each side when looking for escape of
/// `w(t) min(t^{-n/q}, 1)` beyond the probe.
const TRIVIALITY_OCTAVES: f64 = 64.0;

/// Smallest `G_q` majorant of `w` on the probe (two-sided hull), returned as
/// a table on the probe points.
pub fn normalize_to_gq(w: &WeightFunction, q: f64, n: usize, probe: &ProbeGrid) -> Result<WeightFunction> {
    check_qn(q, n)?;
    probe.validate()?;
    let e = n as f64 / q;
    check_nontrivial(w, e, probe)?;

    let t = probe.points();
    let v: Vec<f64> = t.iter().map(|&x| w.value(x)).collect();
    let m = t.len();
    let mut prefix = vec![0.0; m];
    let mut acc = 0.0f64;
    for i in 0..m {
        acc = acc.max(v[i]);
        prefix[i] = acc;
    }
    let mut hull = vec![0.0; m];
    let mut acc = 0.0f64;
    for i in (0..m).rev() {
        acc = acc.max(v[i] * t[i].powf(-e));
        hull[i] = prefix[i].max(t[i].powf(e) * acc);
    }
    if let Some(i) = hull.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::TrivialSpace {
            direction: "t→0",
            detail: format!("weight vanishes up to t = {}", t[i]),
        });
    }
    WeightFunction::tabulated(t, hull)
}

fn check_nontrivial(w: &WeightFunction, e: f64, probe: &ProbeGrid) -> Result<()> {
    let wide = probe.extended(TRIVIALITY_OCTAVES);
    let lo_end = wide.index_at_least(probe.t_min);
    let pts = wide.points();
    let hi_end = lo_end + probe.len() - 1;
    let f = |t: f64| w.value(t) * t.powf(-e).min(1.0);
    let inner = pts[lo_end..=hi_end].iter().map(|&t| f(t)).fold(0.0f64, f64::max);
    let below = pts[..lo_end].iter().map(|&t| f(t)).fold(0.0f64, f64::max);
    let above = pts[hi_end + 1..].iter().map(|&t| f(t)).fold(0.0f64, f64::max);
    let threshold = inner * (1.0 + 1e-6);
    let top = f(pts[pts.len() - 1]);
    let bottom = f(pts[0]);
    if !above.is_finite() || (above > threshold && top >= above * (1.0 - 1e-12)) {
        return Err(Error::TrivialSpace {
            direction: "t→∞",
            detail: format!("w(t)·min(t^(-n/q),1) keeps growing beyond t = {} (reached {above:e})", probe.t_max),
        });
    }
    if !below.is_finite() || (below > threshold && bottom >= below * (1.0 - 1e-12)) {
        return Err(Error::TrivialSpace {
            direction: "t→0",
            detail: format!("w(t)·min(t^(-n/q),1) keeps growing below t = {} (reached {below:e})", probe.t_min),
        });
    }
    Ok(())
}

/// Nodes of the midpoint rule in the averaging step.
const AVERAGING_NODES: usize = 128;

/// Continuous, strictly increasing `G_q` weight equivalent to `w`: averaging
/// over `[t, 2t]`, a bounded increasing patch on `(1, ∞)` when the average
/// is flat there, and the dyadic series `Σ_k φ(2^k t) 2^{-kN}`, `N = n/q + 1`.
///
/// The patch used here is `φ₀(1)·(2t/(1+t))^{n/q}` for `t > 1`. The result is
/// rescaled by a constant so that its ratio to `w` is centred around 1.
pub fn continuous_equivalent(
    w: &WeightFunction,
    q: f64,
    n: usize,
    probe: &ProbeGrid,
    series_terms: usize,
) -> Result<WeightFunction> {
    let class = classify_gq(w, q, n, probe)?;
    if !class.member {
        return Err(Error::Precondition(format!(
            "continuous_equivalent needs a G_q weight; monotone defect {:e}, decay defect {:e}",
            class.monotone_defect, class.decay_defect
        )));
    }
    if series_terms == 0 {
        return Err(Error::Precondition("series_terms must be positive".into()));
    }
    let e = n as f64 / q;
    let big_n = e + 1.0;
    let ppo = probe.points_per_octave;

    // φ₀ on the probe extended upward by `series_terms` octaves
    let ext = ProbeGrid {
        t_min: probe.t_min,
        t_max: probe.t_max * (series_terms as f64).exp2(),
        points_per_octave: ppo,
    };
    let t = ext.points();
    let h = 1.0 / AVERAGING_NODES as f64;
    let nodes: Vec<(f64, f64)> = (0..AVERAGING_NODES)
        .map(|k| {
            let s = 1.0 + (k as f64 + 0.5) * h;
            (s, s.powf(-e - 1.0) * h)
        })
        .collect();
    let phi0 = |x: f64| nodes.iter().map(|&(s, c)| w.value(x * s) * c).sum::<f64>();
    let mut phi1: Vec<f64> = t.iter().map(|&x| phi0(x)).collect();

    let first_above_one = t.iter().position(|&x| x > 1.0);
    let needs_patch = match first_above_one {
        Some(i) => phi1[i..].windows(2).any(|p| !(p[1] > p[0])),
        None => true,
    };
    if needs_patch {
        let at_one = phi0(1.0);
        for (x, y) in t.iter().zip(phi1.iter_mut()) {
            let patch = if *x <= 1.0 {
                *y
            } else {
                at_one * (2.0 * x / (1.0 + x)).powf(e)
            };
            *y += patch;
        }
    }

    let m = probe.len();
    let mut out: Vec<f64> = (0..m)
        .map(|i| {
            let mut acc = 0.0;
            for k in (0..series_terms).rev() {
                acc += phi1[i + k * ppo] * (-(k as f64) * big_n).exp2();
            }
            acc
        })
        .collect();

    let pts = probe.points();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (x, y) in pts.iter().zip(&out) {
        let r = y / w.value(*x);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let c = 1.0 / (lo * hi).sqrt();
    for y in &mut out {
        *y *= c;
    }
    WeightFunction::tabulated(pts, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use WeightFunction as W;

    fn p() -> ProbeGrid {
        ProbeGrid::default()
    }

    #[test]
    fn power_membership_window() {
        assert!(classify_gq(&W::power(0.5), 1.0, 1, &p()).unwrap().member);
        assert!(classify_gq(&W::power(0.0), 1.0, 1, &p()).unwrap().member);
        assert!(classify_gq(&W::power(1.0), 1.0, 1, &p()).unwrap().member);
        let r = classify_gq(&W::power(1.5), 1.0, 1, &p()).unwrap();
        assert!(!r.member);
        assert!(r.decay_defect > 1.0);
        assert!(r.decay_witness.is_some());
        assert_eq!(r.monotone_defect, 0.0);
        let r = classify_gq(&W::power(-0.1), 1.0, 1, &p()).unwrap();
        assert!(!r.member && r.monotone_witness.is_some());
    }

    #[test]
    fn slowly_decreasing_log_factor_is_not_increasing() {
        // t^{0.01}/(1+log t) on t > 1
        let w = W::power_log(0.01, 0.0, -1.0);
        let r = classify_gq(&w, 1.0, 1, &p()).unwrap();
        assert!(!r.member);
        assert!(r.monotone_defect > 0.1);
    }

    #[test]
    fn truncated_is_reported_not_raised() {
        let r = classify_gq(&W::power(0.5).truncated(1.0), 1.0, 1, &p()).unwrap();
        assert!(!r.member);
        assert_eq!(r.zero_witness, Some(p().point(161)));
    }

    #[test]
    fn member_doubling_bound() {
        let w = W::sum(W::power(0.25), W::max(W::power(1.0), W::power(0.0)));
        let r = classify_gq(&w, 1.0, 1, &p()).unwrap();
        assert!(r.member);
        assert!(r.doubling_constant <= 2.0 * (1.0 + 1e-9));
    }

    #[test]
    fn normalize_truncated_power() {
        let w = W::power(0.5).truncated(1.0);
        let out = normalize_to_gq(&w, 1.0, 1, &p()).unwrap();
        for &t in &p().points() {
            let exact = t.sqrt().min(1.0);
            assert!((out.value(t) - exact).abs() <= 1e-12 * exact, "t={t}");
        }
        assert!(classify_gq(&out, 1.0, 1, &p()).unwrap().member);
    }

    #[test]
    fn normalize_fixed_point_and_idempotent() {
        let w = W::power(1.0);
        let out = normalize_to_gq(&w, 1.0, 1, &p()).unwrap();
        let again = normalize_to_gq(&out, 1.0, 1, &p()).unwrap();
        for &t in &p().points() {
            assert!((out.value(t) / t - 1.0).abs() < 1e-12);
            assert!((again.value(t) / out.value(t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_space_directions() {
        match normalize_to_gq(&W::power_log(1.0, 0.5, 0.5), 1.0, 1, &p()) {
            Err(Error::TrivialSpace { direction, .. }) => assert_eq!(direction, "t→∞"),
            other => panic!("{other:?}"),
        }
        assert!(normalize_to_gq(&W::power_log(1.0, 0.0, 0.0), 1.0, 1, &p()).is_ok());
        assert!(normalize_to_gq(&W::power_log(1.0, -0.5, -0.5), 1.0, 1, &p()).is_ok());
        match normalize_to_gq(&W::power(-0.5), 1.0, 1, &p()) {
            Err(Error::TrivialSpace { direction, .. }) => assert_eq!(direction, "t→0"),
            other => panic!("{other:?}"),
        }
    }

    fn assert_equivalent(w: &W, out: &W) {
        let pts = p().points();
        for pair in pts.windows(2) {
            assert!(out.value(pair[1]) > out.value(pair[0]), "not strictly increasing at {}", pair[1]);
        }
        for &t in &pts {
            let r = out.value(t) / w.value(t);
            assert!((0.25..=4.0).contains(&r), "ratio {r} at {t}");
        }
    }

    #[test]
    fn continuous_equivalent_of_power_is_power() {
        let w = W::power(0.5);
        let out = continuous_equivalent(&w, 2.0, 1, &p(), 64).unwrap();
        assert_equivalent(&w, &out);
        let pts = p().points();
        let c0 = out.value(pts[0]) / w.value(pts[0]);
        for &t in &pts {
            assert!((out.value(t) / w.value(t) / c0 - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn continuous_equivalent_of_constant() {
        let w = W::power(0.0);
        let out = continuous_equivalent(&w, 1.0, 1, &p(), 64).unwrap();
        assert_equivalent(&w, &out);
        // bounded above: saturates like the patch
        let pts = p().points();
        assert!(out.value(pts[pts.len() - 1]) / out.value(1.0) < 2.0);
    }

    #[test]
    fn continuous_equivalent_of_staircase() {
        // flat 2^k on [4^k, 2·4^k], slope-1 ramp up to 2^{k+1} on [2·4^k, 4^{k+1}]
        let probe = p();
        let t = probe.points();
        let v: Vec<f64> = t
            .iter()
            .map(|&x| {
                let k = (x.log2() / 2.0).floor();
                let base = 4f64.powf(k);
                let level = 2f64.powf(k);
                if x <= 2.0 * base {
                    level
                } else {
                    level * x / (2.0 * base)
                }
            })
            .collect();
        let w = W::tabulated(t, v).unwrap();
        assert!(classify_gq(&w, 1.0, 1, &probe).unwrap().member);
        let out = continuous_equivalent(&w, 1.0, 1, &probe, 64).unwrap();
        assert_equivalent(&w, &out);
        assert!(classify_gq(&out, 1.0, 1, &probe).unwrap().member);
    }

    #[test]
    fn continuous_equivalent_requires_member() {
        assert!(matches!(
            continuous_equivalent(&W::power(2.0), 1.0, 1, &p(), 32),
            Err(Error::Precondition(_))
        ));
    }
}
