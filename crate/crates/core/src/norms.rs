//! Morrey, weak Morrey and derived norms over an enumerated cube family.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{mean_root, Cube, CubePolicy, Grid, GridFunction, PrefixTable, MAX_DIM};
use crate::par;
use crate::weight::{ProbeGrid, WeightFunction};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub witness: Cube,
    pub policy: CubePolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak_level: Option<f64>,
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("exponent q must be positive, got {q}")))
    }
}

/// Lower corner of placement `m` of a side with `k` placements per axis.
fn corner(n: usize, k: usize, stride: usize, mut m: usize) -> [usize; MAX_DIM] {
    let mut lo = [0usize; MAX_DIM];
    for d in (0..n).rev() {
        lo[d] = (m % k) * stride;
        m /= k;
    }
    lo
}

/// Weight values `φ(r_s)` for every side of the policy.
fn side_weights(phi: &WeightFunction, grid: &Grid, policy: &CubePolicy) -> Result<Vec<f64>> {
    policy
        .sides
        .iter()
        .map(|&s| phi.eval(0.5 * s as f64 * grid.h()))
        .collect()
}

/// `sup_Q φ(r_Q)·(1/|Q| ∫_Q |f|^q)^{1/q}` over the policy's cubes. Ties go
/// to the first cube in enumeration order.
pub fn morrey_norm(f: &GridFunction, phi: &WeightFunction, q: f64, policy: &CubePolicy) -> Result<NormReport> {
    let table = PrefixTable::new(f, q)?;
    morrey_norm_with(f, phi, q, policy, &table)
}

/// [`morrey_norm`] reusing a prefix table built for `(f, q)`.
pub fn morrey_norm_with(
    f: &GridFunction,
    phi: &WeightFunction,
    q: f64,
    policy: &CubePolicy,
    table: &PrefixTable,
) -> Result<NormReport> {
    check_q(q)?;
    table.check(f, q)?;
    let grid = f.grid();
    policy.validate(grid)?;
    let weights = side_weights(phi, grid, policy)?;
    let n = grid.n();
    let mut best: Option<(f64, Cube)> = None;
    for (&s, &w) in policy.sides.iter().zip(&weights) {
        let k = policy.offsets_per_axis(grid, s);
        let cells = s.pow(n as u32) as f64;
        let (m, v) = par::argmax(k.pow(n as u32), |m| {
            let lo = corner(n, k, policy.stride, m);
            w * mean_root(table.box_sum(&lo[..n], s), cells, q)
        })
        .expect("every side has a placement");
        if best.as_ref().is_none_or(|b| v > b.0) {
            let lo = corner(n, k, policy.stride, m);
            best = Some((v, Cube::new(&lo[..n], s)?));
        }
    }
    let (value, witness) = best.ok_or_else(|| Error::Contract("empty cube set".into()))?;
    Ok(NormReport {
        value,
        witness,
        policy: policy.clone(),
        weak_level: None,
    })
}

/// `sup_λ λ‖χ_{|f|>λ}‖`, evaluated exactly on the grid: the supremum is
/// attained at `λ` just below a sample value `v`, where the level set is
/// `{|f| ≥ v}`.
///
/// Levels are swept from the top; per side the maximal level-set count over
/// placements is maintained incrementally as cells join.
pub fn weak_morrey_norm(f: &GridFunction, phi: &WeightFunction, q: f64, policy: &CubePolicy) -> Result<NormReport> {
    check_q(q)?;
    let grid = f.grid();
    policy.validate(grid)?;
    let weights = side_weights(phi, grid, policy)?;
    let n = grid.n();
    let stride = policy.stride;

    let mut order: Vec<usize> = (0..grid.len()).filter(|&i| f.values()[i] != 0.0).collect();
    order.sort_by(|&a, &b| f.values()[b].abs().total_cmp(&f.values()[a].abs()).then(a.cmp(&b)));

    let ks: Vec<usize> = policy.sides.iter().map(|&s| policy.offsets_per_axis(grid, s)).collect();
    let mut counts: Vec<Vec<u32>> = ks.iter().map(|&k| vec![0u32; k.pow(n as u32)]).collect();
    let mut max_count = vec![0u32; policy.sides.len()];

    // (value, level, side index)
    let mut best: Option<(f64, f64, usize)> = None;
    let mut pos = 0;
    while pos < order.len() {
        let level = f.values()[order[pos]].abs();
        while pos < order.len() && f.values()[order[pos]].abs() == level {
            let cell = grid.multi(order[pos]);
            for (si, &s) in policy.sides.iter().enumerate() {
                bump_containing(&cell[..n], s, ks[si], stride, &mut counts[si], &mut max_count[si]);
            }
            pos += 1;
        }
        for (si, &s) in policy.sides.iter().enumerate() {
            let cells = s.pow(n as u32) as f64;
            let v = level * (weights[si] * mean_root(max_count[si] as f64, cells, q));
            if best.is_none_or(|b| v > b.0) {
                best = Some((v, level, si));
            }
        }
    }

    let Some((value, level, si)) = best else {
        let witness = Cube::new(&[0; MAX_DIM][..n], policy.sides[0])?;
        return Ok(NormReport {
            value: 0.0,
            witness,
            policy: policy.clone(),
            weak_level: None,
        });
    };
    let s = policy.sides[si];
    let k = ks[si];
    let indicator: Vec<f64> = f.values().iter().map(|v| if v.abs() >= level { 1.0 } else { 0.0 }).collect();
    let table = PrefixTable::from_raw(grid, &indicator);
    let (m, _) = par::argmax(k.pow(n as u32), |m| {
        let lo = corner(n, k, stride, m);
        table.box_sum(&lo[..n], s)
    })
    .expect("nonempty side");
    let lo = corner(n, k, stride, m);
    Ok(NormReport {
        value,
        witness: Cube::new(&lo[..n], s)?,
        policy: policy.clone(),
        weak_level: Some(level),
    })
}

/// Adds one to the count of every stride-aligned side-`s` placement
/// containing `cell`.
fn bump_containing(cell: &[usize], s: usize, k: usize, stride: usize, counts: &mut [u32], max: &mut u32) {
    let n = cell.len();
    let mut first = [0usize; MAX_DIM];
    let mut last = [0usize; MAX_DIM];
    for d in 0..n {
        // placements a·stride with a·stride ≤ cell < a·stride + s
        let lo = (cell[d] + 1).saturating_sub(s).div_ceil(stride);
        let hi = (cell[d] / stride).min(k - 1);
        if lo > hi {
            return;
        }
        first[d] = lo;
        last[d] = hi;
    }
    let mut a = first;
    loop {
        let idx = a[..n].iter().fold(0, |acc, &i| acc * k + i);
        counts[idx] += 1;
        *max = (*max).max(counts[idx]);
        let mut d = n;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            if a[d] < last[d] {
                a[d] += 1;
                break;
            }
            a[d] = first[d];
        }
    }
}

/// Closed-form norm of `χ_{Q(x,r)}`: `sup_s φ(s)·min(1, (r/s)^{n/q})` over
/// the probe points and `s = r`.
pub fn char_indicator_oracle(phi: &WeightFunction, q: f64, n: usize, r: f64, probe: &ProbeGrid) -> Result<f64> {
    check_q(q)?;
    probe.validate()?;
    if !(r >= probe.t_min && r <= probe.t_max) {
        return Err(Error::Domain(format!(
            "radius {r} outside the probe range [{}, {}]",
            probe.t_min, probe.t_max
        )));
    }
    let e = n as f64 / q;
    let mut best = phi.eval(r)?;
    for s in probe.points() {
        let v = phi.value(s) * (r / s).powf(e).min(1.0);
        best = best.max(v);
    }
    Ok(best)
}

/// `φ(t) = (2t)^{n/q}`, under which the norm of `f` is `‖f‖_{L^q}` over the
/// best cube.
pub fn lq_weight(n: usize, q: f64) -> WeightFunction {
    let e = n as f64 / q;
    WeightFunction::power(e).scaled(e.exp2())
}

/// `min(t^{n/p}, 1)`, the small Morrey weight.
pub fn small_morrey_weight(n: usize, p: f64) -> WeightFunction {
    WeightFunction::small_morrey(n as f64 / p)
}

/// `(2t)^{n/q}` cut off above `t = 1`: cubes of radius at most one,
/// measured in plain `L^q`.
pub fn uloc_weight(n: usize, q: f64) -> WeightFunction {
    lq_weight(n, q).truncated(1.0)
}

/// Whole-grid `L^q` norm, `(Σ|f|^q h^n)^{1/q}`.
pub fn lq_norm(f: &GridFunction, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(f.lq_norm(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{cube_average_q, enumerate_cubes, sample_catalog, CatalogSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(seed: u64, n: usize, cells: usize) -> GridFunction {
        let g = Grid::new(n, 1.0, cells).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..g.len())
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-3.0..3.0) })
            .collect();
        GridFunction::new(g, values).unwrap()
    }

    /// Brute force over enumerated cubes with direct sums.
    fn brute_norm(f: &GridFunction, phi: &WeightFunction, q: f64, policy: &CubePolicy) -> f64 {
        let g = f.grid();
        enumerate_cubes(g, policy)
            .unwrap()
            .iter()
            .map(|c| {
                let s: f64 = c.cells(g).iter().map(|&i| f.values()[i].abs().powf(q)).sum();
                phi.value(c.radius(g)) * (s / c.cell_count() as f64).powf(1.0 / q)
            })
            .fold(0.0, f64::max)
    }

    fn brute_weak(f: &GridFunction, phi: &WeightFunction, q: f64, policy: &CubePolicy) -> f64 {
        let mut levels: Vec<f64> = f.values().iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels
            .iter()
            .map(|&v| {
                let ind = f.map(|x| if x.abs() >= v { 1.0 } else { 0.0 }).unwrap();
                v * brute_norm(&ind, phi, q, policy)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn lq_special_case_is_exact_on_full_support() {
        for q in [0.5, 1.0, 2.0, 3.0] {
            let g = Grid::new(1, 1.0, 64).unwrap();
            let f = sample_catalog(&CatalogSpec::IndicatorCube { center: 0.0, r: 1.0 }, &g).unwrap();
            let r = morrey_norm(&f, &lq_weight(1, q), q, &CubePolicy::dyadic(&g)).unwrap();
            assert!((r.value - 2f64.powf(1.0 / q)).abs() < 1e-12, "{q}: {}", r.value);
            assert_eq!(r.witness, Cube::full(&g));
            assert!((r.value - lq_norm(&f, q).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn indicator_norm_close_to_weight() {
        let g = Grid::new(1, 4.0, 256).unwrap();
        let phi = WeightFunction::power(0.5);
        for r0 in [0.25, 1.0, 2.0] {
            let f = sample_catalog(&CatalogSpec::IndicatorCube { center: 0.0, r: r0 }, &g).unwrap();
            let v = morrey_norm(&f, &phi, 2.0, &CubePolicy::dyadic(&g)).unwrap().value;
            assert!((v / phi.value(r0) - 1.0).abs() < 0.1, "{r0}: {v}");
            let o = char_indicator_oracle(&phi, 2.0, 1, r0, &ProbeGrid::default()).unwrap();
            assert!((o - phi.value(r0)).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_cases() {
        let probe = ProbeGrid::default();
        let o = char_indicator_oracle(&WeightFunction::power(1.0), 1.0, 1, 0.3, &probe).unwrap();
        assert!((o - 0.3).abs() < 1e-15);
        let o = char_indicator_oracle(&small_morrey_weight(1, 2.0), 1.0, 1, 0.25, &probe).unwrap();
        assert!((o - 0.5).abs() < 1e-15);
        assert!(char_indicator_oracle(&WeightFunction::power(1.0), 1.0, 1, 1e9, &probe).is_err());
    }

    #[test]
    fn empty_policy_is_contract_error() {
        let f = random_fn(1, 1, 8);
        let p = CubePolicy { sides: vec![], stride: 1 };
        let phi = WeightFunction::power(0.5);
        assert!(matches!(morrey_norm(&f, &phi, 1.0, &p), Err(Error::Contract(_))));
        assert!(matches!(weak_morrey_norm(&f, &phi, 1.0, &p), Err(Error::Contract(_))));
    }

    #[test]
    fn two_level_weak_matches_hand_oracle() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let f = sample_catalog(&CatalogSpec::TwoLevel, &g).unwrap();
        let phi = WeightFunction::power(0.5);
        let p = CubePolicy::all(&g);
        let w = weak_morrey_norm(&f, &phi, 1.0, &p).unwrap();
        let top = f.map(|v| if v >= 2.0 { 1.0 } else { 0.0 }).unwrap();
        let all = f.map(|v| if v >= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let hand = (2.0 * morrey_norm(&top, &phi, 1.0, &p).unwrap().value).max(morrey_norm(&all, &phi, 1.0, &p).unwrap().value);
        assert_eq!(w.value, hand);
        assert!(w.weak_level == Some(1.0) || w.weak_level == Some(2.0));
    }

    #[test]
    fn weak_equals_strong_on_indicators() {
        let g = Grid::new(2, 2.0, 32).unwrap();
        let f = sample_catalog(&CatalogSpec::IndicatorBall { center: 0.3, radius: 0.7 }, &g).unwrap();
        for q in [0.5, 1.0, 2.0] {
            let phi = WeightFunction::power(1.0 / q);
            let p = CubePolicy::dyadic(&g);
            let s = morrey_norm(&f, &phi, q, &p).unwrap();
            let w = weak_morrey_norm(&f, &phi, q, &p).unwrap();
            assert_eq!(s.value, w.value);
            assert_eq!(w.weak_level, Some(1.0));
        }
    }

    #[test]
    fn zero_function() {
        let g = Grid::new(1, 1.0, 8).unwrap();
        let f = GridFunction::zeros(g);
        let phi = WeightFunction::power(0.5);
        let p = CubePolicy::dyadic(&g);
        assert_eq!(morrey_norm(&f, &phi, 2.0, &p).unwrap().value, 0.0);
        let w = weak_morrey_norm(&f, &phi, 2.0, &p).unwrap();
        assert_eq!(w.value, 0.0);
        assert_eq!(w.weak_level, None);
    }

    #[test]
    fn report_json_shape() {
        let f = random_fn(3, 1, 8);
        let g = *f.grid();
        let r = weak_morrey_norm(&f, &WeightFunction::power(0.5), 2.0, &CubePolicy::dyadic(&g)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert!(v["witness"]["lo"].is_array());
        assert!(v["witness"]["side"].is_u64());
        assert_eq!(v["policy"]["sides"], serde_json::json!([1, 2, 4, 8]));
        assert!(v["weak_level"].is_f64());
        let s = morrey_norm(&f, &WeightFunction::power(0.5), 2.0, &CubePolicy::dyadic(&g)).unwrap();
        assert!(serde_json::to_value(&s).unwrap().get("weak_level").is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn strong_matches_brute_force(seed in any::<u64>(), n in 1usize..=2, stride in 1usize..=3, qi in 0usize..3) {
            let q: f64 = [0.5, 1.0, 2.0][qi];
            let f = random_fn(seed, n, if n == 1 { 32 } else { 8 });
            let g = *f.grid();
            let policy = CubePolicy { sides: CubePolicy::all(&g).sides, stride };
            let phi = WeightFunction::power(0.7 / q);
            let r = morrey_norm(&f, &phi, q, &policy).unwrap();
            let b = brute_norm(&f, &phi, q, &policy);
            prop_assert!((r.value - b).abs() <= 1e-12 * b);
            // the witness reproduces the value bit for bit
            let t = PrefixTable::new(&f, q).unwrap();
            let again = phi.value(r.witness.radius(&g)) * cube_average_q(&f, q, &r.witness, &t).unwrap();
            prop_assert_eq!(again, r.value);
        }

        #[test]
        fn weak_matches_level_enumeration(seed in any::<u64>(), n in 1usize..=2, stride in 1usize..=2, qi in 0usize..3) {
            let q: f64 = [0.5, 1.0, 2.0][qi];
            let g = Grid::new(n, 1.0, if n == 1 { 32 } else { 8 }).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // few distinct levels so that ties between cells occur
            let f = GridFunction::new(g, (0..g.len()).map(|_| rng.gen_range(0..4) as f64 * 0.5).collect()).unwrap();
            let policy = CubePolicy { sides: CubePolicy::dyadic(&g).sides, stride };
            let phi = WeightFunction::power(0.5);
            let w = weak_morrey_norm(&f, &phi, q, &policy).unwrap();
            let b = brute_weak(&f, &phi, q, &policy);
            prop_assert!((w.value - b).abs() <= 1e-12 * b.max(1e-300));
            let s = morrey_norm(&f, &phi, q, &policy).unwrap();
            prop_assert!(w.value <= s.value * (1.0 + 1e-12) + 1e-12);
            if let Some(level) = w.weak_level {
                let ind = f.map(|x| if x.abs() >= level { 1.0 } else { 0.0 }).unwrap();
                let t = PrefixTable::new(&ind, q).unwrap();
                let at = level * phi.value(w.witness.radius(&g)) * cube_average_q(&ind, q, &w.witness, &t).unwrap();
                prop_assert!((at - w.value).abs() <= 1e-12 * w.value);
            }
        }

        #[test]
        fn quasi_triangle_and_nesting(a in any::<u64>(), b in any::<u64>(), qi in 0usize..3) {
            let q: f64 = [0.5, 1.0, 2.0][qi];
            let f = random_fn(a, 1, 32);
            let h = random_fn(b, 1, 32);
            let p = CubePolicy::dyadic(f.grid());
            let phi = WeightFunction::power(0.5 / q.max(1.0));
            let e = q.min(1.0);
            let nf = morrey_norm(&f, &phi, q, &p).unwrap().value;
            let nh = morrey_norm(&h, &phi, q, &p).unwrap().value;
            let ns = morrey_norm(&f.add(&h).unwrap(), &phi, q, &p).unwrap().value;
            prop_assert!(ns.powf(e) <= nf.powf(e) + nh.powf(e) + 1e-9);
            let n2 = morrey_norm(&f, &phi, 2.0 * q, &p).unwrap().value;
            prop_assert!(nf <= n2 * (1.0 + 1e-12));
        }

        #[test]
        fn scaling_law(seed in any::<u64>(), ei in 0usize..2) {
            let eta = [0.5, 2.0][ei];
            let f = random_fn(seed, 1, 64);
            let p = CubePolicy::dyadic(f.grid());
            let probe = ProbeGrid::default();
            let phi = WeightFunction::small_morrey(0.25);
            let lhs = morrey_norm(&f.abs_pow(eta).unwrap(), &phi.powered(eta, &probe).unwrap(), 2.0 / eta, &p).unwrap().value;
            let rhs = morrey_norm(&f, &phi, 2.0, &p).unwrap().value.powf(eta);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }

        #[test]
        fn weight_sum_and_max_laws(seed in any::<u64>()) {
            let f = random_fn(seed, 2, 8);
            let p = CubePolicy::dyadic(f.grid());
            let a = WeightFunction::power(0.3);
            let b = WeightFunction::power(0.9);
            let na = morrey_norm(&f, &a, 1.0, &p).unwrap().value;
            let nb = morrey_norm(&f, &b, 1.0, &p).unwrap().value;
            let nsum = morrey_norm(&f, &WeightFunction::sum(a.clone(), b.clone()), 1.0, &p).unwrap().value;
            let nmax = morrey_norm(&f, &WeightFunction::max(a, b), 1.0, &p).unwrap().value;
            prop_assert!(nsum <= (na + nb) * (1.0 + 1e-15));
            prop_assert_eq!(nmax, na.max(nb));
        }
    }
}
