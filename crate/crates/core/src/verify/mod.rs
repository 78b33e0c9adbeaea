//! Experiment harness: operator-norm ratios over function families,
//! counterexample series, Hedberg checks and membership suites.
//!
//! All norms go through [`crate::norms`] with dyadic policies, so the
//! harness inherits the norm-level invariants. Every report embeds its grid
//! and policy; seeded functions carry their seed in the family labels.

mod corpus;
mod experiments;
mod fit;
pub mod suite;

pub use corpus::{function_corpus, sampled_corpus, weight_corpus, CORPUS_VERSION};
pub use experiments::*;
pub use fit::{fit_linear, fit_loglog, Fit};

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{sample_catalog, CatalogSpec, CubePolicy, Grid, GridFunction};
use crate::norms::{morrey_norm, weak_morrey_norm};
use crate::operators::OperatorSpec;
use crate::par;
use crate::weight::WeightFunction;

/// Relative change between two resolutions still counted as stable.
pub const DRIFT_TOL: f64 = 0.25;

/// Dyadic sides `1, 2, 4, …, N` with the given corner stride.
pub fn dyadic_policy(grid: &Grid, stride: usize) -> CubePolicy {
    CubePolicy {
        stride,
        ..CubePolicy::dyadic(grid)
    }
}

/// One CSV row: `family_id, m_or_k, N, in_norm, out_norm, ratio`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub family_id: String,
    pub m_or_k: f64,
    #[serde(rename = "N")]
    pub cells: usize,
    pub in_norm: f64,
    pub out_norm: f64,
    pub ratio: f64,
}

pub fn write_csv<'a>(rows: impl IntoIterator<Item = &'a Instance>, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Bounded,
    UnboundedTrend,
    Inconclusive,
}

/// Combination of component outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Aggregation {
    None,
    /// Split each input into `j_max` dyadic shells, apply the operator to
    /// each and combine with the `ℓ^u` norm (`u = ∞` takes the max).
    Lu { u: f64, j_max: usize },
}

/// Pointwise `(Σ|g_j|^u)^{1/u}`, or `max |g_j|` for `u = ∞`.
pub fn lu_combine(parts: &[GridFunction], u: f64) -> Result<GridFunction> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Degenerate("no components to combine".into()))?;
    let len = first.values().len();
    let mut acc = vec![0.0f64; len];
    for g in parts {
        if g.grid() != first.grid() {
            return Err(Error::Contract("components live on different grids".into()));
        }
        for (a, v) in acc.iter_mut().zip(g.values()) {
            if u.is_infinite() {
                *a = (*a).max(v.abs());
            } else {
                *a += v.abs().powf(u);
            }
        }
    }
    if u.is_finite() {
        acc.iter_mut().for_each(|a| *a = a.powf(1.0 / u));
    }
    GridFunction::new(*first.grid(), acc)
}

/// `f` restricted to the shells `|x|_∞ ≤ 1` and `2^{j-1} < |x|_∞ ≤ 2^j`,
/// the last shell taking everything outside.
pub fn dyadic_shells(f: &GridFunction, j_max: usize) -> Result<Vec<GridFunction>> {
    if j_max == 0 {
        return Err(Error::Precondition("shell count j_max must be positive".into()));
    }
    let g = *f.grid();
    let shell = |lin: usize| {
        let c = g.center(lin);
        let d = c[..g.n()].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let j = if d <= 1.0 { 0 } else { d.log2().ceil() as usize };
        j.min(j_max - 1)
    };
    let idx: Vec<usize> = (0..g.len()).map(shell).collect();
    (0..j_max)
        .map(|j| {
            let v = f
                .values()
                .iter()
                .zip(&idx)
                .map(|(&x, &s)| if s == j { x } else { 0.0 })
                .collect();
            GridFunction::new(g, v)
        })
        .collect()
}

/// A family member: a catalog function, optionally dilated as `f(x/t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub spec: CatalogSpec,
    pub dilation: f64,
}

impl From<CatalogSpec> for Member {
    fn from(spec: CatalogSpec) -> Self {
        Self { spec, dilation: 1.0 }
    }
}

impl Member {
    pub fn dilated(spec: CatalogSpec, t: f64) -> Self {
        Self { spec, dilation: t }
    }

    pub fn label(&self) -> String {
        if self.dilation == 1.0 {
            self.spec.to_string()
        } else {
            format!("{}@{:?}", self.spec, self.dilation)
        }
    }

    /// Cell values of `f(x/t)`: the catalog function sampled on the box of half-width
    /// `L/t` with the same cell count has exactly those values.
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        if !(self.dilation.is_finite() && self.dilation > 0.0) {
            return Err(Error::Domain(format!("dilation must be positive, got {}", self.dilation)));
        }
        if self.dilation == 1.0 {
            return sample_catalog(&self.spec, grid);
        }
        let shrunk = Grid::new(grid.n(), grid.half_width() / self.dilation, grid.cells_per_axis())?;
        GridFunction::new(*grid, sample_catalog(&self.spec, &shrunk)?.into_values())
    }
}

/// Source and target norms of a ratio experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct NormPair {
    pub phi: WeightFunction,
    pub q: f64,
    pub psi: WeightFunction,
    pub t: f64,
    pub weak_target: bool,
}

impl NormPair {
    pub fn same(phi: WeightFunction, q: f64) -> Self {
        Self {
            psi: phi.clone(),
            t: q,
            phi,
            q,
            weak_target: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub family: Vec<String>,
    pub op: String,
    pub phi: String,
    pub q: f64,
    pub psi: String,
    pub t: f64,
    pub weak_target: bool,
    pub aggregation: Aggregation,
    pub grid: Grid,
    pub refined: Grid,
    pub policy: CubePolicy,
    pub instances: Vec<Instance>,
    pub refined_instances: Vec<Instance>,
    /// Members with zero input norm.
    pub skipped: Vec<String>,
    pub sup_ratio: f64,
    pub refined_sup_ratio: f64,
    /// `|sup at 2N / sup at N − 1|`
    pub resolution_drift: f64,
    pub verdict: Verdict,
}

/// Longest run of strictly increasing consecutive values, in steps.
fn rising_steps(v: &[f64]) -> usize {
    let (mut best, mut run) = (0, 0);
    for w in v.windows(2) {
        run = if w[1] > w[0] { run + 1 } else { 0 };
        best = best.max(run);
    }
    best
}

fn apply_aggregated(
    op: &OperatorSpec,
    f: &GridFunction,
    agg: Aggregation,
    policy: &CubePolicy,
) -> Result<(GridFunction, GridFunction)> {
    match agg {
        Aggregation::None => Ok((f.clone(), op.apply(f, policy)?)),
        Aggregation::Lu { u, j_max } => {
            let parts = dyadic_shells(f, j_max)?;
            let outs: Vec<GridFunction> = par::map(parts.len(), |j| op.apply(&parts[j], policy))
                .into_iter()
                .collect::<Result<_>>()?;
            Ok((lu_combine(&parts, u)?, lu_combine(&outs, u)?))
        }
    }
}

fn ratio_instances(
    op: &OperatorSpec,
    norms: &NormPair,
    family: &[Member],
    agg: Aggregation,
    grid: &Grid,
    stride: usize,
) -> Result<(Vec<Instance>, Vec<String>)> {
    let policy = dyadic_policy(grid, stride);
    let rows = par::map(family.len(), |i| -> Result<Option<Instance>> {
        let f = family[i].sample(grid)?;
        let (input, output) = apply_aggregated(op, &f, agg, &policy)?;
        let in_norm = morrey_norm(&input, &norms.phi, norms.q, &policy)?.value;
        if in_norm == 0.0 {
            return Ok(None);
        }
        let out_norm = if norms.weak_target {
            weak_morrey_norm(&output, &norms.psi, norms.t, &policy)?.value
        } else {
            morrey_norm(&output, &norms.psi, norms.t, &policy)?.value
        };
        Ok(Some(Instance {
            family_id: family[i].label(),
            m_or_k: i as f64,
            cells: grid.cells_per_axis(),
            in_norm,
            out_norm,
            ratio: out_norm / in_norm,
        }))
    });
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for (m, r) in family.iter().zip(rows) {
        match r? {
            Some(i) => kept.push(i),
            None => skipped.push(format!("{}: zero input norm", m.label())),
        }
    }
    Ok((kept, skipped))
}

/// Ratios `‖T f‖_{(ψ,t)} / ‖f‖_{(φ,q)}` over a family, at `grid` and at the
/// refined grid with the same box.
pub fn boundedness_ratio(
    op: &OperatorSpec,
    norms: &NormPair,
    family: &[Member],
    aggregation: Aggregation,
    grid: &Grid,
    stride: usize,
) -> Result<RatioReport> {
    if family.is_empty() {
        return Err(Error::Precondition("ratio experiment needs a nonempty family".into()));
    }
    let refined = grid.refined()?;
    let (instances, skipped) = ratio_instances(op, norms, family, aggregation, grid, stride)?;
    let (refined_instances, _) = ratio_instances(op, norms, family, aggregation, &refined, stride)?;
    if instances.is_empty() {
        return Err(Error::Degenerate("every family member has zero input norm".into()));
    }
    let sup = |v: &[Instance]| v.iter().map(|i| i.ratio).fold(0.0f64, f64::max);
    let sup_ratio = sup(&instances);
    let refined_sup_ratio = sup(&refined_instances);
    let resolution_drift = (refined_sup_ratio / sup_ratio - 1.0).abs();
    let ratios: Vec<f64> = instances.iter().map(|i| i.ratio).collect();
    let verdict = if resolution_drift < DRIFT_TOL {
        Verdict::Bounded
    } else if rising_steps(&ratios) >= 3 && refined_sup_ratio > sup_ratio {
        Verdict::UnboundedTrend
    } else {
        Verdict::Inconclusive
    };
    Ok(RatioReport {
        family: family.iter().map(Member::label).collect(),
        op: op.to_string(),
        phi: norms.phi.to_string(),
        q: norms.q,
        psi: norms.psi.to_string(),
        t: norms.t,
        weak_target: norms.weak_target,
        aggregation,
        grid: *grid,
        refined,
        policy: dyadic_policy(grid, stride),
        instances,
        refined_instances,
        skipped,
        sup_ratio,
        refined_sup_ratio,
        resolution_drift,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shells_partition_and_recombine() {
        let g = Grid::new(1, 8.0, 64).unwrap();
        let f = GridFunction::from_fn(g, |x| 1.0 + x[0].abs()).unwrap();
        let parts = dyadic_shells(&f, 3).unwrap();
        let sum = parts.iter().skip(1).try_fold(parts[0].clone(), |a, b| a.add(b)).unwrap();
        assert_eq!(sum.values(), f.values());
        for u in [1.0, 2.0, f64::INFINITY] {
            let c = lu_combine(&parts, u).unwrap();
            for (a, b) in c.values().iter().zip(f.values()) {
                assert!((a - b).abs() <= 1e-15 * b);
            }
        }
        // |x| ≤ 1, (1, 2], rest
        let i = g.nearest(1.5);
        assert_eq!(parts[1].values()[i], f.values()[i]);
        assert_eq!(parts[0].values()[i], 0.0);
        assert_eq!(parts[2].values()[g.nearest(7.9)], f.values()[g.nearest(7.9)]);
    }

    #[test]
    fn dilated_member_matches_rescaled_sampling() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let m = Member::dilated(CatalogSpec::PowerDecay { n0: 2.0 }, 2.0);
        let f = m.sample(&g).unwrap();
        for i in 0..64 {
            let x = g.center(i)[0];
            let want = (1.0 + (x / 2.0).abs()).powf(-2.0);
            assert!((f.values()[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn maximal_ratio_report_is_reproducible() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let fam: Vec<Member> = function_corpus(4.0).unwrap().into_iter().take(6).map(Member::from).collect();
        let norms = NormPair::same(WeightFunction::power(0.5), 1.0);
        let op = OperatorSpec::hardy_littlewood();
        let a = boundedness_ratio(&op, &norms, &fam, Aggregation::None, &g, 1).unwrap();
        let b = boundedness_ratio(&op, &norms, &fam, Aggregation::None, &g, 1).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        // Mf ≥ |f| cellwise, so every ratio is at least 1
        assert!(a.instances.iter().all(|i| i.ratio >= 1.0 - 1e-12));
        assert_eq!(a.verdict, Verdict::Bounded);
        let mut buf = Vec::new();
        write_csv(&a.instances, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("family_id,m_or_k,N,in_norm,out_norm,ratio\n"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn zero_members_are_skipped() {
        let g = Grid::new(1, 4.0, 32).unwrap();
        let fam = vec![
            Member::from(CatalogSpec::IndicatorCube { center: 0.0, r: 1.0 }),
            Member::from(CatalogSpec::RadialTail { w: WeightFunction::power(0.0), r: 4.0 }),
        ];
        let norms = NormPair::same(WeightFunction::power(1.0), 1.0);
        let r = boundedness_ratio(&OperatorSpec::hardy_littlewood(), &norms, &fam, Aggregation::None, &g, 1).unwrap();
        assert_eq!(r.instances.len(), 1);
        assert_eq!(r.skipped.len(), 1);
    }

    #[test]
    fn rising_run_length() {
        assert_eq!(rising_steps(&[1.0, 2.0, 3.0, 2.0, 3.0]), 2);
        assert_eq!(rising_steps(&[1.0, 2.0, 3.0, 4.0]), 3);
        assert_eq!(rising_steps(&[1.0]), 0);
    }
}
