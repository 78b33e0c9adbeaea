//! Fixed test corpora. The lists are versioned: changing a member changes
//! acceptance numbers, so bump [`CORPUS_VERSION`] with it.

use crate::error::{Error, Result};
use crate::grid::{sample_catalog, CatalogSpec, Grid, GridFunction};
use crate::weight::WeightFunction;

pub const CORPUS_VERSION: u32 = 1;

/// Twelve deterministic functions followed by eight seeded random ones.
/// Geometric parameters scale with the box half-width `l`, which must be at
/// least 2 (the two-level function and the staircase live on `[-2, 2]^n`).
pub fn function_corpus(l: f64) -> Result<Vec<CatalogSpec>> {
    if l < 2.0 {
        return Err(Error::InvalidGrid(format!("corpus needs half-width L ≥ 2, got {l}")));
    }
    use CatalogSpec as C;
    let mut v = vec![
        C::IndicatorCube { center: 0.0, r: l / 8.0 },
        C::IndicatorCube { center: l / 4.0, r: l / 16.0 },
        C::IndicatorBall { center: -l / 4.0, radius: l / 8.0 },
        C::Annulus { r_in: l / 16.0, r_out: l / 4.0 },
        C::ConeAnnulus { r_in: l / 16.0, r_out: l / 4.0 },
        C::PowerDecay { n0: 2.0 },
        C::PowerDecay { n0: 1.0 },
        C::RadialWeight { w: WeightFunction::power(-0.25) },
        C::RadialTail { w: WeightFunction::power(-0.5), r: l / 4.0 },
        C::Staircase { w: WeightFunction::power(0.25), j_min: 0, j_max: 2 },
        C::TwoLevel,
        C::RadialWeight { w: WeightFunction::exp_damped(0.0, 1.0) },
    ];
    v.extend((1..=4).map(|seed| C::RandomSmooth { seed }));
    v.extend((1..=4).map(|seed| C::RandomSpikes { seed }));
    Ok(v)
}

/// [`function_corpus`] sampled on `grid`.
pub fn sampled_corpus(grid: &Grid) -> Result<Vec<(CatalogSpec, GridFunction)>> {
    function_corpus(grid.half_width())?
        .into_iter()
        .map(|s| sample_catalog(&s, grid).map(|f| (s, f)))
        .collect()
}

/// Weights for the integral-condition checks: eight satisfy it, four do not.
pub fn weight_corpus() -> Vec<WeightFunction> {
    let p = WeightFunction::power;
    vec![
        p(0.5),
        p(1.0),
        p(0.25),
        p(2.0),
        WeightFunction::power_log(0.5, 0.0, -1.0),
        WeightFunction::max(p(0.5), p(1.0)),
        WeightFunction::sum(p(0.25), p(1.0)),
        p(0.75).scaled(3.0),
        p(0.0),
        WeightFunction::min(p(0.5), p(0.0)),
        WeightFunction::power_log(0.0, 0.0, 1.0),
        WeightFunction::exp_damped(0.5, 1.0),
    ]
}
