//! Named test functions sampled at cell centres.
//!
//! Textual forms (used by the CLI):
//!
//! ```text
//! cube:c,r   ball:c,R   annulus:a,b   cone:a,b   decay:N0
//! radial(<w>)   tail(<w>,R)   stair(<w>,jmin,jmax)   packed(<w>,q,k,i)
//! twolevel   smooth:seed   spikes:seed
//! ```
//!
//! Centres are scalars `c` standing for the point `(c, …, c)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grid, GridFunction};
use crate::error::{Error, Result};
use crate::weight::WeightFunction;

#[derive(Debug, Clone, PartialEq)]
pub enum CatalogSpec {
    /// `χ_{Q(c,r)}`: sup-distance to the centre at most `r`.
    IndicatorCube { center: f64, r: f64 },
    /// `χ_{B(c,R)}`, Euclidean.
    IndicatorBall { center: f64, radius: f64 },
    /// `χ` of `r_in < |x| ≤ r_out`.
    Annulus { r_in: f64, r_out: f64 },
    /// Annulus intersected with the cone `2x₁ > |x|`.
    ConeAnnulus { r_in: f64, r_out: f64 },
    /// `(1+|x|)^{-N0}`
    PowerDecay { n0: f64 },
    /// `w(|x|)`
    RadialWeight { w: WeightFunction },
    /// `w(|x|)` for `|x| ≥ R`, zero inside.
    RadialTail { w: WeightFunction, r: f64 },
    /// `Σ_{j=jmin}^{jmax} χ_{[2^{-j-1}, 2^{-j})^n} / w(2^{-j})`
    Staircase { w: WeightFunction, j_min: i32, j_max: i32 },
    /// Packed-cube function `f_{k,i}` on `[0,1]^n` for `s_k = 2^{-k}`.
    Packed { w: WeightFunction, q: f64, k: u32, i: usize },
    /// `2χ_{Q(0,1)} + χ_{Q(0,2) \ Q(0,1)}`
    TwoLevel,
    /// A few Gaussian bumps with seeded positions, widths and heights.
    RandomSmooth { seed: u64 },
    /// Narrow boxes of physical radius `L/64` or `L/32` with seeded heights.
    RandomSpikes { seed: u64 },
}

/// Parameters of the packed family for one `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackedLayout {
    pub s_k: f64,
    pub ell: usize,
    pub m: usize,
    /// Side of one piece, `1/(ℓ m)`.
    pub delta: f64,
    /// Height of every piece, `1/w(δ)`.
    pub height: f64,
}

impl PackedLayout {
    pub fn new(w: &WeightFunction, q: f64, n: usize, k: u32) -> Self {
        let s_k = (-(k as f64)).exp2();
        let phi = w.value(s_k);
        let e = q / n as f64;
        let ell = (1.0 + phi.powf(e) / s_k).floor() as usize;
        let m = (1.0 + phi.powf(-e)).floor() as usize;
        let delta = 1.0 / (ell * m) as f64;
        Self {
            s_k,
            ell,
            m,
            delta,
            height: 1.0 / w.value(delta),
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn within_box(grid: &Grid, extent: f64, what: &str) -> Result<()> {
    if extent > grid.half_width() * (1.0 + 1e-12) {
        return Err(Error::InvalidGrid(format!(
            "{what} reaches {extent}, outside the box of half-width {}",
            grid.half_width()
        )));
    }
    Ok(())
}

/// Smallest power-of-two `N` with `2L/N ≤ h_max`.
fn required_n(grid: &Grid, h_max: f64) -> usize {
    let need = (2.0 * grid.half_width() / h_max).ceil().max(8.0) as usize;
    need.next_power_of_two()
}

pub fn sample_catalog(spec: &CatalogSpec, grid: &Grid) -> Result<GridFunction> {
    let n = grid.n();
    let h = grid.h();
    use CatalogSpec as C;
    match spec {
        C::IndicatorCube { center, r } => {
            within_box(grid, center.abs() + r, "cube")?;
            GridFunction::from_fn(*grid, |x| {
                let inside = x.iter().all(|&xi| (xi - center).abs() <= *r);
                inside as u8 as f64
            })
        }
        C::IndicatorBall { center, radius } => {
            within_box(grid, center.abs() + radius, "ball")?;
            GridFunction::from_fn(*grid, |x| {
                let d: f64 = x.iter().map(|&xi| (xi - center).powi(2)).sum::<f64>().sqrt();
                (d <= *radius) as u8 as f64
            })
        }
        C::Annulus { r_in, r_out } | C::ConeAnnulus { r_in, r_out } => {
            if !(0.0 <= *r_in && r_in < r_out) {
                return Err(Error::InvalidGrid(format!("annulus needs 0 ≤ r_in < r_out, got {r_in}, {r_out}")));
            }
            within_box(grid, *r_out, "annulus")?;
            let cone = matches!(spec, C::ConeAnnulus { .. });
            GridFunction::from_fn(*grid, |x| {
                let d = norm(x);
                let ok = d > *r_in && d <= *r_out && (!cone || 2.0 * x[0] > d);
                ok as u8 as f64
            })
        }
        C::PowerDecay { n0 } => GridFunction::from_fn(*grid, |x| (1.0 + norm(x)).powf(-n0)),
        C::RadialWeight { w } => GridFunction::from_fn(*grid, |x| w.value(norm(x))),
        C::RadialTail { w, r } => {
            within_box(grid, *r, "tail radius")?;
            GridFunction::from_fn(*grid, |x| {
                let d = norm(x);
                if d >= *r {
                    w.value(d)
                } else {
                    0.0
                }
            })
        }
        C::Staircase { w, j_min, j_max } => {
            if j_min > j_max {
                return Err(Error::InvalidGrid(format!("staircase needs jmin ≤ jmax, got {j_min} > {j_max}")));
            }
            within_box(grid, (-(*j_min as f64)).exp2(), "staircase")?;
            let finest = (-(*j_max as f64) - 1.0).exp2();
            if finest < 2.0 * h {
                return Err(Error::Resolution {
                    msg: format!("staircase step of side {finest} is below two cells (h = {h})"),
                    required_n: required_n(grid, finest / 2.0),
                });
            }
            GridFunction::from_fn(*grid, |x| {
                let mut v = 0.0;
                for j in *j_min..=*j_max {
                    let b = (-(j as f64)).exp2();
                    if x.iter().all(|&xi| xi >= b / 2.0 && xi < b) {
                        v += 1.0 / w.value(b);
                    }
                }
                v
            })
        }
        C::Packed { w, q, k, i } => {
            within_box(grid, 1.0, "packed family support [0,1]^n")?;
            let lay = PackedLayout::new(w, *q, n, *k);
            if *i >= lay.m.pow(n as u32) {
                return Err(Error::InvalidGrid(format!("packed index i = {i} must be below m_k^n = {}", lay.m.pow(n as u32))));
            }
            if lay.delta < 4.0 * h {
                return Err(Error::Resolution {
                    msg: format!("packed piece of side {} is below four cells (h = {h})", lay.delta),
                    required_n: required_n(grid, lay.delta / 4.0),
                });
            }
            let mut e = [0usize; 3];
            let mut r = *i;
            for d in (0..n).rev() {
                e[d] = r % lay.m;
                r /= lay.m;
            }
            let ell = lay.ell as f64;
            GridFunction::from_fn(*grid, |x| {
                let inside = (0..n).all(|d| {
                    if !(0.0..1.0).contains(&x[d]) {
                        return false;
                    }
                    // position inside the enclosing 1/ℓ tile, in units of δ
                    let j = (x[d] * ell).floor();
                    let local = (x[d] - j / ell) / lay.delta;
                    local >= e[d] as f64 && local < (e[d] + 1) as f64
                });
                if inside {
                    lay.height
                } else {
                    0.0
                }
            })
        }
        C::TwoLevel => {
            within_box(grid, 2.0, "two-level function")?;
            GridFunction::from_fn(*grid, |x| {
                let d = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if d <= 1.0 {
                    2.0
                } else if d <= 2.0 {
                    1.0
                } else {
                    0.0
                }
            })
        }
        C::RandomSmooth { seed } => {
            let l = grid.half_width();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let count = rng.gen_range(3..=6);
            let bumps: Vec<([f64; 3], f64, f64)> = (0..count)
                .map(|_| {
                    let mut c = [0.0; 3];
                    for v in c.iter_mut().take(n) {
                        *v = rng.gen_range(-0.5 * l..0.5 * l);
                    }
                    (c, rng.gen_range(l / 32.0..l / 8.0), rng.gen_range(0.2..1.0))
                })
                .collect();
            GridFunction::from_fn(*grid, |x| {
                bumps
                    .iter()
                    .map(|(c, s, a)| {
                        let d2: f64 = (0..n).map(|d| (x[d] - c[d]).powi(2)).sum();
                        a * (-0.5 * d2 / (s * s)).exp()
                    })
                    .sum()
            })
        }
        C::RandomSpikes { seed } => {
            let l = grid.half_width();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let count = rng.gen_range(3..=8);
            let boxes: Vec<([f64; 3], f64, f64)> = (0..count)
                .map(|_| {
                    let mut c = [0.0; 3];
                    for v in c.iter_mut().take(n) {
                        *v = rng.gen_range(-0.5 * l..0.5 * l);
                    }
                    let r = if rng.gen_bool(0.5) { l / 64.0 } else { l / 32.0 };
                    (c, r, rng.gen_range(0.5..4.0))
                })
                .collect();
            GridFunction::from_fn(*grid, |x| {
                boxes
                    .iter()
                    .filter(|(c, r, _)| (0..n).all(|d| (x[d] - c[d]).abs() <= *r))
                    .map(|(_, _, a)| *a)
                    .sum()
            })
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

impl fmt::Display for CatalogSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CatalogSpec as C;
        match self {
            C::IndicatorCube { center, r } => write!(f, "cube:{},{}", num(*center), num(*r)),
            C::IndicatorBall { center, radius } => write!(f, "ball:{},{}", num(*center), num(*radius)),
            C::Annulus { r_in, r_out } => write!(f, "annulus:{},{}", num(*r_in), num(*r_out)),
            C::ConeAnnulus { r_in, r_out } => write!(f, "cone:{},{}", num(*r_in), num(*r_out)),
            C::PowerDecay { n0 } => write!(f, "decay:{}", num(*n0)),
            C::RadialWeight { w } => write!(f, "radial({w})"),
            C::RadialTail { w, r } => write!(f, "tail({w},{})", num(*r)),
            C::Staircase { w, j_min, j_max } => write!(f, "stair({w},{j_min},{j_max})"),
            C::Packed { w, q, k, i } => write!(f, "packed({w},{},{k},{i})", num(*q)),
            C::TwoLevel => write!(f, "twolevel"),
            C::RandomSmooth { seed } => write!(f, "smooth:{seed}"),
            C::RandomSpikes { seed } => write!(f, "spikes:{seed}"),
        }
    }
}

pub(crate) fn bad(s: &str, why: &str) -> Error {
    Error::Parse {
        pos: 0,
        msg: format!("function spec `{s}`: {why}"),
    }
}

fn nums(s: &str, body: &str, count: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = body
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(s, "malformed number"))?;
    if v.len() != count || v.iter().any(|x| !x.is_finite()) {
        return Err(bad(s, &format!("expected {count} finite numbers")));
    }
    Ok(v)
}

/// Splits `<w>,a,b` at the top-level commas following a weight expression.
pub(crate) fn weight_then_args(s: &str, inner: &str, count: usize) -> Result<(WeightFunction, Vec<String>)> {
    let mut depth = 0i32;
    let mut cuts = Vec::new();
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => cuts.push(i),
            _ => {}
        }
    }
    // weight expressions may contain top-level commas themselves (`power:a`
    // never does, but `powerlog:a,b,c` does), so take the last `count` cuts
    if cuts.len() < count {
        return Err(bad(s, &format!("expected a weight and {count} arguments")));
    }
    let split = cuts[cuts.len() - count];
    let w: WeightFunction = inner[..split].parse()?;
    let args = inner[split + 1..].split(',').map(|t| t.trim().to_string()).collect();
    Ok((w, args))
}

impl FromStr for CatalogSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use CatalogSpec as C;
        let s = s.trim();
        let call = |name: &str| -> Option<&str> { s.strip_prefix(name).and_then(|r| r.strip_suffix(')')) };
        if let Some(b) = s.strip_prefix("cube:") {
            let v = nums(s, b, 2)?;
            return Ok(C::IndicatorCube { center: v[0], r: v[1] });
        }
        if let Some(b) = s.strip_prefix("ball:") {
            let v = nums(s, b, 2)?;
            return Ok(C::IndicatorBall { center: v[0], radius: v[1] });
        }
        if let Some(b) = s.strip_prefix("annulus:") {
            let v = nums(s, b, 2)?;
            return Ok(C::Annulus { r_in: v[0], r_out: v[1] });
        }
        if let Some(b) = s.strip_prefix("cone:") {
            let v = nums(s, b, 2)?;
            return Ok(C::ConeAnnulus { r_in: v[0], r_out: v[1] });
        }
        if let Some(b) = s.strip_prefix("decay:") {
            return Ok(C::PowerDecay { n0: nums(s, b, 1)?[0] });
        }
        if s == "twolevel" {
            return Ok(C::TwoLevel);
        }
        if let Some(b) = s.strip_prefix("smooth:") {
            let seed = b.trim().parse().map_err(|_| bad(s, "seed must be an unsigned integer"))?;
            return Ok(C::RandomSmooth { seed });
        }
        if let Some(b) = s.strip_prefix("spikes:") {
            let seed = b.trim().parse().map_err(|_| bad(s, "seed must be an unsigned integer"))?;
            return Ok(C::RandomSpikes { seed });
        }
        if let Some(inner) = call("radial(") {
            return Ok(C::RadialWeight { w: inner.parse()? });
        }
        if let Some(inner) = call("tail(") {
            let (w, a) = weight_then_args(s, inner, 1)?;
            let r = a[0].parse().map_err(|_| bad(s, "malformed radius"))?;
            return Ok(C::RadialTail { w, r });
        }
        if let Some(inner) = call("stair(") {
            let (w, a) = weight_then_args(s, inner, 2)?;
            let j_min = a[0].parse().map_err(|_| bad(s, "jmin must be an integer"))?;
            let j_max = a[1].parse().map_err(|_| bad(s, "jmax must be an integer"))?;
            return Ok(C::Staircase { w, j_min, j_max });
        }
        if let Some(inner) = call("packed(") {
            let (w, a) = weight_then_args(s, inner, 3)?;
            let q = a[0].parse().map_err(|_| bad(s, "malformed q"))?;
            let k = a[1].parse().map_err(|_| bad(s, "k must be a nonnegative integer"))?;
            let i = a[2].parse().map_err(|_| bad(s, "i must be a nonnegative integer"))?;
            return Ok(C::Packed { w, q, k, i });
        }
        Err(bad(s, "unknown function kind"))
    }
}
