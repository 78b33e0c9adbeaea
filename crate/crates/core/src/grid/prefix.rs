//! Integral images of `|f|^q` with double-double accumulation.
//!
//! Corner sums are kept as unevaluated pairs `hi + lo` so that the
//! `2^n`-corner inclusion–exclusion reproduces direct summation to about
//! 1e-15 relative even for sums spanning the whole grid. Sums are stored in
//! cell units (no `h^n` factor): the `h^n` cancels in every average, and
//! sums of indicator values stay exact integers. Small cubes are summed
//! directly, which keeps tiny local sums accurate next to huge totals.

use super::{Cube, Grid, GridFunction, MAX_DIM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let hi = s + e;
        Dd { hi, lo: e - (hi - s) }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

/// Corner-indexed cumulative sums of `|f|^q` over `(N+1)^n` corners.
#[derive(Debug, Clone)]
pub struct PrefixTable {
    q: f64,
    source: u64,
    grid: Grid,
    dims: usize,
    hi: Vec<f64>,
    lo: Vec<f64>,
    raw: Vec<f64>,
}

/// Cubes with at most this many cells are summed directly.
const DIRECT_CELLS: usize = 32;

impl PrefixTable {
    pub fn new(f: &GridFunction, q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::Domain(format!("exponent q must be positive, got {q}")));
        }
        let vals: Vec<f64> = if q == 1.0 {
            f.values().iter().map(|v| v.abs()).collect()
        } else {
            f.values().iter().map(|v| v.abs().powf(q)).collect()
        };
        let mut t = Self::from_raw(f.grid(), &vals);
        t.q = q;
        t.source = f.id();
        Ok(t)
    }

    /// Table over already-transformed nonnegative cell values. Not tied to
    /// any [`GridFunction`]; used internally for level sets.
    pub(crate) fn from_raw(grid: &Grid, vals: &[f64]) -> Self {
        let n = grid.n();
        let cells = grid.cells_per_axis();
        let dims = cells + 1;
        let total = dims.pow(n as u32);
        let mut acc = vec![Dd::default(); total];
        for (lin, &v) in vals.iter().enumerate() {
            let m = grid.multi(lin);
            let mut c = 0;
            for d in 0..n {
                c = c * dims + m[d] + 1;
            }
            acc[c] = Dd { hi: v, lo: 0.0 };
        }
        // cumulative sums along each axis in turn
        for axis in 0..n {
            let step = dims.pow((n - 1 - axis) as u32);
            for c in 0..total {
                let coord = (c / step) % dims;
                if coord > 0 {
                    acc[c] = acc[c].add(acc[c - step]);
                }
            }
        }
        Self {
            q: f64::NAN,
            source: 0,
            grid: *grid,
            dims,
            hi: acc.iter().map(|d| d.hi).collect(),
            lo: acc.iter().map(|d| d.lo).collect(),
            raw: vals.to_vec(),
        }
    }

    pub fn exponent(&self) -> f64 {
        self.q
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Contract check: the table was built from `f` with exponent `q`.
    pub fn check(&self, f: &GridFunction, q: f64) -> Result<()> {
        if self.source != f.id() || self.q != q || self.grid != *f.grid() {
            return Err(Error::Contract(format!(
                "prefix table (q = {}) was not built for this function with q = {q}",
                self.q
            )));
        }
        Ok(())
    }

    /// `Σ_{cells ∈ Q} |f|^q` (cell units).
    pub fn cube_sum(&self, cube: &Cube) -> f64 {
        self.box_sum(cube.lo(), cube.side())
    }

    pub(crate) fn box_sum(&self, lo: &[usize], side: usize) -> f64 {
        let n = lo.len();
        if side.pow(n as u32) <= DIRECT_CELLS {
            return self.direct_sum(lo, side);
        }
        let mut acc = Dd::default();
        for mask in 0..(1usize << n) {
            let mut c = 0;
            let mut far = 0;
            for d in 0..n {
                let upper = mask >> d & 1 == 1;
                far += upper as usize;
                c = c * self.dims + lo[d] + if upper { side } else { 0 };
            }
            let v = Dd {
                hi: self.hi[c],
                lo: self.lo[c],
            };
            acc = if (n - far).is_multiple_of(2) { acc.add(v) } else { acc.add(v.neg()) };
        }
        let s = acc.hi + acc.lo;
        s.max(0.0)
    }

    fn direct_sum(&self, lo: &[usize], side: usize) -> f64 {
        let n = lo.len();
        let cells = self.grid.cells_per_axis();
        let mut total = 0.0;
        let mut idx = [0usize; MAX_DIM];
        for k in 0..side.pow(n as u32) {
            let mut r = k;
            for d in (0..n).rev() {
                idx[d] = lo[d] + r % side;
                r /= side;
            }
            let lin = idx[..n].iter().fold(0, |acc, &i| acc * cells + i);
            total += self.raw[lin];
        }
        total
    }

    /// Sums over every placement of a side-`s` window with offsets that are
    /// multiples of `stride`, as a row-major array of shape `K^n`.
    pub(crate) fn window_sums(&self, s: usize, stride: usize) -> (usize, Vec<f64>) {
        let n = self.grid.n();
        let k = (self.grid.cells_per_axis() - s) / stride + 1;
        let total = k.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        let mut lo = [0usize; MAX_DIM];
        for m in 0..total {
            let mut r = m;
            for d in (0..n).rev() {
                lo[d] = (r % k) * stride;
                r /= k;
            }
            out.push(self.box_sum(&lo[..n], s));
        }
        (k, out)
    }
}

/// `(sum/cells)^{1/q}`, the common final step of every cube average.
#[inline]
pub fn mean_root(sum: f64, cells: f64, q: f64) -> f64 {
    let m = sum / cells;
    if q == 1.0 {
        m
    } else {
        m.powf(1.0 / q)
    }
}

/// `((1/|Q|) Σ_{Q} |f|^q h^n)^{1/q}` via the prefix table.
pub fn cube_average_q(f: &GridFunction, q: f64, cube: &Cube, table: &PrefixTable) -> Result<f64> {
    table.check(f, q)?;
    cube.check(f.grid())?;
    Ok(mean_root(table.cube_sum(cube), cube.cell_count() as f64, q))
}
