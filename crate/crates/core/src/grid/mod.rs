//! Uniform lattices on `[-L, L]^n`, cell-aligned cubes and sampled functions.

pub(crate) mod catalog;
mod io;
mod prefix;

pub use catalog::{sample_catalog, CatalogSpec, PackedLayout};
pub use prefix::{cube_average_q, mean_root, PrefixTable};

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on `N^n`.
pub const MAX_CELLS: usize = 1 << 24;

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    n: usize,
    #[serde(rename = "L")]
    half_width: f64,
    #[serde(rename = "N")]
    cells: usize,
}

impl Grid {
    pub fn new(n: usize, half_width: f64, cells: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidGrid(format!("dimension n = {n} outside 1..=3")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width L = {half_width} must be positive")));
        }
        if cells < 8 || !cells.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("N = {cells} must be a power of two ≥ 8")));
        }
        match cells.checked_pow(n as u32) {
            Some(total) if total <= MAX_CELLS => {}
            _ => {
                return Err(Error::InvalidGrid(format!(
                    "N^n = {cells}^{n} exceeds the cap of {MAX_CELLS} cells"
                )))
            }
        }
        Ok(Self {
            n,
            half_width,
            cells,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    /// Total number of cells `N^n`.
    pub fn len(&self) -> usize {
        self.cells.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of the centre of cell `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h()
    }

    /// Cell index whose centre is nearest to `x` along one axis.
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x + self.half_width) / self.h() - 0.5).round();
        i.clamp(0.0, (self.cells - 1) as f64) as usize
    }

    /// Row-major (last axis fastest) linear index.
    pub fn linear(&self, idx: &[usize]) -> usize {
        idx[..self.n].iter().fold(0, |acc, &i| acc * self.cells + i)
    }

    pub fn multi(&self, mut lin: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for d in (0..self.n).rev() {
            out[d] = lin % self.cells;
            lin /= self.cells;
        }
        out
    }

    /// Centre of the cell with linear index `lin`; unused axes are 0.
    pub fn center(&self, lin: usize) -> [f64; MAX_DIM] {
        let m = self.multi(lin);
        let mut x = [0.0; MAX_DIM];
        for d in 0..self.n {
            x[d] = self.coord(m[d]);
        }
        x
    }

    /// Same box, twice the cells per axis.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.n, self.half_width, self.cells * 2)
    }
}

/// Axis-aligned cube of `side` cells per axis starting at cell `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CubeRepr", into = "CubeRepr")]
pub struct Cube {
    n: usize,
    lo: [usize; MAX_DIM],
    side: usize,
}

#[derive(Serialize, Deserialize)]
struct CubeRepr {
    lo: Vec<usize>,
    side: usize,
}

impl TryFrom<CubeRepr> for Cube {
    type Error = Error;

    fn try_from(r: CubeRepr) -> Result<Self> {
        Cube::new(&r.lo, r.side)
    }
}

impl From<Cube> for CubeRepr {
    fn from(c: Cube) -> Self {
        CubeRepr {
            lo: c.lo().to_vec(),
            side: c.side,
        }
    }
}

impl Cube {
    pub fn new(lo: &[usize], side: usize) -> Result<Self> {
        if lo.is_empty() || lo.len() > MAX_DIM {
            return Err(Error::Contract(format!("cube needs 1..=3 lower corners, got {}", lo.len())));
        }
        if side == 0 {
            return Err(Error::Contract("cube side must be at least one cell".into()));
        }
        let mut a = [0; MAX_DIM];
        a[..lo.len()].copy_from_slice(lo);
        Ok(Self {
            n: lo.len(),
            lo: a,
            side,
        })
    }

    /// The whole grid.
    pub fn full(grid: &Grid) -> Self {
        Self {
            n: grid.n(),
            lo: [0; MAX_DIM],
            side: grid.cells_per_axis(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> &[usize] {
        &self.lo[..self.n]
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of cells `side^n`.
    pub fn cell_count(&self) -> usize {
        self.side.pow(self.n as u32)
    }

    pub fn side_length(&self, grid: &Grid) -> f64 {
        self.side as f64 * grid.h()
    }

    /// `r_Q = side·h/2`, the radius fed to weights.
    pub fn radius(&self, grid: &Grid) -> f64 {
        0.5 * self.side_length(grid)
    }

    pub fn volume(&self, grid: &Grid) -> f64 {
        self.side_length(grid).powi(self.n as i32)
    }

    pub fn fits(&self, grid: &Grid) -> bool {
        self.n == grid.n() && self.lo().iter().all(|&a| a + self.side <= grid.cells_per_axis())
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        if self.fits(grid) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "cube lo={:?} side={} does not fit a {}-d grid with N = {}",
                self.lo(),
                self.side,
                grid.n(),
                grid.cells_per_axis()
            )))
        }
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        (0..self.n).all(|d| idx[d] >= self.lo[d] && idx[d] < self.lo[d] + self.side)
    }

    /// Whether `idx` lies in the concentric dilation `kQ` (`k` odd).
    pub fn dilate_contains(&self, k: usize, idx: &[usize]) -> bool {
        let ext = (k.saturating_sub(1) / 2 * self.side) as i64;
        (0..self.n).all(|d| {
            let a = self.lo[d] as i64 - ext;
            let b = (self.lo[d] + self.side) as i64 + ext;
            let i = idx[d] as i64;
            i >= a && i < b
        })
    }

    /// Linear indices of the cells in the cube, row-major.
    pub fn cells(&self, grid: &Grid) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cell_count());
        let mut idx = [0usize; MAX_DIM];
        for k in 0..self.cell_count() {
            let mut r = k;
            for d in (0..self.n).rev() {
                idx[d] = self.lo[d] + r % self.side;
                r /= self.side;
            }
            out.push(grid.linear(&idx));
        }
        out
    }
}

/// Which cubes a supremum runs over: a set of side lengths (in cells) and a
/// stride for the lower corners.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubePolicy {
    pub sides: Vec<usize>,
    pub stride: usize,
}

impl CubePolicy {
    /// Sides `1, 2, 4, …, N` at stride 1.
    pub fn dyadic(grid: &Grid) -> Self {
        let mut sides = Vec::new();
        let mut s = 1;
        while s <= grid.cells_per_axis() {
            sides.push(s);
            s *= 2;
        }
        Self { sides, stride: 1 }
    }

    /// Every side `1..=N` at stride 1.
    pub fn all(grid: &Grid) -> Self {
        Self {
            sides: (1..=grid.cells_per_axis()).collect(),
            stride: 1,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.sides.is_empty() {
            return Err(Error::Contract("cube policy has no sides".into()));
        }
        if self.stride == 0 {
            return Err(Error::Contract("cube policy stride must be positive".into()));
        }
        if let Some(&s) = self.sides.iter().find(|&&s| s == 0 || s > grid.cells_per_axis()) {
            return Err(Error::Contract(format!(
                "cube side {s} outside 1..={}",
                grid.cells_per_axis()
            )));
        }
        Ok(())
    }

    /// Number of placements per axis for side `s`.
    pub fn offsets_per_axis(&self, grid: &Grid, s: usize) -> usize {
        (grid.cells_per_axis() - s) / self.stride + 1
    }
}

/// All cubes of the policy: sides in policy order, lower corners row-major.
pub fn enumerate_cubes(grid: &Grid, policy: &CubePolicy) -> Result<Vec<Cube>> {
    policy.validate(grid)?;
    let mut out = Vec::new();
    for &s in &policy.sides {
        for_each_offset(grid, policy, s, |lo| out.push(Cube { n: grid.n(), lo, side: s }));
    }
    Ok(out)
}

/// Calls `f` with the lower corner of every placement of side `s`, in
/// row-major order.
pub(crate) fn for_each_offset(grid: &Grid, policy: &CubePolicy, s: usize, mut f: impl FnMut([usize; MAX_DIM])) {
    let k = policy.offsets_per_axis(grid, s);
    let n = grid.n();
    let total = k.pow(n as u32);
    let mut lo = [0usize; MAX_DIM];
    for m in 0..total {
        let mut r = m;
        for d in (0..n).rev() {
            lo[d] = (r % k) * policy.stride;
            r /= k;
        }
        f(lo);
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Cell-centred samples on a [`Grid`]. Immutable; every new set of values
/// gets a fresh identity so derived tables can be matched to their source.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    id: u64,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for the grid, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("value at cell {i} is not finite")));
        }
        Ok(Self {
            grid,
            values,
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::new(grid, vec![0.0; grid.len()]).expect("zeros are finite")
    }

    /// Samples `f` at every cell centre (coordinates beyond `n` are 0).
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.center(i)[..grid.n()])).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.linear(idx)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// `|f|^η`.
    pub fn abs_pow(&self, eta: f64) -> Result<Self> {
        self.map(|v| v.abs().powf(eta))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Contract("grid functions live on different grids".into()));
        }
        Self::new(self.grid, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    /// `f·χ_Q`.
    pub fn restrict(&self, cube: &Cube) -> Result<Self> {
        cube.check(&self.grid)?;
        let mut values = vec![0.0; self.values.len()];
        for i in cube.cells(&self.grid) {
            values[i] = self.values[i];
        }
        Self::new(self.grid, values)
    }

    /// `(Σ |f|^q h^n)^{1/q}`.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(q)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / q)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Smallest cube containing every nonzero cell, or `None` for `f ≡ 0`.
    pub fn support_box(&self) -> Option<([usize; MAX_DIM], [usize; MAX_DIM])> {
        let n = self.grid.n();
        let mut lo = [usize::MAX; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        let mut any = false;
        for (i, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                any = true;
                let m = self.grid.multi(i);
                for d in 0..n {
                    lo[d] = lo[d].min(m[d]);
                    hi[d] = hi[d].max(m[d]);
                }
            }
        }
        any.then_some((lo, hi))
    }
}
