//! `(φ,q)`-blocks, finite block decompositions and the duality pairing.
//!
//! A block is a function `A` supported on a cube `Q` with
//! `‖A‖_{L^{q'}} ≤ |Q|^{-1/q}·φ(r_Q)`. Regrouped blocks are certified
//! against a dilate `kQ` of a dyadic cube, which may stick out of the box;
//! `|kQ|` and `r_{kQ}` are then taken for the full dilate.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cube, CubePolicy, Grid, GridFunction};
use crate::norms::morrey_norm;
use crate::weight::WeightFunction;

/// Relative slack of block certification.
pub const CERT_TOL: f64 = 1e-12;

/// Dilation factor of regrouped blocks.
pub const REGROUP_DILATION: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub data: GridFunction,
    pub cube: Cube,
    /// Odd factor `k` of the certifying dilate `kQ`; 1 for plain blocks.
    pub dilation: usize,
    pub certified: bool,
}

fn conjugate(q: f64) -> Result<f64> {
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::Domain(format!("blocks need q > 1, got {q}")));
    }
    Ok(q / (q - 1.0))
}

/// `|kQ|^{-1/q}·φ(r_{kQ})`, the block bound.
pub fn block_bound(grid: &Grid, cube: &Cube, dilation: usize, phi: &WeightFunction, q: f64) -> Result<f64> {
    let side = (dilation * cube.side()) as f64 * grid.h();
    let vol = side.powi(grid.n() as i32);
    Ok(vol.powf(-1.0 / q) * phi.eval(0.5 * side)?)
}

impl Block {
    /// Support inside `kQ` and `‖A‖_{q'}` within the bound (relative slack
    /// [`CERT_TOL`]).
    pub fn check(&self, phi: &WeightFunction, q: f64) -> Result<bool> {
        let qp = conjugate(q)?;
        let g = self.data.grid();
        self.cube.check(g)?;
        let inside = self
            .data
            .values()
            .iter()
            .enumerate()
            .all(|(i, &v)| v == 0.0 || self.cube.dilate_contains(self.dilation, &g.multi(i)[..g.n()]));
        let bound = block_bound(g, &self.cube, self.dilation, phi, q)?;
        Ok(inside && self.data.lq_norm(qp) <= bound * (1.0 + CERT_TOL))
    }
}

/// `B = φ(r_Q)/(|Q|^{1/q}‖fχ_Q‖_{q'})·fχ_Q`, so that `‖B‖_{q'}` equals the
/// block bound.
pub fn make_block(f: &GridFunction, cube: &Cube, phi: &WeightFunction, q: f64) -> Result<Block> {
    let qp = conjugate(q)?;
    let a = f.restrict(cube)?;
    let norm = a.lq_norm(qp);
    if norm == 0.0 {
        return Err(Error::Degenerate(format!(
            "function vanishes on the cube lo={:?} side={}",
            cube.lo(),
            cube.side()
        )));
    }
    let c = block_bound(f.grid(), cube, 1, phi, q)? / norm;
    let mut block = Block {
        data: a.scale(c)?,
        cube: *cube,
        dilation: 1,
        certified: false,
    };
    block.certified = block.check(phi, q)?;
    Ok(block)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub lambda: f64,
    pub block: Block,
}

/// `Σ λ_k A_k` with all blocks for the same `(φ, q)` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub phi: WeightFunction,
    pub q: f64,
    pub grid: Grid,
    pub terms: Vec<Term>,
}

impl BlockDecomposition {
    pub fn new(grid: Grid, phi: WeightFunction, q: f64, terms: Vec<Term>) -> Result<Self> {
        conjugate(q)?;
        if let Some(t) = terms.iter().find(|t| *t.block.data.grid() != grid) {
            return Err(Error::Contract(format!(
                "block on cube lo={:?} lives on a different grid",
                t.block.cube.lo()
            )));
        }
        if let Some(t) = terms.iter().find(|t| !t.lambda.is_finite()) {
            return Err(Error::Contract(format!("coefficient {} is not finite", t.lambda)));
        }
        Ok(Self { phi, q, grid, terms })
    }

    /// `Σ|λ_k|`.
    pub fn l1_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.lambda.abs()).sum()
    }

    /// `Σ λ_k A_k` cell-wise, terms added in order.
    pub fn resum(&self) -> Result<GridFunction> {
        let mut acc = vec![0.0; self.grid.len()];
        for t in &self.terms {
            for (a, &v) in acc.iter_mut().zip(t.block.data.values()) {
                *a += t.lambda * v;
            }
        }
        GridFunction::new(self.grid, acc)
    }

    pub fn all_certified(&self) -> bool {
        self.terms.iter().all(|t| t.block.certified)
    }

    fn require_certified(&self) -> Result<()> {
        match self.terms.iter().position(|t| !t.block.certified) {
            None => Ok(()),
            Some(k) => Err(Error::Contract(format!("block {k} is not certified"))),
        }
    }
}

/// Dyadic cubes of the grid, coarse to fine, lexicographic within a level.
pub fn dyadic_cubes(grid: &Grid) -> Vec<Cube> {
    let n = grid.n();
    let mut out = Vec::new();
    let mut side = grid.cells_per_axis();
    while side >= 1 {
        let per = grid.cells_per_axis() / side;
        for m in 0..per.pow(n as u32) {
            let mut lo = [0usize; 3];
            let mut r = m;
            for d in (0..n).rev() {
                lo[d] = (r % per) * side;
                r /= per;
            }
            out.push(Cube::new(&lo[..n], side).expect("side ≥ 1"));
        }
        side /= 2;
    }
    out
}

/// Result of [`regroup_decomposition`].
#[derive(Debug, Clone, PartialEq)]
pub struct Regrouped {
    pub decomposition: BlockDecomposition,
    /// For each input term, the index of the output term it went to.
    pub assignment: Vec<usize>,
    /// `Σλ(Q) / Σ|λ_k|`.
    pub observed_constant: f64,
}

/// Assigns every block to the first dyadic cube `Q` (in [`dyadic_cubes`]
/// order) with `supp A_k ⊂ 3Q` and `|Q_k| ≥ |Q|`, then merges each group
/// into one block on `3Q` with `λ(Q) = 3^n Σ_{k∈K(Q)} |λ_k|`.
pub fn regroup_decomposition(d: &BlockDecomposition) -> Result<Regrouped> {
    d.require_certified()?;
    let grid = d.grid;
    let n = grid.n();
    let dyadic = dyadic_cubes(&grid);
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut assignment = Vec::with_capacity(d.terms.len());
    for (k, t) in d.terms.iter().enumerate() {
        let supp = t.block.data.support_box();
        let target = dyadic.iter().position(|q| {
            q.side() <= t.block.cube.side()
                && match supp {
                    None => q.contains(&t.block.cube.lo()[..n]),
                    Some((lo, hi)) => {
                        q.dilate_contains(REGROUP_DILATION, &lo[..n]) && q.dilate_contains(REGROUP_DILATION, &hi[..n])
                    }
                }
        });
        let Some(target) = target else {
            return Err(Error::Contract(format!("no dyadic cube takes block {k}")));
        };
        let g = match groups.iter().position(|(q, _)| *q == target) {
            Some(g) => g,
            None => {
                groups.push((target, Vec::new()));
                groups.len() - 1
            }
        };
        groups[g].1.push(k);
        assignment.push(g);
    }
    let scale = (REGROUP_DILATION as f64).powi(n as i32);
    let mut terms = Vec::with_capacity(groups.len());
    for (q_idx, members) in &groups {
        let lambda = scale * members.iter().map(|&k| d.terms[k].lambda.abs()).sum::<f64>();
        let mut acc = vec![0.0; grid.len()];
        if lambda > 0.0 {
            for &k in members {
                let t = &d.terms[k];
                for (a, &v) in acc.iter_mut().zip(t.block.data.values()) {
                    *a += t.lambda * v;
                }
            }
            for a in &mut acc {
                *a /= lambda;
            }
        }
        let mut block = Block {
            data: GridFunction::new(grid, acc)?,
            cube: dyadic[*q_idx],
            dilation: REGROUP_DILATION,
            certified: false,
        };
        block.certified = block.check(&d.phi, d.q)?;
        terms.push(Term { lambda, block });
    }
    let out = BlockDecomposition::new(grid, d.phi.clone(), d.q, terms)?;
    let before = d.l1_weight();
    let observed_constant = if before > 0.0 { out.l1_weight() / before } else { 0.0 };
    Ok(Regrouped {
        decomposition: out,
        assignment,
        observed_constant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pairing {
    /// `∫ f·g`
    pub pairing: f64,
    /// `∫ |f·g|`
    pub l1: f64,
    /// `‖f‖_{M^φ_q}·Σ|λ_k|`
    pub bound: f64,
    pub holds: bool,
}

/// Checks `|∫fg| ≤ ‖fg‖_{L¹} ≤ ‖f‖_{M^φ_q}·Σ|λ_k|` for `g = Σλ_k A_k`.
pub fn duality_pairing(f: &GridFunction, d: &BlockDecomposition, policy: &CubePolicy) -> Result<Pairing> {
    d.require_certified()?;
    let g = d.resum()?;
    if f.grid() != g.grid() {
        return Err(Error::Contract("function and decomposition live on different grids".into()));
    }
    let vol = f.grid().cell_volume();
    let (mut pairing, mut l1) = (0.0, 0.0);
    for (&a, &b) in f.values().iter().zip(g.values()) {
        pairing += a * b;
        l1 += (a * b).abs();
    }
    pairing *= vol;
    l1 *= vol;
    let bound = morrey_norm(f, &d.phi, d.q, policy)?.value * d.l1_weight();
    let holds = pairing.abs() <= l1 * (1.0 + 1e-12) && l1 <= bound * (1.0 + 1e-9);
    Ok(Pairing {
        pairing,
        l1,
        bound,
        holds,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DataRepr {
    Inline(Vec<f64>),
    File(String),
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    lambda: f64,
    cube: Cube,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    dilation: usize,
    data: DataRepr,
}

fn one() -> usize {
    1
}

fn is_one(k: &usize) -> bool {
    *k == 1
}

impl BlockDecomposition {
    /// JSON array of `{lambda, cube:{lo,side}, data}` with inline data.
    pub fn to_json(&self) -> Result<String> {
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|t| TermRepr {
                lambda: t.lambda,
                cube: t.block.cube,
                dilation: t.block.dilation,
                data: DataRepr::Inline(t.block.data.values().to_vec()),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&terms)?)
    }

    /// Reads the JSON layout of [`Self::to_json`]; `data` may also be a
    /// path to a grid function file, relative to `base`. Blocks are
    /// certified against `(φ, q)` on reading.
    pub fn from_json(text: &str, grid: Grid, phi: WeightFunction, q: f64, base: &Path) -> Result<Self> {
        let reprs: Vec<TermRepr> = serde_json::from_str(text)?;
        let mut terms = Vec::with_capacity(reprs.len());
        for r in reprs {
            let data = match r.data {
                DataRepr::Inline(v) => GridFunction::new(grid, v)?,
                DataRepr::File(p) => GridFunction::load(base.join(p))?,
            };
            let mut block = Block {
                data,
                cube: r.cube,
                dilation: r.dilation,
                certified: false,
            };
            if *block.data.grid() == grid {
                block.certified = block.check(&phi, q)?;
            }
            terms.push(Term { lambda: r.lambda, block });
        }
        Self::new(grid, phi, q, terms)
    }
}
