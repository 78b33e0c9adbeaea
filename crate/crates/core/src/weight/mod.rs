//! Weight and kernel functions on `(0, ∞)`.
//!
//! A [`WeightFunction`] is a small expression tree over a closed set of
//! analytic forms plus tabulated data. The same type carries Morrey weights
//! `φ`, target weights `ψ`, fractional kernels `ρ` and auxiliary functions
//! such as `θ = 1/φ`.

mod classes;
mod conditions;
mod parse;
mod probe;

pub use classes::{classify_gq, classify_gq_tol, continuous_equivalent, normalize_to_gq, ClassReport};
pub use conditions::{
    dini_tilde, growth_constant, integral_condition_z0, operator_condition, zygmund_membership,
    ConditionKind, ConditionReport, OperatorKind, Side, Z0Report, Z0_EPS_TOL,
};
pub use probe::ProbeGrid;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Log-spaced samples with log-linear interpolation and constant
/// extrapolation outside `[t_0, t_last]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    t: Vec<f64>,
    v: Vec<f64>,
    ln_t: Vec<f64>,
    ln_v: Vec<f64>,
    source: Option<String>,
}

impl Table {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.len() != v.len() {
            return Err(Error::InvalidWeight(format!(
                "table needs matching non-empty columns (got {} abscissae, {} values)",
                t.len(),
                v.len()
            )));
        }
        for (i, (&ti, &vi)) in t.iter().zip(&v).enumerate() {
            if !(ti.is_finite() && ti > 0.0) {
                return Err(Error::InvalidWeight(format!("table abscissa t[{i}] = {ti} must be positive and finite")));
            }
            if !(vi.is_finite() && vi > 0.0) {
                return Err(Error::InvalidWeight(format!("table value v[{i}] = {vi} must be positive and finite")));
            }
            if i > 0 && t[i - 1] >= ti {
                return Err(Error::InvalidWeight(format!("table abscissae not strictly increasing at row {i}")));
            }
        }
        let ln_t = t.iter().map(|x| x.ln()).collect();
        let ln_v = v.iter().map(|x| x.ln()).collect();
        Ok(Self {
            t,
            v,
            ln_t,
            ln_v,
            source: None,
        })
    }

    /// Reads a two-column `t,v` CSV file; a non-numeric first row is treated
    /// as a header.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut t = Vec::new();
        let mut v = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Format(format!("{}: row {} has fewer than two columns", path.display(), row + 1)));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    t.push(a);
                    v.push(b);
                }
                _ if row == 0 => continue,
                _ => return Err(Error::Format(format!("{}: row {} is not numeric", path.display(), row + 1))),
            }
        }
        let mut table = Self::new(t, v)?;
        table.source = Some(path.display().to_string());
        Ok(table)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "v"])?;
        for (t, v) in self.t.iter().zip(&self.v) {
            w.write_record([format!("{t:e}"), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Records the file the table was (or will be) stored in, so that the
    /// weight's textual form round-trips.
    pub fn with_source(mut self, path: impl Into<String>) -> Self {
        self.source = Some(path.into());
        self
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.v[0];
        }
        if t >= self.t[n - 1] {
            return self.v[n - 1];
        }
        let k = self.t.partition_point(|&x| x <= t);
        // t lies in [t[k-1], t[k])
        if self.t[k - 1] == t {
            return self.v[k - 1];
        }
        let lt = t.ln();
        let s = (lt - self.ln_t[k - 1]) / (self.ln_t[k] - self.ln_t[k - 1]);
        (self.ln_v[k - 1] + s * (self.ln_v[k] - self.ln_v[k - 1])).exp()
    }
}

/// A positive function on `(0, ∞)` from a closed catalog of forms.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    /// `t^a`
    Power { a: f64 },
    /// `t^a (1+|ln t|)^{b1}` for `t ≤ 1`, `t^a (1+|ln t|)^{b2}` for `t > 1`
    PowerLog { a: f64, b1: f64, b2: f64 },
    /// `t^a e^{-κt}`
    ExpDamped { a: f64, kappa: f64 },
    /// `inner(t)` on `(0, c]`, zero beyond
    Truncated { inner: Box<WeightFunction>, cutoff: f64 },
    /// `factor · inner(t)`
    Scaled { inner: Box<WeightFunction>, factor: f64 },
    Sum(Box<WeightFunction>, Box<WeightFunction>),
    Max(Box<WeightFunction>, Box<WeightFunction>),
    Min(Box<WeightFunction>, Box<WeightFunction>),
    Tabulated(Arc<Table>),
}

use WeightFunction as W;

fn check_real(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWeight(format!("{name} must be finite, got {x}")))
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWeight(format!("{name} must be positive and finite, got {x}")))
    }
}

impl WeightFunction {
    pub fn power(a: f64) -> Self {
        W::Power { a }
    }

    pub fn constant(c: f64) -> Self {
        if c == 1.0 {
            W::Power { a: 0.0 }
        } else {
            W::Power { a: 0.0 }.scaled(c)
        }
    }

    pub fn power_log(a: f64, b1: f64, b2: f64) -> Self {
        W::PowerLog { a, b1, b2 }
    }

    pub fn exp_damped(a: f64, kappa: f64) -> Self {
        W::ExpDamped { a, kappa }
    }

    pub fn truncated(self, cutoff: f64) -> Self {
        W::Truncated {
            inner: Box::new(self),
            cutoff,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        W::Scaled {
            inner: Box::new(self),
            factor,
        }
    }

    pub fn sum(a: Self, b: Self) -> Self {
        W::Sum(Box::new(a), Box::new(b))
    }

    pub fn max(a: Self, b: Self) -> Self {
        W::Max(Box::new(a), Box::new(b))
    }

    pub fn min(a: Self, b: Self) -> Self {
        W::Min(Box::new(a), Box::new(b))
    }

    pub fn tabulated(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Ok(W::Tabulated(Arc::new(Table::new(t, v)?)))
    }

    /// The small-Morrey weight `min(t^a, 1)`.
    pub fn small_morrey(a: f64) -> Self {
        Self::min(Self::power(a), Self::power(0.0))
    }

    /// Checks parameter ranges recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            W::Power { a } => check_real("power exponent", *a),
            W::PowerLog { a, b1, b2 } => {
                check_real("powerlog exponent", *a)?;
                check_real("powerlog b1", *b1)?;
                check_real("powerlog b2", *b2)
            }
            W::ExpDamped { a, kappa } => {
                check_real("expdamped exponent", *a)?;
                check_positive("expdamped rate", *kappa)
            }
            W::Truncated { inner, cutoff } => {
                check_positive("truncation cutoff", *cutoff)?;
                inner.validate()
            }
            W::Scaled { inner, factor } => {
                check_positive("scale factor", *factor)?;
                inner.validate()
            }
            W::Sum(a, b) | W::Max(a, b) | W::Min(a, b) => {
                a.validate()?;
                b.validate()
            }
            W::Tabulated(_) => Ok(()),
        }
    }

    /// Checked evaluation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!("weight evaluated at t = {t}; need 0 < t < ∞")));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation for inner loops; `t` must be positive.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            W::Power { a } => {
                if *a == 0.0 {
                    1.0
                } else {
                    t.powf(*a)
                }
            }
            W::PowerLog { a, b1, b2 } => {
                let l = 1.0 + t.ln().abs();
                let b = if t <= 1.0 { *b1 } else { *b2 };
                let p = if *a == 0.0 { 1.0 } else { t.powf(*a) };
                if b == 0.0 {
                    p
                } else {
                    p * l.powf(b)
                }
            }
            W::ExpDamped { a, kappa } => t.powf(*a) * (-kappa * t).exp(),
            W::Truncated { inner, cutoff } => {
                if t <= *cutoff {
                    inner.value(t)
                } else {
                    0.0
                }
            }
            W::Scaled { inner, factor } => factor * inner.value(t),
            W::Sum(a, b) => a.value(t) + b.value(t),
            W::Max(a, b) => a.value(t).max(b.value(t)),
            W::Min(a, b) => a.value(t).min(b.value(t)),
            W::Tabulated(tab) => tab.eval(t),
        }
    }

    /// Points where the function may have a kink or jump. Quadrature panels
    /// are split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breaks(&mut out);
        out.sort_by(|a, b| a.total_cmp(b));
        out.dedup();
        out
    }

    fn collect_breaks(&self, out: &mut Vec<f64>) {
        match self {
            W::Power { .. } | W::ExpDamped { .. } => {}
            W::PowerLog { .. } => out.push(1.0),
            W::Truncated { inner, cutoff } => {
                out.push(*cutoff);
                inner.collect_breaks(out);
            }
            W::Scaled { inner, .. } => inner.collect_breaks(out),
            W::Sum(a, b) => {
                a.collect_breaks(out);
                b.collect_breaks(out);
            }
            W::Max(a, b) | W::Min(a, b) => {
                // two powers cross only at t = 1
                out.push(1.0);
                a.collect_breaks(out);
                b.collect_breaks(out);
            }
            W::Tabulated(tab) => out.extend_from_slice(&tab.t),
        }
    }

    fn has_sum(&self) -> bool {
        match self {
            W::Sum(..) => true,
            W::Truncated { inner, .. } | W::Scaled { inner, .. } => inner.has_sum(),
            W::Max(a, b) | W::Min(a, b) => a.has_sum() || b.has_sum(),
            _ => false,
        }
    }

    /// Samples the weight on the probe points as a [`Table`]-backed weight.
    pub fn tabulate(&self, probe: &ProbeGrid) -> Result<Self> {
        let t = probe.points();
        let v: Vec<f64> = t.iter().map(|&x| self.value(x)).collect();
        Self::tabulated(t, v)
    }

    /// `w^η` for `η > 0`. Exact rewrite except for sums, which are sampled on
    /// `probe`.
    pub fn powered(&self, eta: f64, probe: &ProbeGrid) -> Result<Self> {
        check_positive("power η", eta)?;
        if self.has_sum() {
            let t = probe.points();
            let v: Vec<f64> = t.iter().map(|&x| self.value(x).powf(eta)).collect();
            return Self::tabulated(t, v);
        }
        Ok(self.powered_exact(eta))
    }

    fn powered_exact(&self, eta: f64) -> Self {
        match self {
            W::Power { a } => W::Power { a: a * eta },
            W::PowerLog { a, b1, b2 } => W::PowerLog {
                a: a * eta,
                b1: b1 * eta,
                b2: b2 * eta,
            },
            W::ExpDamped { a, kappa } => W::ExpDamped {
                a: a * eta,
                kappa: kappa * eta,
            },
            W::Truncated { inner, cutoff } => inner.powered_exact(eta).truncated(*cutoff),
            W::Scaled { inner, factor } => inner.powered_exact(eta).scaled(factor.powf(eta)),
            W::Max(a, b) => Self::max(a.powered_exact(eta), b.powered_exact(eta)),
            W::Min(a, b) => Self::min(a.powered_exact(eta), b.powered_exact(eta)),
            W::Tabulated(tab) => {
                let v = tab.v.iter().map(|x| x.powf(eta)).collect();
                W::Tabulated(Arc::new(Table::new(tab.t.clone(), v).expect("positive table stays positive")))
            }
            W::Sum(..) => unreachable!("sums are tabulated before powering"),
        }
    }

    /// `1/w`. Closed forms where possible; sums and damped exponentials are
    /// sampled on `probe`. Truncated weights have no reciprocal.
    pub fn reciprocal(&self, probe: &ProbeGrid) -> Result<Self> {
        match self {
            W::Power { a } => Ok(W::Power { a: -a }),
            W::PowerLog { a, b1, b2 } => Ok(W::PowerLog {
                a: -a,
                b1: -b1,
                b2: -b2,
            }),
            W::Scaled { inner, factor } => Ok(inner.reciprocal(probe)?.scaled(1.0 / factor)),
            W::Max(a, b) => Ok(Self::min(a.reciprocal(probe)?, b.reciprocal(probe)?)),
            W::Min(a, b) => Ok(Self::max(a.reciprocal(probe)?, b.reciprocal(probe)?)),
            W::Tabulated(tab) => {
                let v = tab.v.iter().map(|x| 1.0 / x).collect();
                Self::tabulated(tab.t.clone(), v)
            }
            W::Truncated { .. } => Err(Error::InvalidWeight(
                "reciprocal of a truncated weight is infinite beyond the cutoff".into(),
            )),
            W::ExpDamped { .. } | W::Sum(..) => {
                let t = probe.points();
                let v: Vec<f64> = t.iter().map(|&x| 1.0 / self.value(x)).collect();
                Self::tabulated(t, v)
            }
        }
    }

    pub fn as_table(&self) -> Option<&Table> {
        match self {
            W::Tabulated(t) => Some(t),
            _ => None,
        }
    }
}

fn fmt_num(x: f64) -> String {
    // `{:?}` is the shortest representation that parses back to the same bits
    format!("{x:?}")
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            W::Power { a } => write!(f, "power:{}", fmt_num(*a)),
            W::PowerLog { a, b1, b2 } => {
                write!(f, "powerlog:{},{},{}", fmt_num(*a), fmt_num(*b1), fmt_num(*b2))
            }
            W::ExpDamped { a, kappa } => write!(f, "expdamped:{},{}", fmt_num(*a), fmt_num(*kappa)),
            W::Truncated { inner, cutoff } => write!(f, "trunc({inner},{})", fmt_num(*cutoff)),
            W::Scaled { inner, factor } => write!(f, "scale({inner},{})", fmt_num(*factor)),
            W::Sum(a, b) => write!(f, "sum({a},{b})"),
            W::Max(a, b) => write!(f, "max({a},{b})"),
            W::Min(a, b) => write!(f, "min({a},{b})"),
            W::Tabulated(tab) => match &tab.source {
                Some(p) => write!(f, "table:{p}"),
                None => write!(f, "table:<{} points in memory>", tab.t.len()),
            },
        }
    }
}

impl std::str::FromStr for WeightFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse::parse_weight(s)
    }
}

impl serde::Serialize for WeightFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(W::power(2.0).eval(3.0).unwrap(), 9.0);
        assert_eq!(W::power_log(0.0, -1.0, 0.0).eval(1.0).unwrap(), 1.0);
        let m = W::min(W::power(0.5), W::power(0.0));
        assert_eq!(m.eval(4.0).unwrap(), 1.0);
    }

    #[test]
    fn eval_rejects_bad_t() {
        let w = W::power(1.0);
        assert!(matches!(w.eval(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(w.eval(f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(w.eval(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn powerlog_branches() {
        let w = W::power_log(1.0, 2.0, -1.0);
        let t: f64 = 0.25;
        assert!((w.value(t) - t * (1.0 + 4f64.ln()).powi(2)).abs() < 1e-15);
        let t: f64 = 8.0;
        assert!((w.value(t) - t / (1.0 + t.ln())).abs() < 1e-14);
    }

    #[test]
    fn truncated_is_zero_past_cutoff() {
        let w = W::power(0.5).truncated(1.0);
        assert_eq!(w.value(1.0), 1.0);
        assert_eq!(w.value(1.0000001), 0.0);
    }

    #[test]
    fn table_interpolates_log_linearly() {
        let w = W::tabulated(vec![1.0, 4.0], vec![1.0, 16.0]).unwrap();
        // log-linear between (1,1) and (4,16) is t^2
        assert!((w.value(2.0) - 4.0).abs() < 1e-12);
        assert_eq!(w.value(0.1), 1.0);
        assert_eq!(w.value(100.0), 16.0);
        assert_eq!(w.value(4.0), 16.0);
    }

    #[test]
    fn table_validation() {
        assert!(W::tabulated(vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(W::tabulated(vec![1.0, 2.0], vec![1.0, 0.0]).is_err());
        assert!(W::tabulated(vec![], vec![]).is_err());
    }

    #[test]
    fn powered_and_reciprocal() {
        let probe = ProbeGrid::default();
        let w = W::min(W::power(0.5), W::power_log(1.0, 1.0, -2.0).scaled(3.0));
        let w2 = w.powered(2.0, &probe).unwrap();
        let wr = w.reciprocal(&probe).unwrap();
        for &t in &[1e-3, 0.5, 1.0, 7.0, 1e4] {
            let v = w.value(t);
            assert!((w2.value(t) - v * v).abs() <= 1e-13 * v * v);
            assert!((wr.value(t) * v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn breakpoints_collects_cutoffs() {
        let w = W::max(W::power(1.0).truncated(2.0), W::power_log(0.0, 1.0, 1.0));
        assert_eq!(w.breakpoints(), vec![1.0, 2.0]);
    }
}
