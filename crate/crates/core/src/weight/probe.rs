use serde::Serialize;

use crate::error::{Error, Result};

/// Log-spaced sample radii `t_i = t_min · 2^{i/ppo}` standing in for "all r > 0".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_octave: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self {
            t_min: 2f64.powi(-20),
            t_max: 2f64.powi(20),
            points_per_octave: 8,
        }
    }
}

impl ProbeGrid {
    pub fn new(t_min: f64, t_max: f64, points_per_octave: usize) -> Result<Self> {
        let g = Self {
            t_min,
            t_max,
            points_per_octave,
        };
        g.validate()?;
        Ok(g)
    }

    /// Probe spanning `decades` powers of ten centred (geometrically) on `center`.
    pub fn decades(center: f64, decades: f64, points_per_octave: usize) -> Result<Self> {
        let half = 10f64.powf(decades / 2.0);
        Self::new(center / half, center * half, points_per_octave)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min.is_finite() && self.t_min > 0.0 && self.t_max.is_finite() && self.t_min < self.t_max) {
            return Err(Error::InvalidProbe(format!(
                "need 0 < t_min < t_max < ∞, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.points_per_octave < 4 {
            return Err(Error::InvalidProbe(format!(
                "at least 4 points per octave required, got {}",
                self.points_per_octave
            )));
        }
        if self.len() < 16 {
            return Err(Error::InvalidProbe(format!("probe has {} points, need at least 16", self.len())));
        }
        Ok(())
    }

    pub fn octaves(&self) -> f64 {
        (self.t_max / self.t_min).log2()
    }

    pub fn len(&self) -> usize {
        (self.octaves() * self.points_per_octave as f64 + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.t_min * (i as f64 / self.points_per_octave as f64).exp2()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Same resolution, log-range doubled about the geometric centre.
    pub fn doubled(&self) -> Self {
        let half = self.octaves() / 2.0;
        self.extended(half)
    }

    /// Adds `octaves` octaves at each end.
    pub fn extended(&self, octaves: f64) -> Self {
        let f = octaves.exp2();
        Self {
            t_min: self.t_min / f,
            t_max: self.t_max * f,
            points_per_octave: self.points_per_octave,
        }
    }

    /// Index of the first point whose radius is at least `t`.
    pub fn index_at_least(&self, t: f64) -> usize {
        let x = (t / self.t_min).log2() * self.points_per_octave as f64;
        (x - 1e-9).ceil().max(0.0) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = ProbeGrid::default();
        assert_eq!(g.len(), 321);
        let p = g.points();
        assert_eq!(p[0], 2f64.powi(-20));
        assert!((p[320] / 2f64.powi(20) - 1.0).abs() < 1e-14);
        assert!((p[8] / p[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid() {
        assert!(ProbeGrid::new(1.0, 0.5, 8).is_err());
        assert!(ProbeGrid::new(1.0, 2.0, 3).is_err());
        assert!(ProbeGrid::new(1.0, 2.0, 8).is_err()); // only 9 points
        assert!(ProbeGrid::new(0.0, 2.0, 8).is_err());
        assert!(ProbeGrid::new(1.0, 4.0, 8).is_ok());
    }

    #[test]
    fn doubling_keeps_centre() {
        let g = ProbeGrid::new(0.25, 16.0, 8).unwrap().doubled();
        assert!((g.t_min - 1.0 / 32.0).abs() < 1e-15);
        assert!((g.t_max - 128.0).abs() < 1e-12);
        assert_eq!(g.len(), 97);
    }

    #[test]
    fn decades_span() {
        let g = ProbeGrid::decades(1.0, 4.0, 8).unwrap();
        assert!((g.t_max / g.t_min - 1e4).abs() < 1e-8);
    }
}
