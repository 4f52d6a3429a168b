//! Evaluation grids: points on (0, 1) for the pointwise inequality checks
//! and polar grids on the unit disk for membership scans.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing evaluation points inside (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    points: Vec<f64>,
}

impl TGrid {
    /// Logarithmically spaced points on [lo, hi], 0 < lo < hi < 1.
    pub fn log_spaced(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 points, got {n}")));
        }
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::Grid(format!(
                "bounds must satisfy 0 < lo < hi < 1, got ({lo}, {hi})"
            )));
        }
        let (la, lb) = (lo.ln(), hi.ln());
        let points = (0..n)
            .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
            .collect();
        Ok(Self { points })
    }

    /// The module-wide default: 512 log-spaced points on (1e-6, 1 - 1e-6).
    pub fn default_check_grid() -> Self {
        Self::log_spaced(512, 1e-6, 1.0 - 1e-6).expect("default grid parameters are valid")
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Grid("need at least 2 points".into()));
        }
        if !points.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Grid("points must be strictly increasing".into()));
        }
        if !points.iter().all(|&t| 0.0 < t && t < 1.0) {
            return Err(Error::Grid("points must lie inside (0, 1)".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Polar grid of sample points in the open unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    radii: Vec<f64>,
    angles: Vec<f64>,
}

impl DiskGrid {
    /// `n_radii` radii equally spaced on (0, max_radius] and `n_angles`
    /// equally spaced angles. Requires max_radius < 1 and n_angles >= 8.
    pub fn new(n_radii: usize, max_radius: f64, n_angles: usize) -> Result<Self> {
        if !(max_radius > 0.0 && max_radius < 1.0) {
            return Err(Error::Grid(format!(
                "max radius must lie in (0, 1), got {max_radius}"
            )));
        }
        if n_angles < 8 {
            return Err(Error::Grid(format!(
                "need at least 8 angles for a meaningful scan, got {n_angles}"
            )));
        }
        if n_radii == 0 {
            return Err(Error::Grid("need at least one radius".into()));
        }
        let radii = (1..=n_radii)
            .map(|i| max_radius * i as f64 / n_radii as f64)
            .collect();
        let angles = (0..n_angles)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64)
            .collect();
        Ok(Self { radii, angles })
    }

    /// Default membership scan grid: 24 radii up to 0.95, 64 angles.
    pub fn default_membership() -> Self {
        Self::new(24, 0.95, 64).expect("default membership grid parameters are valid")
    }

    /// Default z-grid for the N_Pi infimum: 24 radii up to 0.99, 48 angles.
    pub fn default_n_pi() -> Self {
        Self::new(24, 0.99, 48).expect("default n_pi grid parameters are valid")
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn max_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All grid points as complex numbers, radius-major.
    pub fn iter_points(&self) -> impl Iterator<Item = (f64, f64, Complex64)> + '_ {
        self.radii.iter().flat_map(move |&r| {
            self.angles
                .iter()
                .map(move |&th| (r, th, Complex64::from_polar(r, th)))
        })
    }
}

/// Equally spaced points on the unit circle, used for the epsilon parameter
/// of the boundary test functions.
pub fn unit_circle(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_brackets_and_orders() {
        let g = TGrid::log_spaced(512, 1e-6, 1.0 - 1e-6).unwrap();
        assert_eq!(g.len(), 512);
        assert!((g.points()[0] - 1e-6).abs() < 1e-18);
        assert!((g.points()[511] - (1.0 - 1e-6)).abs() < 1e-12);
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_construction_rejects_bad_bounds() {
        assert!(TGrid::log_spaced(10, 0.0, 0.5).is_err());
        assert!(TGrid::log_spaced(10, 0.5, 1.0).is_err());
        assert!(TGrid::log_spaced(1, 0.1, 0.5).is_err());
        assert!(TGrid::from_points(vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn disk_grid_counts_and_bounds() {
        let g = DiskGrid::new(5, 0.9, 16).unwrap();
        assert_eq!(g.len(), 80);
        assert_eq!(g.iter_points().count(), 80);
        assert!(g.iter_points().all(|(_, _, z)| z.norm() <= 0.9 + 1e-15));
        assert!(DiskGrid::new(5, 1.0, 16).is_err());
        assert!(DiskGrid::new(5, 0.9, 4).is_err());
    }

    #[test]
    fn unit_circle_points_have_unit_modulus() {
        let eps = unit_circle(32);
        assert_eq!(eps.len(), 32);
        for e in eps {
            assert!((e.norm() - 1.0).abs() < 1e-15);
        }
    }
}
