use serde::{Deserialize, Serialize};

use super::LinError;

/// Strictly increasing list of positive frequencies (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqGrid {
    points: Vec<f64>,
}

impl FreqGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, LinError> {
        let ok = points.iter().all(|w| w.is_finite() && *w > 0.0)
            && points.windows(2).all(|p| p[0] < p[1]);
        if !ok {
            return Err(LinError::InvalidGrid);
        }
        Ok(Self { points })
    }

    /// `n` log-spaced points including both ends.
    pub fn log_space(lo: f64, hi: f64, n: usize) -> Result<Self, LinError> {
        if !(lo > 0.0 && hi > lo) || n < 2 {
            return Err(LinError::InvalidGrid);
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
        points[0] = lo;
        points[n - 1] = hi;
        Self::new(points)
    }

    pub fn per_decade(lo: f64, hi: f64, points_per_decade: usize) -> Result<Self, LinError> {
        if !(lo > 0.0 && hi > lo) {
            return Err(LinError::InvalidGrid);
        }
        let decades = (hi / lo).log10();
        let n = ((decades * points_per_decade as f64).ceil() as usize + 1).max(2);
        Self::log_space(lo, hi, n)
    }

    /// Adds extra points (deduplicated, kept sorted).
    pub fn with_points(&self, extra: &[f64]) -> Result<Self, LinError> {
        let mut pts = self.points.clone();
        pts.extend_from_slice(extra);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Self::new(pts)
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
