use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ShapedResetElement, ShapingFilter, ShapingSpec, Tail};
use crate::lincore::to_hz;

/// Serializable summary of a shaping design. Zeros and poles are those of
/// the realized `F`, in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDocument {
    pub omega_l_hz: f64,
    pub omega_h_hz: f64,
    pub psi_f_deg: f64,
    pub lambda: f64,
    pub q: f64,
    pub gamma: Option<f64>,
    pub omega_r_hz: Option<f64>,
    pub alpha: Option<f64>,
    pub crone_n: usize,
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    /// Largest out-of-band `|∠F|`, degrees.
    pub psi_b_deg: f64,
    pub warnings: Vec<String>,
}

impl DesignDocument {
    pub fn new(
        spec: &ShapingSpec,
        filter: &ShapingFilter,
        element: Option<&ShapedResetElement>,
    ) -> Self {
        let alpha = element.and_then(|e| match e.tail {
            Tail::Cglp { alpha } => Some(alpha),
            _ => None,
        });
        Self {
            omega_l_hz: to_hz(spec.omega_l),
            omega_h_hz: to_hz(spec.omega_h),
            psi_f_deg: spec.psi_f.to_degrees(),
            lambda: filter.lambda,
            q: filter.q,
            gamma: element.map(|e| e.gamma),
            omega_r_hz: element.map(|e| to_hz(e.omega_r)),
            alpha,
            crone_n: filter.crone_n,
            zeros: filter.zeros(),
            poles: filter.poles(),
            psi_b_deg: filter.out_of_band_bound().to_degrees(),
            warnings: element.map(|e| e.warnings().to_vec()).unwrap_or_default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lincore::hz;

    #[test]
    fn round_trips_through_json() {
        let spec = ShapingSpec::decade(hz(100.0 / 10f64.sqrt()), (-57.34f64).to_radians()).unwrap();
        let (f, _) = ShapingFilter::build(&spec, 6).unwrap();
        let doc = DesignDocument::new(&spec, &f, None);
        assert_eq!(doc.zeros.len(), 2 + 6 + 2);
        let text = serde_json::to_string(&doc).unwrap();
        let back: DesignDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert!((doc.omega_h_hz / doc.omega_l_hz - 10.0).abs() < 1e-12);
    }
}
