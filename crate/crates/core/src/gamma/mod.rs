//! Thin films: the rescaled energy `I_eps`, the through-thickness average
//! and a probe of the membrane limit along a thickness schedule.
//!
//! The plate is `(0,1)^2 x (-eps/2, eps/2)`. Fields live on the nodes of an
//! `n x n` cell grid; energies use cell midpoints in the plane and
//! Gauss-Legendre points through the thickness.

mod field;
mod probe;
mod quadrature;

pub use field::{pi_average, thin_film_energy, AnsatzField, Corrector, PlanarField, ThickField};
pub use probe::{gamma_probe, ProbeParams, ProbeResult, ProbeRow};
pub use quadrature::gauss_legendre;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThinFilmConfig {
    /// Cells per side of the unit square.
    pub cells: usize,
    /// Thickness schedule, strictly decreasing.
    pub eps: Vec<f64>,
    /// Gauss points through the thickness.
    pub gauss: usize,
}

impl Default for ThinFilmConfig {
    fn default() -> Self {
        ThinFilmConfig { cells: 32, eps: (0..6).map(|j| 0.2 * 0.5f64.powi(j)).collect(), gauss: 4 }
    }
}

impl ThinFilmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cells < 2 {
            return Err(invalid("need at least 2 cells per side"));
        }
        if self.gauss < 2 {
            return Err(invalid("need at least 2 Gauss points"));
        }
        if self.eps.is_empty() {
            return Err(invalid("empty thickness schedule"));
        }
        if self.eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(invalid("thicknesses must be positive"));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("thickness schedule must be strictly decreasing"));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.h() * self.h()
    }
}
