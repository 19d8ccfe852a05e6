//! Thin-plate spline radial function and its Laplacian.
//!
//! phi(r) = r^{2 nu} log r with the continuous extension phi(0) = 0, and
//! Delta phi(r) = 4 nu r^{2(nu-1)} (nu log r + 1), which also extends to 0
//! at the center when nu >= 2. For nu = 1 the Laplacian diverges at r = 0,
//! so collocation matrices are restricted to nu >= 2 elsewhere.

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Thin-plate spline kernel with integer smoothness exponent nu >= 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TpsKernel {
    nu: u32,
}

impl TpsKernel {
    pub fn new(nu: u32) -> Result<Self> {
        if nu == 0 {
            return Err(Error::InvalidNu(nu));
        }
        Ok(TpsKernel { nu })
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    /// phi(r) = r^{2 nu} log r, with phi(0) = 0.
    pub fn phi(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::NegativeRadius(r));
        }
        Ok(self.phi_unchecked(r))
    }

    /// Laplacian of phi as a function of the radius:
    /// 4 nu r^{2(nu-1)} (nu log r + 1), with the value 0 at r = 0 for
    /// nu >= 2. For nu = 1 the center is a logarithmic singularity.
    pub fn lap_phi(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::NegativeRadius(r));
        }
        if r == 0.0 && self.nu == 1 {
            return Err(Error::CenterSingularity);
        }
        Ok(self.lap_phi_unchecked(r))
    }

    /// phi at the Euclidean distance between two points. The distance is
    /// symmetric in its arguments, so the result is bitwise symmetric too.
    pub fn phi_pair(&self, a: Point2, b: Point2) -> f64 {
        self.phi_unchecked(a.dist(b))
    }

    /// Laplacian of phi_A evaluated at B, as a function of r = ||A - B||.
    /// Errors only for coincident points with nu = 1.
    pub fn lap_phi_pair(&self, a: Point2, b: Point2) -> Result<f64> {
        let r = a.dist(b);
        if r == 0.0 && self.nu == 1 {
            return Err(Error::CenterSingularity);
        }
        Ok(self.lap_phi_unchecked(r))
    }

    /// The unique positive root of the Laplacian: exp(-1/nu). Pairs at this
    /// distance zero out the interior block entries.
    pub fn critical_radius(&self) -> f64 {
        (-1.0 / self.nu as f64).exp()
    }

    pub(crate) fn phi_unchecked(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r == 0.0 {
            return 0.0;
        }
        r.powi(2 * self.nu as i32) * r.ln()
    }

    pub(crate) fn lap_phi_unchecked(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        debug_assert!(r > 0.0 || self.nu >= 2);
        if r == 0.0 {
            return 0.0;
        }
        let nu = self.nu as f64;
        4.0 * nu * r.powi(2 * (self.nu as i32 - 1)) * (nu * r.ln() + 1.0)
    }
}
