use crate::error::{DropletError, Result};
use crate::scalar::Real;

/// Physical data of a drop: volume per unit span, the gravity to surface
/// tension ratio and the inclination of the plane.
///
/// In one dimension the volume is an area (volume per unit length in the
/// transverse direction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T> {
    volume: T,
    kappa: T,
    alpha: T,
    k2: T,
    tilt: T,
}

impl<T: Real> PhysicalParams<T> {
    /// Validates `volume > 0`, `kappa >= 0` and `0 <= alpha < pi/2`.
    pub fn new(volume: T, kappa: T, alpha: T) -> Result<Self> {
        if !(volume > T::zero()) || !volume.is_finite() {
            return Err(invalid("V0", volume, "volume must be positive and finite"));
        }
        if !(kappa >= T::zero()) || !kappa.is_finite() {
            return Err(invalid("kappa", kappa, "kappa must be non-negative and finite"));
        }
        if !(alpha >= T::zero() && alpha < T::FRAC_PI_2()) {
            return Err(invalid("alpha", alpha, "inclination must lie in [0, pi/2)"));
        }
        let k2 = kappa * alpha.cos();
        let tilt = if kappa > T::zero() && alpha > T::zero() {
            kappa * alpha.sin()
        } else {
            T::zero()
        };
        Ok(Self {
            volume,
            kappa,
            alpha,
            k2,
            tilt,
        })
    }

    pub fn volume(&self) -> T {
        self.volume
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `kappa cos(alpha)`, the restoring coefficient of the profile equation.
    pub fn k2(&self) -> T {
        self.k2
    }

    /// `kappa sin(alpha)`, the downhill forcing.
    pub fn tilt(&self) -> T {
        self.tilt
    }

    /// `V0 kappa sin(alpha)`: the constant gap `H - G` between front and rear
    /// slope energies.
    pub fn drive(&self) -> T {
        self.volume * self.tilt
    }

    /// Same physical data with a different volume.
    pub fn with_volume(&self, volume: T) -> Result<Self> {
        Self::new(volume, self.kappa, self.alpha)
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> Result<PhysicalParams<U>> {
        PhysicalParams::new(
            U::lit(self.volume.as_f64()),
            U::lit(self.kappa.as_f64()),
            U::lit(self.alpha.as_f64()),
        )
    }
}

pub(crate) fn invalid<T: Real>(name: &'static str, value: T, reason: &'static str) -> DropletError {
    DropletError::InvalidParameter {
        name,
        value: value.as_f64(),
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    #[test]
    fn derived_constants() {
        let p = PhysicalParams::new(1.0, 1.0, FRAC_PI_6).unwrap();
        assert!((p.k2() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((p.tilt() - 0.5).abs() < 1e-15);
        assert!((p.drive() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tilt_vanishes_without_gravity_or_slope() {
        assert_eq!(PhysicalParams::new(1.0, 0.0, 0.3).unwrap().tilt(), 0.0);
        assert_eq!(PhysicalParams::new(1.0, 2.0, 0.0).unwrap().tilt(), 0.0);
        assert!(PhysicalParams::new(1.0, 2.0, 0.1).unwrap().tilt() > 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(PhysicalParams::new(0.0, 1.0, 0.1).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 0.1).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, FRAC_PI_2).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, -0.1).is_err());
        assert!(PhysicalParams::new(f64::NAN, 1.0, 0.1).is_err());
    }
}
