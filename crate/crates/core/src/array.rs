//! Uniform linear array geometry.
//!
//! Elements sit at half-wavelength spacing, so element `m` of the steering
//! vector towards `angle` carries phase `-pi * m * cos(angle)`. Vectors are
//! normalized to unit Euclidean norm.

use std::f64::consts::{PI, TAU};

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::random::CVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayRole {
    Transmit,
    Receive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArraySpec {
    num_elements: usize,
    role: ArrayRole,
}

impl ArraySpec {
    pub fn new(num_elements: usize, role: ArrayRole) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::config("array must have at least one element"));
        }
        Ok(Self { num_elements, role })
    }

    pub fn transmit(num_elements: usize) -> Result<Self> {
        Self::new(num_elements, ArrayRole::Transmit)
    }

    pub fn receive(num_elements: usize) -> Result<Self> {
        Self::new(num_elements, ArrayRole::Receive)
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn role(&self) -> ArrayRole {
        self.role
    }

    /// Unit-norm steering vector towards `angle` (radians, wrapped into `[0, 2pi)`).
    pub fn steering_vector(&self, angle: f64) -> CVector {
        steering(self.num_elements, angle)
    }
}

/// Steering vector for a ULA with `num_elements` elements. Callers are
/// responsible for `num_elements >= 1`; [`ArraySpec`] enforces it.
pub(crate) fn steering(num_elements: usize, angle: f64) -> CVector {
    let phase_step = -PI * wrap_angle(angle).cos();
    let amp = 1.0 / (num_elements as f64).sqrt();
    CVector::from_iterator(
        num_elements,
        (0..num_elements).map(|m| Complex::from_polar(amp, phase_step * m as f64)),
    )
}

/// Convenience wrapper matching the free-function form used across the crate.
pub fn steering_vector(spec: &ArraySpec, angle: f64) -> CVector {
    spec.steering_vector(angle)
}

pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rejects_empty_array() {
        assert!(ArraySpec::transmit(0).is_err());
    }

    #[test]
    fn broadside_is_all_equal() {
        let a = ArraySpec::transmit(4).unwrap().steering_vector(FRAC_PI_2);
        for z in a.iter() {
            assert!((z.re - 0.5).abs() < 1e-15);
            assert!(z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn endfire_alternates_sign() {
        let a = ArraySpec::transmit(2).unwrap().steering_vector(0.0);
        let h = 1.0 / 2f64.sqrt();
        assert!((a[0] - Complex::new(h, 0.0)).norm() < 1e-15);
        assert!((a[1] - Complex::new(-h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn transmit_array_of_eight() {
        let a = ArraySpec::transmit(8).unwrap().steering_vector(1.1);
        assert_eq!(a.len(), 8);
        assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angles_wrap_modulo_two_pi() {
        let spec = ArraySpec::receive(5).unwrap();
        let a = spec.steering_vector(0.3);
        let b = spec.steering_vector(0.3 + TAU);
        let c = spec.steering_vector(0.3 - 2.0 * TAU);
        assert!((a.clone() - b).norm() < 1e-12);
        assert!((a - c).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn unit_norm_and_constant_modulus(n in 1usize..64, angle in 0.0f64..TAU) {
            let a = ArraySpec::receive(n).unwrap().steering_vector(angle);
            prop_assert!((a.norm() - 1.0).abs() < 1e-12);
            let amp = 1.0 / (n as f64).sqrt();
            for z in a.iter() {
                prop_assert!((z.norm() - amp).abs() < 1e-12);
            }
        }

        #[test]
        fn mirror_angle_gives_same_vector(n in 1usize..32, angle in 0.0f64..TAU) {
            let spec = ArraySpec::transmit(n).unwrap();
            let a = spec.steering_vector(angle);
            let b = spec.steering_vector(TAU - angle);
            prop_assert!((a - b).norm() < 1e-10);
        }
    }
}
