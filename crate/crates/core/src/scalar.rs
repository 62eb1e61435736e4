//! Real-number abstraction shared by the reference model and the simulated
//! datapath.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, MulAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point element type used by matrices, models and the simulator.
///
/// Implemented for `f64` (reference model) and `f32` (accelerator datapath).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + MulAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; rounds to nearest for narrower types.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("every f64 is representable as a float scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float scalar converts to f64")
    }

    /// Logistic sigmoid `1 / (1 + exp(-x))`, evaluated without overflow.
    fn sigmoid(self) -> Self {
        let one = Self::one();
        if self >= Self::zero() {
            one / (one + (-self).exp())
        } else {
            let e = self.exp();
            e / (one + e)
        }
    }

    fn relu(self) -> Self {
        if self > Self::zero() {
            self
        } else {
            Self::zero()
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_symmetric_around_half() {
        for x in [-3.0f64, -0.5, 0.0, 0.25, 7.0] {
            let s = x.sigmoid() + (-x).sigmoid();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert_eq!(0.0f32.sigmoid(), 0.5);
    }

    #[test]
    fn sigmoid_does_not_overflow() {
        assert!(f64::sigmoid(-800.0).is_finite());
        assert!(f32::sigmoid(-120.0).is_finite());
    }

    #[test]
    fn relu_clamps_negative_and_keeps_zero_sign_free() {
        assert_eq!((-2.0f64).relu(), 0.0);
        assert_eq!(3.5f32.relu(), 3.5);
        assert!((-0.0f64).relu().is_sign_positive());
    }
}
