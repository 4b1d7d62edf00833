//! Scalar abstraction for the linear-algebra layer.
//!
//! Everything in [`crate::state`] and the statevector simulator is generic
//! over a real field `T` so the same code runs in `f32` and `f64`. Math
//! functions come from [`nalgebra::RealField`]; conversions and identities
//! come from `num-traits`.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable by the state and circuit layers.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Debug + 'static
{
    /// Tolerance for unit-norm, trace and hermiticity checks.
    const NORM_TOLERANCE: f64;
    /// Eigenvalues in `[-PSD_TOLERANCE, 0)` are treated as numerical zeros.
    const PSD_TOLERANCE: f64;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }
}

impl Real for f64 {
    const NORM_TOLERANCE: f64 = 1e-10;
    const PSD_TOLERANCE: f64 = 1e-9;
}

impl Real for f32 {
    const NORM_TOLERANCE: f64 = 1e-5;
    const PSD_TOLERANCE: f64 = 1e-5;
}

/// `r · e^{iθ}` without requiring `num_traits::Float`.
pub(crate) fn from_polar<T: Real>(r: T, theta: T) -> Complex<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(r * c, r * s)
}

/// Phase angle of a complex number.
pub(crate) fn arg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

/// Pairwise (cascade) summation; result does not depend on thread scheduling
/// as long as the input order is fixed.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}
