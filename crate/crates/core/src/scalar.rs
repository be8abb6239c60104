use num_traits::{Float, FromPrimitive};
use std::fmt::Debug;
use std::iter::Sum;

/// Floating-point scalar accepted by the numeric kernels.
pub trait Real: Float + FromPrimitive + Debug + Sum + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Pivot / comparison threshold scaled to the type's precision.
    fn pivot_eps() -> Self {
        Self::epsilon().sqrt() * Self::lit(1e-3)
    }
}

impl Real for f32 {}
impl Real for f64 {}
