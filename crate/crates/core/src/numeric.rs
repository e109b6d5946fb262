//! Scalar logistic primitives shared across the crate.
//!
//! Both functions are written to avoid overflow for arguments far outside
//! the range where `exp` is representable.

/// Logistic function 1 / (1 + exp(-z)).
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(z)), computed as max(z, 0) + log1p(exp(-|z|)).
pub fn log1p_exp(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}
