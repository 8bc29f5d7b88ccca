//! Swish activation `σ(z) = z·sigmoid(z)` and its first three derivatives.
//!
//! The third derivative is needed because parameter gradients of losses that
//! contain the network's Laplacian differentiate the second-derivative chain
//! rule once more.

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// All of `σ, σ', σ'', σ'''` from a precomputed `p = sigmoid(z)`.
///
/// With `p' = p(1−p)`, `p'' = p'(1−2p)`, `p''' = p''(1−2p) − 2p'²`:
/// `σ = z p`, `σ' = p + z p'`, `σ'' = 2p' + z p''`, `σ''' = 3p'' + z p'''`.
#[inline]
pub(crate) fn swish_jets(z: f64, p: f64) -> (f64, f64, f64, f64) {
    let p1 = p * (1.0 - p);
    let p2 = p1 * (1.0 - 2.0 * p);
    let p3 = p2 * (1.0 - 2.0 * p) - 2.0 * p1 * p1;
    (
        z * p,
        p + z * p1,
        2.0 * p1 + z * p2,
        3.0 * p2 + z * p3,
    )
}

/// `σ(z) = z·sigmoid(z)`.
#[inline]
pub fn swish(z: f64) -> f64 {
    z * sigmoid(z)
}

/// First derivative of Swish.
#[inline]
pub fn swish_d1(z: f64) -> f64 {
    swish_jets(z, sigmoid(z)).1
}

/// Second derivative of Swish.
#[inline]
pub fn swish_d2(z: f64) -> f64 {
    swish_jets(z, sigmoid(z)).2
}

/// Third derivative of Swish.
#[inline]
pub fn swish_d3(z: f64) -> f64 {
    swish_jets(z, sigmoid(z)).3
}
