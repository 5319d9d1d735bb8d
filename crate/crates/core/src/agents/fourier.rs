//! Decoupled Fourier cosine features for linear value approximation.

/// Per-dimension cosine expansion of the real state components. A state
/// `[phase(4), reals(24)]` maps to the 4 phase bits passed through followed
/// by `cos(pi * c * x)` for `c in 0..=order` per real component.
///
/// A full multivariate basis of this order over 28 inputs is combinatorially
/// infeasible; the decoupled form is the standard fallback at this
/// dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBasis {
    pub order: usize,
    pub passthrough: usize,
}

impl FourierBasis {
    pub fn new(order: usize, passthrough: usize) -> Self {
        FourierBasis { order, passthrough }
    }

    /// Feature count for a state of `state_dim` components.
    pub fn feature_count(&self, state_dim: usize) -> usize {
        self.passthrough + (state_dim - self.passthrough) * (self.order + 1)
    }

    pub fn features(&self, state: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.feature_count(state.len()));
        out.extend_from_slice(&state[..self.passthrough]);
        for &x in &state[self.passthrough..] {
            for c in 0..=self.order {
                out.push((std::f64::consts::PI * c as f64 * x).cos());
            }
        }
        out
    }
}
