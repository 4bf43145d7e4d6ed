use crate::assignment::{Assignment, Edge, EdgeMap};
use crate::error::{Error, Result};
use crate::perturbation::Perturbation;

/// Per-edge bounds on measurement error magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBounds {
    bounds: EdgeMap<f64>,
}

impl ErrorBounds {
    pub fn new(bounds: EdgeMap<f64>) -> Result<Self> {
        if let Some((e, b)) = bounds.iter().find(|(_, b)| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "error bound on edge {e} must be finite and non-negative, got {b}"
            )));
        }
        Ok(Self { bounds })
    }

    /// The same bound on every edge of `shape`.
    pub fn uniform<T>(shape: &EdgeMap<T>, bound: f64) -> Result<Self> {
        Self::new(shape.map(|_, _| bound))
    }

    pub fn get(&self, edge: Edge) -> Option<f64> {
        self.bounds.get(edge).copied()
    }

    pub fn as_map(&self) -> &EdgeMap<f64> {
        &self.bounds
    }
}

/// Whether every measurement error within `bounds` lands inside the
/// half-space intervals of `perturbation`: `bound <= delta` on assigned edges
/// and `delta <= -bound` elsewhere. When `perturbation` is allowable for the
/// measured weights, a true result means `optimum` is also optimal for the
/// unobserved ground truth.
pub fn certify_optimal(
    perturbation: &Perturbation,
    optimum: &Assignment,
    bounds: &ErrorBounds,
) -> Result<bool> {
    if !bounds.as_map().same_support(perturbation.as_map()) {
        return Err(Error::ShapeMismatch(
            "error bounds and perturbation cover different edges".into(),
        ));
    }
    Ok(perturbation.iter().all(|(e, delta)| {
        let bound = bounds.get(e).expect("same support");
        if optimum.contains(e) {
            bound <= delta
        } else {
            delta <= -bound
        }
    }))
}
