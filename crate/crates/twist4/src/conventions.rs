//! The sign and ordering conventions every report carries.
//!
//! The constructions in this crate involve three independent choices that
//! silently change signs if two tools disagree on them. Reports therefore
//! state them explicitly so that output is interpretable without reading the
//! source.

use serde::{Deserialize, Serialize};

/// Degree of the adjoined odd square-zero variable: `-1` (default) or `+1`.
pub const DEFAULT_EPSILON_DEGREE: i8 = -1;

/// Conventions block embedded in serialized reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    /// Degree of the adjoined odd variable in square-zero extensions.
    pub epsilon_degree: i8,
    /// Side on which the odd variable multiplies.
    pub epsilon_side: String,
    /// Normal-ordering convention for Weyl-algebra monomials.
    pub normal_order: String,
    /// Normalization of the one-variable holomorphic kernel.
    pub kernel_normalization: String,
}

impl Conventions {
    /// The crate-wide conventions with a chosen epsilon degree.
    pub fn with_epsilon_degree(epsilon_degree: i8) -> Self {
        Conventions {
            epsilon_degree,
            epsilon_side: "right".to_string(),
            normal_order: "dual generators to the right".to_string(),
            kernel_normalization: "1/(2 pi i (z - w))".to_string(),
        }
    }
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions::with_epsilon_degree(DEFAULT_EPSILON_DEGREE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_epsilon_degree_is_minus_one() {
        assert_eq!(Conventions::default().epsilon_degree, -1);
    }
}
