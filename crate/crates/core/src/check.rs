//! Two-sided comparison records shared by the verification routines.

/// An identity `lhs = rhs` evaluated two independent ways.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub quantity: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Check {
    pub fn new(quantity: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            quantity: quantity.into(),
            lhs,
            rhs,
        }
    }

    pub fn abs_diff(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    /// Difference relative to `max(1, |lhs|)`.
    pub fn rel_diff(&self) -> f64 {
        self.abs_diff() / self.lhs.abs().max(1.0)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.abs_diff() <= tol
    }
}

/// An inequality `lhs <= rhs` with `slack = rhs - lhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bound {
    pub quantity: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Bound {
    pub fn new(quantity: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            quantity: quantity.into(),
            lhs,
            rhs,
        }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.slack() >= -tol
    }
}
