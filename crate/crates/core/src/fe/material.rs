use crate::error::{Error, Result};
use crate::fe::element::Coefficients;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialPattern {
    Uniform,
    /// Stiff material where the subdomain block index sum is even.
    Checkerboard,
    /// Alternating slabs of subdomains along `axis`, stiff on even layers.
    Layers { axis: usize },
}

/// Piecewise-constant material assigned per subdomain block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialField {
    pub pattern: MaterialPattern,
    /// E1 (or k1): the stiff material.
    pub stiff: f64,
    /// E2 (or k2).
    pub soft: f64,
    pub poisson: f64,
}

impl MaterialField {
    pub fn uniform(modulus: f64, poisson: f64) -> Self {
        Self {
            pattern: MaterialPattern::Uniform,
            stiff: modulus,
            soft: modulus,
            poisson,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stiff > 0.0 && self.soft > 0.0) {
            return Err(Error::config(format!("moduli must be positive, got {} and {}", self.stiff, self.soft)));
        }
        if !(0.0..0.5).contains(&self.poisson) {
            return Err(Error::config(format!("poisson ratio {} outside [0, 0.5)", self.poisson)));
        }
        if let MaterialPattern::Layers { axis } = self.pattern {
            if axis > 2 {
                return Err(Error::config(format!("layer axis {axis} out of range")));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self, block: [usize; 3]) -> Coefficients {
        let stiff = match self.pattern {
            MaterialPattern::Uniform => true,
            MaterialPattern::Checkerboard => (block[0] + block[1] + block[2]).is_multiple_of(2),
            MaterialPattern::Layers { axis } => block[axis].is_multiple_of(2),
        };
        Coefficients {
            modulus: if stiff { self.stiff } else { self.soft },
            poisson: self.poisson,
        }
    }
}
