//! Hypervectors and the three operations they support.
//!
//! A hypervector is a dense fixed-dimension vector of signed integers. All
//! arithmetic happens in the wide i64 accumulation domain; the nominal 8/16
//! bit storage width only applies when a trained associative memory is
//! clipped for storage (see the classifier module).

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Seed};

/// Nominal storage width of class-hypervector elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataWidth {
    Int8,
    Int16,
}

impl DataWidth {
    pub fn bits(self) -> u32 {
        match self {
            DataWidth::Int8 => 8,
            DataWidth::Int16 => 16,
        }
    }

    /// Inclusive saturation bounds for this width.
    pub fn bounds(self) -> (i64, i64) {
        match self {
            DataWidth::Int8 => (i8::MIN as i64, i8::MAX as i64),
            DataWidth::Int16 => (i16::MIN as i64, i16::MAX as i64),
        }
    }

    /// Saturate a wide value into this width.
    pub fn saturate(self, value: i64) -> i64 {
        let (lo, hi) = self.bounds();
        value.clamp(lo, hi)
    }
}

/// Dense integer vector of fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypervector {
    elems: Vec<i64>,
}

impl Hypervector {
    /// All-zero vector. Errors on `dim == 0`.
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Hypervector {
            elems: vec![0; dim],
        })
    }

    /// Wrap an element vector. Errors if empty.
    pub fn from_elements(elems: Vec<i64>) -> Result<Self> {
        if elems.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Hypervector { elems })
    }

    /// Random bipolar vector, each element i.i.d. uniform over {-1, +1}.
    /// Fully determined by `(seed, stream_id, dim)`.
    pub fn random_bipolar(dim: usize, seed: Seed, stream_id: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut rng = stream_rng(seed, stream_id);
        let elems = (0..dim)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        Ok(Hypervector { elems })
    }

    pub fn dim(&self) -> usize {
        self.elems.len()
    }

    pub fn elements(&self) -> &[i64] {
        &self.elems
    }

    /// True when every element is -1 or +1.
    pub fn is_bipolar(&self) -> bool {
        self.elems.iter().all(|&e| e == 1 || e == -1)
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// Element-wise sum in the wide accumulation domain.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let elems = self
            .elems
            .iter()
            .zip(&other.elems)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Hypervector { elems })
    }

    /// Element-wise product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let elems = self
            .elems
            .iter()
            .zip(&other.elems)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Hypervector { elems })
    }

    /// Cyclic right shift by `k`: the last `k` elements move to the front, so
    /// shift 1 maps `<h1..hn>` to `<hn, h1, .., h(n-1)>`. Negative `k` shifts
    /// left; the effective shift is `k mod dim`.
    pub fn permute(&self, k: i64) -> Self {
        let dim = self.dim() as i64;
        let shift = k.rem_euclid(dim) as usize;
        let mut elems = self.elems.clone();
        elems.rotate_right(shift);
        Hypervector { elems }
    }

    /// Dot product, accumulated in i128 so arbitrary i64 contents cannot
    /// overflow.
    pub fn dot(&self, other: &Self) -> Result<i128> {
        self.check_dims(other)?;
        Ok(self
            .elems
            .iter()
            .zip(&other.elems)
            .map(|(&a, &b)| a as i128 * b as i128)
            .sum())
    }

    fn norm_sq(&self) -> i128 {
        self.elems.iter().map(|&a| a as i128 * a as i128).sum()
    }

    /// True when every element is zero.
    pub fn is_zero(&self) -> bool {
        self.elems.iter().all(|&e| e == 0)
    }

    /// Cosine similarity in [-1, 1].
    ///
    /// A zero-norm operand is an error: in this system an all-zero vector is
    /// an untrained class hypervector, which is a caller bug worth surfacing
    /// rather than a value worth defining.
    pub fn cosine(&self, other: &Self) -> Result<f64> {
        self.check_dims(other)?;
        let na = self.norm_sq();
        let nb = other.norm_sq();
        if na == 0 {
            return Err(Error::ZeroNorm { context: "left" });
        }
        if nb == 0 {
            return Err(Error::ZeroNorm { context: "right" });
        }
        let dot = self.dot(other)? as f64;
        Ok(dot / ((na as f64).sqrt() * (nb as f64).sqrt()))
    }

    /// In-place element-wise add, used for training accumulation.
    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_dims(other)?;
        for (a, b) in self.elems.iter_mut().zip(&other.elems) {
            *a += b;
        }
        Ok(())
    }

    /// In-place element-wise subtract, used for retraining updates.
    pub fn sub_assign(&mut self, other: &Self) -> Result<()> {
        self.check_dims(other)?;
        for (a, b) in self.elems.iter_mut().zip(&other.elems) {
            *a -= b;
        }
        Ok(())
    }

    /// Copy with every element saturated into the given width.
    pub fn saturated(&self, width: DataWidth) -> Self {
        Hypervector {
            elems: self.elems.iter().map(|&e| width.saturate(e)).collect(),
        }
    }
}
