//! Dimensions and points of the extended phase space `TQ x R^q`.

use std::ops::Range;

use crate::{Error, Result};

/// `n` configuration coordinates and `qcount` action variables. Coordinates
/// are laid out as `(q1..qn, v1..vn, z1..zq)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub n: usize,
    pub qcount: usize,
}

impl Dims {
    pub fn new(n: usize, qcount: usize) -> Result<Self> {
        if n == 0 || qcount == 0 {
            return Err(Error::InvalidDimensions { n, qcount });
        }
        Ok(Dims { n, qcount })
    }

    /// Total coordinate count `2n + q`.
    pub fn dim(&self) -> usize {
        2 * self.n + self.qcount
    }

    pub fn q_range(&self) -> Range<usize> {
        0..self.n
    }

    pub fn v_range(&self) -> Range<usize> {
        self.n..2 * self.n
    }

    pub fn z_range(&self) -> Range<usize> {
        2 * self.n..self.dim()
    }

    pub fn q_slot(&self, i: usize) -> usize {
        i
    }

    pub fn v_slot(&self, i: usize) -> usize {
        self.n + i
    }

    pub fn z_slot(&self, k: usize) -> usize {
        2 * self.n + k
    }

    /// Coordinate names in layout order, e.g. `["q1", "v1", "z1", "z2"]`.
    pub fn coordinate_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        names.extend((1..=self.n).map(|i| format!("q{i}")));
        names.extend((1..=self.n).map(|i| format!("v{i}")));
        names.extend((1..=self.qcount).map(|k| format!("z{k}")));
        names
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }
}

/// A finite point `(q, v, z)` of the extended phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPoint {
    dims: Dims,
    coords: Vec<f64>,
}

impl ExtendedPoint {
    pub fn new(dims: Dims, coords: Vec<f64>) -> Result<Self> {
        dims.check_len(coords.len())?;
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinitePoint { index: i });
        }
        Ok(ExtendedPoint { dims, coords })
    }

    pub fn from_parts(dims: Dims, q: &[f64], v: &[f64], z: &[f64]) -> Result<Self> {
        let mut coords = Vec::with_capacity(dims.dim());
        coords.extend_from_slice(q);
        coords.extend_from_slice(v);
        coords.extend_from_slice(z);
        Self::new(dims, coords)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn q(&self) -> &[f64] {
        &self.coords[self.dims.q_range()]
    }

    pub fn v(&self) -> &[f64] {
        &self.coords[self.dims.v_range()]
    }

    pub fn z(&self) -> &[f64] {
        &self.coords[self.dims.z_range()]
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl AsRef<[f64]> for ExtendedPoint {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_names() {
        let d = Dims::new(2, 3).unwrap();
        assert_eq!(d.dim(), 7);
        assert_eq!(d.v_slot(1), 3);
        assert_eq!(d.z_slot(2), 6);
        assert_eq!(d.coordinate_names(), vec!["q1", "q2", "v1", "v2", "z1", "z2", "z3"]);
        let p = ExtendedPoint::from_parts(d, &[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0, 7.0]).unwrap();
        assert_eq!(p.v(), &[3.0, 4.0]);
        assert_eq!(p.z(), &[5.0, 6.0, 7.0]);
    }

    #[test]
    fn rejects_bad_points() {
        let d = Dims::new(1, 1).unwrap();
        assert!(ExtendedPoint::new(d, vec![0.0, 1.0]).is_err());
        assert!(ExtendedPoint::new(d, vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(Dims::new(0, 1).is_err());
    }
}
