//! Uniform radial grid on `[0, 1]` and fields sampled on it.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::report::fmt_g17;

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 16;

/// Uniform mesh `r_i = i/N`, `i = 0..=N`, carrying the spatial dimension
/// that enters the `(n−1)/r` term of the radial Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mesh {
    n_cells: usize,
    dim: usize,
}

impl Mesh {
    pub fn new(n_cells: usize, dim: usize) -> Result<Self> {
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidParameter(format!(
                "mesh needs at least {MIN_CELLS} cells, got {n_cells}"
            )));
        }
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(Self { n_cells, dim })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    /// Node `i`; computed as `i/N` so that `r_N` is exactly 1.
    pub fn r(&self, i: usize) -> f64 {
        i as f64 / self.n_cells as f64
    }

    /// Midpoint of cell `[r_i, r_{i+1}]`.
    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n_cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.r(i)).collect()
    }

    pub fn with_cells(&self, n_cells: usize) -> Result<Self> {
        Mesh::new(n_cells, self.dim)
    }
}

/// Scalar function sampled at the nodes of a [`Mesh`]. Always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    mesh: Mesh,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values but the mesh has {} nodes",
                values.len(),
                mesh.n_nodes()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite field value at node {i}"
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Mesh) -> Self {
        Self { mesh, values: vec![0.0; mesh.n_nodes()] }
    }

    /// Samples `f` at every node. Fails if `f` produces a non-finite value.
    pub fn from_fn(mesh: Mesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..mesh.n_nodes()).map(|i| f(mesh.r(i))).collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &RadialField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Two-column `r,value` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["r", "value"]).map_err(csv_error)?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([fmt_g17(self.mesh.r(i)), fmt_g17(*v)]).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`RadialField::write_csv`]. The node
    /// positions must match a uniform mesh.
    pub fn read_csv<R: Read>(input: R, dim: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let mut values = Vec::new();
        for record in reader.deserialize::<(f64, f64)>() {
            values.push(record.map_err(csv_error)?);
        }
        if values.len() < 2 {
            return Err(Error::Parse("field needs at least two rows".into()));
        }
        let mesh = Mesh::new(values.len() - 1, dim)?;
        for (i, (r, _)) in values.iter().enumerate() {
            if (r - mesh.r(i)).abs() > 1e-12 {
                return Err(Error::Parse(format!("node {i} at r = {r} is not on a uniform mesh")));
            }
        }
        Self::new(mesh, values.into_iter().map(|(_, v)| v).collect())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_nodes() {
        let m = Mesh::new(64, 3).unwrap();
        let nodes = m.nodes();
        assert_eq!(nodes.len(), 65);
        assert_eq!(nodes[0], 0.0);
        assert_eq!(nodes[64], 1.0);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        assert!((m.h() * 64.0 - 1.0).abs() < f64::EPSILON);
        assert!(Mesh::new(8, 3).is_err());
    }

    #[test]
    fn field_rejects_bad_values() {
        let m = Mesh::new(16, 3).unwrap();
        assert!(RadialField::new(m, vec![0.0; 16]).is_err());
        let mut v = vec![0.0; 17];
        v[3] = f64::NAN;
        assert!(RadialField::new(m, v).is_err());
        assert!(RadialField::from_fn(m, |r| 1.0 / r).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = Mesh::new(32, 5).unwrap();
        let f = RadialField::from_fn(m, |r| (1.0 - r * r).powi(2) / 3.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = RadialField::read_csv(buf.as_slice(), 5).unwrap();
        assert_eq!(back, f);
    }
}
