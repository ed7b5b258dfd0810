//! Dense sample-by-feature matrices with named columns.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::registry::FeatureVector;
use crate::tensor::LatentTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    rows: usize,
    /// Row-major `rows x names.len()`.
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, rows: usize, data: Vec<f64>) -> Result<Self> {
        if rows * names.len() != data.len() {
            return Err(Error::Shape(format!(
                "{rows} x {} matrix needs {} values, got {}",
                names.len(),
                rows * names.len(),
                data.len()
            )));
        }
        FeatureVector::from_parts(names.clone(), vec![0.0; names.len()])?;
        Ok(Self { names, rows, data })
    }

    /// Stack per-sample vectors that share one name layout.
    pub fn from_vectors(vectors: &[FeatureVector]) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptyFeatureSet)?;
        let names = first.names().to_vec();
        let mut data = Vec::with_capacity(vectors.len() * names.len());
        for (i, v) in vectors.iter().enumerate() {
            if v.names() != names.as_slice() {
                return Err(Error::Shape(format!("sample {i} has a different feature layout")));
            }
            data.extend_from_slice(v.values());
        }
        Self::new(names, vectors.len(), data)
    }

    pub fn from_tensor(t: &LatentTensor, names: Vec<String>) -> Result<Self> {
        match *t.dims() {
            [rows, cols] if cols == names.len() => Self::new(names, rows, t.data().to_vec()),
            ref d => Err(Error::Shape(format!(
                "feature matrix tensor {d:?} does not match {} names",
                names.len()
            ))),
        }
    }

    pub fn to_tensor(&self) -> LatentTensor {
        LatentTensor::new(vec![self.rows, self.cols()], self.data.clone()).expect("consistent shape")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let n = self.cols();
        &self.data[r * n..(r + 1) * n]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        let n = self.cols();
        let mut cols = vec![Vec::with_capacity(self.rows); n];
        for r in 0..self.rows {
            for (col, v) in cols.iter_mut().zip(self.row(r)) {
                col.push(*v);
            }
        }
        cols
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let names = idx.iter().map(|&i| self.names[i].clone()).collect();
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(idx.iter().map(|&i| row[i]));
        }
        Self {
            names,
            rows: self.rows,
            data,
        }
    }

    pub fn select_names(&self, names: &[String]) -> Result<Self> {
        let lookup: HashMap<&str, usize> =
            self.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let idx = names
            .iter()
            .map(|n| {
                lookup
                    .get(n.as_str())
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument(format!("feature {n} not in matrix")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select_columns(&idx))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols());
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        Self {
            names: self.names.clone(),
            rows: idx.len(),
            data,
        }
    }

    /// Append columns (each of length `rows`) under new unique names.
    pub fn with_columns(&self, extra: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut names = self.names.clone();
        for (n, col) in &extra {
            if col.len() != self.rows {
                return Err(Error::Shape(format!("column {n} has {} rows, expected {}", col.len(), self.rows)));
            }
            names.push(n.clone());
        }
        let total = names.len();
        let mut data = Vec::with_capacity(self.rows * total);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend(extra.iter().map(|(_, col)| col[r]));
        }
        Self::new(names, self.rows, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m() -> FeatureMatrix {
        FeatureMatrix::new(
            vec!["a.x".into(), "a.y".into(), "b.z".into()],
            2,
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        )
        .unwrap()
    }

    #[test]
    fn shape_checks() {
        assert!(FeatureMatrix::new(vec!["a".into()], 2, vec![1.0]).is_err());
        assert!(FeatureMatrix::new(vec!["a".into(), "a".into()], 1, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn selection_and_columns() {
        let m = m();
        assert_eq!(m.column(1), vec![2.0, 5.0]);
        let s = m.select_names(&["b.z".into(), "a.x".into()]).unwrap();
        assert_eq!(s.row(1), &[6.0, 4.0]);
        assert_eq!(m.select_rows(&[1]).row(0), &[4.0, 5.0, 6.0]);
        let w = m.with_columns(vec![("c.w".into(), vec![7.0, 8.0])]).unwrap();
        assert_eq!(w.row(1), &[4.0, 5.0, 6.0, 8.0]);
        assert_eq!(FeatureMatrix::from_tensor(&m.to_tensor(), m.names().to_vec()).unwrap(), m);
    }
}
