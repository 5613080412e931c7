use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// n × d matrix of precomputed feature vectors, one row per item.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    data: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EmbeddingHeader {
    n: usize,
    d: usize,
}

impl EmbeddingSet {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidInput("embedding set needs at least two vectors".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidInput("embedding dimension must be >= 1".into()));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::LengthMismatch("embedding rows differ in dimension".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("embedding contains non-finite entries".into()));
        }
        Ok(EmbeddingSet {
            data: DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]),
        })
    }

    /// One-dimensional embedding of a univariate sample.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Self::from_rows(&rows)
    }

    /// Delimited text, one vector per row. Blank lines and a non-numeric
    /// header row are skipped.
    pub fn parse_delimited(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields = line.split(|c| c == ',' || c == ';' || c == '\t' || c == ' ').filter(|s| !s.is_empty());
            let parsed: std::result::Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
            match parsed {
                Ok(r) => rows.push(r),
                Err(_) if i == 0 => continue,
                Err(_) => return Err(Error::InvalidInput(format!("embedding row {i} is not numeric"))),
            }
        }
        Self::from_rows(&rows)
    }

    /// Loads delimited text, or raw little-endian f32 when a `.json` header
    /// `{n, d}` sits next to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let header = path.with_extension("json");
        if header.exists() && path.extension().is_some_and(|e| e != "json") {
            let h: EmbeddingHeader =
                serde_json::from_str(&fs::read_to_string(&header).map_err(|e| Error::io(&header, e))?)?;
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            if bytes.len() != h.n * h.d * 4 {
                return Err(Error::InvalidInput(format!(
                    "{}: expected {} bytes for {}x{} f32, found {}",
                    path.display(),
                    h.n * h.d * 4,
                    h.n,
                    h.d,
                    bytes.len()
                )));
            }
            let vals: Vec<f64> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            let rows: Vec<Vec<f64>> = vals.chunks(h.d).map(<[f64]>::to_vec).collect();
            return Self::from_rows(&rows);
        }
        Self::parse_delimited(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn d(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    pub fn mean(&self) -> DVector<f64> {
        self.data.row_mean().transpose()
    }

    /// Sample covariance (n−1 denominator), d × d.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mu = self.data.row_mean();
        let mut centered = self.data.clone();
        for mut r in centered.row_iter_mut() {
            r -= &mu;
        }
        centered.transpose() * &centered / (self.n() as f64 - 1.0)
    }

    /// Seeded subsample without replacement; returns `self` unchanged when
    /// `max_n` is not smaller than n.
    pub fn subsample(&self, max_n: usize, seed: u64) -> EmbeddingSet {
        if max_n >= self.n() || max_n < 2 {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = index::sample(&mut rng, self.n(), max_n).into_vec();
        idx.sort_unstable();
        EmbeddingSet {
            data: self.data.select_rows(idx.iter()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_text_with_header() {
        let e = EmbeddingSet::parse_delimited("a,b\n1,2\n3,4\n\n5,6\n").unwrap();
        assert_eq!((e.n(), e.d()), (3, 2));
        assert_eq!(e.mean().as_slice(), &[3.0, 4.0]);
        assert_eq!(e.covariance()[(0, 1)], 4.0);
    }

    #[test]
    fn validates_shape() {
        assert!(EmbeddingSet::from_rows(&[vec![1.0]]).is_err());
        assert!(EmbeddingSet::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(EmbeddingSet::from_rows(&[vec![], vec![]]).is_err());
    }

    #[test]
    fn subsample_is_seeded() {
        let e = EmbeddingSet::from_values(&(0..100).map(f64::from).collect::<Vec<_>>()).unwrap();
        assert_eq!(e.subsample(10, 3), e.subsample(10, 3));
        assert_eq!(e.subsample(10, 3).n(), 10);
    }
}
