//! The exported kNN graph: `k` neighbors per point, nearest first.

use std::path::Path;

use crate::dataset::{self, GroundTruth, VectorSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    k: usize,
    ids: Vec<u32>,
    dists: Vec<f32>,
}

impl KnnGraph {
    /// Builds a graph from per-point `(id, dist)` rows. Each row must hold
    /// exactly `k` distinct non-self ids sorted by `(dist, id)`.
    pub fn from_rows(k: usize, rows: &[Vec<(u32, f32)>]) -> Result<Self> {
        let mut ids = Vec::with_capacity(rows.len() * k);
        let mut dists = Vec::with_capacity(rows.len() * k);
        for row in rows {
            for &(id, d) in row {
                ids.push(id);
                dists.push(d);
            }
        }
        let g = Self { k, ids, dists };
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidIndex(format!("every row must have {k} entries")));
        }
        g.validate()?;
        Ok(g)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.ids.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.ids[i * self.k..(i + 1) * self.k]
    }

    pub fn distances(&self, i: usize) -> &[f32] {
        &self.dists[i * self.k..(i + 1) * self.k]
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    /// Keeps the first `k` neighbors of every row.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k {
            return Err(Error::param(format!("cannot truncate width {} to {k}", self.k)));
        }
        let n = self.len();
        let mut ids = Vec::with_capacity(n * k);
        let mut dists = Vec::with_capacity(n * k);
        for i in 0..n {
            ids.extend_from_slice(&self.neighbors(i)[..k]);
            dists.extend_from_slice(&self.distances(i)[..k]);
        }
        Ok(Self { k, ids, dists })
    }

    pub fn to_ground_truth(&self) -> GroundTruth {
        GroundTruth::new(self.k, self.ids.clone()).expect("graph rows have width k")
    }

    /// Checks the row invariants: ids in range, no self loops, no repeats,
    /// distances finite and sorted ascending.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidIndex("graph width is 0".into()));
        }
        let n = self.len();
        for i in 0..n {
            let ids = self.neighbors(i);
            let ds = self.distances(i);
            for j in 0..self.k {
                let id = ids[j] as usize;
                if id >= n {
                    return Err(Error::IdOutOfRange { id, n });
                }
                if id == i || ids[..j].contains(&ids[j]) {
                    return Err(Error::InvalidIndex(format!("row {i} has a self loop or repeat")));
                }
                if !ds[j].is_finite() || (j > 0 && ds[j - 1] > ds[j]) {
                    return Err(Error::InvalidIndex(format!("row {i} is not sorted")));
                }
            }
        }
        Ok(())
    }

    /// Checks stored distances against the data.
    pub fn validate_distances(&self, vs: &VectorSet) -> Result<()> {
        if vs.len() != self.len() {
            return Err(Error::InvalidIndex(format!(
                "graph has {} rows, dataset has {} points",
                self.len(),
                vs.len()
            )));
        }
        for i in 0..self.len() {
            for (&id, &d) in self.neighbors(i).iter().zip(self.distances(i)) {
                if vs.dist_sq(i, id as usize)? != d {
                    return Err(Error::InvalidIndex(format!(
                        "row {i}: stored distance to {id} does not match the data"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes neighbor ids as ivecs and distances as a companion fvecs.
    pub fn save(&self, ids_path: impl AsRef<Path>, dists_path: impl AsRef<Path>) -> Result<()> {
        dataset::save_ivecs(&self.to_ground_truth(), ids_path)?;
        let dists = VectorSet::new(self.k, self.dists.clone())?;
        dataset::save_fvecs(&dists, dists_path)
    }

    pub fn load(ids_path: impl AsRef<Path>, dists_path: impl AsRef<Path>) -> Result<Self> {
        let gt = dataset::load_ivecs(ids_path)?;
        let dists = dataset::load_fvecs(dists_path)?;
        if gt.n_queries() != dists.len() || (gt.n_queries() > 0 && gt.k() != dists.dim()) {
            return Err(Error::InvalidIndex(
                "graph id and distance files disagree in shape".into(),
            ));
        }
        let g = Self {
            k: gt.k(),
            ids: gt.as_slice().to_vec(),
            dists: dists.as_slice().to_vec(),
        };
        g.validate()?;
        Ok(g)
    }

    /// Loads a graph from an ivecs file alone, recomputing distances.
    pub fn load_ids(ids_path: impl AsRef<Path>, vs: &VectorSet) -> Result<Self> {
        let gt = dataset::load_ivecs(ids_path)?;
        if gt.n_queries() != vs.len() {
            return Err(Error::InvalidIndex(format!(
                "graph has {} rows, dataset has {} points",
                gt.n_queries(),
                vs.len()
            )));
        }
        let mut dists = Vec::with_capacity(gt.as_slice().len());
        for (i, row) in gt.rows().enumerate() {
            for &id in row {
                dists.push(vs.dist_sq(i, id as usize)?);
            }
        }
        let g = Self {
            k: gt.k(),
            ids: gt.as_slice().to_vec(),
            dists,
        };
        g.validate()?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> KnnGraph {
        KnnGraph::from_rows(
            1,
            &[vec![(1, 1.0)], vec![(0, 1.0)], vec![(1, 4.0)]],
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(KnnGraph::from_rows(1, &[vec![(0, 0.0)]]).is_err());
        assert!(KnnGraph::from_rows(2, &[vec![(1, 2.0), (2, 1.0)], vec![(0, 1.0), (2, 1.0)], vec![(0, 1.0), (1, 1.0)]]).is_err());
        assert!(KnnGraph::from_rows(1, &[vec![(5, 1.0)], vec![(0, 1.0)]]).is_err());
    }

    #[test]
    fn save_load() {
        let g = tiny();
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("g.ivecs"), dir.path().join("g.fvecs"));
        g.save(&a, &b).unwrap();
        assert_eq!(KnnGraph::load(&a, &b).unwrap(), g);
        let vs = VectorSet::from_rows(&[vec![0.0f32], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(KnnGraph::load_ids(&a, &vs).unwrap(), g);
        g.validate_distances(&vs).unwrap();
    }
}
