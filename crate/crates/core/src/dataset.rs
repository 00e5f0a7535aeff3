//! Dense vector datasets, the `fvecs`/`ivecs` file formats, and the
//! squared Euclidean distance kernel shared by every other module.
//!
//! Both file formats are a flat sequence of records with no header: a
//! little-endian `i32` dimension followed by that many little-endian
//! `f32` (fvecs) or `i32` (ivecs) values. All records in a file share the
//! same dimension.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `n` row vectors of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    n: usize,
    dim: usize,
    data: Vec<f32>,
}

impl VectorSet {
    /// Wraps a row-major buffer. Fails if the length is not a multiple of
    /// `dim` or if any value is NaN or infinite.
    pub fn new(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            if data.is_empty() {
                return Ok(Self::empty());
            }
            return Err(Error::param("dim must be at least 1"));
        }
        if data.len() % dim != 0 {
            return Err(Error::param(format!(
                "buffer of {} values is not a multiple of dim {}",
                data.len(),
                dim
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                record: pos / dim,
                component: pos % dim,
            });
        }
        Ok(Self {
            n: data.len() / dim,
            dim,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Ok(Self::empty());
        };
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::InconsistentDim {
                    record: i,
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    /// The `n = 0, dim = 0` set produced by loading an empty file.
    pub fn empty() -> Self {
        Self {
            n: 0,
            dim: 0,
            data: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Row `i`. Panics if `i >= len()`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    /// A new set holding rows `ids` in that order.
    pub fn select(&self, ids: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            self.check_id(i)?;
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            n: ids.len(),
            dim: self.dim,
            data,
        })
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id >= self.n {
            return Err(Error::IdOutOfRange { id, n: self.n });
        }
        Ok(())
    }

    /// Squared Euclidean distance between base points `a` and `b`.
    pub fn dist_sq(&self, a: usize, b: usize) -> Result<f32> {
        self.check_id(a)?;
        self.check_id(b)?;
        Ok(sq_euclidean(self.row(a), self.row(b)))
    }

    /// Squared Euclidean distance between an external vector and base point `b`.
    pub fn dist_sq_q(&self, q: &[f32], b: usize) -> Result<f32> {
        self.check_id(b)?;
        if q.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: q.len(),
            });
        }
        Ok(sq_euclidean(q, self.row(b)))
    }
}

/// Squared Euclidean distance, accumulated in ascending index order so the
/// result is bit-reproducible.
#[inline]
pub fn sq_euclidean(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Exact neighbor ids per query, `k` per row, nearest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    n_queries: usize,
    k: usize,
    ids: Vec<u32>,
}

impl GroundTruth {
    pub fn new(k: usize, ids: Vec<u32>) -> Result<Self> {
        if k == 0 {
            if ids.is_empty() {
                return Ok(Self {
                    n_queries: 0,
                    k: 0,
                    ids,
                });
            }
            return Err(Error::param("k must be at least 1"));
        }
        if ids.len() % k != 0 {
            return Err(Error::param(format!(
                "{} ids is not a multiple of k {}",
                ids.len(),
                k
            )));
        }
        Ok(Self {
            n_queries: ids.len() / k,
            k,
            ids,
        })
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        let mut ids = Vec::with_capacity(rows.len() * k);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(Error::InconsistentDim {
                    record: i,
                    expected: k,
                    found: r.len(),
                });
            }
            ids.extend_from_slice(r);
        }
        Self::new(k, ids)
    }

    pub fn n_queries(&self) -> usize {
        self.n_queries
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.ids[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        (0..self.n_queries).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.ids
    }

    /// Keeps only the first `k` columns.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k > self.k {
            return Err(Error::param(format!(
                "cannot truncate {}-NN ground truth to {}",
                self.k, k
            )));
        }
        let ids = self.rows().flat_map(|r| r[..k].iter().copied()).collect();
        Self::new(k, ids)
    }

    /// Checks every id is below `n_base` and no row repeats an id.
    pub fn validate(&self, n_base: usize) -> Result<()> {
        for (q, row) in self.rows().enumerate() {
            for (j, &id) in row.iter().enumerate() {
                if id as usize >= n_base {
                    return Err(Error::IdOutOfRange {
                        id: id as usize,
                        n: n_base,
                    });
                }
                if row[..j].contains(&id) {
                    return Err(Error::InvalidIndex(format!(
                        "row {q} repeats id {id}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Uniform `[0, 1)` vectors from a seeded ChaCha stream.
pub fn gen_synthetic(n: usize, dim: usize, seed: u64) -> Result<VectorSet> {
    if dim == 0 {
        return Err(Error::param("dim must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| rng.gen::<f32>()).collect();
    Ok(VectorSet { n, dim, data })
}

/// Parses the shared record layout. Returns `(dim, payload words)`.
fn parse_vecs(bytes: &[u8]) -> Result<(usize, Vec<[u8; 4]>)> {
    if bytes.is_empty() {
        return Ok((0, Vec::new()));
    }
    let mut words = Vec::new();
    let mut dim = 0usize;
    let mut offset = 0usize;
    let mut record = 0usize;
    while offset < bytes.len() {
        let start = offset;
        let header = bytes.get(offset..offset + 4).ok_or_else(|| Error::Format {
            offset: start as u64,
            msg: format!("truncated dimension header in record {record}"),
        })?;
        let d = i32::from_le_bytes(header.try_into().unwrap());
        if d <= 0 {
            return Err(Error::Format {
                offset: start as u64,
                msg: format!("record {record} has non-positive dimension {d}"),
            });
        }
        let d = d as usize;
        if record == 0 {
            dim = d;
            words.reserve(bytes.len() / (4 * (d + 1)) * d);
        } else if d != dim {
            return Err(Error::InconsistentDim {
                record,
                expected: dim,
                found: d,
            });
        }
        offset += 4;
        let body = bytes.get(offset..offset + 4 * d).ok_or_else(|| Error::Format {
            offset: start as u64,
            msg: format!(
                "record {record} truncated: needs {} payload bytes, {} remain",
                4 * d,
                bytes.len() - offset
            ),
        })?;
        words.extend(body.chunks_exact(4).map(|c| <[u8; 4]>::try_from(c).unwrap()));
        offset += 4 * d;
        record += 1;
    }
    Ok((dim, words))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io_path(path, e))
}

pub fn load_fvecs(path: impl AsRef<Path>) -> Result<VectorSet> {
    decode_fvecs(&read_file(path.as_ref())?)
}

pub fn decode_fvecs(bytes: &[u8]) -> Result<VectorSet> {
    let (dim, words) = parse_vecs(bytes)?;
    if dim == 0 {
        return Ok(VectorSet::empty());
    }
    let data: Vec<f32> = words.into_iter().map(f32::from_le_bytes).collect();
    VectorSet::new(dim, data)
}

pub fn encode_fvecs(vs: &VectorSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(vs.n * (vs.dim + 1) * 4);
    for row in vs.rows() {
        out.extend_from_slice(&(vs.dim as i32).to_le_bytes());
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn save_fvecs(vs: &VectorSet, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_fvecs(vs))
}

pub fn load_ivecs(path: impl AsRef<Path>) -> Result<GroundTruth> {
    decode_ivecs(&read_file(path.as_ref())?)
}

/// Decodes an ivecs payload. Negative ids are rejected since every row is
/// a list of point ids.
pub fn decode_ivecs(bytes: &[u8]) -> Result<GroundTruth> {
    let (dim, words) = parse_vecs(bytes)?;
    if dim == 0 {
        return GroundTruth::new(0, Vec::new());
    }
    let mut ids = Vec::with_capacity(words.len());
    for (i, w) in words.into_iter().enumerate() {
        let v = i32::from_le_bytes(w);
        if v < 0 {
            let (record, component) = (i / dim, i % dim);
            return Err(Error::Format {
                offset: (record * (dim + 1) * 4 + 4 + component * 4) as u64,
                msg: format!("negative id {v} in record {record}"),
            });
        }
        ids.push(v as u32);
    }
    GroundTruth::new(dim, ids)
}

pub fn encode_ivecs(gt: &GroundTruth) -> Vec<u8> {
    let mut out = Vec::with_capacity(gt.n_queries * (gt.k + 1) * 4);
    for row in gt.rows() {
        out.extend_from_slice(&(gt.k as i32).to_le_bytes());
        for &v in row {
            out.extend_from_slice(&(v as i32).to_le_bytes());
        }
    }
    out
}

pub fn save_ivecs(gt: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_ivecs(gt))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io_path(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes).map_err(|e| Error::io_path(path, e))?;
    w.flush().map_err(|e| Error::io_path(path, e))?;
    Ok(())
}
