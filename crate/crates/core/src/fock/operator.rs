use std::sync::Arc;

use faer::Mat;

use super::basis::TruncatedBasis;
use crate::error::{Error, Result};

/// Compressed-row block mapping one number sector into another.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrBlock {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrBlock {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrBlock {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let mut block = CsrBlock {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        };
        block.prune();
        block
    }

    fn prune(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut triplets = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        *self = CsrBlock::from_triplets(self.nrows, self.ncols, triplets);
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn transpose(&self) -> CsrBlock {
        let t = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        CsrBlock::from_triplets(self.ncols, self.nrows, t)
    }

    /// `y += alpha * A x`.
    pub fn mul_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let acc: f64 = self.row(r).map(|(c, v)| v * x[c]).sum();
            *yr += alpha * acc;
        }
    }

    /// `x^T A x` for a square block.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.nrows)
            .map(|r| x[r] * self.row(r).map(|(c, v)| v * x[c]).sum::<f64>())
            .sum()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    fn combine(&self, other: &CsrBlock, a: f64, b: f64) -> CsrBlock {
        let t = self
            .triplets()
            .map(|(r, c, v)| (r, c, a * v))
            .chain(other.triplets().map(|(r, c, v)| (r, c, b * v)))
            .collect();
        CsrBlock::from_triplets(self.nrows, self.ncols, t)
    }

    fn matmul(&self, rhs: &CsrBlock) -> CsrBlock {
        let mut acc = vec![0.0; rhs.ncols];
        let mut touched = Vec::new();
        let mut t = Vec::new();
        for r in 0..self.nrows {
            for (m, v) in self.row(r) {
                for (c, w) in rhs.row(m) {
                    if acc[c] == 0.0 {
                        touched.push(c);
                    }
                    acc[c] += v * w;
                }
            }
            for &c in &touched {
                t.push((r, c, acc[c]));
                acc[c] = 0.0;
            }
            touched.clear();
        }
        CsrBlock::from_triplets(self.nrows, rhs.ncols, t)
    }
}

/// Many-body operator that shifts the particle number by a fixed amount,
/// stored as one sparse block per source sector.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: Arc<TruncatedBasis>,
    shift: isize,
    /// Indexed by source sector; `None` where the target sector is absent.
    blocks: Vec<Option<CsrBlock>>,
    /// Sorted sites on which the operator may act nontrivially.
    support: Vec<usize>,
}

impl SparseOperator {
    pub(crate) fn from_blocks(
        basis: Arc<TruncatedBasis>,
        shift: isize,
        blocks: Vec<Option<CsrBlock>>,
        mut support: Vec<usize>,
    ) -> Self {
        support.sort_unstable();
        support.dedup();
        SparseOperator {
            basis,
            shift,
            blocks,
            support,
        }
    }

    pub fn zero(basis: &Arc<TruncatedBasis>, shift: isize) -> Self {
        let dims = basis.sector_dims();
        let blocks = (0..dims.len())
            .map(|s| target_of(s, shift, dims.len()).map(|t| CsrBlock::zeros(dims[t], dims[s])))
            .collect();
        SparseOperator::from_blocks(basis.clone(), shift, blocks, Vec::new())
    }

    pub fn identity(basis: &Arc<TruncatedBasis>) -> Self {
        let blocks = basis
            .sector_dims()
            .into_iter()
            .map(|d| {
                Some(CsrBlock::from_triplets(
                    d,
                    d,
                    (0..d).map(|i| (i, i, 1.0)).collect(),
                ))
            })
            .collect();
        SparseOperator::from_blocks(basis.clone(), 0, blocks, Vec::new())
    }

    pub fn basis(&self) -> &Arc<TruncatedBasis> {
        &self.basis
    }

    /// Change of total particle number produced by the operator.
    pub fn shift(&self) -> isize {
        self.shift
    }

    pub fn is_number_conserving(&self) -> bool {
        self.shift == 0
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Block mapping `source` into `source + shift`.
    pub fn block(&self, source: usize) -> Option<&CsrBlock> {
        self.blocks.get(source).and_then(Option::as_ref)
    }

    pub fn nnz(&self) -> usize {
        self.blocks.iter().flatten().map(CsrBlock::nnz).sum()
    }

    fn check_compatible(&self, other: &SparseOperator) -> Result<()> {
        if !Arc::ptr_eq(&self.basis, &other.basis) {
            return Err(Error::invalid("operators live on different bases"));
        }
        Ok(())
    }

    pub fn scale(&self, factor: f64) -> SparseOperator {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                b.as_ref().map(|b| {
                    let mut b = b.clone();
                    b.values.iter_mut().for_each(|v| *v *= factor);
                    b.prune();
                    b
                })
            })
            .collect();
        SparseOperator::from_blocks(self.basis.clone(), self.shift, blocks, self.support.clone())
    }

    /// `a * self + b * other`.
    pub fn linear_combination(
        &self,
        a: f64,
        other: &SparseOperator,
        b: f64,
    ) -> Result<SparseOperator> {
        self.check_compatible(other)?;
        if self.shift != other.shift {
            return Err(Error::invalid(
                "cannot add operators with different number shifts",
            ));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => Some(x.combine(y, a, b)),
                _ => None,
            })
            .collect();
        let support = self.support.iter().chain(&other.support).copied().collect();
        Ok(SparseOperator::from_blocks(
            self.basis.clone(),
            self.shift,
            blocks,
            support,
        ))
    }

    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.linear_combination(1.0, other, 1.0)
    }

    /// Operator product `self * rhs` (rhs acts first).
    pub fn compose(&self, rhs: &SparseOperator) -> Result<SparseOperator> {
        self.check_compatible(rhs)?;
        let n = self.blocks.len();
        let shift = self.shift + rhs.shift;
        let dims = self.basis.sector_dims();
        let blocks = (0..n)
            .map(|s| {
                let t = target_of(s, shift, n)?;
                let inner = rhs.block(s).zip(target_of(s, rhs.shift, n));
                Some(
                    match inner.and_then(|(b, m)| self.block(m).map(|a| a.matmul(b))) {
                        Some(block) => block,
                        None => CsrBlock::zeros(dims[t], dims[s]),
                    },
                )
            })
            .collect();
        let support = self.support.iter().chain(&rhs.support).copied().collect();
        Ok(SparseOperator::from_blocks(
            self.basis.clone(),
            shift,
            blocks,
            support,
        ))
    }

    /// Transpose, which is the adjoint for these real matrix elements.
    pub fn adjoint(&self) -> SparseOperator {
        let n = self.blocks.len();
        let dims = self.basis.sector_dims();
        let blocks = (0..n)
            .map(|s| {
                let t = target_of(s, -self.shift, n)?;
                Some(match self.block(t) {
                    Some(b) => b.transpose(),
                    None => CsrBlock::zeros(dims[t], dims[s]),
                })
            })
            .collect();
        SparseOperator::from_blocks(
            self.basis.clone(),
            -self.shift,
            blocks,
            self.support.clone(),
        )
    }

    /// Apply to a vector living in a single sector, returning the image in
    /// `source + shift` (or `None` if that sector is absent).
    pub fn apply(&self, source: usize, x: &[f64]) -> Option<(usize, Vec<f64>)> {
        let block = self.block(source)?;
        let mut y = vec![0.0; block.nrows];
        block.mul_add(1.0, x, &mut y);
        Some(((source as isize + self.shift) as usize, y))
    }

    pub fn dense_block(&self, source: usize) -> Option<Mat<f64>> {
        self.block(source).map(CsrBlock::to_dense)
    }

    /// Largest `|A_ij - A_ji|` over all diagonal blocks; infinite for
    /// operators that change the particle number.
    pub fn hermiticity_defect(&self) -> f64 {
        if self.shift != 0 {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for b in self.blocks.iter().flatten() {
            for (r, c, v) in b.triplets() {
                worst = worst.max((v - b.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest absolute matrix element.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .flat_map(|b| b.values.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Dense matrix over the whole truncated space, sectors in order.
    pub fn to_dense(&self) -> Mat<f64> {
        let dims = self.basis.sector_dims();
        let mut offsets = vec![0usize; dims.len() + 1];
        for (s, d) in dims.iter().enumerate() {
            offsets[s + 1] = offsets[s] + d;
        }
        let total = offsets[dims.len()];
        let mut m = Mat::zeros(total, total);
        for (s, block) in self.blocks.iter().enumerate() {
            let Some(block) = block else { continue };
            let t = (s as isize + self.shift) as usize;
            for (r, c, v) in block.triplets() {
                m[(offsets[t] + r, offsets[s] + c)] += v;
            }
        }
        m
    }
}

pub(crate) fn target_of(source: usize, shift: isize, sectors: usize) -> Option<usize> {
    let t = source as isize + shift;
    (t >= 0 && (t as usize) < sectors).then_some(t as usize)
}
