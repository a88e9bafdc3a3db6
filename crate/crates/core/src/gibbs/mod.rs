//! Thermal states on truncated spaces and the information-theoretic
//! functionals evaluated on them.
//!
//! Density matrices are kept in spectral form per number sector,
//! `rho_N = V diag(w) V^T`. Gibbs states of one Hamiltonian at different
//! temperatures share the eigenvectors through an [`Arc`].

mod split;

use std::sync::Arc;

use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fock::{SparseOperator, TruncatedBasis};
use crate::linalg::{self, entropy_of, log_sum_exp, reconstruct, sym_eigen};

pub use split::{mutual_information, partial_trace, tensor_product, Split};

/// Spectral columns with weight at or below this are skipped when
/// contracting a density matrix.
pub const WEIGHT_PRUNE: f64 = 1e-20;

/// One number sector of a density matrix in spectral form.
#[derive(Debug, Clone)]
pub struct SpectralBlock {
    weights: Vec<f64>,
    vectors: Arc<Mat<f64>>,
}

impl SpectralBlock {
    pub fn new(weights: Vec<f64>, vectors: Arc<Mat<f64>>) -> Self {
        assert_eq!(weights.len(), vectors.ncols());
        SpectralBlock { weights, vectors }
    }

    pub fn empty(dim: usize) -> Self {
        SpectralBlock {
            weights: Vec::new(),
            vectors: Arc::new(Mat::zeros(dim, 0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &Mat<f64> {
        &self.vectors
    }

    pub fn trace(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Indices of columns whose weight survives [`WEIGHT_PRUNE`].
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > WEIGHT_PRUNE)
            .map(|(c, _)| c)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        reconstruct((*self.vectors).as_ref(), &self.weights)
    }

    /// Diagonal entries of the block in the occupation basis.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim()];
        for c in self.active() {
            let w = self.weights[c];
            let col = self.vectors.col(c);
            for (i, d) in diag.iter_mut().enumerate() {
                *d += w * col[i] * col[i];
            }
        }
        diag
    }
}

/// Positive unit-trace operator, block diagonal over number sectors.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<TruncatedBasis>,
    blocks: Vec<SpectralBlock>,
}

impl DensityMatrix {
    pub fn from_blocks(basis: Arc<TruncatedBasis>, blocks: Vec<SpectralBlock>) -> Result<Self> {
        if blocks.len() != basis.num_sectors() {
            return Err(Error::invalid("one spectral block per sector is required"));
        }
        for (b, s) in blocks.iter().zip(basis.sectors()) {
            if b.dim() != s.dim() {
                return Err(Error::invalid(
                    "spectral block dimension does not match its sector",
                ));
            }
        }
        Ok(DensityMatrix { basis, blocks })
    }

    /// Diagonalize symmetric per-sector blocks. The blocks are used as
    /// given; callers normalize.
    pub fn from_dense_blocks(basis: Arc<TruncatedBasis>, dense: Vec<Mat<f64>>) -> Result<Self> {
        let blocks = dense
            .iter()
            .map(|m| {
                let eig = sym_eigen(m.as_ref())?;
                Ok(SpectralBlock::new(eig.values, Arc::new(eig.vectors)))
            })
            .collect::<Result<Vec<_>>>()?;
        DensityMatrix::from_blocks(basis, blocks)
    }

    /// Pure state supported in one sector; the vector is normalized here.
    pub fn pure(basis: Arc<TruncatedBasis>, sector: usize, state: &[f64]) -> Result<Self> {
        let dim = basis
            .sector(sector)
            .ok_or_else(|| Error::invalid(format!("sector {sector} is not part of the basis")))?
            .dim();
        if state.len() != dim {
            return Err(Error::invalid(
                "state length does not match the sector dimension",
            ));
        }
        let norm = state.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("zero state vector"));
        }
        let blocks = basis
            .sectors()
            .iter()
            .enumerate()
            .map(|(s, sec)| {
                if s == sector {
                    let v = Mat::from_fn(dim, 1, |i, _| state[i] / norm);
                    SpectralBlock::new(vec![1.0], Arc::new(v))
                } else {
                    SpectralBlock::empty(sec.dim())
                }
            })
            .collect();
        DensityMatrix::from_blocks(basis, blocks)
    }

    pub fn basis(&self) -> &Arc<TruncatedBasis> {
        &self.basis
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    pub fn block(&self, sector: usize) -> &SpectralBlock {
        &self.blocks[sector]
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(SpectralBlock::trace).sum()
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| b.weights.iter().copied())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().fold(f64::INFINITY, f64::min)
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(self.eigenvalues())
    }

    /// Total weight of each number sector.
    pub fn sector_weights(&self) -> Vec<f64> {
        self.blocks.iter().map(SpectralBlock::trace).collect()
    }

    /// Occupation-basis diagonal, one vector per sector.
    pub fn diagonal(&self) -> Vec<Vec<f64>> {
        self.blocks.iter().map(SpectralBlock::diagonal).collect()
    }

    /// `<n_x>` for every site, read off the diagonal.
    pub fn site_occupations(&self) -> Vec<f64> {
        self.diagonal_moments(|n| n as f64)
    }

    /// `<f(n_x)>` for every site, for any function of the local occupation.
    pub fn diagonal_moments(&self, f: impl Fn(u8) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.basis.num_sites()];
        for (sector, diag) in self.basis.sectors().iter().zip(self.diagonal()) {
            for (occ, p) in sector.states().zip(diag) {
                for (x, &n) in occ.iter().enumerate() {
                    out[x] += p * f(n);
                }
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> DensityMatrix {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                SpectralBlock::new(
                    b.weights.iter().map(|w| w * factor).collect(),
                    b.vectors.clone(),
                )
            })
            .collect();
        DensityMatrix {
            basis: self.basis.clone(),
            blocks,
        }
    }

    pub fn to_dense_blocks(&self) -> Vec<Mat<f64>> {
        self.blocks.iter().map(SpectralBlock::to_dense).collect()
    }
}

/// Eigenpairs of a number-conserving Hamiltonian, one entry per sector.
#[derive(Debug, Clone)]
pub struct Spectrum {
    basis: Arc<TruncatedBasis>,
    values: Vec<Vec<f64>>,
    vectors: Vec<Arc<Mat<f64>>>,
    skipped: usize,
}

impl Spectrum {
    /// Diagonalize every sector.
    pub fn compute(h: &SparseOperator) -> Result<Self> {
        Self::compute_with_cutoff(h, &[], 0.0)
    }

    /// Diagonalize sectors in increasing particle number, stopping once two
    /// consecutive sectors carry a relative Gibbs weight below `rel_cutoff`
    /// at every inverse temperature in `betas` and are decreasing there.
    /// Sectors past the stop are kept empty. `rel_cutoff <= 0` or an empty
    /// `betas` disables the cutoff.
    pub fn compute_with_cutoff(h: &SparseOperator, betas: &[f64], rel_cutoff: f64) -> Result<Self> {
        if !h.is_number_conserving() {
            return Err(Error::invalid(
                "Gibbs states need a number-conserving Hamiltonian",
            ));
        }
        let defect = h.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::invalid(format!(
                "Hamiltonian is not symmetric (defect {defect:e})"
            )));
        }
        let basis = h.basis().clone();
        let cutoff = rel_cutoff > 0.0 && !betas.is_empty();
        let log_cut = rel_cutoff.ln();
        let mut best = vec![f64::NEG_INFINITY; betas.len()];
        let mut prev: Option<Vec<f64>> = None;
        let mut quiet = 0;
        let mut values = Vec::with_capacity(basis.num_sectors());
        let mut vectors = Vec::with_capacity(basis.num_sectors());
        let mut skipped = 0;
        for (s, sector) in basis.sectors().iter().enumerate() {
            if quiet >= 2 {
                values.push(Vec::new());
                vectors.push(Arc::new(Mat::zeros(sector.dim(), 0)));
                skipped += 1;
                continue;
            }
            let block = h.dense_block(s).expect("diagonal block present");
            let eig = sym_eigen(block.as_ref())?;
            if cutoff {
                let lw: Vec<f64> = betas
                    .iter()
                    .map(|&b| log_sum_exp(eig.values.iter().map(|e| -b * e)))
                    .collect();
                let negligible = lw
                    .iter()
                    .zip(&best)
                    .zip(
                        prev.as_deref()
                            .unwrap_or(&[])
                            .iter()
                            .chain(std::iter::repeat(&f64::INFINITY)),
                    )
                    .all(|((&w, &m), &p)| w - m < log_cut && w < p);
                quiet = if negligible { quiet + 1 } else { 0 };
                for (m, &w) in best.iter_mut().zip(&lw) {
                    *m = m.max(w);
                }
                prev = Some(lw);
            }
            values.push(eig.values);
            vectors.push(Arc::new(eig.vectors));
        }
        Ok(Spectrum {
            basis,
            values,
            vectors,
            skipped,
        })
    }

    pub fn basis(&self) -> &Arc<TruncatedBasis> {
        &self.basis
    }

    pub fn sector_values(&self, sector: usize) -> &[f64] {
        &self.values[sector]
    }

    pub fn sector_vectors(&self, sector: usize) -> &Arc<Mat<f64>> {
        &self.vectors[sector]
    }

    /// Number of sectors left undiagonalized by the weight cutoff.
    pub fn skipped_sectors(&self) -> usize {
        self.skipped
    }

    pub fn ground_energy(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn log_partition(&self, beta: f64) -> f64 {
        log_sum_exp(self.values.iter().flatten().map(|e| -beta * e))
    }

    /// Normalized Boltzmann weights, shifted by the global ground energy.
    pub fn boltzmann_weights(&self, beta: f64) -> Vec<Vec<f64>> {
        let e0 = self.ground_energy();
        let mut w: Vec<Vec<f64>> = self
            .values
            .iter()
            .map(|v| v.iter().map(|e| (-beta * (e - e0)).exp()).collect())
            .collect();
        let z: f64 = w.iter().flatten().sum();
        w.iter_mut().flatten().for_each(|x| *x /= z);
        w
    }

    pub fn gibbs(&self, beta: f64) -> DensityMatrix {
        let blocks = self
            .boltzmann_weights(beta)
            .into_iter()
            .zip(&self.vectors)
            .map(|(w, v)| SpectralBlock::new(w, v.clone()))
            .collect();
        DensityMatrix {
            basis: self.basis.clone(),
            blocks,
        }
    }
}

/// `e^{-beta H} / tr e^{-beta H}` for a number-conserving Hamiltonian.
pub fn gibbs_state(h: &SparseOperator, beta: f64) -> Result<DensityMatrix> {
    check_beta(beta)?;
    Ok(Spectrum::compute(h)?.gibbs(beta))
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
    }
    Ok(())
}

pub fn entropy(rho: &DensityMatrix) -> f64 {
    rho.entropy()
}

fn check_same_space(a: &TruncatedBasis, b: &TruncatedBasis) -> Result<()> {
    if a.num_sites() != b.num_sites()
        || a.n_max() != b.n_max()
        || a.num_sectors() != b.num_sectors()
    {
        return Err(Error::invalid(
            "operands live on different truncated spaces",
        ));
    }
    Ok(())
}

/// `tr(O rho)`; zero for operators that change the particle number.
pub fn expectation(op: &SparseOperator, rho: &DensityMatrix) -> Result<f64> {
    check_same_space(op.basis(), rho.basis())?;
    if !op.is_number_conserving() {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    let mut col = Vec::new();
    for (s, block) in rho.blocks.iter().enumerate() {
        let Some(o) = op.block(s) else { continue };
        for c in block.active() {
            col.clear();
            col.extend(block.vectors.col(c).iter().copied());
            acc += block.weights[c] * o.quadratic_form(&col);
        }
    }
    Ok(acc)
}

/// Value of the free-energy functional at a given state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyValue {
    pub energy: f64,
    pub entropy: f64,
    pub beta: f64,
    pub value: f64,
}

pub fn free_energy(h: &SparseOperator, beta: f64, rho: &DensityMatrix) -> Result<FreeEnergyValue> {
    check_beta(beta)?;
    let energy = expectation(h, rho)?;
    let entropy = rho.entropy();
    Ok(FreeEnergyValue {
        energy,
        entropy,
        beta,
        value: energy - entropy / beta,
    })
}

/// Connected correlation `<M_A M_B> - <M_A><M_B>` for operators supported
/// on opposite sides of the cut.
pub fn truncated_correlation(
    m_a: &SparseOperator,
    m_b: &SparseOperator,
    rho: &DensityMatrix,
    bipartition: &crate::lattice::Bipartition,
) -> Result<f64> {
    use crate::lattice::Region;
    let inside = |op: &SparseOperator, region: Region| {
        op.support()
            .iter()
            .all(|&x| bipartition.region_of(x) == region)
    };
    if !inside(m_a, Region::A) {
        return Err(Error::invalid("first observable acts outside region A"));
    }
    if !inside(m_b, Region::B) {
        return Err(Error::invalid("second observable acts outside region B"));
    }
    let joint = expectation(&m_a.compose(m_b)?, rho)?;
    Ok(joint - expectation(m_a, rho)? * expectation(m_b, rho)?)
}

/// Trace norm `||rho - sigma||_1`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_space(&rho.basis, &sigma.basis)?;
    let mut total = 0.0;
    for (a, b) in rho.blocks.iter().zip(&sigma.blocks) {
        let diff = a.to_dense() - b.to_dense();
        total += linalg::sym_eigenvalues(diff.as_ref())?
            .iter()
            .map(|x| x.abs())
            .sum::<f64>();
    }
    Ok(total)
}

/// Random full-rank state: per sector the square of a symmetrized Gaussian
/// matrix, normalized over the whole space.
pub fn random_density_matrix(
    basis: &Arc<TruncatedBasis>,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    let mut dense: Vec<Mat<f64>> = basis
        .sector_dims()
        .into_iter()
        .map(|d| {
            let g = Mat::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = Mat::from_fn(d, d, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]));
            &x * &x
        })
        .collect();
    let total: f64 = dense.iter().map(|m| linalg::trace(m.as_ref())).sum();
    for m in &mut dense {
        *m = &*m * faer::Scale(1.0 / total);
    }
    DensityMatrix::from_dense_blocks(basis.clone(), dense)
}
