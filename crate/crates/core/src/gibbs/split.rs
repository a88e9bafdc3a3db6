use std::sync::Arc;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};

use super::{DensityMatrix, SpectralBlock};
use crate::error::{Error, Result};
use crate::fock::TruncatedBasis;
use crate::lattice::{Bipartition, Region};

/// Index maps between a global basis and the product of the two region
/// bases of a bipartition.
///
/// For global sector `N` and region-A particle number `N_A`, every pair of
/// region states `(i_a, i_b)` with `N_A + N_B = N` is a global state, so the
/// pair table is a dense `dim_A x dim_B` grid of global indices.
#[derive(Debug, Clone)]
pub struct Split {
    global: Arc<TruncatedBasis>,
    region_a: Arc<TruncatedBasis>,
    region_b: Arc<TruncatedBasis>,
    tables: Vec<Vec<PairTable>>,
}

#[derive(Debug, Clone)]
struct PairTable {
    n_a: usize,
    n_b: usize,
    dim_b: usize,
    /// Global index of `(i_a, i_b)` at `i_a * dim_b + i_b`.
    global: Vec<usize>,
}

impl Split {
    pub fn new(global: &Arc<TruncatedBasis>, bipartition: &Bipartition) -> Result<Self> {
        let (a_sites, b_sites) = (bipartition.a_sites(), bipartition.b_sites());
        if a_sites.len() + b_sites.len() != global.num_sites() {
            return Err(Error::invalid("bipartition does not match the basis"));
        }
        let region = |n: usize| {
            TruncatedBasis::new(n, global.n_max(), global.n_cap(), usize::MAX).map(Arc::new)
        };
        let region_a = region(a_sites.len())?;
        let region_b = region(b_sites.len())?;
        let mut occ_a = vec![0u8; a_sites.len()];
        let mut occ_b = vec![0u8; b_sites.len()];
        let tables = global
            .sectors()
            .iter()
            .map(|sector| {
                let n = sector.particles();
                let mut tables: Vec<PairTable> = (0..=n)
                    .filter(|&n_a| n_a < region_a.num_sectors() && n - n_a < region_b.num_sectors())
                    .map(|n_a| {
                        let (da, db) = (
                            region_a.sectors()[n_a].dim(),
                            region_b.sectors()[n - n_a].dim(),
                        );
                        PairTable {
                            n_a,
                            n_b: n - n_a,
                            dim_b: db,
                            global: vec![usize::MAX; da * db],
                        }
                    })
                    .filter(|t| !t.global.is_empty())
                    .collect();
                for (j, occ) in sector.states().enumerate() {
                    for (o, &x) in occ_a.iter_mut().zip(a_sites) {
                        *o = occ[x];
                    }
                    for (o, &x) in occ_b.iter_mut().zip(b_sites) {
                        *o = occ[x];
                    }
                    let (n_a, ia) = region_a.rank(&occ_a).expect("region state in basis");
                    let (_, ib) = region_b.rank(&occ_b).expect("region state in basis");
                    let t = tables
                        .iter_mut()
                        .find(|t| t.n_a == n_a)
                        .expect("pair table");
                    t.global[ia * t.dim_b + ib] = j;
                }
                debug_assert!(tables
                    .iter()
                    .all(|t| t.global.iter().all(|&j| j != usize::MAX)));
                tables
            })
            .collect();
        Ok(Split {
            global: global.clone(),
            region_a,
            region_b,
            tables,
        })
    }

    pub fn region_basis(&self, region: Region) -> &Arc<TruncatedBasis> {
        match region {
            Region::A => &self.region_a,
            Region::B => &self.region_b,
        }
    }

    /// Reduced state on one side of the cut.
    pub fn partial_trace(&self, rho: &DensityMatrix, keep: Region) -> Result<DensityMatrix> {
        self.check(rho)?;
        let kept = self.region_basis(keep).clone();
        let mut dense: Vec<Mat<f64>> = kept
            .sector_dims()
            .into_iter()
            .map(|d| Mat::zeros(d, d))
            .collect();
        for (s, block) in rho.blocks().iter().enumerate() {
            let active: Vec<usize> = block.active().collect();
            if active.is_empty() {
                continue;
            }
            let k = active.len();
            let amp: Vec<f64> = active.iter().map(|&c| block.weights()[c].sqrt()).collect();
            let v = block.vectors();
            for t in &self.tables[s] {
                let dim_a = t.global.len() / t.dim_b;
                let (rows, others, target) = match keep {
                    Region::A => (dim_a, t.dim_b, t.n_a),
                    Region::B => (t.dim_b, dim_a, t.n_b),
                };
                // m[r, o * k + c] = sqrt(w_c) v_c(global(r, o))
                let m = Mat::from_fn(rows, others * k, |r, col| {
                    let (o, c) = (col / k, col % k);
                    let (ia, ib) = match keep {
                        Region::A => (r, o),
                        Region::B => (o, r),
                    };
                    amp[c] * v[(t.global[ia * t.dim_b + ib], active[c])]
                });
                matmul(
                    dense[target].as_mut(),
                    Accum::Add,
                    m.as_ref(),
                    m.transpose(),
                    1.0,
                    Par::Seq,
                );
            }
        }
        DensityMatrix::from_dense_blocks(kept, dense)
    }

    /// `rho_A (x) rho_B` on the global basis. Fails if a particle-number cap
    /// would discard weight of the product.
    pub fn tensor_product(
        &self,
        rho_a: &DensityMatrix,
        rho_b: &DensityMatrix,
    ) -> Result<DensityMatrix> {
        for (rho, basis) in [(rho_a, &self.region_a), (rho_b, &self.region_b)] {
            if rho.basis().num_sites() != basis.num_sites()
                || rho.blocks().len() != basis.num_sectors()
            {
                return Err(Error::invalid("factor does not live on the region basis"));
            }
        }
        let wa = rho_a.sector_weights();
        let wb = rho_b.sector_weights();
        let mut leaked = 0.0;
        for (na, x) in wa.iter().enumerate() {
            for (nb, y) in wb.iter().enumerate() {
                if na + nb >= self.global.num_sectors() {
                    leaked += x * y;
                }
            }
        }
        if leaked > 1e-12 {
            return Err(Error::invalid(format!(
                "product state puts weight {leaked:e} above the particle-number cap"
            )));
        }
        let blocks = self
            .global
            .sectors()
            .iter()
            .enumerate()
            .map(|(s, sector)| {
                let mut weights = Vec::new();
                let mut columns: Vec<(usize, usize, usize)> = Vec::new();
                for (ti, t) in self.tables[s].iter().enumerate() {
                    let (ba, bb) = (rho_a.block(t.n_a), rho_b.block(t.n_b));
                    for ca in 0..ba.weights().len() {
                        for cb in 0..bb.weights().len() {
                            weights.push(ba.weights()[ca] * bb.weights()[cb]);
                            columns.push((ti, ca, cb));
                        }
                    }
                }
                let mut v = Mat::zeros(sector.dim(), columns.len());
                for (col, &(ti, ca, cb)) in columns.iter().enumerate() {
                    let t = &self.tables[s][ti];
                    let (va, vb) = (rho_a.block(t.n_a).vectors(), rho_b.block(t.n_b).vectors());
                    for ia in 0..va.nrows() {
                        for ib in 0..t.dim_b {
                            v[(t.global[ia * t.dim_b + ib], col)] = va[(ia, ca)] * vb[(ib, cb)];
                        }
                    }
                }
                SpectralBlock::new(weights, Arc::new(v))
            })
            .collect();
        DensityMatrix::from_blocks(self.global.clone(), blocks)
    }

    /// `S(rho_A) + S(rho_B) - S(rho_AB)`.
    pub fn mutual_information(&self, rho: &DensityMatrix) -> Result<f64> {
        let sa = self.partial_trace(rho, Region::A)?.entropy();
        let sb = self.partial_trace(rho, Region::B)?.entropy();
        Ok(sa + sb - rho.entropy())
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        let b = rho.basis();
        if b.num_sites() != self.global.num_sites()
            || b.n_max() != self.global.n_max()
            || b.num_sectors() != self.global.num_sectors()
        {
            return Err(Error::invalid("state does not live on the split basis"));
        }
        Ok(())
    }
}

pub fn partial_trace(
    rho: &DensityMatrix,
    bipartition: &Bipartition,
    keep: Region,
) -> Result<DensityMatrix> {
    Split::new(rho.basis(), bipartition)?.partial_trace(rho, keep)
}

pub fn mutual_information(rho: &DensityMatrix, bipartition: &Bipartition) -> Result<f64> {
    Split::new(rho.basis(), bipartition)?.mutual_information(rho)
}

pub fn tensor_product(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    global: &Arc<TruncatedBasis>,
    bipartition: &Bipartition,
) -> Result<DensityMatrix> {
    Split::new(global, bipartition)?.tensor_product(rho_a, rho_b)
}
