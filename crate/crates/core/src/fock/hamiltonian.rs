use std::sync::Arc;

use super::basis::TruncatedBasis;
use super::operator::{target_of, CsrBlock, SparseOperator};
use crate::error::{Error, Result};
use crate::lattice::{Bipartition, LatticeSpec, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteOperatorKind {
    Annihilate,
    Create,
    Number,
}

/// `a_x`, `a_x^dagger` or `n_x` on the truncated space. Creation on a site
/// already holding `n_max` bosons gives zero, so `create * annihilate`
/// equals `number` exactly.
pub fn site_operator(
    basis: &Arc<TruncatedBasis>,
    site: usize,
    kind: SiteOperatorKind,
) -> Result<SparseOperator> {
    if site >= basis.num_sites() {
        return Err(Error::invalid(format!(
            "site {site} outside a basis of {} sites",
            basis.num_sites()
        )));
    }
    let n_max = basis.n_max() as u8;
    let shift: isize = match kind {
        SiteOperatorKind::Annihilate => -1,
        SiteOperatorKind::Create => 1,
        SiteOperatorKind::Number => 0,
    };
    let sectors = basis.sectors();
    let mut scratch = vec![0u8; basis.num_sites()];
    let blocks = sectors
        .iter()
        .enumerate()
        .map(|(s, sector)| {
            let t = target_of(s, shift, sectors.len())?;
            let mut triplets = Vec::new();
            for (j, occ) in sector.states().enumerate() {
                let n = occ[site];
                match kind {
                    SiteOperatorKind::Number => {
                        if n > 0 {
                            triplets.push((j, j, n as f64));
                        }
                    }
                    SiteOperatorKind::Annihilate | SiteOperatorKind::Create => {
                        let (new, amp) = if kind == SiteOperatorKind::Annihilate {
                            if n == 0 {
                                continue;
                            }
                            (n - 1, n)
                        } else {
                            if n == n_max {
                                continue;
                            }
                            (n + 1, n + 1)
                        };
                        scratch.copy_from_slice(occ);
                        scratch[site] = new;
                        let (_, i) = basis.rank(&scratch).expect("neighbour state inside basis");
                        triplets.push((i, j, (amp as f64).sqrt()));
                    }
                }
            }
            Some(CsrBlock::from_triplets(
                sectors[t].dim(),
                sector.dim(),
                triplets,
            ))
        })
        .collect();
    Ok(SparseOperator::from_blocks(
        basis.clone(),
        shift,
        blocks,
        vec![site],
    ))
}

/// Total particle number.
pub fn number_operator(basis: &Arc<TruncatedBasis>) -> SparseOperator {
    let sites = basis.num_sites();
    let terms = Terms {
        number: vec![1.0; sites],
        ..Terms::new(sites)
    };
    terms.assemble(basis)
}

/// On-site interaction `W = (U/2) sum_x n_x (n_x - 1)`.
pub fn interaction_operator(basis: &Arc<TruncatedBasis>, u: f64) -> SparseOperator {
    let sites = basis.num_sites();
    let terms = Terms {
        pair: vec![u / 2.0; sites],
        ..Terms::new(sites)
    };
    terms.assemble(basis)
}

/// Bose-Hubbard Hamiltonian `-J sum_{x~y} (a_x^dag a_y + h.c.) + W - mu N`.
pub fn assemble_bose_hubbard(
    basis: &Arc<TruncatedBasis>,
    lattice: &LatticeSpec,
    j: f64,
    u: f64,
    mu: f64,
) -> Result<SparseOperator> {
    check_lattice(basis, lattice)?;
    check_couplings(j, u, mu)?;
    let mut terms = Terms::new(lattice.num_sites());
    terms.add_bonds(lattice.bonds(), j);
    terms.add_onsite(0..lattice.num_sites(), u, mu);
    Ok(terms.assemble(basis))
}

/// Region and boundary parts of the Bose-Hubbard Hamiltonian.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub h_a: SparseOperator,
    pub h_b: SparseOperator,
    pub h_boundary: SparseOperator,
}

impl Decomposition {
    pub fn total(&self) -> Result<SparseOperator> {
        self.h_a.add(&self.h_b)?.add(&self.h_boundary)
    }
}

pub fn assemble_decomposition(
    basis: &Arc<TruncatedBasis>,
    lattice: &LatticeSpec,
    bipartition: &Bipartition,
    j: f64,
    u: f64,
    mu: f64,
) -> Result<Decomposition> {
    check_lattice(basis, lattice)?;
    check_couplings(j, u, mu)?;
    let region = |r: Region| {
        let mut terms = Terms::new(lattice.num_sites());
        terms.add_bonds(bipartition.internal_bonds(r), j);
        terms.add_onsite(bipartition.sites(r).iter().copied(), u, mu);
        terms.support = bipartition.sites(r).to_vec();
        terms.assemble(basis)
    };
    let mut boundary = Terms::new(lattice.num_sites());
    boundary.add_bonds(bipartition.boundary_bonds(), j);
    Ok(Decomposition {
        h_a: region(Region::A),
        h_b: region(Region::B),
        h_boundary: boundary.assemble(basis),
    })
}

/// Shifted kinetic term `H_0 = -J sum_{x~y} (a_x^dag a_y + h.c.) + deg J N`,
/// whose one-particle block is `J` times the graph Laplacian.
pub fn assemble_kinetic(
    basis: &Arc<TruncatedBasis>,
    lattice: &LatticeSpec,
    j: f64,
) -> Result<SparseOperator> {
    check_lattice(basis, lattice)?;
    if !(j >= 0.0 && j.is_finite()) {
        return Err(Error::invalid(format!(
            "hopping J must be finite and >= 0, got {j}"
        )));
    }
    let mut terms = Terms::new(lattice.num_sites());
    terms.add_bonds(lattice.bonds(), j);
    terms.number = vec![lattice.degree() as f64 * j; lattice.num_sites()];
    Ok(terms.assemble(basis))
}

/// Free reference Hamiltonian `H_0 + gamma N`.
pub fn assemble_free(
    basis: &Arc<TruncatedBasis>,
    lattice: &LatticeSpec,
    j: f64,
    gamma: f64,
) -> Result<SparseOperator> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be > 0, got {gamma}")));
    }
    let mut h = assemble_kinetic(basis, lattice, j)?;
    let n = number_operator(basis);
    h = h.linear_combination(1.0, &n, gamma)?;
    Ok(h)
}

fn check_lattice(basis: &TruncatedBasis, lattice: &LatticeSpec) -> Result<()> {
    if basis.num_sites() != lattice.num_sites() {
        return Err(Error::invalid(format!(
            "basis has {} sites but the lattice has {}",
            basis.num_sites(),
            lattice.num_sites()
        )));
    }
    Ok(())
}

fn check_couplings(j: f64, u: f64, mu: f64) -> Result<()> {
    if j < 0.0 {
        return Err(Error::invalid(format!(
            "J = {j} < 0 is not supported; for even L the sign can be flipped by the gauge \
             transformation a_x -> -a_x on one sublattice"
        )));
    }
    if !j.is_finite() {
        return Err(Error::invalid("J must be finite"));
    }
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::invalid(format!("U must be > 0, got {u}")));
    }
    if !mu.is_finite() {
        return Err(Error::invalid("mu must be finite"));
    }
    Ok(())
}

/// Number-conserving terms: hops `c a_x^dag a_y` plus on-site
/// `number[x] n_x + pair[x] n_x (n_x - 1)`.
struct Terms {
    hops: Vec<(usize, usize, f64)>,
    number: Vec<f64>,
    pair: Vec<f64>,
    support: Vec<usize>,
}

impl Terms {
    fn new(sites: usize) -> Self {
        Terms {
            hops: Vec::new(),
            number: vec![0.0; sites],
            pair: vec![0.0; sites],
            support: Vec::new(),
        }
    }

    fn add_bonds(&mut self, bonds: &[(usize, usize)], j: f64) {
        if j == 0.0 {
            return;
        }
        for &(x, y) in bonds {
            self.hops.push((x, y, -j));
            self.hops.push((y, x, -j));
        }
    }

    fn add_onsite(&mut self, sites: impl Iterator<Item = usize>, u: f64, mu: f64) {
        for x in sites {
            self.pair[x] += u / 2.0;
            self.number[x] -= mu;
        }
    }

    fn assemble(&self, basis: &Arc<TruncatedBasis>) -> SparseOperator {
        let n_max = basis.n_max() as u8;
        let mut scratch = vec![0u8; basis.num_sites()];
        let blocks = basis
            .sectors()
            .iter()
            .map(|sector| {
                let mut triplets = Vec::new();
                for (j, occ) in sector.states().enumerate() {
                    let diag: f64 = occ
                        .iter()
                        .enumerate()
                        .map(|(x, &n)| {
                            let n = n as f64;
                            self.number[x] * n + self.pair[x] * n * (n - 1.0)
                        })
                        .sum();
                    if diag != 0.0 {
                        triplets.push((j, j, diag));
                    }
                    for &(x, y, c) in &self.hops {
                        let (nx, ny) = (occ[x], occ[y]);
                        if ny == 0 || nx == n_max {
                            continue;
                        }
                        scratch.copy_from_slice(occ);
                        scratch[x] += 1;
                        scratch[y] -= 1;
                        let (_, i) = basis.rank(&scratch).expect("hop stays inside the sector");
                        let amp = ((nx as u32 + 1) * ny as u32) as f64;
                        triplets.push((i, j, c * amp.sqrt()));
                    }
                }
                Some(CsrBlock::from_triplets(
                    sector.dim(),
                    sector.dim(),
                    triplets,
                ))
            })
            .collect();
        let mut support = self.support.clone();
        for &(x, y, _) in &self.hops {
            support.extend([x, y]);
        }
        for x in 0..self.number.len() {
            if self.number[x] != 0.0 || self.pair[x] != 0.0 {
                support.push(x);
            }
        }
        SparseOperator::from_blocks(basis.clone(), 0, blocks, support)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::laplacian_matrix;
    use crate::linalg::sym_eigenvalues;

    fn basis(sites: usize, n_max: usize) -> Arc<TruncatedBasis> {
        Arc::new(TruncatedBasis::new(sites, n_max, None, 100_000).unwrap())
    }

    #[test]
    fn site_operators_on_single_site() {
        let b = basis(1, 3);
        let n = site_operator(&b, 0, SiteOperatorKind::Number).unwrap();
        assert_eq!(n.block(2).unwrap().get(0, 0), 2.0);
        let a = site_operator(&b, 0, SiteOperatorKind::Annihilate).unwrap();
        assert!(a.block(0).is_none());
        assert!((a.block(2).unwrap().get(0, 0) - 2f64.sqrt()).abs() < 1e-15);
        let c = site_operator(&b, 0, SiteOperatorKind::Create).unwrap();
        assert!(c.block(3).is_none());
        let cn = c.compose(&a).unwrap();
        let diff = cn.linear_combination(1.0, &n, -1.0).unwrap();
        assert!(diff.max_abs() < 1e-14);
    }

    #[test]
    fn adjoint_of_annihilation_is_creation() {
        let b = basis(3, 2);
        for x in 0..3 {
            let a = site_operator(&b, x, SiteOperatorKind::Annihilate).unwrap();
            let c = site_operator(&b, x, SiteOperatorKind::Create).unwrap();
            let diff = a.adjoint().linear_combination(1.0, &c, -1.0).unwrap();
            assert_eq!(diff.max_abs(), 0.0);
        }
    }

    #[test]
    fn single_site_interaction() {
        let lat_b = basis(1, 2);
        let w = interaction_operator(&lat_b, 2.0);
        let d: Vec<f64> = (0..3).map(|s| w.block(s).unwrap().get(0, 0)).collect();
        assert_eq!(d, vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn two_site_hopping_sector() {
        let lat = LatticeSpec::new(1, 2).unwrap();
        let b = basis(2, 1);
        let h = assemble_bose_hubbard(&b, &lat, 1.0, 1.0, 0.0).unwrap();
        let ev = sym_eigenvalues(h.dense_block(1).unwrap().as_ref()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_negative_hopping() {
        let lat = LatticeSpec::new(1, 4).unwrap();
        let b = basis(4, 1);
        let err = assemble_bose_hubbard(&b, &lat, -1.0, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("a_x -> -a_x"));
        assert!(assemble_bose_hubbard(&b, &lat, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn decomposition_sums_to_hamiltonian() {
        let lat = LatticeSpec::new(1, 4).unwrap();
        let bip = lat.bipartition(2).unwrap();
        let b = basis(4, 2);
        let h = assemble_bose_hubbard(&b, &lat, 0.7, 1.3, 0.4).unwrap();
        let dec = assemble_decomposition(&b, &lat, &bip, 0.7, 1.3, 0.4).unwrap();
        let diff = dec
            .total()
            .unwrap()
            .linear_combination(1.0, &h, -1.0)
            .unwrap();
        assert!(diff.max_abs() < 1e-14);
        assert_eq!(dec.h_a.support(), bip.a_sites());
        assert_eq!(dec.h_b.support(), bip.b_sites());
        // two boundary bonds, each contributing both hopping directions
        let n1 = dec.h_boundary.block(1).unwrap().nnz();
        assert_eq!(n1, 4);
    }

    #[test]
    fn zero_hopping_has_no_boundary() {
        let lat = LatticeSpec::new(1, 4).unwrap();
        let bip = lat.bipartition(2).unwrap();
        let b = basis(4, 2);
        let dec = assemble_decomposition(&b, &lat, &bip, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(dec.h_boundary.nnz(), 0);
        let h = assemble_bose_hubbard(&b, &lat, 0.0, 1.0, 1.0).unwrap();
        for s in 0..b.num_sectors() {
            let blk = h.block(s).unwrap();
            assert_eq!(
                blk.nnz(),
                blk.diagonal().iter().filter(|v| **v != 0.0).count()
            );
        }
    }

    #[test]
    fn free_one_particle_block_is_shifted_laplacian() {
        for (d, l) in [(1, 4), (1, 2), (2, 3)] {
            let lat = LatticeSpec::new(d, l).unwrap();
            let b = basis(lat.num_sites(), 2);
            let h = assemble_free(&b, &lat, 1.3, 0.5).unwrap();
            let one = h.dense_block(1).unwrap();
            let lap = laplacian_matrix(&lat);
            let n = lat.num_sites();
            // the one-particle basis |e_x> is ordered with site 0 last
            for x in 0..n {
                for y in 0..n {
                    let expected = 1.3 * lap[(x, y)] + if x == y { 0.5 } else { 0.0 };
                    assert!((one[(n - 1 - x, n - 1 - y)] - expected).abs() < 1e-12);
                }
            }
            assert_eq!(h.block(0).unwrap().nnz(), 0);
        }
        let lat = LatticeSpec::new(1, 4).unwrap();
        let b = basis(4, 2);
        let h = assemble_free(&b, &lat, 1.0, 0.5).unwrap();
        let ev = sym_eigenvalues(h.dense_block(1).unwrap().as_ref()).unwrap();
        for (got, want) in ev.iter().zip([0.5, 2.5, 2.5, 4.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(assemble_free(&b, &lat, 1.0, 0.0).is_err());
    }

    #[test]
    fn free_hamiltonian_without_hopping_is_number() {
        let lat = LatticeSpec::new(1, 3).unwrap();
        let b = basis(3, 2);
        let h = assemble_free(&b, &lat, 0.0, 0.7).unwrap();
        let n = number_operator(&b);
        assert!(h.linear_combination(1.0, &n, -0.7).unwrap().max_abs() < 1e-15);
    }
}
