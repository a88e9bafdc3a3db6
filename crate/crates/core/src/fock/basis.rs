use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Largest sector dimension accepted unless the caller raises it.
pub const DEFAULT_DIM_GUARD: usize = 20_000;

/// Occupation-number basis with a per-site cutoff, split into sectors of
/// fixed total particle number.
///
/// Sector `N` lists every occupation vector with entries in `0..=n_max` and
/// coordinate sum `N`, in lexicographic order (site 0 most significant).
/// An optional `n_cap` removes the sectors above it.
#[derive(Debug, Clone)]
pub struct TruncatedBasis {
    sites: usize,
    n_max: usize,
    n_cap: Option<usize>,
    /// `counts[s][m]`: number of ways to place `m` particles on `s` sites.
    counts: Vec<Vec<usize>>,
    sectors: Vec<Sector>,
}

#[derive(Debug, Clone)]
pub struct Sector {
    particles: usize,
    sites: usize,
    occupations: Vec<u8>,
}

impl Sector {
    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.occupations.len().checked_div(self.sites).unwrap_or(1)
    }

    pub fn state(&self, index: usize) -> &[u8] {
        &self.occupations[index * self.sites..(index + 1) * self.sites]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u8]> + '_ {
        (0..self.dim()).map(move |i| self.state(i))
    }
}

impl TruncatedBasis {
    pub fn new(sites: usize, n_max: usize, n_cap: Option<usize>, dim_guard: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::invalid("n_max must be >= 1"));
        }
        if n_max > u8::MAX as usize {
            return Err(Error::invalid(format!(
                "n_max above {} is not supported",
                u8::MAX
            )));
        }
        let top = sites * n_max;
        let last = n_cap.map_or(top, |c| c.min(top));
        let counts = composition_counts(sites, n_max, top)?;
        for (particles, &dim) in counts[sites].iter().enumerate().take(last + 1) {
            if dim > dim_guard {
                return Err(Error::DimensionGuard {
                    particles,
                    dim,
                    limit: dim_guard,
                });
            }
        }
        let sectors = (0..=last)
            .map(|particles| {
                let mut occupations = Vec::with_capacity(counts[sites][particles] * sites);
                let mut current = vec![0u8; sites];
                enumerate(&mut current, 0, particles, n_max, &mut occupations);
                Sector {
                    particles,
                    sites,
                    occupations,
                }
            })
            .collect();
        Ok(TruncatedBasis {
            sites,
            n_max,
            n_cap,
            counts,
            sectors,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.sites
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_cap(&self) -> Option<usize> {
        self.n_cap
    }

    /// Sectors indexed by particle number.
    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector(&self, particles: usize) -> Option<&Sector> {
        self.sectors.get(particles)
    }

    pub fn num_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn sector_dims(&self) -> Vec<usize> {
        self.sectors.iter().map(Sector::dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.sectors.iter().map(Sector::dim).sum()
    }

    pub fn max_sector_dim(&self) -> usize {
        self.sectors.iter().map(Sector::dim).max().unwrap_or(0)
    }

    /// Rank of an occupation vector inside its sector.
    pub fn rank(&self, occ: &[u8]) -> Option<(usize, usize)> {
        if occ.len() != self.sites || occ.iter().any(|&n| n as usize > self.n_max) {
            return None;
        }
        let total: usize = occ.iter().map(|&n| n as usize).sum();
        if total >= self.sectors.len() {
            return None;
        }
        let mut rank = 0;
        let mut remaining = total;
        for (i, &n) in occ.iter().enumerate() {
            let rest = self.sites - i - 1;
            for v in 0..n as usize {
                rank += self.counts[rest][remaining - v];
            }
            remaining -= n as usize;
        }
        Some((total, rank))
    }
}

/// Build the basis for all sites of `lattice` with the default dimension guard.
pub fn build_basis(
    lattice: &LatticeSpec,
    n_max: usize,
    n_cap: Option<usize>,
) -> Result<TruncatedBasis> {
    TruncatedBasis::new(lattice.num_sites(), n_max, n_cap, DEFAULT_DIM_GUARD)
}

fn composition_counts(sites: usize, n_max: usize, top: usize) -> Result<Vec<Vec<usize>>> {
    let mut counts = vec![vec![0usize; top + 1]; sites + 1];
    counts[0][0] = 1;
    for s in 1..=sites {
        for m in 0..=top {
            let mut acc: usize = 0;
            for v in 0..=n_max.min(m) {
                acc = acc
                    .checked_add(counts[s - 1][m - v])
                    .ok_or_else(|| Error::invalid("basis size overflows usize"))?;
            }
            counts[s][m] = acc;
        }
    }
    Ok(counts)
}

fn enumerate(current: &mut [u8], pos: usize, remaining: usize, n_max: usize, out: &mut Vec<u8>) {
    let sites = current.len();
    if pos == sites {
        if remaining == 0 {
            out.extend_from_slice(current);
        }
        return;
    }
    let rest = sites - pos - 1;
    if remaining > n_max * (rest + 1) {
        return;
    }
    for v in 0..=n_max.min(remaining) {
        current[pos] = v as u8;
        enumerate(current, pos + 1, remaining - v, n_max, out);
    }
    current[pos] = 0;
}
