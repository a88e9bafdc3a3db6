//! Periodic hypercubic boxes, slab bipartitions and the one-particle
//! discrete Laplacian.
//!
//! Sites are indexed lexicographically by their coordinates in
//! `{0, .., L-1}^d`, the first axis being the most significant digit. Bonds
//! are unordered nearest-neighbour pairs under periodic wrap. For `L = 2`
//! the two wrapped neighbours along an axis coincide and the duplicate bond
//! is dropped, so the graph Laplacian `deg * I - A` of that box is half of
//! the textbook periodic Laplacian.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use faer::Mat;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    dim: usize,
    side: usize,
    bonds: Vec<(usize, usize)>,
}

impl LatticeSpec {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::invalid(format!("dimension must be >= 1, got {dim}")));
        }
        if side < 2 {
            return Err(Error::invalid(format!(
                "side length must be >= 2, got {side}"
            )));
        }
        let num_sites = side
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::invalid("lattice too large"))?;
        let mut lattice = LatticeSpec {
            dim,
            side,
            bonds: Vec::new(),
        };
        let mut set = BTreeSet::new();
        for site in 0..num_sites {
            for axis in 0..dim {
                let other = lattice.shift(site, axis, 1);
                set.insert((site.min(other), site.max(other)));
            }
        }
        lattice.bonds = set.into_iter().collect();
        Ok(lattice)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn num_sites(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// Unordered nearest-neighbour pairs `(x, y)` with `x < y`.
    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    /// Number of distinct neighbours of every site: `2d` for `L >= 3`, `d` for `L = 2`.
    pub fn degree(&self) -> usize {
        if self.side == 2 {
            self.dim
        } else {
            2 * self.dim
        }
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        let mut rest = site;
        for axis in (0..self.dim).rev() {
            c[axis] = rest % self.side;
            rest /= self.side;
        }
        c
    }

    pub fn site_index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .fold(0, |acc, &c| acc * self.side + c % self.side)
    }

    /// The site reached from `site` by `steps` lattice spacings along `axis`, with wrap.
    pub fn shift(&self, site: usize, axis: usize, steps: usize) -> usize {
        let mut c = self.coords(site);
        c[axis] = (c[axis] + steps) % self.side;
        self.site_index(&c)
    }

    /// Site permutation of a translation by `steps` along `axis`.
    pub fn translation(&self, axis: usize, steps: usize) -> Vec<usize> {
        (0..self.num_sites())
            .map(|x| self.shift(x, axis, steps))
            .collect()
    }

    /// Slab split along the first axis: `A` holds the sites whose first
    /// coordinate is below `width`.
    pub fn bipartition(&self, width: usize) -> Result<Bipartition> {
        if width < 1 || width >= self.side {
            return Err(Error::invalid(format!(
                "slab width must lie in 1..={}, got {width}",
                self.side - 1
            )));
        }
        let in_a: Vec<bool> = (0..self.num_sites())
            .map(|x| self.coords(x)[0] < width)
            .collect();
        let a_sites = (0..self.num_sites()).filter(|&x| in_a[x]).collect();
        let b_sites = (0..self.num_sites()).filter(|&x| !in_a[x]).collect();
        let mut boundary = Vec::new();
        let mut internal_a = Vec::new();
        let mut internal_b = Vec::new();
        for &(x, y) in &self.bonds {
            match (in_a[x], in_a[y]) {
                (true, true) => internal_a.push((x, y)),
                (false, false) => internal_b.push((x, y)),
                // orient boundary bonds as (A site, B site)
                (true, false) => boundary.push((x, y)),
                (false, true) => boundary.push((y, x)),
            }
        }
        Ok(Bipartition {
            width,
            in_a,
            a_sites,
            b_sites,
            boundary_bonds: boundary,
            internal_a,
            internal_b,
        })
    }
}

/// Which half of a bipartition a reduced state lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    A,
    B,
}

#[derive(Debug, Clone)]
pub struct Bipartition {
    width: usize,
    in_a: Vec<bool>,
    a_sites: Vec<usize>,
    b_sites: Vec<usize>,
    boundary_bonds: Vec<(usize, usize)>,
    internal_a: Vec<(usize, usize)>,
    internal_b: Vec<(usize, usize)>,
}

impl Bipartition {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn a_sites(&self) -> &[usize] {
        &self.a_sites
    }

    pub fn b_sites(&self) -> &[usize] {
        &self.b_sites
    }

    pub fn sites(&self, region: Region) -> &[usize] {
        match region {
            Region::A => &self.a_sites,
            Region::B => &self.b_sites,
        }
    }

    pub fn region_of(&self, site: usize) -> Region {
        if self.in_a[site] {
            Region::A
        } else {
            Region::B
        }
    }

    /// Bonds crossing the cut, oriented as `(site in A, site in B)`.
    pub fn boundary_bonds(&self) -> &[(usize, usize)] {
        &self.boundary_bonds
    }

    pub fn internal_bonds(&self, region: Region) -> &[(usize, usize)] {
        match region {
            Region::A => &self.internal_a,
            Region::B => &self.internal_b,
        }
    }
}

/// Closed-form eigenpairs of the periodic chain Laplacian.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    side: usize,
    /// `eigenvalues[i]` is the eigenvalue carried by `eigenvectors[i]`; entry
    /// `i` corresponds to the one-based label `i + 1`.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SpectrumTable {
    pub fn side(&self) -> usize {
        self.side
    }

    /// Distinct eigenvalues with multiplicities, ascending.
    pub fn multiplicities(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut sorted = self.eigenvalues.clone();
        sorted.sort_by(f64::total_cmp);
        group_multiplicities(&sorted, tol)
    }
}

pub(crate) fn group_multiplicities(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in sorted {
        match out.last_mut() {
            Some(last) if (v - last.0).abs() < tol => last.1 += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Eigenpairs of the chain Laplacian with periodic wrap.
///
/// Labels follow the pairing `λ_1 = 0`, `λ_{2k} = λ_{2k+1} = 4 sin²(kπ/L)`
/// with sine/cosine eigenvectors for `k = 1..⌊(L-1)/2⌋`; for even `L` the
/// last label carries `λ_L = 4` with the alternating vector. The two-site
/// ring has a single deduplicated bond, so its spectrum is `{0, 2}`.
pub fn chain_spectrum(side: usize) -> Result<SpectrumTable> {
    if side < 2 {
        return Err(Error::invalid(format!(
            "side length must be >= 2, got {side}"
        )));
    }
    let l = side as f64;
    let mut eigenvalues = vec![0.0; side];
    let mut eigenvectors = vec![vec![l.powf(-0.5); side]; side];
    let alternating: Vec<f64> = (1..=side)
        .map(|i| l.powf(-0.5) * if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    if side == 2 {
        eigenvalues[1] = 2.0;
        eigenvectors[1] = alternating;
        return Ok(SpectrumTable {
            side,
            eigenvalues,
            eigenvectors,
        });
    }
    let norm = (2.0 / l).sqrt();
    for k in 1..=(side - 1) / 2 {
        let lambda = 4.0 * (k as f64 * PI / l).sin().powi(2);
        let phase = |i: usize| PI * k as f64 * (2 * i - 1) as f64 / l;
        // labels 2k and 2k+1 sit at zero-based slots 2k-1 and 2k
        eigenvalues[2 * k - 1] = lambda;
        eigenvectors[2 * k - 1] = (1..=side).map(|i| norm * phase(i).sin()).collect();
        eigenvalues[2 * k] = lambda;
        eigenvectors[2 * k] = (1..=side).map(|i| norm * phase(i).cos()).collect();
    }
    if side % 2 == 0 {
        eigenvalues[side - 1] = 4.0;
        eigenvectors[side - 1] = alternating;
    }
    Ok(SpectrumTable {
        side,
        eigenvalues,
        eigenvectors,
    })
}

/// All eigenvalues of the `d`-dimensional box Laplacian as sums of chain
/// eigenvalues, ascending.
pub fn box_spectrum(dim: usize, side: usize) -> Result<Vec<f64>> {
    let chain = chain_spectrum(side)?;
    let mut sums = vec![0.0];
    for _ in 0..dim {
        sums = sums
            .iter()
            .flat_map(|s| chain.eigenvalues.iter().map(move |l| s + l))
            .collect();
    }
    sums.sort_by(f64::total_cmp);
    Ok(sums)
}

/// Dense graph Laplacian `deg * I - A` of the box.
pub fn laplacian_matrix(lattice: &LatticeSpec) -> Mat<f64> {
    let n = lattice.num_sites();
    let mut m = Mat::zeros(n, n);
    for &(x, y) in lattice.bonds() {
        m[(x, y)] -= 1.0;
        m[(y, x)] -= 1.0;
        m[(x, x)] += 1.0;
        m[(y, y)] += 1.0;
    }
    m
}
