//! Dense, unblocked reference implementation on the full product space
//! `{0..n_max}^sites`, written independently of the library's sector code.

#![allow(dead_code)]

use faer::{Mat, Side};

pub struct DenseFock {
    pub sites: usize,
    pub n_max: usize,
    pub dim: usize,
}

impl DenseFock {
    pub fn new(sites: usize, n_max: usize) -> Self {
        DenseFock {
            sites,
            n_max,
            dim: (n_max + 1).pow(sites as u32),
        }
    }

    /// Mixed-radix digits, site 0 least significant.
    pub fn occupation(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        (0..self.sites)
            .map(|_| {
                let n = rest % (self.n_max + 1);
                rest /= self.n_max + 1;
                n
            })
            .collect()
    }

    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter()
            .rev()
            .fold(0, |acc, &n| acc * (self.n_max + 1) + n)
    }

    /// `-J Σ (a_x^dag a_y + h.c.) + Σ (U/2) n(n-1) - μ n`.
    pub fn bose_hubbard(&self, bonds: &[(usize, usize)], j: f64, u: f64, mu: f64) -> Mat<f64> {
        let mut h = Mat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            let occ = self.occupation(i);
            h[(i, i)] = occ
                .iter()
                .map(|&n| 0.5 * u * (n * n.saturating_sub(1)) as f64 - mu * n as f64)
                .sum();
            for &(x, y) in bonds {
                for (to, from) in [(x, y), (y, x)] {
                    if occ[from] > 0 && occ[to] < self.n_max {
                        let mut next = occ.clone();
                        next[from] -= 1;
                        next[to] += 1;
                        let amp = (((occ[to] + 1) * occ[from]) as f64).sqrt();
                        h[(self.index(&next), i)] -= j * amp;
                    }
                }
            }
        }
        h
    }

    /// Diagonal operator from a function of the occupation vector.
    pub fn diagonal(&self, f: impl Fn(&[usize]) -> f64) -> Mat<f64> {
        Mat::from_fn(self.dim, self.dim, |i, k| {
            if i == k {
                f(&self.occupation(i))
            } else {
                0.0
            }
        })
    }

    /// `a_x^dag a_y`.
    pub fn hop(&self, x: usize, y: usize) -> Mat<f64> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            let occ = self.occupation(i);
            if x == y {
                m[(i, i)] = occ[x] as f64;
            } else if occ[y] > 0 && occ[x] < self.n_max {
                let mut next = occ.clone();
                next[y] -= 1;
                next[x] += 1;
                m[(self.index(&next), i)] = (((occ[x] + 1) * occ[y]) as f64).sqrt();
            }
        }
        m
    }

    /// Reduced state on `keep`, traced over the other sites.
    pub fn partial_trace(&self, rho: &Mat<f64>, keep: &[usize]) -> Mat<f64> {
        let traced: Vec<usize> = (0..self.sites).filter(|s| !keep.contains(s)).collect();
        let sub = DenseFock::new(keep.len(), self.n_max);
        let project =
            |occ: &[usize], sites: &[usize]| sites.iter().map(|&s| occ[s]).collect::<Vec<_>>();
        let labels: Vec<(usize, Vec<usize>)> = (0..self.dim)
            .map(|i| {
                let occ = self.occupation(i);
                (sub.index(&project(&occ, keep)), project(&occ, &traced))
            })
            .collect();
        let mut out = Mat::zeros(sub.dim, sub.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                if labels[i].1 == labels[k].1 {
                    out[(labels[i].0, labels[k].0)] += rho[(i, k)];
                }
            }
        }
        out
    }
}

/// Nearest-neighbour bonds of a periodic ring, each unordered pair once.
pub fn ring_bonds(side: usize) -> Vec<(usize, usize)> {
    let mut bonds: Vec<(usize, usize)> = (0..side)
        .map(|x| {
            let y = (x + 1) % side;
            (x.min(y), x.max(y))
        })
        .collect();
    bonds.sort();
    bonds.dedup();
    bonds
}

pub fn eigen(m: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .expect("eigendecomposition");
    let values = (0..m.nrows()).map(|i| e.S()[i]).collect();
    (values, e.U().to_owned())
}

pub fn eigenvalues(m: &Mat<f64>) -> Vec<f64> {
    let mut v = eigen(m).0;
    v.sort_by(f64::total_cmp);
    v
}

/// Applies `f` to the spectrum of a symmetric matrix.
pub fn matrix_function(m: &Mat<f64>, f: impl Fn(f64) -> f64) -> Mat<f64> {
    let (values, u) = eigen(m);
    let n = m.nrows();
    Mat::from_fn(n, n, |i, k| {
        (0..n).map(|c| u[(i, c)] * f(values[c]) * u[(k, c)]).sum()
    })
}

pub fn gibbs(h: &Mat<f64>, beta: f64) -> Mat<f64> {
    let e0 = eigenvalues(h)[0];
    let unnormalized = matrix_function(h, |e| (-beta * (e - e0)).exp());
    let z = trace(&unnormalized);
    Mat::from_fn(h.nrows(), h.ncols(), |i, k| unnormalized[(i, k)] / z)
}

pub fn trace(m: &Mat<f64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

pub fn expectation(op: &Mat<f64>, rho: &Mat<f64>) -> f64 {
    let n = rho.nrows();
    (0..n)
        .map(|i| (0..n).map(|k| op[(i, k)] * rho[(k, i)]).sum::<f64>())
        .sum()
}

pub fn entropy(rho: &Mat<f64>) -> f64 {
    eigenvalues(rho)
        .into_iter()
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum()
}

/// `I(A:B)` for a ring cut into sites `0..width` and the rest.
pub fn ring_mutual_information(
    side: usize,
    width: usize,
    n_max: usize,
    j: f64,
    u: f64,
    mu: f64,
    beta: f64,
) -> f64 {
    let space = DenseFock::new(side, n_max);
    let rho = gibbs(&space.bose_hubbard(&ring_bonds(side), j, u, mu), beta);
    let a: Vec<usize> = (0..width).collect();
    let b: Vec<usize> = (width..side).collect();
    entropy(&space.partial_trace(&rho, &a)) + entropy(&space.partial_trace(&rho, &b))
        - entropy(&rho)
}

/// `ρ_A ⊗ ρ_B` for `A` = the leading sites, in the mixed-radix order above.
pub fn tensor(rho_a: &Mat<f64>, rho_b: &Mat<f64>) -> Mat<f64> {
    let da = rho_a.nrows();
    let n = da * rho_b.nrows();
    Mat::from_fn(n, n, |i, k| {
        rho_a[(i % da, k % da)] * rho_b[(i / da, k / da)]
    })
}

/// `-J Σ_{x~y} (a_x^dag a_y + h.c.)` over the given bonds.
pub fn hopping(space: &DenseFock, bonds: &[(usize, usize)], j: f64) -> Mat<f64> {
    let mut h = Mat::zeros(space.dim, space.dim);
    for &(x, y) in bonds {
        let t = space.hop(x, y);
        h -= Mat::from_fn(space.dim, space.dim, |r, c| j * (t[(r, c)] + t[(c, r)]));
    }
    h
}
