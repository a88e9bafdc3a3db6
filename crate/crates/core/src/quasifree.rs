//! Free-boson reference states: the one-particle density matrix of
//! `H_0 + gamma N`, the Planck-law integral that bounds it, and the finite
//! size error terms.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{chain_spectrum, laplacian_matrix, LatticeSpec, SpectrumTable};
use crate::linalg::sym_apply;

/// Bose-Einstein occupation `(e^x - 1)^{-1}`.
pub fn bose(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be > 0, got {gamma}")));
    }
    Ok(())
}

fn check_temperature(beta: f64, j: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
    }
    if !(j >= 0.0 && j.is_finite()) {
        return Err(Error::invalid(format!(
            "J must be finite and >= 0, got {j}"
        )));
    }
    Ok(())
}

/// Diagonal of `(e^{beta(J(-Δ) + gamma)} - 1)^{-1}` on a periodic box.
#[derive(Debug, Clone)]
pub struct OneParticleDm {
    dim: usize,
    beta: f64,
    gamma: f64,
    j: f64,
    chain: SpectrumTable,
    g: f64,
}

pub fn one_particle_dm(
    lattice: &LatticeSpec,
    beta: f64,
    gamma: f64,
    j: f64,
) -> Result<OneParticleDm> {
    check_gamma(gamma)?;
    check_temperature(beta, j)?;
    let chain = chain_spectrum(lattice.side())?;
    let mut dm = OneParticleDm {
        dim: lattice.dim(),
        beta,
        gamma,
        j,
        chain,
        g: 0.0,
    };
    dm.g = dm.diagonal_at(&vec![0; lattice.dim()]);
    Ok(dm)
}

impl OneParticleDm {
    /// `<a_x^dag a_x>`, the same at every site.
    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn hopping(&self) -> f64 {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.chain.side()
    }

    /// Spectral sum over all multi-indices evaluated at the given
    /// zero-based site coordinates.
    pub fn diagonal_at(&self, coords: &[usize]) -> f64 {
        assert_eq!(coords.len(), self.dim);
        let l = self.chain.side();
        let mut total = 0.0;
        let mut idx = vec![0usize; self.dim];
        loop {
            let mut lambda = 0.0;
            let mut weight = 1.0;
            for (axis, &i) in idx.iter().enumerate() {
                lambda += self.chain.eigenvalues[i];
                weight *= self.chain.eigenvectors[i][coords[axis]].powi(2);
            }
            total += weight * bose(self.beta * (self.j * lambda + self.gamma));
            let mut axis = 0;
            loop {
                if axis == self.dim {
                    return total;
                }
                idx[axis] += 1;
                if idx[axis] < l {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }

    /// Full one-particle density matrix from a dense matrix function of the
    /// lattice Laplacian.
    pub fn matrix(&self, lattice: &LatticeSpec) -> Result<Mat<f64>> {
        if lattice.dim() != self.dim || lattice.side() != self.side() {
            return Err(Error::invalid("lattice does not match the density matrix"));
        }
        let lap = laplacian_matrix(lattice);
        sym_apply(lap.as_ref(), |x| {
            bose(self.beta * (self.j * x + self.gamma))
        })
    }
}

/// `<a_x^dag a_x^dag a_x a_x>` in the quasi-free state, `2 g^2`.
pub fn wick_onsite_pair(dm: &OneParticleDm) -> f64 {
    wick_pair(dm.g())
}

pub fn wick_pair(g: f64) -> f64 {
    2.0 * g * g
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// Composite rule on `[a, b]` split into `panels` equal pieces.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut x = Vec::with_capacity(panels * self.nodes.len());
        let mut w = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let mid = a + h * (p as f64 + 0.5);
            for (t, wt) in self.nodes.iter().zip(&self.weights) {
                x.push(mid + 0.5 * h * t);
                w.push(0.5 * h * wt);
            }
        }
        (x, w)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

const GL_ORDER: usize = 16;
const MAX_EVALUATIONS: usize = 64_000_000;

/// Quadrature value and error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// `f(gamma, beta, J) = ∫_{[0,1/2]^d} (e^{4Jβ Σ sin²(πx_j) + βγ} - 1)^{-1} dx`.
///
/// Tensor-product composite Gauss-Legendre with dyadic panel refinement;
/// the error estimate is the change from halving the panel count.
pub fn planck_integral(dim: usize, beta: f64, gamma: f64, j: f64, tol: f64) -> Result<Quadrature> {
    check_gamma(gamma)?;
    check_temperature(beta, j)?;
    if dim == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be > 0, got {tol}")));
    }
    let rule = GaussLegendre::new(GL_ORDER);
    let integrand = |s: f64| bose(beta * (4.0 * j * s + gamma));
    let mut panels = 1;
    let mut prev = tensor_sum(&rule, dim, panels, &integrand);
    let mut error = f64::INFINITY;
    loop {
        let next_panels = panels * 2;
        let evals = (next_panels * GL_ORDER).checked_pow(dim as u32);
        if evals.map_or(true, |e| e > MAX_EVALUATIONS) {
            return Err(Error::Quadrature {
                tol,
                estimate: error,
            });
        }
        let value = tensor_sum(&rule, dim, next_panels, &integrand);
        error = (value - prev).abs();
        panels = next_panels;
        if error <= tol {
            return Ok(Quadrature {
                value,
                error,
                panels,
            });
        }
        prev = value;
    }
}

fn tensor_sum(rule: &GaussLegendre, dim: usize, panels: usize, f: &impl Fn(f64) -> f64) -> f64 {
    let (x, w) = rule.composite(0.0, 0.5, panels);
    let s: Vec<f64> = x.iter().map(|x| (PI * x).sin().powi(2)).collect();
    fn recurse(
        s: &[f64],
        w: &[f64],
        depth: usize,
        acc_s: f64,
        acc_w: f64,
        f: &impl Fn(f64) -> f64,
    ) -> f64 {
        if depth == 0 {
            return acc_w * f(acc_s);
        }
        s.iter()
            .zip(w)
            .map(|(si, wi)| recurse(s, w, depth - 1, acc_s + si, acc_w * wi, f))
            .sum()
    }
    recurse(&s, &w, dim, 0.0, 1.0, f)
}

/// Finite-size corrections `(eps1, eps2)` relating the lattice sum to the
/// integral.
pub fn error_terms(side: usize, dim: usize, beta: f64, gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    if side < 2 {
        return Err(Error::invalid(format!(
            "side length must be >= 2, got {side}"
        )));
    }
    let l = side as f64;
    let d = dim as i32;
    let eps1 = ((l + 1.0) / l).powi(d) - 1.0;
    let eps2 =
        bose(beta * gamma) / l.powi(d) * (2.0 * (2.0 * l + 1.0)).powi(d - 1) / (2.0 * l - 1.0);
    Ok((eps1, eps2))
}

/// Everything derived from the Planck integral for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanckEstimate {
    pub dim: usize,
    pub beta: f64,
    pub gamma: f64,
    pub f_value: f64,
    pub quadrature_error: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// `2^d (1 + eps1) f + eps2`.
    pub lemma_s3_rhs: f64,
}

impl PlanckEstimate {
    pub fn new(side: usize, dim: usize, beta: f64, gamma: f64, j: f64, tol: f64) -> Result<Self> {
        let quad = planck_integral(dim, beta, gamma, j, tol)?;
        let (eps1, eps2) = error_terms(side, dim, beta, gamma)?;
        Ok(PlanckEstimate {
            dim,
            beta,
            gamma,
            f_value: quad.value,
            quadrature_error: quad.error,
            eps1,
            eps2,
            lemma_s3_rhs: lemma_s3_rhs(dim, quad.value, eps1, eps2),
        })
    }

    pub fn lemma_s4_rhs(&self, alpha: f64) -> Result<f64> {
        lemma_s4_rhs(self.dim, alpha, self.beta, self.gamma)
    }
}

pub fn lemma_s3_rhs(dim: usize, f_value: f64, eps1: f64, eps2: f64) -> f64 {
    2f64.powi(dim as i32) * (1.0 + eps1) * f_value + eps2
}

/// `2^{-d} e^{-α β γ} / ((1 - α) β γ)` for `α ∈ (0, 1)`.
pub fn lemma_s4_rhs(dim: usize, alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let bg = beta * gamma;
    if !(bg > 0.0) {
        return Err(Error::invalid("beta * gamma must be > 0"));
    }
    Ok(2f64.powi(-(dim as i32)) * (-alpha * bg).exp() / ((1.0 - alpha) * bg))
}

/// The `α -> 0` limit `2^{-d} / (β γ)`.
pub fn lemma_s4_limit(dim: usize, beta: f64, gamma: f64) -> f64 {
    2f64.powi(-(dim as i32)) / (beta * gamma)
}

/// Comparison of the modes with a vanishing momentum component against the
/// closed-form bounds used for them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeAudit {
    /// `L^{-d} [n(βγ) + Σ_{k=1}^{d-1} 4^k Σ_{i_1..i_k=1}^{ℓ} n(β(J Σ λ_{2i_j} + γ))]`.
    pub zero_mode_sum: f64,
    /// `n(βγ) L^{-d} ((4ℓ)^{d-1} - 1)/(4ℓ - 1)`.
    pub geometric_literal: f64,
    /// `n(βγ) L^{-d} Σ_{k=0}^{d-1} (4ℓ)^k = n(βγ) L^{-d} ((4ℓ)^d - 1)/(4ℓ - 1)`.
    pub geometric_sum: f64,
    pub eps2: f64,
    pub eps2_dominates: bool,
}

pub fn zero_mode_audit(
    side: usize,
    dim: usize,
    beta: f64,
    gamma: f64,
    j: f64,
) -> Result<ZeroModeAudit> {
    check_gamma(gamma)?;
    check_temperature(beta, j)?;
    if side < 2 {
        return Err(Error::invalid(format!(
            "side length must be >= 2, got {side}"
        )));
    }
    let l = side as f64;
    let ell = side.div_ceil(2);
    let d = dim as i32;
    let n0 = bose(beta * gamma);
    let lam2 = |i: usize| 4.0 * (i as f64 * PI / l).sin().powi(2);
    // Σ over k-tuples of λ_{2i}, i = 1..ℓ, grouped by tuple length.
    let mut sums = vec![0.0; dim];
    let mut layer = vec![0.0f64];
    for (k, slot) in sums.iter_mut().enumerate() {
        if k == 0 {
            *slot = n0;
            continue;
        }
        layer = layer
            .iter()
            .flat_map(|&s| (1..=ell).map(move |i| s + lam2(i)))
            .collect();
        *slot = 4f64.powi(k as i32)
            * layer
                .iter()
                .map(|&s| bose(beta * (j * s + gamma)))
                .sum::<f64>();
    }
    let zero_mode_sum = sums.iter().sum::<f64>() / l.powi(d);
    let q = 4.0 * ell as f64;
    let geometric_literal = n0 / l.powi(d) * (q.powi(d - 1) - 1.0) / (q - 1.0);
    let geometric_sum = n0 / l.powi(d) * (q.powi(d) - 1.0) / (q - 1.0);
    let (_, eps2) = error_terms(side, dim, beta, gamma)?;
    Ok(ZeroModeAudit {
        zero_mode_sum,
        geometric_literal,
        geometric_sum,
        eps2,
        eps2_dominates: eps2 >= zero_mode_sum,
    })
}

/// One term of the one-dimensional Riemann-sum comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannTerm {
    pub index: usize,
    /// `(2/L) n(β(4J sin²(iπ/L) + γ))`.
    pub spectral: f64,
    /// `(L+1)/(L ℓ) n(β(4J sin²(iπ/(2ℓ)) + γ))`.
    pub riemann: f64,
    /// `(L+1)/L ∫_{(i-1)/ℓ}^{i/ℓ} n(β(4J sin²(πx/2) + γ)) dx`.
    pub cell_integral: f64,
    /// Whether `2i <= L`, i.e. the term belongs to an actual eigenvalue pair.
    pub in_spectrum: bool,
}

/// Term-by-term comparison of the chain spectral sum with its Riemann sum
/// and with the integral over each cell, for `d = 1`.
pub fn riemann_audit(side: usize, beta: f64, gamma: f64, j: f64) -> Result<Vec<RiemannTerm>> {
    check_gamma(gamma)?;
    check_temperature(beta, j)?;
    if side < 2 {
        return Err(Error::invalid(format!(
            "side length must be >= 2, got {side}"
        )));
    }
    let l = side as f64;
    let ell = side.div_ceil(2);
    let n = |s: f64| bose(beta * (4.0 * j * s + gamma));
    let rule = GaussLegendre::new(GL_ORDER);
    Ok((1..=ell)
        .map(|i| {
            let (x, w) = rule.composite((i - 1) as f64 / ell as f64, i as f64 / ell as f64, 4);
            let cell: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| w * n((PI * x / 2.0).sin().powi(2)))
                .sum();
            RiemannTerm {
                index: i,
                spectral: 2.0 / l * n((i as f64 * PI / l).sin().powi(2)),
                riemann: (l + 1.0) / (l * ell as f64)
                    * n((i as f64 * PI / (2 * ell) as f64).sin().powi(2)),
                cell_integral: (l + 1.0) / l * cell,
                in_spectrum: 2 * i <= side,
            }
        })
        .collect())
}
