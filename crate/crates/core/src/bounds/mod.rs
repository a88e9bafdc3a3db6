//! The chain of inequalities from the exact mutual information up to the
//! closed-form area-law bound, plus standalone checkers for the matrix
//! inequalities used along the way.

mod chain;
mod checks;

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::quasifree::OneParticleDm;

pub use chain::{verify_chain, BoundChain, ChainParams, PbStep, PinskerCheck, Prepared};
pub use checks::{
    cauchy_schwarz_min_eigenvalue, gibbs_variational_slack, peierls_bogoliubov_check,
    random_commuting_pair, PbCheck,
};

/// Mutual-information bound from the boundary energy,
/// `β (tr(H_∂ ρ_A⊗ρ_B) - tr(H_∂ ρ_AB))`, given both boundary energies.
pub fn lemma1_bound(beta: f64, boundary_energy_joint: f64, boundary_energy_product: f64) -> f64 {
    beta * (boundary_energy_product - boundary_energy_joint)
}

/// `(8/L) β J <N>`.
pub fn prop1_bound(beta: f64, j: f64, side: usize, mean_particles: f64) -> f64 {
    8.0 / side as f64 * beta * j * mean_particles
}

/// Particle-number bound obtained by comparing with the free reference
/// state `H_0 + γN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop2Bound {
    pub c0: f64,
    /// `<W>` in the quasi-free reference, `(U/2) L^d 2 g²`.
    pub w_free: f64,
    /// `<N>` in the quasi-free reference, `L^d g`.
    pub n_free: f64,
    /// Bound on `<N>` keeping `-(μ + γ - 2dJ) <N>_free`.
    pub exact: f64,
    /// Bound on `<N>` with that nonpositive term dropped.
    pub relaxed: f64,
}

/// Inputs shared by the particle-number bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub dim: usize,
    pub side: usize,
    pub j: f64,
    pub u: f64,
    pub mu: f64,
}

impl Couplings {
    fn volume(&self) -> f64 {
        (self.side as f64).powi(self.dim as i32)
    }

    /// `μ + γ - 2dJ`.
    pub fn reference_shift(&self, gamma: f64) -> f64 {
        self.mu + gamma - 2.0 * self.dim as f64 * self.j
    }

    pub fn c0(&self, gamma: f64) -> f64 {
        0.25 * self.u / (gamma + self.mu)
    }

    fn constant_term(&self, gamma: f64) -> f64 {
        let c0 = self.c0(gamma);
        c0 / 4.0 * (1.0 + 1.0 / c0).powi(2) * self.volume()
    }

    /// `2 ((C_0/(U/2)) (w - s n) + (C_0/4)(1 + C_0^{-1})² L^d)`.
    fn n_bound(&self, gamma: f64, w: f64, n: f64) -> f64 {
        let c0 = self.c0(gamma);
        2.0 * (c0 / (self.u / 2.0) * (w - self.reference_shift(gamma) * n)
            + self.constant_term(gamma))
    }
}

pub fn prop2_bound(dm: &OneParticleDm, couplings: &Couplings) -> Result<Prop2Bound> {
    let gamma = dm.gamma();
    let floor = 2.0 * couplings.dim as f64 * couplings.j - couplings.mu;
    if gamma <= floor {
        return Err(Error::invalid(format!(
            "gamma = {gamma} must exceed 2dJ - mu = {floor}"
        )));
    }
    if !(couplings.u > 0.0) {
        return Err(Error::invalid("U must be > 0"));
    }
    let g = dm.g();
    let vol = couplings.volume();
    let w_free = couplings.u / 2.0 * vol * 2.0 * g * g;
    let n_free = vol * g;
    Ok(Prop2Bound {
        c0: couplings.c0(gamma),
        w_free,
        n_free,
        exact: couplings.n_bound(gamma, w_free, n_free),
        relaxed: couplings.n_bound(gamma, w_free, 0.0),
    })
}

/// `<N>` bound with `g` replaced by `2^d(1+ε1) f + ε2` and the square split
/// as `2g² <= 2^{2d+2}(1+ε1)² f² + 4ε2²`.
pub fn step3_particle_bound(
    couplings: &Couplings,
    gamma: f64,
    f_value: f64,
    eps1: f64,
    eps2: f64,
) -> f64 {
    let d = couplings.dim as i32;
    let two_g2 = 2f64.powi(2 * d + 2) * (1.0 + eps1).powi(2) * f_value.powi(2) + 4.0 * eps2 * eps2;
    let w = couplings.u / 2.0 * couplings.volume() * two_g2;
    couplings.n_bound(gamma, w, 0.0)
}

/// As [`step3_particle_bound`] with `f` replaced by its `α -> 0` bound
/// `2^{-d}/(βγ)`.
pub fn step4_particle_bound(
    couplings: &Couplings,
    beta: f64,
    gamma: f64,
    eps1: f64,
    eps2: f64,
) -> f64 {
    let f = 2f64.powi(-(couplings.dim as i32)) / (beta * gamma);
    step3_particle_bound(couplings, gamma, f, eps1, eps2)
}

/// The area-law constant `c(J, U, μ)` in dimension `d`.
pub fn main_constant(j: f64, u: f64, mu: f64, dim: usize) -> Result<f64> {
    if !(j >= 0.0 && j.is_finite()) {
        return Err(Error::invalid(format!(
            "J must be finite and >= 0, got {j}"
        )));
    }
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::invalid(format!("U must be > 0, got {u}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("mu must be > 0, got {mu}")));
    }
    if dim == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    let d = dim as f64;
    let a = 2.0 * d * j + 1.0 + mu;
    let zero_modes = 4.0 * 6f64.powi(2 * (dim as i32 - 1)) / (E - 1.0).powi(2);
    Ok(16.0 * j * ((16.0 + zero_modes) / (2.0 * a) + u / (16.0 * a) + a / u + 0.5))
}

/// `c(J, U, μ) max{1, β} L^{d-1}`.
pub fn theorem_bound(beta: f64, side: usize, dim: usize, j: f64, u: f64, mu: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
    }
    Ok(main_constant(j, u, mu, dim)? * beta.max(1.0) * (side as f64).powi(dim as i32 - 1))
}

/// Default chemical-potential shift `max{1/β, 2dJ + 1}`.
pub fn default_gamma(beta: f64, dim: usize, j: f64) -> f64 {
    (1.0 / beta).max(2.0 * dim as f64 * j + 1.0)
}
