use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::{
    default_gamma, lemma1_bound, main_constant, prop1_bound, prop2_bound, step3_particle_bound,
    step4_particle_bound, Couplings,
};
use crate::error::{Error, Result};
use crate::fock::{
    assemble_decomposition, assemble_kinetic, interaction_operator, site_operator,
    SiteOperatorKind, SparseOperator, TruncatedBasis, DEFAULT_DIM_GUARD,
};
use crate::gibbs::{
    expectation, trace_distance, truncated_correlation, DensityMatrix, Spectrum, Split,
};
use crate::lattice::{Bipartition, LatticeSpec, Region};
use crate::linalg::{log_sum_exp, sym_eigen};
use crate::quasifree::{one_particle_dm, zero_mode_audit, PlanckEstimate, ZeroModeAudit};

/// Tolerance for flagging a violated link of the chain.
const CHAIN_TOL: f64 = 1e-8;

/// One point of a chain evaluation, without the inverse temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub dim: usize,
    pub side: usize,
    /// Width of region A along the first axis; `side / 2` when unset.
    pub width: Option<usize>,
    pub n_max: usize,
    pub n_cap: Option<usize>,
    pub j: f64,
    pub u: f64,
    pub mu: f64,
    /// Shift of the free reference; `max{1/β, 2dJ + 1}` when unset.
    pub gamma: Option<f64>,
    pub quad_tol: f64,
    pub dim_guard: usize,
    pub sector_cutoff: f64,
    /// Also form `ρ_A ⊗ ρ_B` for the Pinsker and correlation checks.
    pub pinsker: bool,
}

impl ChainParams {
    pub fn new(dim: usize, side: usize, n_max: usize, j: f64, u: f64, mu: f64) -> Self {
        ChainParams {
            dim,
            side,
            width: None,
            n_max,
            n_cap: None,
            j,
            u,
            mu,
            gamma: None,
            quad_tol: 1e-12,
            dim_guard: DEFAULT_DIM_GUARD,
            sector_cutoff: 1e-15,
            pinsker: false,
        }
    }

    pub fn width(&self) -> usize {
        self.width.unwrap_or(self.side / 2)
    }

    pub fn gamma_at(&self, beta: f64) -> f64 {
        self.gamma
            .unwrap_or_else(|| default_gamma(beta, self.dim, self.j))
    }

    fn couplings(&self) -> Couplings {
        Couplings {
            dim: self.dim,
            side: self.side,
            j: self.j,
            u: self.u,
            mu: self.mu,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.j >= 0.0 && self.j.is_finite()) {
            return Err(Error::invalid(format!(
                "J must be finite and >= 0, got {}",
                self.j
            )));
        }
        if !(self.u > 0.0 && self.u.is_finite()) {
            return Err(Error::invalid(format!("U must be > 0, got {}", self.u)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid(format!("mu must be > 0, got {}", self.mu)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::invalid(format!("gamma must be > 0, got {g}")));
            }
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerance must be > 0"));
        }
        Ok(())
    }
}

/// A Peierls-Bogoliubov comparison `<W - sN>_{H_AB} <= <W - sN>_{H_0 + cN}`
/// on the truncated space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PbStep {
    /// Number-operator coefficient `c` of the reference.
    pub reference_shift: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinskerCheck {
    /// `||ρ_AB - ρ_A ⊗ ρ_B||_1`.
    pub trace_distance: f64,
    /// `I - ||ρ_AB - ρ_A ⊗ ρ_B||_1² / 2`.
    pub pinsker_slack: f64,
    /// Connected `<n_x n_y>` across the first boundary bond.
    pub correlation: f64,
    /// `||n_x|| ||n_y|| ||ρ_AB - ρ_A ⊗ ρ_B||_1 - |correlation|`.
    pub correlation_slack: f64,
    /// `tr(H_∂ ρ_A ⊗ ρ_B)`.
    pub product_boundary_energy: f64,
}

/// Every link of the chain at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundChain {
    pub dim: usize,
    pub side: usize,
    pub width: usize,
    pub n_max: usize,
    pub n_cap: Option<usize>,
    pub beta: f64,
    pub j: f64,
    pub u: f64,
    pub mu: f64,
    pub gamma: f64,
    pub boundary_bonds: usize,
    pub skipped_sectors: usize,

    pub entropy_ab: f64,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub exact_mi: f64,
    pub mean_particles: f64,
    /// `max_x |<n_x> - <N>/L^d|`.
    pub translation_deviation: f64,
    /// `max_x P(n_x = n_max)`.
    pub edge_occupation: f64,
    pub boundary_energy: f64,

    pub lemma1_value: f64,
    pub prop1_value: f64,
    /// Values of the later links, converted to mutual-information bounds
    /// by the factor `(8/L) β J`.
    pub prop2_value: f64,
    pub prop2_relaxed_value: f64,
    pub step3_value: f64,
    pub step4_value: f64,
    pub theorem_value: f64,

    pub g: f64,
    pub c0: f64,
    pub w_free: f64,
    pub n_free: f64,
    pub prop2_particles: f64,
    pub f_value: f64,
    pub quadrature_error: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub lemma_s3_rhs: f64,
    pub main_constant: f64,

    /// Reference `H_0 + γN`.
    pub pb_literal: PbStep,
    /// Reference `H_AB - W + (μ + γ - 2dJ)N = H_0 + (γ - 2dJ - deg J)N`.
    pub pb_genuine: PbStep,
    pub pinsker: Option<PinskerCheck>,
    pub zero_modes: ZeroModeAudit,

    pub slack_lemma1: f64,
    pub slack_prop1: f64,
    pub slack_theorem: f64,
    /// Links that fail by more than the chain tolerance.
    pub violations: Vec<String>,
}

/// Per-sector `(E_i, <v_i|W|v_i>)` of the eigenbasis of `H_0`.
type FreeLevels = Vec<Vec<(f64, f64)>>;

/// Everything about a parameter point that does not depend on `β`.
pub struct Prepared {
    params: ChainParams,
    lattice: LatticeSpec,
    bipartition: Bipartition,
    basis: Arc<TruncatedBasis>,
    split: Split,
    boundary: SparseOperator,
    interaction: SparseOperator,
    spectrum: Spectrum,
    free_levels: OnceLock<std::result::Result<FreeLevels, String>>,
}

impl Prepared {
    /// Builds and diagonalizes `H_AB`. `betas` only steer the sector cutoff.
    pub fn new(params: &ChainParams, betas: &[f64]) -> Result<Self> {
        params.validate()?;
        for &b in betas {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::invalid(format!("beta must be > 0, got {b}")));
            }
        }
        let lattice = LatticeSpec::new(params.dim, params.side)?;
        let bipartition = lattice.bipartition(params.width())?;
        let basis = Arc::new(TruncatedBasis::new(
            lattice.num_sites(),
            params.n_max,
            params.n_cap,
            params.dim_guard,
        )?);
        let decomposition = assemble_decomposition(
            &basis,
            &lattice,
            &bipartition,
            params.j,
            params.u,
            params.mu,
        )?;
        let h = decomposition.total()?;
        let spectrum = Spectrum::compute_with_cutoff(&h, betas, params.sector_cutoff)?;
        let split = Split::new(&basis, &bipartition)?;
        Ok(Prepared {
            params: params.clone(),
            interaction: interaction_operator(&basis, params.u),
            lattice,
            bipartition,
            basis,
            split,
            boundary: decomposition.h_boundary,
            spectrum,
            free_levels: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn basis(&self) -> &Arc<TruncatedBasis> {
        &self.basis
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn gibbs(&self, beta: f64) -> Result<DensityMatrix> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
        }
        Ok(self.spectrum.gibbs(beta))
    }

    /// `(I(A:B), <N>)` at `β`, the two quantities tracked for convergence.
    pub fn observables(&self, beta: f64) -> Result<(f64, f64)> {
        let rho = self.gibbs(beta)?;
        let mi = self.split.mutual_information(&rho)?;
        Ok((mi, rho.site_occupations().iter().sum()))
    }

    fn free_levels(&self) -> Result<&FreeLevels> {
        let levels = self.free_levels.get_or_init(|| {
            let compute = || -> Result<FreeLevels> {
                let h0 = assemble_kinetic(&self.basis, &self.lattice, self.params.j)?;
                (0..self.basis.num_sectors())
                    .map(|s| {
                        let block = h0.dense_block(s).expect("diagonal block present");
                        let w = self
                            .interaction
                            .block(s)
                            .map(|b| b.diagonal())
                            .unwrap_or_default();
                        let eig = sym_eigen(block.as_ref())?;
                        Ok(eig
                            .values
                            .iter()
                            .enumerate()
                            .map(|(i, &e)| {
                                let wi = eig
                                    .vectors
                                    .col(i)
                                    .iter()
                                    .zip(&w)
                                    .map(|(v, w)| v * v * w)
                                    .sum();
                                (e, wi)
                            })
                            .collect())
                    })
                    .collect()
            };
            compute().map_err(|e| e.to_string())
        });
        levels.as_ref().map_err(|e| Error::invalid(e.clone()))
    }

    /// `<W - sN>` in the truncated Gibbs state of `H_0 + cN`.
    fn reference_value(&self, beta: f64, c: f64, s: f64) -> Result<f64> {
        let levels = self.free_levels()?;
        let exponents: Vec<(f64, f64)> = levels
            .iter()
            .enumerate()
            .flat_map(|(n, lv)| {
                let n = n as f64;
                lv.iter()
                    .map(move |&(e, w)| (-beta * (e + c * n), w - s * n))
            })
            .collect();
        let log_z = log_sum_exp(exponents.iter().map(|p| p.0));
        Ok(exponents.iter().map(|&(x, v)| (x - log_z).exp() * v).sum())
    }

    fn pinsker(
        &self,
        rho: &DensityMatrix,
        rho_a: &DensityMatrix,
        rho_b: &DensityMatrix,
        mi: f64,
    ) -> Result<Option<PinskerCheck>> {
        let product = match self.split.tensor_product(rho_a, rho_b) {
            Ok(p) => p,
            // the cap cuts off weight of the product state
            Err(Error::InvalidParameter(_)) if self.basis.n_cap().is_some() => return Ok(None),
            Err(e) => return Err(e),
        };
        let td = trace_distance(rho, &product)?;
        let &(x, y) = self
            .bipartition
            .boundary_bonds()
            .first()
            .expect("a periodic cut has boundary bonds");
        let (x, y) = match self.bipartition.region_of(x) {
            Region::A => (x, y),
            Region::B => (y, x),
        };
        let nx = site_operator(&self.basis, x, SiteOperatorKind::Number)?;
        let ny = site_operator(&self.basis, y, SiteOperatorKind::Number)?;
        let correlation = truncated_correlation(&nx, &ny, rho, &self.bipartition)?;
        let norm = self
            .basis
            .n_max()
            .min(self.basis.n_cap().unwrap_or(usize::MAX)) as f64;
        Ok(Some(PinskerCheck {
            trace_distance: td,
            pinsker_slack: mi - 0.5 * td * td,
            correlation,
            correlation_slack: norm * norm * td - correlation.abs(),
            product_boundary_energy: expectation(&self.boundary, &product)?,
        }))
    }

    /// Full chain at inverse temperature `beta`.
    pub fn evaluate(&self, beta: f64) -> Result<BoundChain> {
        let p = &self.params;
        let rho = self.gibbs(beta)?;
        let rho_a = self.split.partial_trace(&rho, Region::A)?;
        let rho_b = self.split.partial_trace(&rho, Region::B)?;
        let (entropy_ab, entropy_a, entropy_b) = (rho.entropy(), rho_a.entropy(), rho_b.entropy());
        let exact_mi = entropy_a + entropy_b - entropy_ab;

        let occupations = rho.site_occupations();
        let mean_particles: f64 = occupations.iter().sum();
        let mean_site = mean_particles / occupations.len() as f64;
        let translation_deviation = occupations
            .iter()
            .map(|n| (n - mean_site).abs())
            .fold(0.0, f64::max);
        let n_max = self.basis.n_max() as u8;
        let edge_occupation = rho
            .diagonal_moments(|n| if n == n_max { 1.0 } else { 0.0 })
            .into_iter()
            .fold(0.0, f64::max);

        let pinsker = if p.pinsker {
            self.pinsker(&rho, &rho_a, &rho_b, exact_mi)?
        } else {
            None
        };
        let boundary_energy = expectation(&self.boundary, &rho)?;
        // H_∂ moves one particle across the cut and the product state is
        // diagonal in N_A, so its boundary energy vanishes.
        let product_energy = pinsker.map_or(0.0, |c| c.product_boundary_energy);
        let lemma1_value = lemma1_bound(beta, boundary_energy, product_energy);
        let prop1_value = prop1_bound(beta, p.j, p.side, mean_particles);

        let gamma = p.gamma_at(beta);
        let couplings = p.couplings();
        let dm = one_particle_dm(&self.lattice, beta, gamma, p.j)?;
        let prop2 = prop2_bound(&dm, &couplings)?;
        let planck = PlanckEstimate::new(p.side, p.dim, beta, gamma, p.j, p.quad_tol)?;
        let step3 =
            step3_particle_bound(&couplings, gamma, planck.f_value, planck.eps1, planck.eps2);
        let step4 = step4_particle_bound(&couplings, beta, gamma, planck.eps1, planck.eps2);
        let c = main_constant(p.j, p.u, p.mu, p.dim)?;
        let theorem_value = c * beta.max(1.0) * (p.side as f64).powi(p.dim as i32 - 1);
        let to_mi = |n: f64| prop1_bound(beta, p.j, p.side, n);

        let s = couplings.reference_shift(gamma);
        let lhs = expectation(&self.interaction, &rho)? - s * mean_particles;
        let pb_step = |shift: f64| -> Result<PbStep> {
            let rhs = self.reference_value(beta, shift, s)?;
            Ok(PbStep {
                reference_shift: shift,
                lhs,
                rhs,
                slack: rhs - lhs,
            })
        };
        let pb_literal = pb_step(gamma)?;
        let pb_genuine = pb_step(s - p.mu - self.lattice.degree() as f64 * p.j)?;

        let mut chain = BoundChain {
            dim: p.dim,
            side: p.side,
            width: p.width(),
            n_max: p.n_max,
            n_cap: p.n_cap,
            beta,
            j: p.j,
            u: p.u,
            mu: p.mu,
            gamma,
            boundary_bonds: self.bipartition.boundary_bonds().len(),
            skipped_sectors: self.spectrum.skipped_sectors(),
            entropy_ab,
            entropy_a,
            entropy_b,
            exact_mi,
            mean_particles,
            translation_deviation,
            edge_occupation,
            boundary_energy,
            lemma1_value,
            prop1_value,
            prop2_value: to_mi(prop2.exact),
            prop2_relaxed_value: to_mi(prop2.relaxed),
            step3_value: to_mi(step3),
            step4_value: to_mi(step4),
            theorem_value,
            g: dm.g(),
            c0: prop2.c0,
            w_free: prop2.w_free,
            n_free: prop2.n_free,
            prop2_particles: prop2.exact,
            f_value: planck.f_value,
            quadrature_error: planck.quadrature_error,
            eps1: planck.eps1,
            eps2: planck.eps2,
            lemma_s3_rhs: planck.lemma_s3_rhs,
            main_constant: c,
            pb_literal,
            pb_genuine,
            pinsker,
            zero_modes: zero_mode_audit(p.side, p.dim, beta, gamma, p.j)?,
            slack_lemma1: lemma1_value - exact_mi,
            slack_prop1: prop1_value - lemma1_value,
            slack_theorem: theorem_value - prop1_value,
            violations: Vec::new(),
        };
        chain.violations = chain.find_violations();
        Ok(chain)
    }
}

impl BoundChain {
    /// The ordered links, each as `(name, smaller, larger)`.
    pub fn links(&self) -> Vec<(&'static str, f64, f64)> {
        vec![
            ("mi_nonnegative", 0.0, self.exact_mi),
            ("lemma1", self.exact_mi, self.lemma1_value),
            ("prop1", self.lemma1_value, self.prop1_value),
            ("prop2", self.prop1_value, self.prop2_value),
            ("prop2_relaxed", self.prop2_value, self.prop2_relaxed_value),
            ("step3", self.prop2_relaxed_value, self.step3_value),
            ("step4", self.step3_value, self.step4_value),
            ("theorem", self.prop1_value, self.theorem_value),
            ("prop2_theorem", self.prop2_value, self.theorem_value),
            ("step4_theorem", self.step4_value, self.theorem_value),
            ("pb_genuine", self.pb_genuine.lhs, self.pb_genuine.rhs),
            ("pb_literal", self.pb_literal.lhs, self.pb_literal.rhs),
            ("lemma_s3", self.g, self.lemma_s3_rhs),
        ]
    }

    fn find_violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .links()
            .into_iter()
            .filter(|&(_, lo, hi)| lo > hi + CHAIN_TOL)
            .map(|(name, lo, hi)| format!("{name}: {lo:.10e} > {hi:.10e}"))
            .collect();
        if let Some(c) = &self.pinsker {
            if c.pinsker_slack < -CHAIN_TOL {
                out.push(format!("pinsker: slack {:.3e}", c.pinsker_slack));
            }
            if c.correlation_slack < -CHAIN_TOL {
                out.push(format!("correlation: slack {:.3e}", c.correlation_slack));
            }
        }
        if self.translation_deviation > 1e-10 {
            out.push(format!(
                "translation: deviation {:.3e}",
                self.translation_deviation
            ));
        }
        out
    }

    /// Whether the named link or check was flagged.
    pub fn flagged(&self, name: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.split(':').next() == Some(name))
    }
}

/// Prepares and evaluates a single point.
pub fn verify_chain(params: &ChainParams, beta: f64) -> Result<BoundChain> {
    Prepared::new(params, &[beta])?.evaluate(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_chain_holds() {
        let mut p = ChainParams::new(1, 4, 3, 1.0, 1.0, 1.0);
        p.pinsker = true;
        let c = verify_chain(&p, 1.0).unwrap();
        assert!(c.exact_mi > 0.0);
        assert!(c.slack_lemma1 >= -1e-8 && c.slack_prop1 >= -1e-8 && c.slack_theorem > 0.0);
        assert!(c.pb_genuine.slack >= -1e-8);
        assert_eq!(c.boundary_bonds, 2);
        assert!(c.translation_deviation < 1e-10);
        let pk = c.pinsker.unwrap();
        assert!(pk.product_boundary_energy.abs() < 1e-12);
        assert!(pk.pinsker_slack >= 0.0 && pk.correlation_slack >= 0.0);
        assert!(c.violations.is_empty(), "{:?}", c.violations);
        assert!(!c.flagged("lemma1"));
    }

    #[test]
    fn zero_hopping_collapses_the_chain() {
        let c = verify_chain(&ChainParams::new(1, 4, 2, 0.0, 1.0, 1.0), 1.0).unwrap();
        assert!(c.exact_mi.abs() < 1e-10);
        assert_eq!(c.lemma1_value, 0.0);
        assert_eq!(c.prop1_value, 0.0);
        assert_eq!(c.theorem_value, 0.0);
    }

    #[test]
    fn theorem_hypotheses_enforced() {
        assert!(verify_chain(&ChainParams::new(1, 4, 2, 1.0, 1.0, 0.0), 1.0).is_err());
        assert!(verify_chain(&ChainParams::new(1, 4, 2, 1.0, 0.0, 1.0), 1.0).is_err());
        assert!(verify_chain(&ChainParams::new(1, 4, 2, 1.0, 1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn cutoff_does_not_change_values() {
        let p = ChainParams::new(1, 4, 6, 1.0, 1.0, 1.0);
        let mut q = p.clone();
        q.sector_cutoff = 0.0;
        let a = verify_chain(&p, 4.0).unwrap();
        let b = verify_chain(&q, 4.0).unwrap();
        assert!(a.skipped_sectors > 0);
        assert!((a.exact_mi - b.exact_mi).abs() < 1e-12);
        assert!((a.mean_particles - b.mean_particles).abs() < 1e-12);
    }
}
