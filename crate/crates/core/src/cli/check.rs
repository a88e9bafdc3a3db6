use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    cauchy_schwarz_min_eigenvalue, gibbs_variational_slack, peierls_bogoliubov_check,
    random_commuting_pair, ChainParams, Prepared,
};
use crate::error::Result;
use crate::fock::{assemble_bose_hubbard, TruncatedBasis};
use crate::gibbs::{gibbs_state, random_density_matrix};
use crate::lattice::LatticeSpec;

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Outcome of one inequality family: the worst slack over all cases.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub min_slack: f64,
    pub threshold: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.min_slack >= self.threshold
    }
}

impl std::fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<26} cases={:<5} min_slack={:+.3e} threshold={:+.0e}",
            if self.passed() { "pass" } else { "FAIL" },
            self.name,
            self.cases,
            self.min_slack,
            self.threshold
        )
    }
}

/// Both Peierls-Bogoliubov forms on random block-diagonal pairs of total
/// dimension at most 64.
pub fn peierls_bogoliubov_suite(seed: u64, pairs: usize) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    for _ in 0..pairs {
        let blocks = rng.gen_range(1..=4);
        let dims: Vec<usize> = (0..blocks).map(|_| rng.gen_range(1..=16)).collect();
        let scale = rng.gen_range(0.1..3.0);
        let (k, p) = random_commuting_pair(&dims, scale, &mut rng);
        let c = peierls_bogoliubov_check(&k, &p)?;
        min = min.min(c.s1_slack()).min(c.s2_slack());
    }
    Ok(SuiteResult {
        name: "peierls-bogoliubov",
        cases: pairs,
        min_slack: min,
        threshold: -1e-10,
    })
}

/// Small Bose-Hubbard instances `(side, n_max)` on the chain.
const SMALL_CHAINS: [(usize, usize); 3] = [(2, 3), (3, 2), (4, 2)];

/// Free-energy excess of random states over the Gibbs state.
pub fn gibbs_variational_suite(seed: u64, per_hamiltonian: usize) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    let mut cases = 0;
    for (side, n_max) in SMALL_CHAINS {
        let lattice = LatticeSpec::new(1, side)?;
        let basis = Arc::new(TruncatedBasis::new(side, n_max, None, usize::MAX)?);
        let h = assemble_bose_hubbard(&basis, &lattice, 1.0, 1.0, 1.0)?;
        let beta = 1.0;
        let gibbs = gibbs_state(&h, beta)?;
        min = min.min(gibbs_variational_slack(&h, beta, &gibbs)?);
        for _ in 0..per_hamiltonian {
            let rho = random_density_matrix(&basis, &mut rng)?;
            min = min.min(gibbs_variational_slack(&h, beta, &rho)?);
            cases += 1;
        }
    }
    Ok(SuiteResult {
        name: "gibbs-variational",
        cases,
        min_slack: min,
        threshold: -1e-9,
    })
}

/// Pinsker and the correlation-norm bound on Gibbs states of small chains.
pub fn pinsker_suites() -> Result<[SuiteResult; 2]> {
    let mut pinsker = f64::INFINITY;
    let mut correlation = f64::INFINITY;
    let mut cases = 0;
    let betas = [0.25, 0.5, 1.0, 2.0, 4.0];
    for side in 2..=4 {
        for n_max in 1..=3 {
            let mut params = ChainParams::new(1, side, n_max, 1.0, 1.0, 1.0);
            params.pinsker = true;
            let prepared = Prepared::new(&params, &betas)?;
            for beta in betas {
                let chain = prepared.evaluate(beta)?;
                let check = chain.pinsker.expect("uncapped basis");
                pinsker = pinsker.min(check.pinsker_slack);
                correlation = correlation.min(check.correlation_slack);
                cases += 1;
            }
        }
    }
    Ok([
        SuiteResult {
            name: "pinsker",
            cases,
            min_slack: pinsker,
            threshold: -1e-9,
        },
        SuiteResult {
            name: "correlation-norm",
            cases,
            min_slack: correlation,
            threshold: -1e-9,
        },
    ])
}

/// Smallest eigenvalue of `(a_x ± a_y)^dag (a_x ± a_y)` over every
/// boundary bond of small boxes at `n_max <= 4`.
pub fn cauchy_schwarz_suite() -> Result<SuiteResult> {
    let mut min = f64::INFINITY;
    let mut cases = 0;
    for (dim, side) in [(1, 2), (1, 3), (1, 4), (2, 2)] {
        let lattice = LatticeSpec::new(dim, side)?;
        let bip = lattice.bipartition(side / 2)?;
        for n_max in 1..=4 {
            let basis = Arc::new(TruncatedBasis::new(
                lattice.num_sites(),
                n_max,
                None,
                usize::MAX,
            )?);
            for &(x, y) in bip.boundary_bonds() {
                for sign in [1.0, -1.0] {
                    min = min.min(cauchy_schwarz_min_eigenvalue(&basis, x, y, sign)?);
                    cases += 1;
                }
            }
        }
    }
    Ok(SuiteResult {
        name: "cauchy-schwarz",
        cases,
        min_slack: min,
        threshold: -1e-10,
    })
}

pub fn run_all(seed: u64) -> Result<Vec<SuiteResult>> {
    let mut out = vec![
        peierls_bogoliubov_suite(seed, 200)?,
        gibbs_variational_suite(seed, 100)?,
    ];
    out.extend(pinsker_suites()?);
    out.push(cauchy_schwarz_suite()?);
    Ok(out)
}
