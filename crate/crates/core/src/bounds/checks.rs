use std::sync::Arc;

use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fock::{site_operator, SiteOperatorKind, SparseOperator, TruncatedBasis};
use crate::gibbs::{free_energy, DensityMatrix, Spectrum};
use crate::linalg::{log_sum_exp, sym_eigen, sym_eigenvalues};

/// Both forms of the Peierls-Bogoliubov inequality for one pair `(K, P)`.
///
/// (S1): `tr(P e^K)/tr(e^K) <= log(tr(e^{K+P})/tr(e^K))`
/// (S2): `tr(P e^K)/tr(e^K) <= tr(P e^{K+P})/tr(e^{K+P})`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbCheck {
    pub lhs: f64,
    pub s1_rhs: f64,
    pub s2_rhs: f64,
}

impl PbCheck {
    pub fn s1_slack(&self) -> f64 {
        self.s1_rhs - self.lhs
    }

    pub fn s2_slack(&self) -> f64 {
        self.s2_rhs - self.lhs
    }
}

/// Thermal data of `e^K` for a block-diagonal `K`: `log tr e^K` and
/// `tr(P e^K)/tr(e^K)`.
fn thermal(k: &[Mat<f64>], p: &[Mat<f64>]) -> Result<(f64, f64)> {
    let mut logs = Vec::new();
    let mut diag = Vec::new();
    for (kb, pb) in k.iter().zip(p) {
        let eig = sym_eigen(kb.as_ref())?;
        let pv = pb * &eig.vectors;
        for (i, &value) in eig.values.iter().enumerate() {
            logs.push(value);
            diag.push(
                eig.vectors
                    .col(i)
                    .iter()
                    .zip(pv.col(i).iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>(),
            );
        }
    }
    let log_z = log_sum_exp(logs.iter().copied());
    let mean = logs
        .iter()
        .zip(&diag)
        .map(|(l, d)| (l - log_z).exp() * d)
        .sum();
    Ok((log_z, mean))
}

/// Evaluates both inequalities for symmetric `K` and `P` given as matching
/// diagonal blocks, e.g. the particle-number sectors of operators that
/// commute with `N`.
pub fn peierls_bogoliubov_check(k: &[Mat<f64>], p: &[Mat<f64>]) -> Result<PbCheck> {
    if k.len() != p.len() || k.is_empty() {
        return Err(Error::invalid(
            "K and P need the same nonempty block structure",
        ));
    }
    for (kb, pb) in k.iter().zip(p) {
        if kb.nrows() != kb.ncols() || pb.nrows() != kb.nrows() || pb.ncols() != kb.ncols() {
            return Err(Error::invalid(
                "blocks of K and P must be square and of equal size",
            ));
        }
    }
    let kp: Vec<Mat<f64>> = k.iter().zip(p).map(|(a, b)| a + b).collect();
    let (log_z, lhs) = thermal(k, p)?;
    let (log_zp, s2_rhs) = thermal(&kp, p)?;
    Ok(PbCheck {
        lhs,
        s1_rhs: log_zp - log_z,
        s2_rhs,
    })
}

/// Random symmetric blocks `(K, P)` of the given sizes with Gaussian
/// entries of standard deviation `scale`.
pub fn random_commuting_pair(
    dims: &[usize],
    scale: f64,
    rng: &mut impl Rng,
) -> (Vec<Mat<f64>>, Vec<Mat<f64>>) {
    let mut sym = |d: usize| {
        let g = Mat::from_fn(d, d, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        Mat::from_fn(d, d, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]))
    };
    let k = dims.iter().map(|&d| sym(d)).collect();
    let p = dims.iter().map(|&d| sym(d)).collect();
    (k, p)
}

/// `F(ρ) - F(ρ_β)` for the free-energy functional `tr(Hρ) - S(ρ)/β`;
/// nonnegative for every state.
pub fn gibbs_variational_slack(h: &SparseOperator, beta: f64, rho: &DensityMatrix) -> Result<f64> {
    let spectrum = Spectrum::compute(h)?;
    let minimum = -spectrum.log_partition(beta) / beta;
    Ok(free_energy(h, beta, rho)?.value - minimum)
}

/// Smallest eigenvalue of `n_x + n_y + sign (a_x^dag a_y + a_y^dag a_x)`,
/// which is `(a_x + sign a_y)^dag (a_x + sign a_y)` on the truncated space.
pub fn cauchy_schwarz_min_eigenvalue(
    basis: &Arc<TruncatedBasis>,
    x: usize,
    y: usize,
    sign: f64,
) -> Result<f64> {
    if x == y {
        return Err(Error::invalid("sites must differ"));
    }
    let op = |site, kind| site_operator(basis, site, kind);
    let n = op(x, SiteOperatorKind::Number)?.add(&op(y, SiteOperatorKind::Number)?)?;
    let hop = op(x, SiteOperatorKind::Create)?.compose(&op(y, SiteOperatorKind::Annihilate)?)?;
    let hop = hop.add(&hop.adjoint())?;
    let m = n.linear_combination(1.0, &hop, sign)?;
    let mut min = f64::INFINITY;
    for s in 0..basis.num_sectors() {
        if let Some(block) = m.dense_block(s) {
            min = sym_eigenvalues(block.as_ref())?
                .into_iter()
                .fold(min, f64::min);
        }
    }
    Ok(min)
}
