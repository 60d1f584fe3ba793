//! Graph filters, low-pass profiles, and signal synthesis.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::laplacian::Spectrum;

/// A graph filter specified by its frequency response.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphFilter {
    /// h(l) = sum_t c_t l^t
    Polynomial { coefficients: Vec<f64> },
    /// h(l) = exp(-alpha l)
    Heat { alpha: f64 },
    /// h(l) = 1 / (1 + beta l)
    Resolvent { beta: f64 },
    /// Unit response on the first `cutoff` eigen-indices, zero above.
    IdealLowpass { cutoff: usize },
}

impl GraphFilter {
    pub fn validate(&self) -> Result<()> {
        match self {
            GraphFilter::Polynomial { coefficients } => {
                if coefficients.iter().all(|&c| c == 0.0) {
                    return Err(Error::InvalidParameter(
                        "polynomial filter needs a nonzero coefficient".into(),
                    ));
                }
            }
            GraphFilter::Heat { alpha } => {
                if !alpha.is_finite() || *alpha <= 0.0 {
                    return Err(Error::InvalidParameter(format!("heat alpha = {alpha}")));
                }
            }
            GraphFilter::Resolvent { beta } => {
                if !beta.is_finite() || *beta < 0.0 {
                    return Err(Error::InvalidParameter(format!("resolvent beta = {beta}")));
                }
            }
            GraphFilter::IdealLowpass { cutoff } => {
                if *cutoff == 0 {
                    return Err(Error::InvalidParameter("ideal low-pass cutoff = 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Pointwise frequency response. The ideal low-pass filter acts by
    /// eigen-index, not by value, so it has no pointwise response.
    pub fn frequency_response(&self, lambda: f64) -> Result<f64> {
        match self {
            GraphFilter::Polynomial { coefficients } => Ok(coefficients
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * lambda + c)),
            GraphFilter::Heat { alpha } => Ok((-alpha * lambda).exp()),
            GraphFilter::Resolvent { beta } => Ok(1.0 / (1.0 + beta * lambda)),
            GraphFilter::IdealLowpass { .. } => Err(Error::IdealFilterByValue),
        }
    }

    /// Response at eigen-index `index` (0-based) with eigenvalue `lambda`.
    pub fn response_at_index(&self, lambda: f64, index: usize) -> f64 {
        match self {
            GraphFilter::IdealLowpass { cutoff } => {
                if index < *cutoff {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.frequency_response(lambda).expect("pointwise filter"),
        }
    }

    /// Diagonal response over a spectrum ascending-ordered eigenvalues.
    pub fn response_diagonal(&self, spec: &Spectrum) -> Result<DVector<f64>> {
        if let GraphFilter::IdealLowpass { cutoff } = self {
            if *cutoff > spec.size() {
                return Err(Error::InvalidParameter(format!(
                    "ideal low-pass cutoff {cutoff} exceeds spectrum size {}",
                    spec.size()
                )));
            }
        }
        Ok(DVector::from_iterator(
            spec.size(),
            spec.eigenvalues()
                .iter()
                .enumerate()
                .map(|(i, &l)| self.response_at_index(l, i)),
        ))
    }
}

/// Apply the filter in the eigenbasis: each row y_m = V h(Lambda) V' x_m.
pub fn apply_filter(spec: &Spectrum, f: &GraphFilter, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != spec.size() {
        return Err(Error::DimensionMismatch(format!(
            "signals have {} columns, spectrum has {} nodes",
            x.ncols(),
            spec.size()
        )));
    }
    let h = f.response_diagonal(spec)?;
    let v = spec.eigenvectors();
    let operator = v * DMatrix::from_diagonal(&h) * v.transpose();
    // operator is symmetric, so rows transform by right-multiplication.
    Ok(x * operator)
}

/// Sharpness ratio and response bound of a filter at bandwidth K.
#[derive(Debug, Clone)]
pub struct LowpassProfile {
    pub k: usize,
    pub eta_k: f64,
    pub h_bound: f64,
    pub m_bound: f64,
}

impl LowpassProfile {
    pub fn is_lowpass(&self) -> bool {
        self.eta_k < 1.0
    }
}

/// eta_K = max_{i>K} |h(lambda_i)| / min_{j<=K} |h(lambda_j)| over the
/// discrete spectrum; h_bound = max_i |h(lambda_i)|. m_bound is filled in
/// from measured excitations, zero here.
pub fn sharpness_ratio(spec: &Spectrum, f: &GraphFilter, k: usize) -> Result<LowpassProfile> {
    let n = spec.size();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "sharpness ratio needs 1 <= K < N, got K={k}, N={n}"
        )));
    }
    let responses: Vec<f64> = spec
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &l)| f.response_at_index(l, i).abs())
        .collect();
    let pass_min = responses[..k].iter().cloned().fold(f64::INFINITY, f64::min);
    let stop_max = responses[k..].iter().cloned().fold(0.0, f64::max);
    if pass_min <= 0.0 {
        return Err(Error::ZeroPassband);
    }
    let h_bound = responses.iter().cloned().fold(0.0, f64::max);
    Ok(LowpassProfile {
        k,
        eta_k: stop_max / pass_min,
        h_bound,
        m_bound: 0.0,
    })
}

/// Filtered Gaussian signals paired with their excitations.
#[derive(Debug, Clone)]
pub struct SignalMatrix {
    signals: DMatrix<f64>,
    excitations: DMatrix<f64>,
    filter: GraphFilter,
}

impl SignalMatrix {
    /// Construct and check that signals = filter(excitations) to 1e-8.
    pub fn new(
        spec: &Spectrum,
        filter: GraphFilter,
        signals: DMatrix<f64>,
        excitations: DMatrix<f64>,
    ) -> Result<Self> {
        if signals.shape() != excitations.shape() {
            return Err(Error::DimensionMismatch(format!(
                "signals {:?} vs excitations {:?}",
                signals.shape(),
                excitations.shape()
            )));
        }
        let expected = apply_filter(spec, &filter, &excitations)?;
        let err = (&signals - &expected).abs().max();
        if err > 1e-8 {
            return Err(Error::InvariantViolation(format!(
                "signals deviate from filtered excitations by {err:.3e}"
            )));
        }
        Ok(SignalMatrix {
            signals,
            excitations,
            filter,
        })
    }

    pub fn signals(&self) -> &DMatrix<f64> {
        &self.signals
    }

    pub fn excitations(&self) -> &DMatrix<f64> {
        &self.excitations
    }

    pub fn filter(&self) -> &GraphFilter {
        &self.filter
    }

    pub fn n_signals(&self) -> usize {
        self.signals.nrows()
    }

    pub fn n_nodes(&self) -> usize {
        self.signals.ncols()
    }

    /// Largest excitation row norm (the measured energy bound).
    pub fn max_excitation_norm(&self) -> f64 {
        (0..self.excitations.nrows())
            .map(|m| self.excitations.row(m).norm())
            .fold(0.0, f64::max)
    }
}

/// Draw M standard-Gaussian excitations and filter them.
pub fn generate_signals<R: Rng>(
    spec: &Spectrum,
    f: &GraphFilter,
    m: usize,
    rng: &mut R,
) -> Result<SignalMatrix> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one signal".into()));
    }
    f.validate()?;
    let n = spec.size();
    let excitations =
        DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(rng));
    let signals = apply_filter(spec, f, &excitations)?;
    SignalMatrix::new(spec, f.clone(), signals, excitations)
}

/// Split y into its component in span(V_K) and the orthogonal residual.
pub fn decompose_lowpass(
    spec: &Spectrum,
    k: usize,
    y: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = spec.size();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "decompose needs 1 <= K <= N, got K={k}, N={n}"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "signal has {} entries, spectrum has {n}",
            y.len()
        )));
    }
    let vk = spec.leading(k);
    let y_par = &vk * (vk.transpose() * y);
    let y_perp = y - &y_par;
    Ok((y_par, y_perp))
}
