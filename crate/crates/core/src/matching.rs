//! Matching-function estimation and the implied efficiency path.
//!
//! `ln f = ln σ̄ + α ln θ + ε` by ordinary least squares, where θ is V/U in
//! the two-state model and V/S in the three-state model. Given α, matching
//! efficiency is recovered month by month as `σ = f·θ^(-α)`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::flows3::ThreeStatePanel;
use crate::scalar::Scalar;
use crate::series::{MonthDate, MonthRange, MonthlySeries};

/// Elasticity used when none is supplied: the average of the pre- and
/// post-2008 point estimates.
pub const DEFAULT_ALPHA: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Covariance {
    /// Homoskedastic OLS standard errors.
    #[default]
    Conventional,
    /// White heteroskedasticity-robust errors with the n/(n-k) correction (HC1).
    Robust,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingEstimate<T> {
    pub alpha: T,
    pub ln_sigma_bar: T,
    pub se_alpha: T,
    pub se_ln_sigma: T,
    pub sample: MonthRange,
    pub n: usize,
    pub r_squared: T,
    pub covariance: Covariance,
    /// `ε` over the usable months of the sample; missing elsewhere.
    pub residuals: MonthlySeries<T>,
}

/// Flat, serializable summary of one regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    pub sample_start: MonthDate,
    pub sample_end: MonthDate,
    pub n: usize,
    pub ln_sigma_bar: f64,
    pub se_ln_sigma: f64,
    pub p_ln_sigma: f64,
    pub stars_ln_sigma: String,
    pub alpha: f64,
    pub se_alpha: f64,
    pub p_alpha: f64,
    pub stars_alpha: String,
    pub r_squared: f64,
    pub covariance: Covariance,
}

/// Significance marks at the 10/5/1 percent two-sided levels.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

fn two_sided_p(coef: f64, se: f64, df: usize) -> f64 {
    if se == 0.0 {
        return if coef == 0.0 { 1.0 } else { 0.0 };
    }
    let t = (coef / se).abs();
    match StudentsT::new(0.0, 1.0, df as f64) {
        Ok(dist) => 2.0 * (1.0 - dist.cdf(t)),
        Err(_) => f64::NAN,
    }
}

impl<T: Scalar> MatchingEstimate<T> {
    /// Average matching efficiency `σ̄ = exp(ln σ̄)`.
    pub fn sigma_bar(&self) -> T {
        self.ln_sigma_bar.exp()
    }

    pub fn report(&self) -> MatchingReport {
        let df = self.n.saturating_sub(2);
        let (a, sa) = (self.alpha.as_f64(), self.se_alpha.as_f64());
        let (c, sc) = (self.ln_sigma_bar.as_f64(), self.se_ln_sigma.as_f64());
        let p_alpha = two_sided_p(a, sa, df);
        let p_c = two_sided_p(c, sc, df);
        MatchingReport {
            sample_start: self.sample.start,
            sample_end: self.sample.end,
            n: self.n,
            ln_sigma_bar: c,
            se_ln_sigma: sc,
            p_ln_sigma: p_c,
            stars_ln_sigma: significance_stars(p_c).into(),
            alpha: a,
            se_alpha: sa,
            p_alpha,
            stars_alpha: significance_stars(p_alpha).into(),
            r_squared: self.r_squared.as_f64(),
            covariance: self.covariance,
        }
    }
}

/// Regresses `ln f` on a constant and `ln θ` over `sample`.
///
/// Months where either series is missing are skipped; a nonpositive observed
/// value inside the sample is an error.
pub fn estimate_matching<T: Scalar>(
    f: &MonthlySeries<T>,
    tightness: &MonthlySeries<T>,
    sample: MonthRange,
    covariance: Covariance,
) -> Result<MatchingEstimate<T>> {
    let mut obs: Vec<(MonthDate, T, T)> = Vec::new();
    for m in sample.months() {
        let (Some(fv), Some(th)) = (f.get(m), tightness.get(m)) else { continue };
        if fv <= T::zero() {
            return Err(Error::NonPositive { what: "job-finding probability", month: m });
        }
        if th <= T::zero() {
            return Err(Error::NonPositive { what: "tightness", month: m });
        }
        obs.push((m, th.ln(), fv.ln()));
    }
    let n = obs.len();
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    let nt = T::count(n);
    let x_bar = obs.iter().map(|o| o.1).sum::<T>() / nt;
    let y_bar = obs.iter().map(|o| o.2).sum::<T>() / nt;
    let sxx: T = obs.iter().map(|o| (o.1 - x_bar).powi(2)).sum();
    let sxy: T = obs.iter().map(|o| (o.1 - x_bar) * (o.2 - y_bar)).sum();
    let syy: T = obs.iter().map(|o| (o.2 - y_bar).powi(2)).sum();
    if sxx <= T::epsilon() * T::epsilon() * nt {
        return Err(Error::DegenerateDesign("regressor ln(tightness) has zero variance".into()));
    }
    let alpha = sxy / sxx;
    let ln_sigma_bar = y_bar - alpha * x_bar;
    let resid: Vec<T> = obs.iter().map(|o| o.2 - ln_sigma_bar - alpha * o.1).collect();
    let ssr: T = resid.iter().map(|e| *e * *e).sum();
    let dof = T::count(n - 2);

    let (var_alpha, var_const) = match covariance {
        Covariance::Conventional => {
            let s2 = ssr / dof;
            (s2 / sxx, s2 * (T::one() / nt + x_bar * x_bar / sxx))
        }
        Covariance::Robust => {
            // (X'X)^-1 X' diag(e²) X (X'X)^-1 for X = [1, x], scaled by n/(n-2)
            let sx: T = obs.iter().map(|o| o.1).sum();
            let sxx_raw: T = obs.iter().map(|o| o.1 * o.1).sum();
            let det = nt * sxx_raw - sx * sx;
            let inv = [[sxx_raw / det, -sx / det], [-sx / det, nt / det]];
            let mut meat = [[T::zero(); 2]; 2];
            for (o, e) in obs.iter().zip(&resid) {
                let e2 = *e * *e;
                let row = [T::one(), o.1];
                for i in 0..2 {
                    for j in 0..2 {
                        meat[i][j] = meat[i][j] + e2 * row[i] * row[j];
                    }
                }
            }
            let mut cov = [[T::zero(); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = T::zero();
                    for k in 0..2 {
                        for l in 0..2 {
                            acc = acc + inv[i][k] * meat[k][l] * inv[l][j];
                        }
                    }
                    cov[i][j] = acc * nt / dof;
                }
            }
            (cov[1][1], cov[0][0])
        }
    };

    let r_squared = if syy > T::zero() { T::one() - ssr / syy } else { T::one() };
    let residuals = MonthlySeries::from_fn(sample, |m| {
        obs.binary_search_by_key(&m, |o| o.0).ok().map(|k| resid[k])
    });
    Ok(MatchingEstimate {
        alpha,
        ln_sigma_bar,
        se_alpha: var_alpha.max(T::zero()).sqrt(),
        se_ln_sigma: var_const.max(T::zero()).sqrt(),
        sample,
        n,
        r_squared,
        covariance,
        residuals,
    })
}

/// One regression per sample window, each on its own months only.
pub fn estimate_samples<T: Scalar>(
    f: &MonthlySeries<T>,
    tightness: &MonthlySeries<T>,
    samples: &[MonthRange],
    covariance: Covariance,
) -> Result<Vec<MatchingEstimate<T>>> {
    samples.iter().map(|s| estimate_matching(f, tightness, *s, covariance)).collect()
}

/// `σ[t] = f[t]·θ[t]^(-α)`.
pub fn matching_efficiency_path<T: Scalar>(
    f: &MonthlySeries<T>,
    tightness: &MonthlySeries<T>,
    alpha: T,
) -> Result<MonthlySeries<T>> {
    let mut values = Vec::with_capacity(f.len());
    for (m, fv) in f.iter() {
        values.push(match (fv, tightness.get(m)) {
            (Some(fv), Some(th)) => {
                if fv <= T::zero() {
                    return Err(Error::NonPositive { what: "job-finding probability", month: m });
                }
                if th <= T::zero() {
                    return Err(Error::NonPositive { what: "tightness", month: m });
                }
                Some(fv * th.powf(-alpha))
            }
            _ => None,
        });
    }
    Ok(MonthlySeries::new(f.start(), values))
}

/// `θ = V / S` with `S` the effective searcher pool.
pub fn three_state_tightness<T: Scalar>(
    panel: &ThreeStatePanel<T>,
    v: &MonthlySeries<T>,
) -> Result<MonthlySeries<T>> {
    let s = &panel.aggregates()?.searchers;
    let mut values = Vec::with_capacity(s.len());
    for (m, sv) in s.iter() {
        values.push(match (sv, v.get(m)) {
            (Some(sv), Some(vv)) => {
                if sv <= T::zero() {
                    return Err(Error::NonPositive { what: "searcher pool", month: m });
                }
                Some(vv / sv)
            }
            _ => None,
        });
    }
    Ok(MonthlySeries::new(s.start(), values))
}
