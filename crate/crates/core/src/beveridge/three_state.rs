//! Searcher-based analogue of the vacancy identity.
//!
//! ```text
//! V[t] = [ ((1 − S − Ñ)x − ΔS[t+1] − ΔÑ[t+1]) / (σ S^(1−α)) ]^(1/α)
//! ```
//!
//! with `S = U + ξᴺN`, `Ñ = (1 − ξᴺ)N`, `x = eu + en`. The numerator equals
//! total hires on a stock-consistent panel.

use serde::Serialize;

use super::{relative_to, vacancies_from_inflow, VacancyPath};
use crate::error::{Error, Result};
use crate::flows3::ThreeStatePanel;
use crate::scalar::Scalar;
use crate::series::{MonthDate, MonthRange, MonthlySeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeStateApproximationPoint<T> {
    pub searchers: T,
    /// May be zero, in which case the non-searcher terms vanish.
    pub non_searchers: T,
    pub separations: T,
    pub sigma: T,
    pub alpha: T,
    /// Steady-state vacancies at the point.
    pub v0: T,
}

impl<T: Scalar> ThreeStateApproximationPoint<T> {
    pub fn new(searchers: T, non_searchers: T, separations: T, sigma: T, alpha: T) -> Result<Self> {
        let (zero, one) = (T::zero(), T::one());
        if !(searchers > zero && non_searchers >= zero && searchers + non_searchers < one) {
            return Err(Error::InvalidArgument(format!(
                "need S0 > 0, N0 >= 0, S0 + N0 < 1; got S0={searchers}, N0={non_searchers}"
            )));
        }
        if separations <= zero || sigma <= zero || alpha <= zero || alpha >= one {
            return Err(Error::InvalidArgument(format!(
                "need x0 > 0, sigma0 > 0, alpha in (0,1); got x0={separations}, sigma0={sigma}, alpha={alpha}"
            )));
        }
        let v0 = vacancies_from_inflow((one - searchers - non_searchers) * separations, sigma, searchers, alpha)
            .expect("positive employment inflow");
        Ok(Self { searchers, non_searchers, separations, sigma, alpha, v0 })
    }

    /// Means of `S`, `Ñ`, `x` and `σ` over `window`.
    pub fn from_sample_means(
        panel: &ThreeStatePanel<T>,
        sigma: &MonthlySeries<T>,
        window: MonthRange,
        alpha: T,
    ) -> Result<Self> {
        let agg = panel.aggregates()?;
        let mean = |x: &MonthlySeries<T>, name: &str| {
            x.mean_over(window).ok_or_else(|| Error::EmptySample(format!("no {name} observations in {window}")))
        };
        Self::new(
            mean(&agg.searchers, "S")?,
            mean(&agg.non_searchers, "N~")?,
            mean(&agg.separations, "x")?,
            mean(sigma, "sigma")?,
            alpha,
        )
    }
}

/// Exact searcher-based vacancies. Requires derived aggregates.
pub fn three_state_exact_vacancies<T: Scalar>(
    panel: &ThreeStatePanel<T>,
    alpha: T,
    sigma: &MonthlySeries<T>,
) -> Result<VacancyPath<T>> {
    let agg = panel.aggregates()?;
    let (s, nt, x) = (&agg.searchers, &agg.non_searchers, &agg.separations);
    let mut values = Vec::with_capacity(s.len());
    let mut infeasible = Vec::new();
    for (m, st) in s.iter() {
        let inputs = (|| Some((st?, s.get(m.succ())?, nt.get(m)?, nt.get(m.succ())?, x.get(m)?, sigma.get(m)?)))();
        let Some((st, s1, n0, n1, xt, sg)) = inputs else {
            values.push(None);
            continue;
        };
        if st <= T::zero() {
            return Err(Error::NonPositive { what: "searcher pool", month: m });
        }
        if sg <= T::zero() {
            return Err(Error::NonPositive { what: "matching efficiency", month: m });
        }
        let inflow = (T::one() - st - n0) * xt - (s1 - st) - (n1 - n0);
        let v = vacancies_from_inflow(inflow, sg, st, alpha);
        if v.is_none() {
            infeasible.push(m);
        }
        values.push(v);
    }
    Ok(VacancyPath { series: MonthlySeries::new(s.start(), values), infeasible })
}

/// Coefficients of the three-state log-linear curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeStateCoefficients<T> {
    pub matching: T,
    pub searchers: T,
    pub searcher_dynamics: T,
    pub non_searchers: T,
    pub non_searcher_dynamics: T,
    pub separations: T,
}

impl<T: Scalar> ThreeStateApproximationPoint<T> {
    pub fn coefficients(&self) -> ThreeStateCoefficients<T> {
        let one = T::one();
        let a = self.alpha;
        let e0 = one - self.searchers - self.non_searchers;
        let x0 = self.separations;
        ThreeStateCoefficients {
            matching: -one / a,
            searchers: -((one - a) / a + self.searchers / (a * e0)),
            searcher_dynamics: -self.searchers / (a * e0 * x0),
            non_searchers: -self.non_searchers / (a * e0),
            non_searcher_dynamics: -self.non_searchers / (a * e0 * x0),
            separations: one / a,
        }
    }
}

/// Per-term paths of the three-state log-linear curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeStateLoglinear<T> {
    /// `ln V0`.
    pub intercept: T,
    pub searchers: MonthlySeries<T>,
    pub searcher_dynamics: MonthlySeries<T>,
    pub non_searchers: MonthlySeries<T>,
    pub non_searcher_dynamics: MonthlySeries<T>,
    pub separations: MonthlySeries<T>,
    pub matching: MonthlySeries<T>,
    /// Intercept plus every term.
    pub ln_v: MonthlySeries<T>,
}

impl<T: Scalar> ThreeStateLoglinear<T> {
    /// Named shifter terms (everything except the intercept and the
    /// searcher level), each re-based to zero at `reference`.
    pub fn shifters(&self, reference: MonthDate) -> Result<Vec<(&'static str, MonthlySeries<T>)>> {
        [
            ("searcher_dynamics", &self.searcher_dynamics),
            ("non_searchers", &self.non_searchers),
            ("non_searcher_dynamics", &self.non_searcher_dynamics),
            ("separations", &self.separations),
            ("matching", &self.matching),
        ]
        .into_iter()
        .map(|(name, s)| Ok((name, relative_to(s, reference)?)))
        .collect()
    }
}

pub fn three_state_loglinear<T: Scalar>(
    panel: &ThreeStatePanel<T>,
    sigma: &MonthlySeries<T>,
    point: &ThreeStateApproximationPoint<T>,
) -> Result<ThreeStateLoglinear<T>> {
    let agg = panel.aggregates()?;
    let (s, nt, x) = (&agg.searchers, &agg.non_searchers, &agg.separations);
    let c = point.coefficients();
    let intercept = point.v0.ln();
    let has_pool = point.non_searchers > T::zero();
    let positive = |v: T, what: &'static str, m: MonthDate| {
        if v > T::zero() {
            Ok(v)
        } else {
            Err(Error::NonPositive { what, month: m })
        }
    };
    let pool = |v: T, m: MonthDate| {
        if v == T::zero() {
            Err(Error::ZeroNonSearcherPool(m))
        } else {
            positive(v, "non-searcher pool", m)
        }
    };

    let n = s.len();
    let mut cols: [Vec<Option<T>>; 7] = std::array::from_fn(|_| Vec::with_capacity(n));
    for (m, st) in s.iter() {
        let inputs = (|| Some((st?, s.get(m.succ())?, nt.get(m)?, nt.get(m.succ())?, x.get(m)?, sigma.get(m)?)))();
        let Some((st, s1, n0, n1, xt, sg)) = inputs else {
            cols.iter_mut().for_each(|c| c.push(None));
            continue;
        };
        let st = positive(st, "searcher pool", m)?;
        let s1 = positive(s1, "searcher pool", m.succ())?;
        let xt = positive(xt, "separation probability", m)?;
        let sg = positive(sg, "matching efficiency", m)?;
        let (level_n, dyn_n) = if has_pool {
            let n0 = pool(n0, m)?;
            let n1 = pool(n1, m.succ())?;
            (
                c.non_searchers * (n0.ln() - point.non_searchers.ln()),
                c.non_searcher_dynamics * (n1.ln() - n0.ln()),
            )
        } else {
            (T::zero(), T::zero())
        };
        let terms = [
            c.searchers * (st.ln() - point.searchers.ln()),
            c.searcher_dynamics * (s1.ln() - st.ln()),
            level_n,
            dyn_n,
            c.separations * (xt.ln() - point.separations.ln()),
            c.matching * (sg.ln() - point.sigma.ln()),
        ];
        let total = terms.iter().fold(intercept, |acc, &t| acc + t);
        for (col, v) in cols.iter_mut().zip(terms.into_iter().chain([total])) {
            col.push(Some(v));
        }
    }
    let [searchers, searcher_dynamics, non_searchers, non_searcher_dynamics, separations, matching, ln_v] =
        cols.map(|v| MonthlySeries::new(s.start(), v));
    Ok(ThreeStateLoglinear {
        intercept,
        searchers,
        searcher_dynamics,
        non_searchers,
        non_searcher_dynamics,
        separations,
        matching,
        ln_v,
    })
}
