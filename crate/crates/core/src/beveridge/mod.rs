//! The vacancy identity implied by the matching function and the
//! unemployment law of motion, its steady-state special case, and its
//! first-order log-linearization around an approximation point.
//!
//! Exact identity (two-state):
//!
//! ```text
//! V[t] = [ (s[t](1 − U[t]) − ΔU[t+1]) / (σ[t] U[t]^(1−α)) ]^(1/α)
//! ```
//!
//! Log-linear form around `(Ū, s̄, σ̄, ΔU = 0)`:
//!
//! ```text
//! ln V ≈ ln V̄ + slope·(ln U − ln Ū)
//!        − Ū/(α s̄ (1−Ū))·Δln U[t+1]        dynamics
//!        + 1/(α (1−Ū))·(ln s − ln s̄)        separations
//!        − 1/α·(ln σ − ln σ̄)                matching
//! slope = −(Ū/(α(1−Ū)) + (1−α)/α)
//! ```

pub mod three_state;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{MonthDate, MonthRange, MonthlySeries};

pub use three_state::{
    three_state_exact_vacancies, three_state_loglinear, ThreeStateApproximationPoint, ThreeStateLoglinear,
};

/// `[net_inflow / (σ·searchers^(1−α))]^(1/α)`, or `None` when the net
/// inflow is not positive.
pub(crate) fn vacancies_from_inflow<T: Scalar>(net_inflow: T, sigma: T, searchers: T, alpha: T) -> Option<T> {
    (net_inflow > T::zero()).then(|| (net_inflow / (sigma * searchers.powf(T::one() - alpha))).powf(alpha.recip()))
}

/// Exact vacancy rate for one month. `None` when `s(1−U) − ΔU ≤ 0`.
pub fn vacancy_identity<T: Scalar>(u: T, du_next: T, s: T, sigma: T, alpha: T) -> Option<T> {
    vacancies_from_inflow(s * (T::one() - u) - du_next, sigma, u, alpha)
}

/// Steady-state vacancy rate: the identity with `ΔU = 0`.
pub fn steady_state_vacancies<T: Scalar>(u: T, s: T, sigma: T, alpha: T) -> Option<T> {
    vacancy_identity(u, T::zero(), s, sigma, alpha)
}

/// A vacancy path with the months where the identity had no solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VacancyPath<T> {
    pub series: MonthlySeries<T>,
    /// Months whose net-inflow numerator was not positive.
    pub infeasible: Vec<MonthDate>,
}

impl<T: Scalar> VacancyPath<T> {
    pub fn ln(&self) -> MonthlySeries<T> {
        self.series.ln()
    }
}

/// Applies the exact identity month by month over `u`'s range. Months
/// without a successor `U` are missing; infeasible months are missing and
/// listed.
pub fn exact_vacancies<T: Scalar>(
    u: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    sigma: &MonthlySeries<T>,
    alpha: T,
) -> Result<VacancyPath<T>> {
    let mut values = Vec::with_capacity(u.len());
    let mut infeasible = Vec::new();
    for (m, ut) in u.iter() {
        let inputs = (|| Some((ut?, u.get(m.succ())?, s.get(m)?, sigma.get(m)?)))();
        let Some((ut, u1, st, sg)) = inputs else {
            values.push(None);
            continue;
        };
        if ut <= T::zero() || ut >= T::one() {
            return Err(Error::InvalidArgument(format!("unemployment share {ut} at {m} outside (0,1)")));
        }
        if sg <= T::zero() {
            return Err(Error::NonPositive { what: "matching efficiency", month: m });
        }
        let v = vacancy_identity(ut, u1 - ut, st, sg, alpha);
        if v.is_none() {
            infeasible.push(m);
        }
        values.push(v);
    }
    Ok(VacancyPath { series: MonthlySeries::new(u.start(), values), infeasible })
}

/// Expansion point of the log-linear curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximationPoint<T> {
    pub u_bar: T,
    pub s_bar: T,
    pub sigma_bar: T,
    pub alpha: T,
    /// Steady-state vacancies at `(Ū, s̄, σ̄)`.
    pub v_bar: T,
}

/// Coefficients of the log-linear curve at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoglinearCoefficients<T> {
    /// On `ln U − ln Ū`.
    pub slope: T,
    /// On `Δln U[t+1]`.
    pub dynamics: T,
    /// On `ln s − ln s̄`.
    pub separations: T,
    /// On `ln σ − ln σ̄`.
    pub matching: T,
}

impl<T: Scalar> ApproximationPoint<T> {
    pub fn new(u_bar: T, s_bar: T, sigma_bar: T, alpha: T) -> Result<Self> {
        let unit = |x: T| x > T::zero() && x < T::one();
        if !unit(u_bar) || !unit(s_bar) || !unit(alpha) {
            return Err(Error::InvalidArgument(format!(
                "approximation point needs U, s, alpha in (0,1); got U={u_bar}, s={s_bar}, alpha={alpha}"
            )));
        }
        if sigma_bar <= T::zero() {
            return Err(Error::InvalidArgument(format!("sigma_bar must be positive, got {sigma_bar}")));
        }
        let v_bar = steady_state_vacancies(u_bar, s_bar, sigma_bar, alpha).expect("positive steady-state inflow");
        Ok(Self { u_bar, s_bar, sigma_bar, alpha, v_bar })
    }

    /// Post-2007 sample means: Ū = 0.068, s̄ = 0.020, σ̄ = 0.359, with α = 0.3.
    pub fn post_2007() -> Self {
        Self::new(T::lit(0.068), T::lit(0.020), T::lit(0.359), T::lit(0.3)).expect("valid default point")
    }

    /// Local means of `U`, `s` and `σ` over `window`.
    pub fn from_sample_means(
        u: &MonthlySeries<T>,
        s: &MonthlySeries<T>,
        sigma: &MonthlySeries<T>,
        window: MonthRange,
        alpha: T,
    ) -> Result<Self> {
        let mean = |x: &MonthlySeries<T>, name: &str| {
            x.mean_over(window).ok_or_else(|| Error::EmptySample(format!("no {name} observations in {window}")))
        };
        Self::new(mean(u, "U")?, mean(s, "s")?, mean(sigma, "sigma")?, alpha)
    }

    pub fn coefficients(&self) -> LoglinearCoefficients<T> {
        let (u, s, a) = (self.u_bar, self.s_bar, self.alpha);
        let one = T::one();
        LoglinearCoefficients {
            slope: loglinear_slope(self),
            dynamics: -u / (a * s * (one - u)),
            separations: one / (a * (one - u)),
            matching: -one / a,
        }
    }
}

/// Slope of the log-linear steady-state curve, `−(Ū/(α(1−Ū)) + (1−α)/α)`.
pub fn loglinear_slope<T: Scalar>(point: &ApproximationPoint<T>) -> T {
    let (u, a) = (point.u_bar, point.alpha);
    let one = T::one();
    -(u / (a * (one - u)) + (one - a) / a)
}

/// Steady-state curve over a grid of unemployment rates.
pub fn steady_state_curve<T: Scalar>(u_grid: &[T], point: &ApproximationPoint<T>) -> Result<Vec<(T, T)>> {
    u_grid
        .iter()
        .map(|&u| {
            if u <= T::zero() || u >= T::one() {
                return Err(Error::InvalidArgument(format!("grid value {u} outside (0,1)")));
            }
            let v = steady_state_vacancies(u, point.s_bar, point.sigma_bar, point.alpha)
                .expect("steady-state inflow positive on (0,1)");
            Ok((u, v))
        })
        .collect()
}

/// Per-month components of the log-linear curve, before any normalization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoglinearPath<T> {
    /// `ln V̄ + slope·(ln U − ln Ū)`: the approximate steady-state curve.
    pub curve: MonthlySeries<T>,
    pub dynamics: MonthlySeries<T>,
    pub separations: MonthlySeries<T>,
    pub matching: MonthlySeries<T>,
    /// Sum of the four components.
    pub ln_v: MonthlySeries<T>,
}

fn require_positive<T: Scalar>(x: T, what: &'static str, month: MonthDate) -> Result<T> {
    if x > T::zero() {
        Ok(x)
    } else {
        Err(Error::NonPositive { what, month })
    }
}

/// Evaluates every component of the log-linear curve over `u`'s range.
pub fn loglinear_terms<T: Scalar>(
    u: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    sigma: &MonthlySeries<T>,
    point: &ApproximationPoint<T>,
) -> Result<LoglinearPath<T>> {
    let c = point.coefficients();
    let (ln_u_bar, ln_s_bar, ln_sigma_bar, ln_v_bar) =
        (point.u_bar.ln(), point.s_bar.ln(), point.sigma_bar.ln(), point.v_bar.ln());
    let n = u.len();
    let mut cols: [Vec<Option<T>>; 5] = std::array::from_fn(|_| Vec::with_capacity(n));
    for (m, ut) in u.iter() {
        let inputs = (|| Some((ut?, u.get(m.succ())?, s.get(m)?, sigma.get(m)?)))();
        let Some((ut, u1, st, sg)) = inputs else {
            cols.iter_mut().for_each(|c| c.push(None));
            continue;
        };
        let ut = require_positive(ut, "unemployment", m)?;
        let u1 = require_positive(u1, "unemployment", m.succ())?;
        let st = require_positive(st, "separation probability", m)?;
        let sg = require_positive(sg, "matching efficiency", m)?;
        let curve = ln_v_bar + c.slope * (ut.ln() - ln_u_bar);
        let dynamics = c.dynamics * (u1.ln() - ut.ln());
        let separations = c.separations * (st.ln() - ln_s_bar);
        let matching = c.matching * (sg.ln() - ln_sigma_bar);
        for (col, v) in cols.iter_mut().zip([curve, dynamics, separations, matching, curve + dynamics + separations + matching]) {
            col.push(Some(v));
        }
    }
    let [curve, dynamics, separations, matching, ln_v] = cols.map(|v| MonthlySeries::new(u.start(), v));
    Ok(LoglinearPath { curve, dynamics, separations, matching, ln_v })
}

/// Log-linear approximation of `ln V[t]`.
pub fn loglinear_vacancies<T: Scalar>(
    u: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    sigma: &MonthlySeries<T>,
    point: &ApproximationPoint<T>,
) -> Result<MonthlySeries<T>> {
    Ok(loglinear_terms(u, s, sigma, point)?.ln_v)
}

/// Shifter terms of the log-linear curve, each re-based to zero at
/// `reference_month`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShifterPath<T> {
    pub dynamics: MonthlySeries<T>,
    pub separations: MonthlySeries<T>,
    pub matching: MonthlySeries<T>,
    pub net: MonthlySeries<T>,
    pub reference_month: MonthDate,
}

/// `x[t] − x[reference]`.
pub fn relative_to<T: Scalar>(x: &MonthlySeries<T>, reference: MonthDate) -> Result<MonthlySeries<T>> {
    let base = x.get(reference).ok_or(Error::ReferenceMonthMissing(reference))?;
    Ok(x.map(|v| v - base))
}

pub fn shifter_paths<T: Scalar>(
    u: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    sigma: &MonthlySeries<T>,
    point: &ApproximationPoint<T>,
    reference_month: MonthDate,
) -> Result<ShifterPath<T>> {
    let terms = loglinear_terms(u, s, sigma, point)?;
    let dynamics = relative_to(&terms.dynamics, reference_month)?;
    let separations = relative_to(&terms.separations, reference_month)?;
    let matching = relative_to(&terms.matching, reference_month)?;
    let net = dynamics.tabulate(|m| Some(dynamics.get(m)? + separations.get(m)? + matching.get(m)?));
    Ok(ShifterPath { dynamics, separations, matching, net, reference_month })
}
