//! Two-state flow probabilities built from observed stocks.
//!
//! The job-finding probability comes from short-term unemployment; the EU
//! probability is then whatever makes the unemployment law of motion
//! `U[t+1] = s[t](1 - U[t]) - f[t] U[t] + U[t]` hold exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::scalar::Scalar;
use crate::series::{MonthDate, MonthlySeries};

pub const U_RATE: &str = "u_rate";
pub const V_RATE: &str = "v_rate";
pub const U_SHORT: &str = "u_short";

/// A constructed series plus the months whose values fell outside the unit
/// interval. Flagged values are kept as computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flagged<T> {
    pub series: MonthlySeries<T>,
    pub out_of_range: Vec<MonthDate>,
}

impl<T: Scalar> Flagged<T> {
    fn from_series(series: MonthlySeries<T>) -> Self {
        let out_of_range =
            series.observed().filter(|(_, v)| *v < T::zero() || *v > T::one()).map(|(m, _)| m).collect();
        Self { series, out_of_range }
    }

    /// Copy clamped to [0, 1]. Breaks the law-of-motion round trip for
    /// flagged months.
    pub fn clamped(&self) -> MonthlySeries<T> {
        self.series.map(|v| v.max(T::zero()).min(T::one()))
    }

    pub fn is_clean(&self) -> bool {
        self.out_of_range.is_empty()
    }
}

/// `f[t] = 1 - (U[t+1] - Us[t+1]) / U[t]`. The final month, or any month
/// whose successor is unobserved, is missing.
pub fn job_finding_probability<T: Scalar>(
    u: &MonthlySeries<T>,
    u_short: &MonthlySeries<T>,
) -> Result<Flagged<T>> {
    let mut values = Vec::with_capacity(u.len());
    for (m, ut) in u.iter() {
        let next = m.succ();
        let v = match (ut, u.get(next), u_short.get(next)) {
            (Some(ut), Some(u1), Some(us1)) => {
                if ut == T::zero() {
                    return Err(Error::ZeroUnemployment(m));
                }
                Some(T::one() - (u1 - us1) / ut)
            }
            _ => None,
        };
        values.push(v);
    }
    Ok(Flagged::from_series(MonthlySeries::new(u.start(), values)))
}

/// `s[t] = (U[t+1] - U[t] + f[t] U[t]) / (1 - U[t])`.
pub fn implied_separation_probability<T: Scalar>(
    u: &MonthlySeries<T>,
    f: &MonthlySeries<T>,
) -> Result<Flagged<T>> {
    let mut values = Vec::with_capacity(u.len());
    for (m, ut) in u.iter() {
        let v = match (ut, u.get(m.succ()), f.get(m)) {
            (Some(ut), Some(u1), Some(ft)) => {
                if ut >= T::one() {
                    return Err(Error::NonPositive { what: "employment share 1 - U", month: m });
                }
                Some((u1 - ut + ft * ut) / (T::one() - ut))
            }
            _ => None,
        };
        values.push(v);
    }
    Ok(Flagged::from_series(MonthlySeries::new(u.start(), values)))
}

/// Aligned stocks and the flows constructed from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStatePanel<T> {
    pub u: MonthlySeries<T>,
    pub v: MonthlySeries<T>,
    pub u_short: MonthlySeries<T>,
    pub f: MonthlySeries<T>,
    pub s: MonthlySeries<T>,
    /// Months where `f` or `s` left [0, 1].
    pub flagged: Vec<MonthDate>,
}

impl<T: Scalar> TwoStatePanel<T> {
    /// Builds `f` and `s` from the three observed stocks.
    pub fn construct(u: MonthlySeries<T>, v: MonthlySeries<T>, u_short: MonthlySeries<T>) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (m, x) in u.observed() {
            if x <= T::zero() || x >= T::one() {
                return Err(Error::InvalidArgument(format!("unemployment share {x} at {m} outside (0,1)")));
            }
        }
        let f = job_finding_probability(&u, &u_short)?;
        let s = implied_separation_probability(&u, &f.series)?;
        let mut flagged: Vec<MonthDate> = f.out_of_range.iter().chain(&s.out_of_range).copied().collect();
        flagged.sort();
        flagged.dedup();
        Ok(Self { u, v, u_short, f: f.series, s: s.series, flagged })
    }

    /// V / U.
    pub fn tightness(&self) -> MonthlySeries<T> {
        self.v.window(self.u.range().expect("constructed panel is non-empty")).zip_with(&self.u, |v, u| v / u)
    }
}

impl TwoStatePanel<f64> {
    /// Reads `u_rate`, `v_rate`, `u_short` (shares of the labor force).
    pub fn from_frame(frame: &Frame) -> Result<Self> {
        frame.require(&[U_RATE, V_RATE, U_SHORT])?;
        Self::construct(frame.column(U_RATE)?.clone(), frame.column(V_RATE)?.clone(), frame.column(U_SHORT)?.clone())
    }
}

/// Forward recursion of the law of motion from `u0`, for round-trip checks.
pub fn simulate_law_of_motion<T: Scalar>(
    u0: T,
    f: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    months: usize,
) -> Result<MonthlySeries<T>> {
    let mut out = Vec::with_capacity(months);
    let mut u = u0;
    out.push(Some(u));
    for k in 1..months {
        let m = f.start().add_months(k as i64 - 1);
        let ft = f.require(m, "f")?;
        let st = s.require(m, "s")?;
        u = st * (T::one() - u) - ft * u + u;
        out.push(Some(u));
    }
    Ok(MonthlySeries::new(f.start(), out))
}
