//! Efficient unemployment from the Beveridge tradeoff.
//!
//! Treating the Beveridge curve as isoelastic through the observed point,
//! `v = v_t (u / u_t)^(−ε)`, a planner minimizing `ζ·u + κ·v` picks
//!
//! ```text
//! u* = (κ ε v_t u_t^ε / ζ)^(1/(1+ε))
//! ```
//!
//! so `u* = u_t` exactly when `ζ = κ ε v_t / u_t`. `u*` rises with `κ`,
//! falls with `ζ`, depends on costs only through `κ/ζ`, and rises with `ε`
//! while `ln(ε κ v / (ζ u)) < 1 + 1/ε` (see [`elasticity_monotone`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::MonthlySeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    /// First-order condition along an isoelastic curve through the data.
    #[default]
    IsoelasticTradeoff,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("isoelastic-tradeoff")
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isoelastic-tradeoff" => Ok(Formula::IsoelasticTradeoff),
            other => Err(Error::InvalidArgument(format!("unknown efficiency formula {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCalibration<T> {
    /// Absolute log-log slope of the Beveridge curve.
    pub beveridge_elasticity: T,
    /// Social cost of a vacancy.
    pub vacancy_cost: T,
    /// Social cost of an unemployed worker.
    pub unemployment_cost: T,
    #[serde(default)]
    pub formula: Formula,
}

/// Elasticity in the reference calibration.
pub const MS_ELASTICITY: f64 = 0.9;
/// Elasticity implied by the steady-state slope at α = 0.3.
pub const STEEP_ELASTICITY: f64 = 2.33;
pub const MS_VACANCY_COST: f64 = 0.92;
/// One minus the nonwork value 0.26.
pub const MS_UNEMPLOYMENT_COST: f64 = 0.74;

impl<T: Scalar> EfficiencyCalibration<T> {
    pub fn new(beveridge_elasticity: T, vacancy_cost: T, unemployment_cost: T) -> Result<Self> {
        if !(beveridge_elasticity > T::zero() && vacancy_cost > T::zero() && unemployment_cost > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "elasticity and costs must be positive; got eps={beveridge_elasticity}, \
                 vacancy_cost={vacancy_cost}, unemployment_cost={unemployment_cost}"
            )));
        }
        Ok(Self { beveridge_elasticity, vacancy_cost, unemployment_cost, formula: Formula::IsoelasticTradeoff })
    }

    /// Reference costs with the given elasticity.
    pub fn ms_costs(beveridge_elasticity: T) -> Result<Self> {
        Self::new(beveridge_elasticity, T::lit(MS_VACANCY_COST), T::lit(MS_UNEMPLOYMENT_COST))
    }

    /// Reference costs, ε = 0.9.
    pub fn ms() -> Self {
        Self::ms_costs(T::lit(MS_ELASTICITY)).expect("valid preset")
    }

    /// Reference costs, ε = 2.33.
    pub fn steep() -> Self {
        Self::ms_costs(T::lit(STEEP_ELASTICITY)).expect("valid preset")
    }

    pub fn with_elasticity(self, beveridge_elasticity: T) -> Result<Self> {
        Self::new(beveridge_elasticity, self.vacancy_cost, self.unemployment_cost)
    }

    fn rate(&self, u: T, v: T) -> T {
        let eps = self.beveridge_elasticity;
        (self.vacancy_cost * eps * v * u.powf(eps) / self.unemployment_cost).powf((T::one() + eps).recip())
    }
}

/// `u*` for a single `(u, v)` point.
pub fn efficient_unemployment_rate<T: Scalar>(u: T, v: T, cal: &EfficiencyCalibration<T>) -> Result<T> {
    if !(u > T::zero() && v > T::zero()) {
        return Err(Error::InvalidArgument(format!("u and v must be positive; got u={u}, v={v}")));
    }
    Ok(cal.rate(u, v))
}

/// Whether `u*` is increasing in `ε` at `(u, v)` under `cal`'s costs.
pub fn elasticity_monotone<T: Scalar>(u: T, v: T, cal: &EfficiencyCalibration<T>) -> bool {
    let eps = cal.beveridge_elasticity;
    let a = cal.vacancy_cost * v / (cal.unemployment_cost * u);
    (a * eps).ln() < T::one() + eps.recip()
}

pub fn efficient_unemployment<T: Scalar>(
    u: &MonthlySeries<T>,
    v: &MonthlySeries<T>,
    cal: &EfficiencyCalibration<T>,
) -> Result<MonthlySeries<T>> {
    let mut values = Vec::with_capacity(u.len());
    for (m, ut) in u.iter() {
        let (Some(ut), Some(vt)) = (ut, v.get(m)) else {
            values.push(None);
            continue;
        };
        if ut <= T::zero() {
            return Err(Error::NonPositive { what: "unemployment", month: m });
        }
        if vt <= T::zero() {
            return Err(Error::NonPositive { what: "vacancies", month: m });
        }
        values.push(Some(cal.rate(ut, vt)));
    }
    Ok(MonthlySeries::new(u.start(), values))
}

/// `u − u*`.
pub fn unemployment_gap<T: Scalar>(u: &MonthlySeries<T>, u_star: &MonthlySeries<T>) -> MonthlySeries<T> {
    u.zip_with(u_star, |a, b| a - b)
}
