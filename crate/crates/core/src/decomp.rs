//! Vertical Beveridge-curve shift between a downswing and a later upswing,
//! and its attribution to dynamics, separations and matching efficiency.
//!
//! Every downswing month `t` is matched to the upswing by linear
//! interpolation in the level of `U` on the first bracketing pair of upswing
//! months; any series is carried to the upswing with the same weights. All
//! shifts are in log-vacancy units.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::beveridge::{loglinear_terms, vacancy_identity, ApproximationPoint, VacancyPath};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{first_bracket, MonthDate, MonthlySeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwingBounds {
    pub down_start: MonthDate,
    pub down_end: MonthDate,
    pub up_start: MonthDate,
    /// Last admissible upswing month; `None` runs until `U` first falls
    /// below the downswing minimum.
    pub up_end: Option<MonthDate>,
}

impl Default for SwingBounds {
    fn default() -> Self {
        Self {
            down_start: MonthDate::ym(2007, 4),
            down_end: MonthDate::ym(2009, 6),
            up_start: MonthDate::ym(2010, 4),
            up_end: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwingPoint<T> {
    pub month: MonthDate,
    pub u: T,
    pub ln_v: T,
}

/// A downswing month and its position on the upswing polyline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwingMatch<T> {
    pub down: MonthDate,
    pub u: T,
    pub up_lo: MonthDate,
    pub up_hi: MonthDate,
    /// `U[down] = (1−w)·U[up_lo] + w·U[up_hi]`.
    pub weight: T,
}

impl<T: Scalar> SwingMatch<T> {
    /// Value of `y` carried to the upswing. Knots with zero weight are not
    /// evaluated.
    pub fn interpolate(&self, y: impl Fn(MonthDate) -> Option<T>) -> Option<T> {
        let w = self.weight;
        if w == T::zero() {
            y(self.up_lo)
        } else if w == T::one() {
            y(self.up_hi)
        } else {
            let (a, b) = (y(self.up_lo)?, y(self.up_hi)?);
            Some(a + w * (b - a))
        }
    }

    /// `y` on the upswing minus `y` at the downswing month.
    pub fn difference(&self, y: impl Fn(MonthDate) -> Option<T>) -> Option<T> {
        Some(self.interpolate(&y)? - y(self.down)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwingSamples<T> {
    pub bounds: SwingBounds,
    pub downswing: Vec<SwingPoint<T>>,
    /// In temporal order.
    pub upswing: Vec<SwingPoint<T>>,
    pub matches: Vec<SwingMatch<T>>,
    /// Downswing months outside the upswing's `U` range.
    pub dropped: Vec<MonthDate>,
}

pub fn build_swing_samples<T: Scalar>(
    u: &MonthlySeries<T>,
    v: &MonthlySeries<T>,
    bounds: SwingBounds,
) -> Result<SwingSamples<T>> {
    if bounds.down_end < bounds.down_start || bounds.up_start <= bounds.down_end {
        return Err(Error::InvalidArgument(format!(
            "swing dates must satisfy down_start <= down_end < up_start; got {}, {}, {}",
            bounds.down_start, bounds.down_end, bounds.up_start
        )));
    }
    let point = |m: MonthDate| -> Option<SwingPoint<T>> {
        let (ut, vt) = (u.get(m)?, v.get(m)?);
        (vt > T::zero()).then(|| SwingPoint { month: m, u: ut, ln_v: vt.ln() })
    };
    let mut downswing = Vec::new();
    let mut m = bounds.down_start;
    while m <= bounds.down_end {
        downswing.extend(point(m));
        m = m.succ();
    }
    if downswing.is_empty() {
        return Err(Error::EmptySample(format!("no downswing observations in {}:{}", bounds.down_start, bounds.down_end)));
    }
    let floor = downswing.iter().map(|p| p.u).fold(T::infinity(), T::min);

    let mut upswing = Vec::new();
    let last = u.end().min(v.end());
    let mut m = bounds.up_start;
    while m <= last && bounds.up_end.is_none_or(|end| m <= end) {
        let Some(p) = point(m) else { break };
        upswing.push(p);
        if bounds.up_end.is_none() && p.u < floor {
            break;
        }
        m = m.succ();
    }
    if upswing.is_empty() {
        return Err(Error::EmptySample(format!("no upswing observations from {}", bounds.up_start)));
    }

    let up_u: Vec<T> = upswing.iter().map(|p| p.u).collect();
    let mut matches = Vec::new();
    let mut dropped = Vec::new();
    for p in &downswing {
        match first_bracket(&up_u, p.u) {
            Some((k, w)) => matches.push(SwingMatch {
                down: p.month,
                u: p.u,
                up_lo: upswing[k].month,
                up_hi: upswing[(k + 1).min(upswing.len() - 1)].month,
                weight: w,
            }),
            None => dropped.push(p.month),
        }
    }
    Ok(SwingSamples { bounds, downswing, upswing, matches, dropped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerticalShift<T> {
    pub month: MonthDate,
    pub u: T,
    pub shift: T,
}

/// Interpolated upswing `ln V` minus downswing `ln V`, per matched month.
pub fn vertical_shift<T: Scalar>(samples: &SwingSamples<T>) -> Vec<VerticalShift<T>> {
    let ln_v = |m: MonthDate| {
        samples.downswing.iter().chain(&samples.upswing).find(|p| p.month == m).map(|p| p.ln_v)
    };
    samples
        .matches
        .iter()
        .filter_map(|mt| Some(VerticalShift { month: mt.down, u: mt.u, shift: mt.difference(ln_v)? }))
        .collect()
}

/// A shifter of the vacancy identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Margin {
    /// Out-of-steady-state dynamics, `ΔU[t+1]`.
    Dynamics,
    /// Separation probability `s`.
    Separations,
    /// Matching efficiency `σ`.
    Matching,
}

impl Margin {
    pub const ALL: [Margin; 3] = [Margin::Dynamics, Margin::Separations, Margin::Matching];

    fn bit(self) -> usize {
        1 << self as usize
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Margin::Dynamics => "dU",
            Margin::Separations => "s",
            Margin::Matching => "sigma",
        }
    }
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Margin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dU" | "du" | "dynamics" => Ok(Margin::Dynamics),
            "s" | "separations" => Ok(Margin::Separations),
            "sigma" | "matching" => Ok(Margin::Matching),
            other => Err(Error::InvalidArgument(format!("unknown margin {other:?}; use dU, s or sigma"))),
        }
    }
}

/// Order in which margins are switched from held to observed.
pub type Ordering = [Margin; 3];

/// The six orderings, in tabulation order.
pub const ORDERINGS: [Ordering; 6] = {
    use Margin::*;
    [
        [Dynamics, Separations, Matching],
        [Dynamics, Matching, Separations],
        [Separations, Dynamics, Matching],
        [Separations, Matching, Dynamics],
        [Matching, Dynamics, Separations],
        [Matching, Separations, Dynamics],
    ]
};

pub fn ordering_label(o: &Ordering) -> String {
    o.iter().map(|m| m.symbol()).collect::<Vec<_>>().join(",")
}

/// Parses `"dU,s,sigma"` style orderings.
pub fn parse_ordering(s: &str) -> Result<Ordering> {
    let parts = s.split(',').map(str::parse).collect::<Result<Vec<Margin>>>()?;
    let o: Ordering = parts
        .try_into()
        .map_err(|_| Error::InvalidArgument(format!("ordering {s:?} must list three margins")))?;
    if o[0] == o[1] || o[0] == o[2] || o[1] == o[2] {
        return Err(Error::InvalidArgument(format!("ordering {s:?} repeats a margin")));
    }
    Ok(o)
}

/// Which margins are replaced by constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterfactualSpec<T> {
    pub hold_dynamics: bool,
    pub hold_separations: bool,
    pub hold_matching: bool,
    pub s_bar: T,
    pub sigma_bar: T,
    pub alpha: T,
}

impl<T: Scalar> CounterfactualSpec<T> {
    pub fn holding(held: &[Margin], s_bar: T, sigma_bar: T, alpha: T) -> Self {
        Self {
            hold_dynamics: held.contains(&Margin::Dynamics),
            hold_separations: held.contains(&Margin::Separations),
            hold_matching: held.contains(&Margin::Matching),
            s_bar,
            sigma_bar,
            alpha,
        }
    }

    fn from_observed_mask(observed: usize, s_bar: T, sigma_bar: T, alpha: T) -> Self {
        let held: Vec<Margin> = Margin::ALL.into_iter().filter(|m| observed & m.bit() == 0).collect();
        Self::holding(&held, s_bar, sigma_bar, alpha)
    }
}

/// The vacancy identity with held margins replaced: `s → s̄`, `σ → σ̄`,
/// `ΔU → 0`.
pub fn counterfactual_vacancies<T: Scalar>(
    u: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    sigma: &MonthlySeries<T>,
    spec: &CounterfactualSpec<T>,
) -> Result<VacancyPath<T>> {
    let mut values = Vec::with_capacity(u.len());
    let mut infeasible = Vec::new();
    for (m, ut) in u.iter() {
        let inputs = (|| {
            let ut = ut?;
            let du = if spec.hold_dynamics { T::zero() } else { u.get(m.succ())? - ut };
            let st = if spec.hold_separations { spec.s_bar } else { s.get(m)? };
            let sg = if spec.hold_matching { spec.sigma_bar } else { sigma.get(m)? };
            Some((ut, du, st, sg))
        })();
        let Some((ut, du, st, sg)) = inputs else {
            values.push(None);
            continue;
        };
        if ut <= T::zero() || ut >= T::one() {
            return Err(Error::InvalidArgument(format!("unemployment share {ut} at {m} outside (0,1)")));
        }
        if sg <= T::zero() {
            return Err(Error::NonPositive { what: "matching efficiency", month: m });
        }
        let v = vacancy_identity(ut, du, st, sg, spec.alpha);
        if v.is_none() {
            infeasible.push(m);
        }
        values.push(v);
    }
    Ok(VacancyPath { series: MonthlySeries::new(u.start(), values), infeasible })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Contributions<T> {
    pub total: T,
    pub dynamics: T,
    pub separations: T,
    pub matching: T,
}

impl<T: Scalar> Contributions<T> {
    pub fn get(&self, m: Margin) -> T {
        match m {
            Margin::Dynamics => self.dynamics,
            Margin::Separations => self.separations,
            Margin::Matching => self.matching,
        }
    }

    fn set(&mut self, m: Margin, x: T) {
        match m {
            Margin::Dynamics => self.dynamics = x,
            Margin::Separations => self.separations = x,
            Margin::Matching => self.matching = x,
        }
    }

    fn mean(items: &[Contributions<T>]) -> Self {
        let n = T::count(items.len());
        let avg = |f: fn(&Contributions<T>) -> T| items.iter().map(f).sum::<T>() / n;
        Self {
            total: avg(|c| c.total),
            dynamics: avg(|c| c.dynamics),
            separations: avg(|c| c.separations),
            matching: avg(|c| c.matching),
        }
    }

    fn scaled(&self, k: T) -> Self {
        Self {
            total: self.total * k,
            dynamics: self.dynamics * k,
            separations: self.separations * k,
            matching: self.matching * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointContribution<T> {
    pub month: MonthDate,
    pub u: T,
    pub contributions: Contributions<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Loglinear,
    Nonlinear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftDecomposition<T> {
    pub method: Method,
    pub ordering: Option<Ordering>,
    pub points: Vec<PointContribution<T>>,
    /// Downswing months without a usable match: unbracketed, missing
    /// inputs, or infeasible counterfactuals.
    pub dropped: Vec<MonthDate>,
    /// Averages over `points`, in log-vacancy units.
    pub mean: Contributions<T>,
    /// Mean observed vertical shift over `points`.
    pub observed_shift: T,
    /// `100 · mean / observed_shift`; `None` when the observed shift is zero.
    pub percent: Option<Contributions<T>>,
}

impl<T: Scalar> ShiftDecomposition<T> {
    fn assemble(
        method: Method,
        ordering: Option<Ordering>,
        points: Vec<PointContribution<T>>,
        observed: &[T],
        dropped: Vec<MonthDate>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::AllPairsInfeasible);
        }
        let mean = Contributions::mean(&points.iter().map(|p| p.contributions).collect::<Vec<_>>());
        let observed_shift = observed.iter().copied().sum::<T>() / T::count(observed.len());
        let percent = (observed_shift != T::zero()).then(|| mean.scaled(T::lit(100.0) / observed_shift));
        Ok(Self { method, ordering, points, dropped, mean, observed_shift, percent })
    }
}

fn observed_ln_v<T: Scalar>(v: &MonthlySeries<T>) -> impl Fn(MonthDate) -> Option<T> + '_ {
    move |m| v.get(m).filter(|x| *x > T::zero()).map(|x| x.ln())
}

/// Log-linear attribution: each shifter term differenced between the
/// upswing and the downswing at matched `U`. The total is the sum of the
/// three terms, which approximates the observed shift.
pub fn loglinear_shift_decomposition<T: Scalar>(
    samples: &SwingSamples<T>,
    u: &MonthlySeries<T>,
    v: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    sigma: &MonthlySeries<T>,
    point: &ApproximationPoint<T>,
) -> Result<ShiftDecomposition<T>> {
    let terms = loglinear_terms(u, s, sigma, point)?;
    let ln_v = observed_ln_v(v);
    let mut points = Vec::new();
    let mut observed = Vec::new();
    let mut dropped = samples.dropped.clone();
    for mt in &samples.matches {
        let diffs = (|| {
            let d = mt.difference(|m| terms.dynamics.get(m))?;
            let sp = mt.difference(|m| terms.separations.get(m))?;
            let mc = mt.difference(|m| terms.matching.get(m))?;
            Some((Contributions { total: d + sp + mc, dynamics: d, separations: sp, matching: mc }, mt.difference(&ln_v)?))
        })();
        match diffs {
            Some((c, obs)) => {
                points.push(PointContribution { month: mt.down, u: mt.u, contributions: c });
                observed.push(obs);
            }
            None => dropped.push(mt.down),
        }
    }
    dropped.sort();
    ShiftDecomposition::assemble(Method::Loglinear, None, points, &observed, dropped)
}

/// Shifts of all eight counterfactuals per usable match, indexed by the
/// bitmask of observed margins. The all-held entry is zero by definition;
/// the all-observed entry uses observed vacancies.
struct ShiftTable<T> {
    rows: Vec<(SwingMatch<T>, [T; 8])>,
    dropped: Vec<MonthDate>,
}

fn shift_table<T: Scalar>(
    u: &MonthlySeries<T>,
    v: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    sigma: &MonthlySeries<T>,
    samples: &SwingSamples<T>,
    s_bar: T,
    sigma_bar: T,
    alpha: T,
) -> Result<ShiftTable<T>> {
    let mut ln_cf: Vec<MonthlySeries<T>> = Vec::with_capacity(7);
    for mask in 1..7 {
        let spec = CounterfactualSpec::from_observed_mask(mask, s_bar, sigma_bar, alpha);
        ln_cf.push(counterfactual_vacancies(u, s, sigma, &spec)?.ln());
    }
    let ln_v = observed_ln_v(v);
    let mut rows = Vec::new();
    let mut dropped = samples.dropped.clone();
    for mt in &samples.matches {
        let row = (|| {
            let mut shifts = [T::zero(); 8];
            for mask in 1..7 {
                shifts[mask] = mt.difference(|m| ln_cf[mask - 1].get(m))?;
            }
            shifts[7] = mt.difference(&ln_v)?;
            Some(shifts)
        })();
        match row {
            Some(r) => rows.push((*mt, r)),
            None => dropped.push(mt.down),
        }
    }
    dropped.sort();
    Ok(ShiftTable { rows, dropped })
}

fn decompose_ordering<T: Scalar>(table: &ShiftTable<T>, ordering: Ordering) -> Result<ShiftDecomposition<T>> {
    let mut points = Vec::with_capacity(table.rows.len());
    let mut observed = Vec::with_capacity(table.rows.len());
    for (mt, shifts) in &table.rows {
        let mut c = Contributions { total: shifts[7], ..Default::default() };
        let mut mask = 0;
        for m in ordering {
            let next = mask | m.bit();
            c.set(m, shifts[next] - shifts[mask]);
            mask = next;
        }
        points.push(PointContribution { month: mt.down, u: mt.u, contributions: c });
        observed.push(shifts[7]);
    }
    ShiftDecomposition::assemble(Method::Nonlinear, Some(ordering), points, &observed, table.dropped.clone())
}

/// Exact attribution for one ordering. Starting from the steady-state curve
/// (all margins held), margins are switched to observed values in
/// `ordering`; each receives the change in shift it causes. A match is used
/// only if all eight counterfactuals are available at it, so every ordering
/// sees the same matches.
#[allow(clippy::too_many_arguments)]
pub fn nonlinear_ordering_decomposition<T: Scalar>(
    u: &MonthlySeries<T>,
    v: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    sigma: &MonthlySeries<T>,
    samples: &SwingSamples<T>,
    constants: (T, T),
    alpha: T,
    ordering: Ordering,
) -> Result<ShiftDecomposition<T>> {
    let table = shift_table(u, v, s, sigma, samples, constants.0, constants.1, alpha)?;
    decompose_ordering(&table, ordering)
}

/// All six orderings, in [`ORDERINGS`] order.
pub fn all_orderings_report<T: Scalar>(
    u: &MonthlySeries<T>,
    v: &MonthlySeries<T>,
    s: &MonthlySeries<T>,
    sigma: &MonthlySeries<T>,
    samples: &SwingSamples<T>,
    constants: (T, T),
    alpha: T,
) -> Result<Vec<ShiftDecomposition<T>>> {
    let table = shift_table(u, v, s, sigma, samples, constants.0, constants.1, alpha)?;
    ORDERINGS.iter().map(|o| decompose_ordering(&table, *o)).collect()
}
