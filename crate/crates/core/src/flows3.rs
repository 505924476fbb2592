//! Three-state (employment, unemployment, nonemployment) panel.
//!
//! Stocks are normalized to population shares. Raw transition probabilities
//! are raked per month-pair by iterative proportional fitting on the 3×3 flow
//! matrix so that every origin row sums to the month-`t` stock and every
//! destination column sums to the month-`t+1` stock. From the raked rates we
//! derive relative search intensity of the nonemployed, the effective
//! searcher pool and the total separation probability.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::scalar::Scalar;
use crate::series::{normalize_shares, MonthDate, MonthlySeries};

pub const STOCK_COLUMNS: [&str; 3] = ["e_stock", "u_stock", "n_stock"];
pub const RATE_COLUMNS: [&str; 6] = ["eu", "en", "ue", "un", "ne", "nu"];

const E: usize = 0;
const U: usize = 1;
const N: usize = 2;

/// Population shares; `e + u + n = 1` each month.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stocks<T> {
    pub e: MonthlySeries<T>,
    pub u: MonthlySeries<T>,
    pub n: MonthlySeries<T>,
}

impl<T: Scalar> Stocks<T> {
    /// Rescales raw counts (or shares) so they sum to one each month.
    pub fn normalized(e: MonthlySeries<T>, u: MonthlySeries<T>, n: MonthlySeries<T>) -> Result<Self> {
        let mut out = normalize_shares(&[e, u, n])?.into_iter();
        let (e, u, n) = (out.next().unwrap(), out.next().unwrap(), out.next().unwrap());
        Ok(Self { e, u, n })
    }

    fn at(&self, m: MonthDate) -> Option<[T; 3]> {
        Some([self.e.get(m)?, self.u.get(m)?, self.n.get(m)?])
    }
}

/// Monthly transition probabilities between the three states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionRates<T> {
    pub eu: MonthlySeries<T>,
    pub en: MonthlySeries<T>,
    pub ue: MonthlySeries<T>,
    pub un: MonthlySeries<T>,
    pub ne: MonthlySeries<T>,
    pub nu: MonthlySeries<T>,
}

impl<T: Scalar> TransitionRates<T> {
    /// Off-diagonal rate matrix, rows = origin.
    fn matrix_at(&self, m: MonthDate) -> Option<[[T; 3]; 3]> {
        let z = T::zero();
        Some([
            [z, self.eu.get(m)?, self.en.get(m)?],
            [self.ue.get(m)?, z, self.un.get(m)?],
            [self.ne.get(m)?, self.nu.get(m)?, z],
        ])
    }

    fn from_matrices(start: MonthDate, mats: &[Option<[[T; 3]; 3]>]) -> Self {
        let pick = |i: usize, j: usize| MonthlySeries::new(start, mats.iter().map(|m| m.map(|m| m[i][j])).collect());
        Self { eu: pick(E, U), en: pick(E, N), ue: pick(U, E), un: pick(U, N), ne: pick(N, E), nu: pick(N, U) }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &MonthlySeries<T>)> {
        RATE_COLUMNS.into_iter().zip([&self.eu, &self.en, &self.ue, &self.un, &self.ne, &self.nu])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RakeOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RakeOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthRake {
    pub month: MonthDate,
    /// Column+row scaling sweeps performed; zero when the input already fit.
    pub iterations: usize,
    pub residual: f64,
    pub max_adjustment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RakeReport {
    pub months: Vec<MonthRake>,
    /// Months with rates but no successor stock, passed through unraked.
    pub passed_through: Vec<MonthDate>,
}

impl RakeReport {
    pub fn worst_residual(&self) -> f64 {
        self.months.iter().map(|m| m.residual).fold(0.0, f64::max)
    }

    pub fn max_adjustment(&self) -> f64 {
        self.months.iter().map(|m| m.max_adjustment).fold(0.0, f64::max)
    }

    pub fn max_iterations(&self) -> usize {
        self.months.iter().map(|m| m.iterations).max().unwrap_or(0)
    }
}

fn marginal_residual<T: Scalar>(flows: &[[T; 3]; 3], rows: &[T; 3], cols: &[T; 3]) -> T {
    let mut worst = T::zero();
    for i in 0..3 {
        let r: T = flows[i].iter().copied().sum();
        let c: T = (0..3).map(|k| flows[k][i]).sum();
        worst = worst.max((r - rows[i]).abs()).max((c - cols[i]).abs());
    }
    worst
}

/// IPF on one month-pair. Returns raked off-diagonal rates and the report.
fn rake_month<T: Scalar>(
    month: MonthDate,
    rates: [[T; 3]; 3],
    now: [T; 3],
    next: [T; 3],
    opts: RakeOptions,
) -> Result<([[T; 3]; 3], MonthRake)> {
    let tol = T::lit(opts.tol);
    let mut flows = [[T::zero(); 3]; 3];
    for i in 0..3 {
        let exit: T = rates[i].iter().copied().sum();
        let stay = T::one() - exit;
        if stay < T::zero() {
            return Err(Error::InfeasibleFlowMatrix {
                month,
                detail: format!("exit probabilities from state {i} sum to {exit}"),
            });
        }
        if rates[i].iter().any(|r| *r < T::zero()) {
            return Err(Error::InfeasibleFlowMatrix { month, detail: format!("negative rate from state {i}") });
        }
        for j in 0..3 {
            flows[i][j] = now[i] * if i == j { stay } else { rates[i][j] };
        }
    }

    let mut residual = marginal_residual(&flows, &now, &next);
    let mut iterations = 0;
    while residual >= tol {
        if iterations == opts.max_iter {
            return Err(Error::RakingNotConverged { month, iterations, residual: residual.as_f64() });
        }
        for j in 0..3 {
            let c: T = (0..3).map(|k| flows[k][j]).sum();
            if c > T::zero() {
                let scale = next[j] / c;
                (0..3).for_each(|k| flows[k][j] = flows[k][j] * scale);
            } else if next[j] > T::zero() {
                return Err(Error::InfeasibleFlowMatrix {
                    month,
                    detail: format!("no flows into state {j} but its next-month stock is {}", next[j]),
                });
            }
        }
        for i in 0..3 {
            let r: T = flows[i].iter().copied().sum();
            if r > T::zero() {
                let scale = now[i] / r;
                flows[i].iter_mut().for_each(|f| *f = *f * scale);
            }
        }
        iterations += 1;
        residual = marginal_residual(&flows, &now, &next);
    }

    let mut out = rates;
    let mut max_adjustment = T::zero();
    if iterations > 0 {
        for i in 0..3 {
            if now[i] > T::zero() {
                for j in (0..3).filter(|&j| j != i) {
                    out[i][j] = flows[i][j] / now[i];
                    max_adjustment = max_adjustment.max((out[i][j] - rates[i][j]).abs());
                }
            }
            if flows[i][i] < T::zero() {
                return Err(Error::InfeasibleFlowMatrix { month, detail: format!("negative stayer mass in state {i}") });
            }
        }
    }
    Ok((
        out,
        MonthRake { month, iterations, residual: residual.as_f64(), max_adjustment: max_adjustment.as_f64() },
    ))
}

/// Rakes raw transition rates toward consistency with the stock path.
///
/// Months are independent and processed in parallel; the result does not
/// depend on scheduling. The final month has no successor stock vector and
/// its rates are passed through unchanged.
pub fn rake_transition_rates<T: Scalar>(
    stocks: &Stocks<T>,
    raw: &TransitionRates<T>,
    opts: RakeOptions,
) -> Result<(TransitionRates<T>, RakeReport)> {
    if stocks.u.is_empty() {
        return Err(Error::EmptyInput);
    }
    let start = stocks.u.start();
    let months: Vec<MonthDate> = (0..stocks.u.len()).map(|i| stocks.u.date_at(i)).collect();
    let results: Vec<Result<(Option<[[T; 3]; 3]>, Option<MonthRake>, bool)>> = months
        .par_iter()
        .map(|&m| {
            let Some(rates) = raw.matrix_at(m) else { return Ok((None, None, false)) };
            let Some(now) = stocks.at(m) else { return Ok((None, None, false)) };
            match stocks.at(m.succ()) {
                Some(next) => {
                    let (out, rep) = rake_month(m, rates, now, next, opts)?;
                    Ok((Some(out), Some(rep), false))
                }
                None => Ok((Some(rates), None, true)),
            }
        })
        .collect();

    let mut mats = Vec::with_capacity(months.len());
    let mut report = RakeReport { months: Vec::new(), passed_through: Vec::new() };
    for (m, r) in months.iter().zip(results) {
        let (mat, rep, passed) = r?;
        mats.push(mat);
        report.months.extend(rep);
        if passed {
            report.passed_through.push(*m);
        }
    }
    Ok((TransitionRates::from_matrices(start, &mats), report))
}

/// `ξᴺ = ne / ue`: search intensity of the nonemployed relative to the
/// unemployed, identified under balanced matching.
pub fn relative_search_intensity<T: Scalar>(
    ne: &MonthlySeries<T>,
    ue: &MonthlySeries<T>,
) -> Result<MonthlySeries<T>> {
    let mut values = Vec::with_capacity(ne.len());
    for (m, v) in ne.iter() {
        values.push(match (v, ue.get(m)) {
            (Some(ne), Some(ue)) => {
                if ue == T::zero() {
                    return Err(Error::UndefinedIntensity(m));
                }
                Some(ne / ue)
            }
            _ => None,
        });
    }
    Ok(MonthlySeries::new(ne.start(), values))
}

/// Quantities derived from stocks and raked rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates<T> {
    pub xi_n: MonthlySeries<T>,
    /// Effective searchers `S = U + ξᴺ N`.
    pub searchers: MonthlySeries<T>,
    /// Non-searchers `Ñ = (1 - ξᴺ) N`.
    pub non_searchers: MonthlySeries<T>,
    /// Total separation probability `x = eu + en`.
    pub separations: MonthlySeries<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeStatePanel<T> {
    pub stocks: Stocks<T>,
    pub rates: TransitionRates<T>,
    pub aggregates: Option<Aggregates<T>>,
}

impl<T: Scalar> ThreeStatePanel<T> {
    pub fn new(stocks: Stocks<T>, rates: TransitionRates<T>) -> Self {
        Self { stocks, rates, aggregates: None }
    }

    pub fn aggregates(&self) -> Result<&Aggregates<T>> {
        self.aggregates.as_ref().ok_or(Error::AggregatesMissing)
    }

    /// Replaces the rates with their raked counterparts.
    pub fn raked(self, opts: RakeOptions) -> Result<(Self, RakeReport)> {
        let (rates, report) = rake_transition_rates(&self.stocks, &self.rates, opts)?;
        Ok((Self { stocks: self.stocks, rates, aggregates: None }, report))
    }
}

impl ThreeStatePanel<f64> {
    /// Reads `e_stock, u_stock, n_stock` (normalized here) and the six rate
    /// columns. Rates are taken as given; call [`ThreeStatePanel::raked`] to
    /// make them stock-consistent.
    pub fn from_frame(frame: &Frame) -> Result<Self> {
        let mut needed: Vec<&str> = STOCK_COLUMNS.to_vec();
        needed.extend(RATE_COLUMNS);
        frame.require(&needed)?;
        let col = |n: &str| frame.column(n).cloned();
        let stocks = Stocks::normalized(col("e_stock")?, col("u_stock")?, col("n_stock")?)?;
        let rates = TransitionRates {
            eu: col("eu")?,
            en: col("en")?,
            ue: col("ue")?,
            un: col("un")?,
            ne: col("ne")?,
            nu: col("nu")?,
        };
        Ok(Self::new(stocks, rates))
    }
}

/// Fills `ξᴺ`, `S`, `Ñ` and `x`.
pub fn derive_aggregates<T: Scalar>(panel: ThreeStatePanel<T>) -> Result<ThreeStatePanel<T>> {
    let xi_n = relative_search_intensity(&panel.rates.ne, &panel.rates.ue)?;
    let n = &panel.stocks.n;
    let searchers = panel.stocks.u.tabulate(|m| Some(panel.stocks.u.get(m)? + xi_n.get(m)? * n.get(m)?));
    let non_searchers = n.tabulate(|m| Some((T::one() - xi_n.get(m)?) * n.get(m)?));
    let separations = panel.rates.eu.zip_with(&panel.rates.en, |eu, en| eu + en);
    Ok(ThreeStatePanel {
        aggregates: Some(Aggregates { xi_n, searchers, non_searchers, separations }),
        ..panel
    })
}

/// `H = U·ue + N·ne`.
pub fn total_hires<T: Scalar>(panel: &ThreeStatePanel<T>) -> MonthlySeries<T> {
    let (st, r) = (&panel.stocks, &panel.rates);
    st.u.tabulate(|m| Some(st.u.get(m)? * r.ue.get(m)? + st.n.get(m)? * r.ne.get(m)?))
}

/// `H - (E·x - ΔU[t+1] - ΔN[t+1])`; zero up to raking tolerance on a
/// stock-consistent panel.
pub fn hires_identity_residual<T: Scalar>(panel: &ThreeStatePanel<T>) -> MonthlySeries<T> {
    let h = total_hires(panel);
    let (st, r) = (&panel.stocks, &panel.rates);
    h.tabulate(|m| {
        let x = r.eu.get(m)? + r.en.get(m)?;
        let du = st.u.get(m.succ())? - st.u.get(m)?;
        let dn = st.n.get(m.succ())? - st.n.get(m)?;
        Some(h.get(m)? - (st.e.get(m)? * x - du - dn))
    })
}

/// Evolves stocks one month under the corrected laws of motion:
/// `ΔU = E·eu + N·nu − U·un − U·ue`, `ΔN = E·en + U·un − N·ne − N·nu`.
pub fn step_stocks<T: Scalar>(stocks: [T; 3], rates: &[[T; 3]; 3]) -> [T; 3] {
    let [e, u, n] = stocks;
    let du = e * rates[E][U] + n * rates[N][U] - u * rates[U][N] - u * rates[U][E];
    let dn = e * rates[E][N] + u * rates[U][N] - n * rates[N][E] - n * rates[N][U];
    let u1 = u + du;
    let n1 = n + dn;
    [T::one() - u1 - n1, u1, n1]
}
