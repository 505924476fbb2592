//! Synthetic panels from planted parameters.
//!
//! Two-state panels satisfy `U[t+1] = U[t] + s(1 − U[t]) − f·U[t]` with
//! `f = σ(V/U)^α` to machine precision, and report short-term unemployment
//! as the gross inflow `U_short[t+1] = s[t](1 − U[t])`, so the job-finding
//! construction recovers `f` exactly. Three-state panels evolve stocks under
//! the corrected laws of motion with stock-consistent rates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::beveridge::vacancy_identity;
use crate::error::{Error, Result};
use crate::flows2::{TwoStatePanel, U_RATE, U_SHORT, V_RATE};
use crate::flows3::{derive_aggregates, step_stocks, Stocks, ThreeStatePanel, TransitionRates};
use crate::frame::Frame;
use crate::scalar::Scalar;
use crate::series::{MonthDate, MonthlySeries};

/// Gaussian shocks to `ln f`, i.e. to effective matching efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    pub std: f64,
    pub seed: u64,
}

/// What is planted besides `s` and `σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver<T> {
    /// `U` over `horizon + 1` months; `V` follows from the identity.
    Unemployment(MonthlySeries<T>),
    /// `V` over `horizon` months; `U` evolves from `u0`.
    Vacancies { u0: T, v: MonthlySeries<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec<T> {
    pub alpha: T,
    pub start: MonthDate,
    /// Number of transitions; `U` spans `horizon + 1` months.
    pub horizon: usize,
    pub s: MonthlySeries<T>,
    pub sigma: MonthlySeries<T>,
    pub driver: Driver<T>,
    #[serde(default)]
    pub noise: Option<Noise>,
}

impl<T: Scalar> SimulationSpec<T> {
    /// Constant `s`, `σ` and `U`; `V` lands on the steady-state curve.
    pub fn steady_state(alpha: T, s: T, sigma: T, u: T, start: MonthDate, horizon: usize) -> Self {
        Self {
            alpha,
            start,
            horizon,
            s: MonthlySeries::constant(start, horizon, s),
            sigma: MonthlySeries::constant(start, horizon, sigma),
            driver: Driver::Unemployment(MonthlySeries::constant(start, horizon + 1, u)),
            noise: None,
        }
    }
}

/// Values the simulation was built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedTruth<T> {
    pub alpha: T,
    pub s: MonthlySeries<T>,
    pub sigma: MonthlySeries<T>,
    /// `σ·exp(noise)`; equals `sigma` without noise.
    pub sigma_effective: MonthlySeries<T>,
    pub f: MonthlySeries<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedTwoState<T> {
    pub panel: TwoStatePanel<T>,
    pub truth: PlantedTruth<T>,
}

fn planted<T: Scalar>(path: &MonthlySeries<T>, m: MonthDate, name: &'static str) -> Result<T> {
    let x = path.require(m, name)?;
    if x > T::zero() {
        Ok(x)
    } else {
        Err(Error::NonPositive { what: name, month: m })
    }
}

fn check_share<T: Scalar>(u: T, m: MonthDate) -> Result<T> {
    if u > T::zero() && u < T::one() {
        Ok(u)
    } else {
        Err(Error::UnemploymentOutOfRange { month: m, value: u.as_f64() })
    }
}

fn noise_path<T: Scalar>(noise: Option<Noise>, n: usize) -> Result<Vec<T>> {
    let Some(Noise { std, seed }) = noise else {
        return Ok(vec![T::zero(); n]);
    };
    let dist = Normal::new(0.0, std).map_err(|e| Error::InvalidArgument(format!("noise std {std}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| T::lit(dist.sample(&mut rng))).collect())
}

pub fn simulate_two_state<T: Scalar>(spec: &SimulationSpec<T>) -> Result<SimulatedTwoState<T>> {
    let SimulationSpec { alpha, start, horizon, .. } = *spec;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least one month".into()));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let shocks = noise_path::<T>(spec.noise, horizon)?;
    let (mut u, mut v, mut f, mut s, mut sg, mut sg_eff) = (
        Vec::with_capacity(horizon + 1),
        Vec::with_capacity(horizon),
        Vec::with_capacity(horizon),
        Vec::with_capacity(horizon),
        Vec::with_capacity(horizon),
        Vec::with_capacity(horizon),
    );
    let mut ut = match &spec.driver {
        Driver::Unemployment(path) => path.require(start, "U")?,
        Driver::Vacancies { u0, .. } => *u0,
    };
    check_share(ut, start)?;
    u.push(ut);
    for (k, shock) in shocks.iter().enumerate() {
        let m = start.add_months(k as i64);
        let st = planted(&spec.s, m, "s")?;
        let sigma = planted(&spec.sigma, m, "sigma")?;
        let eff = sigma * shock.exp();
        let (vt, u1) = match &spec.driver {
            Driver::Unemployment(path) => {
                let u1 = path.require(m.succ(), "U")?;
                check_share(u1, m.succ())?;
                let vt = vacancy_identity(ut, u1 - ut, st, eff, alpha).ok_or_else(|| {
                    Error::InvalidArgument(format!("planted U path needs nonpositive hires at {m}"))
                })?;
                (vt, u1)
            }
            Driver::Vacancies { v: path, .. } => {
                let vt = planted(path, m, "V")?;
                let ft = eff * (vt / ut).powf(alpha);
                let u1 = ut + st * (T::one() - ut) - ft * ut;
                (vt, check_share(u1, m.succ())?)
            }
        };
        // f from the identity so that it is exactly what the stocks imply
        let ft = eff * (vt / ut).powf(alpha);
        u.push(u1);
        v.push(vt);
        f.push(ft);
        s.push(st);
        sg.push(sigma);
        sg_eff.push(eff);
        ut = u1;
    }
    let u_short = std::iter::once(None)
        .chain(u.iter().zip(&s).map(|(ut, st)| Some(*st * (T::one() - *ut))))
        .collect();
    let series = |x: Vec<T>| MonthlySeries::from_values(start, x);
    let panel = TwoStatePanel::construct(series(u), series(v), MonthlySeries::new(start, u_short))?;
    Ok(SimulatedTwoState {
        panel,
        truth: PlantedTruth { alpha, s: series(s), sigma: series(sg), sigma_effective: series(sg_eff), f: series(f) },
    })
}

impl SimulatedTwoState<f64> {
    /// Ingestion columns plus `true_s`, `true_sigma`, `true_f`.
    pub fn frame(&self) -> Frame {
        Frame::new()
            .with(U_RATE, self.panel.u.clone())
            .with(V_RATE, self.panel.v.clone())
            .with(U_SHORT, self.panel.u_short.clone())
            .with("true_s", self.truth.s.clone())
            .with("true_sigma", self.truth.sigma_effective.clone())
            .with("true_f", self.truth.f.clone())
    }
}

/// Planted three-state paths. Each path covers `horizon + 1` months so the
/// searcher pool is defined at every stock month; `ne = ξ·ue`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeStateSimulationSpec<T> {
    pub alpha: T,
    pub start: MonthDate,
    pub horizon: usize,
    /// `[E, U, N]` shares at `start`.
    pub initial: [T; 3],
    pub eu: MonthlySeries<T>,
    pub en: MonthlySeries<T>,
    pub ue: MonthlySeries<T>,
    pub un: MonthlySeries<T>,
    pub nu: MonthlySeries<T>,
    pub xi: MonthlySeries<T>,
    pub sigma: MonthlySeries<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedThreeState<T> {
    /// Aggregates derived.
    pub panel: ThreeStatePanel<T>,
    /// `V = S (ue/σ)^(1/α)`, from matching inversion.
    pub v: MonthlySeries<T>,
    pub sigma: MonthlySeries<T>,
    pub alpha: T,
}

pub fn simulate_three_state<T: Scalar>(spec: &ThreeStateSimulationSpec<T>) -> Result<SimulatedThreeState<T>> {
    let ThreeStateSimulationSpec { alpha, start, horizon, initial, .. } = *spec;
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let total: T = initial.iter().copied().sum();
    if (total - T::one()).abs() > T::lit(1e-12) || initial.iter().any(|x| *x < T::zero()) {
        return Err(Error::InvalidArgument("initial stocks must be nonnegative shares summing to 1".into()));
    }
    let n = horizon + 1;
    let mut stocks = Vec::with_capacity(n);
    let mut cols: [Vec<T>; 7] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut v = Vec::with_capacity(n);
    let mut now = initial;
    for k in 0..n {
        let m = start.add_months(k as i64);
        check_share(now[1], m)?;
        if now[0] < T::zero() || now[2] < T::zero() {
            return Err(Error::InfeasibleFlowMatrix { month: m, detail: format!("negative stock {now:?}") });
        }
        let get = |p: &MonthlySeries<T>, name| p.require(m, name);
        let (eu, en, ue, un, nu, xi) =
            (get(&spec.eu, "eu")?, get(&spec.en, "en")?, get(&spec.ue, "ue")?, get(&spec.un, "un")?, get(&spec.nu, "nu")?, get(&spec.xi, "xi")?);
        let sigma = planted(&spec.sigma, m, "sigma")?;
        let ne = xi * ue;
        let one = T::one();
        let rates = [[one - eu - en, eu, en], [ue, one - ue - un, un], [ne, nu, one - ne - nu]];
        if rates.iter().flatten().any(|r| *r < T::zero()) {
            return Err(Error::InfeasibleFlowMatrix { month: m, detail: format!("negative rate or stayer share {rates:?}") });
        }
        let searchers = now[1] + xi * now[2];
        v.push(searchers * (ue / sigma).powf(alpha.recip()));
        for (col, x) in cols.iter_mut().zip([eu, en, ue, un, ne, nu, sigma]) {
            col.push(x);
        }
        stocks.push(now);
        now = step_stocks(now, &rates);
    }
    let series = |x: Vec<T>| MonthlySeries::from_values(start, x);
    let stock = |i: usize| series(stocks.iter().map(|s| s[i]).collect());
    let [eu, en, ue, un, ne, nu, sigma] = cols.map(series);
    let panel = derive_aggregates(ThreeStatePanel::new(
        Stocks { e: stock(0), u: stock(1), n: stock(2) },
        TransitionRates { eu, en, ue, un, ne, nu },
    ))?;
    Ok(SimulatedThreeState { panel, v: series(v), sigma, alpha })
}

impl SimulatedThreeState<f64> {
    /// Ingestion columns (stocks, six rates, `v_rate`) plus `true_sigma`.
    pub fn frame(&self) -> Frame {
        let (st, r) = (&self.panel.stocks, &self.panel.rates);
        let mut frame = Frame::new().with("e_stock", st.e.clone()).with("u_stock", st.u.clone()).with("n_stock", st.n.clone());
        for (name, s) in r.iter() {
            frame.insert(name, s.clone());
        }
        frame.with(V_RATE, self.v.clone()).with("true_sigma", self.sigma.clone())
    }
}
