use beveridge::beveridge::{
    exact_vacancies, loglinear_terms, shifter_paths, three_state_exact_vacancies, three_state_loglinear,
};
use beveridge::decomp::{
    all_orderings_report, build_swing_samples, loglinear_shift_decomposition, ordering_label, vertical_shift,
    ShiftDecomposition,
};
use beveridge::efficiency::{efficient_unemployment, elasticity_monotone, unemployment_gap, Formula};
use beveridge::flows2::{U_RATE, U_SHORT, V_RATE};
use beveridge::flows3::{derive_aggregates, RakeOptions, RATE_COLUMNS, STOCK_COLUMNS};
use beveridge::matching::{estimate_matching, matching_efficiency_path, three_state_tightness, Covariance, MatchingReport};
use beveridge::sim::{simulate_three_state, simulate_two_state, SimulationSpec, ThreeStateSimulationSpec};
use beveridge::{
    ApproximationPoint, Calibration, Frame, MonthDate, MonthRange, Series, ThreeStatePanel, ThreeStatePoint,
    TwoStatePanel,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{
    clip, within, Command, DecomposeArgs, EfficiencyArgs, EstimateArgs, Shared, ShiftersArgs, SimulateArgs,
    Smoothing, ThreeStateArgs,
};
use crate::error::{CliError, Result};
use crate::output::{read_input, sha256_hex, InputRecord, Writer};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Estimate(a) => estimate(a),
        Command::Decompose(a) => decompose(a),
        Command::Shifters(a) => shifters(a),
        Command::ThreeState(a) => three_state(a),
        Command::Efficiency(a) => efficiency(a),
        Command::Simulate(a) => simulate(a),
    }
}

struct Loaded {
    frame: Frame,
    input: InputRecord,
    range: MonthRange,
}

/// Reads, checks the schema, then smooths every column.
fn load_frame(shared: &Shared, needed: &[&str], smoothing: Option<Smoothing>) -> Result<Loaded> {
    let bytes = read_input(&shared.input)?;
    let frame = Frame::read(bytes.as_slice())?;
    frame.require(needed)?;
    let input = InputRecord {
        path: shared.input.display().to_string(),
        sha256: sha256_hex(&bytes),
        rows: frame.row_count(),
        columns: frame.names().map(str::to_string).collect(),
    };
    let frame = match smoothing {
        None => frame,
        Some(s) => frame
            .smoothed(s.window, s.alignment)
            .map_err(|e| CliError::Config(format!("--smooth {}: {e}", s.window)))?,
    };
    let range = frame.range().ok_or_else(|| CliError::Data("input has no months".into()))?;
    Ok(Loaded { frame, input, range })
}

struct TwoState {
    panel: TwoStatePanel<f64>,
    tightness: Series,
    sigma: Series,
}

fn two_state(frame: &Frame, alpha: f64) -> Result<TwoState> {
    let panel = TwoStatePanel::from_frame(frame)?;
    let tightness = panel.tightness();
    let sigma = matching_efficiency_path(&panel.f, &tightness, alpha)?;
    Ok(TwoState { panel, tightness, sigma })
}

fn two_state_point(ts: &TwoState, window: MonthRange, alpha: f64) -> Result<ApproximationPoint<f64>> {
    Ok(ApproximationPoint::from_sample_means(&ts.panel.u, &ts.panel.s, &ts.sigma, window, alpha)?)
}

// ---------------------------------------------------------------- estimate

#[derive(Serialize)]
struct EstimateRow {
    sample: String,
    #[serde(flatten)]
    report: MatchingReport,
}

fn default_samples(data: MonthRange) -> Vec<MonthRange> {
    let pre = MonthRange::new(MonthDate::ym(2000, 12), MonthDate::ym(2007, 12)).expect("ordered");
    let post_start = MonthDate::ym(2008, 1);
    let mut out: Vec<MonthRange> = clip(pre, data).into_iter().collect();
    if post_start <= data.end {
        out.extend(clip(MonthRange::new(post_start, data.end).expect("ordered"), data));
    }
    out
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let loaded = load_frame(&a.shared, &[U_RATE, V_RATE, U_SHORT], a.analysis.smoothing()?)?;
    let analysis = a.analysis.resolve(loaded.range)?;
    let samples = if a.samples.is_empty() {
        let d = default_samples(loaded.range);
        if d.is_empty() {
            return Err(CliError::Config(format!("no default sample overlaps data range {}", loaded.range)));
        }
        d
    } else {
        for w in &a.samples {
            within(*w, loaded.range, "--sample")?;
        }
        a.samples.clone()
    };
    let covariance = if a.robust { Covariance::Robust } else { Covariance::Conventional };
    let ts = two_state(&loaded.frame, analysis.alpha)?;
    let rows = samples
        .iter()
        .map(|w| {
            let est = estimate_matching(&ts.panel.f, &ts.tightness, *w, covariance)?;
            Ok(EstimateRow { sample: w.to_string(), report: est.report() })
        })
        .collect::<Result<Vec<_>>>()?;

    let p = &ts.panel;
    let flows = Frame::new()
        .with(U_RATE, p.u.clone())
        .with(V_RATE, p.v.clone())
        .with(U_SHORT, p.u_short.clone())
        .with("f", p.f.clone())
        .with("s", p.s.clone())
        .with("tightness", ts.tightness.clone())
        .with("sigma", ts.sigma.clone());
    let mut w = Writer::new(&a.shared.output_dir, a.shared.format)?;
    w.rows("estimates", &rows)?;
    w.frame("flows", &flows)?;
    let config = json!({ "shared": a.shared, "analysis": analysis, "samples": samples, "covariance": covariance });
    w.finish("estimate", &config, loaded.input, &json!({ "flagged_months": p.flagged }))
}

// --------------------------------------------------------------- decompose

#[derive(Serialize)]
struct PointRow {
    month: MonthDate,
    u: f64,
    observed_shift: Option<f64>,
    dynamics: f64,
    separations: f64,
    matching: f64,
    total: f64,
}

#[derive(Serialize)]
struct OrderingRow {
    ordering: String,
    dynamics_pct: Option<f64>,
    separations_pct: Option<f64>,
    matching_pct: Option<f64>,
    sum_pct: Option<f64>,
    /// Mean contributions in log-vacancy units.
    dynamics: f64,
    separations: f64,
    matching: f64,
    observed_shift: f64,
    points: usize,
    dropped: usize,
}

#[derive(Serialize)]
struct OrderingPointRow {
    ordering: String,
    month: MonthDate,
    u: f64,
    dynamics: f64,
    separations: f64,
    matching: f64,
    total: f64,
}

fn ordering_name(d: &ShiftDecomposition<f64>) -> String {
    d.ordering.as_ref().map_or_else(|| "loglinear".to_string(), ordering_label)
}

fn ordering_row(d: &ShiftDecomposition<f64>) -> OrderingRow {
    let pct = d.percent;
    OrderingRow {
        ordering: ordering_name(d),
        dynamics_pct: pct.map(|p| p.dynamics),
        separations_pct: pct.map(|p| p.separations),
        matching_pct: pct.map(|p| p.matching),
        sum_pct: pct.map(|p| p.dynamics + p.separations + p.matching),
        dynamics: d.mean.dynamics,
        separations: d.mean.separations,
        matching: d.mean.matching,
        observed_shift: d.observed_shift,
        points: d.points.len(),
        dropped: d.dropped.len(),
    }
}

fn decompose(a: DecomposeArgs) -> Result<()> {
    let loaded = load_frame(&a.shared, &[U_RATE, V_RATE, U_SHORT], a.analysis.smoothing()?)?;
    a.analysis.check_swing(loaded.range)?;
    let analysis = a.analysis.resolve(loaded.range)?;
    let ts = two_state(&loaded.frame, analysis.alpha)?;
    let point = two_state_point(&ts, analysis.approx_window, analysis.alpha)?;
    let p = &ts.panel;
    let samples = build_swing_samples(&p.u, &p.v, analysis.swing)?;
    let loglinear = loglinear_shift_decomposition(&samples, &p.u, &p.v, &p.s, &ts.sigma, &point)?;
    let report =
        all_orderings_report(&p.u, &p.v, &p.s, &ts.sigma, &samples, (point.s_bar, point.sigma_bar), analysis.alpha)?;

    let observed = vertical_shift(&samples);
    let point_rows: Vec<PointRow> = loglinear
        .points
        .iter()
        .map(|pt| PointRow {
            month: pt.month,
            u: pt.u,
            observed_shift: observed.iter().find(|o| o.month == pt.month).map(|o| o.shift),
            dynamics: pt.contributions.dynamics,
            separations: pt.contributions.separations,
            matching: pt.contributions.matching,
            total: pt.contributions.total,
        })
        .collect();
    let ordering_rows: Vec<OrderingRow> = report.iter().chain([&loglinear]).map(ordering_row).collect();
    let ordering_points: Vec<OrderingPointRow> = report
        .iter()
        .flat_map(|d| {
            d.points.iter().map(move |pt| OrderingPointRow {
                ordering: ordering_name(d),
                month: pt.month,
                u: pt.u,
                dynamics: pt.contributions.dynamics,
                separations: pt.contributions.separations,
                matching: pt.contributions.matching,
                total: pt.contributions.total,
            })
        })
        .collect();

    let mut w = Writer::new(&a.shared.output_dir, a.shared.format)?;
    w.rows("shift_points", &point_rows)?;
    w.rows("orderings", &ordering_rows)?;
    w.rows("ordering_points", &ordering_points)?;
    let dropped: serde_json::Map<String, serde_json::Value> =
        report.iter().map(|d| (ordering_name(d), json!(d.dropped))).collect();
    let diagnostics = json!({
        "approximation_point": point,
        "downswing_months": samples.downswing.len(),
        "upswing_months": samples.upswing.len(),
        "unbracketed_months": samples.dropped,
        "dropped_by_ordering": dropped,
        "loglinear_dropped": loglinear.dropped,
        "flagged_months": p.flagged,
    });
    let config = json!({ "shared": a.shared, "analysis": analysis });
    w.finish("decompose", &config, loaded.input, &diagnostics)
}

// ---------------------------------------------------------------- shifters

fn shifters(a: ShiftersArgs) -> Result<()> {
    let loaded = load_frame(&a.shared, &[U_RATE, V_RATE, U_SHORT], a.analysis.smoothing()?)?;
    let analysis = a.analysis.resolve(loaded.range)?;
    if !loaded.range.contains(a.reference) {
        return Err(CliError::Config(format!("--reference {} outside data range {}", a.reference, loaded.range)));
    }
    let ts = two_state(&loaded.frame, analysis.alpha)?;
    let point = two_state_point(&ts, analysis.approx_window, analysis.alpha)?;
    let p = &ts.panel;
    let terms = loglinear_terms(&p.u, &p.s, &ts.sigma, &point)?;
    let paths = shifter_paths(&p.u, &p.s, &ts.sigma, &point, a.reference)?;
    let exact = exact_vacancies(&p.u, &p.s, &ts.sigma, analysis.alpha)?;

    let out = Frame::new()
        .with(U_RATE, p.u.clone())
        .with(V_RATE, p.v.clone())
        .with("f", p.f.clone())
        .with("s", p.s.clone())
        .with("sigma", ts.sigma.clone())
        .with("v_exact", exact.series.clone())
        .with("ln_v", p.v.ln())
        .with("ln_v_loglinear", terms.ln_v)
        .with("curve", terms.curve)
        .with("dynamics", paths.dynamics)
        .with("separations", paths.separations)
        .with("matching", paths.matching)
        .with("net", paths.net);
    let mut w = Writer::new(&a.shared.output_dir, a.shared.format)?;
    w.frame("shifters", &out)?;
    let diagnostics = json!({
        "approximation_point": point,
        "coefficients": point.coefficients(),
        "infeasible_months": exact.infeasible,
        "flagged_months": p.flagged,
    });
    let config = json!({ "shared": a.shared, "analysis": analysis, "reference": a.reference });
    w.finish("shifters", &config, loaded.input, &diagnostics)
}

// ------------------------------------------------------------- three-state

fn three_state(a: ThreeStateArgs) -> Result<()> {
    let mut needed: Vec<&str> = STOCK_COLUMNS.to_vec();
    needed.extend(RATE_COLUMNS);
    needed.push(V_RATE);
    let loaded = load_frame(&a.shared, &needed, a.analysis.smoothing()?)?;
    let analysis = a.analysis.resolve(loaded.range)?;
    if !loaded.range.contains(a.reference) {
        return Err(CliError::Config(format!("--reference {} outside data range {}", a.reference, loaded.range)));
    }
    if !(a.rake_tol > 0.0) || a.rake_max_iter == 0 {
        return Err(CliError::Config("--rake-tol must be positive and --rake-max-iter at least 1".into()));
    }
    let alpha = analysis.alpha;
    let rake = RakeOptions { tol: a.rake_tol, max_iter: a.rake_max_iter };
    let (panel, report) = ThreeStatePanel::from_frame(&loaded.frame)?.raked(rake)?;
    let panel = derive_aggregates(panel)?;
    let v = loaded.frame.column(V_RATE)?;
    let sigma = matching_efficiency_path(&panel.rates.ue, &three_state_tightness(&panel, v)?, alpha)?;
    let point = ThreeStatePoint::from_sample_means(&panel, &sigma, analysis.approx_window, alpha)?;
    let loglinear = three_state_loglinear(&panel, &sigma, &point)?;
    let exact = three_state_exact_vacancies(&panel, alpha, &sigma)?;

    let agg = panel.aggregates()?;
    let mut out = Frame::new()
        .with("searchers", agg.searchers.clone())
        .with("non_searchers", agg.non_searchers.clone())
        .with("separations_rate", agg.separations.clone())
        .with("xi_n", agg.xi_n.clone())
        .with("sigma", sigma.clone())
        .with(V_RATE, v.clone())
        .with("v_exact", exact.series.clone())
        .with("ln_v_loglinear", loglinear.ln_v.clone());
    for (name, s) in loglinear.shifters(a.reference)? {
        out.insert(name, s);
    }
    let mut rates = Frame::new();
    for (name, s) in panel.rates.iter() {
        rates.insert(name, s.clone());
    }

    let mut w = Writer::new(&a.shared.output_dir, a.shared.format)?;
    w.frame("three_state", &out)?;
    w.frame("raked_rates", &rates)?;
    let diagnostics = json!({
        "approximation_point": point,
        "coefficients": point.coefficients(),
        "intercept": loglinear.intercept,
        "infeasible_months": exact.infeasible,
        "raking": {
            "worst_residual": report.worst_residual(),
            "max_adjustment": report.max_adjustment(),
            "max_iterations": report.max_iterations(),
            "passed_through": report.passed_through,
        },
    });
    let config = json!({
        "shared": a.shared,
        "analysis": analysis,
        "reference": a.reference,
        "rake": rake,
    });
    w.finish("three-state", &config, loaded.input, &diagnostics)
}

// -------------------------------------------------------------- efficiency

fn efficiency(a: EfficiencyArgs) -> Result<()> {
    let loaded = load_frame(&a.shared, &[U_RATE, V_RATE], a.analysis.smoothing()?)?;
    let analysis = a.analysis.resolve(loaded.range)?;
    let elasticities = if a.elasticities.is_empty() {
        vec![beveridge::efficiency::MS_ELASTICITY, beveridge::efficiency::STEEP_ELASTICITY]
    } else {
        a.elasticities.clone()
    };
    for (i, e) in elasticities.iter().enumerate() {
        if elasticities[..i].contains(e) {
            return Err(CliError::Config(format!("--elasticity {e} given twice")));
        }
    }
    let calibrations = elasticities
        .iter()
        .map(|&e| Calibration::new(e, a.vacancy_cost, a.unemployment_cost).map_err(|e| CliError::Config(e.to_string())))
        .collect::<Result<Vec<_>>>()?;

    let u = loaded.frame.column(U_RATE)?;
    let v = loaded.frame.column(V_RATE)?;
    let mut out = Frame::new().with(U_RATE, u.clone()).with(V_RATE, v.clone());
    let mut outside = serde_json::Map::new();
    for cal in &calibrations {
        let eps = cal.beveridge_elasticity;
        let star = efficient_unemployment(u, v, cal)?;
        let n_outside = star.observed().filter(|(m, _)| {
            let (Some(ut), Some(vt)) = (u.get(*m), v.get(*m)) else { return false };
            !elasticity_monotone(ut, vt, cal)
        });
        outside.insert(format!("eps_{eps}"), json!(n_outside.count()));
        let gap = unemployment_gap(u, &star);
        out.insert(format!("u_star_eps_{eps}"), star);
        out.insert(format!("gap_eps_{eps}"), gap);
    }
    let mut w = Writer::new(&a.shared.output_dir, a.shared.format)?;
    w.frame("efficiency", &out)?;
    let diagnostics = json!({ "months_outside_elasticity_monotone_domain": outside });
    let config = json!({
        "shared": a.shared,
        "analysis": analysis,
        "formula": Formula::IsoelasticTradeoff,
        "calibrations": calibrations,
    });
    w.finish("efficiency", &config, loaded.input, &diagnostics)
}

// ---------------------------------------------------------------- simulate

/// Spec file for `simulate`, tagged by `model`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum SimulationFile {
    TwoState(SimulationSpec<f64>),
    ThreeState(ThreeStateSimulationSpec<f64>),
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let bytes = read_input(&a.shared.input)?;
    let spec: SimulationFile =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("simulation spec: {e}")))?;
    // the spec is configuration: bad values are config errors
    let config_error = |e: beveridge::Error| match e {
        beveridge::Error::InvalidArgument(m) => CliError::Config(m),
        beveridge::Error::MissingValue { .. } | beveridge::Error::NonPositive { .. } => CliError::Config(e.to_string()),
        other => other.into(),
    };
    let (frame, diagnostics) = match &spec {
        SimulationFile::TwoState(s) => {
            let sim = simulate_two_state(s).map_err(config_error)?;
            (sim.frame(), json!({ "model": "two-state", "alpha": sim.truth.alpha }))
        }
        SimulationFile::ThreeState(s) => {
            let sim = simulate_three_state(s).map_err(config_error)?;
            (sim.frame(), json!({ "model": "three-state", "alpha": sim.alpha }))
        }
    };
    let input = InputRecord {
        path: a.shared.input.display().to_string(),
        sha256: sha256_hex(&bytes),
        rows: 1,
        columns: Vec::new(),
    };
    let mut w = Writer::new(&a.shared.output_dir, a.shared.format)?;
    w.frame("panel", &frame)?;
    w.finish("simulate", &json!({ "shared": a.shared, "spec": spec }), input, &diagnostics)
}
