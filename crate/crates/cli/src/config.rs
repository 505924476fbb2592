use std::path::PathBuf;

use beveridge::decomp::SwingBounds;
use beveridge::matching::DEFAULT_ALPHA;
use beveridge::{Alignment, MonthDate, MonthRange};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "bevacct", version, about = "Dynamic Beveridge-curve accounting from monthly labor-market series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit ln f = ln σ̄ + α ln θ on one or more sample windows.
    Estimate(EstimateArgs),
    /// Attribute the vertical shift between downswing and upswing.
    Decompose(DecomposeArgs),
    /// Log-linear shifter paths relative to a reference month.
    Shifters(ShiftersArgs),
    /// Three-state accounting: raking, effective searchers, shifters.
    ThreeState(ThreeStateArgs),
    /// Efficient unemployment along the Beveridge tradeoff.
    Efficiency(EfficiencyArgs),
    /// Synthetic panel from a planted-parameter JSON spec given as --input.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SmoothAlign {
    Centered,
    Trailing,
}

impl From<SmoothAlign> for Alignment {
    fn from(a: SmoothAlign) -> Self {
        match a {
            SmoothAlign::Centered => Alignment::Centered,
            SmoothAlign::Trailing => Alignment::Trailing,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Shared {
    /// Monthly CSV with a `date` column (YYYY-MM); a JSON spec for `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct Analysis {
    /// Vacancy elasticity of matching used for σ and the curve.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Moving-average window applied to every input column before flows are built.
    #[arg(long, value_name = "N")]
    pub smooth: Option<usize>,
    #[arg(long, value_enum, default_value_t = SmoothAlign::Centered)]
    pub smooth_align: SmoothAlign,
    #[arg(long, default_value = "2007-04")]
    pub down_start: MonthDate,
    #[arg(long, default_value = "2009-06")]
    pub down_end: MonthDate,
    #[arg(long, default_value = "2010-04")]
    pub up_start: MonthDate,
    /// Last month eligible for the upswing sample.
    #[arg(long)]
    pub up_end: Option<MonthDate>,
    /// Window for the approximation-point means, START:END. Default: 2008-01
    /// to the end of the data, or the whole sample if the data end earlier.
    #[arg(long, value_name = "START:END")]
    pub approx_window: Option<MonthRange>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub analysis: Analysis,
    /// Regression window START:END; repeat for several. Default: 2000-12:2007-12
    /// and 2008-01 onward, clipped to the data.
    #[arg(long = "sample", value_name = "START:END")]
    pub samples: Vec<MonthRange>,
    /// Heteroskedasticity-robust (HC1) standard errors.
    #[arg(long)]
    pub robust: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub analysis: Analysis,
}

#[derive(Debug, Args)]
pub struct ShiftersArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub analysis: Analysis,
    /// Month at which every shifter is zero.
    #[arg(long, default_value = "2007-04")]
    pub reference: MonthDate,
}

#[derive(Debug, Args)]
pub struct ThreeStateArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub analysis: Analysis,
    #[arg(long, default_value = "2007-04")]
    pub reference: MonthDate,
    #[arg(long, default_value_t = 1e-12)]
    pub rake_tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub rake_max_iter: usize,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub analysis: Analysis,
    /// Absolute Beveridge elasticity; repeat for several. Default: 0.9 and 2.33.
    #[arg(long = "elasticity")]
    pub elasticities: Vec<f64>,
    #[arg(long, default_value_t = beveridge::efficiency::MS_VACANCY_COST)]
    pub vacancy_cost: f64,
    #[arg(long, default_value_t = beveridge::efficiency::MS_UNEMPLOYMENT_COST)]
    pub unemployment_cost: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub shared: Shared,
}

/// Moving-average settings as applied.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Smoothing {
    pub window: usize,
    pub alignment: Alignment,
}

/// Analysis settings after defaults are filled in and checked against the
/// data range.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedAnalysis {
    pub alpha: f64,
    pub smoothing: Option<Smoothing>,
    pub swing: SwingBounds,
    pub approx_window: MonthRange,
    pub data_range: MonthRange,
}

impl Analysis {
    pub fn smoothing(&self) -> Result<Option<Smoothing>> {
        match self.smooth {
            None | Some(1) => Ok(None),
            Some(0) => Err(CliError::Config("--smooth must be at least 1".into())),
            Some(window) => Ok(Some(Smoothing { window, alignment: self.smooth_align.into() })),
        }
    }

    pub fn alpha(&self) -> Result<f64> {
        let alpha = self.alpha.unwrap_or(DEFAULT_ALPHA);
        if alpha > 0.0 && alpha < 1.0 {
            Ok(alpha)
        } else {
            Err(CliError::Config(format!("--alpha must lie in (0,1), got {alpha}")))
        }
    }

    /// Fills defaults and checks every window against `data`.
    pub fn resolve(&self, data: MonthRange) -> Result<ResolvedAnalysis> {
        let approx_window = match self.approx_window {
            Some(w) => {
                within(w, data, "--approx-window")?;
                w
            }
            None => default_approx_window(data),
        };
        Ok(ResolvedAnalysis {
            alpha: self.alpha()?,
            smoothing: self.smoothing()?,
            swing: SwingBounds {
                down_start: self.down_start,
                down_end: self.down_end,
                up_start: self.up_start,
                up_end: self.up_end,
            },
            approx_window,
            data_range: data,
        })
    }

    /// Swing dates must order correctly and sit inside `data`.
    pub fn check_swing(&self, data: MonthRange) -> Result<()> {
        if !(self.down_start <= self.down_end && self.down_end < self.up_start) {
            return Err(CliError::Config(format!(
                "need down-start <= down-end < up-start; got {}, {}, {}",
                self.down_start, self.down_end, self.up_start
            )));
        }
        for (flag, m) in [("--down-start", self.down_start), ("--down-end", self.down_end), ("--up-start", self.up_start)]
            .into_iter()
            .chain(self.up_end.map(|m| ("--up-end", m)))
        {
            if !data.contains(m) {
                return Err(CliError::Config(format!("{flag} {m} outside data range {data}")));
            }
        }
        Ok(())
    }
}

pub fn default_approx_window(data: MonthRange) -> MonthRange {
    let from = MonthDate::ym(2008, 1);
    if from > data.end {
        data
    } else {
        MonthRange::new(from.max(data.start), data.end).expect("ordered window")
    }
}

pub fn within(w: MonthRange, data: MonthRange, flag: &str) -> Result<()> {
    if data.contains(w.start) && data.contains(w.end) {
        Ok(())
    } else {
        Err(CliError::Config(format!("{flag} {w} outside data range {data}")))
    }
}

/// Intersection of `w` with `data`, if any.
pub fn clip(w: MonthRange, data: MonthRange) -> Option<MonthRange> {
    MonthRange::new(w.start.max(data.start), w.end.min(data.end)).ok()
}
