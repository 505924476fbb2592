//! Dynamic Beveridge-curve accounting.
//!
//! Stocks go in, flow probabilities and matching efficiency come out, and
//! vertical shifts of the curve are attributed to out-of-steady-state
//! dynamics, separations and matching efficiency. Everything numeric is
//! generic over [`Scalar`]; the aliases below fix it to `f64`.

pub mod beveridge;
pub mod decomp;
pub mod efficiency;
pub mod error;
pub mod flows2;
pub mod flows3;
pub mod frame;
pub mod matching;
pub mod scalar;
pub mod series;
pub mod sim;

pub use beveridge::{ApproximationPoint, ThreeStateApproximationPoint, VacancyPath};
pub use decomp::{Margin, SwingBounds, ORDERINGS};
pub use efficiency::EfficiencyCalibration;
pub use error::{Error, Result};
pub use flows2::TwoStatePanel;
pub use flows3::ThreeStatePanel;
pub use frame::Frame;
pub use scalar::Scalar;
pub use series::{Alignment, MonthDate, MonthRange, MonthlySeries};

pub type Series = MonthlySeries<f64>;
pub type TwoStatePanelF64 = TwoStatePanel<f64>;
pub type ThreeStatePanelF64 = ThreeStatePanel<f64>;
pub type Point = ApproximationPoint<f64>;
pub type ThreeStatePoint = ThreeStateApproximationPoint<f64>;
pub type Calibration = EfficiencyCalibration<f64>;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
