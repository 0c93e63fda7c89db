//! Statistics over dislocation segments and daily ROC series: moments,
//! histograms, detrended fluctuation analysis, Granger causality, correlation,
//! OLS scaling fits, rankings and circle-plot exports.

pub mod circle;
pub mod dfa;
pub mod error;
pub mod granger;
pub mod hist;
mod lstsq;
pub mod moments;
pub mod ols;
pub mod rank;
pub mod series;

pub use circle::{circleplot_export, CirclePoint};
pub use dfa::{dfa_exponent, Dfa};
pub use error::AnalyticsError;
pub use granger::{granger_tests, GrangerResult, LagOutcome};
pub use hist::{duration_histogram, start_time_histogram};
pub use moments::{conditional_average, pearson_matrix, skew_kurtosis};
pub use ols::{log10_rows, ols_fit, OlsFit};
pub use rank::{rank_by, Ranking};
pub use series::{category_series, normalize_series, DailySeries, Metric};
