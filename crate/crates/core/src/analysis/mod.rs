//! Seasonality scoring, transfer measurement and rank statistics.

mod ranking;
mod seasonality;
mod transfer;

pub use ranking::{
    mean_average_rank, nemenyi_cd, nemenyi_q, rank_row, significantly_different, win_loss,
    EvalTable, WinLoss,
};
pub use seasonality::{
    autocorrelation, seasonality_dataset, seasonality_lags, seasonality_series,
    SeasonalityReport, MIN_SEASONALITY_LEN, SEASONAL_THRESHOLD,
};
pub use transfer::{transfer_savings, TransferSavings};
