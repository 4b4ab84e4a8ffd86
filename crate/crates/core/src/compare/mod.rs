//! Distortion analysis between the supervised and unsupervised evaluations:
//! distribution statistics, rank tables with percentiles and quartiles,
//! quartile confusion, rank jumps and correlation batteries.

mod ranking;
mod report;
mod stats;

pub use ranking::{
    assign_quartile, parse_reference_rankings, quartile_confusion, rank_jumps, rank_percentile, rank_universities,
    reference_rankings, write_quartile_matrix, write_rank_table, ModeRank, QuartileJump, QuartileMatrix, RankRow,
    RankTable, ReferenceRow, ScoredUniversity,
};
pub use report::{
    build_report, correlation_battery, deviation_correlations, distribution_table, pct_deviation,
    rank_table_correlation, sc_deviations, write_distribution_stats, ComparisonReport, DeviationCorrelations,
    GroupCorrelation, LabelledStats, QuartileSummary, ReportParams, ScDeviation,
};
pub use stats::{
    average_ranks, distribution_stats, mean, median, pearson, percentile_of_sorted, spearman,
    spearman_from_rank_differences, DistributionStats, PERCENTILE_POINTS,
};
