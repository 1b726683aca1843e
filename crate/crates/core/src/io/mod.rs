//! CSV ingestion, the end-to-end pipeline and report emission.

mod ingest;
mod output;
mod report;

pub use ingest::{
    InspectionDataset, MergedRow, Provenance, RejectedRow, SchemaOptions, WeldTypeKey, ingest_csv,
    ingest_reader,
};
pub use output::{
    boxplot_csv, comparison_csv, fit_csv, posterior_table_csv, ranking_csv, records_csv,
    scatter_csv, to_json_string, write_atomic,
};
pub use report::{Boxplots, CurveSource, Report, TOOL_NAME, TOOL_VERSION, ToolInfo, build_report, run_pipeline};
