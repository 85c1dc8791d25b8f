//! Experiment configuration, Monte Carlo drivers and CSV output.

mod config;
mod csv_out;
mod exact;
mod experiments;

pub use config::{read_config, write_config, Experiment, ExperimentConfig, ParamPack};
pub use csv_out::{fmt_f64, write_csv, write_csv_path, CsvOptions, CsvRecord};
pub use exact::{det_mod_p, exact_singular, is_prime};
pub use experiments::{
    alternating_vector, compressible_corpus, generic_vector, run_clcd_suite, run_compressible, run_experiment, run_quasirandom,
    run_rerandom_uniformity, run_single_vector, run_sn_tail, structured_vector, uniformity_fixture,
    AntiConcentrationRow, CompressibleOutcome, CompressibleRecord, ExtensionCount, NormRecord, QuasirandomOutcome,
    QuasirandomRecord, RerandomOutcome, ResampleRecord, SingleVectorOutcome, SnTailOutcome, TailRow, TrialRecord,
};
