//! Labelled feature records, file formats, fold plans and the synthetic
//! generator.

mod io;
mod record;
mod split;
mod synth;

pub use io::{
    decode_binary, decode_jsonl, encode_binary, encode_jsonl, load_dataset, parse_jsonl_record,
    save_dataset, DataFormat, DATASET_VERSION,
};
pub use record::{Dataset, FeatureRecord, Label, FEATURE_DIM};
pub use split::{stratified_holdout, stratified_kfold, FoldPlan};
pub use synth::{
    bayes_accuracy, bayes_ceiling_mc, generate_synthetic, LatentAccess, SynthConfig,
    DEFAULT_BAYES_CEILING, MAX_DRAWS_PER_RECORD,
};
