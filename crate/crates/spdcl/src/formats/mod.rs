//! On-disk formats: binary embedding dumps and parameter files, JSON-lines
//! datasets, scores and manifests, and the JSON run configuration.

pub mod config;
pub mod dataset;
pub mod dump;
pub mod manifest;
pub mod params;
pub mod scores;

pub use config::RunConfigFile;
pub use dataset::{
    read_dataset, write_dataset, DatasetRecord, LabelField, LabelSpace, PreparedData,
};
pub use dump::{decode_dump, encode_dump, read_dump, write_dump};
pub use manifest::{read_manifest, write_manifest, ManifestRecord};
pub use params::{read_params, write_params};
pub use scores::{read_scores, write_scores, ScoreRecord};
