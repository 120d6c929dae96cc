//! Embedding files, experiment configs and result records.

mod config;
mod embeddings;
mod results;

pub use config::{format_config, parse_config, read_config, CONFIG_KEYS};
pub use embeddings::{
    decode_binary, decode_csv, encode_binary, encode_csv, group_by_class, read_embedding_file,
    read_embeddings, write_embedding_file, EmbeddingFile, EmbeddingFormat, EmbeddingRecord, BINARY_MAGIC,
};
pub use results::{
    read_jsonl, summarize, summary_csv, timings_csv, to_jsonl, ResultRecord, SummaryRow,
};

use std::path::Path;

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> crate::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
