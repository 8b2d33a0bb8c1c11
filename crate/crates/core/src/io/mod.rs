//! On-disk formats: the binary corpus, model checkpoints, and UCR-style text files.

mod checkpoint;
mod dataset;
mod ucr;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, quantize, save_checkpoint,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use dataset::{
    is_dataset_file, read_dataset, write_dataset, Dataset, DatasetHeader, DatasetWriter, Record,
    DATASET_MAGIC, DATASET_VERSION, FLAG_SYNTHETIC,
};
pub use ucr::{
    class_counts, load_ucr_pair, load_ucr_tsv, write_ucr_tsv, ClassMap, LabeledDataset, UcrFile,
};
