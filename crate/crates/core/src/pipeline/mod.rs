//! Pretraining on the synthetic corpus, then fine-tuning or from-scratch training on a
//! classification target.

mod data;
mod history;
mod train;

pub use data::{
    corpus_records, family_task, generate_corpus, label_record, reduce_training_set, reduced_class_count,
    split_train_val, write_corpus,
};
pub use history::{EpochRecord, TrainHistory};
pub use train::{
    argmax_rows, evaluate_classifier, evaluate_mse, finetune, init_seed, pretrain, pretrain_with_progress,
    train_scratch, EarlyStop, PretrainOutcome, TrainConfig, TrainOutcome, DESK_FINETUNE_EPOCHS, FINETUNE_EPOCHS,
    PRETRAIN_EPOCHS,
};

// rng stream indices, kept apart so the split, the shuffles and the initializations
// never share randomness
const SPLIT_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;
const REDUCE_STREAM: u64 = 1 << 20;
const SHUFFLE_STREAM: u64 = 1 << 32;
