//! The neural accept/reject gate: an embedding → LSTM → max-pooling → dense
//! → sigmoid binary classifier over (hypothesis, candidate, corrector
//! hyperparameters) triples, trained to predict whether applying a proposed
//! correction lowers the WER.

mod metrics;
mod model;
mod train;
mod vocab;

pub use metrics::{evaluate, metrics_from_scores, roc_auc, ClassMetrics, EvalMetrics};
pub use model::{GateDims, GateModel};
pub use train::{mean_loss, mean_loss_gradients, train, TrainConfig, TrainCurves, TrainOutput};
pub use vocab::{encode, encode_parts, rep_token, selector_token, threshold_token, Vocabulary, PAD, SEP, UNK};
