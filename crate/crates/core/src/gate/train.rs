//! Training: backpropagation through the whole network (embeddings included)
//! with minibatch ADAM on a binary cross-entropy loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::dataset::CorrectionCandidate;
use crate::error::{Error, Result};
use crate::gate::model::{ForwardCache, GateDims, GateModel, LstmGate, Mat};
use crate::gate::vocab::Vocabulary;

/// Training protocol: two epochs of minibatch ADAM, batch size 64, unless
/// overridden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_seq_len: usize,
    pub seed: u64,
    pub dims: GateDims,
    /// Optional dropout probability on the dense layer (training only).
    pub dropout: Option<f64>,
}

impl TrainConfig {
    pub fn new(seed: u64) -> Self {
        TrainConfig {
            epochs: 2,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_seq_len: 64,
            seed,
            dims: GateDims::default(),
            dropout: None,
        }
    }
}

/// Per-batch loss/accuracy traces plus per-epoch validation numbers.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TrainCurves {
    pub batch_loss: Vec<f64>,
    pub batch_accuracy: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub val_accuracy: Vec<f64>,
}

pub struct TrainOutput {
    pub model: GateModel,
    pub curves: TrainCurves,
}

/// Numerically stable binary cross-entropy from the logit:
/// max(z,0) − z·y + ln(1 + e^(−|z|)).
pub(crate) fn bce_from_logit(logit: f64, label: f64) -> f64 {
    logit.max(0.0) - logit * label + (-logit.abs()).exp().ln_1p()
}

/// Gradient accumulator mirroring every model parameter block.
pub(crate) struct Grads {
    embedding: Mat,
    input_gate: LstmGate,
    forget_gate: LstmGate,
    output_gate: LstmGate,
    candidate_gate: LstmGate,
    dense_w: Mat,
    dense_b: Vec<f64>,
    out_w: Vec<f64>,
    out_b: f64,
}

impl Grads {
    pub fn zeros_like(model: &GateModel) -> Self {
        let zero_gate = |g: &LstmGate| LstmGate {
            w: Mat::zeros(g.w.rows, g.w.cols),
            u: Mat::zeros(g.u.rows, g.u.cols),
            b: vec![0.0; g.b.len()],
        };
        Grads {
            embedding: Mat::zeros(model.embedding.rows, model.embedding.cols),
            input_gate: zero_gate(&model.input_gate),
            forget_gate: zero_gate(&model.forget_gate),
            output_gate: zero_gate(&model.output_gate),
            candidate_gate: zero_gate(&model.candidate_gate),
            dense_w: Mat::zeros(model.dense_w.rows, model.dense_w.cols),
            dense_b: vec![0.0; model.dense_b.len()],
            out_w: vec![0.0; model.out_w.len()],
            out_b: 0.0,
        }
    }

    fn reset(&mut self) {
        for (_, block) in self.blocks_mut() {
            block.fill(0.0);
        }
    }

    /// Same names and order as [`GateModel::param_blocks`].
    pub fn blocks(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("embedding", &self.embedding.data),
            ("input_gate.w", &self.input_gate.w.data),
            ("input_gate.u", &self.input_gate.u.data),
            ("input_gate.b", &self.input_gate.b),
            ("forget_gate.w", &self.forget_gate.w.data),
            ("forget_gate.u", &self.forget_gate.u.data),
            ("forget_gate.b", &self.forget_gate.b),
            ("output_gate.w", &self.output_gate.w.data),
            ("output_gate.u", &self.output_gate.u.data),
            ("output_gate.b", &self.output_gate.b),
            ("candidate_gate.w", &self.candidate_gate.w.data),
            ("candidate_gate.u", &self.candidate_gate.u.data),
            ("candidate_gate.b", &self.candidate_gate.b),
            ("dense.w", &self.dense_w.data),
            ("dense.b", &self.dense_b),
            ("out.w", &self.out_w),
            ("out.b", std::slice::from_ref(&self.out_b)),
        ]
    }

    fn blocks_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![
            ("embedding", &mut self.embedding.data),
            ("input_gate.w", &mut self.input_gate.w.data),
            ("input_gate.u", &mut self.input_gate.u.data),
            ("input_gate.b", &mut self.input_gate.b),
            ("forget_gate.w", &mut self.forget_gate.w.data),
            ("forget_gate.u", &mut self.forget_gate.u.data),
            ("forget_gate.b", &mut self.forget_gate.b),
            ("output_gate.w", &mut self.output_gate.w.data),
            ("output_gate.u", &mut self.output_gate.u.data),
            ("output_gate.b", &mut self.output_gate.b),
            ("candidate_gate.w", &mut self.candidate_gate.w.data),
            ("candidate_gate.u", &mut self.candidate_gate.u.data),
            ("candidate_gate.b", &mut self.candidate_gate.b),
            ("dense.w", &mut self.dense_w.data),
            ("dense.b", &mut self.dense_b),
            ("out.w", &mut self.out_w),
            ("out.b", std::slice::from_mut(&mut self.out_b)),
        ]
    }
}

/// Accumulate gradients for one example whose loss enters the batch mean
/// with weight `scale` (dL/dlogit = scale · (p − y) is passed in as `dz`).
#[allow(clippy::needless_range_loop)] // the kernels index many parallel rows
pub(crate) fn backward(model: &GateModel, cache: &ForwardCache, dz: f64, grads: &mut Grads) {
    let hidden = model.dims.hidden;
    let dense = model.dims.dense;
    let len = cache.idx.len();

    // Output unit.
    for k in 0..dense {
        grads.out_w[k] += dz * cache.dense_act[k];
    }
    grads.out_b += dz;

    // Dense layer (through dropout and the rectifier).
    let mut d_pre = vec![0.0; dense];
    for k in 0..dense {
        let mut d_act = dz * model.out_w[k];
        if let Some(mask) = &cache.dropout_mask {
            d_act *= mask[k];
        }
        d_pre[k] = if cache.dense_pre[k] > 0.0 { d_act } else { 0.0 };
    }
    grads.dense_w.outer_acc(&d_pre, &cache.pooled);
    for k in 0..dense {
        grads.dense_b[k] += d_pre[k];
    }
    let mut d_pool = vec![0.0; hidden];
    model.dense_w.t_matvec_acc(&d_pre, &mut d_pool);

    if len == 0 {
        return; // all-PAD input: the pooled vector is constant zero
    }

    // Route pooled gradients to the timestep each maximum came from.
    let mut dh_pool = vec![0.0; len * hidden];
    for u in 0..hidden {
        if let Some(t) = cache.pool_src[u] {
            dh_pool[t * hidden + u] += d_pool[u];
        }
    }

    let zeros = vec![0.0; hidden];
    let mut dh_carry = vec![0.0; hidden];
    let mut dc_carry = vec![0.0; hidden];
    let mut di_raw = vec![0.0; hidden];
    let mut df_raw = vec![0.0; hidden];
    let mut do_raw = vec![0.0; hidden];
    let mut dg_raw = vec![0.0; hidden];
    let mut dx = vec![0.0; model.dims.embed];
    for t in (0..len).rev() {
        let i_t = cache.i.row(t);
        let f_t = cache.f.row(t);
        let o_t = cache.o.row(t);
        let g_t = cache.g.row(t);
        let c_t = cache.c.row(t);
        let c_prev = if t == 0 { &zeros[..] } else { cache.c.row(t - 1) };
        let h_prev = if t == 0 { &zeros[..] } else { cache.h.row(t - 1) };

        for u in 0..hidden {
            let dh = dh_pool[t * hidden + u] + dh_carry[u];
            let tanh_c = c_t[u].tanh();
            do_raw[u] = dh * tanh_c * o_t[u] * (1.0 - o_t[u]);
            let dc = dc_carry[u] + dh * o_t[u] * (1.0 - tanh_c * tanh_c);
            df_raw[u] = dc * c_prev[u] * f_t[u] * (1.0 - f_t[u]);
            di_raw[u] = dc * g_t[u] * i_t[u] * (1.0 - i_t[u]);
            dg_raw[u] = dc * i_t[u] * (1.0 - g_t[u] * g_t[u]);
            dc_carry[u] = dc * f_t[u];
        }

        let x = model.embedding.row(cache.idx[t]);
        dx.fill(0.0);
        dh_carry.fill(0.0);
        for (gate_model, gate_grads, d_raw) in [
            (&model.input_gate, &mut grads.input_gate, &di_raw),
            (&model.forget_gate, &mut grads.forget_gate, &df_raw),
            (&model.output_gate, &mut grads.output_gate, &do_raw),
            (&model.candidate_gate, &mut grads.candidate_gate, &dg_raw),
        ] {
            gate_grads.w.outer_acc(d_raw, x);
            gate_grads.u.outer_acc(d_raw, h_prev);
            for u in 0..hidden {
                gate_grads.b[u] += d_raw[u];
            }
            gate_model.w.t_matvec_acc(d_raw, &mut dx);
            gate_model.u.t_matvec_acc(d_raw, &mut dh_carry);
        }
        let erow = grads.embedding.row_mut(cache.idx[t]);
        for (e, d) in erow.iter_mut().zip(&dx) {
            *e += d;
        }
    }
}

/// Mean loss of a set of encoded examples (no dropout). Exposed so tests can
/// difference it against the analytic gradients.
pub fn mean_loss(model: &GateModel, examples: &[(Vec<usize>, f64)]) -> f64 {
    let total: f64 = examples
        .iter()
        .map(|(seq, y)| bce_from_logit(model.forward_cached(seq, None).logit, *y))
        .sum();
    total / examples.len() as f64
}

/// Mean loss and its analytic gradient for every parameter block, in the
/// block order of [`GateModel::param_blocks`].
pub fn mean_loss_gradients(
    model: &GateModel,
    examples: &[(Vec<usize>, f64)],
) -> (f64, Vec<(&'static str, Vec<f64>)>) {
    let mut grads = Grads::zeros_like(model);
    let scale = 1.0 / examples.len() as f64;
    let mut total = 0.0;
    for (seq, y) in examples {
        let cache = model.forward_cached(seq, None);
        total += bce_from_logit(cache.logit, *y);
        backward(model, &cache, scale * (cache.prob - y), &mut grads);
    }
    let blocks = grads
        .blocks()
        .into_iter()
        .map(|(name, data)| (name, data.to_vec()))
        .collect();
    (total * scale, blocks)
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
}

impl Adam {
    fn new(model: &GateModel) -> Self {
        let shapes: Vec<usize> = model.param_blocks().iter().map(|(_, b)| b.len()).collect();
        Adam {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    fn update(&mut self, model: &mut GateModel, grads: &Grads, cfg: &TrainConfig) {
        self.step += 1;
        let bias1 = 1.0 - cfg.beta1.powi(self.step as i32);
        let bias2 = 1.0 - cfg.beta2.powi(self.step as i32);
        let grad_blocks = grads.blocks();
        for (idx, (_, params)) in model.param_blocks_mut().into_iter().enumerate() {
            let g = grad_blocks[idx].1;
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            for j in 0..params.len() {
                m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
                v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
                let m_hat = m[j] / bias1;
                let v_hat = v[j] / bias2;
                params[j] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
        }
    }
}

/// Train a gate on labeled candidates: builds the vocabulary from the
/// training text, initializes the model from the seed, and runs minibatch
/// ADAM with per-epoch shuffling. Deterministic given the config.
pub fn train(
    train_set: &[CorrectionCandidate],
    val_set: &[CorrectionCandidate],
    cfg: &TrainConfig,
) -> Result<TrainOutput> {
    if train_set.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let vocab = Vocabulary::build(train_set);
    let mut model = GateModel::init(vocab, cfg.dims, cfg.max_seq_len, &mut rng);

    let encode_all = |set: &[CorrectionCandidate]| -> Vec<(Vec<usize>, f64)> {
        set.iter()
            .map(|c| (model.encode(c), f64::from(c.label)))
            .collect()
    };
    let train_enc = encode_all(train_set);
    let val_enc = encode_all(val_set);

    let mut adam = Adam::new(&model);
    let mut grads = Grads::zeros_like(&model);
    let mut curves = TrainCurves::default();
    let mut order: Vec<usize> = (0..train_enc.len()).collect();
    let mut mask = vec![0.0; cfg.dims.dense];

    for _epoch in 0..cfg.epochs {
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for batch in order.chunks(cfg.batch_size) {
            grads.reset();
            let scale = 1.0 / batch.len() as f64;
            let mut loss_sum = 0.0;
            let mut hits = 0usize;
            for &idx in batch {
                let (seq, label) = &train_enc[idx];
                let dropout_mask = cfg.dropout.map(|p| {
                    let keep = 1.0 - p;
                    for m in mask.iter_mut() {
                        *m = if rng.random::<f64>() < p { 0.0 } else { 1.0 / keep };
                    }
                    &mask[..]
                });
                let cache = model.forward_cached(seq, dropout_mask);
                loss_sum += bce_from_logit(cache.logit, *label);
                if (cache.prob > 0.5) == (*label == 1.0) {
                    hits += 1;
                }
                backward(&model, &cache, scale * (cache.prob - label), &mut grads);
            }
            let loss = loss_sum * scale;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    batch: curves.batch_loss.len(),
                    loss,
                });
            }
            curves.batch_loss.push(loss);
            curves.batch_accuracy.push(hits as f64 / batch.len() as f64);
            adam.update(&mut model, &grads, cfg);
        }

        if !val_enc.is_empty() {
            let mut loss_sum = 0.0;
            let mut hits = 0usize;
            for (seq, label) in &val_enc {
                let cache = model.forward_cached(seq, None);
                loss_sum += bce_from_logit(cache.logit, *label);
                if (cache.prob > 0.5) == (*label == 1.0) {
                    hits += 1;
                }
            }
            curves.val_loss.push(loss_sum / val_enc.len() as f64);
            curves.val_accuracy.push(hits as f64 / val_enc.len() as f64);
        }
    }

    Ok(TrainOutput { model, curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrector::{PhocoConfig, Selector};
    use crate::dataset::SourceHyp;
    use crate::phonetics::Representation;

    fn candidate(hyp: &str, cand: &str, label: u8) -> CorrectionCandidate {
        CorrectionCandidate {
            utterance_id: "u".into(),
            reference: "r".into(),
            hyp_with_context: hyp.into(),
            hyp_without_context: String::new(),
            cfg: PhocoConfig::new(0.2, Representation::Ipa, Selector::Win).unwrap(),
            source_hyp: SourceHyp::WithContext,
            candidate: cand.into(),
            wer_hyp: 0.0,
            wer_cand: 0.0,
            label,
        }
    }

    fn tiny_cfg(seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig::new(seed);
        cfg.dims = GateDims {
            embed: 8,
            hidden: 6,
            dense: 4,
        };
        cfg.max_seq_len = 12;
        cfg
    }

    #[test]
    fn zero_model_loss_is_ln_two() {
        let vocab = Vocabulary::build(&[candidate("a b", "a c", 1)]);
        let model = GateModel::zeroed(vocab, GateDims { embed: 4, hidden: 3, dense: 2 }, 8);
        let examples = vec![
            (vec![20, 21, 2, 20, 2, 5, 16, 18], 1.0),
            (vec![20, 21, 2, 20, 2, 5, 16, 18], 0.0),
        ];
        let loss = mean_loss(&model, &examples);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-9, "loss {loss}");
    }

    #[test]
    fn single_example_memorization() {
        let train_set = vec![candidate("quiero una coca gola", "quiero una coca cola", 1)];
        // Production widths; one example, one step per epoch.
        let mut cfg = TrainConfig::new(42);
        cfg.epochs = 200;
        cfg.batch_size = 1;
        cfg.max_seq_len = 16;
        let out = train(&train_set, &[], &cfg).unwrap();
        assert_eq!(out.curves.batch_loss.len(), 200);
        let final_loss = *out.curves.batch_loss.last().unwrap();
        assert!(final_loss < 0.01, "loss after 200 steps: {final_loss}");
    }

    #[test]
    fn training_is_deterministic_under_seed() {
        let train_set: Vec<_> = (0..12)
            .map(|i| {
                candidate(
                    if i % 2 == 0 { "coca gola" } else { "agua" },
                    if i % 2 == 0 { "coca cola" } else { "agua" },
                    u8::from(i % 2 == 0),
                )
            })
            .collect();
        let cfg = tiny_cfg(7);
        let a = train(&train_set, &[], &cfg).unwrap();
        let b = train(&train_set, &[], &cfg).unwrap();
        assert_eq!(a.curves.batch_loss, b.curves.batch_loss);
        assert_eq!(a.curves.batch_accuracy, b.curves.batch_accuracy);
        assert_eq!(a.model, b.model);

        let c = train(&train_set, &[], &tiny_cfg(8)).unwrap();
        assert_ne!(a.curves.batch_loss, c.curves.batch_loss);
    }

    #[test]
    fn rejects_empty_training_set() {
        assert!(matches!(
            train(&[], &[], &TrainConfig::new(1)),
            Err(Error::EmptyCandidates)
        ));
    }

    #[test]
    fn aborts_on_non_finite_loss() {
        let set = vec![
            candidate("coca gola", "coca cola", 1),
            candidate("agua", "agua", 0),
        ];
        let mut cfg = tiny_cfg(1);
        cfg.learning_rate = 1e308;
        cfg.epochs = 10;
        assert!(matches!(
            train(&set, &[], &cfg),
            Err(Error::NonFiniteLoss { .. })
        ));
    }

    #[test]
    fn dropout_masks_only_affect_training_forward() {
        let train_set = vec![candidate("a b", "a c", 1), candidate("b a", "b a", 0)];
        let mut cfg = tiny_cfg(3);
        cfg.epochs = 2;
        cfg.dropout = Some(0.5);
        let out = train(&train_set, &[], &cfg).unwrap();
        // Inference path never applies dropout: repeated predictions agree.
        let p1 = out.model.predict(&train_set[0]);
        let p2 = out.model.predict(&train_set[0]);
        assert_eq!(p1, p2);
    }
}
