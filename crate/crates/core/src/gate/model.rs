//! The classifier network: token embeddings, a recurrent layer with
//! input/forget/output/candidate gates, temporal max pooling over non-PAD
//! positions, a rectified dense layer, and a single logistic output unit.

use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::CorrectionCandidate;
use crate::error::{Error, Result};
use crate::gate::vocab::{encode, Vocabulary, PAD};

const MODEL_VERSION: u32 = 1;

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn glorot(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Mat { rows, cols, data }
    }

    pub fn uniform(rows: usize, cols: usize, limit: f64, rng: &mut impl Rng) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Mat { rows, cols, data }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// out += self · x
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = self.row(r);
            let mut acc = 0.0;
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            *o += acc;
        }
    }

    /// out += selfᵀ · y
    pub fn t_matvec_acc(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let row = self.row(r);
            for (o, w) in out.iter_mut().zip(row) {
                *o += yr * w;
            }
        }
    }

    /// self += y ⊗ x (rank-one update)
    pub fn outer_acc(&mut self, y: &[f64], x: &[f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let row = self.row_mut(r);
            for (o, xi) in row.iter_mut().zip(x) {
                *o += yr * xi;
            }
        }
    }
}

/// One recurrent gate: input weights, recurrent weights, bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct LstmGate {
    pub w: Mat,
    pub u: Mat,
    pub b: Vec<f64>,
}

impl LstmGate {
    fn init(embed: usize, hidden: usize, bias: f64, rng: &mut impl Rng) -> Self {
        LstmGate {
            w: Mat::glorot(hidden, embed, rng),
            u: Mat::glorot(hidden, hidden, rng),
            b: vec![bias; hidden],
        }
    }

    fn zeros(embed: usize, hidden: usize) -> Self {
        LstmGate {
            w: Mat::zeros(hidden, embed),
            u: Mat::zeros(hidden, hidden),
            b: vec![0.0; hidden],
        }
    }

    /// pre = b + W·x + U·h
    fn preactivate(&self, x: &[f64], h: &[f64], pre: &mut [f64]) {
        pre.copy_from_slice(&self.b);
        self.w.matvec_acc(x, pre);
        self.u.matvec_acc(h, pre);
    }
}

/// Layer widths. The production configuration is 128/60/50.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateDims {
    pub embed: usize,
    pub hidden: usize,
    pub dense: usize,
}

impl Default for GateDims {
    fn default() -> Self {
        GateDims {
            embed: 128,
            hidden: 60,
            dense: 50,
        }
    }
}

/// The trained classifier: its vocabulary, sequence length, and every
/// parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateModel {
    pub(crate) vocab: Vocabulary,
    pub(crate) max_seq_len: usize,
    pub(crate) dims: GateDims,
    pub(crate) embedding: Mat,
    pub(crate) input_gate: LstmGate,
    pub(crate) forget_gate: LstmGate,
    pub(crate) output_gate: LstmGate,
    pub(crate) candidate_gate: LstmGate,
    pub(crate) dense_w: Mat,
    pub(crate) dense_b: Vec<f64>,
    pub(crate) out_w: Vec<f64>,
    pub(crate) out_b: f64,
}

impl GateModel {
    /// Fresh model: embeddings uniform in ±0.05, Glorot weight matrices,
    /// zero biases except the forget gate's, which starts at +1.
    pub fn init(
        vocab: Vocabulary,
        dims: GateDims,
        max_seq_len: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let vocab_size = vocab.len();
        GateModel {
            vocab,
            max_seq_len,
            dims,
            embedding: Mat::uniform(vocab_size, dims.embed, 0.05, rng),
            input_gate: LstmGate::init(dims.embed, dims.hidden, 0.0, rng),
            forget_gate: LstmGate::init(dims.embed, dims.hidden, 1.0, rng),
            output_gate: LstmGate::init(dims.embed, dims.hidden, 0.0, rng),
            candidate_gate: LstmGate::init(dims.embed, dims.hidden, 0.0, rng),
            dense_w: Mat::glorot(dims.dense, dims.hidden, rng),
            dense_b: vec![0.0; dims.dense],
            out_w: (0..dims.dense)
                .map(|_| {
                    let limit = (6.0 / (dims.dense + 1) as f64).sqrt();
                    rng.random_range(-limit..limit)
                })
                .collect(),
            out_b: 0.0,
        }
    }

    /// A model over a bare index space with the given number of embedding
    /// rows, bypassing the vocabulary (whose reserved slots impose a minimum
    /// size). Drives `forward` on raw sequences — in tests and gradient
    /// checks — but not `encode`/`predict`.
    pub fn init_untied(
        vocab_size: usize,
        dims: GateDims,
        max_seq_len: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let mut model = Self::init(Vocabulary::build(&[]), dims, max_seq_len, rng);
        model.embedding = Mat::uniform(vocab_size, dims.embed, 0.05, rng);
        model
    }

    /// All-zero parameters (useful as a reference point: it outputs 0.5).
    pub fn zeroed(vocab: Vocabulary, dims: GateDims, max_seq_len: usize) -> Self {
        let vocab_size = vocab.len();
        GateModel {
            vocab,
            max_seq_len,
            dims,
            embedding: Mat::zeros(vocab_size, dims.embed),
            input_gate: LstmGate::zeros(dims.embed, dims.hidden),
            forget_gate: LstmGate::zeros(dims.embed, dims.hidden),
            output_gate: LstmGate::zeros(dims.embed, dims.hidden),
            candidate_gate: LstmGate::zeros(dims.embed, dims.hidden),
            dense_w: Mat::zeros(dims.dense, dims.hidden),
            dense_b: vec![0.0; dims.dense],
            out_w: vec![0.0; dims.dense],
            out_b: 0.0,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dims(&self) -> GateDims {
        self.dims
    }

    pub fn max_seq_len(&self) -> usize {
        self.max_seq_len
    }

    /// Encode a candidate with this model's vocabulary and sequence length.
    pub fn encode(&self, candidate: &CorrectionCandidate) -> Vec<usize> {
        encode(candidate, &self.vocab, self.max_seq_len)
    }

    /// Probability that the proposed correction should be applied.
    pub fn predict(&self, candidate: &CorrectionCandidate) -> f64 {
        self.forward(&self.encode(candidate))
    }

    /// [`Self::predict`] for a bare (hypothesis, candidate, config) triple.
    pub fn predict_parts(
        &self,
        hypothesis: &str,
        candidate: &str,
        cfg: &crate::corrector::PhocoConfig,
    ) -> f64 {
        self.forward(&crate::gate::vocab::encode_parts(
            hypothesis,
            candidate,
            cfg,
            &self.vocab,
            self.max_seq_len,
        ))
    }

    /// Run the network over an index sequence.
    pub fn forward(&self, seq: &[usize]) -> f64 {
        self.forward_cached(seq, None).prob
    }

    pub(crate) fn forward_cached(
        &self,
        seq: &[usize],
        dense_dropout_mask: Option<&[f64]>,
    ) -> ForwardCache {
        let hidden = self.dims.hidden;
        // Positions after the last non-PAD token cannot reach the pooled
        // vector, so the recurrence stops there.
        let len = seq.iter().rposition(|&i| i != PAD).map_or(0, |p| p + 1);

        let mut cache = ForwardCache {
            idx: seq[..len].to_vec(),
            i: StepMatrix::new(len, hidden),
            f: StepMatrix::new(len, hidden),
            o: StepMatrix::new(len, hidden),
            g: StepMatrix::new(len, hidden),
            c: StepMatrix::new(len, hidden),
            h: StepMatrix::new(len, hidden),
            pooled: vec![0.0; hidden],
            pool_src: vec![None; hidden],
            dense_pre: vec![0.0; self.dims.dense],
            dense_act: vec![0.0; self.dims.dense],
            dropout_mask: dense_dropout_mask.map(|m| m.to_vec()),
            logit: 0.0,
            prob: 0.0,
        };

        let mut h_prev = vec![0.0; hidden];
        let mut c_prev = vec![0.0; hidden];
        let mut pre = vec![0.0; hidden];
        for t in 0..len {
            let x = self.embedding.row(cache.idx[t]);

            self.input_gate.preactivate(x, &h_prev, &mut pre);
            for (dst, &p) in cache.i.row_mut(t).iter_mut().zip(&pre) {
                *dst = sigmoid(p);
            }
            self.forget_gate.preactivate(x, &h_prev, &mut pre);
            for (dst, &p) in cache.f.row_mut(t).iter_mut().zip(&pre) {
                *dst = sigmoid(p);
            }
            self.output_gate.preactivate(x, &h_prev, &mut pre);
            for (dst, &p) in cache.o.row_mut(t).iter_mut().zip(&pre) {
                *dst = sigmoid(p);
            }
            self.candidate_gate.preactivate(x, &h_prev, &mut pre);
            for (dst, &p) in cache.g.row_mut(t).iter_mut().zip(&pre) {
                *dst = p.tanh();
            }

            #[allow(clippy::needless_range_loop)] // indexes five parallel rows
            for u in 0..hidden {
                let c = cache.f.row(t)[u] * c_prev[u] + cache.i.row(t)[u] * cache.g.row(t)[u];
                cache.c.row_mut(t)[u] = c;
                cache.h.row_mut(t)[u] = cache.o.row(t)[u] * c.tanh();
            }
            c_prev.copy_from_slice(cache.c.row(t));
            h_prev.copy_from_slice(cache.h.row(t));

            // Temporal max pooling, PAD positions masked out.
            if cache.idx[t] != PAD {
                for u in 0..hidden {
                    let v = cache.h.row(t)[u];
                    if cache.pool_src[u].is_none() || v > cache.pooled[u] {
                        cache.pooled[u] = v;
                        cache.pool_src[u] = Some(t);
                    }
                }
            }
        }

        cache.dense_pre.copy_from_slice(&self.dense_b);
        self.dense_w.matvec_acc(&cache.pooled, &mut cache.dense_pre);
        for (a, &p) in cache.dense_act.iter_mut().zip(&cache.dense_pre) {
            *a = p.max(0.0);
        }
        if let Some(mask) = &cache.dropout_mask {
            for (a, &m) in cache.dense_act.iter_mut().zip(mask) {
                *a *= m;
            }
        }

        let mut logit = self.out_b;
        for (w, a) in self.out_w.iter().zip(&cache.dense_act) {
            logit += w * a;
        }
        cache.logit = logit;
        cache.prob = sigmoid(logit);
        cache
    }

    /// Named views of every parameter block, in a fixed order.
    pub fn param_blocks(&self) -> Vec<(&'static str, &[f64])> {
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

    pub fn param_blocks_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
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

    fn validate(&self) -> Result<()> {
        let d = self.dims;
        let checks: [(&str, usize, usize, &Mat); 10] = [
            ("embedding", self.vocab.len(), d.embed, &self.embedding),
            ("input_gate.w", d.hidden, d.embed, &self.input_gate.w),
            ("input_gate.u", d.hidden, d.hidden, &self.input_gate.u),
            ("forget_gate.w", d.hidden, d.embed, &self.forget_gate.w),
            ("forget_gate.u", d.hidden, d.hidden, &self.forget_gate.u),
            ("output_gate.w", d.hidden, d.embed, &self.output_gate.w),
            ("output_gate.u", d.hidden, d.hidden, &self.output_gate.u),
            ("candidate_gate.w", d.hidden, d.embed, &self.candidate_gate.w),
            ("candidate_gate.u", d.hidden, d.hidden, &self.candidate_gate.u),
            ("dense.w", d.dense, d.hidden, &self.dense_w),
        ];
        for (name, rows, cols, m) in checks {
            if m.rows != rows || m.cols != cols || m.data.len() != rows * cols {
                return Err(Error::ModelFormat(format!(
                    "{name} has shape {}x{} (len {}), expected {rows}x{cols}",
                    m.rows,
                    m.cols,
                    m.data.len()
                )));
            }
        }
        for (name, len, v) in [
            ("input_gate.b", d.hidden, &self.input_gate.b),
            ("forget_gate.b", d.hidden, &self.forget_gate.b),
            ("output_gate.b", d.hidden, &self.output_gate.b),
            ("candidate_gate.b", d.hidden, &self.candidate_gate.b),
            ("dense.b", d.dense, &self.dense_b),
            ("out.w", d.dense, &self.out_w),
        ] {
            if v.len() != len {
                return Err(Error::ModelFormat(format!(
                    "{name} has length {}, expected {len}",
                    v.len()
                )));
            }
        }
        if self.max_seq_len < 5 {
            return Err(Error::ModelFormat(format!(
                "max_seq_len {} is too small",
                self.max_seq_len
            )));
        }
        for (name, block) in self.param_blocks() {
            if block.iter().any(|x| !x.is_finite()) {
                return Err(Error::ModelFormat(format!("{name} contains non-finite values")));
            }
        }
        Ok(())
    }

    /// Write the model as a versioned JSON container.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(
            &mut w,
            &ModelFile {
                version: MODEL_VERSION,
                model: self.clone(),
            },
        )
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
        use std::io::Write as _;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Read a model container, validating version and shapes.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let container: ModelFile = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        if container.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                container.version
            )));
        }
        container.model.validate()?;
        Ok(container.model)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    model: GateModel,
}

/// Per-timestep activations, stored as a flat steps × width buffer.
#[derive(Debug, Clone)]
pub(crate) struct StepMatrix {
    width: usize,
    data: Vec<f64>,
}

impl StepMatrix {
    fn new(steps: usize, width: usize) -> Self {
        StepMatrix {
            width,
            data: vec![0.0; steps * width],
        }
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.width..(t + 1) * self.width]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.data[t * self.width..(t + 1) * self.width]
    }
}

/// Everything the backward pass needs from one forward run.
#[derive(Debug, Clone)]
pub(crate) struct ForwardCache {
    pub idx: Vec<usize>,
    pub i: StepMatrix,
    pub f: StepMatrix,
    pub o: StepMatrix,
    pub g: StepMatrix,
    pub c: StepMatrix,
    pub h: StepMatrix,
    pub pooled: Vec<f64>,
    pub pool_src: Vec<Option<usize>>,
    pub dense_pre: Vec<f64>,
    pub dense_act: Vec<f64>,
    pub dropout_mask: Option<Vec<f64>>,
    pub logit: f64,
    pub prob: f64,
}
