//! Feedforward action scorer over embedded focus positions, with an
//! optional bidirectional recurrent encoder underneath.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;

use super::features::{slot_count, FeatureView};
use super::{EncodedSentence, Encoder, Hyperparams, SystemId, Vocabularies, NULL_ID};

/// A named parameter tensor, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    fn zeros(name: &str, shape: &[usize]) -> Self {
        Tensor {
            name: name.to_string(),
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    fn uniform<R: Rng>(name: &str, shape: &[usize], bound: f32, rng: &mut R) -> Self {
        let mut t = Tensor::zeros(name, shape);
        for x in &mut t.data {
            *x = rng.gen_range(-bound..=bound);
        }
        t
    }

    fn row(&self, r: usize) -> &[f32] {
        let w = self.shape[1];
        &self.data[r * w..(r + 1) * w]
    }
}

fn glorot(fan_in: usize, fan_out: usize) -> f32 {
    (6.0 / (fan_in + fan_out) as f32).sqrt()
}

/// `out += m * v` for a row-major `rows x v.len()` matrix.
fn matvec_add(m: &[f32], v: &[f32], out: &mut [f32]) {
    let cols = v.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &m[r * cols..(r + 1) * cols];
        *o += row.iter().zip(v).map(|(a, b)| a * b).sum::<f32>();
    }
}

/// `out += m^T * v`.
fn matvec_t_add(m: &[f32], v: &[f32], out: &mut [f32]) {
    let cols = out.len();
    for (r, &g) in v.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let row = &m[r * cols..(r + 1) * cols];
        for (o, a) in out.iter_mut().zip(row) {
            *o += g * a;
        }
    }
}

/// `m += a b^T`.
fn outer_add(m: &mut [f32], a: &[f32], b: &[f32]) {
    let cols = b.len();
    for (r, &g) in a.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let row = &mut m[r * cols..(r + 1) * cols];
        for (x, &y) in row.iter_mut().zip(b) {
            *x += g * y;
        }
    }
}

const FORM: usize = 0;
const POS: usize = 1;
const W1: usize = 2;
const B1: usize = 3;
const W2: usize = 4;
const B2: usize = 5;
// Recurrent encoder tensors, present only with `Encoder::BiRnn`.
const FWD_X: usize = 6;
const FWD_H: usize = 7;
const FWD_B: usize = 8;
const BWD_X: usize = 9;
const BWD_H: usize = 10;
const BWD_B: usize = 11;
const NULL_CTX: usize = 12;

const NAMES: [&str; 13] = [
    "form_embeddings",
    "pos_embeddings",
    "hidden_weights",
    "hidden_bias",
    "output_weights",
    "output_bias",
    "rnn_forward_input",
    "rnn_forward_recurrent",
    "rnn_forward_bias",
    "rnn_backward_input",
    "rnn_backward_recurrent",
    "rnn_backward_bias",
    "rnn_null",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Scorer {
    encoder: Encoder,
    slots: usize,
    token_dim: usize,
    tensors: Vec<Tensor>,
}

/// Per-sentence token vectors, plus what backpropagation needs.
#[derive(Clone, Debug)]
pub struct Encoding {
    tokens: Vec<Vec<f32>>,
    null: Vec<f32>,
    /// Embedded inputs and recurrent states, with the encoder only.
    inputs: Vec<Vec<f32>>,
    forward: Vec<Vec<f32>>,
    backward: Vec<Vec<f32>>,
}

/// Activations of one scoring pass.
#[derive(Clone, Debug)]
pub struct Activations {
    input: Vec<f32>,
    hidden: Vec<f32>,
    pub scores: Vec<f32>,
}

/// Gradient buffers shaped like the scorer's tensors, plus per-token
/// gradients collected over a sentence.
#[derive(Clone, Debug)]
pub struct Gradients {
    tensors: Vec<Vec<f32>>,
    tokens: Vec<Vec<f32>>,
    null: Vec<f32>,
}

impl Gradients {
    pub fn norm_is_finite(&self) -> bool {
        self.tensors.iter().flatten().all(|x| x.is_finite())
    }
}

impl Scorer {
    pub fn new<R: Rng>(
        system: SystemId,
        hp: &Hyperparams,
        vocab: &Vocabularies,
        embeddings: Option<&Embeddings>,
        rng: &mut R,
    ) -> Self {
        let slots = slot_count(system);
        let actions = super::ActionSpace::new(system, vocab.labels.len()).len();
        let form_dim = embeddings.map_or(hp.form_dim, |e| e.dim);
        let emb_dim = form_dim + hp.pos_dim;
        let token_dim = match hp.encoder {
            Encoder::None => emb_dim,
            Encoder::BiRnn => 2 * hp.rnn_dim,
        };
        let input = slots * token_dim;
        let mut form = Tensor::uniform(NAMES[FORM], &[vocab.forms.len(), form_dim], 0.1, rng);
        if let Some(e) = embeddings {
            for (i, word) in vocab.forms.items().iter().enumerate() {
                if let Some(v) = e.vectors.get(word) {
                    form.data[i * form_dim..(i + 1) * form_dim].copy_from_slice(v);
                }
            }
        }
        let mut tensors = vec![
            form,
            Tensor::uniform(NAMES[POS], &[vocab.pos.len(), hp.pos_dim], 0.1, rng),
            Tensor::uniform(NAMES[W1], &[hp.hidden, input], glorot(input, hp.hidden), rng),
            Tensor::zeros(NAMES[B1], &[hp.hidden]),
            Tensor::uniform(NAMES[W2], &[actions, hp.hidden], glorot(hp.hidden, actions), rng),
            Tensor::zeros(NAMES[B2], &[actions]),
        ];
        if hp.encoder == Encoder::BiRnn {
            let r = hp.rnn_dim;
            for (x, h, b) in [(FWD_X, FWD_H, FWD_B), (BWD_X, BWD_H, BWD_B)] {
                tensors.push(Tensor::uniform(NAMES[x], &[r, emb_dim], glorot(emb_dim, r), rng));
                tensors.push(Tensor::uniform(NAMES[h], &[r, r], glorot(r, r), rng));
                tensors.push(Tensor::zeros(NAMES[b], &[r]));
            }
            tensors.push(Tensor::uniform(NAMES[NULL_CTX], &[2 * r], 0.1, rng));
        }
        Scorer {
            encoder: hp.encoder,
            slots,
            token_dim,
            tensors,
        }
    }

    /// Rebuilds a scorer from stored tensors, checking their shapes.
    pub fn from_tensors(system: SystemId, encoder: Encoder, tensors: Vec<Tensor>) -> Result<Self, String> {
        let expected = match encoder {
            Encoder::None => 6,
            Encoder::BiRnn => 13,
        };
        if tensors.len() != expected {
            return Err(format!("expected {} tensors, found {}", expected, tensors.len()));
        }
        for (t, name) in tensors.iter().zip(NAMES) {
            if t.name != name {
                return Err(format!("expected tensor '{}', found '{}'", name, t.name));
            }
            if t.data.len() != t.shape.iter().product::<usize>() {
                return Err(format!("tensor '{}' has inconsistent size", t.name));
            }
        }
        let slots = slot_count(system);
        let emb_dim = tensors[FORM].shape[1] + tensors[POS].shape[1];
        let token_dim = match encoder {
            Encoder::None => emb_dim,
            Encoder::BiRnn => 2 * tensors[FWD_B].shape[0],
        };
        let hidden = tensors[B1].shape[0];
        let checks = [
            tensors[W1].shape == [hidden, slots * token_dim],
            tensors[W2].shape.len() == 2 && tensors[W2].shape[1] == hidden,
            tensors[B2].shape == [tensors[W2].shape[0]],
        ];
        if checks.iter().any(|ok| !ok) {
            return Err("tensor shapes do not fit together".to_string());
        }
        Ok(Scorer {
            encoder,
            slots,
            token_dim,
            tensors,
        })
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn action_count(&self) -> usize {
        self.tensors[B2].shape[0]
    }

    fn embed(&self, form: u32, pos: u32) -> Vec<f32> {
        let mut v = self.tensors[FORM].row(form as usize).to_vec();
        v.extend_from_slice(self.tensors[POS].row(pos as usize));
        v
    }

    fn run_rnn(&self, inputs: &[Vec<f32>], x: usize, h: usize, b: usize, reverse: bool) -> Vec<Vec<f32>> {
        let r = self.tensors[b].shape[0];
        let mut states = vec![vec![0.0; r]; inputs.len()];
        let mut prev = vec![0.0; r];
        let order: Vec<usize> = if reverse {
            (0..inputs.len()).rev().collect()
        } else {
            (0..inputs.len()).collect()
        };
        for i in order {
            let mut s = self.tensors[b].data.clone();
            matvec_add(&self.tensors[x].data, &inputs[i], &mut s);
            matvec_add(&self.tensors[h].data, &prev, &mut s);
            for v in &mut s {
                *v = v.tanh();
            }
            prev = s.clone();
            states[i] = s;
        }
        states
    }

    pub fn encode(&self, sentence: &EncodedSentence) -> Encoding {
        let inputs: Vec<Vec<f32>> = sentence
            .forms
            .iter()
            .zip(&sentence.pos)
            .map(|(&f, &p)| self.embed(f, p))
            .collect();
        match self.encoder {
            Encoder::None => Encoding {
                tokens: inputs,
                null: self.embed(NULL_ID, NULL_ID),
                inputs: Vec::new(),
                forward: Vec::new(),
                backward: Vec::new(),
            },
            Encoder::BiRnn => {
                let forward = self.run_rnn(&inputs, FWD_X, FWD_H, FWD_B, false);
                let backward = self.run_rnn(&inputs, BWD_X, BWD_H, BWD_B, true);
                let tokens = forward
                    .iter()
                    .zip(&backward)
                    .map(|(f, b)| f.iter().chain(b).copied().collect())
                    .collect();
                Encoding {
                    tokens,
                    null: self.tensors[NULL_CTX].data.clone(),
                    inputs,
                    forward,
                    backward,
                }
            }
        }
    }

    pub fn forward(&self, enc: &Encoding, view: &FeatureView) -> Activations {
        debug_assert_eq!(view.slots.len(), self.slots);
        let mut input = Vec::with_capacity(self.slots * self.token_dim);
        for slot in &view.slots {
            match slot {
                Some(node) => input.extend_from_slice(&enc.tokens[*node]),
                None => input.extend_from_slice(&enc.null),
            }
        }
        let mut hidden = self.tensors[B1].data.clone();
        matvec_add(&self.tensors[W1].data, &input, &mut hidden);
        for v in &mut hidden {
            *v = v.tanh();
        }
        let mut scores = self.tensors[B2].data.clone();
        matvec_add(&self.tensors[W2].data, &hidden, &mut scores);
        Activations {
            input,
            hidden,
            scores,
        }
    }

    /// One score per action.
    pub fn score(&self, enc: &Encoding, view: &FeatureView) -> Vec<f32> {
        self.forward(enc, view).scores
    }

    pub fn gradients(&self, sentence_len: usize) -> Gradients {
        Gradients {
            tensors: self.tensors.iter().map(|t| vec![0.0; t.data.len()]).collect(),
            tokens: vec![vec![0.0; self.token_dim]; sentence_len + 1],
            null: vec![0.0; self.token_dim],
        }
    }

    /// Accumulates the gradient of `sum(dscores[i] * score[i])` into the
    /// dense layers and the per-token buffers.
    pub fn backward(&self, view: &FeatureView, act: &Activations, dscores: &[(usize, f32)], grads: &mut Gradients) {
        let hidden = act.hidden.len();
        let mut dhidden = vec![0.0; hidden];
        for &(a, g) in dscores {
            grads.tensors[B2][a] += g;
            let row = &mut grads.tensors[W2][a * hidden..(a + 1) * hidden];
            for (x, &h) in row.iter_mut().zip(&act.hidden) {
                *x += g * h;
            }
            let w = &self.tensors[W2].data[a * hidden..(a + 1) * hidden];
            for (d, &wv) in dhidden.iter_mut().zip(w) {
                *d += g * wv;
            }
        }
        for (d, &h) in dhidden.iter_mut().zip(&act.hidden) {
            *d *= 1.0 - h * h;
        }
        for (b, &d) in grads.tensors[B1].iter_mut().zip(&dhidden) {
            *b += d;
        }
        outer_add(&mut grads.tensors[W1], &dhidden, &act.input);
        let mut dinput = vec![0.0; act.input.len()];
        matvec_t_add(&self.tensors[W1].data, &dhidden, &mut dinput);
        for (slot, chunk) in view.slots.iter().zip(dinput.chunks(self.token_dim)) {
            let target = match slot {
                Some(node) => &mut grads.tokens[*node],
                None => &mut grads.null,
            };
            for (t, &d) in target.iter_mut().zip(chunk) {
                *t += d;
            }
        }
    }

    fn scatter_embedding(&self, sentence: &EncodedSentence, node: Option<usize>, d: &[f32], grads: &mut Gradients) {
        let form_dim = self.tensors[FORM].shape[1];
        let (f, p) = match node {
            Some(i) => (sentence.forms[i] as usize, sentence.pos[i] as usize),
            None => (NULL_ID as usize, NULL_ID as usize),
        };
        let pos_dim = self.tensors[POS].shape[1];
        for (g, &x) in grads.tensors[FORM][f * form_dim..(f + 1) * form_dim].iter_mut().zip(&d[..form_dim]) {
            *g += x;
        }
        for (g, &x) in grads.tensors[POS][p * pos_dim..(p + 1) * pos_dim].iter_mut().zip(&d[form_dim..]) {
            *g += x;
        }
    }

    /// Pushes the per-token gradients down into the encoder and the
    /// embedding tables. Call once per sentence, after all `backward`s.
    pub fn backward_tokens(&self, sentence: &EncodedSentence, enc: &Encoding, grads: &mut Gradients) {
        let tokens = std::mem::take(&mut grads.tokens);
        let null = std::mem::take(&mut grads.null);
        match self.encoder {
            Encoder::None => {
                for (i, d) in tokens.iter().enumerate() {
                    self.scatter_embedding(sentence, Some(i), d, grads);
                }
                self.scatter_embedding(sentence, None, &null, grads);
            }
            Encoder::BiRnn => {
                for (g, &d) in grads.tensors[NULL_CTX].iter_mut().zip(&null) {
                    *g += d;
                }
                let r = self.tensors[FWD_B].shape[0];
                let n = tokens.len();
                let mut dinputs = vec![vec![0.0; enc.inputs[0].len()]; n];
                for (x, h, b, states, reverse, offset) in [
                    (FWD_X, FWD_H, FWD_B, &enc.forward, false, 0),
                    (BWD_X, BWD_H, BWD_B, &enc.backward, true, r),
                ] {
                    let order: Vec<usize> = if reverse {
                        (0..n).collect()
                    } else {
                        (0..n).rev().collect()
                    };
                    // gradient flowing into the state from the next step
                    let mut carry = vec![0.0; r];
                    for i in order {
                        let prev_index = if reverse { i + 1 } else { i.wrapping_sub(1) };
                        let zero = vec![0.0; r];
                        let prev = states.get(prev_index).unwrap_or(&zero);
                        let mut dpre: Vec<f32> = tokens[i][offset..offset + r]
                            .iter()
                            .zip(&carry)
                            .map(|(a, b)| a + b)
                            .collect();
                        for (d, &s) in dpre.iter_mut().zip(&states[i]) {
                            *d *= 1.0 - s * s;
                        }
                        for (g, &d) in grads.tensors[b].iter_mut().zip(&dpre) {
                            *g += d;
                        }
                        outer_add(&mut grads.tensors[x], &dpre, &enc.inputs[i]);
                        outer_add(&mut grads.tensors[h], &dpre, prev);
                        matvec_t_add(&self.tensors[x].data, &dpre, &mut dinputs[i]);
                        carry = vec![0.0; r];
                        matvec_t_add(&self.tensors[h].data, &dpre, &mut carry);
                    }
                }
                for (i, d) in dinputs.iter().enumerate() {
                    self.scatter_embedding(sentence, Some(i), d, grads);
                }
            }
        }
        grads.tokens = tokens.iter().map(|t| vec![0.0; t.len()]).collect();
        grads.null = vec![0.0; null.len()];
    }

    /// Plain gradient step; clears the buffers.
    pub fn step(&mut self, grads: &mut Gradients, learning_rate: f32) {
        for (t, g) in self.tensors.iter_mut().zip(&mut grads.tensors) {
            for (p, d) in t.data.iter_mut().zip(g.iter_mut()) {
                *p -= learning_rate * *d;
                *d = 0.0;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.data.iter().all(|x| x.is_finite()))
    }

    #[cfg(test)]
    pub(crate) fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    #[cfg(test)]
    pub(crate) fn gradient_of(grads: &Gradients, tensor: usize) -> &[f32] {
        &grads.tensors[tensor]
    }
}

/// Pretrained word vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f32>>,
}

/// Reads "form v1 v2 ... vd" lines. Every line must have the same width.
pub fn load_embeddings<P: AsRef<Path>>(path: P) -> Result<Embeddings, String> {
    let file = File::open(path.as_ref()).map_err(|e| format!("{}: {}", path.as_ref().display(), e))?;
    let mut dim = None;
    let mut vectors = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else {
            continue;
        };
        let values: Vec<f32> = parts
            .map(|p| p.parse::<f32>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("line {}: {}", i + 1, e))?;
        if values.is_empty() {
            return Err(format!("line {}: no vector values", i + 1));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(format!("line {}: expected {} values, found {}", i + 1, d, values.len()))
            }
            _ => {}
        }
        vectors.insert(word.to_string(), values);
    }
    let dim = dim.ok_or_else(|| "embedding file is empty".to_string())?;
    Ok(Embeddings { dim, vectors })
}
