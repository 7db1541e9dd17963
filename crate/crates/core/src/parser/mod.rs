//! Feature extraction, scoring, greedy decoding and training.

mod archive;
mod features;
mod scorer;
mod state;
mod train;

pub use archive::{load_model, load_model_file, save_model, save_model_file, ArchiveError, FORMAT_VERSION};
pub use features::{extract_features, FeatureView};
pub use scorer::{load_embeddings, Embeddings, Scorer};
pub use state::{Move, State};
pub use train::{train, IterationReport, Regime, TrainConfig, TrainError};

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conll::Sentence;
use crate::graph::{DepGraph, Label};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemId {
    TwoPlanar,
    HybridSwap,
}

impl SystemId {
    pub fn code(self) -> u8 {
        match self {
            SystemId::TwoPlanar => 0,
            SystemId::HybridSwap => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<SystemId> {
        match code {
            0 => Some(SystemId::TwoPlanar),
            1 => Some(SystemId::HybridSwap),
            _ => None,
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemId::TwoPlanar => "2planar",
            SystemId::HybridSwap => "hybrid-swap",
        })
    }
}

impl FromStr for SystemId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2planar" => Ok(SystemId::TwoPlanar),
            "hybrid-swap" => Ok(SystemId::HybridSwap),
            other => Err(format!("unknown system '{}'", other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoder {
    None,
    BiRnn,
}

impl FromStr for Encoder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Encoder::None),
            "birnn" => Ok(Encoder::BiRnn),
            other => Err(format!("unknown encoder '{}'", other)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub form_dim: usize,
    pub pos_dim: usize,
    pub hidden: usize,
    pub encoder: Encoder,
    /// Width of each direction of the recurrent encoder.
    pub rnn_dim: usize,
    pub learning_rate: f32,
    pub margin: f32,
    /// Probability of following the model's own prediction during dynamic
    /// training, from the second iteration on.
    pub exploration: f32,
    /// Word dropout strength: a form seen `f` times is replaced by the
    /// unknown token with probability `a / (a + f)`.
    pub word_dropout: f32,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            form_dim: 32,
            pos_dim: 16,
            hidden: 96,
            encoder: Encoder::None,
            rnn_dim: 32,
            learning_rate: 0.01,
            margin: 1.0,
            exploration: 0.9,
            word_dropout: 0.25,
        }
    }
}

pub const NULL_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const ROOT_ID: u32 = 2;
const SPECIALS: [&str; 3] = ["<NULL>", "<UNK>", "<ROOT>"];

/// String interning with a fixed order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocab {
    items: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn from_items(items: Vec<String>) -> Self {
        let index = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        Vocab { items, index }
    }

    fn with_specials<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let set: BTreeSet<&str> = words.into_iter().filter(|w| !SPECIALS.contains(w)).collect();
        Vocab::from_items(
            SPECIALS
                .iter()
                .copied()
                .chain(set)
                .map(String::from)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn id(&self, s: &str) -> Option<u32> {
        self.index.get(s).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.items[id as usize]
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }
}

/// Form, POS and dependency-label inventories of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabularies {
    pub forms: Vocab,
    pub pos: Vocab,
    pub labels: Vocab,
}

impl Vocabularies {
    pub fn build(sentences: &[Sentence]) -> Self {
        let tokens = || sentences.iter().flat_map(|s| s.tokens.iter());
        let labels: BTreeSet<&str> = tokens().map(|t| t.deprel.as_str()).collect();
        Vocabularies {
            forms: Vocab::with_specials(tokens().map(|t| t.form.as_str())),
            pos: Vocab::with_specials(tokens().map(|t| t.pos.as_str())),
            labels: Vocab::from_items(labels.into_iter().map(String::from).collect()),
        }
    }

    /// Form and POS ids by node, the root at index 0.
    pub fn encode(&self, sentence: &Sentence) -> EncodedSentence {
        let mut forms = vec![ROOT_ID];
        let mut pos = vec![ROOT_ID];
        for t in &sentence.tokens {
            forms.push(self.forms.id(&t.form).unwrap_or(UNK_ID));
            pos.push(self.pos.id(&t.pos).unwrap_or(UNK_ID));
        }
        EncodedSentence { forms, pos }
    }

    /// The gold tree with label ids; labels outside the inventory are left
    /// unset.
    pub fn gold_graph(&self, sentence: &Sentence) -> Result<DepGraph, crate::graph::GraphError> {
        let labels = sentence
            .tokens
            .iter()
            .map(|t| self.labels.id(&t.deprel).map(Label))
            .collect();
        DepGraph::with_labels(sentence.heads(), labels)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSentence {
    pub forms: Vec<u32>,
    pub pos: Vec<u32>,
}

impl EncodedSentence {
    /// Number of tokens, the root excluded.
    pub fn len(&self) -> usize {
        self.forms.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Joint (move, label) actions: unlabeled moves first, then one LeftArc
/// and one RightArc per label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSpace {
    plain: Vec<Move>,
    labels: usize,
}

impl ActionSpace {
    pub fn new(system: SystemId, labels: usize) -> Self {
        let plain = match system {
            SystemId::TwoPlanar => vec![Move::Shift, Move::Reduce, Move::Switch],
            SystemId::HybridSwap => vec![Move::Shift, Move::Swap],
        };
        ActionSpace {
            plain,
            labels: labels.max(1),
        }
    }

    pub fn len(&self) -> usize {
        self.plain.len() + 2 * self.labels
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn action(&self, index: usize) -> (Move, Label) {
        let p = self.plain.len();
        if index < p {
            (self.plain[index], Label(0))
        } else if index < p + self.labels {
            (Move::LeftArc, Label((index - p) as u32))
        } else {
            (Move::RightArc, Label((index - p - self.labels) as u32))
        }
    }

    pub fn index(&self, mv: Move, label: Label) -> usize {
        let p = self.plain.len();
        match mv {
            Move::LeftArc => p + label.0 as usize,
            Move::RightArc => p + self.labels + label.0 as usize,
            other => self
                .plain
                .iter()
                .position(|&m| m == other)
                .expect("move belongs to this system"),
        }
    }

    /// Every action index of a move: one per label for arcs.
    pub fn indices(&self, mv: Move) -> Vec<usize> {
        match mv {
            Move::LeftArc | Move::RightArc => (0..self.labels)
                .map(|l| self.index(mv, Label(l as u32)))
                .collect(),
            other => vec![self.index(other, Label(0))],
        }
    }
}

/// A trained parser: system, hyperparameters, vocabularies and weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub system: SystemId,
    pub hyperparams: Hyperparams,
    pub vocab: Vocabularies,
    pub scorer: Scorer,
}

impl Model {
    pub fn actions(&self) -> ActionSpace {
        ActionSpace::new(self.system, self.vocab.labels.len())
    }

    /// Greedy decoding. `trace` receives one line per transition.
    pub fn parse_with_trace(
        &self,
        sentence: &Sentence,
        mut trace: Option<&mut dyn FnMut(String)>,
    ) -> Sentence {
        let encoded = self.vocab.encode(sentence);
        let (heads, labels) = greedy_decode(self.system, &self.scorer, &self.actions(), &encoded, &mut trace);
        let deprels = labels
            .iter()
            .map(|l| match l {
                Some(l) if (l.0 as usize) < self.vocab.labels.len() => self.vocab.labels.name(l.0).to_string(),
                _ => "_".to_string(),
            })
            .collect::<Vec<_>>();
        sentence.with_parse(&heads, &deprels)
    }

    pub fn parse(&self, sentence: &Sentence) -> Sentence {
        self.parse_with_trace(sentence, None)
    }

    pub fn parse_all(&self, sentences: &[Sentence]) -> Vec<Sentence> {
        sentences.iter().map(|s| self.parse(s)).collect()
    }
}

/// Applies the best-scoring legal action until the configuration is
/// terminal. Ties go to the lowest action index.
pub fn greedy_parse(
    system: SystemId,
    scorer: &Scorer,
    actions: &ActionSpace,
    sentence: &EncodedSentence,
) -> DepGraph {
    let (heads, labels) = greedy_decode(system, scorer, actions, sentence, &mut None);
    DepGraph::with_labels(heads, labels).expect("decoding yields a forest")
}

fn greedy_decode(
    system: SystemId,
    scorer: &Scorer,
    actions: &ActionSpace,
    sentence: &EncodedSentence,
    trace: &mut Option<&mut dyn FnMut(String)>,
) -> (Vec<usize>, Vec<Option<Label>>) {
    let encoding = scorer.encode(sentence);
    let mut state = State::initial(system, sentence.len());
    let mut step = 0;
    while !state.is_terminal() {
        let view = extract_features(&state);
        let scores = scorer.score(&encoding, &view);
        let best = best_legal(&state, actions, &scores).expect("a non-terminal state has a legal move");
        let (mv, label) = actions.action(best);
        if let Some(t) = trace.as_mut() {
            t(state.trace_line(step, mv, label));
        }
        state.apply(mv, label);
        step += 1;
    }
    let parse = state.extract();
    let labels = (1..=parse.len()).map(|d| parse.label(d)).collect();
    (parse.heads().to_vec(), labels)
}

/// Highest-scoring legal action, lowest index on ties.
pub(crate) fn best_legal(state: &State, actions: &ActionSpace, scores: &[f32]) -> Option<usize> {
    let legal: Vec<bool> = state.legal_moves_mask();
    let mut best: Option<usize> = None;
    for i in 0..actions.len() {
        let (mv, _) = actions.action(i);
        if !legal[mv.index()] {
            continue;
        }
        if best.is_none_or(|b| scores[i] > scores[b]) {
            best = Some(i);
        }
    }
    best
}
