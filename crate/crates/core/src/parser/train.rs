//! Greedy online training with a static or dynamic oracle.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conll::Sentence;
use crate::eval::evaluate;
use crate::graph::{DepGraph, Label};
use crate::hybrid::{hybrid_oracle, projective_order, ProjectiveOrder};
use crate::oracle::{assign_planes, static_oracle, transition_costs, PlaneAssignment};
use crate::system::TransitionKind;

use super::features::extract_features;
use super::scorer::{Embeddings, Gradients, Scorer};
use super::state::{Move, State};
use super::{best_legal, ActionSpace, EncodedSentence, Hyperparams, Model, SystemId, Vocabularies, UNK_ID};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    Static,
    Dynamic,
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(Regime::Static),
            "dynamic" => Ok(Regime::Dynamic),
            other => Err(format!("unknown oracle '{}'", other)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub system: SystemId,
    pub regime: Regime,
    pub iterations: usize,
    pub seed: u64,
    pub hyperparams: Hyperparams,
    pub embeddings: Option<Embeddings>,
}

impl TrainConfig {
    pub fn new(system: SystemId, regime: Regime, iterations: usize, seed: u64) -> Self {
        TrainConfig {
            system,
            regime,
            iterations,
            seed,
            hyperparams: Hyperparams::default(),
            embeddings: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationReport {
    pub iteration: usize,
    /// Summed hinge loss over the training set.
    pub loss: f64,
    /// Configurations where an update fired.
    pub updates: usize,
    /// Configurations reached by following a costly prediction.
    pub explored: usize,
    pub dev_uas: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrain,
    #[error("development set is empty")]
    EmptyDev,
    #[error("training sentence {sentence}: {source}")]
    BadTree {
        sentence: usize,
        source: crate::graph::GraphError,
    },
    #[error("loss became non-finite in iteration {iteration} at sentence {sentence}; try a lower learning rate")]
    Diverged { iteration: usize, sentence: usize },
}

/// Gold-side information the oracles need for one sentence.
enum Gold {
    Planar(PlaneAssignment),
    Hybrid(DepGraph, ProjectiveOrder),
}

impl Gold {
    fn new(system: SystemId, tree: DepGraph) -> Gold {
        match system {
            SystemId::TwoPlanar => Gold::Planar(assign_planes(&tree)),
            SystemId::HybridSwap => {
                let po = projective_order(&tree);
                Gold::Hybrid(tree, po)
            }
        }
    }

    fn gold_label(&self, dep: usize, head: usize) -> Option<Label> {
        match self {
            Gold::Planar(pa) => (pa.gold_head(dep) == Some(head)).then(|| pa.gold_label(dep).unwrap_or(Label(0))),
            Gold::Hybrid(g, _) => {
                (dep != 0 && g.head(dep) == head).then(|| g.label(dep).unwrap_or(Label(0)))
            }
        }
    }

    /// The single action the static oracle takes.
    fn static_action(&self, state: &State, actions: &ActionSpace) -> usize {
        match (self, state) {
            (Gold::Planar(pa), State::Planar(c)) => {
                let t = static_oracle(c, pa).expect("static path stays on the gold derivation");
                let mv = Move::from_planar(t.kind());
                actions.index(mv, t.label().unwrap_or(Label(0)))
            }
            (Gold::Hybrid(..), _) => {
                let moves = self.zero_cost_moves(state);
                let mv = [Move::Swap, Move::LeftArc, Move::RightArc, Move::Shift]
                    .into_iter()
                    .find(|m| moves.contains(m))
                    .expect("some move is zero-cost");
                self.label_action(state, actions, mv)[0]
            }
            _ => unreachable!("gold and state come from the same system"),
        }
    }

    /// Minimum-cost moves, regularized: Switch is dropped when another
    /// move is as cheap.
    fn zero_cost_moves(&self, state: &State) -> Vec<Move> {
        match (self, state) {
            (Gold::Planar(pa), State::Planar(c)) => {
                let costs = transition_costs(c, pa).expect("non-terminal");
                let best = costs.costs.iter().filter_map(|(_, c)| *c).min();
                let mut moves: Vec<TransitionKind> = if best == Some(0) {
                    costs.zero_cost.clone()
                } else {
                    costs
                        .costs
                        .iter()
                        .filter(|(_, c)| c.is_some() && *c == best)
                        .map(|(k, _)| *k)
                        .collect()
                };
                if moves.iter().any(|&k| k != TransitionKind::Switch) {
                    moves.retain(|&k| k != TransitionKind::Switch);
                }
                moves.into_iter().map(Move::from_planar).collect()
            }
            (Gold::Hybrid(g, po), State::Hybrid(c)) => {
                let costs = hybrid_oracle(c, g, po).expect("non-terminal");
                if costs.costs.is_empty() {
                    return costs.zero_cost.into_iter().map(Move::from_hybrid).collect();
                }
                let best = costs.costs.iter().map(|(_, c)| *c).min().unwrap();
                costs
                    .costs
                    .iter()
                    .filter(|(_, c)| *c == best)
                    .map(|(k, _)| Move::from_hybrid(*k))
                    .collect()
            }
            _ => unreachable!("gold and state come from the same system"),
        }
    }

    /// Action indices for a correct move: the gold label for a gold arc,
    /// every label for an arc that is not gold (its label cannot matter).
    fn label_action(&self, state: &State, actions: &ActionSpace, mv: Move) -> Vec<usize> {
        match state.candidate_arc(mv) {
            Some(arc) => match self.gold_label(arc.dep, arc.head) {
                Some(l) => vec![actions.index(mv, l)],
                None => actions.indices(mv),
            },
            None => actions.indices(mv),
        }
    }

    fn correct_actions(&self, state: &State, actions: &ActionSpace, regime: Regime) -> Vec<usize> {
        match regime {
            Regime::Static => vec![self.static_action(state, actions)],
            Regime::Dynamic => self
                .zero_cost_moves(state)
                .into_iter()
                .flat_map(|m| self.label_action(state, actions, m))
                .collect(),
        }
    }
}

fn argmax(indices: impl Iterator<Item = usize>, scores: &[f32]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in indices {
        if best.is_none_or(|b| scores[i] > scores[b]) {
            best = Some(i);
        }
    }
    best
}

struct SentenceOutcome {
    loss: f64,
    updates: usize,
    explored: usize,
}

#[allow(clippy::too_many_arguments)]
fn train_sentence(
    scorer: &Scorer,
    grads: &mut Gradients,
    system: SystemId,
    actions: &ActionSpace,
    sentence: &EncodedSentence,
    gold: &Gold,
    regime: Regime,
    margin: f32,
    explore: Option<f32>,
    rng: &mut ChaCha8Rng,
) -> SentenceOutcome {
    let encoding = scorer.encode(sentence);
    let mut state = State::initial(system, sentence.len());
    let mut out = SentenceOutcome {
        loss: 0.0,
        updates: 0,
        explored: 0,
    };
    let mut off_path = false;
    while !state.is_terminal() {
        let view = extract_features(&state);
        let act = scorer.forward(&encoding, &view);
        let scores = &act.scores;
        if scores.iter().any(|x| !x.is_finite()) {
            out.loss = f64::NAN;
            return out;
        }
        let legal = state.legal_moves_mask();
        let correct = gold.correct_actions(&state, actions, regime);
        let best_correct = argmax(correct.iter().copied(), scores).expect("the oracle offers a move");
        let best_wrong = argmax(
            (0..actions.len()).filter(|&i| legal[actions.action(i).0.index()] && !correct.contains(&i)),
            scores,
        );
        if let Some(w) = best_wrong {
            let violation = margin - scores[best_correct] + scores[w];
            if violation > 0.0 {
                out.loss += violation as f64;
                out.updates += 1;
                scorer.backward(&view, &act, &[(best_correct, -1.0), (w, 1.0)], grads);
            }
        }
        let mut next = best_correct;
        if let Some(p) = explore {
            let predicted = best_legal(&state, actions, scores).expect("legal move");
            if !correct.contains(&predicted) && rng.gen::<f32>() < p {
                next = predicted;
                off_path = true;
            }
        }
        if off_path {
            out.explored += 1;
        }
        let (mv, label) = actions.action(next);
        state.apply(mv, label);
    }
    if out.updates > 0 {
        scorer.backward_tokens(sentence, &encoding, grads);
    }
    out
}

/// Replaces rare forms by the unknown token, each with probability
/// `alpha / (alpha + count)`.
fn word_dropout(sentence: &EncodedSentence, counts: &HashMap<u32, usize>, alpha: f32, rng: &mut ChaCha8Rng) -> EncodedSentence {
    let mut out = sentence.clone();
    if alpha <= 0.0 {
        return out;
    }
    for f in out.forms.iter_mut().skip(1) {
        let count = counts.get(f).copied().unwrap_or(0) as f32;
        if rng.gen::<f32>() < alpha / (alpha + count) {
            *f = UNK_ID;
        }
    }
    out
}

/// Trains for `config.iterations` passes and returns the model with the
/// best dev UAS (earliest on ties). `on_iteration` sees every report as
/// it is produced.
pub fn train(
    config: &TrainConfig,
    train_set: &[Sentence],
    dev_set: &[Sentence],
    on_iteration: &mut dyn FnMut(&IterationReport),
) -> Result<(Model, Vec<IterationReport>), TrainError> {
    if train_set.iter().all(|s| s.is_empty()) {
        return Err(TrainError::EmptyTrain);
    }
    if dev_set.is_empty() {
        return Err(TrainError::EmptyDev);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vocab = Vocabularies::build(train_set);
    let actions = ActionSpace::new(config.system, vocab.labels.len());
    let mut examples = Vec::new();
    for (i, s) in train_set.iter().enumerate() {
        if s.is_empty() {
            continue;
        }
        let tree = vocab
            .gold_graph(s)
            .map_err(|source| TrainError::BadTree { sentence: i + 1, source })?;
        examples.push((vocab.encode(s), Gold::new(config.system, tree)));
    }
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for (e, _) in &examples {
        for &f in &e.forms[1..] {
            *counts.entry(f).or_default() += 1;
        }
    }
    let hp = config.hyperparams.clone();
    let scorer = Scorer::new(config.system, &hp, &vocab, config.embeddings.as_ref(), &mut rng);
    let mut model = Model {
        system: config.system,
        hyperparams: hp.clone(),
        vocab,
        scorer,
    };
    let mut best: Option<(f64, Model)> = None;
    let mut reports = Vec::new();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    for iteration in 1..=config.iterations {
        order.shuffle(&mut rng);
        let explore = (config.regime == Regime::Dynamic && iteration >= 2).then_some(hp.exploration);
        let mut report = IterationReport {
            iteration,
            loss: 0.0,
            updates: 0,
            explored: 0,
            dev_uas: 0.0,
        };
        for (k, &i) in order.iter().enumerate() {
            let (sentence, gold) = &examples[i];
            let input = word_dropout(sentence, &counts, hp.word_dropout, &mut rng);
            let mut grads = model.scorer.gradients(sentence.len());
            let out = train_sentence(
                &model.scorer,
                &mut grads,
                config.system,
                &actions,
                &input,
                gold,
                config.regime,
                hp.margin,
                explore,
                &mut rng,
            );
            if !out.loss.is_finite() || !grads.norm_is_finite() {
                return Err(TrainError::Diverged { iteration, sentence: k + 1 });
            }
            if out.updates > 0 {
                model.scorer.step(&mut grads, hp.learning_rate);
            }
            report.loss += out.loss;
            report.updates += out.updates;
            report.explored += out.explored;
        }
        if !model.scorer.is_finite() {
            return Err(TrainError::Diverged {
                iteration,
                sentence: order.len(),
            });
        }
        let predicted = model.parse_all(dev_set);
        report.dev_uas = evaluate(&predicted, dev_set, false)
            .expect("parses align with their input")
            .uas;
        on_iteration(&report);
        if best.as_ref().is_none_or(|(uas, _)| report.dev_uas > *uas) {
            best = Some((report.dev_uas, model.clone()));
        }
        reports.push(report);
    }
    let model = best.map_or(model, |(_, m)| m);
    Ok((model, reports))
}
