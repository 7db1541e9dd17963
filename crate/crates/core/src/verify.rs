//! Randomized checks of both oracles against exhaustive search, with a
//! printable trace for the first mismatch.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{hamming_loss, is_one_planar, DepGraph, Label};
use crate::hybrid::{hybrid_gold_transition, hybrid_oracle, projective_order, HybridConfiguration, HybridKind};
use crate::oracle::{assign_planes, gold_transition, loss, transition_costs, BruteForce, OracleError};
use crate::parser::SystemId;
use crate::random::{random_tree, random_two_planar_tree};
use crate::system::Configuration;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub system: SystemId,
    /// Largest sentence for the exhaustive comparisons.
    pub max_len: usize,
    /// Configurations to compare against exhaustive search.
    pub samples: usize,
    /// Gold trees to rebuild with zero-cost walks, and their largest size.
    pub reconstructions: usize,
    pub reconstruction_max_len: usize,
    pub seed: u64,
}

impl VerifyConfig {
    pub fn new(system: SystemId, max_len: usize, samples: usize, seed: u64) -> Self {
        VerifyConfig {
            system,
            max_len,
            samples,
            reconstructions: 1000,
            reconstruction_max_len: 8,
            seed,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    /// Configurations whose loss or costs were compared to search.
    pub configurations: usize,
    /// Transitions whose cost was compared.
    pub transitions: usize,
    pub reconstructions: usize,
    pub failures: usize,
    /// Trace of the first failure.
    pub counterexample: Option<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn fail(&mut self, trace: impl FnOnce() -> String) {
        if self.counterexample.is_none() {
            self.counterexample = Some(trace());
        }
        self.failures += 1;
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("max length {0} is outside the supported range 1..={1}")]
    MaxLen(usize, usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub fn oracle_verify(config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    match config.system {
        SystemId::TwoPlanar => verify_two_planar(config),
        SystemId::HybridSwap => verify_hybrid(config),
    }
}

fn header(gold: &DepGraph) -> String {
    format!("gold heads {:?}", gold.heads())
}

/// Loss against exhaustive search on random walks over unfiltered random
/// trees, cost of every legal transition against the search's loss
/// deltas, then zero-cost walks over random 2-planar trees.
pub fn verify_two_planar(config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    if config.max_len == 0 || config.max_len > BruteForce::MAX_LEN {
        return Err(VerifyError::MaxLen(config.max_len, BruteForce::MAX_LEN));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = VerifyReport::default();
    while report.configurations < config.samples {
        let n = rng.gen_range(1..=config.max_len);
        let gold = random_tree(n, &mut rng);
        let pa = assign_planes(&gold);
        let mut search = BruteForce::new(&pa, config.max_len)?;
        let mut c = Configuration::initial(n).map_err(OracleError::System)?;
        let mut trace = vec![header(&gold)];
        loop {
            let best = search.min_loss(&c);
            let got = loss(&c, &pa).total;
            report.configurations += 1;
            if got != best {
                let lines = trace.clone();
                report.fail(|| {
                    format!(
                        "{}\nloss {} but the best reachable loss is {} at {:?}",
                        lines.join("\n"),
                        got,
                        best,
                        c
                    )
                });
            }
            if c.is_terminal() {
                break;
            }
            let costs = transition_costs(&c, &pa)?;
            if costs.zero_cost.is_empty() {
                let lines = trace.clone();
                report.fail(|| format!("{}\nempty zero-cost set at {:?}", lines.join("\n"), c));
            }
            for &(kind, cost) in &costs.costs {
                let next = c.apply(kind.with_label(Label(0))).map_err(OracleError::System)?;
                let Some(cost) = cost else {
                    continue;
                };
                report.transitions += 1;
                let actual = search.min_loss(&next) - best;
                let zero = costs.is_zero_cost(kind);
                if cost != actual || (zero && actual != 0) {
                    let lines = trace.clone();
                    report.fail(|| {
                        format!(
                            "{}\n{:?} costs {} (zero-cost set {:?}) but loses {} at {:?}",
                            lines.join("\n"),
                            kind,
                            cost,
                            costs.zero_cost,
                            actual,
                            c
                        )
                    });
                }
            }
            let kind = *c.legal().map_err(OracleError::System)?.choose(&mut rng).unwrap();
            trace.push(c.trace_line(trace.len() - 1, &format!("{:?}", kind)));
            c.apply_mut(kind.with_label(Label(0))).map_err(OracleError::System)?;
        }
    }
    for _ in 0..config.reconstructions {
        let n = rng.gen_range(1..=config.reconstruction_max_len);
        let gold = random_two_planar_tree(n, &mut rng);
        let pa = assign_planes(&gold);
        let mut c = Configuration::initial(n).map_err(OracleError::System)?;
        let mut trace = vec![header(&gold)];
        while !c.is_terminal() {
            let costs = transition_costs(&c, &pa)?;
            let Some(&kind) = costs.zero_cost.choose(&mut rng) else {
                break;
            };
            trace.push(c.trace_line(trace.len() - 1, &format!("{:?}", kind)));
            c.apply_mut(gold_transition(&c, &pa, kind)).map_err(OracleError::System)?;
        }
        report.reconstructions += 1;
        let rebuilt = c.is_terminal() && loss(&c, &pa).total == 0 && (1..=n).all(|d| pa.built_correctly(&c, d));
        if !rebuilt {
            report.fail(|| format!("{}\nzero-cost walk ended off gold at {:?}", trace.join("\n"), c));
        }
    }
    Ok(report)
}

/// Minimum number of wrong heads over completions that never Swap. With
/// no Swap, nodes on the stack and in the buffer are headless, so the
/// future only depends on the stack and the buffer front.
pub struct SwapFreeSearch<'a> {
    gold: &'a DepGraph,
    memo: HashMap<(Vec<usize>, usize), usize>,
}

impl<'a> SwapFreeSearch<'a> {
    pub fn new(gold: &'a DepGraph) -> Self {
        SwapFreeSearch {
            gold,
            memo: HashMap::new(),
        }
    }

    fn wrong(&self, head: usize, dep: usize) -> bool {
        dep == 0 || self.gold.head(dep) != head
    }

    pub fn min_loss(&mut self, c: &HybridConfiguration) -> usize {
        let built = c.arcs().iter().filter(|a| self.wrong(a.head, a.dep)).count();
        built + self.future(c)
    }

    fn future(&mut self, c: &HybridConfiguration) -> usize {
        if c.is_terminal() {
            return 0;
        }
        let key = (c.stack().to_vec(), c.buffer_front().unwrap_or(usize::MAX));
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let moves: Vec<HybridKind> = c
            .legal()
            .expect("not terminal")
            .into_iter()
            .filter(|&k| k != HybridKind::Swap)
            .collect();
        let best = moves
            .into_iter()
            .map(|k| {
                let wrong = c.candidate_arc(k).map_or(0, |a| self.wrong(a.head, a.dep) as usize);
                wrong + self.future(&c.apply(k.with_label(Label(0))).expect("legal"))
            })
            .min()
            .expect("a swap-free move exists");
        self.memo.insert(key, best);
        best
    }
}

/// Zero-cost walks over unfiltered random trees must rebuild them, and on
/// projective trees every dynamic cost must equal the loss delta of a
/// swap-free exhaustive search.
pub fn verify_hybrid(config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    if config.max_len == 0 {
        return Err(VerifyError::MaxLen(0, usize::MAX));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = VerifyReport::default();
    for _ in 0..config.reconstructions {
        let n = rng.gen_range(1..=config.max_len);
        let gold = random_tree(n, &mut rng);
        let po = projective_order(&gold);
        let mut c = HybridConfiguration::initial(n).map_err(OracleError::System)?;
        let mut trace = vec![header(&gold)];
        while !c.is_terminal() {
            let costs = hybrid_oracle(&c, &gold, &po).map_err(OracleError::System)?;
            let Some(&kind) = costs.zero_cost.choose(&mut rng) else {
                break;
            };
            let t = hybrid_gold_transition(&c, &gold, kind);
            trace.push(c.trace_line(trace.len() - 1, &t.to_string()));
            c.apply_mut(t).map_err(OracleError::System)?;
        }
        report.reconstructions += 1;
        let rebuilt = c.is_terminal()
            && c.extract_parse()
                .ok()
                .and_then(|p| hamming_loss(&p, &gold).ok())
                == Some(0);
        if !rebuilt {
            report.fail(|| format!("{}\nzero-cost walk did not rebuild the tree", trace.join("\n")));
        }
    }
    while report.configurations < config.samples {
        let n = rng.gen_range(1..=config.max_len);
        let gold = random_tree(n, &mut rng);
        if !is_one_planar(&gold.arcs().collect::<Vec<_>>()) {
            continue;
        }
        let po = projective_order(&gold);
        let mut search = SwapFreeSearch::new(&gold);
        let mut c = HybridConfiguration::initial(n).map_err(OracleError::System)?;
        let mut trace = vec![header(&gold)];
        while !c.is_terminal() {
            report.configurations += 1;
            let costs = hybrid_oracle(&c, &gold, &po).map_err(OracleError::System)?;
            let base = search.min_loss(&c);
            if costs.zero_cost.is_empty() {
                let lines = trace.clone();
                report.fail(|| format!("{}\nempty zero-cost set at {:?}", lines.join("\n"), c));
            }
            for &(kind, cost) in &costs.costs {
                report.transitions += 1;
                let next = c.apply(kind.with_label(Label(0))).map_err(OracleError::System)?;
                let actual = search.min_loss(&next) - base;
                if cost != actual {
                    let lines = trace.clone();
                    report.fail(|| {
                        format!("{}\n{} costs {} but loses {} at {:?}", lines.join("\n"), kind_name(kind), cost, actual, c)
                    });
                }
            }
            let moves: Vec<HybridKind> = c
                .legal()
                .map_err(OracleError::System)?
                .into_iter()
                .filter(|&k| k != HybridKind::Swap)
                .collect();
            let kind = *moves.choose(&mut rng).unwrap();
            trace.push(c.trace_line(trace.len() - 1, kind_name(kind)));
            c.apply_mut(kind.with_label(Label(0))).map_err(OracleError::System)?;
        }
    }
    Ok(report)
}

fn kind_name(kind: HybridKind) -> &'static str {
    match kind {
        HybridKind::Shift => "SH",
        HybridKind::LeftArc => "LA",
        HybridKind::RightArc => "RA",
        HybridKind::Swap => "SW",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_oracles_pass_a_small_run() {
        for system in [SystemId::TwoPlanar, SystemId::HybridSwap] {
            let mut config = VerifyConfig::new(system, 5, 400, 3);
            config.reconstructions = 100;
            let report = oracle_verify(&config).unwrap();
            assert!(report.passed(), "{:?}", report.counterexample);
            assert!(report.configurations >= 400);
            assert_eq!(report.reconstructions, 100);
        }
    }

    #[test]
    fn out_of_range_lengths_are_rejected() {
        let config = VerifyConfig::new(SystemId::TwoPlanar, 40, 1, 1);
        assert!(matches!(oracle_verify(&config), Err(VerifyError::MaxLen(..))));
    }
}
