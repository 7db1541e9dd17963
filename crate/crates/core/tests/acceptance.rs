//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Set `TWOPLANAR_TREEBANK` to a CoNLL file to include a
//! real treebank in the plane-assignment check.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twoplanar::conll::{read_conll_file, Sentence, Token};
use twoplanar::eval::{evaluate, paired_bootstrap, EvalReport, Metric};
use twoplanar::graph::{arcs_cross, count_cycles, crossing_two_coloring, DepGraph, Label};
use twoplanar::oracle::{assign_planes, gold_transition, loss, transition_costs, BruteForce};
use twoplanar::parser::{save_model, Regime, SystemId, TrainConfig};
use twoplanar::random::{random_tree, random_two_planar_tree};
use twoplanar::synthetic::{synthetic_treebank, SyntheticConfig};
use twoplanar::system::Configuration;
use twoplanar::verify::{verify_hybrid, VerifyConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Walks random legal paths over random trees with `n <= 6` and compares
/// every configuration against exhaustive search.
fn oracle_samples() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut checked, mut loss_errors, mut empty_sets, mut bad_members) = (0usize, 0usize, 0usize, 0usize);
    let mut first = None;
    while checked < 10_000 {
        let n = rng.gen_range(1..=6);
        let gold = random_tree(n, &mut rng);
        let pa = assign_planes(&gold);
        let mut search = BruteForce::new(&pa, 6).unwrap();
        let mut c = Configuration::initial(n).unwrap();
        while !c.is_terminal() {
            checked += 1;
            let best = search.min_loss(&c);
            let got = loss(&c, &pa).total;
            if got != best {
                loss_errors += 1;
                first.get_or_insert(format!("heads {:?}: loss {} vs {} at {:?}", gold.heads(), got, best, c));
            }
            let costs = transition_costs(&c, &pa).unwrap();
            if costs.zero_cost.is_empty() {
                empty_sets += 1;
            }
            for &k in &costs.zero_cost {
                let next = c.apply(k.with_label(Label(0))).unwrap();
                if search.min_loss(&next) != best {
                    bad_members += 1;
                    first.get_or_insert(format!("heads {:?}: {:?} loses at {:?}", gold.heads(), k, c));
                }
            }
            let k = *c.legal().unwrap().choose(&mut rng).unwrap();
            c.apply_mut(k.with_label(Label(0))).unwrap();
        }
    }
    let elapsed = start.elapsed();
    let suffix = first.map(|f| format!("; first mismatch {}", f)).unwrap_or_default();
    let exact = outcome(
        loss_errors == 0 && elapsed < Duration::from_secs(300),
        format!(
            "{} configurations, {} loss mismatches, {:.1}s{}",
            checked,
            loss_errors,
            elapsed.as_secs_f64(),
            suffix
        ),
    );
    let sound = outcome(
        empty_sets == 0 && bad_members == 0,
        format!(
            "{} configurations, {} empty zero-cost sets, {} zero-cost moves losing reachable arcs",
            checked, empty_sets, bad_members
        ),
    );
    (exact, sound)
}

fn gold_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut ok = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let tree = random_two_planar_tree(n, &mut rng);
        let labels = (0..n).map(|_| Some(Label(rng.gen_range(0..4)))).collect();
        let gold = DepGraph::with_labels(tree.heads().to_vec(), labels).unwrap();
        let pa = assign_planes(&gold);
        let mut c = Configuration::initial(n).unwrap();
        let mut stuck = false;
        while !c.is_terminal() {
            let costs = transition_costs(&c, &pa).unwrap();
            match costs.zero_cost.choose(&mut rng) {
                Some(&k) => c.apply_mut(gold_transition(&c, &pa, k)).unwrap(),
                None => {
                    stuck = true;
                    break;
                }
            }
        }
        let exact = !stuck
            && loss(&c, &pa).total == 0
            && c.arcs().len() == n
            && (1..=n).all(|d| pa.built_correctly(&c, d) && c.arcs().label(d) == gold.label(d));
        ok += exact as usize;
    }
    outcome(ok == 1000, format!("{}/1000 trees rebuilt in their assigned planes", ok))
}

/// Planes are internally non-crossing, and nothing is discarded exactly
/// when the crossing graph is 2-colorable.
fn check_assignment(tree: &DepGraph) -> bool {
    let pa = assign_planes(tree);
    let planes_ok = [pa.plane1(), pa.plane2()]
        .iter()
        .all(|p| p.iter().all(|&a| p.iter().all(|&b| !arcs_cross(a, b))));
    let arcs: Vec<_> = tree.arcs().collect();
    let colorable = crossing_two_coloring(&arcs).is_some();
    planes_ok && colorable == pa.discarded().is_empty()
}

fn plane_assignment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut trees: Vec<DepGraph> = (0..5000)
        .map(|_| {
            let n = rng.gen_range(1..=20);
            random_tree(n, &mut rng)
        })
        .collect();
    let synthetic = synthetic_treebank(2000, &SyntheticConfig::default(), 103);
    trees.extend(synthetic.iter().map(|s| s.graph().unwrap()));
    let mut note = String::from("no real treebank supplied (set TWOPLANAR_TREEBANK), rate not reported");
    if let Ok(path) = std::env::var("TWOPLANAR_TREEBANK") {
        match read_conll_file(&path) {
            Ok(sentences) => {
                let graphs: Vec<DepGraph> = sentences.iter().filter_map(|s| s.graph().ok()).collect();
                let report = twoplanar::planarity::planarity_stats(&graphs);
                note = format!(
                    "{}: {} sentences, 2-planar {:.2}% (soft floor 95%)",
                    path,
                    report.sentences,
                    report.two_planar_pct()
                );
                trees.extend(graphs);
            }
            Err(e) => note = format!("could not read {}: {}", path, e),
        }
    }
    let bad = trees.iter().filter(|t| !check_assignment(t)).count();
    let report = twoplanar::planarity::planarity_stats(&synthetic.iter().map(|s| s.graph().unwrap()).collect::<Vec<_>>());
    outcome(
        bad == 0,
        format!(
            "{} trees, {} invalid assignments; synthetic treebank 2-planar {:.2}%; {}",
            trees.len(),
            bad,
            report.two_planar_pct(),
            note
        ),
    )
}

/// Independent count: from every node follow heads for n + 1 steps to land
/// on a cycle, then name the cycle by its smallest node.
fn cycles_by_enumeration(heads: &[Option<usize>]) -> usize {
    let n = heads.len();
    let mut names = std::collections::BTreeSet::new();
    for start in 0..n {
        let mut v = Some(start);
        for _ in 0..=n {
            v = v.and_then(|x| heads[x]);
        }
        let Some(on_cycle) = v else {
            continue;
        };
        let mut smallest = on_cycle;
        let mut x = heads[on_cycle].unwrap();
        while x != on_cycle {
            smallest = smallest.min(x);
            x = heads[x].unwrap();
        }
        names.insert(smallest);
    }
    names.len()
}

fn cycle_counter() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut bad = 0;
    for _ in 0..10_000 {
        let nodes = rng.gen_range(1..=9);
        let heads: Vec<Option<usize>> = (0..nodes)
            .map(|v| {
                if rng.gen_bool(0.2) {
                    None
                } else {
                    let h = rng.gen_range(0..nodes);
                    (h != v).then_some(h)
                }
            })
            .collect();
        bad += (count_cycles(&heads) != cycles_by_enumeration(&heads)) as usize;
    }
    outcome(bad == 0, format!("10000 graphs up to 8 tokens plus root, {} mismatches", bad))
}

/// Median time of the loss on configurations halfway through random walks.
fn median_loss_time(n: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut times = Vec::new();
    for _ in 0..15 {
        let gold = random_tree(n, rng);
        let pa = assign_planes(&gold);
        let mut c = Configuration::initial(n).unwrap();
        for _ in 0..2 * n {
            if c.is_terminal() {
                break;
            }
            let k = *c.legal().unwrap().choose(rng).unwrap();
            c.apply_mut(k.with_label(Label(0))).unwrap();
        }
        for _ in 0..5 {
            let start = Instant::now();
            for _ in 0..20 {
                std::hint::black_box(loss(std::hint::black_box(&c), &pa));
            }
            times.push(start.elapsed().as_secs_f64() / 20.0);
        }
    }
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

fn linear_loss() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    // warm-up
    median_loss_time(500, &mut rng);
    let small = median_loss_time(1000, &mut rng);
    let large = median_loss_time(2000, &mut rng);
    let ratio = large / small;
    outcome(
        ratio <= 2.6,
        format!("median {:.1}us at n=1000, {:.1}us at n=2000, ratio {:.2}", small * 1e6, large * 1e6, ratio),
    )
}

fn hybrid_oracle_check() -> Outcome {
    let mut config = VerifyConfig::new(SystemId::HybridSwap, 6, 5000, 106);
    config.reconstructions = 1000;
    let report = verify_hybrid(&config).unwrap();
    let non_projective = {
        let mut rng = ChaCha8Rng::seed_from_u64(106);
        (0..1000)
            .filter(|_| {
                let n = rng.gen_range(1..=6);
                let t = random_tree(n, &mut rng);
                let arcs: Vec<_> = t.arcs().collect();
                !twoplanar::graph::is_one_planar(&arcs)
            })
            .count()
    };
    outcome(
        report.passed(),
        format!(
            "{} trees rebuilt (about {} non-projective), {} projective-tree costs compared, {} failures{}",
            report.reconstructions,
            non_projective,
            report.transitions,
            report.failures,
            report.counterexample.map(|c| format!("\n{}", c)).unwrap_or_default()
        ),
    )
}

fn train_once(system: SystemId, regime: Regime, iterations: usize, seed: u64, train: &[Sentence], dev: &[Sentence]) -> (twoplanar::parser::Model, f64) {
    let config = TrainConfig::new(system, regime, iterations, seed);
    let (model, reports) = twoplanar::parser::train(&config, train, dev, &mut |_| {}).unwrap();
    let best = reports.iter().map(|r| r.dev_uas).fold(f64::MIN, f64::max);
    (model, best)
}

fn trend() -> Outcome {
    let start = Instant::now();
    let train = synthetic_treebank(1000, &SyntheticConfig::default(), 201);
    let dev = synthetic_treebank(200, &SyntheticConfig::default(), 202);
    let mut means = Vec::new();
    for regime in [Regime::Static, Regime::Dynamic] {
        let scores: Vec<f64> = (1..=3)
            .map(|seed| train_once(SystemId::TwoPlanar, regime, 15, seed, &train, &dev).1)
            .collect();
        means.push(scores.iter().sum::<f64>() / 3.0);
    }
    let toy = synthetic_treebank(50, &SyntheticConfig::projective(), 203);
    let (model, _) = train_once(SystemId::TwoPlanar, Regime::Dynamic, 15, 1, &toy, &toy);
    let toy_uas = evaluate(&model.parse_all(&toy), &toy, false).unwrap().uas;
    let elapsed = start.elapsed();
    outcome(
        means[1] >= means[0] - 0.5 && toy_uas >= 95.0 && elapsed < Duration::from_secs(1800),
        format!(
            "synthetic 1000/200 split, mean dev UAS static {:.2} dynamic {:.2}; toy training UAS {:.2}; {:.0}s",
            means[0],
            means[1],
            toy_uas,
            elapsed.as_secs_f64()
        ),
    )
}

/// Gold with ten tokens per sentence; system B gets a fixed 80% of heads
/// right, system A the same plus an extra 5% of tokens.
fn bootstrap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut gold = Vec::new();
    let mut better = Vec::new();
    let mut worse = Vec::new();
    for _ in 0..1000 {
        let tokens: Vec<Token> = (1..=10)
            .map(|i| {
                let mut t = Token::new(i, "w", "X");
                t.head = if i == 1 { 0 } else { 1 };
                t.deprel = "dep".into();
                t
            })
            .collect();
        let g = Sentence::new(tokens);
        let mut a = g.clone();
        let mut b = g.clone();
        for i in 0..10 {
            let r: f64 = rng.gen();
            if r >= 0.8 {
                b.tokens[i].head = if i == 2 { 3 } else { 2 };
                if r >= 0.85 {
                    a.tokens[i].head = b.tokens[i].head;
                }
            }
        }
        gold.push(g);
        better.push(a);
        worse.push(b);
    }
    let same = paired_bootstrap(&gold, &better, &better, Metric::Uas, false, 10_000, 7).unwrap();
    let diff = paired_bootstrap(&gold, &better, &worse, Metric::Uas, false, 10_000, 7).unwrap();
    outcome(
        same.p_value >= 0.95 && diff.p_value < 0.01,
        format!(
            "(A,A) p {:.4}; A over B by {:.2} UAS, p {:.4}",
            same.p_value, diff.delta, diff.p_value
        ),
    )
}

fn determinism() -> Outcome {
    let train = synthetic_treebank(200, &SyntheticConfig::default(), 301);
    let dev = synthetic_treebank(50, &SyntheticConfig::default(), 302);
    let mut ok = true;
    let mut sizes = Vec::new();
    for system in [SystemId::TwoPlanar, SystemId::HybridSwap] {
        let run = || -> (Vec<u8>, EvalReport) {
            let (model, _) = train_once(system, Regime::Dynamic, 3, 42, &train, &dev);
            let mut bytes = Vec::new();
            save_model(&model, &mut bytes).unwrap();
            (bytes, evaluate(&model.parse_all(&dev), &dev, true).unwrap())
        };
        let (a, b) = (run(), run());
        ok &= a == b;
        sizes.push(a.0.len());
    }
    outcome(ok, format!("two runs per system, archives of {:?} bytes, byte-identical: {}", sizes, ok))
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: usize, name: &str, o: Outcome| {
        all &= o.pass;
        println!("{} criterion {} ({}): {}", if o.pass { "PASS" } else { "FAIL" }, id, name, o.detail);
    };
    let (exact, sound) = oracle_samples();
    report(1, "oracle exactness", exact);
    report(2, "zero-cost soundness", sound);
    report(3, "gold reconstruction", gold_reconstruction());
    report(4, "plane assignment validity", plane_assignment());
    report(5, "cycle counter", cycle_counter());
    report(6, "linear-time loss", linear_loss());
    report(7, "arc-hybrid+Swap oracle", hybrid_oracle_check());
    report(8, "training trend", trend());
    report(9, "bootstrap sanity", bootstrap());
    report(10, "determinism", determinism());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
