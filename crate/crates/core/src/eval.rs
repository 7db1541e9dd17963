//! Attachment scores and paired bootstrap significance.

use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::Serialize;

use crate::conll::Sentence;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{what}: expected {expected} sentences, found {found}")]
    SentenceCount {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{what}: sentence {sentence} has {found} tokens, gold has {expected}")]
    TokenCount {
        what: &'static str,
        sentence: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub uas: f64,
    pub las: f64,
    pub tokens_scored: usize,
    pub tokens_excluded: usize,
}

impl EvalReport {
    /// Fixed field order, two decimals.
    pub fn to_text(&self) -> String {
        format!(
            "UAS {:.2}\nLAS {:.2}\ntokens_scored {}\ntokens_excluded {}",
            self.uas, self.las, self.tokens_scored, self.tokens_excluded
        )
    }
}

/// Whether a form consists entirely of Unicode punctuation.
pub fn is_punctuation(form: &str) -> bool {
    static PUNCT: OnceLock<Regex> = OnceLock::new();
    PUNCT
        .get_or_init(|| Regex::new(r"^\p{P}+$").unwrap())
        .is_match(form)
}

/// Per-sentence counts: scored tokens, correct heads, correct heads and
/// labels, excluded tokens.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Counts {
    scored: usize,
    heads: usize,
    labeled: usize,
    excluded: usize,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.scored += o.scored;
        self.heads += o.heads;
        self.labeled += o.labeled;
        self.excluded += o.excluded;
    }
}

fn check_aligned(what: &'static str, gold: &[Sentence], pred: &[Sentence]) -> Result<(), EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::SentenceCount {
            what,
            expected: gold.len(),
            found: pred.len(),
        });
    }
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::TokenCount {
                what,
                sentence: i + 1,
                expected: g.len(),
                found: p.len(),
            });
        }
    }
    Ok(())
}

fn sentence_counts(gold: &Sentence, pred: &Sentence, exclude_punct: bool) -> Counts {
    let mut c = Counts::default();
    for (g, p) in gold.tokens.iter().zip(&pred.tokens) {
        if exclude_punct && is_punctuation(&g.form) {
            c.excluded += 1;
            continue;
        }
        c.scored += 1;
        if g.head == p.head {
            c.heads += 1;
            if g.deprel == p.deprel {
                c.labeled += 1;
            }
        }
    }
    c
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

pub fn evaluate(pred: &[Sentence], gold: &[Sentence], exclude_punct: bool) -> Result<EvalReport, EvalError> {
    check_aligned("prediction", gold, pred)?;
    let mut total = Counts::default();
    for (g, p) in gold.iter().zip(pred) {
        total += sentence_counts(g, p, exclude_punct);
    }
    Ok(EvalReport {
        uas: percent(total.heads, total.scored),
        las: percent(total.labeled, total.scored),
        tokens_scored: total.scored,
        tokens_excluded: total.excluded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Metric {
    Uas,
    Las,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignificanceResult {
    /// Score of A minus score of B on the full set, in points.
    pub delta: f64,
    pub p_value: f64,
    pub samples: usize,
    pub seed: u64,
}

/// One-sided paired bootstrap over sentences for "A beats B".
///
/// Each resample gets its own generator stream, so the result does not
/// depend on the order resamples are drawn in.
pub fn paired_bootstrap(
    gold: &[Sentence],
    pred_a: &[Sentence],
    pred_b: &[Sentence],
    metric: Metric,
    exclude_punct: bool,
    samples: usize,
    seed: u64,
) -> Result<SignificanceResult, EvalError> {
    check_aligned("system A", gold, pred_a)?;
    check_aligned("system B", gold, pred_b)?;
    let correct = |c: &Counts| match metric {
        Metric::Uas => c.heads,
        Metric::Las => c.labeled,
    };
    // (scored tokens, A correct, B correct) per sentence
    let rows: Vec<(usize, usize, usize)> = gold
        .iter()
        .zip(pred_a.iter().zip(pred_b))
        .map(|(g, (a, b))| {
            let ca = sentence_counts(g, a, exclude_punct);
            let cb = sentence_counts(g, b, exclude_punct);
            (ca.scored, correct(&ca), correct(&cb))
        })
        .collect();
    let delta_of = |picks: &mut dyn Iterator<Item = usize>| {
        let (mut n, mut a, mut b) = (0, 0, 0);
        for i in picks {
            n += rows[i].0;
            a += rows[i].1;
            b += rows[i].2;
        }
        percent(a, n) - percent(b, n)
    };
    let delta = delta_of(&mut (0..rows.len()));
    let mut hits = 0usize;
    if !rows.is_empty() {
        for s in 0..samples {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let len = rows.len();
            let sample = delta_of(&mut (0..len).map(|_| rng.gen_range(0..len)));
            // Centered on the null: how often does resampling noise alone
            // produce a gain as large as the observed one?
            if sample - delta >= delta - 1e-9 {
                hits += 1;
            }
        }
    }
    let p_value = if samples == 0 || rows.is_empty() {
        1.0
    } else {
        hits as f64 / samples as f64
    };
    Ok(SignificanceResult {
        delta,
        p_value,
        samples,
        seed,
    })
}
