//! Seeded toy treebanks for tests and demos.
//!
//! Sentences come from a small English-like grammar: subject, verb, object,
//! prepositional phrases whose attachment depends on the preposition and
//! the object noun, optional relative clauses that may be extraposed past
//! the verb phrase (which makes the tree non-projective) and final
//! punctuation.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conll::{Sentence, Token};

const DETS: [&str; 4] = ["the", "a", "this", "every"];
const ADJS: [&str; 8] = ["old", "red", "quiet", "small", "clever", "heavy", "bright", "strange"];
const NOUNS: [&str; 16] = [
    "man", "dog", "letter", "table", "city", "river", "teacher", "garden", "telescope", "knife", "song",
    "child", "box", "window", "friend", "book",
];
const VERBS: [&str; 10] = [
    "saw", "found", "wrote", "moved", "opened", "liked", "painted", "carried", "heard", "read",
];
const INTRANSITIVE: [&str; 4] = ["arrived", "slept", "left", "waited"];
const PREPS: [&str; 5] = ["with", "near", "of", "from", "under"];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    /// Chance that a subject carries a relative clause.
    pub relative_clause: f64,
    /// Chance that such a clause is moved after the verb phrase.
    pub extraposition: f64,
    pub prepositional_phrase: f64,
    /// Chance of flipping the lexically preferred PP attachment.
    pub attachment_noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            relative_clause: 0.3,
            extraposition: 0.5,
            prepositional_phrase: 0.6,
            attachment_noise: 0.1,
        }
    }
}

impl SyntheticConfig {
    /// No extraposition, so every tree is projective.
    pub fn projective() -> Self {
        SyntheticConfig {
            extraposition: 0.0,
            ..SyntheticConfig::default()
        }
    }
}

struct Builder<'r> {
    tokens: Vec<Token>,
    rng: &'r mut ChaCha8Rng,
}

impl Builder<'_> {
    fn pick<'a>(&mut self, words: &[&'a str]) -> &'a str {
        words[self.rng.gen_range(0..words.len())]
    }

    fn push(&mut self, form: &str, pos: &str, head: usize, rel: &str) -> usize {
        let id = self.tokens.len() + 1;
        let mut t = Token::new(id, form, pos);
        t.head = head;
        t.deprel = rel.to_string();
        self.tokens.push(t);
        id
    }

    fn set_head(&mut self, id: usize, head: usize, rel: &str) {
        let t = &mut self.tokens[id - 1];
        t.head = head;
        t.deprel = rel.to_string();
    }

    /// Determiner, adjectives, noun; the dependents point at the noun.
    fn noun_phrase(&mut self) -> usize {
        let det = self.pick(&DETS);
        let d = self.push(det, "DT", 0, "det");
        let mut adjs = Vec::new();
        while adjs.len() < 2 && self.rng.gen_bool(0.35) {
            let adj = self.pick(&ADJS);
            adjs.push(self.push(adj, "JJ", 0, "amod"));
        }
        let noun = self.pick(&NOUNS);
        let n = self.push(noun, "NN", 0, "_");
        self.set_head(d, n, "det");
        for a in adjs {
            self.set_head(a, n, "amod");
        }
        n
    }

    /// Preposition plus noun phrase; returns the preposition.
    fn prepositional_phrase(&mut self) -> (usize, &'static str) {
        let prep = self.pick(&PREPS);
        let p = self.push(prep, "IN", 0, "prep");
        let n = self.noun_phrase();
        self.set_head(n, p, "pobj");
        (p, prep)
    }

    fn relative_clause(&mut self) -> usize {
        let who = self.push("who", "WP", 0, "nsubj");
        let verb = self.pick(&INTRANSITIVE);
        let v = self.push(verb, "VBD", 0, "rcmod");
        self.set_head(who, v, "nsubj");
        v
    }
}

/// Attachment preferred by the lexicon: "of" always takes the noun,
/// "with" takes the noun for some nouns and the verb for the rest.
fn prefers_noun(prep: &str, noun: &str) -> bool {
    match prep {
        "of" => true,
        "with" => !matches!(noun, "telescope" | "knife" | "friend" | "box"),
        "near" => noun.len().is_multiple_of(2),
        _ => false,
    }
}

fn sentence(config: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Sentence {
    let mut b = Builder {
        tokens: Vec::new(),
        rng,
    };
    let subj = b.noun_phrase();
    let clause = b.rng.gen_bool(config.relative_clause);
    let extrapose = clause && b.rng.gen_bool(config.extraposition);
    let mut rel = None;
    if clause && !extrapose {
        rel = Some(b.relative_clause());
    }
    let transitive = b.rng.gen_bool(0.75);
    let verb = if transitive { b.pick(&VERBS) } else { b.pick(&INTRANSITIVE) };
    let v = b.push(verb, "VBD", 0, "root");
    b.set_head(subj, v, "nsubj");
    let mut last_noun = None;
    if transitive {
        let o = b.noun_phrase();
        b.set_head(o, v, "dobj");
        last_noun = Some(o);
    }
    let mut pps = 0;
    while pps < 2 && b.rng.gen_bool(config.prepositional_phrase / (1.0 + pps as f64)) {
        let (p, prep) = b.prepositional_phrase();
        let host = match last_noun {
            Some(n) => {
                let noun = b.tokens[n - 1].form.clone();
                let to_noun = prefers_noun(prep, &noun) != b.rng.gen_bool(config.attachment_noise);
                if to_noun {
                    n
                } else {
                    v
                }
            }
            None => v,
        };
        b.set_head(p, host, "prep");
        last_noun = Some(b.tokens.len());
        pps += 1;
    }
    if extrapose {
        rel = Some(b.relative_clause());
    }
    if let Some(r) = rel {
        b.set_head(r, subj, "rcmod");
    }
    if b.rng.gen_bool(0.9) {
        b.push(".", ".", v, "punct");
    }
    Sentence::new(b.tokens)
}

/// `count` sentences drawn with `seed`.
pub fn synthetic_treebank(count: usize, config: &SyntheticConfig, seed: u64) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sentence(config, &mut rng)).collect()
}
