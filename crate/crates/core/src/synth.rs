//! Synthetic two-topic corpus generator for tests and demos.
//!
//! Every document mixes words from its class's topic distribution with words
//! from a shared background distribution, plus a sprinkling of stopwords.
//! `overlap` is the probability that a token comes from the background, so
//! 0 gives trivially separable classes and values near 1 give hard ones.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::text_pipeline::{Document, Label, Split};

const SYLLABLE_ONSETS: &[u8] = b"bdfgklmnprstvz";
const SYLLABLE_VOWELS: &[u8] = b"aeiou";
const FILLER: &[&str] = &["the", "and", "of", "to", "is", "in", "that", "it", "was", "for"];
const FILLER_RATE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub size: usize,
    pub positive_fraction: f64,
    /// Probability that a content token is drawn from the shared background.
    pub overlap: f64,
    /// Fraction of documents marked `split: test`.
    pub test_fraction: f64,
    /// Words per class topic.
    pub topic_words: usize,
    pub background_words: usize,
    /// Mean content tokens per document.
    pub doc_length: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            size: 200,
            positive_fraction: 0.5,
            overlap: 0.85,
            test_fraction: 0.2,
            topic_words: 300,
            background_words: 1000,
            doc_length: 40,
            seed: 0,
        }
    }
}

/// Pronounceable pseudo-word for `index`; injective, three syllables, never
/// an English stopword.
pub fn pseudo_word(index: usize) -> String {
    let per = SYLLABLE_ONSETS.len() * SYLLABLE_VOWELS.len();
    let space = per * per * per;
    // odd multiplier coprime to 70^3 permutes the three-syllable space
    let mut i = (index % space) * 104_729 % space + index / space * space;
    let mut w = String::with_capacity(6);
    for _ in 0..3 {
        let s = i % per;
        i /= per;
        w.push(SYLLABLE_ONSETS[s / SYLLABLE_VOWELS.len()] as char);
        w.push(SYLLABLE_VOWELS[s % SYLLABLE_VOWELS.len()] as char);
    }
    // past 70^3 words, append the overflow so names stay unique
    if i > 0 {
        w.push_str(&i.to_string());
    }
    w
}

fn zipf(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|r| 1.0 / r as f64)).expect("nonempty weights")
}

pub fn generate_corpus(cfg: &SynthConfig) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let topic = cfg.topic_words.max(1);
    let background = cfg.background_words.max(1);
    let topic_dist = zipf(topic);
    let bg_dist = zipf(background);
    // Randomize which lexicon words play which role so rank and spelling are unrelated.
    let mut lexicon: Vec<usize> = (0..2 * topic + background).collect();
    lexicon.shuffle(&mut rng);
    let words: Vec<String> = lexicon.into_iter().map(pseudo_word).collect();
    let (pos_words, rest) = words.split_at(topic);
    let (neg_words, bg_words) = rest.split_at(topic);

    let n_pos = (cfg.size as f64 * cfg.positive_fraction).round() as usize;
    let n_test = (cfg.size as f64 * cfg.test_fraction).round() as usize;
    let mut labels: Vec<Label> = (0..cfg.size)
        .map(|i| if i < n_pos { Label::Positive } else { Label::Negative })
        .collect();
    labels.shuffle(&mut rng);
    let mut is_test = vec![false; cfg.size];
    for i in rand::seq::index::sample(&mut rng, cfg.size, n_test.min(cfg.size)) {
        is_test[i] = true;
    }

    let width = cfg.size.max(1).to_string().len().max(5);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let jitter = cfg.doc_length / 2;
            let len = cfg.doc_length - jitter + rng.gen_range(0..=2 * jitter);
            let own = if label.is_positive() { pos_words } else { neg_words };
            let mut tokens: Vec<&str> = Vec::with_capacity(len + len / 4);
            for _ in 0..len {
                if rng.gen_bool(FILLER_RATE) {
                    tokens.push(FILLER[rng.gen_range(0..FILLER.len())]);
                }
                if rng.gen_bool(cfg.overlap.clamp(0.0, 1.0)) {
                    tokens.push(&bg_words[bg_dist.sample(&mut rng)]);
                } else {
                    tokens.push(&own[topic_dist.sample(&mut rng)]);
                }
            }
            Document {
                id: format!("doc{:0width$}", i, width = width),
                text: tokens.join(" "),
                label,
                split: if is_test[i] { Split::Test } else { Split::Train },
            }
        })
        .collect()
}
