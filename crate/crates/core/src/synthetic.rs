//! Planted-topic corpora with known ground truth.
//!
//! Each class owns a set of topic words and both classes draw from a shared
//! filler set. Topic and filler draws follow Zipf weights over word rank.
//! The most frequent topic words of each class leak into the other class at
//! a small rate, so the classes overlap the way real corpora do. With
//! planting on, the last two topic words of each class are held out of the
//! ordinary draws and inserted together into a fraction of that class's
//! documents. Either word may also turn up alone in the other class as a
//! decoy, so only the pair, not each word, identifies its class.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Class, Document};
use crate::error::{Error, Result};
use crate::rng;

const SYNTH_STREAM: u64 = 0x5359_4e54;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub known_topic: usize,
    pub novel_topic: usize,
    pub filler: usize,
    pub docs_per_class: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability a token is drawn from the document's own topic words.
    pub topic_rate: f64,
    /// Probability a token is drawn from the other class's leakable words.
    pub leak_rate: f64,
    /// Number of top-ranked topic words per class that can leak.
    pub leakable: usize,
    /// Zipf exponent for topic draws; 0 is uniform.
    pub topic_zipf: f64,
    /// Zipf exponent for filler draws.
    pub filler_zipf: f64,
    /// Fraction of a class's documents that receive its planted pair.
    pub pair_rate: f64,
    /// Fraction of a class's documents that receive one word of the other
    /// class's pair.
    pub decoy_rate: f64,
    pub plant_pairs: bool,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            known_topic: 15,
            novel_topic: 15,
            filler: 20,
            docs_per_class: 200,
            min_len: 8,
            max_len: 16,
            topic_rate: 0.3,
            leak_rate: 0.1,
            leakable: 6,
            topic_zipf: 1.0,
            filler_zipf: 1.0,
            pair_rate: 0.4,
            decoy_rate: 0.4,
            plant_pairs: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub docs: Vec<Document>,
    pub known_words: Vec<String>,
    pub novel_words: Vec<String>,
    pub filler_words: Vec<String>,
    /// Words of each class that can appear in the other class, indexed by
    /// [`Class::index`].
    pub leaked: [Vec<String>; 2],
    /// Planted pair per class, indexed by [`Class::index`].
    pub planted: Option<[(String, String); 2]>,
}

impl SyntheticCorpus {
    pub fn topic_words(&self, class: Class) -> &[String] {
        match class {
            Class::Known => &self.known_words,
            Class::Novel => &self.novel_words,
        }
    }

    /// Topic words of `class` that never occur in the other class.
    pub fn exclusive_words(&self, class: Class) -> Vec<String> {
        let leaked = &self.leaked[class.index()];
        self.topic_words(class).iter().filter(|w| !leaked.contains(w)).cloned().collect()
    }
}

// consonant-vowel syllables; no word ends in a suffix the stemmer strips
fn word(prefix: &str, i: usize) -> String {
    const C: &[u8] = b"bdfgklmnprtvz";
    const V: &[u8] = b"aiou";
    let mut s = prefix.to_string();
    let mut k = i;
    loop {
        let syl = k % (C.len() * V.len());
        s.push(C[syl / V.len()] as char);
        s.push(V[syl % V.len()] as char);
        k /= C.len() * V.len();
        if k == 0 {
            break;
        }
    }
    s
}

fn zipf(n: usize, exponent: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|r| (r as f64).powf(-exponent))).expect("positive weights")
}

pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticCorpus> {
    let invalid = |m: &str| Err(Error::InvalidParameter(m.to_string()));
    if spec.filler == 0 || spec.docs_per_class == 0 {
        return invalid("filler words and documents must be non-empty");
    }
    if spec.min_len == 0 || spec.min_len > spec.max_len {
        return invalid("document length range");
    }
    if spec.topic_rate < 0.0 || spec.leak_rate < 0.0 || spec.topic_rate + spec.leak_rate > 1.0 {
        return invalid("topic and leak rates");
    }
    if !(0.0..=1.0).contains(&spec.pair_rate) || !(0.0..=1.0).contains(&spec.decoy_rate) {
        return invalid("pair and decoy rates");
    }
    let reserved = if spec.plant_pairs { 2 } else { 0 };
    let drawable = [spec.known_topic, spec.novel_topic].map(|n| n.saturating_sub(reserved));
    if drawable.contains(&0) {
        return invalid("too few topic words");
    }
    if spec.leak_rate > 0.0 && (spec.leakable == 0 || drawable.iter().any(|&n| spec.leakable > n)) {
        return invalid("leakable word count");
    }

    let known_words: Vec<String> = (0..spec.known_topic).map(|i| word("kn", i)).collect();
    let novel_words: Vec<String> = (0..spec.novel_topic).map(|i| word("nv", i)).collect();
    let filler_words: Vec<String> = (0..spec.filler).map(|i| word("fl", i)).collect();
    let topics = [&known_words, &novel_words];
    let leak_count = if spec.leak_rate > 0.0 { spec.leakable } else { 0 };
    let planted = spec.plant_pairs.then(|| {
        topics.map(|t| {
            let n = t.len();
            (t[n - 2].clone(), t[n - 1].clone())
        })
    });
    let leaked = Class::ALL.map(|c| {
        let mut w = topics[c.index()][..leak_count].to_vec();
        if let Some(p) = planted.as_ref().filter(|_| spec.decoy_rate > 0.0) {
            let (a, b) = &p[c.index()];
            w.extend([a.clone(), b.clone()]);
        }
        w
    });

    let topic_dist = drawable.map(|n| zipf(n, spec.topic_zipf));
    let filler_dist = zipf(spec.filler, spec.filler_zipf);
    let mut docs = Vec::with_capacity(2 * spec.docs_per_class);
    for class in Class::ALL {
        let mut r = rng::stream(seed, &[SYNTH_STREAM, class.index() as u64]);
        let (own, other) = (class.index(), class.other().index());
        for d in 0..spec.docs_per_class {
            let len = r.gen_range(spec.min_len..=spec.max_len);
            let mut tokens: Vec<String> = Vec::with_capacity(len + 2);
            for _ in 0..len {
                let u: f64 = r.gen();
                let w = if u < spec.topic_rate {
                    &topics[own][topic_dist[own].sample(&mut r)]
                } else if u < spec.topic_rate + spec.leak_rate {
                    topics[other][..leak_count].choose(&mut r).expect("leakable words")
                } else {
                    &filler_words[filler_dist.sample(&mut r)]
                };
                tokens.push(w.clone());
            }
            if let Some(p) = &planted {
                if r.gen_bool(spec.pair_rate) {
                    let (a, b) = &p[own];
                    tokens.push(a.clone());
                    tokens.push(b.clone());
                }
                if r.gen_bool(spec.decoy_rate) {
                    let (a, b) = &p[other];
                    tokens.push(if r.gen() { a.clone() } else { b.clone() });
                }
            }
            docs.push(Document::new(format!("{}/{d:04}", class.as_str()), class, tokens));
        }
    }
    Ok(SyntheticCorpus { docs, known_words, novel_words, filler_words, leaked, planted })
}
