use std::collections::{HashMap, HashSet};

use super::pystr::{char_len, is_ascii_punct, is_upper, split};
use super::{SentimentResult, SentimentRuleset};

const PUNC_LIST: [&str; 17] =
    [".", "!", "?", ",", ";", ":", "-", "'", "\"", "!!", "!!!", "??", "???", "?!?", "!?!", "?!?!", "!?!?"];

/// Whitespace tokens of more than one character, with a single leading or
/// trailing punctuation group removed when what remains is a word of the
/// punctuation-free text. Emoticons and contractions survive.
fn words_and_emoticons(text: &str) -> Vec<String> {
    let no_punc: String = text.chars().filter(|c| !is_ascii_punct(*c)).collect();
    let words_only: HashSet<&str> = split(&no_punc).filter(|w| char_len(w) > 1).collect();
    let strip = |we: &str| -> Option<String> {
        let body = we.trim_end_matches(|c: char| is_ascii_punct(c));
        let trailing = &we[body.len()..];
        if PUNC_LIST.contains(&trailing) && words_only.contains(body) {
            return Some(body.to_string());
        }
        let body = we.trim_start_matches(|c: char| is_ascii_punct(c));
        let leading = &we[..we.len() - body.len()];
        if PUNC_LIST.contains(&leading) && words_only.contains(body) {
            return Some(body.to_string());
        }
        None
    };
    split(text)
        .filter(|w| char_len(w) > 1)
        .map(|we| strip(we).unwrap_or_else(|| we.to_string()))
        .collect()
}

/// True when some, but not all, tokens are ALL CAPS.
fn allcap_differential(words: &[String]) -> bool {
    let caps = words.iter().filter(|w| is_upper(w)).count();
    let diff = words.len() - caps;
    diff > 0 && diff < words.len()
}

struct Scorer<'a> {
    rules: &'a SentimentRuleset,
    words: Vec<String>,
    lower: Vec<String>,
    cap_diff: bool,
}

impl Scorer<'_> {
    fn in_lexicon(&self, j: usize) -> bool {
        self.rules.valence_lexicon.contains_key(&self.lower[j])
    }

    fn negated(&self, j: usize) -> bool {
        let w = &self.lower[j];
        self.rules.negation_set.contains(w) || w.contains("n't")
    }

    fn scalar_inc_dec(&self, j: usize, valence: f64) -> f64 {
        let Some(&base) = self.rules.booster_map.get(&self.lower[j]) else { return 0.0 };
        let mut scalar = if valence < 0.0 { -base } else { base };
        if is_upper(&self.words[j]) && self.cap_diff {
            if valence > 0.0 {
                scalar += self.rules.constants.caps_boost;
            } else {
                scalar -= self.rules.constants.caps_boost;
            }
        }
        scalar
    }

    fn valence(&self, i: usize) -> f64 {
        let c = &self.rules.constants;
        let Some(&base) = self.rules.valence_lexicon.get(&self.lower[i]) else { return 0.0 };
        let mut valence = base;
        if is_upper(&self.words[i]) && self.cap_diff {
            if valence > 0.0 {
                valence += c.caps_boost;
            } else {
                valence -= c.caps_boost;
            }
        }
        for start_i in 0..3 {
            if i > start_i && !self.in_lexicon(i - (start_i + 1)) {
                let mut s = self.scalar_inc_dec(i - (start_i + 1), valence);
                if start_i == 1 && s != 0.0 {
                    s *= c.booster_distance_decay[0];
                }
                if start_i == 2 && s != 0.0 {
                    s *= c.booster_distance_decay[1];
                }
                valence += s;
                valence = self.never_check(valence, start_i, i);
                if start_i == 2 {
                    valence = self.idioms_check(valence, i);
                }
            }
        }
        self.least_check(valence, i)
    }

    fn never_check(&self, valence: f64, start_i: usize, i: usize) -> f64 {
        let c = &self.rules.constants;
        // case-sensitive comparisons, as in the reference
        let w = &self.words;
        let so_this = |s: &str| s == "so" || s == "this";
        let mut valence = valence;
        match start_i {
            0 => {
                if self.negated(i - 1) {
                    valence *= c.negation_scalar;
                }
            }
            1 => {
                if w[i - 2] == "never" && so_this(&w[i - 1]) {
                    valence *= c.never_emphasis[0];
                } else if self.negated(i - 2) {
                    valence *= c.negation_scalar;
                }
            }
            _ => {
                // `never` binds only to the first alternative, so "so X" or
                // "this X" alone also triggers the emphasis
                if (w[i - 3] == "never" && so_this(&w[i - 2])) || so_this(&w[i - 1]) {
                    valence *= c.never_emphasis[1];
                } else if self.negated(i - 3) {
                    valence *= c.negation_scalar;
                }
            }
        }
        valence
    }

    fn idioms_check(&self, valence: f64, i: usize) -> f64 {
        let w = &self.words;
        let idioms = &self.rules.idioms;
        let mut valence = valence;
        let onezero = format!("{} {}", w[i - 1], w[i]);
        let twoonezero = format!("{} {} {}", w[i - 2], w[i - 1], w[i]);
        let twoone = format!("{} {}", w[i - 2], w[i - 1]);
        let threetwoone = format!("{} {} {}", w[i - 3], w[i - 2], w[i - 1]);
        let threetwo = format!("{} {}", w[i - 3], w[i - 2]);
        for seq in [&onezero, &twoonezero, &twoone, &threetwoone, &threetwo] {
            if let Some(v) = idioms.get(seq.as_str()) {
                valence = *v;
                break;
            }
        }
        if w.len() - 1 > i {
            if let Some(v) = idioms.get(&format!("{} {}", w[i], w[i + 1])) {
                valence = *v;
            }
        }
        if w.len() - 1 > i + 1 {
            if let Some(v) = idioms.get(&format!("{} {} {}", w[i], w[i + 1], w[i + 2])) {
                valence = *v;
            }
        }
        if self.rules.booster_map.contains_key(&threetwo) || self.rules.booster_map.contains_key(&twoone) {
            valence += self.rules.constants.bigram_dampener;
        }
        valence
    }

    fn least_check(&self, valence: f64, i: usize) -> f64 {
        let n = self.rules.constants.negation_scalar;
        let prev_is_least = |j: usize| !self.in_lexicon(j) && self.lower[j] == "least";
        if i > 1 && prev_is_least(i - 1) {
            if self.lower[i - 2] != "at" && self.lower[i - 2] != "very" {
                return valence * n;
            }
        } else if i > 0 && prev_is_least(i - 1) {
            return valence * n;
        }
        valence
    }

    fn but_check(&self, sentiments: &mut [f64]) {
        let c = &self.rules.constants;
        if let Some(bi) = self.lower.iter().position(|w| w == "but") {
            for (sidx, s) in sentiments.iter_mut().enumerate() {
                if sidx < bi {
                    *s *= c.but_before_weight;
                } else if sidx > bi {
                    *s *= c.but_after_weight;
                }
            }
        }
    }
}

fn punctuation_emphasis(text: &str, rules: &SentimentRuleset) -> f64 {
    let c = &rules.constants;
    let ep = text.chars().filter(|ch| *ch == '!').count().min(c.exclamation_max);
    let qm = text.chars().filter(|ch| *ch == '?').count();
    let qm_amp = match qm {
        0 | 1 => 0.0,
        2 | 3 => qm as f64 * c.question_boost,
        _ => c.question_many_boost,
    };
    ep as f64 * c.exclamation_boost + qm_amp
}

/// Raw per-token sentiments after every rule, in token order.
pub(super) fn token_sentiments(text: &str, rules: &SentimentRuleset) -> Vec<f64> {
    let words = words_and_emoticons(text);
    let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    let cap_diff = allcap_differential(&words);
    let scorer = Scorer { rules, words, lower, cap_diff };

    // The reference looks tokens up with `list.index`, so a repeated token
    // is always scored in the context of its first occurrence.
    let mut first_index: HashMap<&str, usize> = HashMap::new();
    for (idx, w) in scorer.words.iter().enumerate() {
        first_index.entry(w.as_str()).or_insert(idx);
    }

    let n = scorer.words.len();
    let mut sentiments = Vec::with_capacity(n);
    for item in &scorer.words {
        let i = first_index[item.as_str()];
        let kind_of = i < n - 1 && scorer.lower[i] == "kind" && scorer.lower[i + 1] == "of";
        if kind_of || rules.booster_map.contains_key(&item.to_lowercase()) {
            sentiments.push(0.0);
            continue;
        }
        sentiments.push(scorer.valence(i));
    }
    scorer.but_check(&mut sentiments);
    sentiments
}

pub fn score_text(text: &str, rules: &SentimentRuleset) -> SentimentResult {
    let sentiments = token_sentiments(text, rules);
    if sentiments.is_empty() {
        return SentimentResult::neutral();
    }
    let mut sum_s: f64 = sentiments.iter().sum();
    let amp = punctuation_emphasis(text, rules);
    if sum_s > 0.0 {
        sum_s += amp;
    } else if sum_s < 0.0 {
        sum_s -= amp;
    }
    let compound = normalize(sum_s, rules.constants.normalization_alpha);

    let mut pos_sum = 0.0;
    let mut neg_sum = 0.0;
    let mut neu_count = 0usize;
    for &s in &sentiments {
        if s > 0.0 {
            pos_sum += s + 1.0;
        }
        if s < 0.0 {
            neg_sum += s - 1.0;
        }
        if s == 0.0 {
            neu_count += 1;
        }
    }
    if pos_sum > neg_sum.abs() {
        pos_sum += amp;
    } else if pos_sum < neg_sum.abs() {
        neg_sum -= amp;
    }
    let total = pos_sum + neg_sum.abs() + neu_count as f64;
    SentimentResult {
        compound: round_to(compound, 4),
        pos: (pos_sum / total).abs(),
        neu: (neu_count as f64 / total).abs(),
        neg: (neg_sum / total).abs(),
    }
}

/// S / √(S² + α), in (−1, 1).
pub fn normalize(score: f64, alpha: f64) -> f64 {
    score / (score * score + alpha).sqrt()
}

/// Round half to even on the exact binary value, as Python's `round(x, n)`.
pub fn round_to(x: f64, decimals: usize) -> f64 {
    let r: f64 = format!("{x:.decimals$}").parse().expect("formatted float parses");
    // drop the sign of a rounded-away negative
    if r == 0.0 { 0.0 } else { r }
}
