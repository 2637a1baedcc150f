use std::sync::OnceLock;

use regex::Regex;

fn url() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(?:https?://|ftp://|www\.)\S*").expect("static regex"))
}

fn non_letters() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[^\p{L}'\u{2019}-]+").expect("static regex"))
}

fn joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

/// Lowercases, strips URLs, and replaces every character that is not a
/// letter (Unicode category L), or an apostrophe/hyphen between two
/// letters, with a space. Whitespace runs collapse to a single space.
pub fn clean_text(raw: &str) -> String {
    let without_urls = url().replace_all(raw, " ");
    let letters = non_letters().replace_all(&without_urls, " ");
    // every char left is a letter, a joiner or a space
    let chars: Vec<char> = letters.chars().collect();
    let is_letter = |i: usize| chars.get(i).is_some_and(|c| *c != ' ' && !joiner(*c));
    let mut out = String::with_capacity(letters.len());
    let mut pending_space = false;
    for (i, &c) in chars.iter().enumerate() {
        let keep = c != ' ' && (!joiner(c) || (i > 0 && is_letter(i - 1) && is_letter(i + 1)));
        if !keep {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        let c = if c == '\u{2019}' { '\'' } else { c };
        out.extend(c.to_lowercase());
    }
    out
}

/// Splits cleaned text into letter-only tokens. Hyphenated compounds are
/// split into their parts, a possessive `'s` is removed, and any other
/// token with an apostrophe (contractions) is dropped.
pub fn tokenize(cleaned: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in cleaned.split_whitespace() {
        for part in word.split('-') {
            let part = part.strip_suffix("'s").unwrap_or(part);
            if part.is_empty() || part.contains('\'') {
                continue;
            }
            out.push(part.to_string());
        }
    }
    out
}

/// Reduces each run of three or more identical consecutive tokens to one.
pub fn collapse_repeats<T: AsRef<str> + Clone>(tokens: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let mut j = i + 1;
        while j < tokens.len() && tokens[j].as_ref() == tokens[i].as_ref() {
            j += 1;
        }
        let run = j - i;
        let keep = if run >= 3 { 1 } else { run };
        out.extend(std::iter::repeat_n(tokens[i].clone(), keep));
        i = j;
    }
    out
}
