//! String predicates with Python `str` semantics, which the reference
//! analyzer relies on.

/// Python `str.isspace` for one character: Unicode White_Space plus the
/// ASCII information separators U+001C..U+001F.
pub fn is_space(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

/// Python `str.split()` with no arguments.
pub fn split(text: &str) -> impl Iterator<Item = &str> {
    text.split(is_space).filter(|s| !s.is_empty())
}

fn is_titlecase(c: char) -> bool {
    matches!(c,
        '\u{01C5}' | '\u{01C8}' | '\u{01CB}' | '\u{01F2}'
        | '\u{1F88}'..='\u{1F8F}'
        | '\u{1F98}'..='\u{1F9F}'
        | '\u{1FA8}'..='\u{1FAF}'
        | '\u{1FBC}' | '\u{1FCC}' | '\u{1FFC}')
}

/// Python `str.isupper`: at least one cased character and no lowercase or
/// titlecase ones.
pub fn is_upper(s: &str) -> bool {
    let mut cased = false;
    for c in s.chars() {
        if c.is_lowercase() || is_titlecase(c) {
            return false;
        }
        if c.is_uppercase() {
            cased = true;
        }
    }
    cased
}

/// Characters of Python's `string.punctuation`.
pub fn is_ascii_punct(c: char) -> bool {
    c.is_ascii_punctuation()
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}
