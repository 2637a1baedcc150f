use super::LexiconSet;

/// Exception table first, then the first applicable suffix rule:
/// -ies→-y, -ves→-f, -es→∅, -s→∅. A rule applies only when its result is a
/// known word.
pub fn lemmatize(token: &str, lex: &LexiconSet) -> String {
    if let Some(lemma) = lex.lemma_exceptions.get(token) {
        return lemma.clone();
    }
    let known = |w: &str| lex.english_wordlist.contains(w);
    if let Some(stem) = token.strip_suffix("ies") {
        let cand = format!("{stem}y");
        if known(&cand) {
            return cand;
        }
    }
    if let Some(stem) = token.strip_suffix("ves") {
        let cand = format!("{stem}f");
        if known(&cand) {
            return cand;
        }
    }
    if let Some(stem) = token.strip_suffix("es") {
        if known(stem) {
            return stem.to_string();
        }
    }
    if let Some(stem) = token.strip_suffix('s') {
        if known(stem) {
            return stem.to_string();
        }
    }
    token.to_string()
}
