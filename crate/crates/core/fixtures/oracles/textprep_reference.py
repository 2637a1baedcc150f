#!/usr/bin/env python3
"""Independent implementation of the comment-noun pipeline over the bundled
lexicon files. Writes fixtures/textprep/conformance.json. Run from crates/core/.

clean: drop URLs; keep Unicode letters (category L*) and apostrophes/hyphens
       between two letters; lowercase; single spaces
tokenize: split on spaces and hyphens, strip a possessive 's, drop tokens
          still holding an apostrophe
then: collapse runs of >= 3, lemmatize, keep nouns, drop stopwords, keep
      wordlist words
"""
import json
import re
import sys
import unicodedata
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
LEX = ROOT / "data" / "lexicon"
URL = re.compile(r"(?i)\b(?:https?://|ftp://|www\.)\S*")
JOINERS = {"'", "’", "-"}

sys.path.insert(0, str(Path(__file__).parent))
from sentiment_reference import COMMENTS  # noqa: E402


def words(name):
    return {l.strip().lower() for l in (LEX / name).read_text(encoding="utf-8").splitlines() if l.strip()}


NOUNS = words("nouns.txt")
WORDLIST = words("wordlist.txt")
STOP = words("stopwords.txt") | words("custom_stopwords.txt")
EXC = {}
for line in (LEX / "lemma_exceptions.tsv").read_text(encoding="utf-8").splitlines():
    if line.strip():
        k, v = line.split("\t")
        EXC.setdefault(k, v)


def is_letter(c):
    return unicodedata.category(c).startswith("L")


def clean(text):
    text = URL.sub(" ", text)
    out, pending = [], False
    for i, c in enumerate(text):
        if is_letter(c):
            keep = True
        elif c in JOINERS:
            keep = 0 < i < len(text) - 1 and is_letter(text[i - 1]) and is_letter(text[i + 1])
        else:
            keep = False
        if not keep:
            pending = True
            continue
        if pending and out:
            out.append(" ")
        pending = False
        out.append("'" if c == "’" else c.lower())
    return "".join(out)


def tokenize(cleaned):
    toks = []
    for w in cleaned.split(" "):
        for part in w.split("-"):
            if part.endswith("'s"):
                part = part[:-2]
            if part and "'" not in part:
                toks.append(part)
    return toks


def collapse(tokens):
    out, i = [], 0
    while i < len(tokens):
        j = i
        while j < len(tokens) and tokens[j] == tokens[i]:
            j += 1
        out.extend([tokens[i]] * (1 if j - i >= 3 else j - i))
        i = j
    return out


def lemmatize(t):
    if t in EXC:
        return EXC[t]
    if t.endswith("ies") and t[:-3] + "y" in WORDLIST:
        return t[:-3] + "y"
    if t.endswith("ves") and t[:-3] + "f" in WORDLIST:
        return t[:-3] + "f"
    if t.endswith("es") and t[:-2] in WORDLIST:
        return t[:-2]
    if t.endswith("s") and t[:-1] in WORDLIST:
        return t[:-1]
    return t


def nouns(text):
    out = []
    for t in collapse(tokenize(clean(text))):
        t = lemmatize(t)
        if t in NOUNS and t not in STOP and t in WORDLIST:
            out.append(t)
    return out


def unique_labels(labels):
    seen, out = set(), []
    for l in labels:
        l = l.strip().lower()
        if not l:
            continue
        l = lemmatize(l)
        if l not in seen:
            seen.add(l)
            out.append(l)
    return out


EXTRA = [
    "Money Money Money talks",
    "Money Money",
    "see https://x.co/a 😀!!",
    "Mosquitos? Mosquitos!!",
    "The children's toys and the wolves' dens",
    "Glasses, glass, GLASSES",
    "a well-known fact-checker's mother-in-law",
    "Ceci n'est pas une pipe",
    "Berries berries berries berries in the leaves",
    "Check www.reddit.com/r/pics for more dragons",
    "I don't know, it's the dog’s bowl",
    "Rocks rocks rocks stone stone",
    "ÉCOLE café naïve 東京 tower",
    "9000 photos of 3 cats & 2 dogs",
    "",
]

LABELS = [
    ["Sculpture", "sculpture", "Dragon"],
    [],
    ["Rocks", "Rock"],
    ["Tree", "Trees", "Leaves", "Leaf", "Sky"],
    ["Water", "water ", "WATER", "Waters"],
]


def main():
    cases = [{"text": t, "tokens": nouns(t)} for t in EXTRA + COMMENTS]
    labels = [{"labels": l, "unique": unique_labels(l)} for l in LABELS]
    out = ROOT / "fixtures" / "textprep" / "conformance.json"
    out.write_text(json.dumps({"cases": cases, "labels": labels}, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {len(cases)} comment cases, {len(labels)} label cases")


if __name__ == "__main__":
    main()
