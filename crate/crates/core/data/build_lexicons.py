#!/usr/bin/env python3
"""Regenerate the bundled lexicon assets under data/lexicon/.

Inputs (paths given on the command line):
  --wordnet DIR     WordNet 3.0 dict directory (index.*, *.exc, cntlist.rev)
  --stopwords FILE  spaCy English stop words, one per line
  --vader FILE      vader_lexicon.txt (token, mean valence, sd, raw ratings)

Outputs:
  nouns.txt              noun-dominant WordNet lemmas
  wordlist.txt           every single-token WordNet lemma
  stopwords.txt          standard stop words
  custom_stopwords.txt   hand-screened uninformative words
  lemma_exceptions.tsv   irregular plurals plus identity guards
  vader_lexicon.tsv      token<TAB>valence

Noun selection: a lemma from index.noun is kept when its tagged noun usage in
cntlist.rev is at least its tagged usage as any other part of speech combined.
"""

import argparse
import re
from collections import defaultdict
from pathlib import Path

TOKEN = re.compile(r"^[a-z]+(?:[-'][a-z]+)*$")
POS_FILES = {"noun": "index.noun", "verb": "index.verb", "adj": "index.adj", "adv": "index.adv"}
SENSE_POS = {"1": "noun", "2": "verb", "3": "adj", "4": "adv", "5": "adj"}

CUSTOM_STOPWORDS = """
pic pics picture pictures photo photos image images img post posts op lol lmao
rofl omg wtf tbh imo imho idk btw smh haha hahaha edit thread sub subreddit
reddit upvote upvotes downvote karma repost comment comments thing things lot
lots way kind sort bit guy guys dude man people someone something anything
nothing everything time day year yes yeah yep nope
""".split()


def index_lemmas(wn: Path, pos: str):
    out = set()
    for line in open(wn / POS_FILES[pos], encoding="utf-8"):
        if line.startswith("  "):
            continue
        lemma = line.split(" ", 1)[0]
        if TOKEN.match(lemma):
            out.add(lemma)
    return out


def usage_counts(wn: Path):
    freq = defaultdict(lambda: defaultdict(int))
    for line in open(wn / "cntlist.rev", encoding="utf-8"):
        key, _num, cnt = line.split()
        lemma, rest = key.split("%", 1)
        freq[lemma][SENSE_POS[rest[0]]] += int(cnt)
    return freq


def exceptions(wn: Path, wordlist):
    exc = {}
    for line in open(wn / "noun.exc", encoding="utf-8"):
        parts = line.split()
        surface, lemma = parts[0], parts[1]
        if TOKEN.match(surface) and TOKEN.match(lemma) and lemma in wordlist:
            exc.setdefault(surface, lemma)
    return exc


def rules(token, wordlist):
    # Mirrors the suffix rules in src/textprep/lemma.rs.
    if token.endswith("ies") and token[:-3] + "y" in wordlist:
        return token[:-3] + "y"
    if token.endswith("ves") and token[:-3] + "f" in wordlist:
        return token[:-3] + "f"
    if token.endswith("es") and token[:-2] in wordlist:
        return token[:-2]
    if token.endswith("s") and token[:-1] in wordlist:
        return token[:-1]
    return token


def lemmatize(token, exc, wordlist):
    if token in exc:
        return exc[token]
    return rules(token, wordlist)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wordnet", type=Path, required=True)
    ap.add_argument("--stopwords", type=Path, required=True)
    ap.add_argument("--vader", type=Path, required=True)
    ap.add_argument("--out", type=Path, default=Path(__file__).parent / "lexicon")
    args = ap.parse_args()

    lemmas = {pos: index_lemmas(args.wordnet, pos) for pos in POS_FILES}
    wordlist = set().union(*lemmas.values())
    freq = usage_counts(args.wordnet)

    nouns = set()
    for w in lemmas["noun"]:
        if len(w) < 2:
            continue
        f = freq.get(w, {})
        other = sum(v for p, v in f.items() if p != "noun")
        if f.get("noun", 0) >= other:
            nouns.add(w)

    exc = exceptions(args.wordnet, wordlist)

    # Nouns like "gas" or "news" would otherwise lose their final s.
    for w in sorted(lemmas["noun"]):
        if w in exc:
            continue
        stem = rules(w, wordlist)
        if stem != w and freq.get(w, {}).get("noun", 0) > freq.get(stem, {}).get("noun", 0):
            exc[w] = w

    # Close the table so lemmatize(lemmatize(t)) == lemmatize(t) on every known word.
    changed = True
    while changed:
        changed = False
        for w in sorted(wordlist | set(exc) | set(exc.values())):
            once = lemmatize(w, exc, wordlist)
            if lemmatize(once, exc, wordlist) != once:
                exc[once] = once
                changed = True

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "nouns.txt").write_text("\n".join(sorted(nouns)) + "\n", encoding="utf-8")
    (out / "wordlist.txt").write_text("\n".join(sorted(wordlist)) + "\n", encoding="utf-8")
    stop = sorted({w.strip().lower() for w in open(args.stopwords, encoding="utf-8") if w.strip()})
    (out / "stopwords.txt").write_text("\n".join(stop) + "\n", encoding="utf-8")
    (out / "custom_stopwords.txt").write_text("\n".join(sorted(set(CUSTOM_STOPWORDS))) + "\n", encoding="utf-8")
    (out / "lemma_exceptions.tsv").write_text(
        "".join(f"{k}\t{v}\n" for k, v in sorted(exc.items())), encoding="utf-8"
    )

    rows = []
    for line in open(args.vader, encoding="utf-8").read().split("\n"):
        line = line.strip()
        if not line:
            continue
        token, valence = line.split("\t")[0:2]
        rows.append(f"{token}\t{valence}")
    (out / "vader_lexicon.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    print(f"nouns={len(nouns)} wordlist={len(wordlist)} exceptions={len(exc)} stop={len(stop)} vader={len(rows)}")


if __name__ == "__main__":
    main()
