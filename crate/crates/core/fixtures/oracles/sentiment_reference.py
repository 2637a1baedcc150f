#!/usr/bin/env python3
"""Score the comment set with NLTK's SentimentIntensityAnalyzer over the bundled lexicon.

Writes fixtures/sentiment/reference_scores.json. Run from crates/core/.
"""
import json
from pathlib import Path

from nltk.sentiment.vader import SentimentIntensityAnalyzer, VaderConstants

ROOT = Path(__file__).resolve().parents[2]
LEXICON = ROOT / "data" / "lexicon" / "vader_lexicon.tsv"

COMMENTS = [
    "Water dragon!",
    "It looks like a very angry watermelon",
    "This is absolutely stunning, great shot!",
    "I don't like this at all.",
    "Not bad, not bad at all",
    "The colors are nice but the composition is terrible",
    "WOW this is AMAZING",
    "Mosquitos?",
    "Money Money Money",
    "great pic, lol",
    "Honestly the saddest thing I've seen today :(",
    "Beautiful!!!",
    "This made me smile :)",
    "I hate how much I love this",
    "kind of creepy tbh",
    "Never so happy to see a dog",
    "That is the shit",
    "Yeah right, like that ever happens",
    "It's not the worst, but it's not good either",
    "Absolutely horrible lighting",
    "Looks fake",
    "What a lovely little cabin, I would live there forever",
    "This is the least interesting picture on the front page",
    "At least it's not raining",
    "Is this real??",
    "No way this is real???",
    "Why would anyone do this????",
    "RIP to whoever has to clean that up",
    "That sunset is gorgeous, thanks for sharing",
    "My grandmother had the exact same lamp",
    "Terrifying. Absolutely terrifying.",
    "This is so wholesome, I'm crying",
    "I'm not sure how I feel about this",
    "The dog looks so happy!",
    "Reminds me of my childhood",
    "Crown land camping is the best",
    "Where is this? I need to visit",
    "This is kinda sorta cool",
    "sort of disappointing honestly",
    "Nothing good ever comes from this",
    "Without a doubt the best post today",
    "I barely noticed the cat at first",
    "The cat is extremely FAT and I love him",
    "Worst. Idea. Ever.",
    "He didn't even flinch, what a legend",
    "Ugh, not this again",
    "Such a peaceful place",
    "lol that's hilarious",
    "I can't stop laughing",
    "the the the",
]

# Inputs aimed at individual rules rather than realistic comments.
EDGE_CASES = [
    "",
    " ",
    "!!!",
    "a",
    ":) :( :D",
    "GREAT great GREAT",
    "GREAT",
    "this is VERY good",
    "VERY good",
    "it is not very good",
    "never so good",
    "never this good",
    "this so good",
    "not at all good, but not at all bad",
    "at least it is good",
    "very least good",
    "least good",
    "the least good",
    "he cut the mustard",
    "the kiss of death indeed",
    "living hand to mouth",
    "bad ass car",
    "it is the bomb",
    "kind of good",
    "sort of bad",
    "good good good good",
    "good, good. good! good?",
    "good!!!!!!",
    "bad??",
    "bad???",
    "bad????",
    "good?!?",
    "ain't good",
    "wasnt bad",
    "no-one is happy",
    "café naïve résumé good",
    "ΚΑΛΟ good",
    "ǅ good",
    "ﬁne good",
    "good\u00a0bad\u2003ok",
    "good\x1cbad",
    "but",
    "BUT it is bad but good",
    "good but",
    "Hello, World! Hello!",
    "'good' \"bad\"",
    "(good) [bad]",
    "good... bad...",
    "I love love love it",
    "1 2 3 good 4",
    "#good @bad",
    "NOT BAD",
    "Not BAD at all",
    "hardly good",
    "KINDA good",
    "extremely BAD and normal",
    "barely noticed",
    "kind of",
    "Never  ever   good",
]


def analyzer():
    sia = SentimentIntensityAnalyzer.__new__(SentimentIntensityAnalyzer)
    sia.lexicon_file = LEXICON.read_text(encoding="utf-8").rstrip("\n")
    sia.lexicon = sia.make_lex_dict()
    sia.constants = VaderConstants()
    return sia


def main():
    assert len(COMMENTS) == 50
    sia = analyzer()
    cases = [{"text": t, **sia.polarity_scores(t)} for t in COMMENTS]
    out = ROOT / "fixtures" / "sentiment" / "reference_scores.json"
    out.write_text(json.dumps({"analyzer": "nltk.sentiment.vader", "cases": cases}, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {len(cases)} cases to {out}")
    edge = [{"text": t, **sia.polarity_scores(t)} for t in EDGE_CASES]
    out = ROOT / "fixtures" / "sentiment" / "edge_cases.json"
    out.write_text(json.dumps({"analyzer": "nltk.sentiment.vader", "cases": edge}, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {len(edge)} cases to {out}")


if __name__ == "__main__":
    main()
