#!/usr/bin/env python3
"""Regenerates fixtures/corpus: a deterministic three-topic text collection.

Each document lives at corpus/siteNN/<topic>-NNN.txt; the first line is the
title. The topic label is the file name prefix. Topics share part of their
vocabulary so that keyword queries also reach off-topic documents.
"""

import random
import shutil
from pathlib import Path

SEED = 20240501
SITES = 12
COUNTS = {"solar": 70, "astro": 65, "bio": 65}

SHARED = ["solar", "panel", "cell", "battery", "grid", "energy", "module", "power", "light"]

TOPIC = {
    "solar": [
        "photovoltaic", "inverter", "roof", "silicon", "installer", "kilowatt",
        "wiring", "array", "mounting", "meter", "tariff", "efficiency", "rooftop",
        "charge", "controller", "shading", "warranty", "household", "electricity",
        "output", "string", "racking",
    ],
    "astro": [
        "sun", "star", "planet", "orbit", "telescope", "galaxy", "comet", "eclipse",
        "flare", "corona", "magnetic", "observatory", "nebula", "spectrum",
        "radiation", "wind", "plasma", "asteroid", "moon", "gravity", "sunspot",
        "astronomer",
    ],
    "bio": [
        "membrane", "protein", "tissue", "enzyme", "gene", "mitochondria",
        "organism", "microscope", "sample", "metabolism", "receptor", "signal",
        "culture", "nucleus", "division", "stem", "antibody", "assay", "laboratory",
        "molecule", "chromosome", "growth",
    ],
}

# Each shared word leans towards one topic; the keyword pool mixes words
# specific to the on-topic documents with such ambiguous ones.
SHARED_WEIGHT = {"solar": 0.30, "astro": 0.25, "bio": 0.25}
SHARED_BIAS = {
    "solar": SHARED,
    "astro": ["solar", "solar", "solar", "energy", "light", "light", "grid", "power"],
    "bio": ["cell", "cell", "cell", "battery", "battery", "module", "module", "panel", "energy"],
}

FILLER = [
    "the", "a", "of", "and", "in", "for", "with", "on", "is", "are", "this",
    "that", "new", "report", "study", "system", "design", "research", "data",
    "results", "large", "small", "high", "low", "year", "use", "team", "local",
]


def word(rng, topic):
    roll = rng.random()
    if roll < SHARED_WEIGHT[topic]:
        return rng.choice(SHARED_BIAS[topic])
    if roll < 0.72:
        return rng.choice(TOPIC[topic])
    return rng.choice(FILLER)


def sentence(rng, topic):
    words = [word(rng, topic) for _ in range(rng.randint(6, 11))]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def document(rng, topic):
    title_words = [rng.choice(TOPIC[topic]) for _ in range(2)]
    if rng.random() < 0.5:
        title_words.insert(rng.randint(0, 2), rng.choice(SHARED_BIAS[topic]))
    title = " ".join(title_words).title()
    body = " ".join(sentence(rng, topic) for _ in range(rng.randint(4, 8)))
    return f"{title}\n{body}\n"


def main():
    rng = random.Random(SEED)
    root = Path(__file__).resolve().parent / "corpus"
    if root.exists():
        shutil.rmtree(root)
    for topic, count in COUNTS.items():
        for n in range(1, count + 1):
            site = root / f"site{rng.randint(1, SITES):02d}"
            site.mkdir(parents=True, exist_ok=True)
            (site / f"{topic}-{n:03d}.txt").write_text(document(rng, topic), encoding="utf-8")


if __name__ == "__main__":
    main()
