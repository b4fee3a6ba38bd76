import random
from pathlib import Path

import pytest

from dravmix.corpus import Corpus, Label, Language, Provenance, Sample

# romanized sentiment vocabulary shared by the toy corpora
POSITIVE = ["super", "semma", "nalla", "mass", "chennagide", "kidilam", "arumai", "best"]
NEGATIVE = ["waste", "mosam", "kevala", "bore", "flop", "worst", "kashta", "mokka"]
NEUTRAL = ["movie", "trailer", "padam", "cinema", "song", "hero", "release", "teaser"]
NATIVE = {
    Language.KANNADA: ["ಚೆನ್ನಾಗಿದೆ", "ಸಿನಿಮಾ", "ಹಾಡು"],
    Language.TAMIL: ["அருமை", "படம்", "பாடல்"],
    Language.MALAYALAM: ["കിടിലം", "പടം", "പാട്ട്"],
}


def make_samples(language, n, seed=0, provenance=Provenance.ORIGINAL):
    rng = random.Random(seed)
    out = []
    for i in range(n):
        label = [Label.POSITIVE, Label.NEGATIVE, Label.MIXED_FEELINGS,
                 Label.UNKNOWN_STATE, Label.NOT_LANGUAGE][rng.choice([0, 0, 0, 1, 1, 2, 3, 4])]
        words = rng.sample(NEUTRAL, 2)
        if label is Label.POSITIVE:
            words += rng.sample(POSITIVE, 2)
        elif label is Label.NEGATIVE:
            words += rng.sample(NEGATIVE, 2)
        elif label is Label.MIXED_FEELINGS:
            words += [rng.choice(POSITIVE), rng.choice(NEGATIVE)]
        elif label is Label.NOT_LANGUAGE:
            words = ["hello", "bro", "nice", "video"]
        if rng.random() < 0.3:
            words.append(rng.choice(NATIVE[language]))
        if rng.random() < 0.1:
            words.append("(trailer)")
        rng.shuffle(words)
        out.append(Sample(i, " ".join(words), label, language, provenance))
    return out


def make_corpus(language=Language.TAMIL, n=40, seed=0, provenance=Provenance.ORIGINAL):
    return Corpus(make_samples(language, n, seed, provenance), language)


def write_corpus_tsv(path, language, n, seed):
    from dravmix.corpus import write_tsv
    write_tsv(make_corpus(language, n, seed), path, provenance=False)
    return path


def write_toy_grid(tmp_path: Path, languages=tuple(Language), n_train=60, n_test=30,
                   translator=None, seed=7):
    """Write train/dev/test TSVs per language and a grid config; return the config path."""
    import yaml

    data = tmp_path / "data"
    data.mkdir(parents=True, exist_ok=True)
    dictionary = data / "dict.tsv"
    dictionary.write_text("super\tgreat\nwaste\tuseless\npadam\tmovie\n", encoding="utf-8")
    langs = {}
    for i, lang in enumerate(languages):
        stem = lang.value.lower()
        langs[stem] = {
            "train": str(write_corpus_tsv(data / f"{stem}_train.tsv", lang, n_train, 100 + i)),
            "dev": str(write_corpus_tsv(data / f"{stem}_dev.tsv", lang, n_test, 200 + i)),
            "test": str(write_corpus_tsv(data / f"{stem}_test.tsv", lang, n_test, 300 + i)),
        }
    cfg = {
        "seed": seed,
        "output_dir": str(tmp_path / "run"),
        "languages": langs,
        "translator": translator or {"kind": "dictionary", "dictionary": str(dictionary)},
        "features": {"n_features": 1024, "ngram_range": [1, 3]},
        "mlp": {"epochs": 5, "batch_size": 8, "lr": 0.05, "proj_dim": 16, "hidden_dim": 16},
    }
    path = tmp_path / "grid.yaml"
    path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
    return path


@pytest.fixture
def toy_grid(tmp_path):
    return write_toy_grid(tmp_path)
