#!/usr/bin/env python3
"""Regenerate the default roman->native rule tables under src/dravmix/translit/data.

Kannada, Tamil and Malayalam share the ISCII-derived block layout, so one set
of offsets serves all three; each language just picks which consonants a
roman grapheme may stand for. Run from the repository root.
"""
import unicodedata
from pathlib import Path

BASES = {"kannada": 0x0C80, "tamil": 0x0B80, "malayalam": 0x0D00}

# block offsets
VOWELS = {  # roman: (independent, sign or None)
    "a": (0x05, None), "aa": (0x06, 0x3E), "i": (0x07, 0x3F), "ii": (0x08, 0x40),
    "u": (0x09, 0x41), "uu": (0x0A, 0x42), "e": (0x0E, 0x46), "ai": (0x10, 0x48),
    "o": (0x12, 0x4A), "au": (0x14, 0x4C), "ou": (0x14, 0x4C),
}
# ambiguous vowels: first listed is the default
AMBIGUOUS_VOWELS = {
    "ee": [(0x08, 0x40), (0x0F, 0x47)],   # long i / long e
    "oo": [(0x0A, 0x42), (0x13, 0x4B)],   # long u / long o
}
VIRAMA = 0x4D

KA, KHA, GA, GHA, NGA, CA, CHA, JA, JHA, NYA = range(0x15, 0x1F)
TTA, TTHA, DDA, DDHA, NNA, TA, THA, DA, DHA, NA, NNNA = range(0x1F, 0x2A)
PA, PHA, BA, BHA, MA, YA, RA, RRA, LA, LLA, LLLA, VA, SHA, SSA, SA, HA = range(0x2A, 0x3A)

# roman consonant -> list of consonant clusters (tuples of offsets)
DRAVIDIAN_COMMON = {
    "k": [(KA,)], "kh": [(KHA,)], "g": [(GA,)], "gh": [(GHA,)],
    "ch": [(CA,)], "chh": [(CHA,)], "c": [(KA,)], "j": [(JA,)], "jh": [(JHA,)],
    "t": [(TTA,), (TA,)], "th": [(TA,), (THA,)], "d": [(DDA,), (DA,)],
    "dh": [(DHA,), (DDHA,)], "n": [(NA,), (NNA,)], "p": [(PA,)], "ph": [(PHA,)],
    "f": [(PHA,)], "b": [(BA,)], "bh": [(BHA,)], "m": [(MA,)], "y": [(YA,)],
    "r": [(RA,)], "l": [(LA,), (LLA,)], "v": [(VA,)], "w": [(VA,)],
    "sh": [(SHA,), (SSA,)], "s": [(SA,)], "h": [(HA,)], "z": [(JA,)],
    "q": [(KA,)], "x": [(KA, VIRAMA, SA)], "zh": [(LLA,)],
}

CONSONANTS = {
    "kannada": DRAVIDIAN_COMMON,
    "malayalam": {**DRAVIDIAN_COMMON, "zh": [(LLLA,)], "r": [(RA,), (RRA,)], "ng": [(NGA,)],
                  "nj": [(NYA,)]},
    "tamil": {
        "k": [(KA,)], "g": [(KA,)], "kh": [(KA,)], "gh": [(KA,)], "c": [(KA,)], "q": [(KA,)],
        "ng": [(NGA,)], "ch": [(CA,)], "chh": [(CA,)], "s": [(CA,), (SA,)], "j": [(JA,)],
        "jh": [(JA,)], "nj": [(NYA,)], "t": [(TTA,), (TA,)], "d": [(TTA,), (TA,)],
        "th": [(TA,)], "dh": [(TA,)], "n": [(NNNA,), (NA,), (NNA,)], "p": [(PA,)],
        "b": [(PA,)], "bh": [(PA,)], "ph": [(PA,)], "f": [(PA,)], "m": [(MA,)],
        "y": [(YA,)], "r": [(RA,), (RRA,)], "l": [(LA,), (LLA,)], "zh": [(LLLA,)],
        "v": [(VA,)], "w": [(VA,)], "sh": [(SSA,)], "h": [(HA,)], "z": [(JA,)],
        "x": [(KA, VIRAMA, SSA)],
    },
}


def render(base, offsets):
    out = "".join(chr(base + o) for o in offsets)
    for ch in out:
        name = unicodedata.name(ch, "")
        assert name, f"unassigned code point U+{ord(ch):04X}"
    return out


def table(language):
    base = BASES[language]
    rows = []

    def add(roman, natives):
        group = roman if len(natives) > 1 else ""
        for native in dict.fromkeys(natives):
            rows.append((roman, native, group))

    for roman, (ind, _) in VOWELS.items():
        add(roman, [render(base, (ind,))])
    for roman, alts in AMBIGUOUS_VOWELS.items():
        add(roman, [render(base, (ind,)) for ind, _ in alts])
    for croman, clusters in CONSONANTS[language].items():
        add(croman, [render(base, c + (VIRAMA,)) for c in clusters])
        for vroman, (_, sign) in VOWELS.items():
            add(croman + vroman,
                [render(base, c + ((sign,) if sign else ())) for c in clusters])
        for vroman, alts in AMBIGUOUS_VOWELS.items():
            add(croman + vroman,
                [render(base, c + (sign,)) for _, sign in alts for c in clusters])
    return rows


def main():
    out_dir = Path("src/dravmix/translit/data")
    out_dir.mkdir(parents=True, exist_ok=True)
    for language in BASES:
        rows = table(language)
        lines = [f"# default {language} rule table: roman<TAB>native[<TAB>group]",
                 "# generated by tools/make_rule_tables.py; order is significant"]
        lines += ["\t".join(r).rstrip("\t") for r in rows]
        (out_dir / f"{language}.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(language, len(rows))


if __name__ == "__main__":
    main()
