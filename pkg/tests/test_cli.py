import io
import json
import sys

import pytest

from dravmix.cli import main
from dravmix.corpus import Language, Provenance, read_tsv
from conftest import write_corpus_tsv, write_toy_grid


@pytest.fixture
def tamil_tsv(tmp_path):
    return write_corpus_tsv(tmp_path / "train.tsv", Language.TAMIL, 40, 1)


def test_ingest_prints_counts(tamil_tsv, tmp_path, capsys):
    out = tmp_path / "clean.tsv"
    assert main(["ingest", str(tamil_tsv), "--lang", "ta", "--preprocess", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["language"] == "Tamil"
    assert "not-Tamil" in summary["per_class"]
    assert summary["per_class"]["not-Tamil"] == 0
    assert summary["total"] == len(read_tsv(out, "ta"))


def test_ingest_reports_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("ok text\tPositive\nbroken line\n", encoding="utf-8")
    assert main(["ingest", str(bad), "--lang", "Tamil"]) == 1
    assert "line 2" in capsys.readouterr().err


def test_script_tag_reads_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO("super ಚೆನ್ನಾಗಿದೆ 2021 !!\n"))
    assert main(["script-tag"]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "super\tLatin", "ಚೆನ್ನಾಗಿದೆ\tKannadaScript", "2021\tDigit", "!!\tPunct"]


def test_translit_translate_and_variants(tamil_tsv, tmp_path, capsys):
    tl = tmp_path / "tl.tsv"
    tr = tmp_path / "tr.tsv"
    d = tmp_path / "dict.tsv"
    d.write_text("super\tgreat\n", encoding="utf-8")
    assert main(["translit", str(tamil_tsv), "--lang", "ta", "-o", str(tl)]) == 0
    translit = read_tsv(tl, "ta")
    assert all(s.provenance is Provenance.TRANSLITERATED for s in translit.samples)
    assert main(["translate", str(tl), "--lang", "ta", "--kind", "dictionary",
                 "--dictionary", str(d), "--cache", str(tmp_path / "cache.tsv"), "-o", str(tr)]) == 0
    assert (tmp_path / "cache.tsv").exists()
    capsys.readouterr()
    out = tmp_path / "variants"
    assert main(["build-variants", "--lang", "ta", "--base", str(tamil_tsv), "--translit", str(tl),
                 "--translated", str(tr), "--out", str(out)]) == 0
    sizes = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    s = len(translit)
    assert sizes == {"TRA": "40", "TRAI": str(40 + s), "TRAA": str(40 + s), "MERGED": str(40 + 2 * s)}


@pytest.mark.parametrize("model", ["nb", "mlp"])
def test_train_and_evaluate(tamil_tsv, tmp_path, capsys, model):
    path = tmp_path / f"{model}.npz"
    args = ["train", "--lang", "ta", "--model", model, "--data", str(tamil_tsv), "-o", str(path)]
    if model == "mlp":
        args += ["--epochs", "2", "--seed", "3", "--lr", "0.01", "--stlr-ratio", "16",
                 "--cut-frac", "0.2", "--decay", "2.6"]
    assert main(args) == 0
    assert main(["evaluate", "--lang", "ta", "--model", str(path), str(tamil_tsv)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1].startswith("weighted")
    assert any(line.startswith("not-Tamil") for line in lines)


def test_grid_and_report(tmp_path, capsys):
    cfg = write_toy_grid(tmp_path, [Language.KANNADA])
    assert main(["grid", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path / "g")]) == 0
    table = capsys.readouterr().out
    assert "Kannada" in table and "MLP (STLR)" in table
    assert main(["report", str(tmp_path / "g" / "metrics.csv")]) == 0
    assert capsys.readouterr().out == table


def test_missing_config_is_an_error(tmp_path, capsys):
    assert main(["grid", "--config", str(tmp_path / "none.yaml")]) == 1
    assert "cannot read config" in capsys.readouterr().err
