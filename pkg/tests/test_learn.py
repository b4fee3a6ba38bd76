import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from dravmix.corpus import Corpus, Label, Language, Sample
from dravmix.errors import ContractError
from dravmix.learn import (GROUPS, FeatureSpace, HashedNgramVectorizer, MLPClassifier,
                           NaiveBayesClassifier, STLRParams, TrainConfig, UnfreezeSchedule,
                           cross_entropy, discriminative_lrs, feature_index, featurize,
                           featurize_many, init_params, load_model, loss_and_grads, ngram_counts,
                           predict, save_model, stlr_lr, stlr_schedule, text_pipeline, train_mlp,
                           train_nb)
from oracles import (finite_difference_grads, nb_log_posteriors, relative_error,
                     separable_corpus)

SMALL = FeatureSpace(n_features=1024, ngram_range=(1, 3))


def corpus_of(texts, labels, lang=Language.TAMIL):
    return Corpus([Sample(i, t, Label(y), lang) for i, (t, y) in enumerate(zip(texts, labels))], lang)


# ---------------------------------------------------------------- features

def test_featurize_empty():
    assert len(featurize("", FeatureSpace())) == 0
    assert len(featurize("   \t", FeatureSpace())) == 0


def test_ab_char_ngrams_by_hand():
    space = FeatureSpace(ngram_range=(1, 2), word_unigrams=False)
    # "<ab>": unigrams a, b (pads alone are skipped); bigrams <a, ab, b>
    assert ngram_counts("ab", space) == {"c:a": 1, "c:b": 1, "c:ab": 1, "c:<a": 1, "c:b>": 1}
    names = ["c:a", "c:b", "c:ab", "c:<a", "c:b>"]
    idx = [feature_index(n, space.n_features) for n in names]
    assert len(set(idx)) == 5  # no collisions at the default dimension
    v = featurize("ab", space)
    assert v.to_dict() == {i: 1.0 for i in idx}
    assert featurize("ab", space) == v


def test_word_unigrams_and_lowercase():
    space = FeatureSpace(ngram_range=(1, 1))
    counts = ngram_counts("Nalla nalla", space)
    assert counts["w:nalla"] == 2
    assert counts["c:n"] == 2
    assert ngram_counts("Nalla", FeatureSpace(lowercase=False))["w:Nalla"] == 1


def test_max_tokens_truncates():
    space = FeatureSpace(max_tokens=2)
    assert ngram_counts("a b c", space) == ngram_counts("a b", space)


def test_feature_space_validation():
    for bad in [dict(ngram_range=(0, 2)), dict(ngram_range=(3, 2)), dict(ngram_range=(1, 7)),
                dict(n_features=512), dict(n_features=3000)]:
        with pytest.raises(ContractError):
            FeatureSpace(**bad)
    space = FeatureSpace(ngram_range=(2, 5), n_features=2 ** 12)
    assert FeatureSpace.from_dict(space.to_dict()) == space


@given(st.text(max_size=40))
def test_featurize_matches_counts(text):
    v = featurize(text, SMALL)
    assert v.values.sum() == sum(ngram_counts(text, SMALL).values())
    assert np.all(np.diff(v.indices) > 0)
    assert np.all((v.indices >= 0) & (v.indices < SMALL.n_features))


def test_featurize_many_rows_and_vectorizer():
    X = featurize_many(["nalla padam", "", "waste"], SMALL)
    assert X.shape == (3, 1024)
    assert X[1].nnz == 0
    vec = HashedNgramVectorizer.from_space(SMALL)
    assert vec.space == SMALL
    assert (vec.fit().transform(["waste"]) != X[2]).nnz == 0


# ---------------------------------------------------------------- naive Bayes

def one_hot_docs(docs, vocab):
    rows = [[d.count(w) for w in range(vocab)] for d in docs]
    return sp.csr_matrix(np.array(rows, dtype=float))


@pytest.mark.parametrize("alpha", [1.0, 0.5])
def test_nb_matches_posterior_oracle(alpha):
    docs = [[0], [0, 1], [2], [1, 1, 2]]
    labels = [0, 0, 1, 2]
    model = NaiveBayesClassifier(alpha=alpha).fit(one_hot_docs(docs, 3), labels)
    for query in ([0], [1], [2], [0, 2], []):
        got = model.predict_log_proba(one_hot_docs([query], 3))[0]
        assert got.tolist() == nb_log_posteriors(docs, labels, query, 3, alpha)


def test_nb_toy_by_hand():
    # 4 one-word docs: Positive {a, a}, Negative {a, b}; vocab {a, b}, alpha 1
    model = NaiveBayesClassifier().fit(one_hot_docs([[0], [0], [0], [1]], 2), [0, 0, 1, 1])
    post = model.predict_proba(one_hot_docs([[0]], 2))[0]
    # P(a|Pos) = 3/4, P(a|Neg) = 2/4, equal priors
    assert post[0] == pytest.approx(0.6, abs=1e-12)
    assert post[1] == pytest.approx(0.4, abs=1e-12)
    assert post[2:].tolist() == [0.0, 0.0, 0.0]


def test_nb_single_class_always_predicted():
    texts = ["nalla padam", "semma mass"]
    model = train_nb(corpus_of(texts, [1, 1]), SMALL)
    for text in ["", "waste bore", "anything at all"]:
        label, scores = predict(model, text, SMALL)
        assert label is Label.NEGATIVE
        assert len(scores) == 5


def test_nb_doubling_documents():
    docs, labels = [[0], [1], [1], [2]], [0, 0, 1, 1]
    once = NaiveBayesClassifier().fit(one_hot_docs(docs, 3), labels)
    twice = NaiveBayesClassifier().fit(one_hot_docs(docs * 2, 3), labels * 2)
    # priors are count ratios and do not move; smoothed likelihoods sharpen
    np.testing.assert_array_equal(once.class_log_prior_, twice.class_log_prior_)
    Q = one_hot_docs([[0], [1], [2], []], 3)
    np.testing.assert_array_equal(once.predict(Q), twice.predict(Q))
    for q in ([0], [1], [2]):
        assert (twice.predict_log_proba(one_hot_docs([q], 3))[0].tolist()
                == nb_log_posteriors(docs * 2, labels * 2, q, 3))


def test_nb_uniform_model_breaks_ties_by_label_order():
    model = train_nb(corpus_of(["padam"] * 5, [0, 1, 2, 3, 4]), SMALL)
    for text in ["padam", "waste", ""]:
        label, scores = predict(model, text, SMALL)
        assert label is Label.POSITIVE
        assert np.all(scores == scores[0])


def test_nb_separable_training_docs():
    texts, labels = separable_corpus(40)
    model = train_nb(corpus_of(texts, labels), SMALL)
    assert all(predict(model, t, SMALL)[0] == Label(y) for t, y in zip(texts, labels))


def test_nb_errors():
    with pytest.raises(ContractError):
        train_nb(Corpus([], Language.TAMIL), SMALL)
    model = train_nb(corpus_of(["a"], [0]), SMALL)
    with pytest.raises(ContractError):
        predict(model, "a", FeatureSpace())
    with pytest.raises(ContractError):
        NaiveBayesClassifier(alpha=0).fit(one_hot_docs([[0]], 1), [0])
    with pytest.raises(ContractError):
        NaiveBayesClassifier().fit(one_hot_docs([[0]], 1), [7])


# ---------------------------------------------------------------- schedules

def test_stlr_examples():
    p = STLRParams(lr_max=0.01, ratio=32, cut_frac=0.1, total_steps=100)
    assert p.cut == 10
    assert stlr_lr(10, p) == 0.01
    assert stlr_lr(0, p) == pytest.approx(0.01 / 32, abs=1e-15)
    assert stlr_lr(100, p) == pytest.approx(0.01 / 32, abs=1e-15)
    assert stlr_lr(5, p) == pytest.approx(0.01 * (1 + 0.5 * 31) / 32, rel=1e-15)
    with pytest.raises(ContractError):
        stlr_lr(101, p)
    with pytest.raises(ContractError):
        stlr_lr(-1, p)


def test_stlr_cut_is_clamped_inside():
    assert STLRParams(1.0, total_steps=2, cut_frac=0.1).cut == 1
    assert STLRParams(1.0, total_steps=10, cut_frac=0.99).cut == 9
    sched = stlr_schedule(STLRParams(1.0, ratio=4, total_steps=2))
    assert sched == [0.25, 1.0, 0.25]


@pytest.mark.parametrize("bad", [dict(lr_max=0), dict(ratio=1), dict(cut_frac=0), dict(cut_frac=1),
                                 dict(total_steps=1)])
def test_stlr_param_validation(bad):
    with pytest.raises(ContractError):
        STLRParams(**{"lr_max": 1e-3, **bad})


@settings(max_examples=100)
@given(st.floats(1e-6, 1.0), st.floats(1.5, 100), st.floats(0.01, 0.99), st.integers(2, 3000))
def test_stlr_shape(lr_max, ratio, cut_frac, T):
    p = STLRParams(lr_max, ratio, cut_frac, T)
    s = stlr_schedule(p)
    c = p.cut
    assert s[c] == lr_max == max(s)
    assert all(a < b for a, b in zip(s[:c], s[1:c + 1]))
    assert all(a > b for a, b in zip(s[c:], s[c + 1:]))
    assert abs(s[0] - lr_max / ratio) <= 1e-15 and abs(s[-1] - lr_max / ratio) <= 1e-15


def test_discriminative_lrs():
    assert discriminative_lrs(1e-2, 1) == [1e-2]
    got = discriminative_lrs(2.6e-3, 3, 2.6)
    assert got == pytest.approx([3.846e-4, 1e-3, 2.6e-3], rel=1e-3)
    assert got[-1] == 2.6e-3
    assert all(0 < a < b for a, b in zip(got, got[1:]))
    with pytest.raises(ContractError):
        discriminative_lrs(1e-3, 0)
    with pytest.raises(ContractError):
        discriminative_lrs(1e-3, 3, decay=1.0)


def test_gradual_unfreeze_plans():
    assert UnfreezeSchedule.gradual(5).to_dict() == {
        "1": [2], "2": [1, 2], "3": [0, 1, 2], "4": [0, 1, 2], "5": [0, 1, 2]}
    assert UnfreezeSchedule.gradual(2).to_dict() == {"1": [1, 2], "2": [0, 1, 2]}
    assert UnfreezeSchedule.gradual(1).to_dict() == {"1": [0, 1, 2]}
    assert UnfreezeSchedule.full(2).to_dict() == {"1": [0, 1, 2], "2": [0, 1, 2]}


@pytest.mark.parametrize("plan", [
    {},
    {1: [2], 3: [0, 1, 2]},
    {1: [1, 2], 2: [2], 3: [0, 1, 2]},
    {1: [2], 2: [1, 2]},
    {1: [0, 1, 2, 3]},
])
def test_unfreeze_validation(plan):
    with pytest.raises(ContractError):
        UnfreezeSchedule(plan)


# ---------------------------------------------------------------- MLP math

def test_loss_at_uniform_logits_is_ln5():
    loss, grad = cross_entropy(np.zeros((4, 5)), np.array([0, 1, 2, 4]))
    assert loss == pytest.approx(math.log(5), abs=1e-15)
    assert grad.sum() == pytest.approx(0.0, abs=1e-15)


@given(st.lists(st.floats(-30, 30), min_size=5, max_size=5), st.integers(0, 4))
def test_cross_entropy_non_negative(logits, y):
    loss, _ = cross_entropy(np.array([logits]), np.array([y]))
    assert loss >= 0.0


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("with_mask", [False, True])
def test_gradients_match_finite_differences(seed, with_mask):
    rng = np.random.default_rng(seed)
    params = init_params(7, 4, 6, 5, rng)
    for k in ("b0", "b1", "b2"):
        params[k] = rng.normal(0, 0.5, size=params[k].shape)
    X = rng.random((3, 7))
    y = rng.integers(0, 5, size=3)
    mask = (rng.random((3, 6)) < 0.6) / 0.6 if with_mask else None
    _, analytic = loss_and_grads(params, X, y, mask)
    numeric = finite_difference_grads(lambda p: loss_and_grads(p, X, y, mask, groups=())[0], params)
    for name in params:
        assert relative_error(analytic[name], numeric[name]) < 1e-4, name


def test_gradients_only_for_requested_groups():
    rng = np.random.default_rng(0)
    params = init_params(5, 3, 3, 5, rng)
    _, grads = loss_and_grads(params, rng.random((2, 5)), np.array([0, 1]), groups=[2])
    assert set(grads) == {"W2", "b2"}


# ---------------------------------------------------------------- MLP training

def snapshot(model):
    return {k: v.copy() for k, v in model.params_.items()}


def test_freeze_contract_every_epoch():
    texts, labels = separable_corpus(60)
    X = featurize_many(texts, SMALL)
    plan = UnfreezeSchedule({1: [2], 2: [1, 2], 3: [0, 1, 2]})
    model = MLPClassifier(epochs=3, unfreeze=plan, proj_dim=8, hidden_dim=8, random_state=4)
    seen = {}
    model.fit(X, labels, callback=lambda e, m: seen.__setitem__(e, snapshot(m)))
    for epoch in (1, 2, 3):
        for g, names in GROUPS.items():
            for name in names:
                same = np.array_equal(seen[epoch][name], seen[epoch - 1][name])
                assert same == (g not in plan[epoch]), (epoch, name)


def test_mlp_learns_separable_corpus():
    texts, labels = separable_corpus(200)
    model = train_mlp(corpus_of(texts, labels), SMALL, TrainConfig(epochs=5, lr=1e-2), seed=0)
    assert model.score(featurize_many(texts, SMALL), labels) >= 0.95
    assert len(model.lr_history_) == 5 * math.ceil(200 / 32)
    assert model.loss_curve_[-1] < model.loss_curve_[0]


def test_mlp_lr_history_follows_schedules():
    texts, labels = separable_corpus(64)
    model = MLPClassifier(epochs=2, batch_size=16, lr=0.02, decay=2.0, proj_dim=4,
                          hidden_dim=4).fit(featurize_many(texts, SMALL), labels)
    assert model.stlr_.total_steps == 8
    for t, lrs in enumerate(model.lr_history_):
        assert lrs == discriminative_lrs(stlr_lr(t, model.stlr_), 3, 2.0)


def test_mlp_deterministic_and_seed_sensitive():
    texts, labels = separable_corpus(50)
    X = featurize_many(texts, SMALL)
    a = MLPClassifier(epochs=2, random_state=1).fit(X, labels)
    b = MLPClassifier(epochs=2, random_state=1).fit(X, labels)
    c = MLPClassifier(epochs=2, random_state=2).fit(X, labels)
    for k in a.params_:
        np.testing.assert_array_equal(a.params_[k], b.params_[k])
    assert not np.array_equal(a.params_["W2"], c.params_["W2"])


def test_mlp_dropout_only_while_training():
    texts, labels = separable_corpus(20)
    X = featurize_many(texts, SMALL)
    model = MLPClassifier(epochs=1, dropout=0.9).fit(X, labels)
    np.testing.assert_array_equal(model.decision_function(X), model.decision_function(X))


def test_weight_decay_changes_result():
    texts, labels = separable_corpus(40)
    X = featurize_many(texts, SMALL)
    plain = MLPClassifier(epochs=2).fit(X, labels)
    decayed = MLPClassifier(epochs=2, weight_decay=0.1).fit(X, labels)
    assert np.abs(decayed.params_["W2"]).sum() < np.abs(plain.params_["W2"]).sum()


def test_mlp_errors():
    texts, labels = separable_corpus(10)
    X = featurize_many(texts, SMALL)
    with pytest.raises(ContractError):
        MLPClassifier(epochs=3, unfreeze=UnfreezeSchedule.gradual(2)).fit(X, labels)
    with pytest.raises(ContractError):
        MLPClassifier(unfreeze="sideways").fit(X, labels)
    with pytest.raises(ContractError):
        MLPClassifier(dropout=1.0).fit(X, labels)
    with pytest.raises(ContractError):
        train_mlp(corpus_of(texts, labels), SMALL, TrainConfig(max_len=64))
    with pytest.raises(ContractError):
        TrainConfig(epochs=0)


def test_mlp_scores_are_logits():
    texts, labels = separable_corpus(20)
    model = train_mlp(corpus_of(texts, labels), SMALL, TrainConfig(epochs=1, lr=1e-2))
    label, scores = predict(model, texts[0], SMALL)
    assert scores.shape == (5,)
    assert label == Label(int(np.argmax(scores)))
    proba = model.predict_proba(featurize_many(texts[:1], SMALL))[0]
    np.testing.assert_allclose(proba, np.exp(scores) / np.exp(scores).sum(), rtol=1e-12)


# ---------------------------------------------------------------- persistence

@pytest.mark.parametrize("kind", ["nb", "mlp"])
def test_save_load_round_trip(tmp_path, kind):
    texts, labels = separable_corpus(40)
    corpus = corpus_of(texts, labels)
    if kind == "nb":
        model = train_nb(corpus, SMALL, alpha=0.5)
    else:
        model = train_mlp(corpus, SMALL, TrainConfig(epochs=2, lr=1e-2),
                          unfreeze=UnfreezeSchedule({1: [2], 2: [0, 1, 2]}))
    save_model(tmp_path / "m.npz", model, SMALL)
    back, space = load_model(tmp_path / "m.npz")
    assert space == SMALL
    assert back.get_params() == model.get_params()
    X = featurize_many(texts + ["unseen words"], SMALL)
    np.testing.assert_array_equal(back.decision_function(X), model.decision_function(X))


def test_load_rejects_other_files(tmp_path):
    np.savez(tmp_path / "x.npz", meta=np.array('{"format": "other", "version": 1}'))
    with pytest.raises(ContractError):
        load_model(tmp_path / "x.npz")


@pytest.mark.parametrize("kind", ["nb", "mlp"])
def test_text_pipeline(kind):
    texts, labels = separable_corpus(100)
    params = {"epochs": 5} if kind == "mlp" else {}
    pipe = text_pipeline(kind, SMALL, **params).fit(texts, labels)
    assert pipe.score(texts, labels) >= 0.95
