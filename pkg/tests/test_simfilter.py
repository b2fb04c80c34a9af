import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parapipe.records import TweetRecord
from parapipe.simfilter import (
    Candidate,
    FilterConfig,
    ParaphraseSet,
    build_para_clean,
    dedup_candidates,
    filter_against_original,
    filter_set,
    select_para_n,
    trigram_set,
    trigram_similarity,
)

from oracles import oracle_cascade, oracle_similarity

CFG = FilterConfig()


class TestFilterConfig:
    def test_defaults(self):
        assert CFG.ngram_order == 3
        assert CFG.copy_threshold == 0.95
        assert CFG.dedup_threshold == 0.50
        assert CFG.floor_similarity == 0.0

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            FilterConfig(floor_similarity=0.95, copy_threshold=0.95)
        with pytest.raises(ValueError):
            FilterConfig(dedup_threshold=0.96)
        with pytest.raises(ValueError):
            FilterConfig(ngram_order=0)
        with pytest.raises(ValueError):
            FilterConfig(copy_threshold=1.5)

    def test_dict_round_trip(self):
        cfg = FilterConfig(ngram_order=2, dedup_threshold=0.4)
        assert FilterConfig.from_dict(cfg.to_dict()) == cfg


class TestTrigramSet:
    def test_basic(self):
        assert trigram_set("a b c d", 3) == {"a b c", "b c d"}

    def test_short_text_single_gram(self):
        assert trigram_set("a b", 3) == {"a b"}

    def test_empty(self):
        assert trigram_set("", 3) == frozenset()
        assert trigram_set("   ", 3) == frozenset()

    def test_lowercases(self):
        assert trigram_set("A B C", 3) == {"a b c"}


class TestTrigramSimilarity:
    def test_identity(self):
        assert trigram_similarity("the cat sat down", "the cat sat down") == 1.0

    def test_disjoint(self):
        assert trigram_similarity("a b c", "x y z") == 0.0

    def test_hand_enumerated(self):
        # {abc, bcd} vs {abc, bce}: 1 shared of 3 total
        assert trigram_similarity("a b c d", "a b c e") == pytest.approx(1 / 3)

    def test_both_empty(self):
        assert trigram_similarity("", "") == 1.0

    def test_one_empty(self):
        assert trigram_similarity("a b c", "") == 0.0

    @settings(max_examples=200)
    @given(st.text(alphabet="ab ", max_size=30), st.text(alphabet="ab ", max_size=30))
    def test_matches_oracle_and_symmetric(self, a, b):
        got = trigram_similarity(a, b, CFG)
        assert got == trigram_similarity(b, a, CFG)
        assert 0.0 <= got <= 1.0
        assert got == pytest.approx(float(oracle_similarity(a, b)))


def _words(rng, k):
    return " ".join(rng.choice("abcdefgh") for _ in range(k))


class TestFilterAgainstOriginal:
    def test_keep_rule(self):
        orig = "the quick brown fox jumps over the lazy dog today"
        cands = [
            orig,                                   # sim 1.0 -> copy
            "completely different words entirely",  # sim 0.0 -> zero_overlap
            "the quick brown fox jumps over a lazy dog today",  # partial
        ]
        out = filter_against_original(orig, cands, CFG)
        assert [c.kept for c in out] == [False, False, True]
        assert out[0].drop_reason == "copy"
        assert out[1].drop_reason == "zero_overlap"
        assert out[2].drop_reason == "none"
        assert 0.0 < out[2].sim_to_original <= 0.95

    def test_all_copies_dropped(self):
        orig = "w x y z"
        out = filter_against_original(orig, [orig, orig], CFG)
        assert all(not c.kept and c.drop_reason == "copy" for c in out)

    def test_sim_exactly_copy_threshold_kept(self):
        # 21 tokens -> 19 trigrams; appending one token adds one trigram:
        # overlap 19, union 20, sim = 0.95 exactly. Strict ">" keeps it.
        orig = " ".join(f"t{i}" for i in range(21))
        cand = orig + " extra"
        sim = trigram_similarity(orig, cand, CFG)
        assert sim == 0.95
        out = filter_against_original(orig, [cand], CFG)
        assert out[0].kept

    def test_order_preserved(self):
        orig = "a b c d e"
        cands = [_words(random.Random(7), 5) for _ in range(6)]
        out = filter_against_original(orig, cands, CFG)
        assert [c.text for c in out] == cands


class TestDedup:
    def _mk(self, texts):
        return tuple(Candidate(t, 0.5, kept=True) for t in texts)

    def test_exact_duplicate_dropped(self):
        out = dedup_candidates(self._mk(["p q r s", "p q r s"]), CFG)
        assert out[0].kept and not out[1].kept
        assert out[1].drop_reason == "near_duplicate"

    def test_all_disjoint_kept(self):
        out = dedup_candidates(self._mk(["a b c", "d e f", "g h i"]), CFG)
        assert all(c.kept for c in out)

    def test_greedy_keeps_first_of_similar_pair(self):
        # sim(c1,c2)=0.6 > 0.5 drops c2; sim(c1,c3)=0.2 keeps c3
        c1 = "a b c d e f g"
        c2 = "a b c d e"
        c3 = "a b c"
        assert trigram_similarity(c1, c2, CFG) == pytest.approx(0.6)
        assert trigram_similarity(c1, c3, CFG) == pytest.approx(0.2)
        out = dedup_candidates(self._mk([c1, c2, c3]), CFG)
        assert [c.kept for c in out] == [True, False, True]

    def test_already_dropped_pass_through(self):
        cands = (
            Candidate("a b c", 0.99, kept=False, drop_reason="copy"),
            Candidate("a b c", 0.5, kept=True),
        )
        out = dedup_candidates(cands, CFG)
        # the stage-1 drop is not "previously kept", so the second survives
        assert out[0].drop_reason == "copy"
        assert out[1].kept

    def test_boundary_half_kept(self):
        # sim exactly 0.50 must be kept (strict > drops)
        a = "w1 w2 w3 w4 w5"   # 3 trigrams
        b = "w1 w2 w3 w4 x"    # trigrams: w1w2w3, w2w3w4, w3w4x -> overlap 2, union 4
        assert trigram_similarity(a, b, CFG) == 0.5
        out = dedup_candidates(self._mk([a, b]), CFG)
        assert out[0].kept and out[1].kept


class TestParaClean:
    def test_all_copies_zero_survivors_set_retained(self):
        rec = TweetRecord(id="1", text="u v w x", label="pos")
        pset = ParaphraseSet.from_texts(rec, ["u v w x"] * 10)
        out = build_para_clean([pset], CFG)
        assert len(out) == 1
        assert out[0].kept_candidates() == ()
        assert len(out[0].candidates) == 10

    def test_empty_input(self):
        assert build_para_clean([], CFG) == []

    def test_oracle_reverification_500_random_sets(self):
        rng = random.Random(20260817)
        for i in range(500):
            orig = _words(rng, rng.randint(1, 12))
            texts = []
            for _ in range(rng.randint(0, 10)):
                roll = rng.random()
                if roll < 0.2:
                    texts.append(orig)
                elif roll < 0.4:
                    texts.append(_words(rng, rng.randint(1, 12)))
                else:
                    # perturb the original to land at intermediate sims
                    toks = orig.split()
                    for _ in range(rng.randint(0, 3)):
                        toks.insert(rng.randrange(len(toks) + 1), rng.choice("abcdefgh"))
                    texts.append(" ".join(toks))
            rec = TweetRecord(id=str(i), text=orig, label="x")
            got = filter_set(ParaphraseSet.from_texts(rec, texts), CFG)
            want = oracle_cascade(orig, texts)
            assert [(c.kept, c.drop_reason) for c in got.candidates] == want
            # post-conditions, recomputed from scratch
            kept = [c.text for c in got.candidates if c.kept]
            for t in kept:
                s = float(oracle_similarity(orig, t))
                assert 0.0 < s <= 0.95
            for x in range(len(kept)):
                for y in range(x + 1, len(kept)):
                    assert float(oracle_similarity(kept[x], kept[y])) <= 0.50

    def test_deterministic(self):
        rng = random.Random(3)
        rec = TweetRecord(id="1", text=_words(rng, 8), label="x")
        texts = [_words(rng, 8) for _ in range(10)]
        pset = ParaphraseSet.from_texts(rec, texts)
        a = build_para_clean([pset], CFG)
        b = build_para_clean([pset], CFG)
        assert [s.to_dict() for s in a] == [s.to_dict() for s in b]


class TestSelectParaN:
    def _clean_set(self, n_survivors, id="42"):
        rec = TweetRecord(id=id, text="o r i g", label="pos", topic="covid", dataset="d")
        cands = tuple(
            Candidate(f"cand {j} text", 0.4, kept=True) for j in range(n_survivors)
        )
        return ParaphraseSet(original=rec, candidates=cands)

    def test_takes_first_n(self):
        pset = self._clean_set(7)
        out = select_para_n([pset], 5)
        assert len(out) == 5
        assert [r.text for r in out] == [f"cand {j} text" for j in range(5)]

    def test_short_sample_emits_what_exists(self):
        pset = self._clean_set(1)
        out = select_para_n([pset], 4)
        assert len(out) == 1

    def test_inherits_label_topic_dataset_and_ids(self):
        out = select_para_n([self._clean_set(2)], 2)
        assert out[0].id == "42#p1" and out[1].id == "42#p2"
        assert all(r.label == "pos" and r.topic == "covid" and r.dataset == "d" for r in out)

    def test_prefix_property_and_size_bound(self):
        rng = random.Random(11)
        sets = [self._clean_set(rng.randint(0, 8), id=str(i)) for i in range(40)]
        prev = None
        for n in (1, 2, 4, 5):
            cur = select_para_n(sets, n)
            assert len(cur) <= n * len(sets)
            if prev is not None:
                ids = [r.id for r in cur]
                assert [r.id for r in prev] == [i for i in ids if int(i.split("#p")[1]) <= prev_n]
            prev, prev_n = cur, n

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            select_para_n([], 0)


class TestSerialization:
    def test_round_trip(self):
        rec = TweetRecord(id="7", text="a b c d", label="neg")
        pset = filter_set(ParaphraseSet.from_texts(rec, ["a b c d", "a b x d"]), CFG)
        again = ParaphraseSet.from_dict(pset.to_dict())
        assert again == pset

    def test_kept_requires_no_reason(self):
        with pytest.raises(ValueError):
            Candidate("t", 0.5, kept=True, drop_reason="copy")
        with pytest.raises(ValueError):
            Candidate("t", 0.5, kept=False, drop_reason="bogus")
