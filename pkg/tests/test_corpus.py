import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datm.corpus import (ContextWindow, Document, filter_documents,
                         merge_phrases, term_counts, tokenize, windows)
from datm.errors import ConfigError


class TestTokenize:
    def test_strips_and_lowercases(self):
        assert tokenize("The victim was found.") == ["the", "victim", "was", "found"]

    def test_underscore_preserved(self):
        assert tokenize("bolt_action rifle") == ["bolt_action", "rifle"]

    def test_empty(self):
        assert tokenize("") == []

    def test_internal_hyphen_and_apostrophe_kept(self):
        assert tokenize("a self-inflicted wound, don't touch (evidence).") == [
            "a", "self-inflicted", "wound", "don't", "touch", "evidence"
        ]

    def test_pure_punctuation_dropped(self):
        assert tokenize("-- ... !!") == []


def doc(doc_id, text):
    return Document(doc_id, tuple(text.split()))


def score_table(docs, min_pair_count):
    """Independent pair scores: plain dict counting, no shared code."""
    unigrams = Counter()
    pairs = Counter()
    total = 0
    for d in docs:
        for token in d.tokens:
            unigrams[token] += 1
            total += 1
        for a, b in zip(d.tokens, d.tokens[1:]):
            pairs[(a, b)] += 1
    return {
        pair: (count - min_pair_count) * total / (unigrams[pair[0]] * unigrams[pair[1]])
        for pair, count in pairs.items()
    }


class TestMergePhrases:
    # 20 tokens; "savage arms" is the only pair with positive score
    CORPUS = [
        doc("1", "hunters prefer savage arms rifles overall"),
        doc("2", "collectors admire savage arms craftsmanship quite openly"),
        doc("3", "savage arms built a factory here too"),
    ]

    def test_hand_counted_merge(self):
        scores = score_table(self.CORPUS, min_pair_count=1)
        above = {p for p, s in scores.items() if s > 1.0}
        assert above == {("savage", "arms")}
        assert scores[("savage", "arms")] == pytest.approx((3 - 1) * 20 / (3 * 3))

        merged = merge_phrases(self.CORPUS, threshold=1.0, min_pair_count=1)
        assert merged[0].tokens == tuple(
            "hunters prefer savage_arms rifles overall".split())
        assert merged[1].tokens == tuple(
            "collectors admire savage_arms craftsmanship quite openly".split())
        assert merged[2].tokens == tuple(
            "savage_arms built a factory here too".split())

    def test_below_floor_never_merges(self):
        docs = [doc("1", "one off pair"), doc("2", "some other words")]
        merged = merge_phrases(docs, threshold=0.001, min_pair_count=5)
        assert [d.tokens for d in merged] == [d.tokens for d in docs]

    def test_chance_cooccurrence_stays_unmerged(self):
        # alpha and beta are frequent but adjacent only twice; with the
        # discount of 1 their score is exactly T / (count(a) * count(b))
        docs = [
            doc("1", "alpha x alpha y alpha z"),
            doc("2", "beta x beta y beta z"),
            doc("3", "alpha beta p alpha beta q"),
        ]
        scores = score_table(docs, min_pair_count=1)
        threshold = 2.0
        assert scores[("alpha", "beta")] == pytest.approx(18 / 25)
        assert max(scores.values()) < threshold
        merged = merge_phrases(docs, threshold=threshold, min_pair_count=1)
        assert [d.tokens for d in merged] == [d.tokens for d in docs]

    def test_second_pass_builds_trigrams(self):
        docs = [
            doc("1", "visited new york city today"),
            doc("2", "toured new york city briefly"),
            doc("3", "left new york city yesterday"),
            doc("4", "loves new york city deeply"),
        ]
        once = merge_phrases(docs, threshold=1.0, min_pair_count=1, passes=1)
        assert once[0].tokens == ("visited", "new_york", "city", "today")
        twice = merge_phrases(docs, threshold=1.0, min_pair_count=1, passes=2)
        assert twice[0].tokens == ("visited", "new_york_city", "today")

    @settings(max_examples=50, deadline=None)
    @given(st.lists(
        st.lists(st.sampled_from(["a", "b", "c", "d", "e"]), min_size=1, max_size=12),
        min_size=1, max_size=6,
    ))
    def test_resplit_recovers_original(self, token_lists):
        docs = [Document(str(i), tuple(t)) for i, t in enumerate(token_lists)]
        merged = merge_phrases(docs, threshold=0.5, min_pair_count=0, passes=2)
        for original, after in zip(docs, merged):
            resplit = tuple(t for token in after.tokens for t in token.split("_"))
            assert resplit == original.tokens

    def test_bad_params(self):
        with pytest.raises(ConfigError):
            merge_phrases([], threshold=0)
        with pytest.raises(ConfigError):
            merge_phrases([], threshold=1, passes=0)


class TestFilterDocuments:
    def test_boundary(self):
        short = Document("s", tuple(str(i) for i in range(49)))
        exact = Document("e", tuple(str(i) for i in range(50)))
        assert filter_documents([short, exact], min_terms=50) == [exact]

    def test_zero_is_identity(self):
        docs = [Document("a", ("x",)), Document("b", ())]
        assert filter_documents(docs, min_terms=0) == docs


class TestWindows:
    def test_exact_fit_single_window(self):
        d = Document("d", tuple(str(i) for i in range(10)))
        result = windows(d, length=10, stride=1)
        assert len(result) == 1
        assert result[0].start == 0
        assert result[0].terms == d.tokens

    def test_rolling_offsets(self):
        d = Document("d", tuple(str(i) for i in range(12)))
        result = windows(d, length=10, stride=1)
        assert [w.start for w in result] == [0, 1, 2]
        assert all(len(w) == 10 for w in result)

    def test_strided_with_tail(self):
        # enumerated by hand: full windows at 0 and 10, then 5 uncovered
        # tokens (>= ceil(10/2)) make a short tail window at offset 20
        d = Document("d", tuple(str(i) for i in range(25)))
        result = windows(d, length=10, stride=10)
        assert [(w.start, len(w)) for w in result] == [(0, 10), (10, 10), (20, 5)]
        assert result[-1].terms == d.tokens[20:]

    def test_small_remainder_dropped(self):
        # 2 uncovered tokens < ceil(10/2): no tail
        d = Document("d", tuple(str(i) for i in range(22)))
        result = windows(d, length=10, stride=10)
        assert [(w.start, len(w)) for w in result] == [(0, 10), (10, 10)]

    def test_short_document_single_window(self):
        d = Document("d", ("a", "b", "c"))
        result = windows(d, length=10, stride=1)
        assert result == [ContextWindow("d", 0, ("a", "b", "c"))]

    def test_empty_document(self):
        assert windows(Document("d", ()), length=5, stride=1) == []

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=60), st.integers(min_value=1, max_value=15))
    def test_stride_one_covers_everything(self, n_tokens, length):
        d = Document("d", tuple(str(i) for i in range(n_tokens)))
        covered = set()
        for w in windows(d, length=length, stride=1):
            covered.update(range(w.start, w.start + len(w)))
            assert w.terms == d.tokens[w.start:w.start + len(w)]
        assert covered == set(range(n_tokens))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=80),
           st.integers(min_value=1, max_value=12),
           st.integers(min_value=1, max_value=12))
    def test_windows_are_contiguous_slices(self, n_tokens, length, stride):
        d = Document("d", tuple(str(i) for i in range(n_tokens)))
        result = windows(d, length=length, stride=stride)
        assert result, "at least one window for a non-empty document"
        for w in result:
            assert w.terms == d.tokens[w.start:w.start + len(w)]
        full = [w for w in result if w.start + length <= n_tokens]
        assert all(len(w) == min(length, n_tokens) for w in full)
        # at most one short tail; when windows can overlap it carries at
        # least half a window (stride > length leaves gaps by construction)
        short = [w for w in result if len(w) != min(length, n_tokens)]
        assert len(short) <= 1
        if short and stride <= length:
            assert len(short[0]) >= math.ceil(length / 2)


class TestTermCounts:
    @settings(max_examples=40, deadline=None)
    @given(st.lists(
        st.lists(st.sampled_from(["x", "y", "z", "w"]), min_size=0, max_size=10),
        min_size=0, max_size=5,
    ))
    def test_matches_naive_recount(self, token_lists):
        docs = [Document(str(i), tuple(t)) for i, t in enumerate(token_lists)]
        naive = {}
        for tokens in token_lists:
            for t in tokens:
                naive[t] = naive.get(t, 0) + 1
        assert term_counts(docs) == naive
