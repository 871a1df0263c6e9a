"""Corpus files and seeded round generation."""

from __future__ import annotations

import pytest

from phishpond.corpus import (
    CorpusFormatError,
    DuplicateUrl,
    InsufficientEntries,
    Label,
    generate_round,
    load_corpus,
    sample_corpus,
    validate_corpus,
    withheld_entries,
)

MIN_LINES = "\n".join(
    [f"https://ok{i}.com/ | legit" for i in range(5)]
    + [f"http://10.0.0.{i}/ | phish" for i in range(5)]
)


class TestLoading:
    def test_sample_corpus(self):
        corpus = sample_corpus()
        assert corpus.id == "sample"
        assert corpus.version == "1"
        assert len(corpus.entries) == 10
        assert len(corpus.by_label(Label.LEGIT)) == 5
        assert len(corpus.by_label(Label.PHISH)) == 5

    def test_header_comments_and_optional_fields(self):
        text = (
            "# a corpus\n"
            "id = demo\n"
            "version = 3\n\n"
            "https://ok0.com/ | legit | - | plain\n"
            "https://ok1.com/ | LEGIT\n"
            "https://ok2.com/ | legit | ebay\n"
            "https://ok3.com/ | legit\n"
            "https://ok4.com/ | legit\n"
            + "\n".join(f"http://10.0.0.{i}/ | phish" for i in range(5))
        )
        corpus = load_corpus(text)
        assert corpus.id == "demo" and corpus.version == "3"
        assert corpus.entries[0].note == "plain"
        assert corpus.entries[0].brand is None
        assert corpus.entries[1].label is Label.LEGIT
        assert corpus.entries[2].brand == "ebay"

    def test_duplicate_after_normalization(self):
        text = MIN_LINES + "\nHTTPS://OK0.COM:443/ | phish\n"
        with pytest.raises(DuplicateUrl):
            load_corpus(text)

    def test_bad_label(self):
        with pytest.raises(CorpusFormatError):
            load_corpus(MIN_LINES + "\nhttps://x.com/ | maybe\n")

    def test_bad_url(self):
        with pytest.raises(CorpusFormatError):
            load_corpus(MIN_LINES + "\nnot a url | phish\n")

    def test_too_few_entries(self):
        with pytest.raises(InsufficientEntries):
            load_corpus("https://only.com/ | legit\nhttp://10.0.0.1/ | phish\n")

    def test_big_corpus_counts(self, big_corpus):
        assert len(big_corpus.by_label(Label.LEGIT)) == 30
        assert len(big_corpus.by_label(Label.PHISH)) == 30
        assert big_corpus.id == "big"


class TestRounds:
    def test_composition_five_plus_five(self, corpus):
        round_ = generate_round(corpus, 99)
        assert len(round_.worms) == 10
        assert sum(1 for w in round_.worms if w.truth is Label.LEGIT) == 5
        assert sum(1 for w in round_.worms if w.truth is Label.PHISH) == 5
        assert len({w.url_text for w in round_.worms}) == 10
        assert round_.seed == 99
        assert round_.corpus_id == "sample"

    def test_same_seed_same_round(self, big_corpus):
        a = generate_round(big_corpus, 1234)
        b = generate_round(big_corpus, 1234)
        assert a == b

    def test_different_seeds_differ(self, big_corpus):
        a = generate_round(big_corpus, 1)
        b = generate_round(big_corpus, 2)
        assert [w.url_text for w in a.worms] != [w.url_text for w in b.worms]

    def test_order_is_shuffled_not_grouped(self, big_corpus):
        # across a handful of seeds, at least one round must interleave labels
        interleaved = False
        for seed in range(10):
            truths = [w.truth for w in generate_round(big_corpus, seed).worms]
            if truths[:5] != [Label.LEGIT] * 5:
                interleaved = True
                break
        assert interleaved

    def test_custom_counts(self, big_corpus):
        round_ = generate_round(big_corpus, 5, legit_count=2, phish_count=2)
        assert len(round_.worms) == 4

    def test_insufficient_for_requested_counts(self, corpus):
        with pytest.raises(InsufficientEntries):
            generate_round(corpus, 1, legit_count=6, phish_count=5)

    def test_verdicts_precomputed(self, corpus):
        round_ = generate_round(corpus, 7)
        for worm in round_.worms:
            if worm.truth is Label.PHISH:
                assert worm.verdict.suspicious, worm.url_text
            else:
                assert not worm.verdict.suspicious, worm.url_text

    def test_withheld_entries_complement_the_round(self, big_corpus):
        round_ = generate_round(big_corpus, 3)
        rest = withheld_entries(big_corpus, round_)
        assert len(rest) == 50
        used = {w.url_text for w in round_.worms}
        assert all(e.url_text not in used for e in rest)


class TestValidation:
    def test_bundled_corpora_are_clean(self, corpus, big_corpus):
        assert validate_corpus(corpus).clean
        assert validate_corpus(big_corpus).clean

    def test_uncued_phish_flagged(self):
        text = MIN_LINES.replace("http://10.0.0.0/", "https://innocent-looking.org/")
        report = validate_corpus(load_corpus(text))
        assert report.uncued_phish == ("https://innocent-looking.org/",)
        assert not report.clean

    def test_cued_legit_flagged(self):
        text = MIN_LINES.replace("https://ok0.com/", "http://paypal-store.com/")
        report = validate_corpus(load_corpus(text))
        assert len(report.cued_legit) == 1
        url, rule_ids = report.cued_legit[0]
        assert url == "http://paypal-store.com/"
        assert "R2_BRAND_HYPHEN" in rule_ids
