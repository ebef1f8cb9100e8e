import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from tinyjam.analytics import build_report
from tinyjam.corpus import (
    CorpusLoadError,
    generate_corpus,
    generate_performance,
    load_corpus,
    write_corpus,
)
from tinyjam.gestures import segment, swipe_stats
from tinyjam.model import serialize_performance_csv, validate


def dir_digest(path: Path) -> str:
    digest = hashlib.sha256()
    for file in sorted(p for p in path.rglob("*") if p.is_file()):
        digest.update(str(file.relative_to(path)).encode())
        digest.update(file.read_bytes())
    return digest.hexdigest()


class TestGenerator:
    def test_all_generated_performances_valid(self):
        for perf in generate_corpus(100, seed=5):
            assert validate(perf) == [], perf.id

    def test_deterministic_for_fixed_seed(self):
        assert generate_corpus(30, seed=9) == generate_corpus(30, seed=9)
        assert generate_corpus(10, seed=1) != generate_corpus(10, seed=2)

    def test_written_corpora_byte_identical(self, tmp_path):
        perfs = generate_corpus(25, seed=42)
        write_corpus(perfs, tmp_path / "a")
        write_corpus(perfs, tmp_path / "b")
        assert dir_digest(tmp_path / "a") == dir_digest(tmp_path / "b")

    def test_reply_fraction_roughly_honored(self):
        corpus = generate_corpus(300, seed=3)
        replies = sum(1 for p in corpus if p.parent_id is not None)
        assert 0.18 <= replies / len(corpus) <= 0.40
        ids = {p.id for p in corpus}
        assert all(p.parent_id in ids for p in corpus if p.parent_id)

    def test_swipe_durations_in_plausible_band(self):
        corpus = generate_corpus(150, seed=8)
        durations = [
            swipe_stats(g).time_s
            for p in corpus
            for g in segment(p)
            if g.kind == "swipe"
        ]
        assert len(durations) > 200
        median = float(np.median(durations))
        q75 = float(np.quantile(durations, 0.75))
        assert 0.04 <= median <= 0.40
        assert 0.15 <= q75 <= 1.20

    def test_instrument_popularity_shape(self):
        corpus = generate_corpus(400, seed=10)
        counts = {}
        for p in corpus:
            counts[p.instrument] = counts.get(p.instrument, 0) + 1
        assert max(counts, key=counts.get) == "chirp"
        assert counts.get("fmlead", 0) < counts["chirp"]
        assert len(counts) == 8

    def test_explicit_instrument_respected(self):
        rng = np.random.default_rng(0)
        perf = generate_performance(rng, instrument="wub")
        assert perf.instrument == "wub"


class TestLoader:
    def test_load_store_layout(self, tmp_path):
        perfs = generate_corpus(12, seed=4)
        write_corpus(perfs, tmp_path / "store")
        loaded = load_corpus(tmp_path / "store")
        assert {p.id for p in loaded} == {p.id for p in perfs}
        by_id = {p.id: p for p in loaded}
        for perf in perfs:
            assert by_id[perf.id].events == perf.events

    def test_load_flat_layout_with_sidecars(self, tmp_path):
        perfs = generate_corpus(6, seed=6)
        flat = tmp_path / "flat"
        flat.mkdir()
        for i, perf in enumerate(perfs):
            (flat / f"perf{i:02d}.csv").write_text(serialize_performance_csv(perf))
            (flat / f"perf{i:02d}.json").write_text(
                json.dumps(
                    {
                        "id": perf.id,
                        "performer": perf.performer,
                        "instrument": perf.instrument,
                        "date": "2020-01-01T00:00:00Z",
                        "parent_id": None,
                    }
                )
            )
        loaded = load_corpus(flat)
        assert len(loaded) == 6
        assert {p.id for p in loaded} == {p.id for p in perfs}

    def test_load_flat_layout_without_sidecars(self, tmp_path):
        flat = tmp_path / "bare"
        flat.mkdir()
        (flat / "solo.csv").write_text(
            "time,x,y,z,moving\n0.000000,0.500000,0.500000,1.000000,0\n"
        )
        loaded = load_corpus(flat)
        assert len(loaded) == 1
        assert loaded[0].id == "solo"
        assert loaded[0].instrument == "unknown"

    def test_malformed_csv_raises(self, tmp_path):
        flat = tmp_path / "broken"
        flat.mkdir()
        (flat / "bad.csv").write_text("nope\n")
        with pytest.raises(CorpusLoadError):
            load_corpus(flat)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(CorpusLoadError):
            load_corpus(tmp_path / "nothere")


class TestGeneratedCorpusAnalytics:
    def test_report_over_generated_corpus(self):
        corpus = generate_corpus(120, seed=77)
        report = build_report(corpus, kde_resolution=25)
        assert report.n_performances == 120
        assert report.swipe_counts["total"] > 0
        assert report.reply_depth_histogram.get(2, 0) > 0
        assert report.kde is not None
        assert report.kde.integrated_mass() > 0.5
        anova = report.anova["time_s"]
        assert anova is None or anova.F >= 0
