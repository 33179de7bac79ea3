"""The bundled demonstration dataset: deterministic, small, and well-formed."""

import numpy as np

from chanvec import minidata
from chanvec.ingest import parse_channels, parse_tuples, read_video_map


def test_generation_is_byte_deterministic(tmp_path):
    p1 = minidata.generate(tmp_path / "a")
    p2 = minidata.generate(tmp_path / "b")
    assert set(p1) == set(p2)
    for name in p1:
        assert p1[name].read_bytes() == p2[name].read_bytes(), name


def test_dataset_stays_small(tmp_path):
    paths = minidata.generate(tmp_path / "d")
    total = sum(p.stat().st_size for p in paths.values())
    assert total <= 1_000_000


def test_inputs_parse_cleanly(tmp_path):
    paths = minidata.generate(tmp_path / "d")
    with open(paths["tuples.tsv"]) as fh:
        tuples = parse_tuples(fh)
    assert tuples.skipped == 0
    assert len(tuples.records) > 1000  # includes the spammer's mentions
    with open(paths["channels.jsonl"]) as fh:
        channels = parse_channels(fh)
    assert channels.skipped == 0
    assert len(channels.records) == minidata.N_CHANNELS
    with open(paths["video_map.tsv"]) as fh:
        video_map = read_video_map(fh)
    vids = {v.video_id for rec in channels.records for v in rec.videos}
    assert set(video_map) == vids


def test_edge_case_channels_are_present(tmp_path):
    paths = minidata.generate(tmp_path / "d")
    with open(paths["channels.jsonl"]) as fh:
        records = {r.channel_id: r for r in parse_channels(fh).records}
    subs = [r.subscribers for r in records.values()]
    assert None in subs  # a channel without a subscriber count
    assert any(s is not None and s == 100_000 for s in subs)  # exactly at the floor
    assert any(s is not None and s < 100_000 for s in subs)  # below the floor
    languages = {r.language for r in records.values()}
    assert "de" in languages  # non-matching language tag
    assert any(lang.lower().startswith("en-") for lang in languages)
