"""Triplet sampling, odd-one-out prediction, agreement tables, category F1."""

import numpy as np
import pytest

from chanvec.embedding import EmbeddingTable
from chanvec.evaluation import (
    EmptyStratumError,
    Triplet,
    TripletJudgment,
    agreement_sweep,
    agreement_table,
    eval_category,
    predict_odd,
    read_judgments,
    read_triplets,
    render_agreement,
    sample_triplets,
    write_judgments,
    write_triplets,
)
from chanvec.forest import ForestConfig
from chanvec.neighbors import neighbor_ranking, unit_rows
from chanvec.synth import blob_embedding, random_embedding


class TestTripletValidation:
    def test_ids_must_be_distinct(self):
        with pytest.raises(ValueError, match="distinct"):
            Triplet("a", "a", "b", "soc", 5)

    def test_source_must_be_known(self):
        with pytest.raises(ValueError, match="source"):
            Triplet("a", "b", "c", "vibes", 5)

    def test_k_must_leave_room(self):
        with pytest.raises(ValueError, match="k must be"):
            Triplet("a", "b", "c", "soc", 1)

    def test_votes_must_sum_to_raters(self):
        t = Triplet("a", "b", "c", "soc", 5)
        with pytest.raises(ValueError, match="sum"):
            TripletJudgment(t, {"a": 2, "b": 2})

    def test_votes_must_name_triplet_channels(self):
        t = Triplet("a", "b", "c", "soc", 5)
        with pytest.raises(ValueError, match="outside"):
            TripletJudgment(t, {"a": 3, "zz": 2})

    def test_modal_choice_tie_breaks_lexicographically(self):
        t = Triplet("a", "b", "c", "soc", 5)
        j = TripletJudgment(t, {"c": 2, "b": 2, "a": 1})
        assert j.modal_count() == 2
        assert j.modal_choice() == "b"


class TestSampleTriplets:
    def test_six_point_hand_fixture(self):
        # Line of points along distinct directions: the anchor's ranked
        # neighbors are fully determined by angle.
        angles = np.array([0.0, 0.1, 0.2, 0.4, 0.8, 1.6])
        vecs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        c = EmbeddingTable([f"p{i}" for i in range(6)], vecs)
        sample = sample_triplets(c, k=4, n=20, seed=0)
        assert not sample.exhausted
        for t in sample.triplets:
            assert t.k == 4
            assert t.source_embedding == "external"
            # b must be a's nearest neighbor, c the 4th
            ai = int(t.a[1:])
            u = unit_rows(vecs)
            d = 1.0 - u @ u[ai]
            order = neighbor_ranking(d, self_index=ai)
            assert t.b == f"p{order[0]}"
            assert t.c == f"p{order[3]}"

    def test_near_pair_is_closer_than_far_pair(self):
        c = random_embedding(200, 8, seed=3)
        sample = sample_triplets(c, k=30, n=50, seed=1)
        assert len(sample.triplets) == 50
        u = {cid: c[cid] / np.linalg.norm(c[cid]) for cid in c.ids}
        for t in sample.triplets:
            d_ab = 1.0 - float(u[t.a] @ u[t.b])
            d_bc = 1.0 - float(u[t.b] @ u[t.c])
            assert d_ab < d_bc

    def test_insertion_order_does_not_matter(self):
        rng = np.random.default_rng(7)
        ids = [f"c{i:03d}" for i in range(60)]
        vecs = rng.standard_normal((60, 5))
        c1 = EmbeddingTable(ids, vecs)
        perm = rng.permutation(60)
        c2 = EmbeddingTable([ids[i] for i in perm], vecs[perm])
        s1 = sample_triplets(c1, k=10, n=25, seed=4)
        s2 = sample_triplets(c2, k=10, n=25, seed=4)
        assert s1.triplets == s2.triplets

    def test_k_one_never_yields_triplets(self):
        # With k=1 the far channel equals the near one and every draw is rejected.
        c = random_embedding(30, 4, seed=5)
        sample = sample_triplets(c, k=1, n=5, seed=6)
        assert sample.triplets == []
        assert sample.exhausted
        assert sample.attempts == 500

    def test_embedding_too_small_for_k_is_fatal(self):
        c = random_embedding(10, 3, seed=7)
        with pytest.raises(ValueError, match="cannot support"):
            sample_triplets(c, k=9, n=5)

    def test_sampling_is_deterministic(self):
        c = random_embedding(80, 6, seed=8)
        a = sample_triplets(c, k=12, n=30, seed=9)
        b = sample_triplets(c, k=12, n=30, seed=9)
        assert a.triplets == b.triplets
        assert a.attempts == b.attempts


class TestPredictOdd:
    def test_hand_fixture(self):
        c = EmbeddingTable.from_dict(
            {"x": [1.0, 0.0], "y": [0.9, 0.1], "z": [-1.0, 0.5]}
        )
        t = Triplet("x", "y", "z", "external", 5)
        # x and y are nearly parallel, z points away: z is the odd one.
        assert predict_odd(t, c) == "z"

    def test_result_ignores_argument_position(self):
        c = EmbeddingTable.from_dict(
            {"x": [1.0, 0.0], "y": [0.9, 0.1], "z": [-1.0, 0.5]}
        )
        for t in (
            Triplet("z", "x", "y", "external", 5),
            Triplet("y", "z", "x", "external", 5),
        ):
            assert predict_odd(t, c) == "z"

    def test_exact_tie_picks_smallest_odd_id(self):
        # Mutually orthogonal vectors: all three pair distances equal 1.
        c = EmbeddingTable.from_dict(
            {"m": [1.0, 0.0], "n": [0.0, 1.0], "o": [-1.0, 0.0]}
        )
        t = Triplet("m", "n", "o", "external", 5)
        # d(m,n) = 1, d(n,o) = 1, d(m,o) = 2 -> the closest pair is a tie
        # between (m,n)... d(m,o)=2 is largest so odd candidates (n excluded
        # by pair (m,o)) lose; tie between excluding o (pair m,n at 1) and
        # excluding m (pair n,o at 1) resolves to the smaller id "m".
        assert predict_odd(t, c) == "m"

    def test_missing_channel_is_fatal(self):
        c = EmbeddingTable.from_dict({"x": [1.0], "y": [2.0]})
        t = Triplet("x", "y", "ghost", "external", 5)
        with pytest.raises(KeyError, match="ghost"):
            predict_odd(t, c)


def _judgment(t, choice, spread=None):
    votes = {choice: 5}
    if spread:
        votes = spread
    return TripletJudgment(t, votes)


class TestAgreement:
    def _fixture(self):
        c = EmbeddingTable.from_dict(
            {"x": [1.0, 0.0], "y": [0.9, 0.1], "z": [-1.0, 0.5], "w": [-0.9, 0.4]}
        )
        t1 = Triplet("x", "y", "z", "external", 5)  # odd is z
        t2 = Triplet("z", "w", "x", "external", 3)  # odd is x
        return c, t1, t2

    def test_full_agreement_when_crowd_matches(self):
        c, t1, t2 = self._fixture()
        judgments = [_judgment(t1, "z"), _judgment(t2, "x")]
        row = agreement_table(judgments, c, min_workers=5)
        assert row.rate == 1.0
        assert row.n == 2

    def test_disagreeing_crowd_scores_zero(self):
        c, t1, t2 = self._fixture()
        judgments = [_judgment(t1, "x"), _judgment(t2, "z")]
        row = agreement_table(judgments, c, min_workers=3)
        assert row.rate == 0.0

    def test_threshold_filters_low_consensus_judgments(self):
        c, t1, t2 = self._fixture()
        strong = _judgment(t1, "z")
        weak = TripletJudgment(t2, {"x": 2, "z": 2, "w": 1})
        rows = agreement_sweep([strong, weak], c)
        by_w = {r.min_workers: r for r in rows}
        assert by_w[2].n == 2
        assert by_w[3].n == 1
        assert by_w[5].n == 1
        assert by_w[5].rate == 1.0

    def test_n_is_non_increasing_in_threshold(self):
        rng = np.random.default_rng(15)
        c = random_embedding(40, 4, seed=16)
        sample = sample_triplets(c, k=8, n=30, seed=17)
        judgments = []
        for t in sample.triplets:
            counts = rng.multinomial(5, [0.6, 0.25, 0.15])
            votes = {cid: int(v) for cid, v in zip(t.ids, counts) if v > 0}
            judgments.append(TripletJudgment(t, votes))
        rows = agreement_sweep(judgments, c)
        ns = [r.n for r in rows]
        assert ns == sorted(ns, reverse=True)

    def test_noisier_crowds_agree_less(self):
        rng = np.random.default_rng(19)
        c = random_embedding(60, 5, seed=20)
        sample = sample_triplets(c, k=10, n=60, seed=21)

        def rate(noise):
            judgments = []
            for t in sample.triplets:
                truth = predict_odd(t, c)
                votes = {}
                for _ in range(5):
                    if rng.random() < noise:
                        pick = t.ids[int(rng.integers(0, 3))]
                    else:
                        pick = truth
                    votes[pick] = votes.get(pick, 0) + 1
                judgments.append(TripletJudgment(t, votes))
            return agreement_table(judgments, c, min_workers=3).rate

        assert rate(0.05) > rate(0.9)

    def test_k_filter_restricts_the_pool(self):
        c, t1, t2 = self._fixture()
        judgments = [_judgment(t1, "z"), _judgment(t2, "x")]
        rows = agreement_sweep(judgments, c, w_values=(5,), k=3)
        assert rows[0].n == 1

    def test_empty_stratum_raises_and_sweep_fills_nan(self):
        c, t1, _ = self._fixture()
        weak = TripletJudgment(t1, {"x": 2, "y": 2, "z": 1})
        with pytest.raises(EmptyStratumError):
            agreement_table([weak], c, min_workers=4)
        rows = agreement_sweep([weak], c, w_values=(4, 5))
        assert all(np.isnan(r.rate) and r.n == 0 for r in rows)

    def test_render_marks_empty_rows(self):
        c, t1, _ = self._fixture()
        weak = TripletJudgment(t1, {"x": 2, "y": 2, "z": 1})
        text = render_agreement(agreement_sweep([weak], c, w_values=(2, 5)), "title")
        assert "title" in text and "nan" in text


class TestEvalCategory:
    def test_separable_blobs_score_high(self):
        c, labels = blob_embedding(n_per_class=40, n_classes=3, d=6, seed=25)
        result = eval_category(
            c, labels, "cat0", reps=10, seed=1, per_class=30,
            forest_cfg=ForestConfig(n_trees=30),
        )
        assert result.mean_f1 >= 0.95
        assert len(result.per_rep) == 10

    def test_shuffled_labels_score_near_half(self):
        rng = np.random.default_rng(29)
        c, labels = blob_embedding(n_per_class=40, n_classes=2, d=6, seed=27)
        ids = list(labels)
        values = rng.permutation([labels[i] for i in ids])
        shuffled = dict(zip(ids, values))
        result = eval_category(
            c, shuffled, "cat0", reps=20, seed=2, per_class=30,
            forest_cfg=ForestConfig(n_trees=20),
        )
        assert 0.3 <= result.mean_f1 <= 0.65

    def test_rotation_does_not_change_scores_much(self):
        from scipy.stats import ortho_group

        c, labels = blob_embedding(n_per_class=40, n_classes=2, d=5, seed=31)
        rot = ortho_group.rvs(5, random_state=7)
        c_rot = EmbeddingTable(c.ids, c.vectors @ rot)
        kw = dict(reps=20, seed=3, per_class=30, forest_cfg=ForestConfig(n_trees=30))
        plain = eval_category(c, labels, "cat0", **kw)
        rotated = eval_category(c_rot, labels, "cat0", **kw)
        assert abs(plain.mean_f1 - rotated.mean_f1) <= 0.05

    def test_insufficient_pool_is_fatal(self):
        c, labels = blob_embedding(n_per_class=10, n_classes=2, d=3, seed=33)
        with pytest.raises(ValueError, match="need"):
            eval_category(c, labels, "cat0", reps=2, per_class=50)

    def test_deterministic_for_fixed_seed(self):
        c, labels = blob_embedding(n_per_class=35, n_classes=2, d=4, seed=35)
        kw = dict(reps=5, seed=4, per_class=25, forest_cfg=ForestConfig(n_trees=10))
        a = eval_category(c, labels, "cat0", **kw)
        b = eval_category(c, labels, "cat0", **kw)
        assert a.per_rep == b.per_rep


class TestTripletFiles:
    def test_round_trip(self, tmp_path):
        triplets = [
            Triplet("a", "b", "c", "soc", 110),
            Triplet("d", "e", "f", "rec", 440),
        ]
        path = tmp_path / "triplets.csv"
        write_triplets(path, triplets)
        back = read_triplets(path)
        assert list(back) == ["t00000", "t00001"]
        assert list(back.values()) == triplets

    def test_duplicate_id_is_fatal(self, tmp_path):
        path = tmp_path / "triplets.csv"
        path.write_text("t0,a,b,c,soc,5\nt0,d,e,f,rec,5\n")
        with pytest.raises(ValueError, match="duplicate"):
            read_triplets(path)

    def test_judgments_round_trip(self, tmp_path):
        t = Triplet("a", "b", "c", "soc", 5)
        judgments = {"t00000": TripletJudgment(t, {"a": 3, "c": 2})}
        tpath = tmp_path / "triplets.csv"
        jpath = tmp_path / "judgments.csv"
        write_triplets(tpath, [t])
        write_judgments(jpath, judgments)
        back = read_judgments(jpath, read_triplets(tpath))
        assert back == judgments

    def test_unknown_triplet_id_is_fatal(self, tmp_path):
        jpath = tmp_path / "judgments.csv"
        jpath.write_text("tX,a,a,a,b,c\n")
        with pytest.raises(ValueError, match="unknown triplet"):
            read_judgments(jpath, {})

    def test_wrong_choice_count_is_fatal(self, tmp_path):
        t = Triplet("a", "b", "c", "soc", 5)
        tpath = tmp_path / "triplets.csv"
        write_triplets(tpath, [t])
        jpath = tmp_path / "judgments.csv"
        jpath.write_text("t00000,a,b\n")
        with pytest.raises(ValueError, match="choices"):
            read_judgments(jpath, read_triplets(tpath))
