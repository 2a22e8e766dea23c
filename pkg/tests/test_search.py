import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walklab.search import (
    SearchConfig,
    parse_marked_spec,
    run_k_sweep,
    run_search,
    standard_families,
    valid_k_values,
    verify_cost_bound,
)


class TestMarkedSpec:
    def test_rows(self):
        assert parse_marked_spec("rows:0", 4) == (0, 1, 2, 3)
        assert parse_marked_spec("rows:0,2", 3) == (0, 1, 2, 6, 7, 8)

    def test_cols(self):
        assert parse_marked_spec("cols:1", 3) == (1, 4, 7)

    def test_cells(self):
        assert parse_marked_spec("cells:(0,0);(1,2)", 3) == (0, 5)
        assert parse_marked_spec("cells:(2,2);(2,2)", 3) == (8,)  # dedup

    def test_half(self):
        assert parse_marked_spec("half", 4) == (0, 1, 4, 5, 8, 9, 12, 13)

    def test_halfchecker(self):
        # left half plus the even-diagonal checkerboard on the right
        assert parse_marked_spec("halfchecker", 4) == (0, 1, 2, 4, 5, 7, 8, 9, 10, 12, 13, 15)

    def test_random_is_seeded(self):
        a = parse_marked_spec("random:10:3", 8)
        assert a == parse_marked_spec("random:10:3", 8)
        assert len(a) == 10
        assert all(0 <= v < 64 for v in a)

    def test_errors_name_the_expression(self):
        for bad in ("rows:9", "rows:", "cells:(0)", "cells:(9,9)", "random:0:1",
                    "random:5", "blob", "cols:x"):
            with pytest.raises(ValueError):
                parse_marked_spec(bad, 4)

    def test_rejects_tiny_torus(self):
        with pytest.raises(ValueError):
            parse_marked_spec("rows:0", 1)


class TestFamilies:
    def test_sizes(self):
        fam = standard_families(16)
        assert len(fam["singleton"]) == 1
        assert len(fam["row"]) == 16
        assert len(fam["clusters"]) == 8
        assert len(fam["half"]) == 128

    def test_clusters_are_two_squares(self):
        fam = standard_families(8)
        assert set(fam["clusters"]) == {0, 1, 8, 9, 36, 37, 44, 45}


class TestKValues:
    def test_power_of_two(self):
        assert valid_k_values(64) == [1, 2, 3, 4, 5]

    def test_non_power(self):
        assert valid_k_values(25) == [1, 2, 3, 4]

    def test_too_small(self):
        with pytest.raises(ValueError):
            valid_k_values(2)


class TestConfig:
    def test_rejects_bad_k(self, constants):
        with pytest.raises(ValueError):
            SearchConfig(n=8, marked=(0,), constants=constants, k=6)

    def test_rejects_full_marking(self, constants):
        with pytest.raises(ValueError):
            SearchConfig(n=4, marked=tuple(range(16)), constants=constants)

    def test_string_spec_resolves(self, constants):
        cfg = SearchConfig(n=4, marked="rows:0", constants=constants)
        assert cfg.resolved_marked() == (0, 1, 2, 3)


@pytest.fixture(scope="module")
def row8(constants):
    return run_search(SearchConfig(n=8, marked="rows:0", constants=constants, seed=7))


class TestRunSearch:
    def test_pipeline_frozen(self, row8):
        assert row8.h_tilde == 108
        assert row8.d == 8
        assert row8.n_blocks == 1
        assert row8.T_walk == 22
        assert row8.best_k == 4
        assert row8.best_success == pytest.approx(0.553323178088413, rel=1e-12)

    def test_ledger_charges(self, row8):
        led = row8.ledger.to_dict()
        # estimator setups + the partitioned-superposition setup; one walk run
        assert led["setup_count"] == 2
        assert led["steps"] == row8.estimator.ledger.steps + row8.T_walk

    def test_uniform_is_mean_over_k(self, row8):
        assert row8.uniform_success == pytest.approx(
            sum(row8.per_k_success) / len(row8.k_values), abs=1e-15
        )

    def test_uniform_k_keeps_a_log_fraction_of_the_floor(self, row8):
        # random-k variant: mean over k can lose at most a 1/|k| factor
        floor = (1.0 / 50.0) / math.floor(math.log2(row8.n * row8.n))
        assert row8.uniform_success >= floor

    def test_chosen_k_seeded(self, row8):
        assert row8.chosen_k == 5
        again = run_search(
            SearchConfig(n=8, marked="rows:0", constants=row8.constants, seed=7)
        )
        assert again.chosen_k == 5
        assert again.per_k_success == row8.per_k_success

    def test_walk_length_formula(self, row8):
        D = row8.layout_base_side
        expect = math.ceil(
            row8.constants.c_find * D * math.sqrt(max(1.0, math.log(D)))
        )
        assert row8.T_walk == expect

    def test_mixture_bookkeeping_is_enforced(self, row8):
        broken = tuple(s + 0.01 for s in row8.per_k_success)
        with pytest.raises(ValueError, match="mixture"):
            dataclasses.replace(row8, per_k_success=broken)

    def test_sample_mode_frozen(self, constants):
        rep = run_search(
            SearchConfig(n=8, marked="rows:0", constants=constants, seed=7, sample=True)
        )
        assert rep.sample_outcome == {
            "k": 5,
            "block": 0,
            "t": 15,
            "vertex": 20,
            "is_marked": False,
        }
        assert rep.verdict == "unsuccessful search"

    def test_fully_marked_block_short_circuits(self, constants):
        rep = run_search(SearchConfig(n=16, marked="halfchecker", constants=constants))
        assert rep.n_blocks == 4
        first = rep.per_k_blocks[0][0]
        assert first.marked_in_block == first.block_size == 64
        assert first.success == 1.0
        assert first.eps_G == pytest.approx(0.25, abs=1e-15)


class TestKSweep:
    def test_frozen(self, constants):
        rep = run_k_sweep(SearchConfig(n=8, marked="rows:0", constants=constants, seed=7))
        assert rep.mode == "sweep"
        assert rep.chosen_k is None
        assert rep.sweep_success == pytest.approx(0.9330596937541298, rel=1e-12)
        assert rep.ledger.steps == rep.estimator.ledger.steps + len(rep.k_values) * rep.T_walk

    def test_sweep_dominates_best(self, constants):
        rep = run_k_sweep(SearchConfig(n=8, marked="cells:(0,0)", constants=constants))
        assert rep.sweep_success >= rep.best_success - 1e-12
        prod = 1.0
        for s in rep.per_k_success:
            prod *= 1.0 - s
        assert rep.sweep_success == pytest.approx(1.0 - prod, abs=1e-12)


class TestCostBound:
    def test_trivial_instance_hits_scale_guard(self, constants):
        rep = run_search(SearchConfig(n=16, marked="halfchecker", constants=constants))
        out = verify_cost_bound(rep, h_eff=1.0, constants=constants)
        assert out["scale"] == 1.0
        assert out["bound"] == constants.c_bound

    def test_branch_labels(self, constants):
        rep = run_search(SearchConfig(n=8, marked="cells:(0,0)", constants=constants))
        small = verify_cost_bound(rep, h_eff=4.0, constants=constants)
        assert small["branch"] == "H"
        huge = verify_cost_bound(rep, h_eff=1e9, constants=constants)
        assert huge["branch"] == "N"
        assert huge["scale"] == pytest.approx(math.sqrt(64 * math.log(64)), rel=1e-12)

    def test_ratio_consistency(self, constants):
        rep = run_search(SearchConfig(n=8, marked="rows:0", constants=constants))
        out = verify_cost_bound(rep, h_eff=10.0, constants=constants)
        assert out["ratio"] == pytest.approx(out["steps"] / out["bound"], rel=1e-15)


class TestReportSerialization:
    def test_to_dict_round_trips_through_json(self, constants):
        import json

        rep = run_search(SearchConfig(n=4, marked="cells:(0,0)", constants=constants))
        blob = json.dumps(rep.to_dict(), sort_keys=True)
        back = json.loads(blob)
        assert back["best_k"] == rep.best_k
        assert back["layout"]["n_blocks"] == rep.n_blocks
        assert back["constants_hash"] == constants.digest


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 12), eps_den=st.integers(2, 8))
def test_spec_round_trip(n, eps_den):
    m = max(1, (n * n) // eps_den)
    spec = f"random:{m}:{n}"
    ids = parse_marked_spec(spec, n)
    assert ids == tuple(sorted(set(ids)))
    assert 0 < len(ids) < n * n


@settings(max_examples=25, deadline=None)
@given(N=st.integers(3, 4096))
def test_k_range_brackets_every_fraction(N):
    ks = valid_k_values(N)
    assert all(1 <= 2 ** k < N for k in ks)
    assert 2 ** (ks[-1] + 1) >= N
