from __future__ import annotations

import math

import numpy as np
import pytest

from aggrisk.model import (
    MAX_TRIAL_LENGTH,
    UNLIMITED,
    EventLossTable,
    EventOccurrence,
    FinancialTerms,
    Layer,
    LayerTerms,
    Trial,
    YearEventTable,
    YearLossTable,
    validate_elt,
    validate_portfolio,
)


def _categories(violations):
    return {v.category for v in violations}


class TestTrial:
    def test_from_events_default_timestamps_sorted_in_unit_interval(self):
        t = Trial.from_events([4, 9, 4])
        assert len(t) == 3
        ts = t.timestamps
        assert np.all(np.diff(ts) >= 0)
        assert ts.min() >= 0.0 and ts.max() <= 1.0

    def test_from_events_explicit_timestamps(self):
        t = Trial.from_events([1, 2], [0.25, 0.75])
        assert t.timestamps.tolist() == [0.25, 0.75]

    def test_occurrences_iterator(self):
        t = Trial.from_events([4, 9], [0.1, 0.9])
        occ = list(t.occurrences)
        assert occ == [EventOccurrence(4, 0.1), EventOccurrence(9, 0.9)]

    def test_arrays_read_only(self):
        t = Trial.from_events([1, 2, 3])
        with pytest.raises(ValueError):
            t.event_ids[0] = 7

    def test_equality_by_content(self):
        a = Trial.from_events([1, 2], [0.1, 0.2])
        b = Trial.from_events([1, 2], [0.1, 0.2])
        c = Trial.from_events([1, 3], [0.1, 0.2])
        assert a == b
        assert a != c

    def test_max_trial_length_constant(self):
        assert MAX_TRIAL_LENGTH == 10_000


class TestYearEventTable:
    def test_from_trials_round_trip(self):
        trials = [Trial.from_events([1, 2, 3]), Trial.from_events([4])]
        yet = YearEventTable.from_trials(trials, catalog_size=10)
        assert yet.trial_count == 2
        assert list(yet.trials[0].event_ids) == [1, 2, 3]
        assert list(yet.trials[1].event_ids) == [4]

    def test_trials_sequence_views(self):
        trials = [Trial.from_events([1]), Trial.from_events([2, 3])]
        yet = YearEventTable.from_trials(trials, catalog_size=5)
        assert len(yet.trials) == 2
        assert yet.trials[0] == trials[0]
        assert yet.trials[-1] == trials[1]

    def test_head_is_prefix_view(self):
        trials = [Trial.from_events([i + 1]) for i in range(5)]
        yet = YearEventTable.from_trials(trials, catalog_size=10)
        h = yet.head(2)
        assert h.trial_count == 2
        assert list(h.event_ids) == [1, 2]
        assert h.catalog_size == yet.catalog_size

    def test_offsets_shape_checked(self):
        with pytest.raises(ValueError):
            YearEventTable(5, np.array([1], dtype=np.uint32),
                           np.array([0.5]), np.array([0, 2], dtype=np.int64))


class TestEventLossTable:
    def test_from_records_sorts_by_event_id(self):
        elt = EventLossTable.from_records({9: 50.0, 4: 100.0}, catalog_size=10)
        assert elt.event_ids.tolist() == [4, 9]
        assert elt.losses.tolist() == [100.0, 50.0]
        assert elt.record_count == 2

    def test_as_dict_round_trip(self):
        records = {3: 1.5, 7: 2.5, 1: 0.0}
        elt = EventLossTable.from_records(records, catalog_size=8)
        assert elt.as_dict() == records

    def test_parallel_array_shape_enforced(self):
        with pytest.raises(ValueError):
            EventLossTable(5, np.array([1, 2], dtype=np.uint32), np.array([1.0]))

    def test_default_terms_identity(self):
        elt = EventLossTable.from_records({1: 5.0}, catalog_size=2)
        assert elt.terms.is_identity()


class TestLayer:
    def test_elts_coerced_to_tuple(self):
        elt = EventLossTable.from_records({1: 5.0}, catalog_size=2)
        layer = Layer("a", [elt], LayerTerms())
        assert isinstance(layer.elts, tuple)

    def test_default_terms_unlimited(self):
        elt = EventLossTable.from_records({1: 5.0}, catalog_size=2)
        layer = Layer("a", (elt,))
        assert layer.terms.occ_limit == UNLIMITED
        assert layer.terms.agg_retention == 0.0


class TestFinancialTerms:
    def test_identity_detection(self):
        assert FinancialTerms().is_identity()
        assert not FinancialTerms(share=0.5).is_identity()
        assert not FinancialTerms(event_retention=1.0).is_identity()


def _valid_portfolio():
    elt = EventLossTable.from_records({4: 100.0, 9: 50.0}, catalog_size=10)
    layer = Layer("L", (elt,), LayerTerms(10.0, 60.0, 0.0, 150.0))
    yet = YearEventTable.from_trials([Trial.from_events([4, 9, 4])], catalog_size=10)
    return [layer], yet


class TestValidatePortfolio:
    def test_valid_portfolio_is_clean(self):
        layers, yet = _valid_portfolio()
        assert validate_portfolio(layers, yet) == []

    def test_no_trials(self):
        layers, _ = _valid_portfolio()
        empty = YearEventTable(
            10, np.array([], dtype=np.uint32), np.array([], dtype=np.float64),
            np.array([0], dtype=np.int64),
        )
        assert "no_trials" in _categories(validate_portfolio(layers, empty))

    def test_trial_length_cap(self):
        layers, _ = _valid_portfolio()
        events = [4] * (MAX_TRIAL_LENGTH + 1)
        yet = YearEventTable.from_trials([Trial.from_events(events)], catalog_size=10)
        assert "trial_length" in _categories(validate_portfolio(layers, yet))

    def test_event_beyond_catalog(self):
        layers, _ = _valid_portfolio()
        yet = YearEventTable.from_trials([Trial.from_events([11])], catalog_size=10)
        assert "event_out_of_range" in _categories(validate_portfolio(layers, yet))

    def test_event_id_zero(self):
        layers, _ = _valid_portfolio()
        yet = YearEventTable.from_trials([Trial.from_events([0])], catalog_size=10)
        assert "event_out_of_range" in _categories(validate_portfolio(layers, yet))

    def test_timestamp_outside_unit_interval(self):
        layers, _ = _valid_portfolio()
        yet = YearEventTable.from_trials(
            [Trial.from_events([4, 9], [0.5, 1.5])], catalog_size=10
        )
        assert "bad_timestamp" in _categories(validate_portfolio(layers, yet))

    def test_unsorted_timestamps_within_trial(self):
        layers, _ = _valid_portfolio()
        yet = YearEventTable.from_trials(
            [Trial.from_events([4, 9], [0.9, 0.1])], catalog_size=10
        )
        assert "trial_unsorted" in _categories(validate_portfolio(layers, yet))

    def test_timestamp_drop_at_trial_boundary_is_fine(self):
        layers, _ = _valid_portfolio()
        yet = YearEventTable.from_trials(
            [Trial.from_events([4], [0.9]), Trial.from_events([9], [0.1])],
            catalog_size=10,
        )
        assert validate_portfolio(layers, yet) == []

    def test_layer_without_elts(self):
        _, yet = _valid_portfolio()
        bare = Layer("empty", (), LayerTerms())
        assert "layer_no_elts" in _categories(validate_portfolio([bare], yet))

    def test_negative_layer_terms(self):
        layers, yet = _valid_portfolio()
        bad = Layer("b", layers[0].elts, LayerTerms(occ_retention=-1.0))
        assert "bad_layer_terms" in _categories(validate_portfolio([bad], yet))

    def test_infinite_retention_rejected(self):
        layers, yet = _valid_portfolio()
        bad = Layer("b", layers[0].elts, LayerTerms(agg_retention=math.inf))
        assert "bad_layer_terms" in _categories(validate_portfolio([bad], yet))

    def test_zero_limits_are_legal(self):
        layers, yet = _valid_portfolio()
        z = Layer("z", layers[0].elts, LayerTerms(0.0, 0.0, 0.0, 0.0))
        assert validate_portfolio([z], yet) == []

    def test_catalog_mismatch(self):
        layers, _ = _valid_portfolio()
        yet = YearEventTable.from_trials([Trial.from_events([4])], catalog_size=99)
        assert "catalog_mismatch" in _categories(validate_portfolio(layers, yet))

    def test_duplicate_event_ids(self):
        _, yet = _valid_portfolio()
        dup = EventLossTable(
            10, np.array([4, 4], dtype=np.uint32), np.array([1.0, 2.0])
        )
        layer = Layer("d", (dup,), LayerTerms())
        assert "duplicate_event" in _categories(validate_portfolio([layer], yet))

    def test_negative_and_nan_losses(self):
        _, yet = _valid_portfolio()
        for bad_loss in (-1.0, math.nan):
            elt = EventLossTable(
                10, np.array([4], dtype=np.uint32), np.array([bad_loss])
            )
            layer = Layer("n", (elt,), LayerTerms())
            assert "negative_loss" in _categories(validate_portfolio([layer], yet))

    def test_bad_financial_terms(self):
        _, yet = _valid_portfolio()
        cases = [
            FinancialTerms(exchange_rate=0.0),
            FinancialTerms(exchange_rate=math.inf),
            FinancialTerms(event_retention=-1.0),
            FinancialTerms(event_limit=0.0),
            FinancialTerms(share=1.5),
            FinancialTerms(share=-0.1),
        ]
        for terms in cases:
            elt = EventLossTable(
                10, np.array([4], dtype=np.uint32), np.array([1.0]), terms
            )
            layer = Layer("f", (elt,), LayerTerms())
            got = _categories(validate_portfolio([layer], yet))
            assert "bad_financial_terms" in got, terms

    def test_report_lists_every_problem(self):
        bad_elt = EventLossTable(
            7, np.array([4], dtype=np.uint32), np.array([-1.0]),
            FinancialTerms(share=2.0),
        )
        layer = Layer("multi", (bad_elt,), LayerTerms(occ_limit=-5.0))
        yet = YearEventTable.from_trials([Trial.from_events([12])], catalog_size=10)
        got = _categories(validate_portfolio([layer], yet))
        assert {"negative_loss", "bad_financial_terms", "bad_layer_terms",
                "event_out_of_range", "catalog_mismatch"} <= got


class TestValidateElt:
    def test_standalone_checks_own_catalog(self):
        elt = EventLossTable.from_records({4: 1.0}, catalog_size=3)
        assert "event_out_of_range" in _categories(validate_elt(elt))

    def test_clean(self):
        elt = EventLossTable.from_records({2: 1.0}, catalog_size=3)
        assert validate_elt(elt) == []


class TestYearLossTable:
    def test_holds_read_only_float_losses(self):
        ylt = YearLossTable("L", np.array([1, 2, 3]))
        assert ylt.losses.dtype == np.float64
        assert len(ylt) == 3
        with pytest.raises(ValueError):
            ylt.losses[0] = 9.0
