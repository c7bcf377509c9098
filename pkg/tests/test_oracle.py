import itertools

import numpy as np
import pytest

from perisched import codec, model, oracle
from perisched.errors import SpaceTooLarge
from perisched.model import Event, Timetable, Train, Trip

from conftest import make_instance, micro_unsat_connection


class TestLattice:
    def test_stride_keeps_endpoints(self):
        assert oracle.lattice(0, 10, 4) == (0, 4, 8, 10)
        assert oracle.lattice(3, 3, 1) == (3,)
        assert oracle.lattice(0, 9, 3) == (0, 3, 6, 9)

    def test_space_size_is_product_of_ranges(self):
        inst = make_instance(60, [Train("t", 3, (Trip("A", "B", 10, 12),))])
        assert oracle.lattice_size(inst, 1) == 60 * 3
        assert oracle.lattice_size(inst, 59) == 2 * 2  # endpoints always kept


class TestExhaustiveMin:
    def test_space_cap_enforced(self, cs1):
        with pytest.raises(SpaceTooLarge) as info:
            oracle.exhaustive_min(cs1, stride=1, space_cap=10**6)
        assert info.value.size > 10**6

    def test_no_pairwise_constraints_min_zero_lex_witness(self):
        inst = make_instance(
            12, [Train("t", 2, (Trip("A", "B", 3, 5, 1, 2), Trip("B", "C", 4, 5),))]
        )
        best, witness = oracle.exhaustive_min(inst)
        assert best == 0
        assert witness.genes == (0, 3, 1, 4)  # low end of every gene

    def test_unsatisfiable_connection_costs_one_connection_weight(self):
        inst = micro_unsat_connection()
        best, witness = oracle.exhaustive_min(inst)
        assert best == inst.weights.connection
        report = model.evaluate(
            codec.decode(witness, inst), model.derive_bounds(inst), inst.weights
        )
        assert report.weighted_fitness == best
        assert report.feasible
        assert report.soft_violations == 1

    def test_witness_is_lexicographically_smallest(self):
        inst = micro_unsat_connection()
        best, witness = oracle.exhaustive_min(inst)
        bounds = codec.gene_bounds(inst)
        constraints = model.derive_bounds(inst)
        axes = [oracle.lattice(lo, hi, 1) for lo, hi in zip(bounds.lo, bounds.hi)]
        minimizers = [
            combo
            for combo in itertools.product(*axes)
            if model.evaluate(
                codec.decode(codec.Genotype(combo), inst), constraints, inst.weights
            ).weighted_fitness
            == best
        ]
        assert witness.genes == min(minimizers)

    def test_stride_minimum_never_beats_full_minimum(self, micro_instance):
        full, _ = oracle.exhaustive_min(micro_instance, stride=1)
        coarse, _ = oracle.exhaustive_min(micro_instance, stride=3)
        assert coarse >= full


class TestCheckIndependent:
    def test_agrees_on_random_timetables(self, micro_instance):
        constraints = model.derive_bounds(micro_instance)
        rng = np.random.default_rng(17)
        for _ in range(400):
            tt = model.random_timetable(micro_instance, rng)
            ours = model.evaluate(tt, constraints, micro_instance.weights)
            theirs = oracle.check_independent(tt, micro_instance)
            assert ours.violations_by_type == theirs.violations_by_type
            assert ours.weighted_fitness == theirs.weighted_fitness

    def test_agrees_on_all_zero_timetable(self, micro_instance):
        tt = Timetable(
            micro_instance.period,
            {e: 0 for e in model.instance_events(micro_instance)},
        )
        ours = model.evaluate(
            tt, model.derive_bounds(micro_instance), micro_instance.weights
        )
        theirs = oracle.check_independent(tt, micro_instance)
        assert ours.violations_by_type == theirs.violations_by_type
        assert ours.weighted_fitness == theirs.weighted_fitness
        assert {v.constraint for v in ours.violated} == {
            v.constraint for v in theirs.violated
        }

    def test_single_minute_perturbations_flip_identically(self, micro_instance):
        constraints = model.derive_bounds(micro_instance)
        rng = np.random.default_rng(23)
        events = model.instance_events(micro_instance)
        for _ in range(60):
            tt = model.random_timetable(micro_instance, rng)
            event = events[rng.integers(len(events))]
            bumped = dict(tt.times)
            bumped[event] = (bumped[event] + 1) % micro_instance.period
            tt2 = Timetable(micro_instance.period, bumped)
            for a, b in ((tt, tt2), (tt2, tt)):
                ours = model.evaluate(a, constraints, micro_instance.weights)
                theirs = oracle.check_independent(a, micro_instance)
                assert ours.violations_by_type == theirs.violations_by_type

    def test_connection_window_past_period_handled_alike(self):
        feeder = Train("f", 2, (Trip("A", "B", 10, 12),))
        onward = Train("g", 2, (Trip("B", "C", 10, 12),))
        inst = make_instance(
            60,
            [feeder, onward],
            connections=[model.ConnectionSpec("f", "g", "B", 55, 70)],
        )
        constraints = model.derive_bounds(inst)
        rng = np.random.default_rng(29)
        for _ in range(300):
            tt = model.random_timetable(inst, rng)
            ours = model.evaluate(tt, constraints, inst.weights)
            theirs = oracle.check_independent(tt, inst)
            assert ours.violations_by_type == theirs.violations_by_type
