import dataclasses

import numpy as np
import pytest

from perisched import codec, engine, model, oracle
from perisched.engine import GaConfig, Termination
from perisched.errors import ConfigInvalid, LengthMismatch
from perisched.model import Train, Trip

from conftest import make_instance, micro_three_trains, micro_unsat_connection


def tiny_config(**kw):
    base = dict(population_size=20, max_evaluations=2000, seed=7)
    base.update(kw)
    return GaConfig(**base)


class TestConfig:
    def test_defaults_are_valid(self):
        GaConfig().validate()

    @pytest.mark.parametrize(
        "field,value",
        [
            ("population_size", 1),
            ("max_evaluations", 10),
            ("crossover_rate", 1.5),
            ("mutation_rate_per_gene", -0.1),
            ("tournament_size", 0),
            ("elite_count", 300),
        ],
    )
    def test_invalid_values_rejected(self, field, value):
        with pytest.raises(ConfigInvalid):
            dataclasses.replace(GaConfig(), **{field: value}).validate()


class TestSelectParent:
    def test_tournament_covering_population_returns_best(self):
        pop = [codec.Genotype((k,)) for k in range(6)]
        fitness = [9, 3, 7, 1, 8, 2]
        rng = np.random.default_rng(0)
        for _ in range(25):
            winner = engine.select_parent(pop, fitness, rng, tournament_size=60)
            assert winner == pop[3]

    def test_size_one_is_uniform_pick(self):
        pop = [codec.Genotype((k,)) for k in range(4)]
        fitness = [5, 5, 5, 5]
        rng = np.random.default_rng(1)
        seen = {engine.select_parent(pop, fitness, rng, 1).genes for _ in range(200)}
        assert len(seen) == 4

    def test_selection_frequency_matches_analytic_probability(self):
        # fitness [0, 10, 10], size 2 with replacement: the best individual
        # wins unless both draws avoid index 0: 1 - (2/3)^2 = 5/9
        pop = [codec.Genotype((k,)) for k in range(3)]
        fitness = [0, 10, 10]
        rng = np.random.default_rng(2)
        n = 20000
        hits = sum(
            engine.select_parent(pop, fitness, rng, 2) == pop[0] for _ in range(n)
        )
        assert abs(hits / n - 5 / 9) < 0.02

    def test_ties_break_to_lower_contestant_index(self):
        # all fitnesses equal: the winner is the lowest drawn index, so
        # index 0 wins exactly when either of the two draws hits it (3/4)
        pop = [codec.Genotype((k,)) for k in range(2)]
        rng = np.random.default_rng(3)
        n = 20000
        hits = sum(engine.select_parent(pop, [4, 4], rng, 2) == pop[0] for _ in range(n))
        assert abs(hits / n - 3 / 4) < 0.02


class TestCrossover:
    def test_identical_parents_clone(self):
        g = codec.Genotype((1, 2, 3, 4))
        a, b = engine.crossover(g, g, np.random.default_rng(0), rate=1.0)
        assert a == g and b == g

    def test_cut_mixes_prefix_and_suffix(self):
        a = codec.Genotype((0, 0, 0, 0))
        b = codec.Genotype((1, 1, 1, 1))
        rng = np.random.default_rng(1)
        for _ in range(100):
            c1, c2 = engine.crossover(a, b, rng, rate=1.0)
            ones = sum(c1.genes)
            # a real cut in [1, len-1] never clones either parent
            assert 1 <= ones <= 3
            assert [x + y for x, y in zip(c1.genes, c2.genes)] == [1, 1, 1, 1]

    def test_rate_zero_never_crosses(self):
        a = codec.Genotype((0, 0, 0))
        b = codec.Genotype((1, 1, 1))
        rng = np.random.default_rng(2)
        assert engine.crossover(a, b, rng, rate=0.0) == (a, b)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            engine.crossover(
                codec.Genotype((1, 2)), codec.Genotype((1, 2, 3)), np.random.default_rng(0)
            )

    def test_offspring_stay_in_bounds(self, cs1):
        bounds = codec.gene_bounds(cs1)
        rng = np.random.default_rng(3)
        for _ in range(500):
            a = codec.random_genotype(bounds, rng)
            b = codec.random_genotype(bounds, rng)
            c1, c2 = engine.crossover(a, b, rng, rate=1.0)
            assert bounds.contains(c1) and bounds.contains(c2)


class TestMutate:
    def test_rate_zero_is_identity(self, cs1):
        bounds = codec.gene_bounds(cs1)
        rng = np.random.default_rng(0)
        g = codec.random_genotype(bounds, rng)
        assert engine.mutate(g, bounds, rng, rate=0.0) == g

    def test_degenerate_bounds_identity_at_full_rate(self):
        bounds = codec.GeneBounds((3, 8), (3, 8))
        g = codec.Genotype((3, 8))
        assert engine.mutate(g, bounds, np.random.default_rng(1), rate=1.0) == g

    def test_full_rate_resamples_uniformly(self):
        bounds = codec.GeneBounds((0,), (9,))
        rng = np.random.default_rng(2)
        counts = np.zeros(10, dtype=int)
        n = 10000
        g = codec.Genotype((0,))
        for _ in range(n):
            counts[engine.mutate(g, bounds, rng, rate=1.0).genes[0]] += 1
        assert counts.min() > n / 10 * 0.8
        assert counts.max() < n / 10 * 1.2

    def test_stays_in_bounds(self, cs1):
        bounds = codec.gene_bounds(cs1)
        rng = np.random.default_rng(3)
        g = codec.random_genotype(bounds, rng)
        for _ in range(200):
            g = engine.mutate(g, bounds, rng, rate=0.3)
            assert bounds.contains(g)


class TestCompiledProblem:
    def test_foreign_constraint_rejected(self, micro_instance):
        from perisched.errors import MissingEvent
        from perisched.model import ConstraintKind, Event, PeriodicConstraint

        alien = PeriodicConstraint(
            ConstraintKind.CONNECTION,
            Event.arrival("ghost", "A"),
            Event.departure("ghost", "B"),
            0,
            5,
        )
        with pytest.raises(MissingEvent):
            engine.CompiledProblem(micro_instance, [alien])

    def test_batch_decode_matches_scalar_decode(self, micro_instance):
        constraints = model.derive_bounds(micro_instance)
        problem = engine.CompiledProblem(micro_instance, constraints)
        rng = np.random.default_rng(5)
        genes = problem.random_population(40, rng)
        events = problem.decode_batch(genes)
        order = model.instance_events(micro_instance)
        for row in range(40):
            tt = codec.decode(codec.Genotype(tuple(int(v) for v in genes[row])), micro_instance)
            assert [tt.of(e) for e in order] == list(events[row])

    def test_batch_fitness_matches_scalar_evaluate(self, micro_instance):
        constraints = model.derive_bounds(micro_instance)
        problem = engine.CompiledProblem(micro_instance, constraints)
        rng = np.random.default_rng(6)
        genes = problem.random_population(60, rng)
        fitness = problem.fitness_batch(genes)
        for row in range(60):
            tt = codec.decode(codec.Genotype(tuple(int(v) for v in genes[row])), micro_instance)
            report = model.evaluate(tt, constraints, micro_instance.weights)
            assert report.weighted_fitness == fitness[row]

    def test_batch_fitness_matches_on_cs2(self, cs2):
        constraints = model.derive_bounds(cs2)
        problem = engine.CompiledProblem(cs2, constraints)
        rng = np.random.default_rng(7)
        genes = problem.random_population(20, rng)
        fitness = problem.fitness_batch(genes)
        for row in range(20):
            tt = codec.decode(codec.Genotype(tuple(int(v) for v in genes[row])), cs2)
            report = model.evaluate(tt, constraints, cs2.weights)
            assert report.weighted_fitness == fitness[row]


class TestRun:
    def test_unconstrained_instance_terminates_immediately(self):
        inst = make_instance(60, [Train("t", 3, (Trip("A", "B", 10, 12),))])
        result = engine.run(inst, model.derive_bounds(inst), tiny_config())
        assert result.terminated_by is Termination.OPTIMUM_FOUND
        assert result.best_fitness == 0
        assert result.evaluations_used == 20
        assert result.generations == 0

    def test_same_seed_reproduces_run(self, micro_instance):
        constraints = model.derive_bounds(micro_instance)
        config = tiny_config(max_evaluations=1500)
        a = engine.run(micro_instance, constraints, config)
        b = engine.run(micro_instance, constraints, config)
        assert a.best_genotype == b.best_genotype
        assert a.best_fitness == b.best_fitness
        assert a.evaluations_used == b.evaluations_used
        assert a.terminated_by == b.terminated_by
        assert a.generations == b.generations

    def test_budget_respected_exactly(self):
        inst = micro_unsat_connection()  # optimum 1, so the budget binds
        constraints = model.derive_bounds(inst)
        result = engine.run(inst, constraints, tiny_config(max_evaluations=333))
        assert result.terminated_by is Termination.EVAL_LIMIT
        assert result.evaluations_used == 333

    def test_elitist_best_never_worsens(self):
        inst = micro_three_trains()
        constraints = model.derive_bounds(inst)
        state = engine.init_state(inst, constraints, tiny_config(elite_count=1))
        history = [state.best_fitness]
        for _ in range(30):
            engine.step_generation(state)
            history.append(state.best_fitness)
        assert all(b <= a for a, b in zip(history, history[1:]))

    def test_fixed_point_without_variation(self):
        inst = micro_three_trains()
        constraints = model.derive_bounds(inst)
        config = tiny_config(
            crossover_rate=0.0, mutation_rate_per_gene=0.0, population_size=8
        )
        state = engine.init_state(inst, constraints, config)
        state.population = np.repeat(state.population[:1], 8, axis=0)
        state.fitness = state.problem.fitness_batch(state.population)
        before = state.population.copy()
        engine.step_generation(state)
        assert np.array_equal(state.population, before)

    def test_best_fitness_consistent_with_full_evaluation(self, micro_instance):
        constraints = model.derive_bounds(micro_instance)
        result = engine.run(micro_instance, constraints, tiny_config())
        tt = codec.decode(result.best_genotype, micro_instance)
        report = model.evaluate(tt, constraints, micro_instance.weights)
        assert report.weighted_fitness == result.best_fitness
        assert report.hard_violations == result.hard_violations
        assert report.soft_violations == result.soft_violations

    def test_matches_oracle_on_micro_instance(self):
        inst = micro_three_trains()
        constraints = model.derive_bounds(inst)
        best, _ = oracle.exhaustive_min(inst)
        hits = 0
        for seed in range(20):
            result = engine.run(
                inst, constraints, GaConfig(population_size=60, max_evaluations=50_000, seed=seed)
            )
            assert result.best_fitness >= best
            hits += result.best_fitness == best
        assert hits >= 18
