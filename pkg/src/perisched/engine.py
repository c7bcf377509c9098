"""Genetic algorithm over timetable genotypes.

One run keeps a fixed-size population of integer genotypes, evaluates
every new individual (counting evaluations), and replaces the population
generationally: the best few individuals survive as elites, the rest are
offspring of tournament-selected parents recombined by one-point
crossover and per-gene mutation. Running and dwell windows hold by
construction of the encoding, so an individual's fitness is the weighted
violation count of the pairwise families only (headway, single-track,
connection); zero fitness is a timetable satisfying everything.

The generation step operates on the whole population as numpy arrays; the
single-individual operators (`select_parent`, `crossover`, `mutate`)
implement the same semantics one individual at a time.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import codec, model
from .errors import ConfigInvalid, LengthMismatch, MissingEvent


class Termination(Enum):
    OPTIMUM_FOUND = "optimum_found"
    EVAL_LIMIT = "eval_limit"


@dataclass(frozen=True)
class GaConfig:
    """Knobs of one GA run. ``mutation_rate_per_gene=None`` resolves to
    one expected mutation per genotype (rate 1/length)."""

    population_size: int = 300
    max_evaluations: int = 200_000
    crossover_rate: float = 0.9
    mutation_rate_per_gene: float | None = None
    tournament_size: int = 2
    elite_count: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.population_size < 2:
            raise ConfigInvalid(f"population_size must be >= 2, got {self.population_size}")
        if self.max_evaluations < self.population_size:
            raise ConfigInvalid(
                f"max_evaluations ({self.max_evaluations}) must cover at least "
                f"one full population ({self.population_size})"
            )
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigInvalid(f"crossover_rate {self.crossover_rate} not in [0, 1]")
        if self.mutation_rate_per_gene is not None and not (
            0.0 <= self.mutation_rate_per_gene <= 1.0
        ):
            raise ConfigInvalid(
                f"mutation_rate_per_gene {self.mutation_rate_per_gene} not in [0, 1]"
            )
        if self.tournament_size < 1:
            raise ConfigInvalid(f"tournament_size must be >= 1, got {self.tournament_size}")
        if not 0 <= self.elite_count < self.population_size:
            raise ConfigInvalid(
                f"elite_count {self.elite_count} must lie in [0, population_size)"
            )


@dataclass(frozen=True)
class RunResult:
    best_genotype: codec.Genotype
    best_fitness: int | float
    hard_violations: int
    soft_violations: int
    evaluations_used: int
    wall_time: float
    terminated_by: Termination
    generations: int
    report: model.EvaluationReport


class CompiledProblem:
    """Array form of an instance plus constraint set, for evaluating whole
    populations at once.

    Event times of a decoded genotype are exactly the within-section
    prefix sums of its genes reduced mod the period, so batch decoding is
    one cumulative sum plus a per-section rebase. Pairwise constraints
    become index/bound arrays over the event columns.
    """

    def __init__(self, instance: model.Instance, constraints: Sequence[model.PeriodicConstraint]):
        bounds = codec.gene_bounds(instance)
        self.period = instance.period
        self.gene_lo = np.asarray(bounds.lo, dtype=np.int64)
        self.gene_hi = np.asarray(bounds.hi, dtype=np.int64)
        self.length = len(bounds)

        # column index of each event = its gene position in the layout
        event_col: dict[model.Event, int] = {
            e: col for col, e in enumerate(model.instance_events(instance))
        }
        # rebase column: prefix sums restart at every train section
        base = np.empty(self.length, dtype=np.int64)
        pos = 0
        for train in instance.trains:
            n = 2 * len(train.route)
            base[pos : pos + n] = pos - 1
            pos += n
        self.rebase_col = base

        pair_kinds = (
            model.ConstraintKind.HEADWAY,
            model.ConstraintKind.SINGLE_TRACK,
            model.ConstraintKind.CONNECTION,
        )
        pairs = [c for c in constraints if c.kind in pair_kinds]
        self.pair_constraints = tuple(pairs)
        for c in pairs:
            for event in (c.earlier, c.later):
                if event not in event_col:
                    raise MissingEvent(
                        f"constraint references {event.kind.value} of "
                        f"{event.train} at {event.station}, which this "
                        f"instance never schedules"
                    )
        self.pair_x = np.asarray([event_col[c.earlier] for c in pairs], dtype=np.int64)
        self.pair_y = np.asarray([event_col[c.later] for c in pairs], dtype=np.int64)
        self.pair_lo = np.asarray([c.lo for c in pairs], dtype=np.int64)
        self.pair_width = np.asarray([c.hi - c.lo for c in pairs], dtype=np.int64)
        weight_values = [instance.weights.weight_for(c.kind) for c in pairs]
        self.pair_weight = np.asarray(weight_values)
        self._int_weights = self.pair_weight.dtype.kind in "iu"

    def decode_batch(self, genes: np.ndarray) -> np.ndarray:
        """Event-time matrix (rows = individuals, columns = events)."""
        full = np.cumsum(genes, axis=1)
        rebased = full.copy()
        mask = self.rebase_col >= 0
        rebased[:, mask] -= full[:, self.rebase_col[mask]]
        return rebased % self.period

    def fitness_batch(self, genes: np.ndarray) -> np.ndarray:
        """Pairwise-family weighted violation count per individual."""
        events = self.decode_batch(genes)
        if len(self.pair_x) == 0:
            dtype = np.int64 if self._int_weights else np.float64
            return np.zeros(len(genes), dtype=dtype)
        d = (events[:, self.pair_y] - events[:, self.pair_x]) % self.period
        violated = ((d - self.pair_lo) % self.period) > self.pair_width
        acc = violated.astype(np.int64 if self._int_weights else np.float64)
        return acc @ self.pair_weight

    def random_population(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(
            self.gene_lo, self.gene_hi + 1, size=(size, self.length), dtype=np.int64
        )


@dataclass
class GaState:
    """Mutable state of a run between generation steps."""

    config: GaConfig
    problem: CompiledProblem
    rng: np.random.Generator
    population: np.ndarray
    fitness: np.ndarray
    evaluations_used: int
    generation: int
    best_genes: np.ndarray
    best_fitness: int | float

    def _note_best(self) -> None:
        idx = int(np.argmin(self.fitness))
        if self.fitness[idx] < self.best_fitness:
            self.best_fitness = self.fitness[idx].item()
            self.best_genes = self.population[idx].copy()


def init_state(
    instance: model.Instance,
    constraints: Sequence[model.PeriodicConstraint],
    config: GaConfig,
) -> GaState:
    """Random initial population, fully evaluated."""
    config.validate()
    problem = CompiledProblem(instance, constraints)
    rng = np.random.default_rng(config.seed)
    population = problem.random_population(config.population_size, rng)
    fitness = problem.fitness_batch(population)
    state = GaState(
        config=config,
        problem=problem,
        rng=rng,
        population=population,
        fitness=fitness,
        evaluations_used=config.population_size,
        generation=0,
        best_genes=population[0].copy(),
        best_fitness=fitness[0].item(),
    )
    state._note_best()
    return state


def _tournament_winners(
    fitness: np.ndarray, count: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Indices of `count` tournament winners; lower fitness wins, equal
    fitness resolved toward the lower population index."""
    contestants = rng.integers(0, len(fitness), size=(count, size))
    winner = contestants[:, 0]
    winner_fit = fitness[winner]
    for k in range(1, size):
        rival = contestants[:, k]
        rival_fit = fitness[rival]
        better = (rival_fit < winner_fit) | (
            (rival_fit == winner_fit) & (rival < winner)
        )
        winner = np.where(better, rival, winner)
        winner_fit = np.where(better, rival_fit, winner_fit)
    return winner


def step_generation(state: GaState) -> GaState:
    """Advance one generation: keep the elites, refill with offspring.

    Offspring evaluation stops at the evaluation budget; a truncated final
    generation keeps only its evaluated offspring, so the counter never
    passes ``max_evaluations``.
    """
    cfg = state.config
    problem = state.problem
    L = problem.length

    elite_idx = np.argsort(state.fitness, kind="stable")[: cfg.elite_count]
    n_off = cfg.population_size - cfg.elite_count
    n_pairs = (n_off + 1) // 2

    winners = _tournament_winners(
        state.fitness, 2 * n_pairs, cfg.tournament_size, state.rng
    )
    parent_a = state.population[winners[:n_pairs]]
    parent_b = state.population[winners[n_pairs:]]

    crossed = state.rng.random(n_pairs) < cfg.crossover_rate
    cuts = state.rng.integers(1, L, size=n_pairs)
    tail = (np.arange(L)[None, :] >= cuts[:, None]) & crossed[:, None]
    child_a = np.where(tail, parent_b, parent_a)
    child_b = np.where(tail, parent_a, parent_b)
    offspring = np.concatenate([child_a, child_b])[:n_off]

    rate = (
        cfg.mutation_rate_per_gene
        if cfg.mutation_rate_per_gene is not None
        else 1.0 / L
    )
    flip = state.rng.random(offspring.shape) < rate
    rows, cols = np.nonzero(flip)
    if len(rows):
        offspring[rows, cols] = state.rng.integers(
            problem.gene_lo[cols], problem.gene_hi[cols] + 1
        )

    budget_left = max(0, cfg.max_evaluations - state.evaluations_used)
    kept = offspring[: min(n_off, budget_left)]
    kept_fitness = problem.fitness_batch(kept)

    state.population = np.concatenate([state.population[elite_idx], kept])
    state.fitness = np.concatenate([state.fitness[elite_idx], kept_fitness])
    state.evaluations_used += len(kept)
    state.generation += 1
    state._note_best()
    return state


def run(
    instance: model.Instance,
    constraints: Sequence[model.PeriodicConstraint],
    config: GaConfig,
) -> RunResult:
    """One full GA run, deterministic for a given seed.

    Stops as soon as some evaluated individual violates nothing
    (``OPTIMUM_FOUND``) or the evaluation counter reaches the budget
    (``EVAL_LIMIT``). The reported best is re-checked against the scalar
    evaluator over the complete constraint set; a mismatch would mean the
    batched fitness diverged and raises immediately.
    """
    start = time.perf_counter()
    state = init_state(instance, constraints, config)
    while state.best_fitness > 0 and state.evaluations_used < config.max_evaluations:
        step_generation(state)

    best_genotype = codec.Genotype(tuple(int(g) for g in state.best_genes))
    timetable = codec.decode(best_genotype, instance)
    report = model.evaluate(timetable, constraints, instance.weights)
    if report.weighted_fitness != state.best_fitness:
        raise AssertionError(
            f"batched fitness {state.best_fitness} disagrees with canonical "
            f"evaluation {report.weighted_fitness}"
        )
    terminated = (
        Termination.OPTIMUM_FOUND if state.best_fitness == 0 else Termination.EVAL_LIMIT
    )
    return RunResult(
        best_genotype=best_genotype,
        best_fitness=state.best_fitness,
        hard_violations=report.hard_violations,
        soft_violations=report.soft_violations,
        evaluations_used=state.evaluations_used,
        wall_time=time.perf_counter() - start,
        terminated_by=terminated,
        generations=state.generation,
        report=report,
    )


def select_parent(
    population: Sequence[codec.Genotype],
    fitnesses: Sequence[int | float],
    rng: np.random.Generator,
    tournament_size: int = 2,
) -> codec.Genotype:
    """Tournament pick: draw `tournament_size` contestants uniformly with
    replacement, return the fittest (ties to the lower index)."""
    if not population:
        raise ValueError("empty population")
    contestants = rng.integers(0, len(population), size=tournament_size)
    winner = int(contestants[0])
    for c in contestants[1:]:
        c = int(c)
        if fitnesses[c] < fitnesses[winner] or (
            fitnesses[c] == fitnesses[winner] and c < winner
        ):
            winner = c
    return population[winner]


def crossover(
    a: codec.Genotype,
    b: codec.Genotype,
    rng: np.random.Generator,
    rate: float = 0.9,
) -> tuple[codec.Genotype, codec.Genotype]:
    """One-point crossover with probability `rate`, else clones.

    The cut position is uniform over [1, len-1], so offspring always mix
    both parents; gene positions keep their own bounds, hence in-bounds
    parents yield in-bounds children.
    """
    if len(a) != len(b):
        raise LengthMismatch(f"genotype lengths differ: {len(a)} vs {len(b)}")
    if rng.random() >= rate or len(a) < 2:
        return a, b
    cut = int(rng.integers(1, len(a)))
    child_a = a.genes[:cut] + b.genes[cut:]
    child_b = b.genes[:cut] + a.genes[cut:]
    return codec.Genotype(child_a), codec.Genotype(child_b)


def mutate(
    g: codec.Genotype,
    bounds: codec.GeneBounds,
    rng: np.random.Generator,
    rate: float,
) -> codec.Genotype:
    """Resample each gene with probability `rate`, uniformly within its
    own bounds."""
    genes = list(g.genes)
    for pos in range(len(genes)):
        if rng.random() < rate:
            genes[pos] = int(rng.integers(bounds.lo[pos], bounds.hi[pos] + 1))
    return codec.Genotype(tuple(genes))
