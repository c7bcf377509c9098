"""Integer-vector encoding of candidate timetables.

A genotype concatenates one section per train. A section for a train
with n trips holds 2n genes::

    [first_departure, running_1, dwell_1, running_2, dwell_2, ..., running_n]

The first gene may take any value in ``[0, period - 1]``; every running
and dwell gene is confined to its own window from the instance. Decoding
accumulates the section left to right and reduces each event time mod the
period, so a decoded timetable can never violate a running or dwell
constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfBoundsGene
from .model import Event, Instance, Timetable

__all__ = [
    "GeneBounds",
    "Genotype",
    "gene_bounds",
    "section_offsets",
    "decode",
    "random_genotype",
]


@dataclass(frozen=True)
class Genotype:
    genes: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.genes)


@dataclass(frozen=True)
class GeneBounds:
    """Inclusive per-gene ranges, parallel to the genotype layout."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.lo)

    def contains(self, genotype: Genotype) -> bool:
        return len(genotype) == len(self.lo) and all(
            lo <= g <= hi for g, lo, hi in zip(genotype.genes, self.lo, self.hi)
        )

    def check(self, genotype: Genotype) -> None:
        if len(genotype) != len(self.lo):
            raise OutOfBoundsGene(
                f"genotype has {len(genotype)} genes, layout needs {len(self.lo)}"
            )
        for pos, (g, lo, hi) in enumerate(zip(genotype.genes, self.lo, self.hi)):
            if not lo <= g <= hi:
                raise OutOfBoundsGene(f"gene {pos} = {g} outside [{lo}, {hi}]")


def section_offsets(instance: Instance) -> tuple[int, ...]:
    """Start index of each train's section, in instance train order."""
    offsets = []
    pos = 0
    for train in instance.trains:
        offsets.append(pos)
        pos += 2 * len(train.route)
    return tuple(offsets)


def gene_bounds(instance: Instance) -> GeneBounds:
    """Per-gene ranges for an instance, in instance train order."""
    lo: list[int] = []
    hi: list[int] = []
    for train in instance.trains:
        lo.append(0)
        hi.append(instance.period - 1)
        last = len(train.route) - 1
        for k, trip in enumerate(train.route):
            lo.append(trip.running_lo)
            hi.append(trip.running_hi)
            if k < last:
                lo.append(trip.dwell_after_lo)
                hi.append(trip.dwell_after_hi)
    return GeneBounds(tuple(lo), tuple(hi))


def decode(genotype: Genotype, instance: Instance) -> Timetable:
    """Turn a genotype into the timetable it encodes.

    Within each train section the genes are accumulated in order and every
    intermediate sum, reduced mod the period, becomes the next event time.
    In-bounds genotypes therefore satisfy all running and dwell windows by
    construction.
    """
    gene_bounds(instance).check(genotype)
    T = instance.period
    genes = genotype.genes
    times: dict[Event, int] = {}
    pos = 0
    for train in instance.trains:
        clock = genes[pos]
        pos += 1
        times[Event.departure(train.id, train.route[0].from_station)] = clock % T
        last = len(train.route) - 1
        for k, trip in enumerate(train.route):
            clock += genes[pos]
            pos += 1
            times[Event.arrival(train.id, trip.to_station)] = clock % T
            if k < last:
                clock += genes[pos]
                pos += 1
                times[Event.departure(train.id, trip.to_station)] = clock % T
    return Timetable(T, times)


def random_genotype(bounds: GeneBounds, rng: np.random.Generator) -> Genotype:
    """Uniform in-bounds genotype; same generator state, same genes."""
    lo = np.asarray(bounds.lo)
    hi = np.asarray(bounds.hi)
    genes = rng.integers(lo, hi + 1)
    return Genotype(tuple(int(g) for g in genes))
