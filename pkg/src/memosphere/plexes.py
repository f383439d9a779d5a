"""Plexes: the unit of both genetic and memetic evolution.

A plex is an ordered program of actions an agent could carry out in one
50-time-unit day: gather visits (each naming a site and a search order)
plus unit-cost reproduce / learn-individually / learn-socially actions.
Genomes and memomes are both plex sets of exactly 50 plexes; the only
difference is who gets to change them.

Internally an action is packed into a single int (``site_id * 128 +
permutation_index`` for gathers, small negative codes otherwise) and
every plex caches its totals, so the mutation inner loop — the dominant
cost of a run — touches only ints and small tuples. The pretty
``Action`` objects exist for inspection and the wire format; the packed
codes are authoritative.

Plex ranking: higher total reward wins; ties prefer less gathering time
(time spent on reproduce/learn is fitness-neutral relative to idle
time), then fewer actions, then the stable slot order of the set.
"""
from __future__ import annotations

import functools
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from random import Random
from typing import Iterable, Sequence

from .foraging import (
    Environment,
    PERMUTATION_COUNT,
    PERMUTATION_INDEX,
    PERMUTATIONS,
    PREFIX_COVER,
)

#: Time units available to one agent per day.
DAY_BUDGET = 50

#: Plexes in every genome and memome.
PLEXES_PER_SET = 50

#: Size of the elite copied over the worst slots in one mutation event.
ELITE_COUNT = 5

#: Attempts before an infeasible edit degrades to a no-op.
EDIT_RETRY_LIMIT = 5

# Packed action codes: gathers are non-negative, the rest are sentinels.
_CODE_REPRODUCE = -1
_CODE_LEARN_INDIVIDUAL = -2
_CODE_LEARN_SOCIAL = -3
_SITE_SHIFT = 7  # code = site_id << 7 | perm_index (perm_index < 128)


class ActionKind(Enum):
    GATHER = "G"
    REPRODUCE = "R"
    LEARN_INDIVIDUAL = "LI"
    LEARN_SOCIAL = "LS"


_KIND_BY_CODE = {
    _CODE_REPRODUCE: ActionKind.REPRODUCE,
    _CODE_LEARN_INDIVIDUAL: ActionKind.LEARN_INDIVIDUAL,
    _CODE_LEARN_SOCIAL: ActionKind.LEARN_SOCIAL,
}
_CODE_BY_KIND = {v: k for k, v in _KIND_BY_CODE.items()}


@dataclass(frozen=True)
class Action:
    """One step of a daily program, in unpacked form."""

    kind: ActionKind
    site_id: int | None = None
    order: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind is ActionKind.GATHER:
            if self.site_id is None or self.order is None:
                raise ValueError("gather actions need a site_id and an order")
            if tuple(self.order) not in PERMUTATION_INDEX:
                raise ValueError(f"{self.order!r} is not a search order")
        elif self.site_id is not None or self.order is not None:
            raise ValueError(f"{self.kind} takes no site or order")

    def time_cost(self, env: Environment) -> int:
        if self.kind is ActionKind.GATHER:
            perm_index = PERMUTATION_INDEX[tuple(self.order)]
            return PREFIX_COVER[perm_index][env.site_masks[self.site_id]]
        return 1

    def to_code(self) -> int:
        if self.kind is ActionKind.GATHER:
            return (self.site_id << _SITE_SHIFT) | PERMUTATION_INDEX[tuple(self.order)]
        return _CODE_BY_KIND[self.kind]

    @classmethod
    def from_code(cls, code: int) -> "Action":
        if code >= 0:
            return cls(
                ActionKind.GATHER,
                site_id=code >> _SITE_SHIFT,
                order=PERMUTATIONS[code & 127],
            )
        return cls(_KIND_BY_CODE[code])

    def to_wire(self) -> list:
        if self.kind is ActionKind.GATHER:
            return [self.kind.value, self.site_id, list(self.order)]
        return [self.kind.value]

    @classmethod
    def from_wire(cls, data: Sequence) -> "Action":
        kind = ActionKind(data[0])
        if kind is ActionKind.GATHER:
            return cls(kind, site_id=data[1], order=tuple(data[2]))
        return cls(kind)


@functools.total_ordering
@dataclass(frozen=True)
class FitnessKey:
    """Total order on plexes; comparisons read as "is fitter than"."""

    reward: int
    gather_time: int
    action_count: int

    def _order(self) -> tuple[int, int, int]:
        return (self.reward, -self.gather_time, -self.action_count)

    def __lt__(self, other: "FitnessKey") -> bool:
        return self._order() < other._order()


def _rank_key(reward: int, gather_time: int, action_count: int) -> int:
    # Single-int encoding of FitnessKey with SMALLER = fitter, so plex
    # lists sorted ascending put the best plex first. Each component
    # fits in 8 bits (all are bounded by DAY_BUDGET).
    return ((DAY_BUDGET - reward) << 16) | (gather_time << 8) | action_count


class Plex:
    """An immutable daily action program with cached totals.

    Build via :meth:`from_codes` or :meth:`from_actions`; the raw
    constructor trusts its arguments and is reserved for the mutation
    inner loop.
    """

    __slots__ = (
        "codes",
        "total_cost",
        "reward",
        "gather_time",
        "n_reproduce",
        "n_learn_ind",
        "n_learn_soc",
        "rank_key",
    )

    def __init__(self, codes, total_cost, reward, gather_time, n_reproduce,
                 n_learn_ind, n_learn_soc):
        self.codes = codes
        self.total_cost = total_cost
        self.reward = reward
        self.gather_time = gather_time
        self.n_reproduce = n_reproduce
        self.n_learn_ind = n_learn_ind
        self.n_learn_soc = n_learn_soc
        self.rank_key = _rank_key(reward, gather_time, len(codes))

    @classmethod
    def from_codes(cls, codes: Iterable[int], env: Environment) -> "Plex":
        codes = tuple(codes)
        masks = env.site_masks
        rewards = env.site_rewards
        total = reward = gather_time = n_r = n_li = n_ls = 0
        seen_sites = set()
        for code in codes:
            if code >= 0:
                site = code >> _SITE_SHIFT
                if site >= len(masks):
                    raise ValueError(f"gather references unknown site {site}")
                if site in seen_sites:
                    raise ValueError(f"site {site} gathered twice in one plex")
                seen_sites.add(site)
                cost = PREFIX_COVER[code & 127][masks[site]]
                total += cost
                gather_time += cost
                reward += rewards[site]
            else:
                total += 1
                if code == _CODE_REPRODUCE:
                    n_r += 1
                elif code == _CODE_LEARN_INDIVIDUAL:
                    n_li += 1
                elif code == _CODE_LEARN_SOCIAL:
                    n_ls += 1
                else:
                    raise ValueError(f"unknown action code {code}")
        if total > DAY_BUDGET:
            raise ValueError(f"plex costs {total} > day budget {DAY_BUDGET}")
        return cls(codes, total, reward, gather_time, n_r, n_li, n_ls)

    @classmethod
    def from_actions(cls, actions: Iterable[Action], env: Environment) -> "Plex":
        return cls.from_codes((a.to_code() for a in actions), env)

    @property
    def actions(self) -> tuple[Action, ...]:
        return tuple(Action.from_code(c) for c in self.codes)

    @property
    def action_count(self) -> int:
        return len(self.codes)

    @property
    def n_gather(self) -> int:
        return len(self.codes) - self.n_reproduce - self.n_learn_ind - self.n_learn_soc

    def gathered_sites(self) -> frozenset[int]:
        return frozenset(c >> _SITE_SHIFT for c in self.codes if c >= 0)

    def fitness(self) -> FitnessKey:
        return FitnessKey(self.reward, self.gather_time, len(self.codes))

    def to_wire(self) -> list:
        return [Action.from_code(c).to_wire() for c in self.codes]

    @classmethod
    def from_wire(cls, data: Sequence, env: Environment) -> "Plex":
        return cls.from_actions((Action.from_wire(a) for a in data), env)

    def __eq__(self, other) -> bool:
        return isinstance(other, Plex) and self.codes == other.codes

    def __hash__(self) -> int:
        return hash(self.codes)

    def __repr__(self) -> str:
        return (
            f"Plex(reward={self.reward}, cost={self.total_cost}, "
            f"actions={len(self.codes)})"
        )


def plex_fitness(plex: Plex, env: Environment) -> FitnessKey:
    """Recompute a plex's fitness from its actions.

    Deliberately ignores the cached totals so tests can cross-check the
    incremental bookkeeping done by the mutation loop.
    """
    masks = env.site_masks
    rewards = env.site_rewards
    reward = gather_time = 0
    for code in plex.codes:
        if code >= 0:
            reward += rewards[code >> _SITE_SHIFT]
            gather_time += PREFIX_COVER[code & 127][masks[code >> _SITE_SHIFT]]
    return FitnessKey(reward, gather_time, len(plex.codes))


@dataclass(frozen=True)
class MutationOptions:
    """Tunable details of the single-edit mutation operator.

    ``strategy_change`` picks how a gather's search order is rewritten:
    ``"resample"`` draws a fresh uniform permutation, ``"transpose"``
    swaps two positions of the current one (small-step variant).
    """

    strategy_change: str = "resample"

    def __post_init__(self):
        if self.strategy_change not in ("resample", "transpose"):
            raise ValueError(f"unknown strategy_change {self.strategy_change!r}")


DEFAULT_MUTATION = MutationOptions()


def _transposed_perm_index(perm_index: int, u1: float, u2: float) -> int:
    order = list(PERMUTATIONS[perm_index])
    i = int(u1 * 5)
    j = int(u2 * 4)
    if j >= i:
        j += 1
    order[i], order[j] = order[j], order[i]
    return PERMUTATION_INDEX[tuple(order)]


def mutate_plex(plex: Plex, env: Environment, rng: Random,
                options: MutationOptions = DEFAULT_MUTATION) -> Plex:
    """Apply one uniformly chosen edit to a copy of ``plex``.

    The three edit classes — rewrite one gather's search order, add a
    random action, remove a random action — are drawn uniformly. An edit
    that cannot produce a valid plex (budget overflow, site already
    gathered, nothing to edit) is redrawn up to ``EDIT_RETRY_LIMIT``
    times and then degrades to a no-op, returning the plex unchanged.
    """
    random = rng.random
    codes = plex.codes
    n = len(codes)
    edit = int(random() * 3)

    if edit == 0:
        # Rewrite the search order at one randomly chosen gather.
        n_gather = n - plex.n_reproduce - plex.n_learn_ind - plex.n_learn_soc
        if n_gather == 0:
            return plex
        masks = env.site_masks
        transpose = options.strategy_change == "transpose"
        for _ in range(EDIT_RETRY_LIMIT):
            pick = int(random() * n_gather)
            pos = 0
            for pos, code in enumerate(codes):
                if code >= 0:
                    if pick == 0:
                        break
                    pick -= 1
            old_code = codes[pos]
            site = old_code >> _SITE_SHIFT
            if transpose:
                perm = _transposed_perm_index(old_code & 127, random(), random())
            else:
                perm = int(random() * PERMUTATION_COUNT)
            mask = masks[site]
            delta = PREFIX_COVER[perm][mask] - PREFIX_COVER[old_code & 127][mask]
            if plex.total_cost + delta <= DAY_BUDGET:
                new_codes = codes[:pos] + ((site << _SITE_SHIFT) | perm,) + codes[pos + 1:]
                return Plex(
                    new_codes, plex.total_cost + delta, plex.reward,
                    plex.gather_time + delta, plex.n_reproduce,
                    plex.n_learn_ind, plex.n_learn_soc,
                )
        return plex

    if edit == 1:
        # Insert a randomly generated action at a random position.
        masks = env.site_masks
        rewards = env.site_rewards
        site_count = len(masks)
        budget_left = DAY_BUDGET - plex.total_cost
        for _ in range(EDIT_RETRY_LIMIT):
            kind = int(random() * 4)
            if kind == 0:
                site = int(random() * site_count)
                used = False
                for code in codes:
                    if code >= 0 and code >> _SITE_SHIFT == site:
                        used = True
                        break
                if used:
                    continue
                perm = int(random() * PERMUTATION_COUNT)
                cost = PREFIX_COVER[perm][masks[site]]
                if cost > budget_left:
                    continue
                pos = int(random() * (n + 1))
                new_codes = codes[:pos] + ((site << _SITE_SHIFT) | perm,) + codes[pos:]
                return Plex(
                    new_codes, plex.total_cost + cost, plex.reward + rewards[site],
                    plex.gather_time + cost, plex.n_reproduce,
                    plex.n_learn_ind, plex.n_learn_soc,
                )
            if budget_left < 1:
                continue
            pos = int(random() * (n + 1))
            code = -kind
            new_codes = codes[:pos] + (code,) + codes[pos:]
            return Plex(
                new_codes, plex.total_cost + 1, plex.reward, plex.gather_time,
                plex.n_reproduce + (kind == 1),
                plex.n_learn_ind + (kind == 2),
                plex.n_learn_soc + (kind == 3),
            )
        return plex

    # Remove a randomly chosen action.
    if n == 0:
        return plex
    pos = int(random() * n)
    code = codes[pos]
    new_codes = codes[:pos] + codes[pos + 1:]
    if code >= 0:
        site = code >> _SITE_SHIFT
        cost = PREFIX_COVER[code & 127][env.site_masks[site]]
        return Plex(
            new_codes, plex.total_cost - cost, plex.reward - env.site_rewards[site],
            plex.gather_time - cost, plex.n_reproduce, plex.n_learn_ind,
            plex.n_learn_soc,
        )
    return Plex(
        new_codes, plex.total_cost - 1, plex.reward, plex.gather_time,
        plex.n_reproduce - (code == _CODE_REPRODUCE),
        plex.n_learn_ind - (code == _CODE_LEARN_INDIVIDUAL),
        plex.n_learn_soc - (code == _CODE_LEARN_SOCIAL),
    )


class PlexSet:
    """Exactly 50 plexes kept in fitness order (best first, stable ties).

    The maintained ordering is the set's slot order: "best five" always
    means the first five slots and "worst five" the last five, with
    newly inserted plexes placed after existing plexes of equal rank.
    """

    __slots__ = ("plexes", "keys")

    def __init__(self, plexes: list[Plex], keys: list[int]):
        self.plexes = plexes
        self.keys = keys

    @classmethod
    def from_plexes(cls, plexes: Iterable[Plex]) -> "PlexSet":
        ordered = sorted(plexes, key=lambda p: p.rank_key)
        if len(ordered) != PLEXES_PER_SET:
            raise ValueError(f"a plex set holds exactly {PLEXES_PER_SET} plexes")
        return cls(ordered, [p.rank_key for p in ordered])

    def copy(self) -> "PlexSet":
        return PlexSet(list(self.plexes), list(self.keys))

    @property
    def best(self) -> Plex:
        return self.plexes[0]

    def best_n(self, n: int) -> list[Plex]:
        return self.plexes[:n]

    def max_fitness(self) -> FitnessKey:
        return self.plexes[0].fitness()

    def mutation_event(self, env: Environment, rng: Random,
                       options: MutationOptions = DEFAULT_MUTATION) -> None:
        """One in-place mutation event: elite copies replace the worst.

        The five fittest plexes stay untouched; mutated copies of them
        overwrite the five least-fit slots.
        """
        plexes = self.plexes
        keys = self.keys
        elite = plexes[:ELITE_COUNT]
        del plexes[PLEXES_PER_SET - ELITE_COUNT:]
        del keys[PLEXES_PER_SET - ELITE_COUNT:]
        for parent in elite:
            child = mutate_plex(parent, env, rng, options)
            key = child.rank_key
            pos = bisect_right(keys, key)
            keys.insert(pos, key)
            plexes.insert(pos, child)

    def replace_worst(self, newcomers: Sequence[Plex]) -> None:
        """Overwrite the least-fit slots with ``newcomers`` (re-ranked)."""
        plexes = self.plexes
        keys = self.keys
        del plexes[PLEXES_PER_SET - len(newcomers):]
        del keys[PLEXES_PER_SET - len(newcomers):]
        for plex in newcomers:
            pos = bisect_right(keys, plex.rank_key)
            keys.insert(pos, plex.rank_key)
            plexes.insert(pos, plex)

    def to_wire(self) -> list:
        return [p.to_wire() for p in self.plexes]

    @classmethod
    def from_wire(cls, data: Sequence, env: Environment) -> "PlexSet":
        plexes = [Plex.from_wire(entry, env) for entry in data]
        if len(plexes) != PLEXES_PER_SET:
            raise ValueError(f"a plex set holds exactly {PLEXES_PER_SET} plexes")
        # Wire order is the maintained slot order; do not re-sort, or a
        # record round-trip could reorder equal-rank plexes.
        return cls(plexes, [p.rank_key for p in plexes])

    def __eq__(self, other) -> bool:
        return isinstance(other, PlexSet) and self.plexes == other.plexes

    def __hash__(self):
        raise TypeError("PlexSet is mutable and unhashable")

    def __repr__(self) -> str:
        best = self.plexes[0]
        return f"PlexSet(best_reward={best.reward}, best_actions={len(best.codes)})"


def mutate_plexset(plexset: PlexSet, env: Environment, rng: Random,
                   options: MutationOptions = DEFAULT_MUTATION) -> PlexSet:
    """Pure-function form of one mutation event; the input is untouched."""
    result = plexset.copy()
    result.mutation_event(env, rng, options)
    return result


def random_initial_plexset(env: Environment, rng: Random) -> PlexSet:
    """A founder plex set: every plex is one random gather, nothing else."""
    random = rng.random
    site_count = len(env.site_masks)
    plexes = []
    for _ in range(PLEXES_PER_SET):
        site = int(random() * site_count)
        perm = int(random() * PERMUTATION_COUNT)
        plexes.append(Plex.from_codes(((site << _SITE_SHIFT) | perm,), env))
    return PlexSet.from_plexes(plexes)
