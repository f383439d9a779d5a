"""The foraging world: resource sites and the permutation-cover cost model.

A resource site hides its reward in one to three of five possible
locations. An agent probes locations in a chosen order (a permutation of
all five) and stops once every stocked location has been visited; the
time cost of the visit is the length of that covering prefix. Perfect
knowledge of a site therefore gathers at cost equal to the reward, and
the worst order pays 5.

Because there are only 120 search orders and 31 nonempty location
subsets, every cost is precomputed once into a lookup table; the rest of
the package refers to orders by their index into ``PERMUTATIONS`` and to
location sets by 5-bit masks.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from random import Random
from typing import Iterable, Sequence

from .errors import ConfigurationError

LOCATIONS = (1, 2, 3, 4, 5)

#: All 120 search orders, lexicographically sorted. Index = wire format.
PERMUTATIONS: tuple[tuple[int, ...], ...] = tuple(itertools.permutations(LOCATIONS))
PERMUTATION_INDEX: dict[tuple[int, ...], int] = {p: i for i, p in enumerate(PERMUTATIONS)}
PERMUTATION_COUNT = len(PERMUTATIONS)


def locations_to_mask(locations: Iterable[int]) -> int:
    mask = 0
    for loc in locations:
        mask |= 1 << (loc - 1)
    return mask


def mask_to_locations(mask: int) -> frozenset[int]:
    return frozenset(loc for loc in LOCATIONS if mask & (1 << (loc - 1)))


def _build_cover_table() -> tuple[tuple[int, ...], ...]:
    # cover[perm_index][mask] = shortest prefix of the permutation whose
    # elements cover every location in the mask (0 for the empty mask).
    table = []
    for perm in PERMUTATIONS:
        row = [0] * 32
        for mask in range(1, 32):
            seen = 0
            for depth, loc in enumerate(perm, start=1):
                seen |= 1 << (loc - 1)
                if mask & ~seen == 0:
                    row[mask] = depth
                    break
        table.append(tuple(row))
    return tuple(table)


#: PREFIX_COVER[perm_index][location_mask] -> time units to cover the mask.
PREFIX_COVER: tuple[tuple[int, ...], ...] = _build_cover_table()


@dataclass(frozen=True)
class ResourceSite:
    """One foraging site: a hidden subset of the five locations."""

    site_id: int
    locations: frozenset[int]

    def __post_init__(self):
        if not self.locations:
            raise ValueError("site must stock at least one location")
        if not self.locations <= set(LOCATIONS):
            raise ValueError(f"locations must be drawn from {LOCATIONS}")
        if len(self.locations) > 3:
            raise ValueError("sites stock at most three locations")

    @property
    def reward(self) -> int:
        return len(self.locations)

    @property
    def mask(self) -> int:
        return locations_to_mask(self.locations)


@dataclass(frozen=True)
class Environment:
    """The full set of sites for one run; immutable once generated."""

    sites: tuple[ResourceSite, ...]
    # Flat per-site views used by the hot paths.
    site_masks: tuple[int, ...] = field(init=False, repr=False)
    site_rewards: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        for idx, site in enumerate(self.sites):
            if site.site_id != idx:
                raise ValueError("site_id must equal the site's index")
        object.__setattr__(self, "site_masks", tuple(s.mask for s in self.sites))
        object.__setattr__(self, "site_rewards", tuple(s.reward for s in self.sites))

    @property
    def site_count(self) -> int:
        return len(self.sites)

    @property
    def total_reward(self) -> int:
        return sum(self.site_rewards)

    def to_dict(self) -> list[dict]:
        return [
            {"site_id": s.site_id, "locations": sorted(s.locations)}
            for s in self.sites
        ]

    @classmethod
    def from_dict(cls, data: Sequence[dict]) -> "Environment":
        return cls(
            tuple(
                ResourceSite(entry["site_id"], frozenset(entry["locations"]))
                for entry in data
            )
        )


def gather_cost(order: Sequence[int], site: ResourceSite) -> int:
    """Time units to gather ``site`` when probing locations in ``order``.

    Equals the shortest prefix of ``order`` covering the site's stocked
    locations; always within [site.reward, 5].
    """
    perm = tuple(order)
    try:
        perm_index = PERMUTATION_INDEX[perm]
    except KeyError:
        raise ValueError(f"{order!r} is not a permutation of {LOCATIONS}") from None
    return PREFIX_COVER[perm_index][site.mask]


def optimal_site_cost(site: ResourceSite) -> int:
    """Lower bound on gather_cost over all orders: the reward itself."""
    return site.reward


# Masks of every location subset of a given size, in ascending mask order,
# so a single uniform draw picks a site layout of known reward.
_MASKS_BY_REWARD: dict[int, tuple[int, ...]] = {
    k: tuple(m for m in range(1, 32) if bin(m).count("1") == k) for k in (1, 2, 3)
}

#: Minimum total reward an environment must offer: a full gathering day.
MIN_TOTAL_REWARD = 50


def generate_environment(
    rng: Random,
    site_count: int = 50,
    reward_choices: Sequence[int] = (1, 2, 3),
) -> Environment:
    """Draw a random environment of ``site_count`` sites.

    Each site's reward is uniform over ``reward_choices`` and its
    locations a uniform subset of that size. Environments whose total
    reward falls below ``MIN_TOTAL_REWARD`` are redrawn so a perfect
    gathering day always has enough to collect.
    """
    if site_count < 1:
        raise ConfigurationError("site_count must be at least 1")
    if any(r not in (1, 2, 3) for r in reward_choices):
        raise ConfigurationError("site rewards must lie in {1, 2, 3}")
    if site_count * max(reward_choices) < MIN_TOTAL_REWARD:
        raise ConfigurationError(
            f"{site_count} sites with rewards {tuple(reward_choices)} can never "
            f"reach a total reward of {MIN_TOTAL_REWARD}"
        )
    n_choices = len(reward_choices)
    while True:
        sites = []
        for site_id in range(site_count):
            reward = reward_choices[int(rng.random() * n_choices)]
            masks = _MASKS_BY_REWARD[reward]
            mask = masks[int(rng.random() * len(masks))]
            sites.append(ResourceSite(site_id, mask_to_locations(mask)))
        env = Environment(tuple(sites))
        if env.total_reward >= MIN_TOTAL_REWARD:
            return env
