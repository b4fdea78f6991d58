"""Seeded random elements, geodesic words and boundary rays."""

from __future__ import annotations

import random

from .group import IDENTITY, Element, GroupSpec


def rng_from(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_geodesic_word(group: GroupSpec, rng: random.Random, n: int, start: Element = IDENTITY) -> list:
    """Letters of a random geodesic of length n leaving ``start`` outward.

    Each step picks uniformly among generators that increase the distance
    from the identity, so the result is a geodesic word from ``start``.
    """
    names = group.generator_names
    gens = [group.gen(s) for s in names]
    g = start
    base = group.length(start)
    word = []
    for k in range(n):
        options = [i for i, s in enumerate(gens) if group.length(group.mul(g, s)) == base + k + 1]
        i = rng.choice(options)
        word.append(names[i])
        g = group.mul(g, gens[i])
    return word


def random_element(group: GroupSpec, rng: random.Random, max_length: int, exact: bool = False) -> Element:
    n = max_length if exact else rng.randint(0, max_length)
    return group.normalize(random_geodesic_word(group, rng, n))


def random_ray(group: GroupSpec, rng: random.Random, prefix_len: int, period_len: int,
               tries: int = 200):
    """A random eventually periodic geodesic ray (validated)."""
    from .errors import InputError
    from .floyd import BoundaryRay, check_ray

    for _ in range(tries):
        word = random_geodesic_word(group, rng, prefix_len + period_len)
        ray = BoundaryRay(tuple(word[:prefix_len]), tuple(word[prefix_len:]))
        try:
            check_ray(group, ray)
        except InputError:
            continue
        return ray
    raise RuntimeError("could not sample a geodesic ray")
