"""Seeded generic sampling with rejection at poles."""
from __future__ import annotations

import cmath
import math
import random
from typing import Callable, TypeVar

from .core import SingularError

__all__ = ["MAX_RETRIES", "rand_complex", "rand_lambda", "make_rng", "retry_generic"]

MAX_RETRIES = 100

T = TypeVar("T")


def make_rng(*key) -> random.Random:
    """Independent stream per (suite, seed, ...) key; stable across runs."""
    return random.Random(":".join(str(k) for k in key))


def rand_complex(rng: random.Random, lo: float = 0.3, hi: float = 3.0) -> complex:
    """Log-uniform modulus in [lo, hi], uniform argument."""
    r = math.exp(rng.uniform(math.log(lo), math.log(hi)))
    return cmath.rect(r, rng.uniform(-math.pi, math.pi))


def rand_lambda(rng: random.Random, re: float = 1.5, im: float = 0.5) -> complex:
    """Uniform in the box |Re| <= re, |Im| <= im."""
    return complex(rng.uniform(-re, re), rng.uniform(-im, im))


def retry_generic(trial: Callable[[random.Random], T], rng: random.Random,
                  max_retries: int = MAX_RETRIES) -> T:
    """Call ``trial(rng)`` until it does not hit a singular denominator."""
    last = None
    for _ in range(max_retries):
        try:
            return trial(rng)
        except SingularError as exc:
            last = exc
    raise SingularError(f"no generic sample after {max_retries} retries: {last}")
