"""Randomized verification suites with reproducible per-trial streams.

Every trial of every suite draws from its own generator, seeded from
``sha256(f"{seed}:{suite_id}:{trial}")``.  Results therefore do not depend on
scheduling, and a run with several worker threads reports exactly the same
residuals as a serial run.

Configuration is an INI file (read with :mod:`configparser`)::

    [verify]
    seed = 0
    threads = 1
    suites = theta_kernel, domain_wall      ; empty or absent: all suites
    trials =                                ; global override of trial counts

    [ranges]
    p_max = 0.5          ; |p| <= p_max
    q_min = 0.4          ; q_min <= |q| <= q_max
    q_max = 0.9
    q_arg_max = 3.141592653589793   ; |arg q| <= q_arg_max
    lambda_re = 1.5      ; |Re lam| <= lambda_re
    lambda_im = 0.5      ; |Im lam| <= lambda_im

    [caps]
    domain_wall_n = 4
    weights_n = 4
    sixj_size = 2

    [tolerances]
    ft_jackson = 1e-9    ; any suite id

    [trials]
    theta_kernel = 1000  ; any suite id
"""
from __future__ import annotations

import cmath
import configparser
import csv
import hashlib
import io
import itertools
import json
import math
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .core import (SINGULAR_TOL, DomainError, EllipticError, EllipticParams, SingularError,
                   rel_residual)
from .sampling import MAX_RETRIES, rand_complex, rand_lambda

__all__ = [
    "ConfigError",
    "SamplingError",
    "SuiteConfig",
    "Suite",
    "SUITES",
    "CONDITION_LIMIT",
    "condition_limit",
    "load_config",
    "substream",
    "sample_params",
    "run_suite",
    "report_json",
    "report_csv",
]

CONDITION_LIMIT = 1e5
# Rounding error observed in the gated evaluations stays below about
# ROUNDOFF_BUDGET * eps * condition; a sample is only trusted when that bound
# is within the suite tolerance.
ROUNDOFF_BUDGET = 100.0
# The gate never tightens past this, so an unreachable tolerance shows up as a
# failed suite rather than as a sampler that cannot find any admissible point.
MIN_CONDITION_LIMIT = 1e3


def condition_limit(tolerance: float) -> float:
    """Largest condition number a sample may have for a given tolerance."""
    budget = tolerance / (ROUNDOFF_BUDGET * sys.float_info.epsilon)
    return min(CONDITION_LIMIT, max(MIN_CONDITION_LIMIT, budget))


class ConfigError(DomainError):
    """Malformed or out-of-range configuration."""


class SamplingError(EllipticError):
    """No generic parameter point found within the retry budget."""


# ---------------------------------------------------------------- configuration

_CAP_LIMITS = {"domain_wall_n": (1, 5), "weights_n": (1, 8), "sixj_size": (1, 2)}


@dataclass
class SuiteConfig:
    seed: int = 0
    threads: int = 1
    suites: list[str] | None = None
    trials: int | None = None
    trial_overrides: dict[str, int] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    p_max: float = 0.5
    q_min: float = 0.4
    q_max: float = 0.9
    q_arg_max: float = math.pi
    lambda_re: float = 1.5
    lambda_im: float = 0.5
    caps: dict[str, int] = field(default_factory=lambda: {"domain_wall_n": 4, "weights_n": 4,
                                                           "sixj_size": 2})

    def validate(self) -> "SuiteConfig":
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if not 0 <= self.p_max < 1:
            raise ConfigError("need 0 <= p_max < 1")
        if not 0 < self.q_min <= self.q_max:
            raise ConfigError("need 0 < q_min <= q_max")
        if self.q_arg_max < 0 or self.lambda_re < 0 or self.lambda_im < 0:
            raise ConfigError("range half-widths must be non-negative")
        if self.trials is not None and self.trials < 0:
            raise ConfigError("trials must be non-negative")
        for sid, n in self.trial_overrides.items():
            _known(sid)
            if n < 0:
                raise ConfigError(f"trials for {sid} must be non-negative")
        for sid, tol in self.tolerances.items():
            _known(sid)
            if not tol > 0:
                raise ConfigError(f"tolerance for {sid} must be positive")
        for name, v in self.caps.items():
            if name not in _CAP_LIMITS:
                raise ConfigError(f"unknown cap {name!r}")
            lo, hi = _CAP_LIMITS[name]
            if not lo <= v <= hi:
                raise ConfigError(f"cap {name} must lie in [{lo}, {hi}]")
        for sid in self.suites or ():
            _known(sid)
        return self

    def trials_for(self, suite: "Suite") -> int:
        if suite.id in self.trial_overrides:
            return self.trial_overrides[suite.id]
        return suite.trials if self.trials is None else self.trials

    def tolerance_for(self, suite: "Suite") -> float:
        return self.tolerances.get(suite.id, suite.tolerance)


def _known(sid: str) -> None:
    if sid not in SUITES:
        raise ConfigError(f"unknown suite {sid!r}")


def load_config(path: str | None = None, text: str | None = None) -> SuiteConfig:
    """Read an INI configuration; missing keys keep their defaults."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        if text is not None:
            cp.read_string(text)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    cfg = SuiteConfig()
    known_sections = {"verify", "ranges", "caps", "tolerances", "trials"}
    for sec in cp.sections():
        if sec not in known_sections:
            raise ConfigError(f"unknown section [{sec}]")
    try:
        if cp.has_section("verify"):
            v = cp["verify"]
            for key in v:
                if key not in ("seed", "threads", "suites", "trials"):
                    raise ConfigError(f"unknown key {key!r} in [verify]")
            cfg.seed = int(v.get("seed", cfg.seed))
            cfg.threads = int(v.get("threads", cfg.threads))
            if "suites" in v:
                names = [s.strip() for s in v["suites"].split(",") if s.strip()]
                cfg.suites = names or None
            if v.get("trials", "").strip():
                cfg.trials = int(v["trials"])
        if cp.has_section("ranges"):
            for key, val in cp["ranges"].items():
                if not hasattr(cfg, key) or key in ("seed", "threads", "suites", "trials", "caps"):
                    raise ConfigError(f"unknown key {key!r} in [ranges]")
                setattr(cfg, key, float(val))
        if cp.has_section("caps"):
            for key, val in cp["caps"].items():
                cfg.caps[key] = int(val)
        if cp.has_section("tolerances"):
            cfg.tolerances.update({k: float(v) for k, v in cp["tolerances"].items()})
        if cp.has_section("trials"):
            cfg.trial_overrides.update({k: int(v) for k, v in cp["trials"].items()})
    except ValueError as exc:
        raise ConfigError(f"bad value in configuration: {exc}") from exc
    return cfg.validate()


# ---------------------------------------------------------------- random streams

def substream(seed: int, suite_id: str, trial: int) -> random.Random:
    """Mersenne Twister seeded from sha256 of ``seed:suite_id:trial``."""
    digest = hashlib.sha256(f"{seed}:{suite_id}:{trial}".encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _draw_params(rng: random.Random, cfg: SuiteConfig) -> EllipticParams:
    p = cmath.rect(cfg.p_max * math.sqrt(rng.random()), rng.uniform(-math.pi, math.pi))
    q = cmath.rect(rng.uniform(cfg.q_min, cfg.q_max), rng.uniform(-cfg.q_arg_max, cfg.q_arg_max))
    return EllipticParams(p, q)


def _generic_params(rng: random.Random, cfg: SuiteConfig) -> EllipticParams:
    """(p, q) with theta(q), a denominator in every suite, away from zero."""
    last = 0.0
    for _ in range(MAX_RETRIES):
        P = _draw_params(rng, cfg)
        last = abs(P.theta(P.q))
        if last >= SINGULAR_TOL:
            return P
    raise SamplingError(f"denominator theta(q) stayed below {SINGULAR_TOL} "
                        f"(last |theta(q)| = {last:.3g}) after {MAX_RETRIES} retries")


def sample_params(config: SuiteConfig, purpose: str) -> dict:
    """Deterministic generic bundle (p, q, lam, x) for a purpose tag."""
    rng = substream(config.seed, purpose, 0)
    P = _generic_params(rng, config)
    return {"p": P.p, "q": P.q, "lam": rand_lambda(rng, config.lambda_re, config.lambda_im),
            "x": rand_complex(rng)}


# ---------------------------------------------------------------- trial context

@dataclass
class Trial:
    rng: random.Random
    P: EllipticParams
    cfg: SuiteConfig
    index: int
    rejected: int = 0
    limit: float = CONDITION_LIMIT

    def lam(self) -> complex:
        return rand_lambda(self.rng, self.cfg.lambda_re, self.cfg.lambda_im)

    def vec(self, n: int) -> list[complex]:
        return [rand_complex(self.rng) for _ in range(n)]

    def gated(self, draw: Callable, evaluate: Callable):
        """Redraw with ``draw`` until ``evaluate`` returns a residual whose
        condition number is at most ``self.limit``."""
        for _ in range(MAX_RETRIES):
            data = draw()
            try:
                res, cond = evaluate(data)
            except SingularError:
                self.rejected += 1
                continue
            if cond <= self.limit:
                return res
            self.rejected += 1
        raise SingularError(f"no well-conditioned sample after {MAX_RETRIES} draws")


@dataclass(frozen=True)
class Suite:
    id: str
    anchor: str
    tolerance: float
    trials: int
    body: Callable[[Trial], float]


# ---------------------------------------------------------------- suite bodies

def _theta_kernel(t: Trial) -> float:
    P, rng = t.P, t.rng
    x = rand_complex(rng)
    k, l = rng.randint(-3, 4), rng.randint(-3, 4)
    th = P.theta(x)
    res = [
        rel_residual(P.theta(1 / x), -th / x),
        rel_residual(P.theta(P.p * x), -th / x),
        rel_residual(P.poch(x, k + l), P.poch(x, k) * P.poch(x * P.q ** k, l)),
        rel_residual(EllipticParams(0, P.q).theta(x), 1 - x),
    ]
    return max(res)


def _domain_wall(t: Trial) -> float:
    from .weights import domain_wall_sides

    def evaluate(kind):
        def ev(data):
            lhs, rhs, cond = domain_wall_sides(kind, *data, t.P, with_condition=True)
            return rel_residual(lhs, rhs), cond
        return ev

    worst = 0.0
    for n in range(1, t.cfg.caps["domain_wall_n"] + 1):
        for kind in ("bcgp", "gbc"):
            worst = max(worst, t.gated(lambda: (t.lam(), t.vec(n), t.vec(n)), evaluate(kind)))
    return worst


def _lattice(kind: str, sizes):
    def body(t: Trial) -> float:
        from .lattice import lattice_property_at

        worst = 0.0
        for m, n in sizes:
            worst = max(worst, t.gated(
                lambda: (t.lam(), t.vec(m), t.vec(n)),
                lambda d: lattice_property_at(kind, *d, t.P, with_condition=True)))
        return worst
    return body


def _phi_symmetry(t: Trial) -> float:
    from .weights import PHI_SYMMETRIES, phi_symmetry_sides

    def evaluate(data):
        res = cond = 0.0
        for kind in PHI_SYMMETRIES:
            lhs, rhs, k = phi_symmetry_sides(kind, *data, t.P, with_condition=True)
            res, cond = max(res, rel_residual(lhs, rhs)), max(cond, k)
        return res, cond

    worst = 0.0
    for n in range(1, t.cfg.caps["weights_n"] + 1):
        worst = max(worst, t.gated(lambda: (t.vec(n), t.vec(n), rand_complex(t.rng)), evaluate))
    return worst


def _phi_factorization(t: Trial) -> float:
    from .weights import phi_cond, phi_factored_w, phi_factored_z

    P, q = t.P, t.P.q

    def evaluate(data):
        w, z, a = data
        zeta, omega = z[0], w[0]
        v1, k1 = phi_cond(w, [zeta * q ** j for j in range(len(z))], a, P)
        v2, k2 = phi_cond([omega * q ** j for j in range(len(w))], z, a, P)
        res = max(rel_residual(v1, phi_factored_z(w, zeta, a, P)),
                  rel_residual(v2, phi_factored_w(omega, z, a, P)))
        return res, max(k1, k2)

    worst = 0.0
    for n in range(1, t.cfg.caps["weights_n"] + 1):
        worst = max(worst, t.gated(lambda: (t.vec(n), t.vec(n), rand_complex(t.rng)), evaluate))
    return worst


def _phi_decomposition(t: Trial) -> float:
    from .weights import ordered_partitions, phi_cond, phi_decomposition

    def evaluate(data):
        ref, cond = phi_cond(*data, t.P)
        res = 0.0
        for blocks in ordered_partitions(3):
            v, k = phi_decomposition(blocks, *data, t.P, with_condition=True)
            res, cond = max(res, rel_residual(ref, v)), max(cond, k)
        return res, cond

    return t.gated(lambda: (t.vec(3), t.vec(3), rand_complex(t.rng)), evaluate)


def _sixj_sizes(cap: int):
    return [(M, N) for M in range(cap + 1) for N in range(cap + 1) if M + N > 0]


def _sixj_agreement(t: Trial) -> float:
    from .sixj import MAG_METHODS, SixJIndex, admissible_indices

    def evaluate(d):
        rows, mag = [], 0.0
        for S, T, U, V in admissible_indices(len(d[0]), len(d[1])):
            idx = SixJIndex(S, T, U, V, *d)
            out = [MAG_METHODS[m](idx, t.P) for m in ("lattice_oracle", "mcmt", "rat1", "rat2")]
            rows.append([v for v, _ in out])
            mag = max(mag, *(m for _, m in out))
        scale = max(abs(x) for r in rows for x in r)
        res = max(rel_residual(r[0], x, scale) for r in rows for x in r[1:])
        return res, mag / scale

    return max(t.gated(lambda: (t.vec(M), t.vec(N), t.lam()), evaluate)
               for M, N in _sixj_sizes(t.cfg.caps["sixj_size"]))


def _sixj_formulas(t: Trial) -> float:
    from .sixj import SixJIndex, admissible_indices, r6j

    w, z, lam = t.vec(3), t.vec(3), t.lam()
    rows = []
    for S, T, U, V in admissible_indices(3, 3):
        idx = SixJIndex(S, T, U, V, w, z, lam)
        rows.append([r6j(idx, m, t.P) for m in ("mcmt", "rat1", "rat2")])
    scale = max(abs(x) for r in rows for x in r)
    return max(rel_residual(r[0], x, scale) for r in rows for x in r[1:])


def _sixj_qdyb(t: Trial) -> float:
    from .sixj import check_qdyb

    return max(t.gated(lambda: (t.vec(L), t.vec(M), t.vec(N), t.lam()),
                       lambda d: check_qdyb(*d, t.P, with_condition=True))
               for L, M, N in ((1, 1, 1), (2, 1, 1)))


def _sixj_unitarity(t: Trial) -> float:
    from .sixj import check_unitarity

    return max(t.gated(lambda: (t.vec(M), t.vec(N), t.lam()),
                       lambda d: check_unitarity(*d, t.P, with_condition=True))
               for M, N in ((1, 1), (2, 1), (2, 2)))


def _family_max(pairs) -> float:
    scale = max((max(abs(a), abs(b)) for a, b in pairs), default=0.0)
    return max((rel_residual(a, b, scale) for a, b in pairs), default=0.0)


def _sixj_symmetry(t: Trial) -> float:
    from .sixj import SixJIndex, admissible_indices, symmetry_sides

    worst = 0.0
    for M, N in ((1, 1), (2, 1), (1, 2), (2, 2)):
        w, z, lam = t.vec(M), t.vec(N), t.lam()
        fam: dict[str, list] = {}
        for S, T, U, V in admissible_indices(M, N):
            idx = SixJIndex(S, T, U, V, w, z, lam)
            kinds = ["op_flip", "antipode_flip", "combined"] + (["rese"] if not V else [])
            for kind in kinds:
                fam.setdefault(kind, []).append(symmetry_sides(kind, idx, t.P))
        worst = max(worst, *(_family_max(v) for v in fam.values()))
    return worst


def _sixj_summation(t: Trial) -> float:
    from .sixj import SixJIndex, admissible_indices, vempty_summation_sides

    w, z, lam = t.vec(2), t.vec(1), t.lam()
    pairs = [vempty_summation_sides(SixJIndex(S, T, U, V, w, z, lam), t.P)
             for S, T, U, V in admissible_indices(2, 1)
             if not V and len(S) + len(U) == len(T)]
    return _family_max(pairs)


def _compositions(n: int):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def _specializations(t: Trial) -> float:
    from .sixj import Specialization, specialization_residuals, subsets

    rng = t.rng
    worst = 0.0

    def evaluate(d):
        lam, sp = d
        res, cond = specialization_residuals(sp, lam, t.P, with_condition=True)
        return max(res.values()), cond

    for M, N in itertools.product(range(3), range(3)):
        for s, s2 in itertools.product(range(M + 1), range(M + 1)):
            for U, V in itertools.product(subsets(N), subsets(N)):
                if s + len(U) != s2 + len(V):
                    continue
                nUV = sum(1 for i in U if i in V)
                nUcVc = sum(1 for i in range(N) if i not in U and i not in V)
                for k in _compositions(nUV):
                    for l in _compositions(nUcVc):
                        def draw(M=M, s=s, s2=s2, U=U, V=V, N=N, k=k, l=l):
                            return t.lam(), Specialization(
                                M, s, s2, rand_complex(rng), U, V, N,
                                tuple(rand_complex(rng) for _ in k), k,
                                tuple(rand_complex(rng) for _ in l), l,
                                {i: rand_complex(rng) for i in range(N) if (i in U) != (i in V)})

                        worst = max(worst, t.gated(draw, evaluate))
    return worst


_SERIES_SIZES = {
    "ft_jackson": [{"N": N} for N in range(5)],
    "ebt": [{"N": N} for N in range(4)],
    "rjs": [{"Nz": Nz} for n in (1, 2, 3) for Nz in itertools.product(range(3), repeat=n)],
    "sjs": [{"Nz": Nz} for n in (1, 2) for Nz in itertools.product(range(4), repeat=n)],
    "nkt": [{"m": m, "n": n, "N": N} for m in (1, 2, 3) for n in (1, 2, 3) for N in range(5)],
    "rkt": [{"Nz": Nz, "Mw": Mw} for n in (1, 2) for m in (0, 1, 2)
            for Nz in itertools.product(range(3), repeat=n)
            for Mw in itertools.product(range(3), repeat=m)],
}


def _series(ident: str):
    def body(t: Trial) -> float:
        from .series import identity_trial

        sizes = _SERIES_SIZES[ident]
        res, rejected = identity_trial(ident, sizes[t.index % len(sizes)], t.rng, t.P,
                                       limit=t.limit)
        t.rejected += rejected
        return res
    return body


_BIORTHO_BOXES = [(1,), (2,), (3,), (4,), (2, 1), (2, 2), (3, 1)]


def _biortho(kind: str):
    def body(t: Trial) -> float:
        from . import biortho as bo

        boxes = [b for b in _BIORTHO_BOXES if kind != "assembled" or b in ((1,), (2,))]
        worst = 0.0

        def draw(N):
            return lambda: bo.BiorthoParams(rand_complex(t.rng), rand_complex(t.rng),
                                            rand_complex(t.rng), t.vec(len(N)), N)

        def galt(B, f):
            out = [f(u, B) for u in bo.grid(B.N)]
            cond = max(bo.g_alt_factor_residual(u, B, t.P, True)[1] for u in bo.grid(B.N))
            return max(out), cond

        evaluate = {
            "grid": lambda B: bo.biortho_grid_residual(B, t.P, True),
            "inversion": lambda B: bo.inversion_residual(B.N, B.a, B.b, B.x, t.P, True),
            "assembled": lambda B: bo.assembled_residual(B, t.P, True),
            "galt_factor": lambda B: max(bo.g_alt_factor_residual(u, B, t.P, True)
                                         for u in bo.grid(B.N)),
            "galt_ratio": lambda B: galt(B, lambda u, B: bo.g_alt_ratio_residual(u, B, t.P)),
        }[kind]
        for N in boxes:
            worst = max(worst, t.gated(draw(N), evaluate))
        return worst
    return body


def _registry() -> dict[str, Suite]:
    s = [
        Suite("theta_kernel", "theta inversion, quasi-periodicity, Pochhammer splitting, p=0 limit",
              1e-11, 1000, _theta_kernel),
        Suite("domain_wall", "domain-wall partition function against both weight-function forms",
              1e-8, 50, _domain_wall),
        Suite("lattice_splitting_v", "lattice splitting along rows", 1e-9, 3,
              _lattice("splitting_v", [(2, 2), (2, 3)])),
        Suite("lattice_splitting_h", "lattice splitting along columns", 1e-9, 3,
              _lattice("splitting_h", [(2, 2), (3, 2)])),
        Suite("lattice_delta", "coincident spectral parameters give a delta", 1e-9, 3,
              _lattice("lll_delta", [(0, 1), (0, 2), (0, 3)])),
        Suite("lattice_crossing", "crossing symmetry of the partition function", 1e-9, 3,
              _lattice("crossing", [(2, 2)])),
        Suite("lattice_square", "square-lattice reduction", 1e-9, 3,
              _lattice("square", [(1, 1), (1, 2), (2, 1), (2, 2)])),
        Suite("lattice_products", "boundaries with product partition functions", 1e-9, 3,
              _lattice("adl_products", [(1, 1), (2, 2), (2, 3)])),
        Suite("weights_symmetry", "weight-function symmetries", 1e-10, 10, _phi_symmetry),
        Suite("weights_factorization", "weight function on geometric progressions", 1e-10, 10,
              _phi_factorization),
        Suite("weights_decomposition", "block decomposition of the weight function", 1e-10, 10,
              _phi_decomposition),
        Suite("sixj_agreement", "6j-symbols: three formulas against the lattice oracle", 1e-7, 5,
              _sixj_agreement),
        Suite("sixj_formulas", "6j-symbols at M=N=3: sum formulas against each other", 1e-7, 1,
              _sixj_formulas),
        Suite("sixj_qdyb", "hexagon (dynamical Yang-Baxter) identity", 1e-7, 2, _sixj_qdyb),
        Suite("sixj_unitarity", "unitarity of the 6j-symbols", 1e-8, 2, _sixj_unitarity),
        Suite("sixj_symmetry", "6j symmetries and the degenerate closed form", 1e-8, 3,
              _sixj_symmetry),
        Suite("sixj_summation", "summation formula from the V-empty case", 1e-8, 5,
              _sixj_summation),
        Suite("sixj_specialization", "hypergeometric specializations of the 6j-symbols", 1e-8, 2,
              _specializations),
    ]
    for ident in ("ft_jackson", "ebt", "rjs", "sjs", "nkt"):
        s.append(Suite(ident, f"series identity {ident}", 1e-9, 100, _series(ident)))
    s.append(Suite("rkt", "series identity rkt", 1e-8, 100, _series("rkt")))
    s += [
        Suite("biortho_grid", "biorthogonality over complete grids", 1e-8, 3, _biortho("grid")),
        Suite("biortho_inversion", "triangular matrix pair inverts", 1e-9, 3, _biortho("inversion")),
        Suite("biortho_assembled", "biorthogonality assembled from the matrix pair", 1e-8, 3,
              _biortho("assembled")),
        Suite("biortho_galt_factor", "g against its transformed series", 1e-8, 3,
              _biortho("galt_factor")),
        Suite("biortho_galt_ratio", "y-independence of g over its transformed series", 1e-8, 3,
              _biortho("galt_ratio")),
    ]
    return {x.id: x for x in s}


SUITES: dict[str, Suite] = _registry()


# ---------------------------------------------------------------- running

def _run_trial(suite: Suite, cfg: SuiteConfig, index: int) -> tuple[float, int]:
    rng = substream(cfg.seed, suite.id, index)
    rejected = 0
    limit = condition_limit(cfg.tolerance_for(suite))
    for _ in range(MAX_RETRIES):
        t = Trial(rng, _generic_params(rng, cfg), cfg, index, limit=limit)
        try:
            res = suite.body(t)
            return res, rejected + t.rejected
        except SingularError:
            rejected += 1 + t.rejected
    raise SamplingError(f"{suite.id} trial {index}: no generic sample after {MAX_RETRIES} retries")


def run_suite(config: SuiteConfig) -> dict:
    """Run the selected suites and return the report.

    The report has one record per suite and a global verdict.  A record whose
    suite raised a numeric or sampling error carries an ``error`` field.
    """
    config.validate()
    ids = list(SUITES) if config.suites is None else list(config.suites)
    tasks = [(sid, i) for sid in ids for i in range(config.trials_for(SUITES[sid]))]

    def work(task):
        sid, i = task
        t0 = time.perf_counter()
        try:
            out = _run_trial(SUITES[sid], config, i)
        except (EllipticError, ArithmeticError) as exc:
            out = exc
        return out, time.perf_counter() - t0

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = dict(zip(tasks, pool.map(work, tasks)))
    else:
        outcomes = {task: work(task) for task in tasks}

    records = []
    for sid in ids:
        suite = SUITES[sid]
        n = config.trials_for(suite)
        per_trial = [outcomes[(sid, i)][0] for i in range(n)]
        errors = [r for r in per_trial if isinstance(r, Exception)]
        vals = [r for r in per_trial if not isinstance(r, Exception)]
        tol = config.tolerance_for(suite)
        worst = max((v[0] for v in vals), default=0.0)
        rec = {
            "suite": sid,
            "anchor": suite.anchor,
            "trials": n,
            "max_residual": worst,
            "tolerance": tol,
            "rejected": sum(v[1] for v in vals),
            "residuals": [None if isinstance(r, Exception) else r[0] for r in per_trial],
            "passed": not errors and worst <= tol,
            "wall_time": sum(outcomes[(sid, i)][1] for i in range(n)),
        }
        if errors:
            rec["error"] = f"{type(errors[0]).__name__}: {errors[0]}"
        records.append(rec)
    return {
        "seed": config.seed,
        "suites": records,
        "passed": all(r["passed"] for r in records),
        "errored": any("error" in r for r in records),
    }


def report_json(report: dict, with_residuals: bool = False) -> str:
    def strip(r):
        return r if with_residuals else {k: v for k, v in r.items() if k != "residuals"}
    out = dict(report, suites=[strip(r) for r in report["suites"]])
    return json.dumps(out, indent=2)


def report_csv(report: dict) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["suite", "trial", "residual"])
    for r in report["suites"]:
        for i, v in enumerate(r["residuals"]):
            wr.writerow([r["suite"], i, "" if v is None else repr(v)])
    return buf.getvalue()
