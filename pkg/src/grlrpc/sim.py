"""Monte Carlo estimation of per-condition and decoding failure rates."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .bounds import BoundReport, total_bound
from .decoder import decode
from .errors import ParameterError, ProfileTooLarge
from .lrpc import LrpcCode, encode, gen_code
from .rings import make_ring, make_rng, make_tower
from .submodules import RankProfile, sample_error, sample_module

__all__ = [
    "SimConfig",
    "PointResult",
    "SimReport",
    "CompletenessViolation",
    "run",
    "wilson",
    "profile_for",
    "MIXED_PROFILES",
]

# mixed profiles for r = 2, indexed by t = 1..7
MIXED_PROFILES = ["1", "1+x", "2+x", "2+2x", "3+2x", "3+3x", "4+3x"]
Z95 = 1.959963984540054
RATE_KEYS = ("prod", "synd", "inter", "dec", "wrong")


class CompletenessViolation(AssertionError):
    """All three success conditions held but decoding did not return the codeword."""


def wilson(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for k successes out of n."""
    if n == 0:
        return 0.0, 1.0
    ph = k / n
    den = 1 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


def profile_for(profile_id: str, t: int, r: int) -> RankProfile:
    """phi1 = t, phi2 = t x, phi3 = the mixed table (r = 2, t <= 7)."""
    if profile_id == "phi1":
        return RankProfile.constant(t, r)
    if profile_id == "phi2":
        if r < 2:
            raise ParameterError("phi2 needs r >= 2")
        return RankProfile.constant(t, r).shift(1)
    if profile_id == "phi3":
        if r != 2:
            raise ParameterError("the mixed profile table is defined for r = 2")
        if t == 0:
            return RankProfile.constant(0, r)
        if not 1 <= t <= len(MIXED_PROFILES):
            raise ParameterError(f"no mixed profile for t = {t}")
        return RankProfile.parse(MIXED_PROFILES[t - 1], r)
    return RankProfile.parse(profile_id, r)


@dataclass
class SimConfig:
    p: int = 2
    r: int = 2
    s: int = 1
    m: int = 21
    n: int = 20
    k: int = 8
    lam: int = 2
    t_values: list[int] = field(default_factory=lambda: list(range(1, 8)))
    profiles: list[str] = field(default_factory=lambda: ["phi1", "phi2", "phi3"])
    min_trials: int = 10_000
    max_trials: int = 1_000_000
    min_failures: int = 50
    min_dec_failures: int = 1000
    batch: int = 500
    seed: int = 0
    workers: int = 1
    strict: bool = True

    def validate(self) -> None:
        if self.min_trials < 1 or self.max_trials < self.min_trials:
            raise ParameterError("need 1 <= min_trials <= max_trials")
        if self.max_trials > 1_000_000:
            raise ParameterError("max_trials is capped at 10^6")
        if self.workers < 1 or self.batch < 1:
            raise ParameterError("workers and batch must be positive")


@dataclass
class PointResult:
    t: int
    profile_id: str
    profile: str
    trials: int = 0
    prod_fail: int = 0
    synd_fail: int = 0
    inter_fail: int = 0
    dec_fail: int = 0
    wrong_cw: int = 0
    all_ok: int = 0
    violations: int = 0
    feasible: bool = True
    thresholds_met: bool = False
    skipped: str = ""
    seconds: float = 0.0

    def count(self, key: str) -> int:
        return {
            "prod": self.prod_fail,
            "synd": self.synd_fail,
            "inter": self.inter_fail,
            "dec": self.dec_fail,
            "wrong": self.wrong_cw,
        }[key]

    def rate(self, key: str) -> float:
        return self.count(key) / self.trials if self.trials else 0.0

    def interval(self, key: str) -> tuple[float, float]:
        return wilson(self.count(key), self.trials)


@dataclass
class SimReport:
    config: SimConfig
    points: list[PointResult]
    bounds: dict[int, BoundReport]
    code: LrpcCode | None = None

    def point(self, t: int, profile_id: str) -> PointResult:
        for pt in self.points:
            if pt.t == t and pt.profile_id == profile_id:
                return pt
        raise KeyError((t, profile_id))

    def to_csv(self) -> str:
        cfg = self.config
        buf = io.StringIO()
        fields = ["p", "r", "s", "m", "n", "k", "lambda", "profile_id", "profile", "t", "trials",
                  "prod_fail", "synd_fail", "inter_fail", "dec_fail", "wrong_cw"]
        fields += [f"rate_{k}" for k in RATE_KEYS]
        fields += [f"ci_lo_{k}" for k in RATE_KEYS] + [f"ci_hi_{k}" for k in RATE_KEYS]
        fields += ["bound_synd_exact", "bound_total_tight", "bound_total_simple", "feasible",
                   "thresholds_met", "violations"]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for pt in self.points:
            row = {"p": cfg.p, "r": cfg.r, "s": cfg.s, "m": cfg.m, "n": cfg.n, "k": cfg.k,
                   "lambda": cfg.lam, "profile_id": pt.profile_id, "profile": pt.profile,
                   "t": pt.t, "trials": pt.trials, "prod_fail": pt.prod_fail,
                   "synd_fail": pt.synd_fail, "inter_fail": pt.inter_fail,
                   "dec_fail": pt.dec_fail, "wrong_cw": pt.wrong_cw}
            for key in RATE_KEYS:
                lo, hi = pt.interval(key)
                row[f"rate_{key}"] = f"{pt.rate(key):.6e}"
                row[f"ci_lo_{key}"] = f"{lo:.6e}"
                row[f"ci_hi_{key}"] = f"{hi:.6e}"
            b = self.bounds.get(pt.t)
            row["bound_synd_exact"] = f"{float(b.syndrome_bound):.6e}" if b else ""
            row["bound_total_tight"] = f"{float(b.total_tight):.6e}" if b else ""
            row["bound_total_simple"] = f"{float(b.total_simple):.6e}" if b else ""
            row["feasible"] = int(pt.feasible)
            row["thresholds_met"] = int(pt.thresholds_met)
            row["violations"] = pt.violations
            w.writerow(row)
        return buf.getvalue()


def _thresholds_met(pt: PointResult, cfg: SimConfig) -> bool:
    return (
        pt.dec_fail >= cfg.min_dec_failures
        and min(pt.prod_fail, pt.synd_fail, pt.inter_fail) >= cfg.min_failures
    )


def _run_point(code: LrpcCode, cfg: SimConfig, t: int, profile_id: str, seed_seq) -> PointResult:
    S = code.tower
    rng = make_rng(seed_seq)
    phi = profile_for(profile_id, t, S.r)
    pt = PointResult(t, profile_id, str(phi))
    if phi.rank > min(code.n, S.deg):
        pt.skipped = "profile too large"
        return pt
    start = time.perf_counter()
    while True:
        for _ in range(cfg.batch):
            E = sample_module(S, phi, rng)
            e = sample_error(E, code.n, rng)
            msg = S.random(rng, (code.k,))
            cw = encode(code, msg)
            out = decode(code, (cw + e) % S.q, planted_error=e)
            d = out.diagnostics
            pt.trials += 1
            pt.prod_fail += not d["product_ok"]
            pt.synd_fail += not d["syndrome_ok"]
            pt.inter_fail += not d["intersection_ok"]
            correct = out.success and np.array_equal(out.codeword, cw)
            pt.dec_fail += not correct
            pt.wrong_cw += out.success and not correct
            if all(d.values()):
                pt.all_ok += 1
                if not correct:
                    pt.violations += 1
                    if cfg.strict:
                        raise CompletenessViolation(
                            f"t={t} {profile_id}: all conditions held but decoding gave {out.reason}"
                        )
            if pt.trials >= cfg.max_trials:
                break
        pt.thresholds_met = _thresholds_met(pt, cfg)
        if pt.trials >= cfg.max_trials or (pt.trials >= cfg.min_trials and pt.thresholds_met):
            break
    pt.seconds = time.perf_counter() - start
    return pt


def _point_task(args):
    return _run_point(*args)


def run(config: SimConfig, rng: np.random.SeedSequence | int | None = None,
        code: LrpcCode | None = None, progress=None) -> SimReport:
    """Simulate every (t, profile) point of ``config``.

    Randomness derives from a single seed sequence: the first child draws the
    code, and point i uses child i + 1, so results do not depend on how many
    workers run them.
    """
    config.validate()
    if rng is None:
        rng = config.seed
    root = rng if isinstance(rng, np.random.SeedSequence) else np.random.SeedSequence(rng)
    points = [(t, pid) for t in config.t_values for pid in config.profiles]
    children = root.spawn(len(points) + 1)
    if code is None:
        R = make_ring(config.p, config.r, config.s)
        S = make_tower(R, config.m)
        code = gen_code(S, config.n, config.k, config.lam, make_rng(children[0]))
    bounds = {}
    for t in config.t_values:
        bounds[t] = total_bound(config.p, config.r, config.s, config.m, config.n, config.k,
                                config.lam, t, allow_infeasible=True)
    tasks = [(code, config, t, pid, children[i + 1]) for i, (t, pid) in enumerate(points)]
    results: list[PointResult] = []
    if config.workers == 1:
        for task in tasks:
            res = _point_task(task)
            res.feasible = bounds[res.t].feasible
            results.append(res)
            if progress:
                progress(res)
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for res in pool.map(_point_task, tasks):
                res.feasible = bounds[res.t].feasible
                results.append(res)
                if progress:
                    progress(res)
    return SimReport(config, results, bounds, code)
