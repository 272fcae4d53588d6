"""Simulation cross-checks for the analytic machinery.

Draws of the terminal value ``L_T`` via the compound-Poisson + Gaussian
decomposition (jumps above a cutoff sampled exactly per family, the
compensated remainder either variance-matched by a Gaussian or dropped),
plus self-normalized importance-sampling estimators for the martingale
defect and the relative entropy under an exponential tilt, and the exact
pathwise evaluation of the tempering density ``Z^n_T``.

Sampling is reproducible and parallelism-independent: paths are split
into fixed-size batches, each driven by its own counter-based generator
spawned deterministically from the seed, so the same (model, config)
yields bit-identical output regardless of worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.special import exp1

from .approximation import PenaltyFamily, _mass_gap
from .errors import (DegenerateWeights, MissingJumpRecords,
                     UnsupportedMeasure)
from .levy_core.measures import (CGMY, DoubleExponentialJumps, FiniteAtomic,
                                 GaussianJumps, JumpDiffusion, LevyMeasure,
                                 SymmetricAlphaStable, Tempered,
                                 VarianceGamma)
from .levy_core.quadrature import (DEFAULT_SETTINGS, QuadratureSettings,
                                   _one_sided_x2_mass, _panel_with_log_retry)
from .levy_core.triplets import TripletLike, as_validated

__all__ = [
    "SimConfig",
    "SamplePack",
    "sample_terminal",
    "martingale_defect",
    "entropy_estimate",
    "PathwiseZn",
    "pathwise_log_zn",
]

_BATCH = 8192
_MIN_ESS = 10.0


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters.

    ``epsilon`` is the magnitude below which density-measure jumps are
    folded into the compensated remainder; it must not exceed 1 so every
    jump the penalty families can see is sampled individually.
    ``small_jump_mode`` picks between a variance-matched Gaussian
    (``"gaussian"``) and dropping the remainder (``"drop"``).
    """

    T: float
    n_samples: int
    epsilon: float = 0.01
    seed: int = 0
    small_jump_mode: str = "gaussian"
    record_jumps: bool = False

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ValueError("T must be > 0")
        if not (isinstance(self.n_samples, (int, np.integer)) and self.n_samples >= 1):
            raise ValueError("n_samples must be an integer >= 1")
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError("epsilon must be in (0, 1]")
        if self.small_jump_mode not in ("gaussian", "drop"):
            raise ValueError("small_jump_mode must be 'gaussian' or 'drop'")


@dataclass(frozen=True)
class SamplePack:
    """Terminal draws plus optional per-path jump records ``(time, size)``
    for jumps larger than the cutoff."""

    values: np.ndarray
    T: float
    seed: int
    jump_records: Optional[Tuple[np.ndarray, ...]] = None

    @property
    def n(self) -> int:
        return int(self.values.size)


# ---------------------------------------------------------------------------
# per-family large-jump plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _JumpPlan:
    """How to simulate the individually-sampled jumps of one measure:
    their Poisson rate, a size sampler, and whether the plan already
    covers jumps of every magnitude (exact) or only ``|x| > eps``."""

    rate: float
    draw: Optional[Callable[[np.random.Generator, int], np.ndarray]]
    exact: bool


def _quad_side(nu: LevyMeasure, side: int, lo: float, hi: float,
               weight: Callable[[np.ndarray], np.ndarray],
               q: QuadratureSettings) -> float:
    """``∫_{lo<s<hi} weight(side*s) ν(side*s) ds`` over tail distances."""
    if hi <= lo:
        return 0.0

    def f(s: float) -> float:
        x = np.asarray(side * s, dtype=float)
        with np.errstate(all="ignore"):
            return float(np.asarray(weight(x) * nu.density(x)))

    val, _, ok = _panel_with_log_retry(f, lo, hi, q, ())
    if not ok:
        raise UnsupportedMeasure(
            f"could not integrate the jump density on side {side:+d}")
    return val


def _rejection_sampler(propose, accept_prob):
    """Vectorised rejection sampling: draw until ``k`` accepts."""

    def draw(rng: np.random.Generator, k: int) -> np.ndarray:
        out = np.empty(0)
        while out.size < k:
            need = k - out.size
            cand = propose(rng, max(64, 2 * need))
            u = rng.random(cand.size)
            out = np.concatenate([out, cand[u < accept_prob(cand)]])
        return out[:k]

    return draw


def _one_sided_exp_poly_plan(C: float, rate: float, power_y: float,
                             eps: float, q: QuadratureSettings,
                             side: int) -> Tuple[float, Callable]:
    """Plan for density ``C e^{-rate*s} s^{-1-power_y}`` on ``s > eps``
    (``power_y = 0`` is the gamma-like case).  Returns (intensity, draw of
    signed sizes)."""
    if power_y == 0.0:
        lam = C * float(exp1(rate * eps))

        def propose(rng, k):
            return eps + rng.exponential(1.0 / rate, k)

        draw = _rejection_sampler(propose, lambda x: eps / x)
    else:
        lam = _quad_side(
            _PlainExpPoly(C, rate, power_y), +1, eps, math.inf,
            lambda x: np.ones_like(x), q)

        def propose(rng, k):
            return eps * rng.random(k) ** (-1.0 / power_y)

        def accept(x):
            with np.errstate(over="ignore"):
                return np.exp(-rate * (x - eps))

        draw = _rejection_sampler(propose, accept)

    def signed_draw(rng, k):
        return side * draw(rng, k)

    return lam, signed_draw


class _PlainExpPoly:
    """Minimal density adapter for :func:`_quad_side` rate integrals."""

    def __init__(self, C: float, rate: float, y: float) -> None:
        self.C, self.rate, self.y = C, rate, y

    def density(self, x: np.ndarray) -> np.ndarray:
        s = np.abs(np.asarray(x, dtype=float))
        with np.errstate(all="ignore"):
            return self.C * np.exp(-self.rate * s) * s ** (-1.0 - self.y)


def _mix_plans(parts: List[Tuple[float, Callable]], exact: bool) -> _JumpPlan:
    rates = np.array([r for r, _ in parts], dtype=float)
    total = float(rates.sum())
    if total == 0.0:
        return _JumpPlan(0.0, None, exact)
    probs = rates / total
    draws = [d for _, d in parts]

    def draw(rng: np.random.Generator, k: int) -> np.ndarray:
        counts = rng.multinomial(k, probs)
        chunks = [draws[i](rng, int(c)) for i, c in enumerate(counts) if c > 0]
        sizes = np.concatenate(chunks) if chunks else np.empty(0)
        return rng.permutation(sizes)

    return _JumpPlan(total, draw, exact)


def _jump_plan(nu: LevyMeasure, eps: float, q: QuadratureSettings) -> _JumpPlan:
    """Build the large-jump sampling plan, or raise ``UnsupportedMeasure``."""
    atoms = nu.atoms()
    if atoms is not None:
        if not atoms:
            return _JumpPlan(0.0, None, True)
        positions = np.array([p for p, _ in atoms])
        masses = np.array([m for _, m in atoms])
        total = float(masses.sum())
        probs = masses / total

        def draw(rng: np.random.Generator, k: int) -> np.ndarray:
            return rng.choice(positions, size=k, p=probs)

        return _JumpPlan(total, draw, True)

    if isinstance(nu, JumpDiffusion):
        j = nu.jumps
        if isinstance(j, GaussianJumps):
            def draw(rng, k):
                return rng.normal(j.mean, j.std, k)
        else:
            def draw(rng, k, jj=j):
                pos = rng.random(k) < jj.p
                out = np.where(pos,
                               rng.exponential(1.0 / jj.eta_plus, k),
                               -rng.exponential(1.0 / jj.eta_minus, k))
                return out
        return _JumpPlan(nu.intensity, draw, True)

    if isinstance(nu, SymmetricAlphaStable):
        lam_side = nu.scale * eps ** (-nu.alpha) / nu.alpha

        def draw(rng, k):
            sign = np.where(rng.random(k) < 0.5, 1.0, -1.0)
            return sign * eps * rng.random(k) ** (-1.0 / nu.alpha)

        return _JumpPlan(2.0 * lam_side, draw, False)

    if isinstance(nu, VarianceGamma):
        parts = [_one_sided_exp_poly_plan(nu.C, nu.M, 0.0, eps, q, +1),
                 _one_sided_exp_poly_plan(nu.C, nu.G, 0.0, eps, q, -1)]
        return _mix_plans(parts, False)

    if isinstance(nu, CGMY):
        parts = [_one_sided_exp_poly_plan(nu.C, nu.M, nu.Y, eps, q, +1),
                 _one_sided_exp_poly_plan(nu.C, nu.G, nu.Y, eps, q, -1)]
        return _mix_plans(parts, False)

    if isinstance(nu, Tempered):
        base = _jump_plan(nu.base, eps, q)
        if base.draw is None:
            return base
        weight_fn = nu.weight

        def draw(rng: np.random.Generator, k: int) -> np.ndarray:
            # sizes of the tempered process are base sizes accepted with
            # probability weight(x) <= 1; the intensity shrinks accordingly
            out = np.empty(0)
            while out.size < k:
                cand = base.draw(rng, max(64, 2 * (k - out.size)))
                w = np.asarray(weight_fn(cand), dtype=float)
                if np.any(w > 1.0 + 1e-12):
                    raise UnsupportedMeasure(
                        "tempering weight exceeds 1: thinning sampler invalid")
                out = np.concatenate([out, cand[rng.random(cand.size) < w]])
            return out[:k]

        return _JumpPlan(_thinned_rate(nu, eps, q), draw, base.exact)

    raise UnsupportedMeasure(
        f"no sampling recipe for measure type {type(nu).__name__}")


def _thinned_rate(nu: Tempered, eps: float, q: QuadratureSettings) -> float:
    """``∫_{|x|>eps} weight dν_base`` — the effective tempered intensity."""
    lo = eps
    total = 0.0
    for side in (+1, -1):
        total += _quad_side(nu.base, side, lo, _side_limit(nu.base, side),
                            nu.weight, q)
    return total


def _side_limit(nu: LevyMeasure, side: int) -> float:
    tail = nu.right_tail() if side > 0 else nu.left_tail()
    if tail.kind == "bounded":
        return float(tail.cutoff)
    return math.inf


def _truncated_mean(nu: LevyMeasure, lo: float, q: QuadratureSettings) -> float:
    """``∫_{lo<|x|<=1} x ν(dx)`` — the compensator of the sampled jumps
    that fall inside the truncation ball."""
    atoms = nu.atoms()
    if atoms is not None:
        return float(math.fsum(p * m for p, m in atoms
                               if lo < abs(p) <= q.inner_cut))
    if nu.is_symmetric():
        return 0.0
    total = 0.0
    for side in (+1, -1):
        hi = min(q.inner_cut, _side_limit(nu, side))
        total += _quad_side(nu, side, lo, hi, lambda x: x, q)
    return total


def _small_variance(nu: LevyMeasure, eps: float, q: QuadratureSettings) -> float:
    """``∫_{|x|<=eps} x² ν(dx)`` for the Gaussian remainder."""
    if nu.atoms() is not None:
        return 0.0
    total = 0.0
    for side in (+1, -1):
        total += _one_sided_x2_mass(nu, side, eps, q)
    return total


# ---------------------------------------------------------------------------
# terminal sampling
# ---------------------------------------------------------------------------


def _worker_count() -> int:
    env = os.environ.get("LEVY_EMM_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def sample_terminal(t: TripletLike, cfg: SimConfig,
                    q: QuadratureSettings = DEFAULT_SETTINGS) -> SamplePack:
    """Draw ``cfg.n_samples`` i.i.d. values of ``L_T``.

    Work is split into fixed-size batches, each with its own generator
    spawned from the seed, so results are identical however many threads
    run them.  Jump records (times and sizes of jumps with magnitude
    above the cutoff) are kept per path when ``cfg.record_jumps`` is set.
    """
    vt = as_validated(t, q)
    nu = vt.nu
    plan = _jump_plan(nu, cfg.epsilon, q)
    cut_lo = 0.0 if plan.exact else cfg.epsilon
    tmean = _truncated_mean(nu, cut_lo, q) if plan.rate > 0.0 else 0.0
    small_sd = 0.0
    if not plan.exact and cfg.small_jump_mode == "gaussian":
        small_sd = math.sqrt(cfg.T * _small_variance(nu, cfg.epsilon, q))
    drift = (vt.b - tmean) * cfg.T
    sigma_sd = math.sqrt(vt.sigma2 * cfg.T)

    n = int(cfg.n_samples)
    n_batches = (n + _BATCH - 1) // _BATCH
    children = np.random.SeedSequence(cfg.seed).spawn(n_batches)
    values = np.empty(n, dtype=float)
    records: Optional[List] = [None] * n if cfg.record_jumps else None

    def run_batch(k: int) -> None:
        lo, hi = k * _BATCH, min(n, (k + 1) * _BATCH)
        count = hi - lo
        rng = np.random.Generator(np.random.Philox(children[k]))
        out = np.full(count, drift)
        if sigma_sd > 0.0:
            out += sigma_sd * rng.standard_normal(count)
        if small_sd > 0.0:
            out += small_sd * rng.standard_normal(count)
        if plan.rate > 0.0:
            counts = rng.poisson(plan.rate * cfg.T, count)
            total = int(counts.sum())
            sizes = plan.draw(rng, total) if total else np.empty(0)
            # per-path segment sums
            idx = np.repeat(np.arange(count), counts)
            out += np.bincount(idx, weights=sizes, minlength=count)
            if records is not None:
                times = rng.uniform(0.0, cfg.T, total)
                offsets = np.concatenate([[0], np.cumsum(counts)])
                for i in range(count):
                    seg = slice(offsets[i], offsets[i + 1])
                    s, tm = sizes[seg], times[seg]
                    keep = np.abs(s) > cfg.epsilon
                    order = np.argsort(tm[keep])
                    records[lo + i] = np.column_stack(
                        [tm[keep][order], s[keep][order]])
        elif records is not None:
            for i in range(count):
                records[lo + i] = np.empty((0, 2))
        values[lo:hi] = out

    workers = _worker_count()
    if workers > 1 and n_batches > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_batch, range(n_batches)))
    else:
        for k in range(n_batches):
            run_batch(k)

    return SamplePack(values, cfg.T, cfg.seed,
                      tuple(records) if records is not None else None)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def _norm_weights(values: np.ndarray, kappa: float) -> np.ndarray:
    """Importance weights ``e^{κ L}`` up to a common factor, with an
    effective-sample-size guard."""
    lw = kappa * values
    w = np.exp(lw - lw.max())
    ess = float(w.sum()) ** 2 / float((w * w).sum())
    if ess < _MIN_ESS:
        raise DegenerateWeights(
            f"effective sample size {ess:.2f} < {_MIN_ESS:g} at kappa={kappa}")
    return w


def martingale_defect(pack: SamplePack, kappa: float) -> Tuple[float, float]:
    """Estimate ``E[L_T]`` under the ``κ``-tilted measure, with a
    delta-method standard error; zero at a correct martingale tilt."""
    vals = pack.values
    w = _norm_weights(vals, float(kappa))
    wbar = float(w.mean())
    est = float((w * vals).mean()) / wbar
    resid = w * (vals - est)
    se = float(resid.std(ddof=1)) / (wbar * math.sqrt(vals.size))
    return est, se


def entropy_estimate(pack: SamplePack, kappa: float) -> Tuple[float, float]:
    """Estimate the relative entropy of the ``κ``-tilt, ``E[Z log Z]``
    with ``Z = e^{κL_T}`` normalized by the sample mgf.

    Identical in the limit to ``κ E_κ[L_T] - log E[e^{κL_T}]``; the
    standard error comes from the delta method on the two sample means
    involved.
    """
    kappa = float(kappa)
    vals = pack.values
    if kappa == 0.0:
        return 0.0, 0.0
    lw = kappa * vals
    shift = float(lw.max())
    w = np.exp(lw - shift)
    ess = float(w.sum()) ** 2 / float((w * w).sum())
    if ess < _MIN_ESS:
        raise DegenerateWeights(
            f"effective sample size {ess:.2f} < {_MIN_ESS:g} at kappa={kappa}")
    B = float(w.mean())
    A = float((w * vals).mean())
    log_phi_hat = shift + math.log(B)
    est = kappa * A / B - log_phi_hat
    gA = kappa / B
    gB = -kappa * A / (B * B) - 1.0 / B
    cov = np.cov(np.stack([w * vals, w]), ddof=1)
    var = gA * gA * cov[0, 0] + 2.0 * gA * gB * cov[0, 1] + gB * gB * cov[1, 1]
    se = math.sqrt(max(var, 0.0) / vals.size)
    return est, se


# ---------------------------------------------------------------------------
# pathwise tempering density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathwiseZn:
    """Exact per-path ``log Z^n_T`` plus its exponential's sample mean,
    standard error, and the n=1 uniform upper bound."""

    log_zn: np.ndarray
    zn_mean: float
    zn_se: float
    uniform_bound: float


def pathwise_log_zn(pack: SamplePack, p: PenaltyFamily, n: int,
                    nu: LevyMeasure, q: QuadratureSettings = DEFAULT_SETTINGS
                    ) -> PathwiseZn:
    """Evaluate ``log Z^n_T = -Σ ρ_n(jump) + T ∫ (1 - e^{-ρ_n}) dν`` on
    every recorded path.

    Exact, not approximate: the penalty vanishes on ``|x| <= 1``, so the
    unrecorded small jumps contribute nothing.  The sample mean of
    ``Z^n_T`` estimates 1 (unit expectation) and every path obeys the
    ``n = 1`` uniform bound.
    """
    if pack.jump_records is None:
        raise MissingJumpRecords(
            "pathwise evaluation needs jump records; sample with record_jumps=True")
    gap_n = _mass_gap(nu, p, int(n), q)
    gap_1 = _mass_gap(nu, p, 1, q)
    log_zn = np.array([
        pack.T * gap_n - float(np.sum(p.rho_at(n, rec[:, 1])))
        for rec in pack.jump_records])
    zn = np.exp(log_zn)
    mean = float(zn.mean())
    se = float(zn.std(ddof=1)) / math.sqrt(zn.size) if zn.size > 1 else 0.0
    return PathwiseZn(log_zn, mean, se, math.exp(pack.T * gap_1))
