"""Jump-measure variants and their tail-decay metadata.

Every measure knows three things beyond its pointwise density/atom data:

* how each tail decays (:class:`TailDecay`), which is what decides whether
  an exponential moment ``∫ |x|^m e^{t x} ν(dx)`` converges without ever
  integrating anything;
* whether it is exactly symmetric, which lets integration routines fold the
  negative axis onto the positive one so that odd integrands cancel exactly
  (not just to quadrature tolerance);
* how to tilt itself by ``e^{κx}``, in closed form where the family is
  closed under tilting and via a generic wrapper otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from ..errors import KappaOutsideI, UnsupportedMeasure, ValidationError

__all__ = [
    "TailDecay",
    "LevyMeasure",
    "FiniteAtomic",
    "GaussianJumps",
    "DoubleExponentialJumps",
    "JumpDiffusion",
    "VarianceGamma",
    "CGMY",
    "SymmetricAlphaStable",
    "Tempered",
    "ExpTilted",
    "GenericDensity",
    "ExpJumpImage",
    "LogJumpImage",
    "zero_measure",
]


# ---------------------------------------------------------------------------
# tail decay descriptors
# ---------------------------------------------------------------------------

_BOUNDED = "bounded"
_SUPEREXP = "superexp"
_EXP = "exp"
_POLY = "poly"


@dataclass(frozen=True)
class TailDecay:
    """Asymptotic decay of one tail of a jump measure.

    The descriptor is direction-free: it describes the behaviour of the
    tail mass at distance ``s -> +inf`` along its own side.  Kinds:

    ``bounded``
        no mass at distance ``> cutoff``;
    ``superexp``
        decays faster than every exponential (e.g. Gaussian factors,
        quadratic tempering);
    ``exp``
        density ``~ s^power * exp(-rate * s)``;
    ``poly``
        density ``~ s^power`` (``power = -inf`` encodes "faster than any
        polynomial but slower than any exponential").
    """

    kind: str
    rate: float = 0.0
    power: float = 0.0
    cutoff: float = math.inf

    def __post_init__(self) -> None:
        if self.kind not in (_BOUNDED, _SUPEREXP, _EXP, _POLY):
            raise ValidationError(f"unknown tail kind {self.kind!r}")
        if self.kind == _EXP and not self.rate > 0:
            raise ValidationError("exp tail needs rate > 0")

    # constructors ------------------------------------------------------
    @staticmethod
    def bounded(cutoff: float = 1.0) -> "TailDecay":
        return TailDecay(_BOUNDED, cutoff=float(cutoff))

    @staticmethod
    def superexp() -> "TailDecay":
        return TailDecay(_SUPEREXP)

    @staticmethod
    def exponential(rate: float, power: float = 0.0) -> "TailDecay":
        return TailDecay(_EXP, rate=float(rate), power=float(power))

    @staticmethod
    def polynomial(power: float) -> "TailDecay":
        return TailDecay(_POLY, power=float(power))

    # queries -------------------------------------------------------------
    def moment_finite(self, weight_power: int, tilt_along: float) -> bool:
        """Whether ``∫_{s>1} s^weight_power e^{tilt_along * s} (tail) ds``
        converges.  ``tilt_along`` is the exponential rate *along* the tail
        direction (pass ``κ`` for the right tail, ``-κ`` for the left)."""
        if self.kind in (_BOUNDED, _SUPEREXP):
            return True
        if self.kind == _EXP:
            if tilt_along < self.rate:
                return True
            if tilt_along == self.rate:
                return self.power + weight_power < -1.0
            return False
        # polynomial
        if tilt_along < 0.0:
            return True
        if tilt_along == 0.0:
            return self.power + weight_power < -1.0
        return False

    def tilt_sup(self) -> float:
        """Supremum of tilts with a finite plain exponential moment."""
        if self.kind in (_BOUNDED, _SUPEREXP):
            return math.inf
        if self.kind == _EXP:
            return self.rate
        return 0.0

    # transforms ----------------------------------------------------------
    def tempered_superexp(self) -> "TailDecay":
        """Effect of multiplying by a super-exponentially decaying weight."""
        return self if self.kind == _BOUNDED else TailDecay.superexp()

    def tilted(self, tilt_along: float) -> "TailDecay":
        """Effect of multiplying the tail by ``e^{tilt_along * s}``.

        Caller guarantees the tilt keeps the measure finite on this side.
        """
        if self.kind in (_BOUNDED, _SUPEREXP) or tilt_along == 0.0:
            return self
        if self.kind == _EXP:
            new_rate = self.rate - tilt_along
            if new_rate > 0:
                return TailDecay.exponential(new_rate, self.power)
            if new_rate == 0:
                return TailDecay.polynomial(self.power)
            raise KappaOutsideI(f"tilt {tilt_along} beyond rate {self.rate}")
        # polynomial tail: only negative tilts are admissible
        if tilt_along < 0:
            return TailDecay.exponential(-tilt_along, self.power)
        raise KappaOutsideI("positive tilt of a polynomial tail")


# ---------------------------------------------------------------------------
# base class
# ---------------------------------------------------------------------------


class LevyMeasure:
    """Common interface of all jump-measure variants.

    Subclasses are frozen dataclasses; instances are hashable so derived
    quantities can be memoised against them.
    """

    # structural queries -------------------------------------------------
    def atoms(self) -> Optional[Tuple[Tuple[float, float], ...]]:
        """((position, mass), ...) for purely atomic measures, else None."""
        return None

    def density(self, x: np.ndarray) -> np.ndarray:
        """Pointwise density at ``x != 0`` (vectorised)."""
        raise UnsupportedMeasure(f"{type(self).__name__} has no density")

    def log_density(self, x: np.ndarray) -> np.ndarray:
        """``log(density)``, overriding families provide it in closed form
        so that exponentially tilted tail integrands never meet an
        ``inf * 0`` from an underflowed density."""
        with np.errstate(divide="ignore"):
            return np.log(self.density(x))

    def right_tail(self) -> TailDecay:
        raise NotImplementedError

    def left_tail(self) -> TailDecay:
        raise NotImplementedError

    def is_symmetric(self) -> bool:
        """True only when the measure is exactly invariant under x -> -x."""
        return False

    def has_positive_jumps(self) -> bool:
        return True

    def has_negative_jumps(self) -> bool:
        return True

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def finite_activity(self) -> bool:
        """Whether the total mass is finite (compound-Poisson structure)."""
        return False

    # transforms -----------------------------------------------------------
    def tilted(self, kappa: float) -> "LevyMeasure":
        """The measure ``e^{κx} ν(dx)``; raises KappaOutsideI if infinite."""
        if kappa == 0.0:
            return self
        if not (self.right_tail().moment_finite(0, kappa)
                and self.left_tail().moment_finite(0, -kappa)):
            raise KappaOutsideI(f"tilt {kappa} gives an infinite measure")
        return ExpTilted(self, kappa)

    # reporting ------------------------------------------------------------
    def describe(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# purely atomic measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteAtomic(LevyMeasure):
    """Finitely many atoms; ``atom_list`` is ((position, mass), ...).

    The empty tuple is the zero measure (a jump-free process).
    """

    atom_list: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        norm = []
        for pos, mass in self.atom_list:
            pos, mass = float(pos), float(mass)
            if not math.isfinite(pos) or pos == 0.0:
                raise ValidationError(f"atom position must be finite nonzero, got {pos}")
            if not (mass > 0) or not math.isfinite(mass):
                raise ValidationError(f"atom mass must be positive finite, got {mass}")
            norm.append((pos, mass))
        object.__setattr__(self, "atom_list", tuple(norm))

    def atoms(self) -> Tuple[Tuple[float, float], ...]:
        return self.atom_list

    def right_tail(self) -> TailDecay:
        sup = max((p for p, _ in self.atom_list if p > 0), default=0.0)
        return TailDecay.bounded(sup)

    def left_tail(self) -> TailDecay:
        inf = min((p for p, _ in self.atom_list if p < 0), default=0.0)
        return TailDecay.bounded(-inf)

    def is_symmetric(self) -> bool:
        table = sorted(self.atom_list)
        mirrored = sorted((-p, m) for p, m in self.atom_list)
        return table == mirrored

    def has_positive_jumps(self) -> bool:
        return any(p > 0 for p, _ in self.atom_list)

    def has_negative_jumps(self) -> bool:
        return any(p < 0 for p, _ in self.atom_list)

    @property
    def is_zero(self) -> bool:
        return not self.atom_list

    @property
    def finite_activity(self) -> bool:
        return True

    def total_mass(self) -> float:
        return float(sum(m for _, m in self.atom_list))

    def tilted(self, kappa: float) -> "FiniteAtomic":
        if kappa == 0.0:
            return self
        return FiniteAtomic(tuple((p, m * math.exp(kappa * p)) for p, m in self.atom_list))

    def describe(self) -> dict:
        return {"type": "finite_atomic", "atoms": [[p, m] for p, m in self.atom_list]}


def zero_measure() -> FiniteAtomic:
    """The zero jump measure (continuous processes)."""
    return FiniteAtomic(())


# ---------------------------------------------------------------------------
# compound-Poisson jump size densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianJumps:
    """Normal(mean, std^2) jump sizes."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if not self.std > 0:
            raise ValidationError("jump std must be > 0")

    def pdf(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.mean) / self.std
        return np.exp(-0.5 * z * z) / (self.std * math.sqrt(2.0 * math.pi))

    def mgf(self, kappa: float) -> float:
        return math.exp(kappa * self.mean + 0.5 * kappa * kappa * self.std * self.std)


@dataclass(frozen=True)
class DoubleExponentialJumps:
    """Two-sided exponential jump sizes.

    With probability ``p`` the jump is ``Exp(eta_plus)`` to the right, with
    probability ``1 - p`` it is ``-Exp(eta_minus)``.
    """

    p: float
    eta_plus: float
    eta_minus: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError("mixing probability must lie in [0, 1]")
        if not (self.eta_plus > 0 and self.eta_minus > 0):
            raise ValidationError("exponential rates must be > 0")

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        pos = self.p * self.eta_plus * np.exp(-self.eta_plus * np.clip(x, 0.0, None))
        neg = (1.0 - self.p) * self.eta_minus * np.exp(self.eta_minus * np.clip(x, None, 0.0))
        return np.where(x > 0, pos, np.where(x < 0, neg, 0.0))

    def mgf(self, kappa: float) -> float:
        if not (-self.eta_minus < kappa < self.eta_plus):
            raise KappaOutsideI(f"double-exponential mgf needs kappa in "
                                f"(-{self.eta_minus}, {self.eta_plus})")
        return (self.p * self.eta_plus / (self.eta_plus - kappa)
                + (1.0 - self.p) * self.eta_minus / (self.eta_minus + kappa))


@dataclass(frozen=True)
class JumpDiffusion(LevyMeasure):
    """Finite-activity measure ``intensity * (jump size pdf)``."""

    intensity: float
    jumps: object  # GaussianJumps | DoubleExponentialJumps

    def __post_init__(self) -> None:
        if not self.intensity > 0:
            raise ValidationError("jump intensity must be > 0")
        if not isinstance(self.jumps, (GaussianJumps, DoubleExponentialJumps)):
            raise ValidationError("unsupported jump size distribution")

    def density(self, x: np.ndarray) -> np.ndarray:
        return self.intensity * self.jumps.pdf(x)

    def log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        j = self.jumps
        if isinstance(j, GaussianJumps):
            z = (x - j.mean) / j.std
            return (math.log(self.intensity) - 0.5 * z * z
                    - math.log(j.std * math.sqrt(2.0 * math.pi)))
        with np.errstate(divide="ignore"):
            log_pos = np.log(self.intensity * j.p * j.eta_plus) - j.eta_plus * x
            log_neg = np.log(self.intensity * (1.0 - j.p) * j.eta_minus) + j.eta_minus * x
        return np.where(x > 0, log_pos, np.where(x < 0, log_neg, -np.inf))

    def right_tail(self) -> TailDecay:
        if isinstance(self.jumps, GaussianJumps):
            return TailDecay.superexp()
        j = self.jumps
        if j.p == 0.0:
            return TailDecay.bounded(0.0)
        return TailDecay.exponential(j.eta_plus, 0.0)

    def left_tail(self) -> TailDecay:
        if isinstance(self.jumps, GaussianJumps):
            return TailDecay.superexp()
        j = self.jumps
        if j.p == 1.0:
            return TailDecay.bounded(0.0)
        return TailDecay.exponential(j.eta_minus, 0.0)

    def is_symmetric(self) -> bool:
        j = self.jumps
        if isinstance(j, GaussianJumps):
            return j.mean == 0.0
        return j.p == 0.5 and j.eta_plus == j.eta_minus

    def has_positive_jumps(self) -> bool:
        return not (isinstance(self.jumps, DoubleExponentialJumps) and self.jumps.p == 0.0)

    def has_negative_jumps(self) -> bool:
        return not (isinstance(self.jumps, DoubleExponentialJumps) and self.jumps.p == 1.0)

    @property
    def finite_activity(self) -> bool:
        return True

    def total_mass(self) -> float:
        return self.intensity

    def tilted(self, kappa: float) -> "JumpDiffusion":
        """Closed-form tilt: both families are closed under e^{κx} weights."""
        if kappa == 0.0:
            return self
        j = self.jumps
        if isinstance(j, GaussianJumps):
            lam = self.intensity * j.mgf(kappa)
            return JumpDiffusion(lam, GaussianJumps(j.mean + kappa * j.std ** 2, j.std))
        w_pos = self.intensity * j.p * j.eta_plus
        w_neg = self.intensity * (1.0 - j.p) * j.eta_minus
        if w_pos > 0 and not kappa < j.eta_plus:
            raise KappaOutsideI(f"tilt {kappa} >= right rate {j.eta_plus}")
        if w_neg > 0 and not kappa > -j.eta_minus:
            raise KappaOutsideI(f"tilt {kappa} <= left rate -{j.eta_minus}")
        # each one-sided exponential component stays exponential with a
        # shifted rate; only the component weights change.  A side with no
        # mass keeps its (irrelevant) rate so it stays positive.
        m_pos = w_pos / (j.eta_plus - kappa) if w_pos > 0 else 0.0
        m_neg = w_neg / (j.eta_minus + kappa) if w_neg > 0 else 0.0
        lam = m_pos + m_neg
        p_new = m_pos / lam
        eta_p = j.eta_plus - kappa if w_pos > 0 else j.eta_plus
        eta_m = j.eta_minus + kappa if w_neg > 0 else j.eta_minus
        return JumpDiffusion(lam, DoubleExponentialJumps(p_new, eta_p, eta_m))

    def describe(self) -> dict:
        j = self.jumps
        if isinstance(j, GaussianJumps):
            jd = {"family": "gaussian", "mean": j.mean, "std": j.std}
        else:
            jd = {"family": "double_exponential", "p": j.p,
                  "eta_plus": j.eta_plus, "eta_minus": j.eta_minus}
        return {"type": "jump_diffusion", "intensity": self.intensity, "jumps": jd}


# ---------------------------------------------------------------------------
# infinite-activity parametric families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceGamma(LevyMeasure):
    """Density ``C e^{-M x}/x`` on x>0 and ``C e^{-G |x|}/|x|`` on x<0."""

    C: float
    G: float
    M: float

    def __post_init__(self) -> None:
        if not (self.C > 0 and self.G > 0 and self.M > 0):
            raise ValidationError("variance-gamma parameters must be > 0")

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        rate = np.where(x > 0, self.M, self.G)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.C * np.exp(-rate * ax) / ax
        return np.where(ax > 0, out, np.inf)

    def log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        rate = np.where(x > 0, self.M, self.G)
        with np.errstate(divide="ignore"):
            return math.log(self.C) - rate * ax - np.log(ax)

    def right_tail(self) -> TailDecay:
        return TailDecay.exponential(self.M, -1.0)

    def left_tail(self) -> TailDecay:
        return TailDecay.exponential(self.G, -1.0)

    def is_symmetric(self) -> bool:
        return self.G == self.M

    def tilted(self, kappa: float) -> "VarianceGamma":
        if kappa == 0.0:
            return self
        if not (-self.G < kappa < self.M):
            raise KappaOutsideI(f"tilt {kappa} outside (-{self.G}, {self.M})")
        return VarianceGamma(self.C, self.G + kappa, self.M - kappa)

    def describe(self) -> dict:
        return {"type": "variance_gamma", "C": self.C, "G": self.G, "M": self.M}


@dataclass(frozen=True)
class CGMY(LevyMeasure):
    """Density ``C e^{-M x} x^{-1-Y}`` on x>0, mirrored with rate G on x<0.

    ``G`` and ``M`` may be zero (pure polynomial tail); that is exactly what
    an extreme admissible tilt produces.
    """

    C: float
    G: float
    M: float
    Y: float

    def __post_init__(self) -> None:
        if not self.C > 0:
            raise ValidationError("C must be > 0")
        if self.G < 0 or self.M < 0:
            raise ValidationError("G and M must be >= 0")
        if not 0.0 < self.Y < 2.0:
            raise ValidationError("Y must lie in (0, 2)")

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        rate = np.where(x > 0, self.M, self.G)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.C * np.exp(-rate * ax) * ax ** (-1.0 - self.Y)
        return np.where(ax > 0, out, np.inf)

    def log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        rate = np.where(x > 0, self.M, self.G)
        with np.errstate(divide="ignore"):
            return math.log(self.C) - rate * ax - (1.0 + self.Y) * np.log(ax)

    def _tail(self, rate: float) -> TailDecay:
        if rate > 0:
            return TailDecay.exponential(rate, -1.0 - self.Y)
        return TailDecay.polynomial(-1.0 - self.Y)

    def right_tail(self) -> TailDecay:
        return self._tail(self.M)

    def left_tail(self) -> TailDecay:
        return self._tail(self.G)

    def is_symmetric(self) -> bool:
        return self.G == self.M

    def tilted(self, kappa: float) -> "CGMY":
        if kappa == 0.0:
            return self
        # endpoints are admissible: the tail density keeps an integrable
        # polynomial factor |x|^{-1-Y}
        if not (-self.G <= kappa <= self.M):
            raise KappaOutsideI(f"tilt {kappa} outside [-{self.G}, {self.M}]")
        return CGMY(self.C, self.G + kappa, self.M - kappa, self.Y)

    def describe(self) -> dict:
        return {"type": "cgmy", "C": self.C, "G": self.G, "M": self.M, "Y": self.Y}


@dataclass(frozen=True)
class SymmetricAlphaStable(LevyMeasure):
    """Density ``scale * |x|^{-alpha-1}`` on both sides."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 2.0:
            raise ValidationError("alpha must lie in (0, 2)")
        if not self.scale > 0:
            raise ValidationError("scale must be > 0")

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        with np.errstate(divide="ignore"):
            out = self.scale * ax ** (-1.0 - self.alpha)
        return np.where(ax > 0, out, np.inf)

    def log_density(self, x: np.ndarray) -> np.ndarray:
        ax = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            return math.log(self.scale) - (1.0 + self.alpha) * np.log(ax)

    def right_tail(self) -> TailDecay:
        return TailDecay.polynomial(-1.0 - self.alpha)

    left_tail = right_tail

    def is_symmetric(self) -> bool:
        return True

    def tilted(self, kappa: float) -> "LevyMeasure":
        if kappa == 0.0:
            return self
        raise KappaOutsideI("a stable measure has exponential moments only at 0")

    def describe(self) -> dict:
        return {"type": "symmetric_alpha_stable", "alpha": self.alpha, "scale": self.scale}


# ---------------------------------------------------------------------------
# wrappers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tempered(LevyMeasure):
    """``weight(x) ν(dx)`` with a weight taking values in (0, 1].

    ``weight_superexp`` declares that the weight decays super-exponentially
    in both tails (true for the quadratic default penalty); it drives the
    tail metadata of the product.  ``weight_even`` declares exact symmetry
    of the weight, which lets a symmetric base stay symmetric.
    """

    base: LevyMeasure
    weight: Callable[[np.ndarray], np.ndarray]
    weight_superexp: bool = True
    weight_even: bool = False
    log_weight: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def atoms(self) -> Optional[Tuple[Tuple[float, float], ...]]:
        base_atoms = self.base.atoms()
        if base_atoms is None:
            return None
        return tuple((p, m * float(self.weight(np.asarray(p)))) for p, m in base_atoms)

    def density(self, x: np.ndarray) -> np.ndarray:
        return self.base.density(x) * self.weight(np.asarray(x, dtype=float))

    def log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.log_weight is not None:
            lw = self.log_weight(x)
        else:
            with np.errstate(divide="ignore"):
                lw = np.log(self.weight(x))
        return self.base.log_density(x) + lw

    def right_tail(self) -> TailDecay:
        t = self.base.right_tail()
        return t.tempered_superexp() if self.weight_superexp else t

    def left_tail(self) -> TailDecay:
        t = self.base.left_tail()
        return t.tempered_superexp() if self.weight_superexp else t

    def is_symmetric(self) -> bool:
        return self.weight_even and self.base.is_symmetric()

    def has_positive_jumps(self) -> bool:
        return self.base.has_positive_jumps()

    def has_negative_jumps(self) -> bool:
        return self.base.has_negative_jumps()

    @property
    def finite_activity(self) -> bool:
        # the weight is bounded by one and equals one near zero for every
        # penalty this package constructs, so activity matches the base
        return self.base.finite_activity

    def describe(self) -> dict:
        return {"type": "tempered", "base": self.base.describe(),
                "weight": getattr(self.weight, "__name__", "custom")}


@dataclass(frozen=True)
class ExpTilted(LevyMeasure):
    """``e^{κx} ν(dx)`` for measures without a closed tilt form.

    The constructor refuses tilts that give the product infinite mass.
    """

    base: LevyMeasure
    kappa: float

    def __post_init__(self) -> None:
        if isinstance(self.base, ExpTilted):
            merged = self.base.kappa + self.kappa
            object.__setattr__(self, "kappa", merged)
            object.__setattr__(self, "base", self.base.base)
        if not (self.base.right_tail().moment_finite(0, self.kappa)
                and self.base.left_tail().moment_finite(0, -self.kappa)):
            raise KappaOutsideI(f"tilt {self.kappa} gives an infinite measure")

    def atoms(self) -> Optional[Tuple[Tuple[float, float], ...]]:
        base_atoms = self.base.atoms()
        if base_atoms is None:
            return None
        return tuple((p, m * math.exp(self.kappa * p)) for p, m in base_atoms)

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.base.density(x) * np.exp(self.kappa * x)

    def log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.base.log_density(x) + self.kappa * x

    def right_tail(self) -> TailDecay:
        return self.base.right_tail().tilted(self.kappa)

    def left_tail(self) -> TailDecay:
        return self.base.left_tail().tilted(-self.kappa)

    def is_symmetric(self) -> bool:
        return self.kappa == 0.0 and self.base.is_symmetric()

    def has_positive_jumps(self) -> bool:
        return self.base.has_positive_jumps()

    def has_negative_jumps(self) -> bool:
        return self.base.has_negative_jumps()

    @property
    def finite_activity(self) -> bool:
        return self.base.finite_activity

    def tilted(self, kappa: float) -> "LevyMeasure":
        if kappa == 0.0:
            return self
        return ExpTilted(self.base, self.kappa + kappa)

    def describe(self) -> dict:
        return {"type": "exp_tilted", "base": self.base.describe(), "kappa": self.kappa}


@dataclass(frozen=True)
class GenericDensity(LevyMeasure):
    """A user-supplied density with mandatory tail declarations.

    Without tail metadata no finite computation can decide whether an
    exponential moment converges, so the declarations are part of the
    constructor contract.
    """

    density_fn: Callable[[np.ndarray], np.ndarray]
    right: TailDecay
    left: TailDecay
    symmetric: bool = False
    positive_jumps: bool = True
    negative_jumps: bool = True

    def density(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.density_fn(np.asarray(x, dtype=float)), dtype=float)

    def right_tail(self) -> TailDecay:
        return self.right

    def left_tail(self) -> TailDecay:
        return self.left

    def is_symmetric(self) -> bool:
        return self.symmetric

    def has_positive_jumps(self) -> bool:
        return self.positive_jumps

    def has_negative_jumps(self) -> bool:
        return self.negative_jumps

    def describe(self) -> dict:
        return {"type": "generic_density",
                "density": getattr(self.density_fn, "__name__", "custom")}


# ---------------------------------------------------------------------------
# jump-size change of variables between linear and geometric markets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpJumpImage(LevyMeasure):
    """Image of a measure under ``x -> e^x - 1`` (log-jumps to price jumps).

    Supported on ``(-1, inf)``; the left tail is therefore trivially
    bounded.  Right-tail metadata is mapped conservatively: an exponential
    tail with rate ``r`` becomes a polynomial tail of order ``-r-1`` (the
    logarithmic prefactor this ignores only matters exactly at the
    convergence boundary ``r = 1``, where membership is decided as
    divergent).
    """

    base: LevyMeasure

    def atoms(self) -> Optional[Tuple[Tuple[float, float], ...]]:
        base_atoms = self.base.atoms()
        if base_atoms is None:
            return None
        return tuple((math.expm1(p), m) for p, m in base_atoms)

    def density(self, x: np.ndarray) -> np.ndarray:
        y = np.asarray(x, dtype=float)
        ok = y > -1.0
        safe = np.where(ok, y, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.base.density(np.log1p(safe)) / (1.0 + safe)
        return np.where(ok, val, 0.0)

    def log_density(self, x: np.ndarray) -> np.ndarray:
        y = np.asarray(x, dtype=float)
        ok = y > -1.0
        safe = np.where(ok, y, 0.0)
        lp = np.log1p(safe)
        out = self.base.log_density(lp) - lp
        return np.where(ok, out, -np.inf)

    def right_tail(self) -> TailDecay:
        t = self.base.right_tail()
        if t.kind == _BOUNDED:
            return TailDecay.bounded(math.expm1(t.cutoff) if math.isfinite(t.cutoff) else math.inf)
        if t.kind == _EXP:
            return TailDecay.polynomial(-t.rate - 1.0)
        if t.kind == _SUPEREXP:
            return TailDecay.polynomial(-math.inf)
        # polynomial log-jump tail: price jumps have density ~ (log y)^p / y,
        # whose mass converges but whose first moment never does
        return TailDecay.polynomial(-1.5)

    def left_tail(self) -> TailDecay:
        return TailDecay.bounded(1.0)

    def has_positive_jumps(self) -> bool:
        return self.base.has_positive_jumps()

    def has_negative_jumps(self) -> bool:
        return self.base.has_negative_jumps()

    @property
    def finite_activity(self) -> bool:
        return self.base.finite_activity

    def describe(self) -> dict:
        return {"type": "exp_jump_image", "base": self.base.describe()}


@dataclass(frozen=True)
class LogJumpImage(LevyMeasure):
    """Image of a price-jump measure under ``y -> log(1+y)``.

    The constructor only accepts measures that verifiably carry no mass on
    ``(-inf, 0)`` beyond a bounded cutoff above -1; general densities with
    mass arbitrarily close to -1 would need a decay descriptor at -1 that
    this package does not model.
    """

    base: LevyMeasure

    def __post_init__(self) -> None:
        if self.base.has_negative_jumps():
            t = self.base.left_tail()
            if not (t.kind == _BOUNDED and t.cutoff < 1.0):
                raise UnsupportedMeasure(
                    "log-jump image needs the price-jump measure to stay a "
                    "bounded distance above -1; use atoms or the inverse of "
                    "an exp-jump image instead")

    def atoms(self) -> Optional[Tuple[Tuple[float, float], ...]]:
        base_atoms = self.base.atoms()
        if base_atoms is None:
            return None
        return tuple((math.log1p(p), m) for p, m in base_atoms)

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ex = np.exp(x)
        return self.base.density(np.expm1(x)) * ex

    def log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.base.log_density(np.expm1(x)) + x

    def right_tail(self) -> TailDecay:
        t = self.base.right_tail()
        if t.kind == _BOUNDED:
            return TailDecay.bounded(math.log1p(t.cutoff) if math.isfinite(t.cutoff) else math.inf)
        if t.kind == _POLY:
            if math.isinf(t.power):
                return TailDecay.superexp()
            return TailDecay.exponential(-(t.power + 1.0), 0.0)
        return TailDecay.superexp()

    def left_tail(self) -> TailDecay:
        if not self.base.has_negative_jumps():
            return TailDecay.bounded(0.0)
        c = self.base.left_tail().cutoff
        return TailDecay.bounded(-math.log1p(-c))

    def has_positive_jumps(self) -> bool:
        return self.base.has_positive_jumps()

    def has_negative_jumps(self) -> bool:
        return self.base.has_negative_jumps()

    @property
    def finite_activity(self) -> bool:
        return self.base.finite_activity

    def describe(self) -> dict:
        return {"type": "log_jump_image", "base": self.base.describe()}
