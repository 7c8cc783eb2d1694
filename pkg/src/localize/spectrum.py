"""Parameter types shared by every module.

Classical spectra are validated once, by :func:`validate_spectrum`; downstream
code trusts a :class:`Spectrum` it is handed.  Constructing a ``Spectrum``
directly skips validation, which the integrand-level tests rely on.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import DegenerateSpectrum, LocalizeError, NonPositiveRho, OrderingViolation

# relative gap below which residue denominators are flagged
CONDITIONING_GAP = 1e-6


class Kind(str, enum.Enum):
    CP = "cp"
    CQ = "cq"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, Kind):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise LocalizeError(f"unknown manifold kind {value!r}; expected 'cp' or 'cq'") from None


class Method(str, enum.Enum):
    DH_SUM = "dh_sum"
    DET_FORM = "det_form"
    RESIDUE = "residue"
    CONTOUR = "contour"
    QUADRATURE = "quadrature"
    MONTECARLO = "montecarlo"
    FOCK_TRUNCATED = "fock_truncated"
    CLOSED = "closed"


class ConditioningWarning(UserWarning):
    """Spectrum gaps are small enough that residue forms lose precision."""


@dataclass(frozen=True)
class Spectrum:
    kind: Kind
    theta: tuple
    rho: float
    ill_conditioned: bool = False

    @property
    def n(self) -> int:
        """Complex dimension N (one less than the number of levels)."""
        return len(self.theta) - 1

    @property
    def values(self) -> np.ndarray:
        return np.asarray([float(t) for t in self.theta])


@dataclass(frozen=True, eq=False)
class ChartPoint:
    kind: Kind
    xi: np.ndarray

    def __post_init__(self):
        arr = np.array(self.xi, dtype=complex).reshape(-1)
        arr.flags.writeable = False
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        object.__setattr__(self, "xi", arr)

    @property
    def n(self) -> int:
        return self.xi.size

    @property
    def s(self) -> float:
        """Squared norm xi^dagger xi."""
        return float(np.vdot(self.xi, self.xi).real)

    @property
    def in_chart(self) -> bool:
        return self.kind is Kind.CP or self.s < 1.0

    def __eq__(self, other):
        if not isinstance(other, ChartPoint):
            return NotImplemented
        return self.kind is other.kind and np.array_equal(self.xi, other.xi)

    __hash__ = None


@dataclass(frozen=True)
class QuantumParams:
    """Rank ``n``, level ``k``, couplings ``c`` (length n+1) and complex time ``t``."""

    n: int
    k: int
    c: tuple
    t: complex

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))
        object.__setattr__(self, "t", complex(self.t))
        if self.n < 1:
            raise LocalizeError("rank n must be >= 1")
        if self.k < self.n:
            raise LocalizeError(f"level k={self.k} must satisfy k >= n={self.n}")
        if len(self.c) != self.n + 1:
            raise LocalizeError(f"expected {self.n + 1} couplings, got {len(self.c)}")

    @property
    def ratios(self) -> np.ndarray:
        """|exp(-i mu_a T)| for each mode."""
        return np.exp(mu_vector(self) * self.t.imag)

    @property
    def convergent(self) -> bool:
        return bool(np.all(self.ratios < 1.0))


@dataclass(frozen=True)
class PartitionEstimate:
    value: float | complex
    method: Method
    err: float = 0.0
    samples: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.err >= 0:
            raise LocalizeError(f"err must be nonnegative, got {self.err}")
        if self.samples < 0:
            raise LocalizeError("samples must be nonnegative")


def _coerce_level(t):
    if isinstance(t, Fraction):
        return t
    if isinstance(t, (int, np.integer)) and not isinstance(t, bool):
        return Fraction(int(t))
    return float(t)


def validate_spectrum(kind: Kind | str, theta: Sequence, rho: float) -> Spectrum:
    """Check ordering, distinctness and temperature; return a frozen Spectrum.

    Integers and Fractions are kept exact so that identity checks can run in
    rational arithmetic.  A :class:`ConditioningWarning` is emitted (and the
    ``ill_conditioned`` flag set) when the smallest gap falls below
    ``1e-6 * max|theta|``.
    """
    kind = Kind.parse(kind)
    levels = tuple(_coerce_level(t) for t in theta)
    if len(levels) < 2:
        raise LocalizeError("theta needs at least two levels (N >= 1)")
    if not all(math.isfinite(float(t)) for t in levels):
        raise LocalizeError("theta must be finite")
    if len(set(levels)) != len(levels):
        raise DegenerateSpectrum(f"coincident levels in theta={list(map(float, levels))}")
    rho = float(rho)
    if not rho > 0 or not math.isfinite(rho):
        raise NonPositiveRho(f"rho must be a positive finite number, got {rho}")

    pairs = zip(levels, levels[1:])
    if kind is Kind.CP:
        if not levels[0] > 0 or not all(a < b for a, b in pairs):
            raise OrderingViolation("CP requires 0 < theta_0 < theta_1 < ... < theta_N")
    else:
        if not levels[-1] > 0 or not all(a > b for a, b in pairs):
            raise OrderingViolation("CQ requires theta_0 > theta_1 > ... > theta_N > 0")

    vals = sorted(float(t) for t in levels)
    min_gap = min(b - a for a, b in zip(vals, vals[1:]))
    scale = max(abs(v) for v in vals)
    ill = min_gap < CONDITIONING_GAP * scale
    if ill:
        warnings.warn(
            f"minimum level gap {min_gap:.3g} is below {CONDITIONING_GAP:g} x max|theta|; "
            "residue forms will be ill-conditioned",
            ConditioningWarning,
            stacklevel=2,
        )
    return Spectrum(kind, levels, rho, ill)


def mu_vector(qp: QuantumParams) -> np.ndarray:
    """mu_a = c_a + c_{N+1} for a = 1..N."""
    c = np.asarray(qp.c, dtype=float)
    return c[:-1] + c[-1]


@dataclass
class ParamFile:
    """Parsed parameter file; any section may be absent."""

    kind: Kind | None = None
    theta: list = field(default_factory=list)
    rho: float | None = None
    quantum: dict[str, Any] = field(default_factory=dict)

    def spectrum(self) -> Spectrum:
        return validate_spectrum(self.kind, self.theta, self.rho)

    def quantum_params(self) -> QuantumParams:
        q = self.quantum
        c = list(q["c"])
        t = q["t"]
        t = complex(t[0], t[1]) if isinstance(t, (list, tuple)) else complex(t)
        return QuantumParams(n=len(c) - 1, k=int(q["k"]), c=tuple(c), t=t)


def load_params(source: str | Path | dict) -> ParamFile:
    """Read ``{"kind", "theta", "rho", "quantum": {"k", "c", "t": [re, im]}}``."""
    if isinstance(source, dict):
        data = source
    elif isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text())
    else:
        raise LocalizeError(f"expected a path or a dict, got {type(source).__name__}")
    if not isinstance(data, dict):
        raise LocalizeError("parameter file must hold a JSON object")
    kind = data.get("kind")
    return ParamFile(
        kind=Kind.parse(kind) if kind is not None else None,
        theta=list(data.get("theta", [])),
        rho=data.get("rho"),
        quantum=dict(data.get("quantum", {})),
    )
