"""Parameter records, result containers and exceptions shared by all modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

LN2 = math.log(2.0)


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class NumericalError(ArithmeticError):
    """An iterative or quadrature routine failed to reach its tolerance.

    ``residual`` carries the last residual (or error estimate) and
    ``estimate`` the best value found so far, when available.
    """

    def __init__(self, message, residual=None, estimate=None):
        super().__init__(message)
        self.residual = residual
        self.estimate = estimate


class CapabilityError(RuntimeError):
    """The requested method cannot be evaluated for these parameters."""


@dataclass(frozen=True)
class LogProb:
    """A probability carried by its natural logarithm.

    ``log_neg_log`` is ``ln(-log_value)``.  It stays finite when the
    probability is so close to one that ``log_value`` itself underflows
    to ``-0.0``, e.g. ``(1 - 2**-2000) ** (2**600)``.
    """

    log_value: float
    log_neg_log: float

    @classmethod
    def from_log(cls, log_value: float) -> "LogProb":
        if log_value > 0.0:
            raise DomainError(f"log probability {log_value} > 0")
        if log_value == 0.0:
            return cls(0.0, -math.inf)
        return cls(log_value, math.log(-log_value))

    @classmethod
    def from_log_neg_log(cls, log_neg_log: float) -> "LogProb":
        if log_neg_log > 709.0:
            return cls(-math.inf, log_neg_log)
        return cls(-math.exp(log_neg_log), log_neg_log)

    @property
    def prob(self) -> float:
        return math.exp(self.log_value)

    @property
    def log_complement(self) -> float:
        """``ln(1 - p)``, accurate when ``p`` is close to one."""
        if self.log_neg_log == -math.inf:
            return -math.inf
        if self.log_neg_log < -20.0:
            eps = math.exp(self.log_neg_log)
            return self.log_neg_log - 0.5 * eps
        if self.log_value == -math.inf:
            return 0.0
        return math.log(-math.expm1(self.log_value))

    @property
    def complement(self) -> float:
        return math.exp(self.log_complement)


@dataclass(frozen=True)
class CodeParams:
    """Blocklength ``N`` and codebook size ``M = 2**(N R)``.

    Exactly one of ``R`` or ``M`` is given.  ``M`` may be non-integer and
    may exceed the float range; ``log2_M`` is always finite.
    """

    N: int
    R: Optional[float] = None
    M: Optional[float] = None

    def __post_init__(self):
        if (self.R is None) == (self.M is None):
            raise DomainError("give exactly one of R or M")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"blocklength must be a positive integer, got {self.N}")
        if self.R is not None and self.R < 0:
            raise DomainError(f"rate must be nonnegative, got {self.R}")
        if self.M is not None and self.M < 1:
            raise DomainError(f"codebook size must be >= 1, got {self.M}")

    @property
    def log2_M(self) -> float:
        if self.M is not None:
            return math.log2(self.M)
        return self.N * self.R

    @property
    def rate(self) -> float:
        return self.log2_M / self.N

    @property
    def NR(self) -> float:
        return self.log2_M

    @property
    def size(self) -> float:
        """``M`` as a float (``inf`` when beyond range)."""
        if self.M is not None:
            return float(self.M)
        if self.log2_M >= 1024:
            return math.inf
        return 2.0 ** self.log2_M

    @property
    def log_M_minus_1(self) -> float:
        """``ln(M - 1)``; ``-inf`` for ``M = 1``."""
        lm = self.log2_M * LN2
        if lm == 0.0:
            return -math.inf
        if lm > 40.0:
            return lm + math.log1p(-math.exp(-lm))
        return math.log(math.expm1(lm))

    @property
    def is_integer_size(self) -> bool:
        m = self.size
        return math.isfinite(m) and abs(m - round(m)) < 1e-9 * max(1.0, m)


@dataclass(frozen=True)
class AwgnParams:
    """Signal power ``P`` with unit noise variance."""

    P: float

    def __post_init__(self):
        if not self.P > 0:
            raise DomainError(f"power must be positive, got {self.P}")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "AwgnParams":
        return cls(10.0 ** (snr_db / 10.0))

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.P)


@dataclass(frozen=True)
class BscParams:
    f: float

    def __post_init__(self):
        if not 0.0 <= self.f <= 0.5:
            raise DomainError(f"crossover probability must lie in [0, 1/2], got {self.f}")


@dataclass(frozen=True)
class BecParams:
    f: float

    def __post_init__(self):
        if not 0.0 <= self.f < 1.0:
            raise DomainError(f"erasure probability must lie in [0, 1), got {self.f}")


@dataclass(frozen=True)
class EvalOptions:
    """Knobs for the ensemble evaluators.

    ``method`` is one of ``auto``, ``exact`` or ``approx`` for the CDF
    path; ``J`` is the number of guessing-correction terms for the
    binary channels (``None`` means all ``M`` terms).
    """

    method: str = "auto"
    panel_order: int = 15
    s_panel_width: float = 0.5
    tol: float = 1e-9
    J: Optional[int] = 16
    exact_nr_limit: float = 1000.0


@dataclass
class PeResult:
    """Probability value plus evaluation diagnostics.

    ``log_pe`` is always populated, so values far below the float range
    are still reported.
    """

    pe: float
    method: str
    log_pe: float = math.nan
    is_lower_bound: bool = False
    rel_err_est: float = 0.0
    quad_order: int = 0
    J_used: int = 0
    clamp_count: int = 0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pe < 0.0 or self.pe > 1.0:
            self.pe = min(max(self.pe, 0.0), 1.0)
            self.clamp_count += 1
        if math.isnan(self.log_pe):
            self.log_pe = math.log(self.pe) if self.pe > 0 else -math.inf
