"""Tabulated monotone maps used by the fitters.

Two maps are needed:

* third log-derivative at the exact mode of a unit-variance Skew Normal
  -> its standardized skewness;
* the C-function ratio ``C_4(tau) / C_3(tau)**(4/3)`` -> ``tau``.

Both are stored as knot tables and evaluated with a shape-preserving
piecewise cubic (PCHIP). Tables serialize to a small versioned text format
so they can be cached on disk.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, InvalidArgumentError
from .esn import EsnParams, c_funs, delta_from_skewness, esn_log_derivative, esn_mode

__all__ = [
    "FORMAT_VERSION",
    "RATIO_SUPREMUM",
    "Interpolant",
    "CacheError",
    "tau_ratio",
    "build_sn_skewness_interpolant",
    "build_tau_ratio_interpolant",
    "load_or_build",
    "build_cache",
    "default_interpolants",
]

FORMAT_VERSION = 1
_MAGIC = "esla-interpolant"

# limit of C_4/C_3^(4/3) as tau -> -inf: C_3 ~ 2/|tau|^3, C_4 ~ 6/tau^4
RATIO_SUPREMUM = 6.0 / 2.0 ** (4.0 / 3.0)


class CacheError(ValueError):
    """A serialized knot table is malformed or fails its checksum."""


@dataclass(frozen=True, eq=False)
class Interpolant:
    """Monotone piecewise-cubic map on a closed domain.

    Queries outside ``domain`` raise :class:`DomainError`; nothing is
    extrapolated.
    """

    knots_x: np.ndarray
    knots_y: np.ndarray
    domain: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.array(self.knots_x, dtype=float)
        y = np.array(self.knots_y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise InvalidArgumentError("knot tables must be 1-D and of equal length >= 2")
        if not np.all(np.diff(x) > 0):
            raise InvalidArgumentError("knots_x must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidArgumentError("knots must be finite")
        x.flags.writeable = False
        y.flags.writeable = False
        lo, hi = (float(v) for v in self.domain)
        object.__setattr__(self, "knots_x", x)
        object.__setattr__(self, "knots_y", y)
        object.__setattr__(self, "domain", (lo, hi))
        # stored as text, so keep string values in memory too
        object.__setattr__(self, "meta", {str(k): str(v) for k, v in self.meta.items()})
        object.__setattr__(self, "_pchip", PchipInterpolator(x, y, extrapolate=False))

    def contains(self, q):
        lo, hi = self.domain
        return bool(lo <= q <= hi)

    def __call__(self, q):
        q_arr = np.asarray(q, dtype=float)
        lo, hi = self.domain
        if np.any(~((q_arr >= lo) & (q_arr <= hi))):
            raise DomainError(f"query outside interpolant domain [{lo!r}, {hi!r}]")
        out = self._pchip(q_arr)
        return float(out) if out.ndim == 0 else out

    def same_table(self, other):
        return (
            np.array_equal(self.knots_x, other.knots_x)
            and np.array_equal(self.knots_y, other.knots_y)
            and self.domain == other.domain
        )

    # -- serialization -------------------------------------------------
    def _body(self):
        rows = [f"{float(a)!r}\t{float(b)!r}" for a, b in zip(self.knots_x, self.knots_y)]
        return "x\ty\n" + "\n".join(rows) + "\n"

    def to_text(self):
        body = self._body()
        meta = " ".join(f"{k}={v}" for k, v in sorted(self.meta.items()))
        lo, hi = self.domain
        header = [
            f"# {_MAGIC} format={FORMAT_VERSION}",
            f"# {meta}",
            f"# domain={lo!r},{hi!r}",
            f"# sha256={hashlib.sha256(body.encode()).hexdigest()}",
        ]
        return "\n".join(header) + "\n" + body

    @classmethod
    def from_text(cls, text):
        lines = text.splitlines(keepends=True)
        if len(lines) < 6 or not lines[0].startswith(f"# {_MAGIC} format="):
            raise CacheError("not an interpolant table")
        version = int(lines[0].strip().split("format=")[1])
        if version != FORMAT_VERSION:
            raise CacheError(f"unsupported table format {version}")
        meta = {}
        for token in lines[1][1:].split():
            key, _, value = token.partition("=")
            meta[key] = value
        if not lines[2].startswith("# domain="):
            raise CacheError("missing domain line")
        lo, hi = (float(v) for v in lines[2].strip()[len("# domain="):].split(","))
        if not lines[3].startswith("# sha256="):
            raise CacheError("missing checksum line")
        digest = lines[3].strip()[len("# sha256="):]
        body = "".join(lines[4:])
        if hashlib.sha256(body.encode()).hexdigest() != digest:
            raise CacheError("checksum mismatch")
        try:
            data = np.array([[float(v) for v in ln.split("\t")] for ln in lines[5:] if ln.strip()])
        except ValueError as exc:
            raise CacheError(f"bad knot row: {exc}") from exc
        return cls(data[:, 0], data[:, 1], (lo, hi), meta)

    def save(self, path):
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path):
        return cls.from_text(Path(path).read_text())


def tau_ratio(tau):
    """``C_4(tau) / C_3(tau)**(4/3)``, the quantity matched by the fourth-order fit."""
    c = c_funs(tau)
    # log form: C_3**(4/3) underflows for tau > ~30
    out = np.sign(c[4]) * np.exp(np.log(np.abs(c[4])) - (4.0 / 3.0) * np.log(c[3]))
    return float(out) if np.ndim(out) == 0 else out


def _sn_third_derivative(gamma1):
    """Third log-derivative at the exact mode of the unit-variance SN with skewness ``gamma1``."""
    delta = delta_from_skewness(gamma1, 0.0)
    alpha = delta / math.sqrt(1.0 - delta * delta)
    c = c_funs(0.0)
    omega = 1.0 / math.sqrt(1.0 + c[2] * delta * delta)
    p = EsnParams(0.0, omega, alpha, 0.0)
    return esn_log_derivative(p, esn_mode(p, "exact"), 3)


def build_sn_skewness_interpolant(n_knots=801, max_skew=0.995):
    """Map third log-derivative at the mode -> skewness for the Skew Normal.

    Knots cover ``[-max_skew, max_skew]`` in skewness, clustered toward the
    ends (sine spacing) where the curve steepens. Modes are located
    numerically, not by the linearized approximation.
    """
    if n_knots < 3 or n_knots % 2 == 0:
        raise InvalidArgumentError("n_knots must be odd and >= 3")
    half = max_skew * np.sin(0.5 * np.pi * np.linspace(0.0, 1.0, (n_knots + 1) // 2))
    third = np.array([0.0] + [_sn_third_derivative(g) for g in half[1:]])
    # the map is odd; mirror so the table is exactly antisymmetric
    x = np.concatenate([-third[:0:-1], third])
    y = np.concatenate([-half[:0:-1], half])
    if not np.all(np.diff(x) > 0):
        raise RuntimeError("third derivative is not monotone in skewness")
    meta = {"kind": "sn_skewness", "n_knots": n_knots, "max_skew": repr(float(max_skew))}
    return Interpolant(x, y, (x[0], x[-1]), meta)


def _monotone_run(values, center):
    """Largest index range around ``center`` on which ``values`` is strictly decreasing."""
    steps = np.diff(values) < 0
    lo = center
    while lo > 0 and steps[lo - 1]:
        lo -= 1
    hi = center
    while hi < steps.size and steps[hi]:
        hi += 1
    return lo, hi


def build_tau_ratio_interpolant(n_knots=4001, tau_min=-10.0, tau_max=10.0):
    """Inverse of ``tau -> tau_ratio(tau)`` on ``[tau_min, tau_max]``.

    The ratio is verified to be strictly decreasing on the tabulated range;
    otherwise the table is cut to the largest monotone piece containing 0 and
    the cut is recorded in ``meta``.
    """
    if n_knots < 3 or n_knots % 2 == 0:
        raise InvalidArgumentError("n_knots must be odd and >= 3")
    if not tau_min < 0.0 < tau_max:
        raise InvalidArgumentError("tau range must contain 0")
    taus = np.linspace(tau_min, tau_max, n_knots)
    zero = int(np.argmin(np.abs(taus)))
    taus[zero] = 0.0
    ratios = tau_ratio(taus)
    lo, hi = _monotone_run(ratios, zero)
    meta = {
        "kind": "tau_ratio",
        "n_knots": n_knots,
        "tau_min": repr(float(tau_min)),
        "tau_max": repr(float(tau_max)),
    }
    if lo > 0 or hi < n_knots - 1:
        meta["restricted"] = f"{taus[lo]!r},{taus[hi]!r}"
    taus, ratios = taus[lo : hi + 1], ratios[lo : hi + 1]
    x, y = ratios[::-1].copy(), taus[::-1].copy()
    return Interpolant(x, y, (x[0], x[-1]), meta)


SKEW_TABLE = "sn_skewness.tsv"
TAU_TABLE = "tau_ratio.tsv"


def load_or_build(path, builder, **config):
    """Load a cached table if present, valid and built with ``config``; else rebuild and write it."""
    path = Path(path)
    if path.exists():
        wanted = {k: repr(v) if isinstance(v, float) else str(v) for k, v in config.items()}
        try:
            table = Interpolant.load(path)
        except (CacheError, OSError, ValueError) as exc:
            warnings.warn(f"cached table {path} is unusable ({exc}); rebuilding", stacklevel=2)
        else:
            if all(table.meta.get(k) == v for k, v in wanted.items()):
                return table
            warnings.warn(f"cached table {path} was built with other settings; rebuilding", stacklevel=2)
    table = builder(**config)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.save(path)
    return table


def build_cache(cache_dir):
    """Build both tables and write them to ``cache_dir``; returns the two file paths."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    paths = (cache_dir / SKEW_TABLE, cache_dir / TAU_TABLE)
    build_sn_skewness_interpolant().save(paths[0])
    build_tau_ratio_interpolant().save(paths[1])
    return paths


@lru_cache(maxsize=8)
def default_interpolants(cache_dir=None):
    """The (skewness, tau-ratio) interpolant pair with default settings.

    With ``cache_dir`` the tables are read from (or written to) disk.
    """
    if cache_dir is None:
        return build_sn_skewness_interpolant(), build_tau_ratio_interpolant()
    cache_dir = Path(cache_dir)
    return (
        load_or_build(cache_dir / SKEW_TABLE, build_sn_skewness_interpolant),
        load_or_build(cache_dir / TAU_TABLE, build_tau_ratio_interpolant),
    )
