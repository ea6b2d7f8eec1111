"""Renewal sequences and the two-sided stationary renewal window.

The forward construction is the zero-delayed random walk ``S_0 = 0,
S_n = xi_1 + ... + xi_n``.  The stationary window places a size-biased
interval ``xi0`` around the origin, split by an independent uniform ``U``
(so the first point right of 0 sits at ``U * xi0``), and extends it with
independent i.i.d. increments in both directions until sentinels fall
strictly outside ``[-c, c]``.  The resulting point set is a realization of
the translation-invariant renewal point process with intensity
``1 / mean``.

Index convention: points carry integer indices with ``t_{-1} < 0 <= t_0``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .distributions import check_interarrival, sample_stationary_delay
from .errors import LawError

__all__ = [
    "RenewalRealization",
    "StationaryWindow",
    "StationaryWindowSampler",
    "simulate_forward",
    "build_stationary_window",
    "shift_window",
    "window_to_csv",
]


@dataclass(frozen=True)
class RenewalRealization:
    """Forward epochs ``S_0 = 0 < S_1 < ... <= horizon`` plus the overshooter.

    ``count`` is the first index whose epoch exceeds the horizon, so
    ``overshoot_epoch - horizon`` is the overshoot at the horizon.
    """

    epochs: np.ndarray
    horizon: float
    overshoot_epoch: float

    @property
    def count(self):
        return len(self.epochs)

    @property
    def overshoot(self):
        return self.overshoot_epoch - self.horizon


def _draw_increments_until(law, rng, start, target, mu, sd):
    """Cumulative sums ``start + xi_1 + ...`` until strictly past ``target``.

    Empty when ``start`` is already past the target.  Draws in blocks sized
    from the mean and spread of the law so the expected number of rounds
    is O(1).
    """
    if start > target:
        return np.empty(0)
    out = []
    last = start
    remaining = target - start
    while last <= target:
        n = max(16, int(remaining / mu + 6.0 * sd / mu * math.sqrt(max(remaining / mu, 1.0)) + 1))
        block = last + np.cumsum(law.sample(rng, size=n))
        out.append(block)
        last = block[-1]
        remaining = target - last
    cum = np.concatenate(out) if len(out) > 1 else out[0]
    cut = int(np.searchsorted(cum, target, side="right"))
    return cum[: cut + 1]  # all epochs <= target plus one overshooter


def simulate_forward(law, horizon, rng):
    """Simulate the zero-delayed renewal sequence on ``[0, horizon]``.

    The first epoch beyond the horizon is retained separately for
    overshoot diagnostics.
    """
    check_interarrival(law)
    if horizon < 0:
        raise LawError(f"horizon must be >= 0, got {horizon}")
    mu = law.mean()
    sd = math.sqrt(max(law.second_moment() - mu**2, 0.0))
    cum = _draw_increments_until(law, rng, 0.0, horizon, mu, sd)
    epochs = np.concatenate([[0.0], cum[:-1]])
    return RenewalRealization(epochs=epochs, horizon=float(horizon), overshoot_epoch=float(cum[-1]))


@dataclass(frozen=True, eq=False)
class StationaryWindow:
    """Points of the stationary renewal process covering ``[-c, c]``.

    ``points[zero_index]`` is the first point >= 0; the point just before it
    is strictly negative.  The outermost points lie strictly outside
    ``[-c, c]`` (sentinels), so every point inside the window has both
    neighbours present.  ``xi0``/``u`` record the size-biased straddling
    interval and its uniform split at construction time.
    """

    points: np.ndarray
    zero_index: int
    c: float
    xi0: float
    u: float

    def __post_init__(self):
        if not (0 < self.zero_index < len(self.points)):
            raise ValueError("window must straddle 0")

    def index_range(self):
        """(k_min, k_max) of the canonical point indices."""
        return -self.zero_index, len(self.points) - 1 - self.zero_index

    def point(self, k):
        """Point with canonical index ``k`` (t_{-1} < 0 <= t_0)."""
        return float(self.points[k + self.zero_index])

    def indices(self):
        return np.arange(len(self.points)) - self.zero_index

    def count_in(self, a, b):
        """Number of points in the closed interval [a, b]."""
        lo = int(np.searchsorted(self.points, a, side="left"))
        hi = int(np.searchsorted(self.points, b, side="right"))
        return hi - lo

    def gaps(self):
        return np.diff(self.points)


class StationaryWindowSampler:
    """Builds stationary windows and extends them to larger ``c``.

    Forward and backward extensions draw from independent child streams of
    the generator handed in, so the two half-axes use independent increment
    sequences and a window can be grown monotonically without re-drawing
    what exists.
    """

    def __init__(self, law, rng):
        check_interarrival(law)
        self.law = law
        self._mu = law.mean()
        self._sd = math.sqrt(max(law.second_moment() - self._mu**2, 0.0))
        s0, xi0, u = sample_stationary_delay(law, rng)
        self._s0 = s0
        self._s_minus1 = s0 - xi0
        # Recompute so the straddling-gap identity t_0 - t_{-1} == xi0 is
        # bit-exact (the subtraction below is what any reader of the window
        # will evaluate).
        self.xi0 = s0 - self._s_minus1
        self.u = u
        self._fwd, self._bwd = rng.spawn(2)

    def initial(self, c):
        if c <= 0:
            raise LawError(f"window half-width must be positive, got {c}")
        fwd = _draw_increments_until(self.law, self._fwd, self._s0, c, self._mu, self._sd)
        bwd = _draw_increments_until(self.law, self._bwd, -self._s_minus1, c, self._mu, self._sd)
        points = np.concatenate([-bwd[::-1], [self._s_minus1, self._s0], fwd])
        return StationaryWindow(points=points, zero_index=len(bwd) + 1, c=float(c), xi0=self.xi0, u=self.u)

    def extend(self, window, c):
        """Grow a window built by this sampler out to a larger ``c``."""
        if c <= window.c:
            return window
        right = window.points[-1]
        left = -window.points[0]
        parts = [window.points]
        zero_index = window.zero_index
        if right <= c:
            parts.append(_draw_increments_until(self.law, self._fwd, right, c, self._mu, self._sd))
        if left <= c:
            ext = _draw_increments_until(self.law, self._bwd, left, c, self._mu, self._sd)
            parts.insert(0, -ext[::-1])
            zero_index += len(ext)
        points = np.concatenate(parts) if len(parts) > 1 else parts[0]
        return StationaryWindow(points=points, zero_index=zero_index, c=float(c), xi0=window.xi0, u=window.u)


def build_stationary_window(law, c, rng):
    """Draw one stationary renewal window covering ``[-c, c]``."""
    return StationaryWindowSampler(law, rng).initial(c)


def shift_window(window, t):
    """Translate all points by ``-t`` and re-establish the index convention.

    The nominal half-width shrinks to ``c - |t|`` (the sentinels only cover
    that much after translation), so ``|t|`` must be smaller than ``c``.
    """
    if abs(t) >= window.c:
        raise ValueError(f"shift {t} exceeds window half-width {window.c}")
    if t == 0:
        return window
    points = window.points - t
    zero_index = int(np.searchsorted(points, 0.0, side="left"))
    return StationaryWindow(
        points=points,
        zero_index=zero_index,
        c=window.c - abs(t),
        xi0=window.xi0,
        u=window.u,
    )


def window_to_csv(window):
    """Render a window as ``index,point`` CSV text (17 significant digits)."""
    lines = ["index,point"]
    for k, p in zip(window.indices(), window.points):
        lines.append(f"{k},{p:.17g}")
    return "\n".join(lines) + "\n"
