"""Channel plans and second-order intermodulation combinatorics.

Channels are evenly spaced subcarriers ``Omega_k = k * Omega_1`` for
``k = 1..N``.  Negative indices stand for the lower sidebands, so the
second-order products that land on channel ``k`` are the ordered pairs
``(r, s)`` of nonzero signed indices with ``r + s == k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ChannelPlan:
    """An evenly spaced subcarrier plan.

    Frequencies are carried as metadata only; nothing downstream depends on
    absolute GHz values.
    """

    n_channels: int
    spacing_ghz: float = 1.0
    base_offset_ghz: float | None = None
    label: str = "custom"

    def __post_init__(self):
        if isinstance(self.n_channels, bool) or not isinstance(self.n_channels, int):
            raise TypeError("n_channels must be an integer")
        if self.n_channels < 1:
            raise ValueError(f"n_channels must be >= 1, got {self.n_channels}")
        if not self.spacing_ghz > 0:
            raise ValueError(f"spacing_ghz must be positive, got {self.spacing_ghz}")
        if self.base_offset_ghz is None:
            object.__setattr__(self, "base_offset_ghz", float(self.spacing_ghz))
        elif not math.isclose(self.base_offset_ghz, self.spacing_ghz, rel_tol=1e-9):
            # index arithmetic r + s == k needs Omega_k = k * Omega_1
            raise ValueError(
                "only evenly spaced plans with Omega_k = k * Omega_1 are supported "
                f"(base_offset_ghz={self.base_offset_ghz}, spacing_ghz={self.spacing_ghz})"
            )

    @property
    def n(self) -> int:
        return self.n_channels

    def frequency_ghz(self, k: int) -> float:
        check_index(self.n_channels, k)
        return k * self.spacing_ghz

    def frequencies_ghz(self) -> list[float]:
        return [k * self.spacing_ghz for k in self.indices()]

    def indices(self) -> range:
        return range(1, self.n_channels + 1)

    def describe(self) -> str:
        return (f"{self.label}: N={self.n_channels}, "
                f"{self.spacing_ghz:g}-{self.n_channels * self.spacing_ghz:g} GHz")


#: canonical plans: 5-25 GHz, 2-30 GHz and 1-40 GHz
LOW_PLAN = ChannelPlan(5, 5.0, label="low")
MEDIUM_PLAN = ChannelPlan(15, 2.0, label="medium")
HIGH_PLAN = ChannelPlan(40, 1.0, label="high")

PLANS = {"low": LOW_PLAN, "medium": MEDIUM_PLAN, "high": HIGH_PLAN}


def plan_from_name(name: str) -> ChannelPlan:
    """Resolve ``low``/``medium``/``high`` or ``custom:N``."""
    key = name.strip().lower()
    if key in PLANS:
        return PLANS[key]
    if key.startswith("custom:"):
        try:
            n = int(key.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad custom plan {name!r}; expected custom:N") from None
        return ChannelPlan(n, label=f"custom{n}")
    raise ValueError(f"unknown plan {name!r}; use low, medium, high or custom:N")


def check_index(n: int, k: int) -> None:
    if n < 1:
        raise ValueError(f"channel count must be >= 1, got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"channel index k={k} outside 1..{n}")


def m2_count(n: int, k: int) -> int:
    """Closed-form count of ordered signed pairs with ``r + s == k``.

    ``r`` runs over ``k - n .. n`` minus ``{0, k}``, which gives ``2n - k - 1``
    for every k.  For even k this includes the self-pair ``r = s = k/2``.
    """
    check_index(n, k)
    return 2 * n - k - 1


def m2_published(n: int, k: int) -> int:
    """The often-quoted ``2n - k - 3/2 - (-1)**k / 2``.

    Agrees with :func:`m2_count` for odd k but drops the self-pair for even k,
    so it is one short there.  Kept for comparison only.
    """
    check_index(n, k)
    twice = 4 * n - 2 * k - 3 - (1 if k % 2 == 0 else -1)
    assert twice % 2 == 0, "closed form is not integral"
    return twice // 2


def m2_enumerate(n: int, k: int) -> int:
    """Brute-force count of ordered pairs (r, s), r, s in +-{1..n}, r + s == k."""
    check_index(n, k)
    signed = set(range(-n, n + 1)) - {0}
    return sum(1 for r in signed if k - r in signed)


def m2_bounds_check(n: int) -> bool:
    """True iff ``n - 2 <= M2(n, k) <= 2n - 2`` for every channel of an n-plan."""
    if n < 2:
        raise ValueError(f"bounds check needs n >= 2, got {n}")
    return all(n - 2 <= m2_count(n, k) <= 2 * n - 2 for k in range(1, n + 1))


def lo_distortion(n: int, k: int, m_lo: float) -> float:
    """Relative growth of the LO amplitude on channel k from intermodulation.

    The LO sideband amplitude is ``D_k = m_L + (i/4) M2 m_L**2``; this returns
    ``|D_k| / m_L - 1``.  For ``m_L = 0.01`` and ``N = 40`` the first channel
    gives about 1.9 %, somewhat above the commonly quoted 1.5 % ceiling.
    """
    if not 0 < m_lo <= 0.1:
        raise ValueError(f"LO modulation index must lie in (0, 0.1], got {m_lo}")
    x = m2_count(n, k) * m_lo / 4.0
    # sqrt(1 + x^2) - 1 without cancellation for tiny x
    return x * x / (math.sqrt(1.0 + x * x) + 1.0)
