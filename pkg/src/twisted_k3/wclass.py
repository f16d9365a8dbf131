from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class WClass:
    """Twist class w_{n,k} = (1/r)(e1 + n f1 + (k/d) l'_d) of order r.

    d is the polarization degree (even, >= 2), r the order of the twist.
    n and k are arbitrary integers; the canonical range is 0 <= n < r and
    0 <= k < gcd(r, d).
    """

    d: int
    r: int
    n: int
    k: int

    def __post_init__(self):
        if not all(isinstance(v, int) for v in (self.d, self.r, self.n, self.k)):
            raise TypeError("WClass fields must be integers")
        if self.d < 2 or self.d % 2:
            raise ValueError(f"d must be even and >= 2, got {self.d}")
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")

    @property
    def dprime(self) -> int:
        return self.d * self.r ** 2

    @property
    def disc(self) -> int:
        """2nd - k^2, the numerator of the square of w times r^2 d."""
        return 2 * self.n * self.d - self.k ** 2

    @property
    def grid_gcd(self) -> int:
        return math.gcd(self.r, self.d)

    def as_tuple(self):
        return (self.d, self.r, self.n, self.k)

    def __str__(self):
        return f"w(d={self.d}, r={self.r}, n={self.n}, k={self.k})"
