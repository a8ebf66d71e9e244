"""Exact combinatorics of hypercube walks.

Walk counts M(n, l, d) between vertices at Hamming distance d are computed by
the alternating-sign eigenvalue formula in exact integer arithmetic (the sum
cancels catastrophically in floats), cross-checked by a brute-force dynamic
program.  The generating function sum_l M(n,l,d) x^l / l! = sinh(x)^d
cosh(x)^{n-d} drives everything else: truncation residuals, upper bounds on
single counts, the normalized length-weight distribution at x = E (which has
total mass sinh(E)^n = 1), and the exact tail sums behind the length
concentration statement.
"""

import math
from dataclasses import dataclass, field
from math import comb, factorial

from .constants import E, L

_BRUTE_FORCE_MAX_N = 6
_BRUTE_FORCE_MAX_L = 12


def stanley_count(n: int, l: int, d: int) -> int:
    """Number of walks (loops allowed) of length l between vertices at distance d.

    Evaluates (1/2^n) * sum_{i=0}^{n} sum_{j=0}^{d} C(d,j) C(n-d,i-j) (-1)^j
    (n-2i)^l [j <= i] entirely over integers; the final division by 2^n is
    exact.  Conventions: 0^0 = 1 (the l = 0 term), so M(n,0,0) = 1.
    """
    if n < 1:
        raise ValueError(f"dimension must be positive, got n={n}")
    if l < 0:
        raise ValueError(f"walk length must be nonnegative, got l={l}")
    if not 0 <= d <= n:
        raise ValueError(f"Hamming distance must satisfy 0 <= d <= n, got d={d}, n={n}")
    total = 0
    for i in range(n + 1):
        for j in range(min(d, i) + 1):
            term = comb(d, j) * comb(n - d, i - j) * (n - 2 * i) ** l
            total += -term if j & 1 else term
    count, rem = divmod(total, 1 << n)
    if rem:
        raise ArithmeticError(f"2^n division not exact for (n={n}, l={l}, d={d})")
    if count < 0:
        raise ArithmeticError(f"negative walk count for (n={n}, l={l}, d={d})")
    return count


def brute_force_walk_count(n: int, l: int, d: int) -> int:
    """Independent oracle: counts the same walks by DP over vertex occupancy.

    Walks of length l from vertex 0 to the fixed vertex 2^d - 1 (any vertex at
    distance d gives the same count by symmetry).  Guardrails n <= 6, l <= 12
    keep the 2^n-state dynamic program cheap.
    """
    if not 1 <= n <= _BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {_BRUTE_FORCE_MAX_N}, got {n}")
    if not 0 <= l <= _BRUTE_FORCE_MAX_L:
        raise ValueError(f"brute force limited to l <= {_BRUTE_FORCE_MAX_L}, got {l}")
    if not 0 <= d <= n:
        raise ValueError(f"Hamming distance must satisfy 0 <= d <= n, got d={d}, n={n}")
    size = 1 << n
    occupancy = [0] * size
    occupancy[0] = 1
    for _ in range(l):
        nxt = [0] * size
        for v, c in enumerate(occupancy):
            if c:
                for bit in range(n):
                    nxt[v ^ (1 << bit)] += c
        occupancy = nxt
    return occupancy[(1 << d) - 1]


def counts_to_opposite(n: int, l_max: int) -> list[int]:
    """Exact M(n, l, n) for l = 0..l_max (walks between antipodal vertices).

    Specialization of the alternating formula at d = n, with the (n-2j)^l
    powers built incrementally so a whole row costs O(n * l_max) big-int
    multiplications.
    """
    if n < 1:
        raise ValueError(f"dimension must be positive, got n={n}")
    coeffs = [comb(n, j) * (-1 if j & 1 else 1) for j in range(n + 1)]
    bases = [n - 2 * j for j in range(n + 1)]
    powers = [1] * (n + 1)
    out = []
    for _ in range(l_max + 1):
        total = sum(c * p for c, p in zip(coeffs, powers))
        count, rem = divmod(total, 1 << n)
        if rem or count < 0:
            raise ArithmeticError("inexact or negative antipodal count")
        out.append(count)
        powers = [p * b for p, b in zip(powers, bases)]
    return out


@dataclass(frozen=True)
class PathCountTable:
    """Immutable table of exact walk counts, keyed by (length, distance)."""

    n: int
    l_max: int
    counts: dict[tuple[int, int], int] = field(repr=False)

    @classmethod
    def build(cls, n: int, l_max: int) -> "PathCountTable":
        counts = {}
        for l in range(l_max + 1):
            for d in range(n + 1):
                # parity / reachability zeros are stored explicitly
                counts[(l, d)] = 0 if (l < d or (l - d) & 1) else stanley_count(n, l, d)
        return cls(n=n, l_max=l_max, counts=counts)

    def count(self, l: int, d: int) -> int:
        return self.counts[(l, d)]

    def to_json_dict(self) -> dict:
        # counts exceed 64-bit range quickly; serialize as decimal strings
        return {
            "n": self.n,
            "l_max": self.l_max,
            "counts": {f"{l},{d}": str(c) for (l, d), c in sorted(self.counts.items())},
        }


def identity_remainder_bound(n: int, x: float, l_max: int) -> float:
    """Upper bound on sum_{l > l_max} M(n,l,d) x^l / l!, uniform in d.

    Uses M(n,l,d) <= n^l and a geometric majorization of the exponential
    tail; requires n*x < l_max + 2 so the ratio test closes.
    """
    nx = n * x
    if nx >= l_max + 2:
        raise ValueError(f"l_max={l_max} too small for remainder bound at n*x={nx:.3f}")
    log_head = (l_max + 1) * math.log(nx) - math.lgamma(l_max + 2)
    ratio = nx / (l_max + 2)
    return math.exp(log_head) / (1.0 - ratio)


def identity_residual(n: int, d: int, x: float, l_max: int) -> float:
    """|sum_{l<=l_max} M(n,l,d) x^l/l!  -  sinh(x)^d cosh(x)^{n-d}|.

    The truncated sum is evaluated with exact counts and fsum (all terms are
    nonnegative, so there is no cancellation); the residual is the analytic
    truncation remainder plus float rounding of order 1e-13 relative.
    """
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    if not 0 <= d <= n:
        raise ValueError(f"Hamming distance must satisfy 0 <= d <= n, got d={d}, n={n}")
    if identity_remainder_bound(n, x, l_max) > 1e-12:
        raise ValueError(f"l_max={l_max} leaves a truncation remainder above 1e-12")
    terms = []
    for l in range(l_max + 1):
        if l < d or (l - d) & 1:
            continue
        m = stanley_count(n, l, d)
        if m:
            try:
                terms.append(float(m) * x**l / factorial(l))
            except OverflowError:
                terms.append(math.exp(math.log(m) + l * math.log(x) - math.lgamma(l + 1)))
    target = math.sinh(x) ** d * math.cosh(x) ** (n - d)
    return abs(math.fsum(terms) - target)


def log_m_bound(n: int, l: int, d: int, x: float) -> float:
    """log of sinh(x)^d cosh(x)^{n-d} l! / x^l."""
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    if not 0 <= d <= n:
        raise ValueError(f"Hamming distance must satisfy 0 <= d <= n, got d={d}, n={n}")
    if l < 0:
        raise ValueError(f"walk length must be nonnegative, got l={l}")
    return (
        d * math.log(math.sinh(x))
        + (n - d) * math.log(math.cosh(x))
        + math.lgamma(l + 1)
        - l * math.log(x)
    )


def m_bound(n: int, l: int, d: int, x: float) -> float:
    """Generating-function upper bound on M(n,l,d), valid for every x > 0.

    Raises OverflowError when the bound exceeds the float range (the log-space
    value is still available via log_m_bound).
    """
    log_value = log_m_bound(n, l, d, x)
    if log_value > math.log(1.7976931348623157e308):
        raise OverflowError(f"m_bound exceeds float range (log={log_value:.3f})")
    return math.exp(log_value)


def solve_length_ratio(ratio: float) -> float:
    """Unique x >= 0 with x / tanh(x) = ratio, by bisection to 1e-13 absolute.

    x / tanh(x) maps [0, inf) onto [1, inf) increasingly; ratio = 1 returns 0.
    """
    if not ratio >= 1.0:
        raise ValueError(f"ratio must be >= 1 (the range of x/tanh(x)), got {ratio}")
    if ratio == 1.0:
        return 0.0
    lo, hi = 1e-12, ratio + 1.0  # x/tanh(x) <= x + 1 makes the bracket valid
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid / math.tanh(mid) < ratio:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return 0.5 * (lo + hi)


def _weight_tail_bound(n: int, x: float, l_max: int) -> float:
    """Bound on sum_{l > l_max} M(n,l,n) x^l / l! via the generating function.

    For any y > x the tail is at most sinh(y)^n sum_{l>l_max} (x/y)^l; the
    minimum over a small grid of y keeps the bound sharp without a solver.
    """
    best = math.inf
    for y in (1.25 * x, 1.5 * x, 2.0 * x, 3.0 * x):
        log_tail = (
            n * math.log(math.sinh(y))
            + (l_max + 1) * math.log(x / y)
            - math.log(1.0 - x / y)
        )
        best = min(best, log_tail)
    return math.exp(best)


@dataclass(frozen=True)
class LengthWeightDistribution:
    """Normalized weights w_l = M(n,l,n) E^l / l! over polymer lengths.

    Total mass over all l is sinh(E)^n = 1 exactly; tail_bound dominates the
    mass omitted beyond l_max.
    """

    n: int
    l_max: int
    weights: tuple[float, ...]
    tail_bound: float

    @property
    def argmax_length(self) -> int:
        return max(range(len(self.weights)), key=self.weights.__getitem__)

    def total_mass(self) -> float:
        return math.fsum(self.weights)


def length_weight_distribution(n: int, l_max: int) -> LengthWeightDistribution:
    """Exact length-weight distribution, truncated at l_max >= 3n.

    Each weight is the correctly rounded float of the exact rational
    M(n,l,n) * p^l / (q^l * l!) where E = p/q exactly as a dyadic, so the
    reported mass carries no accumulated rounding beyond one ulp per term.
    """
    if l_max < 3 * n:
        raise ValueError(f"l_max must be at least 3n = {3 * n}, got {l_max}")
    counts = counts_to_opposite(n, l_max)
    p, q = E.as_integer_ratio()
    weights = []
    num_pow = 1  # p^l
    den = 1  # q^l * l!
    for l in range(l_max + 1):
        if l:
            num_pow *= p
            den *= q * l
        m = counts[l]
        weights.append((m * num_pow) / den if m else 0.0)
    return LengthWeightDistribution(
        n=n,
        l_max=l_max,
        weights=tuple(weights),
        tail_bound=_weight_tail_bound(n, E, l_max),
    )


def _log_weight(m: int, x: float, l: int) -> float:
    return math.log(m) + l * math.log(x) - math.lgamma(l + 1)


def concentration_tail_mass(n: int, eps: float, a: float) -> tuple[float, float]:
    """Exact tail sums of sum_l M(n,l,n) (E+eps^2)^l / l! outside |l/n - L| < a*eps.

    Returns (lower_tail, upper_tail): the sum over l <= (L - a*eps)n and over
    l >= (L + a*eps)n.  The upper sum is truncated once the running term
    drops below 1e-18 of the accumulated total, with a generating-function
    remainder bound folded into the reported value.  Note the lower tail is
    identically zero whenever (L - a*eps) < 1, since no path between
    antipodal vertices is shorter than n.
    """
    if not 0.0 < eps < 0.3:
        raise ValueError(f"eps must lie in (0, 0.3), got {eps}")
    if a < 0.0:
        # a = 0 is allowed: the two tails then partition the full series
        raise ValueError(f"a must be nonnegative, got {a}")
    x = E + eps * eps
    lower_cut = math.floor((L - a * eps) * n)
    upper_cut = math.ceil((L + a * eps) * n)

    coeffs = [comb(n, j) * (-1 if j & 1 else 1) for j in range(n + 1)]
    bases = [n - 2 * j for j in range(n + 1)]
    powers = [1] * (n + 1)

    def next_count() -> int:
        total = sum(c * p for c, p in zip(coeffs, powers))
        for j in range(n + 1):
            powers[j] *= bases[j]
        count, rem = divmod(total, 1 << n)
        if rem or count < 0:
            raise ArithmeticError("inexact or negative antipodal count")
        return count

    lower_terms = []
    l = 0
    while l <= lower_cut:
        m = next_count()
        if m:
            lower_terms.append(math.exp(_log_weight(m, x, l)))
        l += 1
    while l < upper_cut:
        next_count()
        l += 1

    upper_terms = []
    accumulated = 0.0
    while True:
        m = next_count()
        term = math.exp(_log_weight(m, x, l)) if m else 0.0
        upper_terms.append(term)
        accumulated += term
        # geometric decay is guaranteed once l exceeds the summand peak n*x
        if l > n * x and 0.0 < term < 1e-18 * accumulated:
            upper_terms.append(_weight_tail_bound(n, x, l))
            break
        l += 1
        if l > 1000 * max(n, 1):
            raise ArithmeticError("upper tail failed to converge")
    return math.fsum(lower_terms), math.fsum(upper_terms)
