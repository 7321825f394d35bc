"""Reference computations written independently of the library.

Plain Python loops and closed forms only, so a shared bug cannot hide on both
sides of a comparison.
"""
import itertools
import math


def h2(p):
    """Binary entropy in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def h2_inverse(v):
    """The root of h2(p) = v on [0, 1/2], by bisection."""
    if v <= 0.0:
        return 0.0
    if v >= 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h2(mid) < v:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binary_ib_bits(rate_bits, p):
    """Witsenhausen-Wyner curve of the doubly symmetric binary source, in bits."""
    a = h2_inverse(1.0 - min(rate_bits, 1.0))
    conv = a * (1 - p) + (1 - a) * p
    return 1.0 - h2(conv)


def entropy_nats(weights):
    return -sum(w * math.log(w) for w in weights if w > 0)


def mi_via_rows(table):
    """I(X;Y) = H(X) - sum_y mu(y) H(X | Y=y) with table[y][x]."""
    px = [sum(row[x] for row in table) for x in range(len(table[0]))]
    total = entropy_nats(px)
    for row in table:
        py = sum(row)
        if py > 0:
            total -= py * entropy_nats([v / py for v in row])
    return total


def set_partition_count(items, max_blocks):
    """Distinct fiber partitions of all functions range(items) -> range(max_blocks)."""
    seen = set()
    for f in itertools.product(range(max_blocks), repeat=items):
        relabel = {}
        seen.add(tuple(relabel.setdefault(v, len(relabel)) for v in f))
    return len(seen)


def stirling_recursive(n, k):
    """S(n, k) from the explicit alternating sum."""
    return sum((-1) ** i * math.comb(k, i) * (k - i) ** n for i in range(k + 1)) // math.factorial(k)


def gaussian_ib(rho, rate):
    return 0.5 * math.log(1.0 / (1.0 - rho * rho * (1.0 - math.exp(-2.0 * rate))))
