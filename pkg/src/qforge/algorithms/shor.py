"""Order finding and factoring."""

from __future__ import annotations

import math
from fractions import Fraction

from qforge.arithmetic import AdderKind, qft
from qforge.environments import control
from qforge.gates import h
from qforge.variables import QuantumFloat, QuantumModulus


def find_order(a, N, adder=AdderKind.FOURIER):
    """Phase distribution of order-finding QPE for ``a`` modulo ``N``.

    Returns ``{phase: probability}``; peaks sit near multiples of 1/r where r
    is the order of ``a``.
    """
    return order_finding_register(a, N, adder).get_measurement()


def order_finding_register(a, N, adder=AdderKind.FOURIER):
    """Build the order-finding circuit and return its (unmeasured) phase register."""
    if N < 3:
        raise ValueError("modulus must be at least 3")
    if math.gcd(a, N) != 1:
        raise ValueError(f"gcd({a}, {N}) != 1")
    from qforge.arithmetic import mod_mul_constant_inplace

    qg = QuantumModulus(N, name="qg")
    qg[:] = 1
    m = 2 * qg.size + 1
    res = QuantumFloat(m, -m, name="qpe_res", qs=qg.qs)
    h(res)
    for i in range(m):
        with control(res[i]):
            mod_mul_constant_inplace(qg, a, adder=adder)
        a = a * a % N
    qft(res, inv=True)
    return res


def extract_order(phases, a, N, min_prob=1e-3):
    """Smallest r with a^r = 1 (mod N) among continued-fraction denominators.

    ``phases`` is a ``{phase: probability}`` map (or an iterable of phases);
    returns None if no candidate validates.
    """
    if isinstance(phases, dict):
        items = [p for p, pr in phases.items() if pr >= min_prob]
    else:
        items = list(phases)
    best = None
    for phase in items:
        r = Fraction(float(phase)).limit_denominator(N).denominator
        if r > 1 and pow(a, r, N) == 1 and (best is None or r < best):
            best = r
    return best


def _is_prime(n):
    if n < 2:
        return False
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return False
    return True


def _is_prime_power(n):
    for k in range(2, n.bit_length() + 1):
        root = round(n ** (1 / k))
        for r in (root - 1, root, root + 1):
            if r > 1 and r ** k == n:
                return True
    return False


def shor_factor(N, adder=AdderKind.FOURIER):
    """Factor an odd composite ``N`` that is not a prime power.

    Candidates a = 2, 3, ... are tried in order, so the run is deterministic.
    Returns the two factors in increasing order.
    """
    return shor_details(N, adder)["factors"]


def shor_details(N, adder=AdderKind.FOURIER):
    """Like :func:`shor_factor`, also reporting the successful base and order.

    Returns ``{"factors": (p, q), "a": a, "order": r}``; ``order`` is None when
    the factor came from the gcd shortcut.
    """
    if N < 3 or N % 2 == 0:
        raise ValueError(f"{N} is not an odd number >= 3")
    if _is_prime(N):
        raise ValueError(f"{N} is prime")
    if _is_prime_power(N):
        raise ValueError(f"{N} is a prime power")
    for a in range(2, N):
        g = math.gcd(a, N)
        if g > 1:
            return {"factors": tuple(sorted((g, N // g))), "a": a, "order": None}
        r = extract_order(find_order(a, N, adder=adder), a, N)
        if r is None or r % 2:
            continue
        y = pow(a, r // 2, N)
        if y == N - 1:
            continue
        for f in (math.gcd(y - 1, N), math.gcd(y + 1, N)):
            if 1 < f < N:
                return {"factors": tuple(sorted((f, N // f))), "a": a, "order": r}
    raise RuntimeError(f"no factor found for {N}")
