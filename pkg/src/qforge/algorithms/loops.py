"""Loops whose trip count is held in a quantum register."""

from __future__ import annotations

from qforge.variables import QuantumFloat


def qRange(n):
    """Iterate ``i = 1, 2, ...`` with each pass active only on branches where ``i <= n``.

    ``n`` must be an unsigned integer QuantumFloat. Yields classical integers;
    code in the loop body runs controlled on a comparison bool, so on the
    branch ``|n = m>`` the body takes effect exactly m times.
    """
    if not isinstance(n, QuantumFloat) or n.signed or n.exponent != 0:
        raise TypeError("qRange needs an unsigned integer QuantumFloat")
    for k in range(2 ** n.size - 1):
        cond = n > k
        with cond:
            yield k + 1
        if not cond.is_deleted:
            cond.uncompute()


q_range = qRange
