"""Polynomial segment utilities: evaluation, real-root isolation, Hermite fits.

All polynomials are 1-D coefficient arrays in the monomial basis, ascending
powers (the ``numpy.polynomial`` convention).  Root isolation works per
polynomial, so sign certificates on an interval are exact up to the root
refinement width.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq


def as_coeffs(c) -> np.ndarray:
    a = np.atleast_1d(np.asarray(c, dtype=float))
    if a.ndim != 1:
        raise ValueError("coefficient array must be one-dimensional")
    if a.size == 0:
        a = np.zeros(1)
    return a


def derivative(c, order: int = 1) -> np.ndarray:
    c = as_coeffs(c)
    if order == 0:
        return c
    return np.atleast_1d(npoly.polyder(c, m=order))


def eval_poly(c, x, order: int = 0):
    return npoly.polyval(x, derivative(c, order))


def poly_product(a, b) -> np.ndarray:
    return npoly.polymul(as_coeffs(a), as_coeffs(b))


def poly_sum(*cs) -> np.ndarray:
    out = np.zeros(max(len(as_coeffs(c)) for c in cs))
    for c in cs:
        c = as_coeffs(c)
        out[: len(c)] += c
    return out


def poly_scale(c, s: float) -> np.ndarray:
    return as_coeffs(c) * float(s)


def is_zero_poly(c, rel_tol: float = 1e-13, scale: float | None = None) -> bool:
    """True when every coefficient is negligible against ``scale``."""
    c = as_coeffs(c)
    if scale is None:
        scale = 1.0
    scale = max(1.0, float(scale))
    return bool(np.all(np.abs(c) <= rel_tol * scale))


def _dedupe_sorted(xs: list[float], tol: float) -> list[float]:
    out: list[float] = []
    for x in xs:
        if not out or abs(x - out[-1]) > tol:
            out.append(x)
    return out


def real_roots(c, lo: float, hi: float, refine_tol: float = 1e-12) -> list[float]:
    """Real roots of ``c`` in ``[lo, hi]``, sorted ascending.

    Candidates come from the companion matrix; each is refined by bracketed
    bisection (Brent) when a sign change exists, otherwise polished with a few
    Newton steps (even-multiplicity roots, e.g. tangencies).
    """
    c = as_coeffs(c)
    span = hi - lo
    if span < 0:
        raise ValueError("empty interval")
    cmax = float(np.max(np.abs(c)))
    if cmax == 0.0:
        raise ValueError("identically zero polynomial has no isolated roots")
    # trim negligible leading coefficients so the companion matrix is sane
    trimmed = c.copy()
    while len(trimmed) > 1 and abs(trimmed[-1]) <= 1e-14 * cmax:
        trimmed = trimmed[:-1]
    if len(trimmed) == 1:
        return []
    cand = npoly.polyroots(trimmed)
    pad = 1e-9 * max(1.0, span)
    real = [
        float(z.real)
        for z in np.atleast_1d(cand)
        if abs(z.imag) <= 1e-7 * max(1.0, abs(z.real))
        and lo - pad <= z.real <= hi + pad
    ]
    real.sort()
    real = _dedupe_sorted(real, 1e-11 * max(1.0, span))

    dc = derivative(trimmed)
    roots: list[float] = []
    for r in real:
        r = min(max(r, lo), hi)
        refined = _refine_root(trimmed, dc, r, lo, hi, refine_tol)
        if refined is not None:
            roots.append(refined)
    roots.sort()
    return _dedupe_sorted(roots, max(refine_tol, 1e-11 * max(1.0, span)))


def _refine_root(c, dc, r, lo, hi, tol):
    f = lambda x: float(npoly.polyval(x, c))
    # try to bracket; widen geometrically from the candidate
    w = max(tol, 1e-9 * max(1.0, abs(r)))
    for _ in range(40):
        a, b = max(lo, r - w), min(hi, r + w)
        fa, fb = f(a), f(b)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb < 0:
            return float(brentq(f, a, b, xtol=tol * 0.5, rtol=8.9e-16))
        if a == lo and b == hi:
            break
        w *= 4.0
    # no sign change: polish with Newton (tangency or cluster)
    x = r
    for _ in range(60):
        fx = f(x)
        dfx = float(npoly.polyval(x, dc))
        if dfx == 0.0:
            break
        step = fx / dfx
        x_new = min(max(x - step, lo), hi)
        if abs(x_new - x) < tol:
            x = x_new
            break
        x = x_new
    scale = float(np.max(np.abs(c))) * max(1.0, abs(x)) ** max(0, len(c) - 1)
    if abs(f(x)) <= 1e-9 * max(1.0, scale):
        return float(x)
    return None


def roots_in_open_interval(c, lo, hi, edge_tol: float = 1e-9, refine_tol: float = 1e-12):
    """Roots strictly inside ``(lo, hi)``, ignoring ones within ``edge_tol`` of the ends."""
    rs = real_roots(c, lo, hi, refine_tol=refine_tol)
    pad = edge_tol * max(1.0, hi - lo)
    return [r for r in rs if lo + pad < r < hi - pad]


def certify_positive(c, lo: float, hi: float, edge_tol: float = 1e-9) -> tuple[bool, float | None]:
    """Certify ``c > 0`` on ``(lo, hi)``: positive samples plus no interior root.

    Returns ``(ok, witness)`` where ``witness`` is a point of failure if any.
    """
    c = as_coeffs(c)
    xs = np.linspace(lo, hi, 64)[1:-1]
    if xs.size:
        vals = npoly.polyval(xs, c)
        j = int(np.argmin(vals))
        if vals[j] <= 0.0:
            return False, float(xs[j])
    interior = roots_in_open_interval(c, lo, hi, edge_tol=edge_tol)
    if interior:
        return False, float(interior[0])
    return True, None


# ---------------------------------------------------------------------------
# Segment construction: two-point C^3 Hermite fits and even axis segments.
# ---------------------------------------------------------------------------

_FACT = np.array([1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0])


def hermite_segment(a: float, b: float, jets_a, jets_b) -> np.ndarray:
    """Degree-7 polynomial on [a, b] matching value and first three derivatives
    at both ends.  Returned in the global monomial basis.

    Solved in the scaled local variable u = (x - a)/(b - a) for conditioning,
    then expanded exactly back to the monomial basis.
    """
    h = b - a
    if h <= 0:
        raise ValueError("need a < b")
    ja = np.asarray(jets_a, dtype=float)
    jb = np.asarray(jets_b, dtype=float)
    if ja.shape != (4,) or jb.shape != (4,):
        raise ValueError("jets must contain value and derivatives up to order 3")
    # left-end Taylor coefficients fix c0..c3 directly
    coeffs = np.zeros(8)
    for k in range(4):
        coeffs[k] = ja[k] * h**k / _FACT[k]
    # right-end conditions determine c4..c7
    rows = np.zeros((4, 4))
    rhs = np.zeros(4)
    for k in range(4):  # derivative order at u = 1
        target = jb[k] * h**k
        low = sum(
            coeffs[j] * _FACT[j] / _FACT[j - k] for j in range(k, 4)
        )
        rhs[k] = target - low
        for idx, j in enumerate(range(4, 8)):
            rows[k, idx] = _FACT[j] / _FACT[j - k]
    coeffs[4:] = np.linalg.solve(rows, rhs)
    return _compose_affine(coeffs, a, h)


def _compose_affine(coeffs_u: np.ndarray, a: float, h: float) -> np.ndarray:
    """Expand p(u) with u = (x - a)/h into monomial coefficients in x."""
    lin = np.array([-a / h, 1.0 / h])
    out = np.array([coeffs_u[-1]])
    for ck in coeffs_u[-2::-1]:
        out = npoly.polymul(out, lin)
        out[0] += ck
    return out


def hermite5_segment(a: float, b: float, jets_a, jets_b) -> np.ndarray:
    """Degree-5 polynomial on [a, b] matching value and first two derivatives
    at both ends, in the global monomial basis."""
    h = b - a
    if h <= 0:
        raise ValueError("need a < b")
    ja = np.asarray(jets_a, dtype=float)
    jb = np.asarray(jets_b, dtype=float)
    if ja.shape != (3,) or jb.shape != (3,):
        raise ValueError("jets must contain value and derivatives up to order 2")
    coeffs = np.zeros(6)
    for k in range(3):
        coeffs[k] = ja[k] * h**k / _FACT[k]
    rows = np.zeros((3, 3))
    rhs = np.zeros(3)
    for k in range(3):
        target = jb[k] * h**k
        low = sum(coeffs[j] * _FACT[j] / _FACT[j - k] for j in range(k, 3))
        rhs[k] = target - low
        for idx, j in enumerate(range(3, 6)):
            rows[k, idx] = _FACT[j] / _FACT[j - k]
    coeffs[3:] = np.linalg.solve(rows, rhs)
    return _compose_affine(coeffs, a, h)


def poly_antiderivative(c, lo: float, value_at_lo: float = 0.0) -> np.ndarray:
    """Antiderivative of ``c`` taking the given value at ``lo``."""
    ci = npoly.polyint(as_coeffs(c))
    ci[0] += value_at_lo - float(npoly.polyval(lo, ci))
    return ci


def even_axis_segment(b: float, jets_b, pinned: dict[int, float] | None = None,
                      powers=(0, 2, 4, 6, 8)) -> np.ndarray:
    """Even polynomial on [0, b] matching the order-3 jet at ``b``.

    ``pinned`` maps even powers to fixed coefficient values; the remaining
    powers are solved for.  The system must be square: ``len(powers) -
    len(pinned) == 4``.
    """
    pinned = dict(pinned or {})
    jb = np.asarray(jets_b, dtype=float)
    free = [p for p in powers if p not in pinned]
    if len(free) != 4:
        raise ValueError("need exactly four free coefficients for a C^3 match")
    rows = np.zeros((4, 4))
    rhs = jb.copy()
    for k in range(4):
        for p, v in pinned.items():
            rhs[k] -= v * _deriv_power(p, k, b)
        for idx, p in enumerate(free):
            rows[k, idx] = _deriv_power(p, k, b)
    sol = np.linalg.solve(rows, rhs)
    deg = max(powers)
    out = np.zeros(deg + 1)
    for p, v in pinned.items():
        out[p] = v
    for p, v in zip(free, sol):
        out[p] = v
    return out


def _deriv_power(p: int, k: int, x: float) -> float:
    """k-th derivative of x**p evaluated at x."""
    if k > p:
        return 0.0
    return _FACT[p] / _FACT[p - k] * x ** (p - k)


def jet_of_poly(c, x: float) -> np.ndarray:
    """Value and first three derivatives of the polynomial at ``x``."""
    return np.array([float(eval_poly(c, x, order=k)) for k in range(4)])
