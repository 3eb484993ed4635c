"""Truncated multivariate Taylor jets.

A :class:`Jet` holds the Taylor coefficients of a (possibly tensor-valued)
function of a few perturbation variables ``u_0 .. u_{m-1}`` around a base
point.  The admissible monomials are described by a :class:`Basis`:

* a *hyper-dual* basis (every variable in its own group, degree <= 1) is the
  flat form of a tower of nested first-order dual numbers; it is what
  :func:`fpg.derivatives.directional_derivative` uses;
* a *Taylor* basis (coordinates in an x group and a y group, with separate
  degree bounds) carries every partial derivative up to the bound at once,
  so fiber derivatives of derived quantities become coefficient shifts.

Every jet records the order up to which its coefficients are exact
(``valid``).  Arithmetic takes the minimum of its operands, differentiation
lowers it, and reading a coefficient outside it raises
:class:`~fpg.errors.TruncationError` instead of returning garbage.
"""

from __future__ import annotations

import functools
import itertools
import math
from typing import Sequence

import numpy as np

from .errors import DomainError, TruncationError

Validity = tuple  # (total bound, bound of group 0, bound of group 1, ...)


class Basis:
    """Set of monomials closed under division.

    ``groups[v]`` is the group id of variable ``v``; a monomial is admissible
    when its total degree is ``<= total`` and the degree in each group ``g``
    is ``<= bounds[g]``.  Instances are interned: use :meth:`get`.
    """

    def __init__(self, groups: tuple, bounds: tuple, total: int):
        self.groups = groups
        self.bounds = bounds
        self.total = total
        self.nvars = len(groups)
        self.full: Validity = (total, *bounds)
        self._group_mat = np.zeros((self.nvars, len(bounds)), dtype=np.int64)
        for v, g in enumerate(groups):
            self._group_mat[v, g] = 1
        monos = [e for e in self._enumerate() if self._admits(e, self.full)]
        monos.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
        self.exponents = np.array(monos, dtype=np.int64).reshape(len(monos), self.nvars)
        self.size = len(monos)
        self.index = {e: i for i, e in enumerate(monos)}
        self.factorials = np.array(
            [math.prod(math.factorial(x) for x in e) for e in monos], dtype=float
        )

    @classmethod
    @functools.lru_cache(maxsize=None)
    def get(cls, groups: tuple, bounds: tuple, total: int) -> "Basis":
        return cls(tuple(groups), tuple(bounds), int(total))

    @classmethod
    def hyperdual(cls, depth: int) -> "Basis":
        """Flat nested-dual basis: ``depth`` tags, each to first order."""
        return cls.get(tuple(range(depth)), (1,) * depth, depth)

    @classmethod
    def taylor(cls, n: int, order: int, x_order: int) -> "Basis":
        """Variables ``(dx_1..dx_n, dy_1..dy_n)``; total degree <= order, x degree <= x_order."""
        return cls.get((0,) * n + (1,) * n, (min(x_order, order), order), order)

    def __repr__(self) -> str:
        return f"Basis(groups={self.groups}, bounds={self.bounds}, total={self.total})"

    def _enumerate(self):
        caps = [min(self.total, self.bounds[g]) for g in self.groups]
        return itertools.product(*(range(c + 1) for c in caps))

    def _admits(self, e, valid: Validity) -> bool:
        if sum(e) > valid[0]:
            return False
        sums = [0] * len(self.bounds)
        for v, x in enumerate(e):
            sums[self.groups[v]] += x
        return all(s <= b for s, b in zip(sums, valid[1:]))

    @functools.lru_cache(maxsize=None)
    def mask(self, valid: Validity) -> np.ndarray:
        tot = self.exponents.sum(axis=1)
        grp = self.exponents @ self._group_mat
        ok = tot <= valid[0]
        for g, b in enumerate(valid[1:]):
            ok &= grp[:, g] <= b
        return ok

    @functools.lru_cache(maxsize=None)
    def products(self, valid: Validity):
        """Index arrays ``(ia, ib, starts, rows)`` of all pairs ``a * b = c`` with ``c`` valid.

        Pairs are sorted by ``c``; ``starts`` feeds ``np.add.reduceat`` and
        ``rows`` are the destination monomials.
        """
        keep = np.flatnonzero(self.mask(valid))
        radix = 2 * self.total + 1
        weights = radix ** np.arange(self.nvars, dtype=np.int64)
        keys = self.exponents @ weights
        sub = keys[keep]
        order = np.argsort(sub)
        sorted_keys = sub[order]
        sums = (keys[keep][:, None] + keys[keep][None, :]).ravel()
        pos = np.searchsorted(sorted_keys, sums)
        pos = np.minimum(pos, len(sorted_keys) - 1)
        hit = sorted_keys[pos] == sums
        a_loc, b_loc = np.divmod(np.flatnonzero(hit), len(keep))
        ia, ib = keep[a_loc], keep[b_loc]
        ic = keep[order[pos[hit]]]
        srt = np.argsort(ic, kind="stable")
        ia, ib, ic = ia[srt], ib[srt], ic[srt]
        rows, starts = np.unique(ic, return_index=True)
        return ia, ib, starts, rows

    @functools.lru_cache(maxsize=None)
    def derivative_map(self, var: int):
        """``(src, dst, factor)`` such that d/du_var moves ``coef[src]*factor`` to ``dst``."""
        unit = np.zeros(self.nvars, dtype=np.int64)
        unit[var] = 1
        src, dst, fac = [], [], []
        for i, e in enumerate(self.exponents):
            if e[var] > 0:
                lower = tuple(int(x) for x in e - unit)
                src.append(i)
                dst.append(self.index[lower])
                fac.append(float(e[var]))
        return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64), np.array(fac)

    def lowered(self, valid: Validity, var: int) -> Validity:
        g = self.groups[var]
        out = list(valid)
        out[0] -= 1
        out[1 + g] -= 1
        return tuple(out)


def _meet(a: Validity, b: Validity) -> Validity:
    return tuple(min(x, y) for x, y in zip(a, b))


def _lift(coef: np.ndarray, ndim: int) -> np.ndarray:
    extra = ndim - (coef.ndim - 1)
    if extra == 0:
        return coef
    return coef.reshape(coef.shape[:1] + (1,) * extra + coef.shape[1:])


class Jet:
    """Truncated Taylor expansion with a tensor batch shape.

    ``coef`` has shape ``(basis.size, *shape)``; ``coef[k]`` multiplies the
    monomial ``basis.exponents[k]``.  Jets are treated as immutable.
    """

    __slots__ = ("basis", "coef", "valid")
    __array_priority__ = 100.0

    def __init__(self, basis: Basis, coef, valid: Validity | None = None):
        coef = np.asarray(coef, dtype=float)
        if coef.shape[0] != basis.size:
            raise ValueError("coefficient array does not match basis size")
        self.basis = basis
        self.coef = coef
        self.valid = basis.full if valid is None else tuple(valid)

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, basis: Basis, value) -> "Jet":
        value = np.asarray(value, dtype=float)
        coef = np.zeros((basis.size,) + value.shape)
        coef[0] = value
        return cls(basis, coef)

    @classmethod
    def variable(cls, basis: Basis, value: float, direction) -> "Jet":
        """``value + sum_v direction[v] * u_v``."""
        coef = np.zeros(basis.size)
        coef[0] = value
        for v, d in enumerate(direction):
            e = tuple(1 if w == v else 0 for w in range(basis.nvars))
            if d and e in basis.index:  # absent when the group bound is 0
                coef[basis.index[e]] = d
        return cls(basis, coef)

    # introspection ----------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.coef.shape[1:]

    @property
    def ndim(self) -> int:
        return self.coef.ndim - 1

    @property
    def value(self) -> np.ndarray | float:
        """Order-zero coefficient (the function value at the base point)."""
        if self.valid[0] < 0 or min(self.valid[1:]) < 0:
            raise TruncationError("jet has been differentiated beyond its truncation order")
        v = self.coef[0]
        return float(v) if v.ndim == 0 else v.copy()

    def coefficient(self, exponents) -> np.ndarray | float:
        e = tuple(int(x) for x in exponents)
        if not self.basis._admits(e, self.valid):
            raise TruncationError(f"monomial {e} lies outside the exact order {self.valid}")
        v = self.coef[self.basis.index[e]]
        return float(v) if v.ndim == 0 else v.copy()

    def partial(self, exponents) -> np.ndarray | float:
        """Partial derivative ``d^|e| / du^e`` at the base point."""
        e = tuple(int(x) for x in exponents)
        c = self.coefficient(e)
        return c * math.prod(math.factorial(x) for x in e)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, valid={self.valid}, value={self.coef[0]!r})"

    # structural (linear) operations ------------------------------------
    def _new(self, coef, valid=None) -> "Jet":
        return Jet(self.basis, coef, self.valid if valid is None else valid)

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return self._new(self.coef[(slice(None),) + idx])

    def transpose(self, *axes) -> "Jet":
        return self._new(self.coef.transpose(0, *(a + 1 for a in axes)))

    def swapaxes(self, a: int, b: int) -> "Jet":
        return self._new(np.swapaxes(self.coef, a + 1, b + 1))

    def reshape(self, *shape) -> "Jet":
        return self._new(self.coef.reshape((self.basis.size,) + tuple(shape)))

    def einsum(self, spec: str) -> "Jet":
        """Single-operand linear einsum over the batch axes, e.g. ``'mjkm->jk'``."""
        lhs, rhs = spec.split("->")
        return self._new(np.einsum(f"...{lhs}->...{rhs}", self.coef))

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        elif isinstance(axis, int):
            axis = (axis,)
        return self._new(self.coef.sum(axis=tuple(a % self.ndim + 1 for a in axis)))

    def diff(self, var: int) -> "Jet":
        """Exact partial derivative along perturbation variable ``var``."""
        src, dst, fac = self.basis.derivative_map(var)
        coef = np.zeros_like(self.coef)
        coef[dst] = self.coef[src] * fac.reshape((-1,) + (1,) * self.ndim)
        out = self._new(coef, self.basis.lowered(self.valid, var))
        return out._clean()

    def nilpotent(self) -> "Jet":
        coef = self.coef.copy()
        coef[0] = 0.0
        return self._new(coef)

    def _clean(self) -> "Jet":
        m = self.basis.mask(self.valid) if min(self.valid) >= 0 else None
        if m is None:
            self.coef[...] = 0.0
        elif not m.all():
            self.coef[~m] = 0.0
        return self

    # arithmetic --------------------------------------------------------
    def _binary_add(self, other, sign: float) -> "Jet":
        if isinstance(other, Jet):
            _check_basis(self, other)
            shape = np.broadcast_shapes(self.shape, other.shape)
            coef = _lift(self.coef, len(shape)) + sign * _lift(other.coef, len(shape))
            return Jet(self.basis, coef, _meet(self.valid, other.valid))._clean()
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.shape, other.shape)
        coef = np.array(np.broadcast_to(_lift(self.coef, len(shape)), (self.basis.size,) + shape))
        coef[0] = coef[0] + sign * other
        return self._new(coef)

    def __add__(self, other):
        return self._binary_add(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary_add(other, -1.0)

    def __rsub__(self, other):
        return (-self)._binary_add(other, 1.0)

    def __neg__(self):
        return self._new(-self.coef)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Jet):
            return _product(self, other)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.shape, other.shape)
        return self._new(_lift(self.coef, len(shape)) * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        if np.any(other == 0.0):
            raise DomainError("division by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, m):
        if isinstance(m, Jet) or float(m) != int(m):
            raise DomainError("jets support integer powers only")
        return ipow(self, int(m))


def _check_basis(a: Jet, b: Jet) -> None:
    if a.basis is not b.basis:
        raise ValueError("jets built on different bases cannot be combined")


def _product(a: Jet, b: Jet) -> Jet:
    _check_basis(a, b)
    shape = np.broadcast_shapes(a.shape, b.shape)
    valid = _meet(a.valid, b.valid)
    if min(valid) < 0:
        return Jet(a.basis, np.zeros((a.basis.size,) + shape), valid)
    ia, ib, starts, rows = a.basis.products(valid)
    prod = _lift(a.coef, len(shape))[ia] * _lift(b.coef, len(shape))[ib]
    coef = np.zeros((a.basis.size,) + shape)
    coef[rows] = np.add.reduceat(prod, starts, axis=0)
    return Jet(a.basis, coef, valid)


def contract(spec: str, a, b) -> Jet | np.ndarray:
    """Two-operand einsum where either operand may be a jet or a constant array.

    The batch axes of jets are addressed by ``spec`` exactly as in
    ``np.einsum``; the coefficient axis is handled internally.
    """
    lhs, out = spec.split("->")
    sa, sb = lhs.split(",")
    if isinstance(a, Jet) and isinstance(b, Jet):
        _check_basis(a, b)
        valid = _meet(a.valid, b.valid)
        ia, ib, starts, rows = a.basis.products(valid)
        prod = np.einsum(f"z{sa},z{sb}->z{out}", a.coef[ia], b.coef[ib], optimize=True)
        coef = np.zeros((a.basis.size,) + prod.shape[1:])
        coef[rows] = np.add.reduceat(prod, starts, axis=0)
        return Jet(a.basis, coef, valid)
    if isinstance(a, Jet):
        return a._new(np.einsum(f"z{sa},{sb}->z{out}", a.coef, np.asarray(b, dtype=float)))
    if isinstance(b, Jet):
        return b._new(np.einsum(f"{sa},z{sb}->z{out}", np.asarray(a, dtype=float), b.coef))
    return np.einsum(spec, a, b)


def stack(items: Sequence, axis: int = 0) -> Jet:
    """Stack jets (and constants) sharing one basis along a new batch axis."""
    basis = next(x.basis for x in items if isinstance(x, Jet))
    jets = [x if isinstance(x, Jet) else Jet.constant(basis, x) for x in items]
    valid = functools.reduce(_meet, (j.valid for j in jets))
    ax = axis if axis < 0 else axis + 1
    return Jet(basis, np.stack([j.coef for j in jets], axis=ax), valid)


def as_jet(x, basis: Basis) -> Jet:
    return x if isinstance(x, Jet) else Jet.constant(basis, x)


# univariate composition ---------------------------------------------------


def _horner(x: Jet, terms: list) -> Jet:
    K = len(terms) - 1
    nil = x.nilpotent()
    out = Jet.constant(x.basis, np.broadcast_to(terms[K], x.shape))
    out.valid = x.valid
    for k in range(K - 1, -1, -1):
        out = out * nil + terms[k]
    return out


def _series(x: Jet, fn) -> Jet:
    K = max(x.valid[0], 0)
    return _horner(x, fn(x.coef[0], K))


def reciprocal(x: Jet) -> Jet:
    c0 = x.coef[0]
    if np.any(c0 == 0.0):
        raise DomainError("division by a jet whose order-zero coefficient is 0")
    return _series(x, lambda c, K: [(-1.0) ** k / c ** (k + 1) for k in range(K + 1)])


def sqrt(x: Jet) -> Jet:
    c0 = x.coef[0]
    if np.any(c0 <= 0.0):
        raise DomainError("sqrt of a jet needs a positive order-zero coefficient")

    def fn(c, K):
        return [_binom(0.5, k) * c ** (0.5 - k) for k in range(K + 1)]

    return _series(x, fn)


def exp(x: Jet) -> Jet:
    return _series(x, lambda c, K: [np.exp(c) / math.factorial(k) for k in range(K + 1)])


def log(x: Jet) -> Jet:
    c0 = x.coef[0]
    if np.any(c0 <= 0.0):
        raise DomainError("log of a jet needs a positive order-zero coefficient")

    def fn(c, K):
        return [np.log(c)] + [(-1.0) ** (k + 1) / (k * c**k) for k in range(1, K + 1)]

    return _series(x, fn)


def sin(x: Jet) -> Jet:
    return _series(
        x, lambda c, K: [np.sin(c + k * math.pi / 2) / math.factorial(k) for k in range(K + 1)]
    )


def cos(x: Jet) -> Jet:
    return _series(
        x, lambda c, K: [np.cos(c + k * math.pi / 2) / math.factorial(k) for k in range(K + 1)]
    )


def atan(x: Jet) -> Jet:
    def fn(c, K):
        # 1/(q0 + q1 t + t^2) as a power series, then integrate term by term
        q0, q1 = 1.0 + c * c, 2.0 * c
        r = [1.0 / q0]
        for k in range(1, K):
            nxt = q1 * r[k - 1] + (r[k - 2] if k >= 2 else 0.0)
            r.append(-nxt / q0)
        return [np.arctan(c)] + [r[k - 1] / k for k in range(1, K + 1)]

    return _series(x, fn)


def ipow(x: Jet, m: int) -> Jet:
    if m < 0:
        return ipow(reciprocal(x), -m)
    result = None
    base = x
    while m:
        if m & 1:
            result = base if result is None else result * base
        m >>= 1
        if m:
            base = base * base
    if result is None:
        out = Jet.constant(x.basis, np.ones(x.shape))
        out.valid = x.valid
        return out
    return result


def _binom(a: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= (a - j) / (j + 1)
    return out


def inv(m: Jet) -> Jet:
    """Inverse of a jet-valued matrix (last two batch axes) by a nilpotent Neumann series."""
    m0 = m.coef[0]
    m0_inv = np.linalg.inv(m0)
    nil = m.nilpotent()
    K = max(m.valid[0], 0)
    out = Jet.constant(m.basis, m0_inv)
    out.valid = m.valid
    step = -np.asarray(m0_inv)
    for _ in range(K):
        out = contract("...ij,...jk->...ik", step, contract("...ij,...jk->...ik", nil, out)) + m0_inv
    return out
