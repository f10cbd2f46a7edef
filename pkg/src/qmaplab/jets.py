"""Second-order forward-mode scalars and generic dense linear algebra.

A ``Jet2`` carries the value, gradient and (symmetric) Hessian of a scalar
expression with respect to ``d`` chart coordinates.  Arithmetic implements
the exact second-order product/chain rules, so derivative identities can be
tested at machine precision with no finite-difference truncation error.

Values may be real or complex (numpy promotes the dtype); seeds are always
taken with respect to real coordinates, so Wirtinger-type derivatives of
holomorphic expressions come out of plain arithmetic on complex-valued jets.

The matrix helpers (``mdot``, ``minv``, ...) accept float64/complex128
arrays and object arrays of jets alike; dimensions in this package are tiny
(at most 17), so Gaussian elimination over the jet ring is cheap.
"""

from __future__ import annotations

import math
import cmath

import numpy as np

from .errors import DegenerateMetricError, InvalidPointError

__all__ = [
    "Jet2", "seed", "constant", "value_of", "grad_of", "hess_of",
    "values", "grads", "hessians",
    "log", "exp", "sqrt", "sin", "cos", "magnitude",
    "jre", "jim", "jconj",
    "mdot", "minv", "mouter", "as_object",
    "fd_gradient", "fd_hessian",
]


class Jet2:
    """Truncated second-order Taylor scalar: value + gradient + Hessian."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = value
        self.grad = grad
        self.hess = hess

    @property
    def dim(self):
        return self.grad.shape[0]

    # -- constructors ------------------------------------------------------

    @staticmethod
    def variable(x, i, d):
        g = np.zeros(d)
        g[i] = 1.0
        return Jet2(x, g, np.zeros((d, d)))

    @staticmethod
    def const(x, d):
        return Jet2(x, np.zeros(d), np.zeros((d, d)))

    # -- ring operations ---------------------------------------------------
    # ndarray operands return NotImplemented so numpy broadcasts the jet
    # elementwise over object arrays instead of leaking arrays into fields.

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value, self.grad + other.grad,
                        self.hess + other.hess)
        return Jet2(self.value + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet2):
            return Jet2(self.value - other.value, self.grad - other.grad,
                        self.hess - other.hess)
        return Jet2(self.value - other, self.grad, self.hess)

    def __rsub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return Jet2(other - self.value, -self.grad, -self.hess)

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet2):
            cross = np.outer(self.grad, other.grad)
            return Jet2(
                self.value * other.value,
                self.grad * other.value + self.value * other.grad,
                self.hess * other.value + self.value * other.hess
                + cross + cross.T,
            )
        return Jet2(self.value * other, self.grad * other, self.hess * other)

    __rmul__ = __mul__

    def _recip(self):
        v = 1.0 / self.value
        v2 = v * v
        cross = np.outer(self.grad, self.grad)
        return Jet2(v, -self.grad * v2, -self.hess * v2 + 2.0 * v2 * v * cross)

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet2):
            return self * other._recip()
        return Jet2(self.value / other, self.grad / other, self.hess / other)

    def __rtruediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return self._recip() * other

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            raise TypeError("Jet2 powers must be integers; use sqrt/exp/log")
        k = int(k)
        if k < 0:
            return (self ** (-k))._recip()
        out = Jet2.const(1.0, self.dim)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # -- complex structure -------------------------------------------------

    @property
    def real(self):
        return Jet2(np.real(self.value), np.real(self.grad), np.real(self.hess))

    @property
    def imag(self):
        return Jet2(np.imag(self.value), np.imag(self.grad), np.imag(self.hess))

    def conj(self):
        return Jet2(np.conj(self.value), np.conj(self.grad), np.conj(self.hess))

    def chain(self, f0, f1, f2):
        """Compose with a scalar function given its derivatives at value."""
        cross = np.outer(self.grad, self.grad)
        return Jet2(f0, f1 * self.grad, f1 * self.hess + f2 * cross)

    def __repr__(self):
        return f"Jet2({self.value!r}, grad={self.grad!r})"


# -- seeding and extraction ------------------------------------------------

def seed(xs):
    """Turn a 1d point into a list of jet variables (grad = identity)."""
    xs = list(xs)
    d = len(xs)
    return [Jet2.variable(float(x), i, d) for i, x in enumerate(xs)]


def constant(x, d):
    return Jet2.const(x, d)


def value_of(x):
    return x.value if isinstance(x, Jet2) else x


def grad_of(x, d=None):
    if isinstance(x, Jet2):
        return x.grad
    return np.zeros(d)


def hess_of(x, d=None):
    if isinstance(x, Jet2):
        return x.hess
    return np.zeros((d, d))


def values(arr):
    """Extract values from an object array of jets (or pass floats through)."""
    a = np.asarray(arr)
    if a.dtype != object:
        return a
    flat = [value_of(x) for x in a.flat]
    return np.array(flat).reshape(a.shape)


def grads(arr, d):
    """Stack gradients of an object array: result shape arr.shape + (d,)."""
    a = np.asarray(arr, dtype=object)
    flat = [grad_of(x, d) for x in a.flat]
    return np.stack(flat).reshape(a.shape + (d,))


def hessians(arr, d):
    a = np.asarray(arr, dtype=object)
    flat = [hess_of(x, d) for x in a.flat]
    return np.stack(flat).reshape(a.shape + (d, d))


# -- elementary functions (dispatch on jet vs number) -----------------------

def log(x, tag=None):
    if isinstance(x, Jet2):
        v = x.value
        if not (np.isreal(v) and np.real(v) > 0):
            raise InvalidPointError(f"log of non-positive argument {v!r}", tag=tag)
        v = float(np.real(v))
        return x.chain(math.log(v), 1.0 / v, -1.0 / (v * v))
    if not (np.isreal(x) and np.real(x) > 0):
        raise InvalidPointError(f"log of non-positive argument {x!r}", tag=tag)
    return math.log(float(np.real(x)))


def exp(x):
    if isinstance(x, Jet2):
        e = cmath.exp(x.value) if np.iscomplexobj(x.value) else math.exp(x.value)
        return x.chain(e, e, e)
    return math.exp(x) if not isinstance(x, complex) else cmath.exp(x)


def sqrt(x, tag=None):
    if isinstance(x, Jet2):
        v = x.value
        if not (np.isreal(v) and np.real(v) > 0):
            raise InvalidPointError(f"sqrt of non-positive argument {v!r}", tag=tag)
        s = math.sqrt(float(np.real(v)))
        return x.chain(s, 0.5 / s, -0.25 / (s * s * s))
    if x <= 0:
        raise InvalidPointError(f"sqrt of non-positive argument {x!r}", tag=tag)
    return math.sqrt(x)


def sin(x):
    if isinstance(x, Jet2):
        return x.chain(math.sin(x.value), math.cos(x.value), -math.sin(x.value))
    return math.sin(x)


def cos(x):
    if isinstance(x, Jet2):
        return x.chain(math.cos(x.value), -math.sin(x.value), -math.cos(x.value))
    return math.cos(x)


def magnitude(x):
    return abs(value_of(x))


def jre(x):
    return x.real if isinstance(x, Jet2) else np.real(x)


def jim(x):
    return x.imag if isinstance(x, Jet2) else np.imag(x)


def jconj(x):
    return x.conj() if isinstance(x, Jet2) else np.conj(x)


# -- generic dense linear algebra -------------------------------------------

def as_object(A):
    A = np.asarray(A)
    return A if A.dtype == object else A.astype(object)


def mdot(A, B):
    """Matrix/vector product valid for float, complex and jet entries."""
    A, B = np.asarray(A), np.asarray(B)
    if A.dtype == object or B.dtype == object:
        return np.dot(as_object(A), as_object(B))
    return A @ B


def mouter(u, v):
    return np.multiply.outer(np.asarray(u), np.asarray(v))


def minv(A):
    """Inverse by Gauss-Jordan with partial pivoting (generic entries)."""
    A = np.asarray(A)
    if A.dtype != object:
        return np.linalg.inv(A)
    n = A.shape[0]
    M = as_object(A).copy()
    I = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            I[i, j] = 1.0 if i == j else 0.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: magnitude(M[r, col]))
        if magnitude(M[piv, col]) == 0.0:
            raise DegenerateMetricError("singular matrix in generic inverse")
        if piv != col:
            M[[col, piv]] = M[[piv, col]]
            I[[col, piv]] = I[[piv, col]]
        inv_p = 1.0 / M[col, col]
        for j in range(n):
            M[col, j] = M[col, j] * inv_p
            I[col, j] = I[col, j] * inv_p
        for r in range(n):
            if r == col:
                continue
            factor = M[r, col]
            # a jet with value 0 can still carry derivatives: only skip
            # elimination for plain numeric zeros
            if not isinstance(factor, Jet2) and factor == 0.0:
                continue
            for j in range(n):
                M[r, j] = M[r, j] - factor * M[col, j]
                I[r, j] = I[r, j] - factor * I[col, j]
    return I


# -- finite-difference cross-check oracle ------------------------------------

def fd_gradient(f, x, h=1e-6):
    """Central finite-difference gradient, step scaled per coordinate.

    Independent cross-check for the jet propagation; never used in the
    pipeline itself.
    """
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        hi = h * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += hi
        xm[i] -= hi
        g[i] = (f(xp) - f(xm)) / (2 * hi)
    return g


def fd_hessian(f, x, h=1e-4):
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.zeros((n, n))
    f0 = f(x)
    steps = [h * max(1.0, abs(xi)) for xi in x]
    for i in range(n):
        hi = steps[i]
        xp, xm = x.copy(), x.copy()
        xp[i] += hi
        xm[i] -= hi
        H[i, i] = (f(xp) - 2 * f0 + f(xm)) / (hi * hi)
        for j in range(i + 1, n):
            hj = steps[j]
            xpp, xpm, xmp, xmm = x.copy(), x.copy(), x.copy(), x.copy()
            xpp[[i, j]] += [hi, hj]
            xpm[i] += hi
            xpm[j] -= hj
            xmp[i] -= hi
            xmp[j] += hj
            xmm[[i, j]] -= [hi, hj]
            H[i, j] = H[j, i] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4 * hi * hj)
    return H
