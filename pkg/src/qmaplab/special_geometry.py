r"""Cubic special real models and the conical affine special Kahler geometry.

A ``CubicModel`` is the datum of a cubic polynomial h(t) = 1/6 k_{abc} t^a t^b t^c
on R^m together with the cone U = R_{>0} . {h=1} (one of the built-in domain
predicates).  From it the package builds:

* the projective special Kahler metric -1/4 d^2 log h (db db + dt dt),
* the holomorphic prepotential F(X) = -1/6 k_{abc} X^a X^b X^c / X^0 on the
  cone over R^{m} + i U inside C^n (n = m+1),
* the period matrix tau = F'' and the conical Kahler data (g, omega, J, xi)
  in the global flat coordinates x^i = Re X^i, y_i = -Re dF/dX^i,
* the group of affine model symmetries (scalings, automorphisms of {h=1},
  translations of Re z) embedded as constant symplectic matrices on (x, y).

Sign conventions are fixed once here and asserted everywhere downstream:

    g(u, w)   = 2 Re( Im(tau)_{ij} u^i conj(w)^j )
    omega     = g(J . , . )                (component matrix  J^T g)
    f         = 1/2 g(xi, xi) = Im(tau)_{ij} X^i conj(X)^j  < 0

With these choices the flat-frame symplectic matrix is exactly constant,
omega = [[0, 2 I], [-2 I, 0]] in the ordering (x, y).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import jets
from .errors import (ConsistencyError, DegenerateMetricError, DomainError,
                     InvalidPointError, ModelFormatError)
from .jets import jim, jre, mdot, minv
from .tensorlab import TensorSample

__all__ = [
    "CubicModel", "CaskPoint", "CaskTensors", "AffineSymmetry",
    "builtin_model", "load_model", "eval_h", "psk_metric",
    "check_psr_automorphism", "prepotential", "tau_matrix",
    "tau_and_validity", "affine_coords", "cask_frame_data", "cask_tensors",
    "embed_affine_symmetry", "affine_generator", "check_cask_automorphism",
    "symplectic_flat", "BUILTIN_MODELS",
]


_DOMAIN_PREDICATES = {
    # positive orthant: every t^a > 0 (covers both built-in models)
    "positive_orthant": lambda t: bool(np.all(np.asarray(t, dtype=float) > 0)),
}


@dataclass
class CubicModel:
    """Projective special real datum: cubic coefficients plus cone predicate."""

    name: str
    m: int
    k: np.ndarray              # (m, m, m), fully symmetric
    domain_id: str
    hsurface_samples: list = field(default_factory=list)
    aut_generators: list = field(default_factory=list)   # matrices preserving h
    t_box: tuple = ((0.5, 2.0),)  # per-coordinate sampling box inside U

    def __post_init__(self):
        self.k = np.asarray(self.k, dtype=float)
        if self.k.shape != (self.m, self.m, self.m):
            raise ModelFormatError(f"k has shape {self.k.shape}, expected {(self.m,)*3}")
        if np.max(np.abs(self.k - np.transpose(self.k, (1, 0, 2)))) > 0 or \
           np.max(np.abs(self.k - np.transpose(self.k, (0, 2, 1)))) > 0:
            raise ModelFormatError("cubic coefficients are not fully symmetric")
        if self.domain_id not in _DOMAIN_PREDICATES:
            raise ModelFormatError(f"unknown domain predicate {self.domain_id!r}")

    @property
    def n(self):
        return self.m + 1

    @property
    def dim_nbar(self):
        return 4 * self.n

    # cubic and its derivatives, generic over the scalar ring
    def h(self, t):
        acc = 0.0
        k = self.k
        for a in range(self.m):
            for b in range(self.m):
                for c in range(self.m):
                    if k[a, b, c] != 0.0:
                        acc = acc + (k[a, b, c] / 6.0) * t[a] * t[b] * t[c]
        return acc

    def h_grad(self, t):
        out = np.empty(self.m, dtype=object)
        k = self.k
        for a in range(self.m):
            acc = 0.0
            for b in range(self.m):
                for c in range(self.m):
                    if k[a, b, c] != 0.0:
                        acc = acc + (k[a, b, c] / 2.0) * t[b] * t[c]
            out[a] = acc
        return out

    def h_hess(self, t):
        out = np.empty((self.m, self.m), dtype=object)
        k = self.k
        for a in range(self.m):
            for b in range(self.m):
                acc = 0.0
                for c in range(self.m):
                    if k[a, b, c] != 0.0:
                        acc = acc + k[a, b, c] * t[c]
                out[a, b] = acc
        return out

    def in_domain(self, t):
        t = np.asarray(t, dtype=float)
        if t.shape != (self.m,):
            return False
        return _DOMAIN_PREDICATES[self.domain_id](t) and float(jets.value_of(self.h(t))) > 0

    def omega_flat(self):
        """Constant flat-frame symplectic matrix [[0, 2I], [-2I, 0]]."""
        n = self.n
        O = np.zeros((2 * n, 2 * n))
        O[:n, n:] = 2.0 * np.eye(n)
        O[n:, :n] = -2.0 * np.eye(n)
        return O

    def omega_flat_inv(self):
        n = self.n
        O = np.zeros((2 * n, 2 * n))
        O[:n, n:] = -0.5 * np.eye(n)
        O[n:, :n] = 0.5 * np.eye(n)
        return O


def symplectic_flat(model):
    return model.omega_flat()


def _dense_k(m, entries):
    k = np.zeros((m, m, m))
    for item in entries:
        a, b, c, val = item
        for idx in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
            k[idx] = val
    return k


def builtin_model(name):
    if name == "E1":
        # h = t^3 on R_{>0}
        return CubicModel(
            name="E1", m=1, k=_dense_k(1, [(0, 0, 0, 6.0)]),
            domain_id="positive_orthant",
            hsurface_samples=[[1.0]],
            aut_generators=[],
            t_box=((0.5, 2.0),),
        )
    if name == "E2":
        # h = t^1 t^2 t^3 on the positive octant, Aut contains S_3
        perm_gens = [
            [[0, 1, 0], [0, 0, 1], [1, 0, 0]],   # cyclic (123)
            [[0, 1, 0], [1, 0, 0], [0, 0, 1]],   # transposition (12)
        ]
        return CubicModel(
            name="E2", m=3, k=_dense_k(3, [(0, 1, 2, 1.0)]),
            domain_id="positive_orthant",
            hsurface_samples=[[1.0, 1.0, 1.0], [2.0, 1.0, 0.5]],
            aut_generators=perm_gens,
            t_box=((0.5, 2.0), (0.5, 2.0), (0.5, 2.0)),
        )
    raise ModelFormatError(f"no builtin model named {name!r}")


BUILTIN_MODELS = ("E1", "E2")


def load_model(path_or_name):
    """Load a cubic model from a JSON file, or return a builtin by name."""
    if path_or_name in BUILTIN_MODELS:
        return builtin_model(path_or_name)
    try:
        with open(path_or_name) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    try:
        m = int(raw["m"])
        model = CubicModel(
            name=str(raw.get("name", path_or_name)),
            m=m,
            k=_dense_k(m, [tuple(e) for e in raw["k"]]),
            domain_id=raw["domain_id"],
            hsurface_samples=[list(map(float, s)) for s in raw.get("hsurface_samples", [])],
            aut_generators=[np.asarray(g, dtype=float).tolist() for g in raw.get("aut_generators", [])],
            t_box=tuple(tuple(map(float, b)) for b in raw.get("t_box", [(0.5, 2.0)] * m)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"model file missing/invalid field: {exc}") from exc
    for s in model.hsurface_samples:
        if abs(float(jets.value_of(model.h(np.asarray(s)))) - 1.0) > 1e-12:
            raise ModelFormatError(f"declared hypersurface sample {s} has h != 1")
    return model


def eval_h(model, t):
    return model.h(np.asarray(t, dtype=object if any(isinstance(x, jets.Jet2) for x in t) else float))


def psk_metric(model, b, t):
    """Projective special Kahler metric -1/4 d^2 log h in the (b, t) frame."""
    t = np.asarray(t, dtype=float)
    if not model.in_domain(t):
        raise DomainError(f"outside PSR cone: t={t.tolist()}")
    h = float(jets.value_of(model.h(t)))
    hg = jets.values(model.h_grad(t))
    hh = jets.values(model.h_hess(t))
    H = -0.25 * (hh / h - np.outer(hg, hg) / (h * h))
    m = model.m
    G = np.zeros((2 * m, 2 * m))
    G[:m, :m] = H
    G[m:, m:] = H
    return TensorSample("psk(b,t)", (2, 0), G)


def check_psr_automorphism(model, A, tol=1e-12):
    """True iff pulling back the cubic coefficients through A reproduces them."""
    A = np.asarray(A, dtype=float)
    if A.shape != (model.m, model.m):
        raise DomainError(f"automorphism candidate must be {model.m}x{model.m}")
    if abs(np.linalg.det(A)) < 1e-14:
        raise DegenerateMetricError("singular automorphism candidate")
    pulled = np.einsum("def,da,eb,fc->abc", model.k, A, A, A)
    # residual at the level of h's coefficient array k/6
    residual = float(np.max(np.abs(pulled - model.k)) / 6.0)
    return residual <= tol, residual


# -- prepotential and period matrix -----------------------------------------

def prepotential(model, X):
    """F(X) = -1/6 k_{abc} X^a X^b X^c / X^0 (generic scalars)."""
    X = np.asarray(X, dtype=object)
    if jets.magnitude(X[0]) == 0.0:
        raise InvalidPointError("pole of prepotential", tag="X^0 = 0")
    return -model.h(X[1:]) / X[0]


def _prepotential_grad(model, X):
    """dF/dX^i in closed form; degree-1 homogeneous."""
    X = np.asarray(X, dtype=object)
    X0 = X[0]
    h = model.h(X[1:])
    hg = model.h_grad(X[1:])
    out = np.empty(model.n, dtype=object)
    out[0] = h / (X0 * X0)
    for a in range(model.m):
        out[1 + a] = -hg[a] / X0
    return out


def tau_matrix(model, X):
    """Period matrix tau_ij = d^2 F / dX^i dX^j in closed form."""
    X = np.asarray(X, dtype=object)
    if jets.magnitude(X[0]) == 0.0:
        raise InvalidPointError("pole of prepotential", tag="X^0 = 0")
    X0 = X[0]
    n, m = model.n, model.m
    h = model.h(X[1:])
    hg = model.h_grad(X[1:])
    hh = model.h_hess(X[1:])
    tau = np.empty((n, n), dtype=object)
    inv0 = 1.0 / X0
    inv02 = inv0 * inv0
    tau[0, 0] = -2.0 * h * inv02 * inv0
    for a in range(m):
        tau[0, 1 + a] = tau[1 + a, 0] = hg[a] * inv02
        for b in range(m):
            tau[1 + a, 1 + b] = -hh[a, b] * inv0
    return tau


def tau_and_validity(model, X, eig_tol=1e-10):
    """tau, signature of Im(tau), and the pairing Im(tau)_ij X^i conj(X)^j.

    Valid iff the signature is (n-1, 1) and the pairing is negative.
    """
    tau = tau_matrix(model, X)
    tau_num = jets.values(tau)
    S = tau_num.imag
    Xn = jets.values(np.asarray(X, dtype=object)).astype(complex)
    eig = np.linalg.eigvalsh(S)
    scale = max(np.max(np.abs(eig)), 1.0)
    smallest = np.min(np.abs(eig))
    if smallest < eig_tol * scale:
        raise DegenerateMetricError(
            "signature degenerate at point",
            condition_number=float(scale / smallest) if smallest > 0 else float("inf"))
    pos = int(np.sum(eig > 0))
    neg = int(np.sum(eig < 0))
    pairing = float(np.real(Xn @ S @ np.conj(Xn)))
    ok = (pos, neg) == (model.n - 1, 1) and pairing < 0
    return tau_num, (pos, neg), pairing, ok


def affine_coords(model, X):
    """Global flat coordinates x^i = Re X^i, y_i = -Re dF/dX^i (generic)."""
    X = np.asarray(X, dtype=object)
    dF = _prepotential_grad(model, X)
    x = np.array([jre(Xi) for Xi in X], dtype=object)
    y = np.array([-jre(d) for d in dF], dtype=object)
    return x, y


def chart_to_X(model, r, phi, b, t):
    """Chart (r, phi, b, t) -> X = r e^{i phi} (1, b + i t) (generic)."""
    X = np.empty(model.n, dtype=object)
    phase = jets.cos(phi) + 1j * jets.sin(phi)
    X0 = r * phase
    X[0] = X0
    for a in range(model.m):
        X[1 + a] = X0 * (b[a] + 1j * t[a])
    return X


def dX_dchart(model, r, phi, b, t, X):
    """Columns: derivative of X w.r.t. (r, phi, b^a, t^a); closed form."""
    n, m = model.n, model.m
    cols = np.empty((n, 2 * n), dtype=object)
    X0 = X[0]
    inv_r = 1.0 / r
    for i in range(n):
        cols[i, 0] = X[i] * inv_r        # d/dr
        cols[i, 1] = 1j * X[i]           # d/dphi
        for a in range(m):
            cols[i, 2 + a] = X0 if i == 1 + a else 0.0       # d/db^a
            cols[i, 2 + m + a] = 1j * X0 if i == 1 + a else 0.0  # d/dt^a
    return cols


def cask_frame_data(model, r, phi, b, t):
    r"""All pointwise conical special Kahler data, generic over scalars.

    Returns a dict with (object arrays unless noted):
      X, q          complex coordinates and flat coordinates (x, y) stacked
      tau, S, R     period matrix and its imaginary/real parts
      T, Tinv       Jacobian d(x,y)/d(Re X, Im X) and its inverse
      g, ginv       metric in the flat frame, and inverse
      J             complex structure in the flat frame
      Jq            chart Jacobian d(x,y)/d(r, phi, b, t)
      f             Kahler potential 1/2 g(xi, xi) = Im(tau)_ij X^i conj(X)^j
    """
    n = model.n
    X = chart_to_X(model, r, phi, b, t)
    tau = tau_matrix(model, X)
    S = np.empty((n, n), dtype=object)
    R = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            S[i, j] = jim(tau[i, j])
            R[i, j] = jre(tau[i, j])

    # T = d(x,y)/d(a,b) = [[I, 0], [-R, S]];  T^{-1} = [[I, 0], [S^{-1} R, S^{-1}]]
    Sinv = minv(S)
    SinvR = mdot(Sinv, R)
    I_n = np.eye(n)
    Z_n = np.zeros((n, n))
    T = _block2(I_n, Z_n, -R, S)
    Tinv = _block2(I_n, Z_n, SinvR, Sinv)

    # real metric in (Re X, Im X) frame is diag(2S, 2S)
    G_ab = _block2(2.0 * S, Z_n, Z_n, 2.0 * S)
    G_ab_inv = _block2(0.5 * Sinv, Z_n, Z_n, 0.5 * Sinv)
    g = mdot(mdot(_transpose(Tinv), G_ab), Tinv)
    ginv = mdot(mdot(T, G_ab_inv), _transpose(T))

    # J = multiplication by i: in (a,b) frame [[0, -I], [I, 0]]
    J_ab = _block2(Z_n, -I_n, I_n, Z_n)
    J = mdot(mdot(T, J_ab), Tinv)

    dX = dX_dchart(model, r, phi, b, t, X)
    Jq = np.empty((2 * n, 2 * n), dtype=object)
    tdX = mdot(tau, dX)
    for col in range(2 * n):
        for i in range(n):
            Jq[i, col] = jre(dX[i, col])
            Jq[n + i, col] = -jre(tdX[i, col])

    x, y = affine_coords(model, X)
    q = np.concatenate([x, y])

    f = 0.0
    for i in range(n):
        for j in range(n):
            f = f + S[i, j] * jre(X[i] * jets.jconj(X[j]))
    return {
        "X": X, "q": q, "tau": tau, "S": S, "R": R, "T": T, "Tinv": Tinv,
        "g": g, "ginv": ginv, "J": J, "Jq": Jq, "f": f,
    }


def _block2(A, B, C, D):
    n = A.shape[0]
    out = np.empty((2 * n, 2 * n), dtype=object)
    out[:n, :n] = A
    out[:n, n:] = B
    out[n:, :n] = C
    out[n:, n:] = D
    return out


def _transpose(A):
    return A.T.copy()


@dataclass
class CaskPoint:
    """Point of the conical domain in the chart (r, phi, b, t), with caches."""

    model: CubicModel
    r: float
    phi: float
    b: np.ndarray
    t: np.ndarray
    X: np.ndarray = None
    x: np.ndarray = None
    y: np.ndarray = None
    J_chart_to_affine: np.ndarray = None

    @classmethod
    def from_chart(cls, model, r, phi, b, t, cond_limit=1e12):
        b = np.asarray(b, dtype=float)
        t = np.asarray(t, dtype=float)
        if r <= 0:
            raise DomainError(f"r must be positive, got {r}")
        if not -np.pi < phi <= np.pi:
            raise DomainError(f"phi must lie in (-pi, pi], got {phi}")
        if not model.in_domain(t):
            raise DomainError(f"outside PSR cone: t={t.tolist()}")
        fd = cask_frame_data(model, float(r), float(phi), b, t)
        X = jets.values(fd["X"]).astype(complex)
        Jq = jets.values(fd["Jq"]).astype(float)
        cond = np.linalg.cond(Jq)
        if not np.isfinite(cond) or cond > cond_limit:
            raise DegenerateMetricError("chart-to-affine Jacobian degenerate",
                                        condition_number=float(cond))
        x = X.real.copy()
        y = jets.values(fd["q"]).astype(float)[model.n:]
        return cls(model, float(r), float(phi), b, t, X, x, y, Jq)

    @property
    def q(self):
        return np.concatenate([self.x, self.y])

    def chart(self):
        return np.concatenate([[self.r, self.phi], self.b, self.t])


@dataclass
class CaskTensors:
    """Conical special Kahler tensors in the flat (x, y) frame at a point."""

    g: np.ndarray
    omega: np.ndarray
    omega_inv: np.ndarray
    J: np.ndarray
    xi: np.ndarray
    Jxi: np.ndarray
    f: float


def cask_tensors(model, point):
    """Evaluate the CASK tensors at a valid point; raises on invalid data."""
    _, sig, pairing, ok = tau_and_validity(model, point.X)
    if not ok:
        raise DomainError(
            f"point fails CASK validity: signature {sig}, pairing {pairing:.6g}")
    fd = cask_frame_data(model, point.r, point.phi, point.b, point.t)
    g = jets.values(fd["g"]).astype(float)
    J = jets.values(fd["J"]).astype(float)
    omega = J.T @ g
    q = jets.values(fd["q"]).astype(float)
    f = float(jets.value_of(fd["f"]))
    return CaskTensors(
        g=g, omega=omega, omega_inv=np.linalg.inv(omega), J=J,
        xi=q.copy(), Jxi=J @ q, f=f,
    )


# -- affine symmetries -------------------------------------------------------

@dataclass
class AffineSymmetry:
    """Model symmetry (lambda, A, v) with its linear actions L (on X) and S (on (x,y))."""

    lam: float
    A: np.ndarray
    v: np.ndarray
    L: np.ndarray        # n x n real
    S: np.ndarray        # 2n x 2n real symplectic

    def is_identity(self, tol=1e-14):
        return (abs(self.lam - 1) < tol and
                np.max(np.abs(self.A - np.eye(self.A.shape[0]))) < tol and
                np.max(np.abs(self.v)) < tol)


def _L_matrix(model, lam, A, v):
    """L = scaling o A-block o translation acting on X (generic entries)."""
    n, m = model.n, model.m
    A = np.asarray(A)
    v = np.asarray(v)
    L = np.empty((n, n), dtype=object)
    # translation: X^0 -> X^0, X^a -> X^a + v^a X^0
    # A-block:     X^a -> A^a_b X^b
    # scaling:     X^0 -> lam^3 X^0, X^a -> lam X^a
    L[0, 0] = lam * lam * lam
    for a in range(m):
        L[0, 1 + a] = 0.0
        acc = 0.0
        for c in range(m):
            acc = acc + A[a, c] * v[c]
        L[1 + a, 0] = lam * acc
        for bcol in range(m):
            L[1 + a, 1 + bcol] = lam * A[a, bcol]
    return L


def _reference_points(model):
    """Two generic chart points used to pin down constant matrices."""
    m = model.m
    t1 = np.array([1.1 + 0.13 * a for a in range(m)])
    t2 = np.array([0.8 + 0.21 * a for a in range(m)])
    b1 = np.array([0.3 - 0.11 * a for a in range(m)])
    b2 = np.array([-0.2 + 0.17 * a for a in range(m)])
    return (1.0, 0.25, b1, t1), (1.35, -0.4, b2, t2)


def _induced_affine_matrix(model, L, chart_pt):
    """S = T(L X) . diag(L, L) . T(X)^{-1} evaluated at one chart point.

    L is real, so it acts blockwise on (Re X, Im X); the flat-coordinate
    Jacobian T carries the point dependence, which cancels for genuine
    model symmetries (verified by the callers).
    """
    r, phi, b, t = chart_pt
    fd = cask_frame_data(model, r, phi, b, t)
    LX = mdot(L, fd["X"])
    n = model.n
    LL = np.empty((2 * n, 2 * n), dtype=object)
    LL[:, :] = 0.0
    for i in range(n):
        for j in range(n):
            LL[i, j] = L[i, j]
            LL[n + i, n + j] = L[i, j]
    tau_img = tau_matrix(model, LX)
    S_img = np.empty((n, n), dtype=object)
    R_img = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            S_img[i, j] = jim(tau_img[i, j])
            R_img[i, j] = jre(tau_img[i, j])
    T_img = _block2(np.eye(n), np.zeros((n, n)), -R_img, S_img)
    return mdot(mdot(T_img, LL), fd["Tinv"])


def _round_simple(x, tol=1e-9, max_den=64):
    fr = Fraction(x).limit_denominator(max_den)
    val = float(fr)
    return val if abs(val - x) <= tol else x


def embed_affine_symmetry(model, lam, A=None, v=None, tol=1e-11):
    """Build the symplectic representation of (lambda, A, v) on the flat frame.

    The induced matrix is computed as a Jacobian at a reference point,
    snapped to simple rationals where unambiguous, then re-verified:
    constant across a second point and symplectic for the flat frame form.
    """
    m = model.m
    A = np.eye(m) if A is None else np.asarray(A, dtype=float)
    v = np.zeros(m) if v is None else np.asarray(v, dtype=float)
    if lam <= 0:
        raise DomainError(f"scaling factor must be positive, got {lam}")
    ok, residual = check_psr_automorphism(model, A)
    if not ok:
        raise DomainError(f"A is not an automorphism of the cubic (residual {residual:.3e})")

    L = _L_matrix(model, float(lam), A, v)
    pt1, pt2 = _reference_points(model)
    S1 = jets.values(_induced_affine_matrix(model, L, pt1)).astype(float)
    S2 = jets.values(_induced_affine_matrix(model, L, pt2)).astype(float)
    if np.max(np.abs(S1 - S2)) > tol * max(1.0, np.max(np.abs(S1))):
        raise ConsistencyError(
            f"embedding inconsistency: induced matrix not constant "
            f"(drift {np.max(np.abs(S1 - S2)):.3e})")
    Om = model.omega_flat()
    L_num = jets.values(np.asarray(L, dtype=object)).astype(float)
    for cand in (np.vectorize(_round_simple)(S1), S1):
        sympl = np.max(np.abs(cand.T @ Om @ cand - Om)) <= tol * np.max(np.abs(Om))
        drift = np.max(np.abs(cand - S2)) <= 1e-8 * max(1.0, np.max(np.abs(cand)))
        if sympl and drift:
            return AffineSymmetry(float(lam), A, v, L_num, cand)
    raise ConsistencyError("embedding inconsistency: induced matrix is not symplectic")


def affine_generator(model, dlam=0.0, dA=None, dv=None):
    """Infinitesimal symplectic generator C = dS/dtau at the identity (exact).

    The one-parameter family lambda = 1 + tau dlam, A = I + tau dA,
    v = tau dv is pushed through the embedding with tau a jet variable.
    """
    m = model.m
    dA = np.zeros((m, m)) if dA is None else np.asarray(dA, dtype=float)
    dv = np.zeros(m) if dv is None else np.asarray(dv, dtype=float)
    tau_var = jets.Jet2.variable(0.0, 0, 1)
    lam = 1.0 + tau_var * dlam
    A = np.empty((m, m), dtype=object)
    v = np.empty(m, dtype=object)
    for a in range(m):
        v[a] = tau_var * dv[a]
        for c in range(m):
            A[a, c] = (1.0 if a == c else 0.0) + tau_var * dA[a, c]
    L = _L_matrix(model, lam, A, v)
    pt1, _ = _reference_points(model)
    Sjet = _induced_affine_matrix(model, L, pt1)
    C = jets.grads(Sjet, 1)[..., 0]
    Om = model.omega_flat()
    if np.max(np.abs(C.T @ Om + Om @ C)) > 1e-9 * max(1.0, np.max(np.abs(C))):
        raise ConsistencyError("generator is not infinitesimally symplectic")
    return C


def check_cask_automorphism(model, sym, points, tol=1e-10):
    """Verify that (L, S) preserves g, J, xi on a sample of points."""
    report = {"g": 0.0, "J": 0.0, "xi": 0.0, "S_constant": 0.0}
    S, L = sym.S, sym.L
    for pt in points:
        src = cask_tensors(model, pt)
        X_img = L @ pt.X
        img = cask_point_from_X(model, X_img)
        dst = cask_tensors(model, img)
        scale = max(np.max(np.abs(src.g)), 1.0)
        report["g"] = max(report["g"], float(np.max(np.abs(S.T @ dst.g @ S - src.g)) / scale))
        report["J"] = max(report["J"], float(np.max(np.abs(np.linalg.solve(S, dst.J @ S) - src.J))))
        report["xi"] = max(report["xi"], float(np.max(np.abs(S @ src.xi - dst.xi))
                                               / max(np.max(np.abs(dst.xi)), 1.0)))
        chart_pt = (pt.r, pt.phi, pt.b, pt.t)
        S_here = jets.values(_induced_affine_matrix(model, np.asarray(L, dtype=object), chart_pt)).astype(float)
        report["S_constant"] = max(report["S_constant"],
                                   float(np.max(np.abs(S_here - S)) / max(np.max(np.abs(S)), 1.0)))
    report["pass"] = all(val <= tol for key, val in report.items() if key != "pass")
    return report


def cask_point_from_X(model, X):
    """Recover the chart point (r, phi, b, t) from X = X^0 (1, z)."""
    X = np.asarray(X, dtype=complex)
    X0 = X[0]
    r = float(np.abs(X0))
    if r == 0.0:
        raise InvalidPointError("pole of prepotential", tag="X^0 = 0")
    phi = float(np.angle(X0))
    z = X[1:] / X0
    return CaskPoint.from_chart(model, r, phi, z.real.copy(), z.imag.copy())


def m_fields(model):
    r"""Chart-frame field evaluators on the conical base (chart (r, phi, b, t)).

    The Euler field is r d/dr and its rotation is d/dphi, so both have
    constant chart components; g, omega and f carry the point dependence.
    """
    m = model.m

    def split(w):
        return w[0], w[1], w[2:2 + m], w[2 + m:2 + 2 * m]

    def g_chart(w):
        r, phi, b, t = split(w)
        fd = cask_frame_data(model, r, phi, b, t)
        return mdot(mdot(fd["Jq"].T.copy(), fd["g"]), fd["Jq"])

    def omega_chart(w):
        r, phi, b, t = split(w)
        fd = cask_frame_data(model, r, phi, b, t)
        Om = model.omega_flat().astype(object)
        return mdot(mdot(fd["Jq"].T.copy(), Om), fd["Jq"])

    def J_chart(w):
        r, phi, b, t = split(w)
        fd = cask_frame_data(model, r, phi, b, t)
        Jq = fd["Jq"]
        return mdot(mdot(minv(Jq), fd["J"]), Jq)

    def f_scalar(w):
        r, phi, b, t = split(w)
        return cask_frame_data(model, r, phi, b, t)["f"]

    def xi(w):
        out = np.zeros(2 * model.n, dtype=object)
        out[0] = w[0]
        return out

    def Jxi(w):
        out = np.zeros(2 * model.n, dtype=object)
        out[1] = 1.0
        return out

    return {"g": g_chart, "omega": omega_chart, "J": J_chart,
            "f": f_scalar, "xi": xi, "Jxi": Jxi}
