r"""Pointwise differential-geometry kernels driven by second-order jets.

A *field* here is any callable mapping a list of chart scalars (floats or
``Jet2``) to scalar / array components in that chart's coordinate frame.
Every operation seeds the chart point with jets, evaluates the field once,
and assembles the result from the exact derivatives:

* ``derive_scalar``       value, gradient, Hessian of a scalar field
* ``exterior_derivative`` d of a one-form or two-form field
* ``lie_derivative``      L_V T for tensor valences (0,2), (2,0), (1,1)
* ``vector_bracket``      [V, W] by differentiation of components
* ``pullback``            phi^* T for covariant T (Jacobian by jets)
* ``curvature``           Christoffel, Riemann, Ricci, scalar, Kretschmann

All tensors are dense; chart dimensions stay small (<= 17).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import DegenerateMetricError, FrameMismatchError

__all__ = [
    "TensorSample", "CurvatureSample",
    "derive_scalar", "exterior_derivative", "lie_derivative",
    "vector_bracket", "pullback", "curvature",
]


@dataclass
class TensorSample:
    """Components of a tensor at a point in an explicitly named frame."""

    frame: str
    valence: tuple  # (covariant rank, contravariant rank)
    components: np.ndarray

    def check_symmetric(self, tol=1e-11):
        c = self.components
        return float(np.max(np.abs(c - c.T))) <= tol

    def check_antisymmetric(self, tol=1e-11):
        c = self.components
        return float(np.max(np.abs(c + c.T))) <= tol


@dataclass
class CurvatureSample:
    """Curvature data of a metric at a point (index order: R^rho_{sigma mu nu})."""

    christoffel: np.ndarray   # Gamma^l_{mn}
    riemann: np.ndarray       # R^rho_{sigma mu nu}
    riemann_lowered: np.ndarray
    ricci: np.ndarray
    scal: float
    kretschmann: float

    def pair_symmetry_residual(self):
        R = self.riemann_lowered
        r1 = np.max(np.abs(R + np.swapaxes(R, 0, 1)))
        r2 = np.max(np.abs(R + np.swapaxes(R, 2, 3)))
        r3 = np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1))))
        scale = max(np.max(np.abs(R)), 1.0)
        return float(max(r1, r2, r3) / scale)

    def first_bianchi_residual(self):
        R = self.riemann_lowered
        cyc = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
        scale = max(np.max(np.abs(R)), 1.0)
        return float(np.max(np.abs(cyc)) / scale)


def _same_frame(a, b):
    if a != b:
        raise FrameMismatchError(f"frame mismatch: {a!r} vs {b!r}")


def derive_scalar(f, x):
    """Evaluate a scalar field on a jet-seeded point; exact to machine."""
    out = f(jets.seed(x))
    if not isinstance(out, jets.Jet2):
        out = jets.constant(out, len(list(x)))
    return out


def exterior_derivative(alpha, x, frame="chart", rank=1):
    """d(alpha) for a one-form (rank 1) or two-form (rank 2) field."""
    xs = list(x)
    d = len(xs)
    comp = np.asarray(alpha(jets.seed(xs)), dtype=object)
    if rank == 1:
        da = jets.grads(comp, d)  # da[j, i] = d_i alpha_j
        out = da.T - da
        return TensorSample(frame, (2, 0), out)
    if rank == 2:
        dw = jets.grads(comp, d)  # dw[j, k, i] = d_i w_{jk}
        dw = np.moveaxis(dw, -1, 0)  # dw[i, j, k]
        out = dw + np.transpose(dw, (1, 2, 0)) + np.transpose(dw, (2, 0, 1))
        return TensorSample(frame, (3, 0), out)
    raise ValueError("exterior_derivative supports one-forms and two-forms")


def lie_derivative(V, T, x, valence=(2, 0), frame="chart", frames=None):
    """Lie derivative of a tensor field along a vector field at a point.

    ``valence`` uses (covariant, contravariant) counts: (2,0) metric-like,
    (0,2) bivector-like, (1,1) endomorphism-like (components T^mu_nu).
    ``frames=(frame_V, frame_T)`` declares the frames of the two operands
    and rejects mismatched ones.
    """
    if frames is not None:
        _same_frame(*frames)
        frame = frames[0]
    xs = list(x)
    d = len(xs)
    point = jets.seed(xs)
    v = np.asarray(V(point), dtype=object)
    t = np.asarray(T(point), dtype=object)
    v0 = jets.values(v)
    dv = jets.grads(v, d)          # dv[mu, nu] = d_nu V^mu
    t0 = jets.values(t)
    dt = jets.grads(t, d)          # dt[a, b, k] = d_k T_{ab}
    adv = np.einsum("abk,k->ab", dt, v0)
    if valence == (2, 0):
        out = adv + dv.T @ t0 + t0 @ dv
    elif valence == (0, 2):
        out = adv - dv @ t0 - t0 @ dv.T
    elif valence == (1, 1):
        out = adv - dv @ t0 + t0 @ dv
    else:
        raise ValueError(f"unsupported valence {valence}")
    return TensorSample(frame, valence, out)


def vector_bracket(V, W, x):
    """[V, W]^mu = V^nu d_nu W^mu - W^nu d_nu V^mu (exact, via jets)."""
    xs = list(x)
    d = len(xs)
    point = jets.seed(xs)
    v = np.asarray(V(point), dtype=object)
    w = np.asarray(W(point), dtype=object)
    v0, w0 = jets.values(v), jets.values(w)
    dv, dw = jets.grads(v, d), jets.grads(w, d)
    return dw @ v0 - dv @ w0


def pullback(phi, T, x, valence=(2, 0), frame="chart"):
    """phi^* T at x for covariant T (rank 1 or 2); Jacobian by jets."""
    xs = list(x)
    img = np.asarray(phi(jets.seed(xs)), dtype=object)
    J = jets.grads(img, len(xs))       # J[alpha, mu] = d_mu phi^alpha
    t = np.asarray(T(jets.values(img)))
    if t.shape[0] != J.shape[0]:
        raise FrameMismatchError(
            f"dimension mismatch: map image has dimension {J.shape[0]}, "
            f"tensor has {t.shape[0]}")
    if valence == (1, 0):
        out = J.T @ t
    elif valence == (2, 0):
        out = J.T @ t @ J
    else:
        raise ValueError("pullback supports covariant rank 1 and 2")
    return TensorSample(frame, valence, out)


def curvature(g, x, cond_limit=1e12):
    """Full curvature of a metric field at a point.

    One jet evaluation of the metric supplies dg and d2g exactly; the rest
    is dense index algebra. Raises on numerically singular metrics.
    """
    xs = list(x)
    d = len(xs)
    comp = np.asarray(g(jets.seed(xs)), dtype=object)
    G = jets.values(comp)
    dG = np.moveaxis(jets.grads(comp, d), -1, 0)        # dG[k, m, n]
    d2G = np.moveaxis(jets.hessians(comp, d), (-2, -1), (0, 1))  # d2G[k, l, m, n]

    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > cond_limit:
        raise DegenerateMetricError("degenerate metric", condition_number=float(cond))
    Ginv = np.linalg.inv(G)

    # Gamma^l_{mn} = 1/2 g^{ls} (d_m g_{sn} + d_n g_{sm} - d_s g_{mn})
    bracket = (np.einsum("msn->msn", dG)   # d_m g_{sn}
               + np.einsum("nsm->msn", dG)
               - np.einsum("smn->msn", dG))
    Gamma = 0.5 * np.einsum("ls,msn->lmn", Ginv, bracket)

    # d_k Gamma^l_{mn}: product rule through g^{-1}
    dGinv = -np.einsum("la,kab,bs->kls", Ginv, dG, Ginv)
    dbr = d2G + np.einsum("knsm->kmsn", d2G) - np.einsum("ksmn->kmsn", d2G)
    dGamma = 0.5 * (np.einsum("kls,msn->klmn", dGinv, bracket)
                    + np.einsum("ls,kmsn->klmn", Ginv, dbr))

    # R^r_{s m n} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}
    R = (np.einsum("mrns->rsmn", dGamma)
         - np.einsum("nrms->rsmn", dGamma)
         + np.einsum("rml,lns->rsmn", Gamma, Gamma)
         - np.einsum("rnl,lms->rsmn", Gamma, Gamma))

    Rlow = np.einsum("rl,lsmn->rsmn", G, R)
    Ric = np.einsum("msmn->sn", R)
    scal = float(np.einsum("sn,sn->", Ginv, Ric))
    Rup = np.einsum("ai,ibcd->abcd", Ginv, Rlow)
    Rup = np.einsum("bj,ajcd->abcd", Ginv, Rup)
    Rup = np.einsum("ck,abkd->abcd", Ginv, Rup)
    Rup = np.einsum("dl,abcl->abcd", Ginv, Rup)
    kret = float(np.einsum("abcd,abcd->", Rlow, Rup))
    return CurvatureSample(Gamma, R, Rlow, Ric, scal, kret)
