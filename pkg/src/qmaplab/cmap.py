r"""Rigid c-map structure on N = T*M and its Hamiltonian symmetries.

Points of N are (base point, p) with p the covector components in the flat
frame (dx^i, dy_i).  In the splitting frame (q, p) -- q the flat coordinates
of the base -- the structure is exactly block-constant in p:

    g_N  = diag(g, g^{-1})        I_1 = diag(J, J^T)
    I_2  = [[0, -W^{-1}], [W, 0]] I_3 = I_1 I_2
    w_a  = I_a^T g_N              w_H = [[-W, 0], [0, W^{-1}]]

with W the constant flat-frame symplectic matrix of the base and the
convention w(u, v) = g(J u, v) throughout.  The rotating Killing field is
the horizontal lift Z = (-J xi, 0); its Hamiltonian data

    f_Z^c = -f - c/2  (> 0 on the one-loop domain),   f_H^c = f - c/2,

where f < 0 is the conical Kahler potential of the base.

Field evaluators (functions of the N chart (r, phi, b, t, p)) are generic
over jet scalars so every identity can be differentiated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import ConsistencyError, DomainError
from .jets import mdot, minv
from .special_geometry import CaskPoint, cask_frame_data
from .tensorlab import TensorSample

__all__ = [
    "NPoint", "HKSample", "RotationData",
    "n_chart", "npoint_from_chart", "split_n_chart",
    "hk_blocks", "hk_sample", "rotation_data", "omega_H", "I_H",
    "canonical_lift", "moment_lift", "moment_fiber", "translate_fiber",
    "chart_block_jacobian", "to_chart_frame_cov2", "to_chart_frame_vec",
    "n_fields",
]


@dataclass
class NPoint:
    """Point of N = T*M: base point plus fiber covector in the flat frame."""

    base: CaskPoint
    p: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        if self.p.shape != (2 * self.base.model.n,):
            raise DomainError(
                f"fiber covector must have length {2 * self.base.model.n}")

    @property
    def model(self):
        return self.base.model


def n_chart(pt):
    """Chart vector (r, phi, b, t, p) of an NPoint."""
    return np.concatenate([pt.base.chart(), pt.p])


def npoint_from_chart(model, w):
    w = np.asarray(w, dtype=float)
    m = model.m
    base = CaskPoint.from_chart(model, w[0], w[1], w[2:2 + m], w[2 + m:2 + 2 * m])
    return NPoint(base, w[2 + 2 * m:])


def split_n_chart(model, w):
    """Split a generic chart vector into (r, phi, b, t, p)."""
    m = model.m
    return w[0], w[1], w[2:2 + m], w[2 + m:2 + 2 * m], w[2 + 2 * m:]


@dataclass
class HKSample:
    """Hyper-Kahler tensors of N at a point, in the (q, p) splitting frame."""

    frame: str
    gN: np.ndarray
    I1: np.ndarray
    I2: np.ndarray
    I3: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    omega3: np.ndarray


@dataclass
class RotationData:
    """Rotating Killing field and its Hamiltonian values at a point."""

    Z: np.ndarray      # (q, p)-frame components; vertical part identically 0
    fZ: float
    fH: float
    c: float


def _zero2(n1, n2):
    Z = np.empty((n1, n2), dtype=object)
    Z[:, :] = 0.0
    return Z


def _block(A, B, C, D):
    n1 = A.shape[0]
    n2 = D.shape[0]
    out = np.empty((n1 + n2, n1 + n2), dtype=object)
    out[:n1, :n1] = A
    out[:n1, n1:] = B
    out[n1:, :n1] = C
    out[n1:, n1:] = D
    return out


def hk_blocks(model, fd):
    r"""Assemble all rigid c-map block tensors from conical frame data.

    Works over any scalar ring; `fd` comes from cask_frame_data.
    """
    g, ginv, J = fd["g"], fd["ginv"], fd["J"]
    n2 = g.shape[0]
    Om = model.omega_flat().astype(object)
    Ominv = model.omega_flat_inv().astype(object)
    Z2 = _zero2(n2, n2)
    gN = _block(g, Z2, Z2, ginv)
    gNinv = _block(ginv, Z2, Z2, g)
    I1 = _block(J, Z2, Z2, J.T.copy())
    I2 = _block(Z2, -Ominv, Om, Z2)
    I3 = mdot(I1, I2)
    omega1 = mdot(I1.T, gN)
    omega2 = mdot(I2.T, gN)
    omega3 = mdot(I3.T, gN)
    omegaH = _block(-Om, Z2, Z2, Ominv)
    Zq = -mdot(J, fd["q"])
    return {
        "gN": gN, "gNinv": gNinv, "I1": I1, "I2": I2, "I3": I3,
        "omega1": omega1, "omega2": omega2, "omega3": omega3,
        "omegaH": omegaH, "Zq": Zq,
    }


def hk_sample(model, pt):
    """Hyper-Kahler tensors at an NPoint (float components, (q,p) frame)."""
    fd = cask_frame_data(model, pt.base.r, pt.base.phi, pt.base.b, pt.base.t)
    bl = hk_blocks(model, fd)
    num = {k: jets.values(v).astype(float) for k, v in bl.items() if k != "Zq"}
    return HKSample("N(q,p)", num["gN"], num["I1"], num["I2"], num["I3"],
                    num["omega1"], num["omega2"], num["omega3"])


def rotation_data(model, pt, c):
    """Rotating field Z = (-J xi, 0) and its Hamiltonians at an NPoint."""
    if c < 0:
        raise DomainError(f"one-loop parameter must be >= 0, got {c}")
    fd = cask_frame_data(model, pt.base.r, pt.base.phi, pt.base.b, pt.base.t)
    f = float(jets.value_of(fd["f"]))
    J = jets.values(fd["J"]).astype(float)
    q = jets.values(fd["q"]).astype(float)
    Z = np.concatenate([-J @ q, np.zeros(2 * model.n)])
    return RotationData(Z=Z, fZ=-f - 0.5 * c, fH=f - 0.5 * c, c=float(c))


def omega_H(model, pt, tol=1e-9):
    r"""The symplectic form w_1 + d(iota_Z g_N), computed two ways.

    (i) by exterior differentiation of the one-form iota_Z g_N (jets),
    (ii) by the constant block form diag(-W, W^{-1}).
    Disagreement beyond `tol` is a hard failure; (ii) is returned.
    """
    from . import tensorlab

    w0 = n_chart(pt)
    fields = n_fields(model)

    dZg = tensorlab.exterior_derivative(fields["iota_Z_gN"], w0, frame="N(chart)").components

    # convert the chart-frame d(iota_Z gN) to the (q,p) frame and add w1 there
    M = jets.values(chart_block_jacobian(model, jets.seed(w0)))
    Minv = np.linalg.inv(M)
    dZg_qp = Minv.T @ dZg @ Minv

    fd = cask_frame_data(model, pt.base.r, pt.base.phi, pt.base.b, pt.base.t)
    bl = hk_blocks(model, fd)
    w1_qp = jets.values(bl["omega1"]).astype(float)
    block = jets.values(bl["omegaH"]).astype(float)

    assembled = w1_qp + dZg_qp
    err = np.max(np.abs(assembled - block)) / max(np.max(np.abs(block)), 1.0)
    if err > tol:
        raise ConsistencyError(f"omega_H inconsistency: two-way residual {err:.3e}")
    return TensorSample("N(q,p)", (2, 0), block)


def I_H(model, pt):
    """Canonical almost complex structure diag(-J, J^T) in the (q,p) frame."""
    fd = cask_frame_data(model, pt.base.r, pt.base.phi, pt.base.b, pt.base.t)
    J = jets.values(fd["J"]).astype(float)
    n2 = J.shape[0]
    out = np.zeros((2 * n2, 2 * n2))
    out[:n2, :n2] = -J
    out[n2:, n2:] = J.T
    return TensorSample("N(q,p)", (1, 1), out)


def canonical_lift(C, pt_or_qp):
    """Lift of the linear base field q -> C q to N: (C q, -C^T p)."""
    C = np.asarray(C, dtype=float)
    q, p = _qp_of(pt_or_qp)
    return np.concatenate([mdot(C, q), -mdot(C.T, p)])


def moment_lift(model, C, pt_or_qp):
    """mu_Y = 1/2 (-q^T W C q + p^T C W^{-1} p) for the lift of q -> Cq."""
    C = np.asarray(C, dtype=float)
    q, p = _qp_of(pt_or_qp)
    Om = model.omega_flat()
    Ominv = model.omega_flat_inv()
    return 0.5 * (-mdot(q, mdot(Om, mdot(C, q))) + mdot(p, mdot(C, mdot(Ominv, p))))


def moment_fiber(model, v, pt_or_qp):
    """mu_v = -v^T W^{-1} p for a constant vertical field v."""
    v = np.asarray(v, dtype=float)
    _, p = _qp_of(pt_or_qp)
    return -mdot(v, mdot(model.omega_flat_inv(), p))


def _qp_of(pt_or_qp):
    if isinstance(pt_or_qp, NPoint):
        return pt_or_qp.base.q, pt_or_qp.p
    q, p = pt_or_qp
    return np.asarray(q), np.asarray(p)


def translate_fiber(v, pt):
    """Fiber translation p -> p + v; the base point is untouched."""
    return NPoint(pt.base, pt.p + np.asarray(v, dtype=float))


# -- chart-frame field evaluators -------------------------------------------

def chart_block_jacobian(model, w):
    """d(q, p)/d(chart) = diag(Jq, Id): block Jacobian of the frame change."""
    r, phi, b, t, _ = split_n_chart(model, w)
    fd = cask_frame_data(model, r, phi, b, t)
    n2 = 2 * model.n
    M = np.empty((2 * n2, 2 * n2), dtype=object)
    M[:, :] = 0.0
    M[:n2, :n2] = fd["Jq"]
    for i in range(n2):
        M[n2 + i, n2 + i] = 1.0
    return M


def to_chart_frame_cov2(M, T_qp):
    """Congruence transform of a covariant 2-tensor into the chart frame."""
    return mdot(mdot(M.T.copy(), T_qp), M)


def to_chart_frame_vec(Minv, V_qp):
    return mdot(Minv, V_qp)


def n_fields(model):
    r"""Chart-frame field evaluators on N (inputs: jet or float chart vectors).

    Returned callables (w = (r, phi, b, t, p)):
      gN, omega1, omega2, omega3, omegaH : (4n, 4n) chart-frame components
      iota_Z_gN                          : one-form components of g_N(Z, .)
      Z                                  : chart components of the rotating field
      pi_omega                           : pullback to N of the base Kahler form
      f, fZ(c), fH(c)                    : scalar fields
      lift(C), mu_lift(C), mu_fiber(v)   : canonical-lift machinery
    """
    n2 = 2 * model.n

    def frame(w):
        r, phi, b, t, p = split_n_chart(model, w)
        fd = cask_frame_data(model, r, phi, b, t)
        bl = hk_blocks(model, fd)
        M = np.empty((2 * n2, 2 * n2), dtype=object)
        M[:, :] = 0.0
        M[:n2, :n2] = fd["Jq"]
        for i in range(n2):
            M[n2 + i, n2 + i] = 1.0
        return fd, bl, M, p

    def frame_inv(fd):
        Minv = np.empty((2 * n2, 2 * n2), dtype=object)
        Minv[:, :] = 0.0
        Minv[:n2, :n2] = minv(fd["Jq"])
        for i in range(n2):
            Minv[n2 + i, n2 + i] = 1.0
        return Minv

    def make_cov2(key):
        def field(w):
            fd, bl, M, _ = frame(w)
            return to_chart_frame_cov2(M, bl[key])
        return field

    def iota_Z_gN(w):
        fd, bl, M, _ = frame(w)
        alpha_qp = np.concatenate([mdot(bl["gN"][:n2, :n2], bl["Zq"]),
                                   np.zeros(n2, dtype=object)])
        return mdot(M.T.copy(), alpha_qp)

    def Z_chart(w):
        out = np.zeros(2 * n2, dtype=object)
        out[1] = -1.0    # Z = -d/dphi: J xi generates the phase rotation
        return out

    def pi_omega(w):
        fd, bl, M, _ = frame(w)
        Om = model.omega_flat().astype(object)
        full = np.empty((2 * n2, 2 * n2), dtype=object)
        full[:, :] = 0.0
        full[:n2, :n2] = Om
        return to_chart_frame_cov2(M, full)

    def f_scalar(w):
        r, phi, b, t, _ = split_n_chart(model, w)
        return cask_frame_data(model, r, phi, b, t)["f"]

    def fZ_scalar(c):
        return lambda w: -f_scalar(w) - 0.5 * c

    def fH_scalar(c):
        return lambda w: f_scalar(w) - 0.5 * c

    def lift(C):
        C = np.asarray(C, dtype=float)

        def field(w):
            fd, bl, M, p = frame(w)
            Y_qp = np.concatenate([mdot(C, fd["q"]), -mdot(C.T, np.asarray(p, dtype=object))])
            return mdot(frame_inv(fd), Y_qp)
        return field

    def mu_lift(C):
        C = np.asarray(C, dtype=float)
        Om = model.omega_flat()
        Ominv = model.omega_flat_inv()

        def field(w):
            r, phi, b, t, p = split_n_chart(model, w)
            q = cask_frame_data(model, r, phi, b, t)["q"]
            return 0.5 * (-mdot(q, mdot(Om.astype(object), mdot(C, q)))
                          + mdot(p, mdot(C, mdot(Ominv, p))))
        return field

    def mu_fiber(v):
        v = np.asarray(v, dtype=float)

        def field(w):
            _, _, _, _, p = split_n_chart(model, w)
            return -mdot(v, mdot(model.omega_flat_inv(), p))
        return field

    def fiber(v):
        v = np.asarray(v, dtype=float)

        def field(w):
            out = np.zeros(2 * n2, dtype=object)
            out[n2:] = v
            return out
        return field

    return {
        "gN": make_cov2("gN"),
        "omega1": make_cov2("omega1"),
        "omega2": make_cov2("omega2"),
        "omega3": make_cov2("omega3"),
        "omegaH": make_cov2("omegaH"),
        "iota_Z_gN": iota_Z_gN,
        "Z": Z_chart,
        "pi_omega": pi_omega,
        "f": f_scalar,
        "fZ": fZ_scalar,
        "fH": fH_scalar,
        "lift": lift,
        "mu_lift": mu_lift,
        "mu_fiber": mu_fiber,
        "fiber": fiber,
    }
