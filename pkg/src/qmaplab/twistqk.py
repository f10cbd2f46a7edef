r"""Circle bundle over N, the twist data, and the deformed metric.

P = N x S^1 carries the connection

    eta = ds + 1/2 (-W_{ij} q^i dq^j + W^{ij} p_i dp_j),   d eta = pi_N^* w_H,

the lifted rotating field Z_P = Z~ + f_H^c X_P, and the tensor fields

    g_P      = -(1/f_H^c) eta^2 + pi_N^* g_N
    theta_0  = d f_Z^c = -iota_xi g          theta_1 = eta - iota_Z g_N
    theta_2  = -iota_Z w_3                   theta_3 = iota_Z w_2
    g~_P     = g_P + (1/f_Z^c) sum_j theta_j^2.

The deformed quaternionic Kahler metric lives on the hypersurface
{phi = 0} of P, realized as the chart (r, b, t, p, s):

    g_QK = g~_P restricted, divided by 4 |f_Z^c|   (f_Z^c > 0 on the domain).

theta_0 uses the conical identity d f = iota_xi g, which keeps the
assembled metric at prepotential-derivative order two; the identity itself
is verified against direct jet differentiation in the test suite.

All evaluators accept jet scalars, so curvature and Killing checks of the
deformed metric differentiate the exact assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .cmap import NPoint, hk_blocks, split_n_chart
from .errors import ConsistencyError, DegenerateMetricError, DomainError
from .jets import mdot, minv, mouter
from .special_geometry import CaskPoint, cask_frame_data
from .tensorlab import TensorSample

__all__ = [
    "PPoint", "QKPoint", "QKMetricSample",
    "p_chart", "qk_chart", "insert_phi", "drop_phi",
    "p_frame_data", "eta", "lift_ZP", "lift_hat", "theta_and_gP",
    "qk_metric", "qk_metric_field", "elementary_deformation",
    "project_to_Nbar", "validity_fZ",
]

TWOPI = 2.0 * np.pi


@dataclass
class PPoint:
    """Point of the trivial circle bundle: N-point plus fiber angle s."""

    n_point: NPoint
    s: float
    mode: str = "circle"   # "circle": s in [0, 2 pi); "cover": s in R

    def __post_init__(self):
        if self.mode not in ("circle", "cover"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.mode == "circle":
            self.s = float(np.mod(self.s, TWOPI))

    @property
    def model(self):
        return self.n_point.model


@dataclass
class QKPoint:
    """Point of the deformed space in the chart (r, b, t, p, s) (phi = 0)."""

    model: object
    r: float
    b: np.ndarray
    t: np.ndarray
    p: np.ndarray
    s: float
    mode: str = "circle"

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        self.t = np.asarray(self.t, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.r <= 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if not self.model.in_domain(self.t):
            raise DomainError(f"outside PSR cone: t={self.t.tolist()}")
        if self.mode == "circle":
            self.s = float(np.mod(self.s, TWOPI))

    def chart(self):
        return np.concatenate([[self.r], self.b, self.t, self.p, [self.s]])

    def to_ppoint(self):
        base = CaskPoint.from_chart(self.model, self.r, 0.0, self.b, self.t)
        return PPoint(NPoint(base, self.p), self.s, self.mode)

    def f_value(self):
        fd = cask_frame_data(self.model, self.r, 0.0, self.b, self.t)
        return float(jets.value_of(fd["f"]))

    def is_valid(self, c):
        return -self.f_value() - 0.5 * c > 0


@dataclass
class QKMetricSample:
    """Deformed metric components in the (r, b, t, p, s) chart, with context."""

    frame: str
    components: np.ndarray
    c: float
    fZ: float
    fH: float
    eta: np.ndarray
    thetas: tuple


def p_chart(pp):
    """Chart vector (r, phi, b, t, p, s) of a PPoint."""
    npt = pp.n_point
    return np.concatenate([npt.base.chart(), npt.p, [pp.s]])


def qk_chart(qk):
    return qk.chart()


def insert_phi(wq, phi=0.0):
    """Embed an Nbar chart vector into the P chart at fixed phi."""
    wq = list(wq)
    return [wq[0], phi] + wq[1:]


def drop_phi(wp):
    wp = list(wp)
    return np.asarray([wp[0]] + wp[2:], dtype=object)


def split_p_chart(model, w):
    r, phi, b, t, rest = w[0], w[1], w[2:2 + model.m], w[2 + model.m:2 + 2 * model.m], w[2 + 2 * model.m:]
    return r, phi, b, t, rest[:-1], rest[-1]


def _icontract(V, T):
    """(iota_V T)_nu = V^mu T_{mu nu}."""
    return mdot(np.asarray(T, dtype=object).T.copy(), np.asarray(V, dtype=object))


def p_frame_data(model, w, c, require_valid=True):
    r"""All twist tensors at a P chart point, generic over the scalar ring.

    Returns chart-frame components (chart order r, phi, b, t, p, s):
      eta, theta0..theta3 : one-forms (4n+1)
      gN_P                : pi_N^* g_N
      gP, gtildeP         : the displayed tensors
      ZP, XP, Z           : vector fields (chart components)
      fZ, fH, f           : scalars
      etaZ                : eta(Z~ part) bookkeeping scalar eta(Z)
    """
    n2 = 2 * model.n
    dim = 2 * n2 + 1
    r, phi, b, t, p, s = split_p_chart(model, w)
    fd = cask_frame_data(model, r, phi, b, t)
    bl = hk_blocks(model, fd)
    g, ginv, q, Jq = fd["g"], fd["ginv"], fd["q"], fd["Jq"]
    Om = model.omega_flat()
    Ominv = model.omega_flat_inv()

    f = fd["f"]
    fZ = -f - 0.5 * c
    fH = f - 0.5 * c
    if require_valid and jets.value_of(fZ) <= 0:
        raise DomainError(
            f"outside one-loop domain: f_Z^c = {jets.value_of(fZ):.6g} <= 0")

    p_obj = np.asarray(p, dtype=object)
    Zq = bl["Zq"]
    Z_qp = np.concatenate([Zq, np.zeros(n2, dtype=object)])

    # (q, p, s)-frame one-forms
    eta_qps = np.concatenate([0.5 * mdot(Om.astype(object), q),
                              -0.5 * mdot(Ominv.astype(object), p_obj),
                              np.asarray([1.0], dtype=object)])
    gq = mdot(g, q)
    theta0_qps = np.concatenate([-gq, np.zeros(n2 + 1, dtype=object)])
    iota_Z_gN = np.concatenate([mdot(g, Zq), np.zeros(n2 + 1, dtype=object)])
    theta1_qps = eta_qps - iota_Z_gN
    th3 = _icontract(Z_qp, bl["omega2"])
    th2 = -_icontract(Z_qp, bl["omega3"])
    theta2_qps = np.concatenate([th2, np.zeros(1, dtype=object)])
    theta3_qps = np.concatenate([th3, np.zeros(1, dtype=object)])

    # frame change M = d(q,p,s)/d(chart): blockdiag(Jq, I, 1)
    def to_chart_form(alpha):
        out = np.empty(dim, dtype=object)
        out[:n2] = mdot(Jq.T.copy(), alpha[:n2])
        out[n2:] = alpha[n2:]
        return out

    eta_ch = to_chart_form(eta_qps)
    theta_ch = tuple(to_chart_form(a) for a in
                     (theta0_qps, theta1_qps, theta2_qps, theta3_qps))

    # pi_N^* g_N in the chart frame
    gN_P = np.empty((dim, dim), dtype=object)
    gN_P[:, :] = 0.0
    gN_P[:n2, :n2] = mdot(mdot(Jq.T.copy(), g), Jq)
    gN_P[n2:2 * n2, n2:2 * n2] = ginv

    gP = -(1.0 / fH) * mouter(eta_ch, eta_ch) + gN_P
    gtildeP = gP
    inv_fZ = 1.0 / fZ
    for a in theta_ch:
        gtildeP = gtildeP + inv_fZ * mouter(a, a)

    # vector fields in chart components
    etaZ = mdot(eta_qps[:n2], Zq)     # eta(Z) with Z = (Zq, 0, 0)
    ZP = np.zeros(dim, dtype=object)
    ZP[1] = -1.0                       # Z = -d/dphi on the base
    ZP[-1] = fH - etaZ
    XP = np.zeros(dim, dtype=object)
    XP[-1] = 1.0
    Z_ch = np.zeros(dim, dtype=object)
    Z_ch[1] = -1.0

    return {
        "eta": eta_ch, "thetas": theta_ch, "gN_P": gN_P, "gP": gP,
        "gtildeP": gtildeP, "ZP": ZP, "XP": XP, "Z": Z_ch,
        "f": f, "fZ": fZ, "fH": fH, "etaZ": etaZ, "Jq": Jq,
    }


def validity_fZ(model, qk, c):
    return -qk.f_value() - 0.5 * c


def eta(model, pp):
    """Connection one-form sample at a PPoint (chart frame)."""
    pf = p_frame_data(model, p_chart(pp), c=0.0, require_valid=False)
    return TensorSample("P(chart)", (1, 0), jets.values(pf["eta"]).astype(float))


def lift_ZP(model, pp, c):
    """Lifted rotating field Z_P = Z~ + f_H^c X_P at a PPoint (chart frame)."""
    pf = p_frame_data(model, p_chart(pp), c, require_valid=False)
    ZP = jets.values(pf["ZP"]).astype(float)
    eta_c = jets.values(pf["eta"]).astype(float)
    pairing = float(eta_c @ ZP)
    fH = float(jets.value_of(pf["fH"]))
    if abs(pairing - fH) > 1e-12 * max(1.0, abs(fH)):
        raise ConsistencyError(f"eta(Z_P) = {pairing} differs from f_H^c = {fH}")
    return ZP


def lift_hat(model, V_chart, mu_V, w):
    r"""Lift of a Hamiltonian field: V^ = V - (eta(V) - mu_V) X_P (generic).

    V_chart are chart components of V on N extended by a zero s-component;
    mu_V its w_H-Hamiltonian value at the same point.
    """
    pf = p_frame_data(model, w, c=0.0, require_valid=False)
    etaV = mdot(pf["eta"], np.asarray(V_chart, dtype=object))
    out = np.asarray(V_chart, dtype=object).copy()
    out[-1] = out[-1] - (etaV - mu_V)
    return out


def theta_and_gP(model, pp, c):
    """One-form and metric samples of the twist tensors at a PPoint."""
    pf = p_frame_data(model, p_chart(pp), c)
    thetas = tuple(TensorSample("P(chart)", (1, 0), jets.values(a).astype(float))
                   for a in pf["thetas"])
    gP = TensorSample("P(chart)", (2, 0), jets.values(pf["gP"]).astype(float))
    gtP = TensorSample("P(chart)", (2, 0), jets.values(pf["gtildeP"]).astype(float))
    return thetas, gP, gtP


def qk_metric_field(model, c):
    """Evaluator wq -> components of g_QK in the (r, b, t, p, s) chart."""
    def field(wq):
        w = insert_phi(wq, 0.0)
        pf = p_frame_data(model, w, c)
        gt = pf["gtildeP"]
        keep = [0] + list(range(2, gt.shape[0]))
        gt_restricted = gt[np.ix_(keep, keep)]
        return (0.25 / pf["fZ"]) * gt_restricted
    return field


def qk_metric(model, qk, c):
    """Deformed metric sample at a QKPoint; fails hard on degeneracy."""
    fZ = validity_fZ(model, qk, c)
    if fZ <= 0:
        raise DomainError(f"outside one-loop domain: f_Z^c = {fZ:.6g} <= 0")
    w = insert_phi(qk.chart(), 0.0)
    pf = p_frame_data(model, w, c)
    G = jets.values(qk_metric_field(model, c)(qk.chart())).astype(float)
    sym_err = np.max(np.abs(G - G.T))
    if sym_err > 1e-10 * max(1.0, np.max(np.abs(G))):
        raise ConsistencyError(f"deformed metric not symmetric ({sym_err:.3e})")
    eigs = np.linalg.eigvalsh(0.5 * (G + G.T))
    if np.min(eigs) <= 0:
        raise DegenerateMetricError(
            "deformed metric not positive definite",
            condition_number=float(np.max(eigs) / max(np.min(np.abs(eigs)), 1e-300)))
    return QKMetricSample(
        frame="Nbar(r,b,t,p,s)", components=G, c=float(c),
        fZ=float(fZ), fH=float(jets.value_of(pf["fH"])),
        eta=jets.values(pf["eta"]).astype(float),
        thetas=tuple(jets.values(a).astype(float) for a in pf["thetas"]),
    )


def elementary_deformation(model, pt, c):
    r"""Deformed metric on N: 1/f_Z g_N off HZ plus f_H/f_Z^2 g_N along HZ.

    HZ = span{Z, I_1 Z, I_2 Z, I_3 Z}; the split uses the g_N-orthogonal
    projector onto HZ.
    """
    fd = cask_frame_data(model, pt.base.r, pt.base.phi, pt.base.b, pt.base.t)
    bl = hk_blocks(model, fd)
    gN = jets.values(bl["gN"]).astype(float)
    f = float(jets.value_of(fd["f"]))
    fZ, fH = -f - 0.5 * c, f - 0.5 * c
    if fZ == 0.0:
        raise DomainError("deformation singular at point: f_Z^c = 0")
    Zq = jets.values(bl["Zq"]).astype(float)
    Z = np.concatenate([Zq, np.zeros(2 * model.n)])
    B = np.stack([Z,
                  jets.values(bl["I1"]).astype(float) @ Z,
                  jets.values(bl["I2"]).astype(float) @ Z,
                  jets.values(bl["I3"]).astype(float) @ Z], axis=1)
    gram = B.T @ gN @ B
    if abs(np.linalg.det(gram)) < 1e-12:
        raise DegenerateMetricError("quaternionic span of Z degenerate",
                                    condition_number=float(np.linalg.cond(gram)))
    P = B @ np.linalg.solve(gram, B.T @ gN)   # g_N-orthogonal projector onto HZ
    Q = np.eye(P.shape[0]) - P
    g_span = P.T @ gN @ P
    g_perp = Q.T @ gN @ Q
    gH = g_perp / fZ + (fH / (fZ * fZ)) * g_span
    return TensorSample("N(q,p)", (2, 0), gH)


def project_to_Nbar(model, vec, w, c):
    """Project a P chart vector along Z_P onto T{phi=0}; drop the phi slot."""
    pf = p_frame_data(model, w, c, require_valid=False)
    ZP = pf["ZP"]
    zphi = jets.value_of(ZP[1])
    if abs(zphi) < 1e-12:
        raise DomainError("Z_P not transversal to the hypersurface at this point")
    vec = np.asarray(vec, dtype=object)
    kappa = vec[1] / ZP[1]
    tangent = vec - kappa * ZP
    keep = [0] + list(range(2, len(tangent)))
    return tangent[keep]
