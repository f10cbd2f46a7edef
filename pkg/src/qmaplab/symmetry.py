r"""The symmetry group of the deformed metric and its action.

Elements are pairs (aff, heis) in normal form, acting on the circle bundle
by first the Heisenberg factor, then the affine factor:

    heis (alpha, tau):  p -> p + alpha,  s -> s + tau + 1/2 W^{-1}(alpha, p)
    aff  (lam, A, v):   X -> L X (so r -> lam^3 r, z -> (A(b+v) + i A t)/lam^2),
                        p -> S^{-T} p,  s -> s

with W^{-1}(alpha, beta) = alpha^T W^{-1} beta the fiber symplectic pairing.
The affine factor normalizes the Heisenberg factor by pushforward on alpha
with tau untouched (the pairing is S-invariant), which fixes the semidirect
product law

    (h1, k1) (h2, k2) = (h1 h2, (h2^{-1} . k1) k2).

In circle mode tau and s live mod 2 pi: the central elements tau in 2 pi Z
act trivially (the cyclic quotient that makes the action effective).
Induced Killing fields on the deformed space are built by lifting
Hamiltonian fields to the bundle and projecting along Z_P.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets, tensorlab
from .cmap import n_fields
from .errors import ConsistencyError, DomainError
from .jets import jim, jre, mdot
from .special_geometry import AffineSymmetry, embed_affine_symmetry
from .twistqk import (PPoint, QKPoint, TWOPI, insert_phi, lift_hat,
                      p_frame_data, project_to_Nbar, qk_metric,
                      qk_metric_field)

__all__ = [
    "HeisElement", "GroupElement", "identity_element", "compose", "inverse",
    "heis_product", "act_P", "act_Nbar", "act_nbar_chart",
    "isometry_report", "effectiveness_check", "induced_killing_field",
    "random_group_element", "IsometryReport",
]


@dataclass(frozen=True)
class HeisElement:
    """Heisenberg element: constant flat-frame covector plus central angle."""

    alpha: tuple
    tau: float

    @staticmethod
    def make(alpha, tau, mode="circle"):
        tau = float(np.mod(tau, TWOPI)) if mode == "circle" else float(tau)
        return HeisElement(tuple(float(a) for a in alpha), tau)

    def alpha_vec(self):
        return np.asarray(self.alpha, dtype=float)


def heis_product(model, k1, k2, mode="circle"):
    """(a1, t1) (a2, t2) = (a1 + a2, t1 + t2 - 1/2 a1^T W^{-1} a2).

    The sign of the pairing term is pinned by the time-1 flow of the lifted
    fields v + 1/2 mu_v X_P with mu_v = -v^T W^{-1} p; the central part of a
    group commutator is then minus the field-level bracket coefficient
    (left actions anti-represent vector-field brackets).
    """
    a1, a2 = k1.alpha_vec(), k2.alpha_vec()
    pairing = float(a1 @ model.omega_flat_inv() @ a2)
    return HeisElement.make(a1 + a2, k1.tau + k2.tau - 0.5 * pairing, mode)


def heis_inverse(model, k, mode="circle"):
    # pairing of alpha with itself vanishes, so the inverse is just negation
    return HeisElement.make(-k.alpha_vec(), -k.tau, mode)


@dataclass(frozen=True)
class GroupElement:
    """Normal form (aff, heis) of the semidirect product, bound to a model."""

    model: object
    aff: AffineSymmetry
    heis: HeisElement
    mode: str = "circle"

    def is_central(self, tol=1e-14):
        return (self.aff.is_identity(tol)
                and np.max(np.abs(self.heis.alpha_vec())) < tol)


def identity_element(model, mode="circle"):
    aff = embed_affine_symmetry(model, 1.0)
    return GroupElement(model, aff, HeisElement.make(np.zeros(2 * model.n), 0.0, mode), mode)


def _aff_compose(model, h1, h2):
    """(l1, A1, v1)(l2, A2, v2) = (l1 l2, A1 A2, v2 + l2^2 A2^{-1} v1).

    The representations compose by exact matrix products; the suite checks
    this against re-embedding the composed parameters.
    """
    lam = h1.lam * h2.lam
    A = h1.A @ h2.A
    v = h2.v + (h2.lam ** 2) * np.linalg.solve(h2.A, h1.v)
    return AffineSymmetry(lam, A, v, h1.L @ h2.L, h1.S @ h2.S)


def _aff_inverse(model, h):
    lam = 1.0 / h.lam
    A = np.linalg.inv(h.A)
    v = -(h.lam ** -2) * (h.A @ h.v)
    return AffineSymmetry(lam, A, v, np.linalg.inv(h.L), np.linalg.inv(h.S))


def _aff_on_heis(h, k, mode):
    """Conjugation action: alpha -> pushforward S^{-T} alpha, tau fixed."""
    alpha = np.linalg.solve(h.S.T, k.alpha_vec())
    return HeisElement.make(alpha, k.tau, mode)


def compose(g1, g2):
    if g1.mode != g2.mode:
        raise DomainError(f"mode mismatch: {g1.mode} vs {g2.mode}")
    if g1.model is not g2.model:
        raise DomainError("group elements belong to different models")
    model, mode = g1.model, g1.mode
    aff = _aff_compose(model, g1.aff, g2.aff)
    h2_inv = _aff_inverse(model, g2.aff)
    heis = heis_product(model, _aff_on_heis(h2_inv, g1.heis, mode), g2.heis, mode)
    return GroupElement(model, aff, heis, mode)


def inverse(g):
    aff_inv = _aff_inverse(g.model, g.aff)
    k_inv = heis_inverse(g.model, g.heis, g.mode)
    return GroupElement(g.model, aff_inv, _aff_on_heis(g.aff, k_inv, g.mode), g.mode)


# -- actions -----------------------------------------------------------------

def _act_heis_chart(model, heis, wq, mode):
    """Heisenberg action on the (r, b, t, p, s) chart (generic scalars)."""
    m, n2 = model.m, 2 * model.n
    alpha = heis.alpha_vec()
    base = list(wq[:1 + 2 * m])
    p = np.asarray(wq[1 + 2 * m:1 + 2 * m + n2], dtype=object)
    s = wq[-1]
    pairing = mdot(alpha, mdot(model.omega_flat_inv(), p))
    p_new = p + alpha.astype(object)
    s_new = s + heis.tau - 0.5 * pairing
    return base + list(p_new) + [s_new]


def _act_aff_chart(model, aff, wq, mode):
    """Affine action on the (r, b, t, p, s) chart (generic scalars)."""
    m, n2 = model.m, 2 * model.n
    r = wq[0]
    b = wq[1:1 + m]
    t = wq[1 + m:1 + 2 * m]
    p = np.asarray(wq[1 + 2 * m:1 + 2 * m + n2], dtype=object)
    s = wq[-1]
    # X = r (1, b + i t) with X^0 real positive; L keeps X'^0 real positive
    X = np.empty(model.n, dtype=object)
    X[0] = r
    for a in range(m):
        X[1 + a] = r * (b[a] + 1j * t[a])
    Ximg = mdot(np.asarray(aff.L, dtype=object), X)
    r_new = jre(Ximg[0])
    r_val = jets.value_of(r_new)
    if abs(jets.value_of(jim(Ximg[0]))) > 1e-12 * abs(r_val) or r_val <= 0.0:
        raise ConsistencyError(
            "affine action moved the point off the phi = 0 hypersurface")
    z = [Ximg[1 + a] / Ximg[0] for a in range(m)]
    b_new = [jre(za) for za in z]
    t_new = [jim(za) for za in z]
    p_new = mdot(np.linalg.solve(aff.S.T, np.eye(n2)).astype(object), p)
    return [r_new] + b_new + t_new + list(p_new) + [s]


def act_nbar_chart(g, wq):
    """Full group action on the deformed-space chart (generic, for jets)."""
    step = _act_heis_chart(g.model, g.heis, wq, g.mode)
    return _act_aff_chart(g.model, g.aff, step, g.mode)


def act_Nbar(g, qk):
    """Action on a QKPoint; the image must stay on {phi = 0} (hard check)."""
    if qk.mode != g.mode:
        raise DomainError(f"mode mismatch: point {qk.mode}, element {g.mode}")
    out = act_nbar_chart(g, list(qk.chart()))
    vals = [float(jets.value_of(x)) for x in out]
    m, n2 = g.model.m, 2 * g.model.n
    t_new = np.asarray(vals[1 + m:1 + 2 * m])
    if not g.model.in_domain(t_new):
        raise DomainError(f"left domain: image t={t_new.tolist()} outside PSR cone")
    return QKPoint(g.model, vals[0], vals[1:1 + m], t_new,
                   vals[1 + 2 * m:1 + 2 * m + n2], vals[-1], g.mode)


def act_P(g, pp):
    """Action on the circle bundle. phi is carried along unchanged."""
    if pp.mode != g.mode:
        raise DomainError(f"mode mismatch: point {pp.mode}, element {g.mode}")
    model = g.model
    npt = pp.n_point
    # Heisenberg part
    p1 = npt.p + g.heis.alpha_vec()
    pairing = float(g.heis.alpha_vec() @ model.omega_flat_inv() @ npt.p)
    s1 = pp.s + g.heis.tau - 0.5 * pairing
    # affine part
    X_img = g.aff.L @ npt.base.X
    from .special_geometry import cask_point_from_X
    base_img = cask_point_from_X(model, X_img)
    p2 = np.linalg.solve(g.aff.S.T, p1)
    from .cmap import NPoint
    return PPoint(NPoint(base_img, p2), s1, g.mode)


# -- isometry and effectiveness harness ---------------------------------------

@dataclass
class IsometryReport:
    element_count: int
    point_count: int
    skipped: int
    max_residual: float
    worst: tuple
    passed: bool


def isometry_report(g_list, model, c, samples, tol=1e-8):
    """Pull back the deformed metric under each element; compare at sources.

    The Jacobian of the action comes from jets; points whose image leaves
    the valid domain are skipped and counted.
    """
    if isinstance(g_list, GroupElement):
        g_list = [g_list]
    gfield = qk_metric_field(model, c)
    src_metrics = [jets.values(gfield(list(qk.chart()))).astype(float)
                   for qk in samples]
    worst = (0.0, None, None)
    skipped = 0
    for g in g_list:
        for qk, G_src in zip(samples, src_metrics):
            wq = qk.chart()
            try:
                img = act_Nbar(g, qk)
                G_img = jets.values(gfield(list(img.chart()))).astype(float)
            except DomainError:
                skipped += 1
                continue
            seeds = jets.seed(list(wq))
            out = np.asarray(act_nbar_chart(g, seeds), dtype=object)
            D = jets.grads(out, len(wq))
            resid = float(np.max(np.abs(D.T @ G_img @ D - G_src))
                          / max(np.max(np.abs(G_src)), 1.0))
            if resid > worst[0]:
                worst = (resid, g, qk)
    return IsometryReport(
        element_count=len(g_list), point_count=len(samples), skipped=skipped,
        max_residual=worst[0], worst=worst, passed=worst[0] < tol)


def _chart_displacement(model, w1, w2, mode):
    w1, w2 = np.asarray(w1, dtype=float), np.asarray(w2, dtype=float)
    d = np.abs(w1 - w2)
    if mode == "circle":
        ds = abs(np.mod(w1[-1] - w2[-1] + np.pi, TWOPI) - np.pi)
        d[-1] = ds
    return float(np.max(d))


def effectiveness_check(model, c, trials, mode, rng, points=None, move_tol=1e-9):
    """Every non-identity element must move at least one sample point."""
    if points is None:
        points = [random_qk_point(model, c, rng, mode=mode) for _ in range(5)]
    report = {"trials": 0, "failures": [], "min_move": np.inf}
    for _ in range(trials):
        g = random_group_element(model, rng, mode)
        report["trials"] += 1
        move = max(_chart_displacement(model, qk.chart(), act_Nbar(g, qk).chart(), mode)
                   for qk in points)
        report["min_move"] = min(report["min_move"], move)
        if move <= move_tol:
            report["failures"].append(g)
    # central elements: tau = 2 pi is trivial on the circle, not on the cover
    full_turn = GroupElement(model, embed_affine_symmetry(model, 1.0),
                             HeisElement.make(np.zeros(2 * model.n), TWOPI, mode), mode)
    move_full = max(_chart_displacement(model, qk.chart(),
                                        act_Nbar(full_turn, qk).chart(), mode)
                    for qk in points)
    half_turn = GroupElement(model, embed_affine_symmetry(model, 1.0),
                             HeisElement.make(np.zeros(2 * model.n), np.pi, mode), mode)
    move_half = max(_chart_displacement(model, qk.chart(),
                                        act_Nbar(half_turn, qk).chart(), mode)
                    for qk in points)
    report["full_turn_move"] = move_full
    report["half_turn_move"] = move_half
    expected_full = (move_full <= move_tol) if mode == "circle" else (move_full > move_tol)
    report["passed"] = (not report["failures"]) and expected_full and move_half > move_tol
    return report


def random_qk_point(model, c, rng, s_range=TWOPI, mode="circle", max_tries=200):
    """Rejection-sample a valid chart point in the standard boxes."""
    for _ in range(max_tries):
        r = rng.uniform(0.5, 2.0)
        b = rng.uniform(-1.0, 1.0, model.m)
        t = np.array([rng.uniform(lo, hi) for lo, hi in model.t_box])
        p = rng.uniform(-1.0, 1.0, 2 * model.n)
        s = rng.uniform(0.0, s_range)
        qk = QKPoint(model, r, b, t, p, s, mode)
        if qk.is_valid(c):
            return qk
    raise DomainError(f"could not sample a valid point for c = {c}")


def random_group_element(model, rng, mode="circle", nontrivial_bias=True):
    lam = float(rng.uniform(0.75, 1.4))
    A = np.eye(model.m)
    for gen in model.aut_generators:
        if rng.uniform() < 0.5:
            A = A @ np.asarray(gen, dtype=float)
    v = rng.uniform(-0.5, 0.5, model.m)
    aff = embed_affine_symmetry(model, lam, A, v)
    alpha = rng.uniform(-0.7, 0.7, 2 * model.n)
    tau = float(rng.uniform(0.0, TWOPI))
    return GroupElement(model, aff, HeisElement.make(alpha, tau, mode), mode)


# -- induced Killing fields ----------------------------------------------------

def induced_killing_field(model, gen, c):
    r"""Killing field of the deformed metric induced by a group generator.

    gen is ("aff", C) for an infinitesimal affine generator C (2n x 2n),
    ("fiber", v) for a fiber translation direction, or ("central",) for the
    twist circle field.  Returns a chart-field over (r, b, t, p, s).
    """
    kind = gen[0]
    nf = n_fields(model)
    if kind == "central":
        def field(wq):
            out = np.zeros(len(list(wq)), dtype=object)
            out[-1] = 1.0
            return out
        return field
    if kind == "aff":
        C = np.asarray(gen[1], dtype=float)
        V_n = nf["lift"](C)
        mu_n = nf["mu_lift"](C)
    elif kind == "fiber":
        v = np.asarray(gen[1], dtype=float)
        V_n = nf["fiber"](v)
        mu_n = nf["mu_fiber"](v)
    else:
        raise DomainError(f"unknown generator kind {kind!r}")

    def field(wq):
        w = insert_phi(list(wq), 0.0)
        wn = w[:-1]
        V = np.concatenate([np.asarray(V_n(wn), dtype=object),
                            np.zeros(1, dtype=object)])
        mu = mu_n(wn)
        hat = lift_hat(model, V, mu, w)
        return project_to_Nbar(model, hat, w, c)
    return field
