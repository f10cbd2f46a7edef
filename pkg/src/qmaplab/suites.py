r"""Seeded verification campaigns over random sample points.

Each suite draws points from a seeded generator, evaluates a batch of
identities, and returns a ``SuiteResult`` carrying the worst residual
relative to its named tolerance (``details["checks"]`` holds the per-check
maxima).  Tolerances default to ``DEFAULT_TOLERANCES`` and can be
overridden per run; sample counts likewise via ``DEFAULT_SAMPLES``.

The command line runs these suites; the acceptance tests call them directly
with the documented counts.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import jets, tensorlab
from .cmap import NPoint, hk_sample, n_chart, n_fields, omega_H, rotation_data
from .errors import DomainError, GeometryError
from .special_geometry import (CaskPoint, affine_generator, cask_frame_data,
                               cask_tensors, embed_affine_symmetry, m_fields,
                               psk_metric, tau_and_validity)
from .symmetry import (GroupElement, HeisElement, act_Nbar, compose,
                       effectiveness_check, heis_inverse, heis_product,
                       induced_killing_field, inverse, isometry_report,
                       random_group_element, random_qk_point)
from .twistqk import (elementary_deformation, insert_phi, p_frame_data,
                      project_to_Nbar, qk_metric_field)

__all__ = [
    "SuiteResult", "DEFAULT_TOLERANCES", "DEFAULT_SAMPLES",
    "suite_cask", "suite_rigid_cmap", "suite_moment", "suite_group",
    "suite_isometry", "suite_killing", "suite_twist", "suite_curvature",
    "model_generators", "run_check_suites", "thread_count",
]

DEFAULT_TOLERANCES = {
    "cask": 1e-9,
    "cask-spot": 1e-12,
    "flat-frame": 1e-10,
    "hk-blocks": 1e-10,
    "hk-closed": 1e-8,
    "omega-h": 1e-9,
    "rotating": 1e-8,
    "moment": 1e-9,
    "moment-homogeneity": 1e-12,
    "moment-exact": 1e-12,
    "group": 1e-12,
    "action": 1e-11,
    "isometry": 1e-8,
    "effectiveness": 1e-9,
    "killing": 1e-7,
    "bracket": 1e-7,
    "einstein": 1e-6,
    "scal-point": 1e-6,
    "scal-c": 1e-6,
    "kret-c0": 1e-6,
    "twist-ratio": 1e-8,
    "twist-invariance": 1e-8,
    "kernel": 1e-8,
}

DEFAULT_SAMPLES = {
    "points": 20,
    "curvature_points": 5,
    "elements": 50,
    "isometry_points": 20,
    "killing_points": 5,
    "triples": 1000,
    "pairs": 10,
    "psk_points": 50,
}


@dataclass
class SuiteResult:
    name: str
    status: str                   # PASS / FAIL / SKIP
    max_residual: float
    tolerance: float
    count: int
    details: dict = field(default_factory=dict)
    worst_point: list = None

    @property
    def passed(self):
        return self.status == "PASS"


class _Worst:
    """Track residuals normalized by their per-check tolerances."""

    def __init__(self, default_tol):
        self.default_tol = default_tol
        self.ratio = 0.0
        self.value = 0.0
        self.tol = default_tol
        self.point = None
        self.label = None
        self.checks = {}

    def update(self, value, point=None, label=None, tol=None):
        tol = self.default_tol if tol is None else tol
        value = float(value)
        if label is not None:
            self.checks[label] = max(self.checks.get(label, 0.0), value)
        ratio = value / tol
        if ratio > self.ratio:
            self.ratio = ratio
            self.value = value
            self.tol = tol
            self.label = label
            self.point = None if point is None else [float(x) for x in np.atleast_1d(point)]

    def result(self, name, count, details=None):
        details = dict(details or {})
        details["checks"] = {k: float(v) for k, v in sorted(self.checks.items())}
        if self.label is not None:
            details["worst_check"] = self.label
        status = "PASS" if self.ratio < 1.0 else "FAIL"
        return SuiteResult(name, status, self.value, self.tol, count,
                           details, self.point)


def thread_count():
    try:
        return max(1, int(os.environ.get("QMAPLAB_THREADS", "1")))
    except ValueError:
        return 1


def _sample_base_points(model, rng, count):
    pts = []
    while len(pts) < count:
        r = rng.uniform(0.5, 2.0)
        phi = rng.uniform(-2.5, 2.5)
        b = rng.uniform(-1.0, 1.0, model.m)
        t = np.array([rng.uniform(lo, hi) for lo, hi in model.t_box])
        pts.append(CaskPoint.from_chart(model, r, phi, b, t))
    return pts


def _sample_n_points(model, rng, count):
    return [NPoint(bp, rng.uniform(-1.0, 1.0, 2 * model.n))
            for bp in _sample_base_points(model, rng, count)]


def model_generators(model):
    """Algebra generators of the affine factor: scaling plus translations."""
    gens = [("scaling", affine_generator(model, dlam=1.0))]
    for a in range(model.m):
        dv = np.zeros(model.m)
        dv[a] = 1.0
        gens.append((f"translation[{a}]", affine_generator(model, dv=dv)))
    return gens


# -- criterion 1: conical special Kahler suite --------------------------------

def suite_cask(model, rng, samples=None, tolerances=None):
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    ns = {**DEFAULT_SAMPLES, **(samples or {})}
    worst = _Worst(tol["cask"])
    fields = m_fields(model)
    omega_ref = model.omega_flat()
    pts = _sample_base_points(model, rng, ns["points"])
    for pt in pts:
        w0 = pt.chart()
        _, sig, pairing, ok = tau_and_validity(model, pt.X)
        if not ok:
            worst.update(1.0, w0, "tau validity (signature/pairing)", tol=1e-30)
            continue
        ct = cask_tensors(model, pt)
        if ct.f >= 0:
            worst.update(1.0, w0, "f < 0", tol=1e-30)
        scale = max(np.max(np.abs(ct.g)), 1.0)
        g0 = jets.values(fields["g"](jets.seed(w0)))
        Lxi = tensorlab.lie_derivative(fields["xi"], fields["g"], w0).components
        worst.update(np.max(np.abs(Lxi - 2 * g0)) / scale, w0, "L_xi g = 2g")
        LJxi = tensorlab.lie_derivative(fields["Jxi"], fields["g"], w0).components
        worst.update(np.max(np.abs(LJxi)) / scale, w0, "L_Jxi g = 0")
        df = tensorlab.derive_scalar(fields["f"], w0).grad
        om0 = jets.values(fields["omega"](jets.seed(w0)))
        Jx0 = jets.values(np.asarray(fields["Jxi"](jets.seed(w0)), dtype=object)).astype(float)
        worst.update(np.max(np.abs(df + Jx0 @ om0)) / scale, w0, "df = -omega(Jxi, .)")
        worst.update(np.max(np.abs(ct.omega - omega_ref)) / 2.0, w0,
                     "flat-frame omega constant", tol=tol["flat-frame"])
    if model.name == "E1":
        tau, _, _, _ = tau_and_validity(model, np.array([1.0 + 0j, 1j]))
        spot = float(np.max(np.abs(tau.imag - np.diag([2.0, -6.0]))))
        worst.update(spot, [1.0, 0.0, 0.0, 1.0], "Im tau spot value at X=(1,i)",
                     tol=tol["cask-spot"])
    for _ in range(ns["psk_points"]):
        t = np.array([rng.uniform(lo, hi) for lo, hi in model.t_box])
        b = rng.uniform(-1.0, 1.0, model.m)
        eigs = np.linalg.eigvalsh(psk_metric(model, b, t).components)
        if eigs.min() <= 0:
            worst.update(1.0, list(b) + list(t), "psk positive definite", tol=1e-30)
    return worst.result("cask", ns["points"], {"psk_points": ns["psk_points"]})


# -- criterion 2: rigid c-map suite -------------------------------------------

def suite_rigid_cmap(model, rng, samples=None, tolerances=None):
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    ns = {**DEFAULT_SAMPLES, **(samples or {})}
    worst = _Worst(tol["hk-blocks"])
    fields = n_fields(model)
    I = np.eye(4 * model.n)
    pts = _sample_n_points(model, rng, ns["points"])
    for pt in pts:
        w0 = n_chart(pt)
        hk = hk_sample(model, pt)
        scale = max(np.max(np.abs(hk.gN)), 1.0)
        for nm, Ia in (("I1", hk.I1), ("I2", hk.I2), ("I3", hk.I3)):
            worst.update(np.max(np.abs(Ia @ Ia + I)), w0, f"{nm}^2 = -1")
            worst.update(np.max(np.abs(Ia.T @ hk.gN @ Ia - hk.gN)) / scale, w0,
                         f"gN({nm}., {nm}.) = gN")
        worst.update(np.max(np.abs(hk.I1 @ hk.I2 - hk.I3)), w0, "I1 I2 = I3")
        for nm, om in (("omega1", hk.omega1), ("omega2", hk.omega2),
                       ("omega3", hk.omega3)):
            worst.update(np.max(np.abs(om + om.T)) / scale, w0, f"{nm} antisymmetric")
        rd = rotation_data(model, pt, 0.0)
        gZZ = float(rd.Z @ hk.gN @ rd.Z)
        worst.update(abs(rd.fH - rd.fZ - gZZ) / max(abs(gZZ), 1.0), w0,
                     "f_H - f_Z = gN(Z, Z)", tol=1e-12)
        worst.update(abs(rotation_data(model, pt, 0.7).fZ - (rd.fZ - 0.35)), w0,
                     "f_Z affine in c with slope -1/2", tol=1e-12)
    # jet-heavy identities on a smaller batch
    for pt in pts[:max(3, ns["points"] // 4)]:
        w0 = n_chart(pt)
        try:
            omega_H(model, pt, tol=tol["omega-h"])
        except GeometryError:
            worst.update(1.0, w0, "omega_H two-way", tol=1e-30)
        for nm in ("omega1", "omega2", "omega3"):
            dw = tensorlab.exterior_derivative(fields[nm], w0, rank=2).components
            worst.update(np.max(np.abs(dw)), w0, f"d {nm} = 0", tol=tol["hk-closed"])
        g0 = jets.values(fields["gN"](jets.seed(w0)))
        nrm = np.max(np.abs(g0))
        for nm, target, sign in (("gN", None, 0), ("omega1", None, 0),
                                 ("omega2", "omega3", 1.0), ("omega3", "omega2", -1.0)):
            L = tensorlab.lie_derivative(fields["Z"], fields[nm], w0).components
            if target is None:
                worst.update(np.max(np.abs(L)) / nrm, w0, f"L_Z {nm} = 0",
                             tol=tol["rotating"])
            else:
                tgt = sign * jets.values(fields[target](jets.seed(w0)))
                worst.update(np.max(np.abs(L - tgt)) / nrm, w0,
                             f"L_Z {nm} rotating identity", tol=tol["rotating"])
        dZg = tensorlab.exterior_derivative(fields["iota_Z_gN"], w0).components
        pio = jets.values(fields["pi_omega"](jets.seed(w0)))
        worst.update(np.max(np.abs(dZg + 2 * pio)) / max(np.max(np.abs(pio)), 1.0),
                     w0, "d iota_Z gN = -2 pi* omega", tol=tol["omega-h"])
    return worst.result("rigid-cmap", ns["points"])


# -- criterion 3: moment maps ---------------------------------------------------

def suite_moment(model, rng, samples=None, tolerances=None):
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    ns = {**DEFAULT_SAMPLES, **(samples or {})}
    worst = _Worst(tol["moment"])
    fields = n_fields(model)
    gens = model_generators(model)
    n2 = 2 * model.n
    Ominv = model.omega_flat_inv()
    ohqp = np.zeros((2 * n2, 2 * n2))
    ohqp[:n2, :n2] = -model.omega_flat()
    ohqp[n2:, n2:] = Ominv
    pts = _sample_n_points(model, rng, ns["points"])
    for pt in pts:
        w0 = n_chart(pt)
        seeds = jets.seed(w0)
        ohch = jets.values(fields["omegaH"](seeds))
        ohnrm = max(np.max(np.abs(ohch)), 1.0)
        for label, C in gens:
            dmu = tensorlab.derive_scalar(fields["mu_lift"](C), w0).grad
            Y = jets.values(np.asarray(fields["lift"](C)(seeds), dtype=object)).astype(float)
            worst.update(np.max(np.abs(Y @ ohch + dmu)) / ohnrm, w0,
                         f"iota_Y omega_H + d mu_Y = 0 ({label})")
        v = rng.uniform(-1.0, 1.0, n2)
        dmuv = tensorlab.derive_scalar(fields["mu_fiber"](v), w0).grad
        vch = np.concatenate([np.zeros(n2), v])
        worst.update(np.max(np.abs(vch @ ohch + dmuv)), w0,
                     "iota_v omega_H + d mu_v = 0", tol=1e-11)
        # homogeneity mu(2q, 2p) = 4 mu(q, p)
        base2 = CaskPoint.from_chart(model, 2 * pt.base.r, pt.base.phi,
                                     pt.base.b, pt.base.t)
        w2 = n_chart(NPoint(base2, 2 * pt.p))
        for label, C in gens:
            m1 = jets.value_of(fields["mu_lift"](C)(list(w0)))
            m2 = jets.value_of(fields["mu_lift"](C)(list(w2)))
            worst.update(abs(m2 - 4 * m1) / max(abs(m1), 1.0), w0,
                         f"mu(2q,2p) = 4 mu ({label})", tol=tol["moment-homogeneity"])
        # equivariance for pairs of lifted generators
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                C1, C2 = gens[i][1], gens[j][1]
                Y1 = np.concatenate([C1 @ pt.base.q, -C1.T @ pt.p])
                Y2 = np.concatenate([C2 @ pt.base.q, -C2.T @ pt.p])
                pair = float(Y1 @ ohqp @ Y2)
                C3 = C2 @ C1 - C1 @ C2
                mu3 = jets.value_of(fields["mu_lift"](C3)(list(w0)))
                worst.update(abs(pair - mu3) / max(abs(mu3), 1.0), w0,
                             f"equivariance ({gens[i][0]}, {gens[j][0]})")
        # fiber obstruction: omega_H(v, w) equals the constant pairing exactly
        vv = rng.uniform(-1.0, 1.0, n2)
        ww = rng.uniform(-1.0, 1.0, n2)
        vchart = np.concatenate([np.zeros(n2), vv])
        wchart = np.concatenate([np.zeros(n2), ww])
        pair_field = float(vchart @ ohch @ wchart)
        worst.update(abs(pair_field - float(vv @ Ominv @ ww)), w0,
                     "omega_H(v, w) = w^{ij} v_i w_j", tol=tol["moment-exact"])
        # semidirect structure constants via the field bracket
        C = gens[0][1]
        br = tensorlab.vector_bracket(fields["lift"](C), fields["fiber"](vv), w0)
        expected = np.concatenate([np.zeros(n2), C.T @ vv])
        worst.update(np.max(np.abs(br - expected)), w0, "[Y, v] = (0, C^T v)",
                     tol=1e-10)
    # basis obstruction is genuinely nonzero
    e0, en = np.eye(n2)[0], np.eye(n2)[model.n]
    if abs(float(e0 @ Ominv @ en)) < 1e-6:
        worst.update(1.0, None, "obstruction nonzero for basis pair", tol=1e-30)
    return worst.result("moment", ns["points"])


# -- criterion 4: group suite ----------------------------------------------------

def suite_group(model, rng, mode="circle", samples=None, tolerances=None):
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    ns = {**DEFAULT_SAMPLES, **(samples or {})}
    worst = _Worst(tol["group"])
    n2 = 2 * model.n
    Ominv = model.omega_flat_inv()

    def angle_gap(x, y):
        return abs(np.mod(x - y + np.pi, 2 * np.pi) - np.pi)

    for _ in range(ns["triples"]):
        a = rng.uniform(-2.0, 2.0, n2)
        bb = rng.uniform(-2.0, 2.0, n2)
        ka = HeisElement.make(a, rng.uniform(0, 2 * np.pi), mode)
        kb = HeisElement.make(bb, rng.uniform(0, 2 * np.pi), mode)
        comm = heis_product(model, heis_product(model, ka, kb, mode),
                            heis_product(model, heis_inverse(model, ka, mode),
                                         heis_inverse(model, kb, mode), mode), mode)
        worst.update(max(angle_gap(comm.tau, -float(a @ Ominv @ bb)),
                         np.max(np.abs(comm.alpha_vec()))), None,
                     "heis commutator = central pairing")
        kc = HeisElement.make(rng.uniform(-2, 2, n2), rng.uniform(0, 2 * np.pi), mode)
        left = heis_product(model, heis_product(model, ka, kb, mode), kc, mode)
        right = heis_product(model, ka, heis_product(model, kb, kc, mode), mode)
        worst.update(max(angle_gap(left.tau, right.tau),
                         np.max(np.abs(left.alpha_vec() - right.alpha_vec()))),
                     None, "heis associativity")
    pts = [random_qk_point(model, 0.0, rng, mode=mode) for _ in range(3)]
    for _ in range(30):
        g1 = random_group_element(model, rng, mode)
        g2 = random_group_element(model, rng, mode)
        g3 = random_group_element(model, rng, mode)
        a = compose(compose(g1, g2), g3)
        b = compose(g1, compose(g2, g3))
        worst.update(np.max(np.abs(a.aff.S - b.aff.S)), None, "associativity (S)")
        worst.update(np.max(np.abs(a.heis.alpha_vec() - b.heis.alpha_vec())),
                     None, "associativity (alpha)")
        worst.update(angle_gap(a.heis.tau, b.heis.tau), None, "associativity (tau)")
        gid = compose(g1, inverse(g1))
        worst.update(np.max(np.abs(gid.aff.S - np.eye(n2))), None, "inverse (S)")
        worst.update(np.max(np.abs(gid.heis.alpha_vec())), None, "inverse (alpha)")
        worst.update(angle_gap(gid.heis.tau, 0.0), None, "inverse (tau)")
        for qk in pts:
            x1 = act_Nbar(g1, act_Nbar(g2, qk)).chart()
            x2 = act_Nbar(compose(g1, g2), qk).chart()
            worst.update(np.max(np.abs(np.asarray(x1) - np.asarray(x2))),
                         qk.chart(), "act_P left action", tol=tol["action"])
        aff_only = GroupElement(model, g1.aff,
                                HeisElement.make(np.zeros(n2), 0.0, mode), mode)
        img = act_Nbar(aff_only, pts[0])
        worst.update(abs(img.s - pts[0].s), pts[0].chart(), "affine action fixes s")
    # normal-form composition matches re-embedding of composed parameters
    g1 = random_group_element(model, rng, mode)
    g2 = random_group_element(model, rng, mode)
    comp = compose(g1, g2)
    re_emb = embed_affine_symmetry(model, comp.aff.lam, comp.aff.A, comp.aff.v)
    worst.update(np.max(np.abs(re_emb.S - comp.aff.S))
                 / max(np.max(np.abs(comp.aff.S)), 1.0),
                 None, "composition matches embedding", tol=1e-9)
    return worst.result("group", ns["triples"])


# -- criterion 5: isometry campaign ---------------------------------------------

def suite_isometry(model, c, rng, mode="circle", samples=None, tolerances=None):
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    ns = {**DEFAULT_SAMPLES, **(samples or {})}
    worst = _Worst(tol["isometry"])
    elements = [random_group_element(model, rng, mode) for _ in range(ns["elements"])]
    points = [random_qk_point(model, c, rng, mode=mode)
              for _ in range(ns["isometry_points"])]
    rep = isometry_report(elements, model, c, points, tol=tol["isometry"])
    worst.update(rep.max_residual,
                 rep.worst[2].chart() if rep.worst[2] is not None else None,
                 "isometry pullback residual")
    eff = effectiveness_check(model, c, max(5, ns["elements"] // 5), mode, rng,
                              points=points[:5], move_tol=tol["effectiveness"])
    if not eff["passed"]:
        worst.update(1.0, None, "effectiveness", tol=1e-30)
    bad_aff = dataclasses.replace(
        elements[0].aff,
        S=elements[0].aff.S + 1e-3 * rng.standard_normal(elements[0].aff.S.shape))
    bad = GroupElement(model, bad_aff, elements[0].heis, mode)
    bad_rep = isometry_report([bad], model, c, points[:3], tol=tol["isometry"])
    if bad_rep.max_residual < 1e-4:
        worst.update(1.0, None, "sensitivity to corrupted element", tol=1e-30)
    details = {
        "elements": ns["elements"], "points": ns["isometry_points"],
        "skipped": rep.skipped, "mode": mode,
        "effectiveness_min_move": eff["min_move"],
        "full_turn_move": eff["full_turn_move"],
        "half_turn_move": eff["half_turn_move"],
        "corrupted_residual": bad_rep.max_residual,
    }
    return worst.result(f"isometry[c={c}]", ns["elements"] * ns["isometry_points"],
                        details)


# -- criterion 6: Killing fields and bracket transfer ------------------------------

def suite_killing(model, c, rng, samples=None, tolerances=None):
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    ns = {**DEFAULT_SAMPLES, **(samples or {})}
    worst = _Worst(tol["killing"])
    gfield = qk_metric_field(model, c)
    n2 = 2 * model.n
    gens = [("aff:" + label, ("aff", C)) for label, C in model_generators(model)]
    fiber_idx = sorted({0, model.m, model.n, model.n + model.m, n2 - 1})
    gens += [(f"fiber[{i}]", ("fiber", np.eye(n2)[i])) for i in fiber_idx]
    gens += [("central", ("central",))]
    fields = {label: induced_killing_field(model, g, c) for label, g in gens}
    points = [random_qk_point(model, c, rng) for _ in range(ns["killing_points"])]
    for qk in points:
        wq = qk.chart()
        G = jets.values(gfield(list(wq))).astype(float)
        nrm = np.max(np.abs(G))
        for label, f in fields.items():
            L = tensorlab.lie_derivative(f, gfield, wq).components
            worst.update(np.max(np.abs(L)) / nrm, wq, f"Killing ({label})")
    Ominv = model.omega_flat_inv()
    wq = points[0].chart()
    for i in fiber_idx[:2]:
        for j in fiber_idx:
            if j <= i:
                continue
            vi, vj = np.eye(n2)[i], np.eye(n2)[j]
            fi = induced_killing_field(model, ("fiber", vi), c)
            fj = induced_killing_field(model, ("fiber", vj), c)
            br = tensorlab.vector_bracket(fi, fj, wq)
            expected = np.zeros(4 * model.n)
            expected[-1] = float(vi @ Ominv @ vj)
            worst.update(np.max(np.abs(br - expected)), wq,
                         f"[dp{i}^Q, dp{j}^Q] = w^ij Z_Nbar", tol=tol["bracket"])
    label0, C0 = model_generators(model)[0]
    v0 = np.eye(n2)[fiber_idx[0]]
    fY = fields["aff:" + label0]
    fv = induced_killing_field(model, ("fiber", v0), c)
    br = tensorlab.vector_bracket(fY, fv, wq)
    fCv = induced_killing_field(model, ("fiber", C0.T @ v0), c)
    expected = jets.values(np.asarray(fCv(list(wq)), dtype=object)).astype(float)
    worst.update(np.max(np.abs(br - expected)) / max(np.max(np.abs(expected)), 1.0),
                 wq, "[Y^Q, v^Q] = (C^T v)^Q", tol=tol["bracket"])
    worst.update(np.max(np.abs(tensorlab.vector_bracket(fY, fields["central"], wq))),
                 wq, "Z_Nbar is central", tol=tol["bracket"])
    return worst.result(f"killing[c={c}]", ns["killing_points"] * len(gens))


# -- criterion 10 plus twist-level invariants ---------------------------------------

def suite_twist(model, c, rng, samples=None, tolerances=None):
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    ns = {**DEFAULT_SAMPLES, **(samples or {})}
    worst = _Worst(tol["twist-invariance"])
    nfld = n_fields(model)
    n2 = 2 * model.n
    dim = 2 * n2 + 1
    points = [random_qk_point(model, c, rng) for _ in range(ns["points"])]

    def pf_field(key):
        def fieldfun(wp):
            return p_frame_data(model, wp, c, require_valid=False)[key]
        return fieldfun

    for qk in points[:max(3, ns["points"] // 5)]:
        w = insert_phi(list(qk.chart()), 0.0)
        deta = tensorlab.exterior_derivative(pf_field("eta"), w).components
        ohch = jets.values(nfld["omegaH"](jets.seed(list(w[:-1]))))
        ext = np.zeros((dim, dim))
        ext[:2 * n2, :2 * n2] = ohch
        worst.update(np.max(np.abs(deta - ext)) / max(np.max(np.abs(ext)), 1.0),
                     w, "d eta = pi* omega_H", tol=1e-10)
        pf = p_frame_data(model, jets.seed(list(w)), c)
        gt = jets.values(pf["gtildeP"]).astype(float)
        nrm = np.max(np.abs(gt))
        LZg = tensorlab.lie_derivative(pf_field("ZP"), pf_field("gtildeP"), w).components
        worst.update(np.max(np.abs(LZg)) / nrm, w, "L_ZP gtilde_P = 0")
        ZPv = jets.values(pf["ZP"]).astype(float)
        worst.update(np.max(np.abs(gt @ ZPv)) / nrm, w,
                     "iota_ZP gtilde_P = 0 (measured)", tol=tol["kernel"])
        dfZ = tensorlab.derive_scalar(pf_field("fZ"), w).grad
        th0 = jets.values(pf["thetas"][0]).astype(float)
        worst.update(np.max(np.abs(th0 - dfZ)) / max(np.max(np.abs(dfZ)), 1.0),
                     w, "theta_0 = d f_Z", tol=1e-11)
        dth0 = tensorlab.exterior_derivative(
            lambda wp: p_frame_data(model, wp, c, require_valid=False)["thetas"][0],
            w).components
        worst.update(np.max(np.abs(dth0)), w, "d theta_0 = 0", tol=1e-11)
        for k in (2, 3):
            thk = jets.values(pf["thetas"][k]).astype(float)
            worst.update(max(np.max(np.abs(thk[:2 + 2 * model.m])), abs(thk[-1])),
                         w, f"theta_{k} is fiber-supported", tol=1e-11)
        eta_v = jets.values(pf["eta"]).astype(float)
        worst.update(abs(float(eta_v @ ZPv) - float(jets.value_of(pf["fH"])))
                     / max(abs(float(jets.value_of(pf["fH"]))), 1.0),
                     w, "eta(Z_P) = f_H", tol=1e-12)

    ratios = []
    for qk in points:
        w = insert_phi(list(qk.chart()), 0.0)
        pf = p_frame_data(model, list(w), c)
        gt = jets.values(pf["gtildeP"]).astype(float)
        fZ = float(jets.value_of(pf["fZ"]))
        eta_v = jets.values(pf["eta"]).astype(float)
        keep = [0] + list(range(2, dim))
        G_qk = gt[np.ix_(keep, keep)] / (4 * abs(fZ))
        npt = qk.to_ppoint().n_point
        gH = elementary_deformation(model, npt, c).components
        Jq = jets.values(np.asarray(
            cask_frame_data(model, qk.r, 0.0, qk.b, qk.t)["Jq"], dtype=object)).astype(float)
        Mfull = np.zeros((2 * n2, 2 * n2))
        Mfull[:n2, :n2] = Jq
        Mfull[n2:, n2:] = np.eye(n2)
        es = np.zeros(dim)
        es[-1] = 1.0
        for _ in range(ns["pairs"]):
            u = rng.uniform(-1.0, 1.0, dim)
            vv = rng.uniform(-1.0, 1.0, dim)
            u_h = u - float(eta_v @ u) * es
            v_h = vv - float(eta_v @ vv) * es
            du = Mfull @ u_h[:-1]
            dv = Mfull @ v_h[:-1]
            num = float(du @ gH @ dv)
            pu = jets.values(np.asarray(project_to_Nbar(model, u_h, list(w), c),
                                        dtype=object)).astype(float)
            pv = jets.values(np.asarray(project_to_Nbar(model, v_h, list(w), c),
                                        dtype=object)).astype(float)
            den = float(pu @ G_qk @ pv)
            if abs(den) > 1e-10:
                ratios.append(num / den)
    ratios = np.asarray(ratios)
    spread = float(np.std(ratios) / abs(np.mean(ratios)))
    worst.update(spread, None, "twist ratio constancy", tol=tol["twist-ratio"])
    details = {"ratio_mean": float(np.mean(ratios)), "ratio_spread": spread,
               "ratio_count": int(ratios.size)}
    return worst.result(f"twist[c={c}]", ns["points"], details)


# -- criteria 7, 8, 9: curvature -----------------------------------------------------

def suite_curvature(model, c_values, rng, samples=None, tolerances=None):
    """Einstein property, scal constancy in points and in c, homogeneity contrast.

    Returns (SuiteResult, rows): rows feed the per-point curvature table.
    """
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    ns = {**DEFAULT_SAMPLES, **(samples or {})}
    worst = _Worst(tol["einstein"])
    c_values = [float(c) for c in c_values]
    try:
        points = [random_qk_point(model, max(c_values), rng)
                  for _ in range(ns["curvature_points"])]
    except DomainError as exc:
        return SuiteResult("curvature", "SKIP", float("inf"), tol["einstein"], 0,
                           {"error": str(exc)}), []
    dim = 4 * model.n

    def one(job):
        c, idx, qk = job
        gfield = qk_metric_field(model, c)
        cur = tensorlab.curvature(gfield, qk.chart())
        G = jets.values(gfield(list(qk.chart()))).astype(float)
        eins = float(np.linalg.norm(cur.ricci - (cur.scal / dim) * G)
                     / np.linalg.norm(G))
        return {"c": c, "point": idx, "scal": cur.scal,
                "kretschmann": cur.kretschmann, "einstein_residual": eins,
                "pair_symmetry": cur.pair_symmetry_residual(),
                "bianchi": cur.first_bianchi_residual()}

    jobs = [(c, i, qk) for c in c_values for i, qk in enumerate(points)]
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(one, jobs))
    else:
        rows = [one(job) for job in jobs]

    by_c = {c: [r for r in rows if r["c"] == c] for c in c_values}
    for c in c_values:
        rs = by_c[c]
        scals = np.array([r["scal"] for r in rs])
        for r in rs:
            worst.update(r["einstein_residual"], points[r["point"]].chart(),
                         f"einstein residual (c={c})")
            worst.update(max(r["pair_symmetry"], r["bianchi"]), None,
                         "riemann symmetries", tol=1e-9)
        if np.any(scals >= 0):
            worst.update(1.0, None, f"scal < 0 (c={c})", tol=1e-30)
        worst.update(float(np.ptp(scals)) / abs(float(np.mean(scals))), None,
                     f"scal constant across points (c={c})", tol=tol["scal-point"])
    means = np.array([np.mean([r["scal"] for r in by_c[c]]) for c in c_values])
    if len(c_values) > 1:
        worst.update(float(np.ptp(means)) / abs(float(np.mean(means))), None,
                     "scal constant across c", tol=tol["scal-c"])
    details = {"scal_by_c": {str(c): float(np.mean([r["scal"] for r in by_c[c]]))
                             for c in c_values}}
    if 0.0 in by_c:
        kret0 = np.array([r["kretschmann"] for r in by_c[0.0]])
        spread0 = float(np.ptp(kret0)) / abs(float(np.mean(kret0)))
        details["kretschmann_c0_spread"] = spread0
        worst.update(spread0, None, "kretschmann constant at c=0", tol=tol["kret-c0"])
    for c in c_values:
        if c > 0:
            kret = np.array([r["kretschmann"] for r in by_c[c]])
            # informational only: the deformed spaces are not locally homogeneous
            details[f"kretschmann_spread_c={c}"] = (
                float(np.ptp(kret)) / abs(float(np.mean(kret))))
    return worst.result("curvature", len(rows), details), rows


def run_check_suites(model, c, rng, mode="circle", samples=None, tolerances=None,
                     heavy=True):
    """The cmd_check battery, in order; heavy=False skips jet-heavy suites."""
    results = [
        suite_cask(model, rng, samples, tolerances),
        suite_rigid_cmap(model, rng, samples, tolerances),
        suite_moment(model, rng, samples, tolerances),
        suite_group(model, rng, mode, samples, tolerances),
    ]
    if heavy:
        results.append(suite_twist(model, c, rng, samples, tolerances))
        results.append(suite_killing(model, c, rng, samples, tolerances))
    return results
