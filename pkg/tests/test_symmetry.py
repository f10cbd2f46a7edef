"""Group law, bundle action, isometry/effectiveness harness, induced fields."""

import dataclasses

import numpy as np
import pytest

from qmaplab import (cmap, jets, special_geometry as sg, symmetry as sym,
                     tensorlab, twistqk as tq)
from qmaplab.errors import DomainError

TWOPI = 2 * np.pi


def angle_gap(x, y):
    return abs(np.mod(x - y + np.pi, TWOPI) - np.pi)


def test_heis_product_and_commutator(e1, rng):
    Ominv = e1.omega_flat_inv()
    for _ in range(50):
        a = rng.uniform(-2, 2, 4)
        b = rng.uniform(-2, 2, 4)
        ka = sym.HeisElement.make(a, rng.uniform(0, TWOPI))
        kb = sym.HeisElement.make(b, rng.uniform(0, TWOPI))
        comm = sym.heis_product(
            e1, sym.heis_product(e1, ka, kb),
            sym.heis_product(e1, sym.heis_inverse(e1, ka),
                             sym.heis_inverse(e1, kb)))
        assert np.max(np.abs(comm.alpha_vec())) == 0.0
        assert angle_gap(comm.tau, -float(a @ Ominv @ b)) < 1e-12
    # alpha = beta: the commutator is the identity
    ka = sym.HeisElement.make([0.3, -0.2, 0.5, 0.1], 1.0)
    comm = sym.heis_product(
        e1, sym.heis_product(e1, ka, ka),
        sym.heis_product(e1, sym.heis_inverse(e1, ka), sym.heis_inverse(e1, ka)))
    assert np.max(np.abs(comm.alpha_vec())) == 0.0 and angle_gap(comm.tau, 0) < 1e-14


def test_group_axioms(e1, rng):
    for _ in range(25):
        g1 = sym.random_group_element(e1, rng)
        g2 = sym.random_group_element(e1, rng)
        g3 = sym.random_group_element(e1, rng)
        a = sym.compose(sym.compose(g1, g2), g3)
        b = sym.compose(g1, sym.compose(g2, g3))
        assert np.max(np.abs(a.aff.S - b.aff.S)) < 1e-12
        assert np.max(np.abs(a.heis.alpha_vec() - b.heis.alpha_vec())) < 1e-12
        assert angle_gap(a.heis.tau, b.heis.tau) < 1e-12
        gid = sym.compose(g1, sym.inverse(g1))
        assert np.max(np.abs(gid.aff.S - np.eye(4))) < 1e-12
        assert np.max(np.abs(gid.heis.alpha_vec())) < 1e-12
        assert angle_gap(gid.heis.tau, 0.0) < 1e-12


def test_conjugation_pushes_alpha(e1, rng):
    aff = sg.embed_affine_symmetry(e1, 1.3, None, [0.4])
    h = sym.GroupElement(e1, aff, sym.HeisElement.make(np.zeros(4), 0.0))
    alpha = rng.uniform(-1, 1, 4)
    k = sym.GroupElement(e1, sg.embed_affine_symmetry(e1, 1.0),
                         sym.HeisElement.make(alpha, 0.7))
    conj = sym.compose(sym.compose(h, k), sym.inverse(h))
    assert np.max(np.abs(conj.heis.alpha_vec()
                         - np.linalg.solve(aff.S.T, alpha))) < 1e-12
    assert angle_gap(conj.heis.tau, 0.7) < 1e-12
    assert conj.aff.is_identity(1e-12)
    # verified behaviorally through the action as well
    c = 0.3
    qk = sym.random_qk_point(e1, c, rng)
    push = sym.GroupElement(e1, sg.embed_affine_symmetry(e1, 1.0),
                            sym.HeisElement.make(np.linalg.solve(aff.S.T, alpha), 0.7))
    x1 = sym.act_Nbar(conj, qk).chart()
    x2 = sym.act_Nbar(push, qk).chart()
    assert np.max(np.abs(np.asarray(x1) - np.asarray(x2))) < 1e-12


def test_act_P_examples(e1, rng):
    base = sg.CaskPoint.from_chart(e1, 1.0, 0.4, [0.2], [1.1])
    npt = cmap.NPoint(base, rng.uniform(-1, 1, 4))
    pp = tq.PPoint(npt, 1.0)
    # central element shifts only s
    central = sym.GroupElement(e1, sg.embed_affine_symmetry(e1, 1.0),
                               sym.HeisElement.make(np.zeros(4), 0.9))
    img = sym.act_P(central, pp)
    assert np.allclose(img.n_point.p, pp.n_point.p)
    assert np.allclose(img.n_point.base.X, pp.n_point.base.X)
    assert angle_gap(img.s, pp.s + 0.9) < 1e-14
    # (alpha, 0) at p = 0: p -> alpha, s unchanged
    alpha = rng.uniform(-1, 1, 4)
    el = sym.GroupElement(e1, sg.embed_affine_symmetry(e1, 1.0),
                          sym.HeisElement.make(alpha, 0.0))
    pp0 = tq.PPoint(cmap.NPoint(base, np.zeros(4)), 1.3)
    img = sym.act_P(el, pp0)
    assert np.allclose(img.n_point.p, alpha)
    assert angle_gap(img.s, 1.3) < 1e-14
    # identity fixes everything
    ident = sym.identity_element(e1)
    img = sym.act_P(ident, pp)
    assert np.allclose(img.n_point.p, pp.n_point.p) and angle_gap(img.s, pp.s) < 1e-14
    # the left-action property on P
    g1 = sym.random_group_element(e1, rng)
    g2 = sym.random_group_element(e1, rng)
    one = sym.act_P(g1, sym.act_P(g2, pp))
    two = sym.act_P(sym.compose(g1, g2), pp)
    assert np.max(np.abs(one.n_point.p - two.n_point.p)) < 1e-11
    assert np.max(np.abs(one.n_point.base.X - two.n_point.base.X)) < 1e-11
    assert angle_gap(one.s, two.s) < 1e-11


def test_act_Nbar_scaling_example(e1, rng):
    qk = tq.QKPoint(e1, 1.0, [0.3], [1.2], rng.uniform(-1, 1, 4), 0.7)
    aff = sg.embed_affine_symmetry(e1, 2.0)
    g = sym.GroupElement(e1, aff, sym.HeisElement.make(np.zeros(4), 0.0))
    img = sym.act_Nbar(g, qk)
    assert img.r == pytest.approx(8.0)
    assert img.b[0] == pytest.approx(0.3 / 4.0)
    assert img.t[0] == pytest.approx(1.2 / 4.0)
    assert np.allclose(img.p, np.linalg.solve(aff.S.T, qk.p))
    assert img.s == pytest.approx(qk.s)
    # Heisenberg elements fix the base point
    el = sym.GroupElement(e1, sg.embed_affine_symmetry(e1, 1.0),
                          sym.HeisElement.make(rng.uniform(-1, 1, 4), 1.1))
    img = sym.act_Nbar(el, qk)
    assert img.r == pytest.approx(qk.r)
    assert np.allclose(img.b, qk.b) and np.allclose(img.t, qk.t)
    # identity
    ident = sym.identity_element(e1)
    img = sym.act_Nbar(ident, qk)
    assert np.max(np.abs(np.asarray(img.chart()) - np.asarray(qk.chart()))) < 1e-14


def test_isometry_report(e1, rng):
    c = 0.3
    pts = [sym.random_qk_point(e1, c, rng) for _ in range(5)]
    ident = sym.identity_element(e1)
    rep = sym.isometry_report([ident], e1, c, pts)
    assert rep.max_residual < 1e-13
    els = [sym.random_group_element(e1, rng) for _ in range(5)]
    rep = sym.isometry_report(els, e1, c, pts)
    assert rep.passed and rep.max_residual < 1e-8
    # harness sensitivity: corrupt the representation matrix
    bad_aff = dataclasses.replace(els[0].aff,
                                  S=els[0].aff.S + 1e-3 * rng.standard_normal((4, 4)))
    bad = sym.GroupElement(e1, bad_aff, els[0].heis)
    rep = sym.isometry_report([bad], e1, c, pts[:3])
    assert rep.max_residual > 1e-4


def test_isometry_e2(e2, rng):
    c = 0.3
    pts = [sym.random_qk_point(e2, c, rng) for _ in range(3)]
    els = [sym.random_group_element(e2, rng) for _ in range(3)]
    rep = sym.isometry_report(els, e2, c, pts)
    assert rep.passed, rep.max_residual


def test_effectiveness_modes(e1, rng):
    c = 0.3
    eff = sym.effectiveness_check(e1, c, 10, "circle", rng)
    assert eff["passed"]
    assert eff["full_turn_move"] < 1e-9       # tau = 2 pi acts trivially
    assert eff["half_turn_move"] > 1.0        # tau = pi moves s by pi
    eff = sym.effectiveness_check(e1, c, 10, "cover", rng)
    assert eff["passed"]
    assert eff["full_turn_move"] > 1.0        # nontrivial on the cover


def test_mode_mismatch_rejected(e1, rng):
    qk = sym.random_qk_point(e1, 0.0, rng, mode="circle")
    g = sym.random_group_element(e1, rng, mode="cover")
    with pytest.raises(DomainError):
        sym.act_Nbar(g, qk)
    g2 = sym.random_group_element(e1, rng, mode="circle")
    with pytest.raises(DomainError):
        sym.compose(g, g2)


def test_induced_killing_fields(e1, rng):
    c = 0.3
    qk = sym.random_qk_point(e1, c, rng)
    wq = qk.chart()
    gfield = tq.qk_metric_field(e1, c)
    G = jets.values(gfield(list(wq))).astype(float)
    gens = [("aff", sg.affine_generator(e1, dlam=1.0)),
            ("aff", sg.affine_generator(e1, dv=[1.0])),
            ("fiber", np.eye(4)[0]), ("fiber", np.eye(4)[2]),
            ("central",)]
    for gen in gens:
        f = sym.induced_killing_field(e1, gen, c)
        L = tensorlab.lie_derivative(f, gfield, wq).components
        assert np.max(np.abs(L)) / np.max(np.abs(G)) < 1e-7
    # central generator induces the twist circle field d/ds
    fz = sym.induced_killing_field(e1, ("central",), c)
    vz = jets.values(np.asarray(fz(list(wq)), dtype=object)).astype(float)
    assert np.allclose(vz, np.eye(8)[-1])
    # zero generators induce the zero field
    f0 = sym.induced_killing_field(e1, ("fiber", np.zeros(4)), c)
    assert np.max(np.abs(jets.values(np.asarray(f0(list(wq)), dtype=object)
                                     ).astype(float))) == 0.0
    fa0 = sym.induced_killing_field(e1, ("aff", np.zeros((4, 4))), c)
    assert np.max(np.abs(jets.values(np.asarray(fa0(list(wq)), dtype=object)
                                     ).astype(float))) < 1e-13


def test_induced_field_matches_flow_derivative(e1, rng):
    c = 0.3
    qk = sym.random_qk_point(e1, c, rng)
    wq = np.asarray(qk.chart())
    f = sym.induced_killing_field(e1, ("aff", sg.affine_generator(e1, dlam=1.0)), c)
    ana = jets.values(np.asarray(f(list(wq)), dtype=object)).astype(float)
    eps = 1e-5
    g_eps = sym.GroupElement(e1, sg.embed_affine_symmetry(e1, np.exp(eps)),
                             sym.HeisElement.make(np.zeros(4), 0.0))
    moved = np.asarray(sym.act_Nbar(g_eps, qk).chart())
    fd = (moved - wq) / eps
    assert np.max(np.abs(fd - ana)) < 50 * eps
    # a fiber generator: flow is an exact translation plus central shift
    v = np.eye(4)[1]
    fv = sym.induced_killing_field(e1, ("fiber", v), c)
    anav = jets.values(np.asarray(fv(list(wq)), dtype=object)).astype(float)
    el = sym.GroupElement(e1, sg.embed_affine_symmetry(e1, 1.0),
                          sym.HeisElement.make(eps * v, 0.0))
    moved = np.asarray(sym.act_Nbar(el, qk).chart())
    fd = (moved - wq) / eps
    assert np.max(np.abs(fd - anav)) < 50 * eps


def test_bracket_transfer(e1, rng):
    c = 0.3
    qk = sym.random_qk_point(e1, c, rng)
    wq = qk.chart()
    Ominv = e1.omega_flat_inv()
    for (i, j) in ((0, 2), (1, 3), (0, 1)):
        vi, vj = np.eye(4)[i], np.eye(4)[j]
        fi = sym.induced_killing_field(e1, ("fiber", vi), c)
        fj = sym.induced_killing_field(e1, ("fiber", vj), c)
        br = tensorlab.vector_bracket(fi, fj, wq)
        expected = np.zeros(8)
        expected[-1] = float(vi @ Ominv @ vj)
        assert np.max(np.abs(br - expected)) < 1e-7
    C = sg.affine_generator(e1, dlam=1.0)
    fY = sym.induced_killing_field(e1, ("aff", C), c)
    v0 = np.eye(4)[0]
    fv = sym.induced_killing_field(e1, ("fiber", v0), c)
    br = tensorlab.vector_bracket(fY, fv, wq)
    fCv = sym.induced_killing_field(e1, ("fiber", C.T @ v0), c)
    expected = jets.values(np.asarray(fCv(list(wq)), dtype=object)).astype(float)
    assert np.max(np.abs(br - expected)) < 1e-7
    fz = sym.induced_killing_field(e1, ("central",), c)
    assert np.max(np.abs(tensorlab.vector_bracket(fY, fz, wq))) < 1e-7


def test_pullback_of_metric_under_translation(e1, rng):
    # Heisenberg translation acting on the deformed space pulls the metric
    # back to itself (checked through the generic pullback kernel)
    c = 0.3
    qk = sym.random_qk_point(e1, c, rng)
    el = sym.GroupElement(e1, sg.embed_affine_symmetry(e1, 1.0),
                          sym.HeisElement.make(rng.uniform(-0.5, 0.5, 4), 0.4))
    gfield = tq.qk_metric_field(e1, c)

    def phi(w):
        return np.asarray(sym.act_nbar_chart(el, list(w)), dtype=object)

    def metric_at(y):
        return jets.values(gfield(list(y))).astype(float)

    pulled = tensorlab.pullback(phi, metric_at, list(qk.chart()))
    G_src = metric_at(qk.chart())
    assert np.max(np.abs(pulled.components - G_src)) / np.max(np.abs(G_src)) < 1e-11


def test_phi_preservation_is_enforced(e1, rng):
    # a matrix with complex first row would move points off phi = 0;
    # the builtin generators never do, so act_Nbar must keep phi = 0 exactly
    qk = sym.random_qk_point(e1, 0.3, rng)
    for _ in range(10):
        g = sym.random_group_element(e1, rng)
        img = sym.act_Nbar(g, qk)
        assert img.r > 0
