"""Circle bundle, twist tensors, and the deformed quaternionic Kahler metric."""

import numpy as np
import pytest

from qmaplab import cmap, jets, special_geometry as sg, tensorlab, twistqk as tq
from qmaplab.errors import DegenerateMetricError, DomainError


@pytest.fixture()
def qk1(e1, rng):
    return tq.QKPoint(e1, 1.0, [0.0], [1.0], rng.uniform(-1, 1, 4), 0.8)


@pytest.fixture()
def qk_random(e1, rng):
    from qmaplab.symmetry import random_qk_point
    return random_qk_point(e1, 1.0, rng)


def test_ppoint_modes(e1, rng):
    base = sg.CaskPoint.from_chart(e1, 1.0, 0.1, [0.0], [1.0])
    npt = cmap.NPoint(base, rng.uniform(-1, 1, 4))
    pp = tq.PPoint(npt, 7.0, "circle")
    assert 0.0 <= pp.s < 2 * np.pi
    pp2 = tq.PPoint(npt, 7.0, "cover")
    assert pp2.s == 7.0
    with pytest.raises(DomainError):
        tq.PPoint(npt, 0.0, "weird")


def test_eta_components(e1, qk1):
    pp = qk1.to_ppoint()
    et = tq.eta(e1, pp)
    assert et.components[-1] == 1.0          # eta(X_P) = 1
    # eta(Y) = mu_Y and eta(v) = mu_v / 2
    w = tq.p_chart(pp)
    wn = list(w[:-1])
    nf = cmap.n_fields(e1)
    C = sg.affine_generator(e1, dlam=1.0)
    Y = jets.values(np.asarray(nf["lift"](C)(jets.seed(wn)), dtype=object)).astype(float)
    muY = jets.value_of(nf["mu_lift"](C)(wn))
    assert float(et.components[:-1] @ Y) == pytest.approx(muY, rel=1e-12, abs=1e-12)
    v = np.array([0.7, -0.1, 0.4, 0.2])
    muv = jets.value_of(nf["mu_fiber"](v)(wn))
    vch = np.concatenate([np.zeros(4), v])
    assert float(et.components[:-1] @ vch) == pytest.approx(0.5 * muv, abs=1e-13)


def test_d_eta_equals_pullback_omega_H(e1, qk_random):
    pp = qk_random.to_ppoint()
    w = tq.p_chart(pp)

    def eta_field(wp):
        return tq.p_frame_data(e1, wp, 0.0, require_valid=False)["eta"]

    deta = tensorlab.exterior_derivative(eta_field, w).components
    ohch = jets.values(cmap.n_fields(e1)["omegaH"](jets.seed(list(w[:-1]))))
    ext = np.zeros((9, 9))
    ext[:8, :8] = ohch
    assert np.max(np.abs(deta - ext)) < 1e-10 * max(np.max(np.abs(ext)), 1)


def test_lift_ZP(e1, qk1):
    pp = qk1.to_ppoint()
    # at X = (1, i) with c = 0: eta(Z_P) = f_H = -4
    ZP = tq.lift_ZP(e1, pp, 0.0)
    et = tq.eta(e1, pp).components
    assert float(et @ ZP) == pytest.approx(-4.0, abs=1e-12)
    # the projection to N of Z_P is Z = -d/dphi; phi-slot carries -1
    assert ZP[1] == pytest.approx(-1.0)
    assert np.max(np.abs(ZP[2:-1])) < 1e-13 and ZP[0] == 0.0
    # L_{Z_P} eta = 0 via Cartan: iota d eta + d(eta(Z_P))
    w = tq.p_chart(pp)
    c = 0.3

    def eta_field(wp):
        return tq.p_frame_data(e1, wp, c, require_valid=False)["eta"]

    def etaZP(wp):
        pf = tq.p_frame_data(e1, wp, c, require_valid=False)
        return jets.mdot(pf["eta"], pf["ZP"])

    deta = tensorlab.exterior_derivative(eta_field, w).components
    detaZP = tensorlab.derive_scalar(etaZP, w).grad
    ZPv = jets.values(np.asarray(
        tq.p_frame_data(e1, list(w), c, require_valid=False)["ZP"],
        dtype=object)).astype(float)
    assert np.max(np.abs(ZPv @ deta + detaZP)) < 1e-9


def test_lift_hat_properties(e1, qk_random, rng):
    pp = qk_random.to_ppoint()
    w = tq.p_chart(pp)
    wn = list(w[:-1])
    nf = cmap.n_fields(e1)
    C = sg.affine_generator(e1, dlam=1.0)
    V = np.concatenate([np.asarray(nf["lift"](C)(wn), dtype=object),
                        np.zeros(1, dtype=object)])
    hat = tq.lift_hat(e1, V, nf["mu_lift"](C)(wn), list(w))
    assert abs(jets.value_of(hat[-1])) < 1e-12        # hat Y = Y
    v = rng.uniform(-1, 1, 4)
    Vv = np.concatenate([np.asarray(nf["fiber"](v)(wn), dtype=object),
                         np.zeros(1, dtype=object)])
    muv = nf["mu_fiber"](v)(wn)
    hatv = tq.lift_hat(e1, Vv, muv, list(w))
    assert jets.value_of(hatv[-1]) == pytest.approx(0.5 * jets.value_of(muv),
                                                    abs=1e-13)
    # [hat v, hat w] has only an s-component equal to omega_H(v, w)
    vv, ww = rng.uniform(-1, 1, 4), rng.uniform(-1, 1, 4)

    def hat_field(vec):
        def fieldfun(wp):
            wnp = wp[:-1]
            V = np.concatenate([np.asarray(nf["fiber"](vec)(wnp), dtype=object),
                                np.zeros(1, dtype=object)])
            return tq.lift_hat(e1, V, nf["mu_fiber"](vec)(wnp), wp)
        return fieldfun

    br = tensorlab.vector_bracket(hat_field(vv), hat_field(ww), list(w))
    expected = float(vv @ e1.omega_flat_inv() @ ww)
    assert np.max(np.abs(br[:-1])) < 1e-12
    assert br[-1] == pytest.approx(expected, abs=1e-12)
    # L_{hat V} eta = 0 for the fiber lift
    def eta_field(wp):
        return tq.p_frame_data(e1, wp, 0.0, require_valid=False)["eta"]

    def etaV(wp):
        pf = tq.p_frame_data(e1, wp, 0.0, require_valid=False)
        return jets.mdot(pf["eta"], np.asarray(hat_field(vv)(wp), dtype=object))

    deta = tensorlab.exterior_derivative(eta_field, list(w)).components
    hv = jets.values(np.asarray(hat_field(vv)(list(w)), dtype=object)).astype(float)
    detaV = tensorlab.derive_scalar(etaV, list(w)).grad
    assert np.max(np.abs(hv @ deta + detaV)) < 1e-9


def test_theta_and_gP(e1, qk_random):
    c = 0.3
    pp = qk_random.to_ppoint()
    thetas, gP, gtP = tq.theta_and_gP(e1, pp, c)
    assert gtP.check_symmetric(1e-11)
    # theta_0 is exact (d theta_0 = 0)
    w = tq.p_chart(pp)
    dth0 = tensorlab.exterior_derivative(
        lambda wp: tq.p_frame_data(e1, wp, c, require_valid=False)["thetas"][0],
        list(w)).components
    assert np.max(np.abs(dth0)) < 1e-11
    # theta_2, theta_3: no base-chart and no ds components
    for k in (2, 3):
        comp = thetas[k].components
        assert np.max(np.abs(comp[:4])) < 1e-13
        assert abs(comp[-1]) < 1e-13
        assert np.max(np.abs(comp[4:8])) > 1e-3
    # kernel and invariance of the deformation tensor
    pf = tq.p_frame_data(e1, jets.seed(list(w)), c)
    gt = jets.values(pf["gtildeP"]).astype(float)
    ZP = jets.values(pf["ZP"]).astype(float)
    assert np.max(np.abs(gt @ ZP)) / np.max(np.abs(gt)) < 1e-8

    def gt_field(wp):
        return tq.p_frame_data(e1, wp, c, require_valid=False)["gtildeP"]

    def ZP_field(wp):
        return tq.p_frame_data(e1, wp, c, require_valid=False)["ZP"]

    L = tensorlab.lie_derivative(ZP_field, gt_field, list(w)).components
    assert np.max(np.abs(L)) / np.max(np.abs(gt)) < 1e-8


def test_qk_metric_dimensions_and_positivity(e1, e2, rng):
    from qmaplab.symmetry import random_qk_point
    qs = tq.qk_metric(e1, random_qk_point(e1, 0.3, rng), 0.3)
    assert qs.components.shape == (8, 8)
    qk2 = random_qk_point(e2, 0.3, rng)
    qs2 = tq.qk_metric(e2, qk2, 0.3)
    assert qs2.components.shape == (16, 16)
    for model, count in ((e1, 25), (e2, 10)):
        for c in (0.0, 0.3):
            for _ in range(count):
                qk = random_qk_point(model, c, rng)
                G = tq.qk_metric(model, qk, c).components
                assert np.linalg.eigvalsh(G).min() > 0


def test_qk_metric_c_continuity(e1, qk_random):
    G0 = tq.qk_metric(e1, qk_random, 0.3).components
    deltas = []
    for dc in (1e-3, 1e-5):
        G1 = tq.qk_metric(e1, qk_random, 0.3 + dc).components
        deltas.append(np.max(np.abs(G1 - G0)))
    assert deltas[1] < 1e-1 * deltas[0]


def test_qk_metric_domain_error(e1, rng):
    # f = -4 r^2 h(t): shrink r until f_Z^c < 0 for large c
    qk = tq.QKPoint(e1, 0.2, [0.0], [1.0], rng.uniform(-1, 1, 4), 0.0)
    c_big = 2.0      # f_Z = 4 r^2 h - c/2 = 0.16 - 1.0 < 0
    assert not qk.is_valid(c_big)
    with pytest.raises(DomainError):
        tq.qk_metric(e1, qk, c_big)


def test_elementary_deformation(e1, qk_random, rng):
    c = 0.3
    npt = qk_random.to_ppoint().n_point
    gH = tq.elementary_deformation(e1, npt, c).components
    hk = cmap.hk_sample(e1, npt)
    rd = cmap.rotation_data(e1, npt, c)
    gZZ = float(rd.Z @ hk.gN @ rd.Z)
    # on the quaternionic span: scaling by f_H / f_Z^2
    assert float(rd.Z @ gH @ rd.Z) == pytest.approx(
        rd.fH / rd.fZ ** 2 * gZZ, rel=1e-10)
    # off the span: scaling by 1 / f_Z
    B = np.stack([rd.Z, hk.I1 @ rd.Z, hk.I2 @ rd.Z, hk.I3 @ rd.Z], axis=1)
    gram = B.T @ hk.gN @ B
    P = B @ np.linalg.solve(gram, B.T @ hk.gN)
    u = (np.eye(8) - P) @ rng.uniform(-1, 1, 8)
    assert float(u @ gH @ u) == pytest.approx(float(u @ hk.gN @ u) / rd.fZ,
                                              rel=1e-10)


def test_project_to_Nbar(e1, qk_random, rng):
    c = 0.3
    w = tq.insert_phi(list(qk_random.chart()), 0.0)
    pf = tq.p_frame_data(e1, list(w), c)
    ZP = jets.values(pf["ZP"]).astype(float)
    # projecting Z_P gives zero; tangent vectors are unchanged
    out = jets.values(np.asarray(tq.project_to_Nbar(e1, ZP, list(w), c),
                                 dtype=object)).astype(float)
    assert np.max(np.abs(out)) < 1e-12
    tang = rng.uniform(-1, 1, 9)
    tang[1] = 0.0
    keep = jets.values(np.asarray(tq.project_to_Nbar(e1, tang, list(w), c),
                                  dtype=object)).astype(float)
    assert np.allclose(keep, np.concatenate([[tang[0]], tang[2:]]))
    # projecting the elementary modification of hat V agrees with hat V
    nf = cmap.n_fields(e1)
    C = sg.affine_generator(e1, dlam=1.0)
    wn = list(w[:-1])
    V = np.concatenate([np.asarray(nf["lift"](C)(wn), dtype=object),
                        np.zeros(1, dtype=object)])
    muV = nf["mu_lift"](C)(wn)
    hat = np.asarray(tq.lift_hat(e1, V, muV, list(w)), dtype=object)
    fH = pf["fH"]
    # eta-horizontal lift of V_H = V - (mu_V / f_H) Z: subtract eta(V_H) X_P
    Z_ch = np.zeros(9, dtype=object)
    Z_ch[1] = -1.0
    VH = np.asarray(V, dtype=object) - (muV / fH) * Z_ch
    eta_v = pf["eta"]
    etaVH = jets.mdot(eta_v, VH)
    tilde_VH = VH.copy()
    tilde_VH[-1] = tilde_VH[-1] - etaVH
    p1 = jets.values(np.asarray(tq.project_to_Nbar(e1, tilde_VH, list(w), c),
                                dtype=object)).astype(float)
    p2 = jets.values(np.asarray(tq.project_to_Nbar(e1, hat, list(w), c),
                                dtype=object)).astype(float)
    assert np.max(np.abs(p1 - p2)) < 1e-11
