import numpy as np
import pytest

from chernlab import identities
from chernlab.chern import (
    chern_connection,
    curvature,
    point_tensors,
    to_frame,
    torsion,
    unitary_frame_at,
)
from chernlab.dsl import metric_jet
from chernlab.errors import JetOrderError

from conftest import entry, random_unitary, samples, tensors_at

I3 = np.eye(3)
FS_R0 = np.einsum("ij,kl->ijkl", I3, I3) + np.einsum("il,kj->ijkl", I3, I3)


def jet(name, z):
    return metric_jet(entry(name).spec, z)


def _unit(k):
    v = [0, 0, 0]
    v[k] = 1
    return tuple(v)


def curvature_from_jet(j):
    """R_{i jbar k lbar} = -d_i dbar_j g_{k lbar} + d_i g_{k qbar} (g^-1)[q, a] dbar_j g_{a lbar}."""
    zero = (0, 0, 0)
    d = np.array([j.d(_unit(i), zero) for i in range(3)])
    db = np.array([j.d(zero, _unit(i)) for i in range(3)])
    ddb = np.array([[j.d(_unit(i), _unit(k)) for k in range(3)] for i in range(3)])
    second = -np.einsum("ijkl->ijkl", ddb)
    quad = np.einsum("ikq,qa,jal->ijkl", d, np.linalg.inv(j.g), db)
    return second + quad


# connection and torsion


def test_flat_everything_vanishes():
    pt = tensors_at("flat3", [0.3, 0.1j, -0.5])
    assert not np.any(pt.connection.gamma)
    assert not np.any(pt.connection.d_gamma)
    for name in ("T", "T_m", "T_bar", "T_bar_m", "T_m_bar", "T_bar_bar"):
        assert not np.any(getattr(pt.torsion, name)), name
    assert not np.any(pt.curvature.R)
    assert not np.any(pt.curvature.R_m)


def test_iwasawa_connection_at_origin():
    gamma = chern_connection(jet("iwasawa", [0, 0, 0])).gamma
    expected = np.zeros((3, 3, 3))
    expected[2, 0, 1] = -1
    assert np.allclose(gamma, expected, atol=1e-15)


def test_iwasawa_torsion_at_origin():
    T = torsion(chern_connection(jet("iwasawa", [0, 0, 0]))).T
    expected = np.zeros((3, 3, 3))
    expected[2, 0, 1] = -1
    expected[2, 1, 0] = 1
    assert np.allclose(T, expected, atol=1e-15)


def test_fubini_study_gamma_vanishes_at_origin():
    assert np.max(np.abs(chern_connection(jet("fubini_study3", [0, 0, 0])).gamma)) < 1e-15


@pytest.mark.parametrize("k", range(5))
def test_fubini_study_is_kahler(k):
    z = samples("fubini_study3", 5)[k]
    assert np.max(np.abs(tensors_at("fubini_study3", z).torsion.T)) <= 1e-10


def test_connection_against_finite_differences():
    z = samples("hopf3", 1)[0]
    exact = tensors_at("hopf3", z)
    approx = tensors_at("hopf3", z, fd_step=1e-4)
    assert np.max(np.abs(exact.connection.gamma - approx.connection.gamma)) < 1e-6
    assert np.max(np.abs(exact.curvature.R - approx.curvature.R)) < 1e-5


# curvature


def test_fubini_study_curvature_at_origin():
    R = curvature(jet("fubini_study3", [0, 0, 0])).R
    assert np.max(np.abs(R - FS_R0)) < 1e-14


@pytest.mark.parametrize("name", ["fubini_study3", "hopf3", "iwasawa"])
def test_curvature_matches_closed_form(name):
    for z in samples(name, 3, seed=5):
        j = jet(name, z)
        assert np.max(np.abs(curvature(j).R - curvature_from_jet(j))) < 1e-12


def test_iwasawa_is_chern_flat():
    for z in samples("iwasawa", 5):
        assert np.max(np.abs(curvature(jet("iwasawa", z)).R)) <= 1e-8


# covariant derivatives


def test_iwasawa_torsion_is_parallel():
    pt = tensors_at("iwasawa", [0, 0, 0])
    assert np.max(np.abs(pt.torsion_coord.T_bar)) == 0
    for z in samples("iwasawa", 3):
        pt = tensors_at("iwasawa", z)
        for name in ("T_m", "T_bar", "T_bar_m", "T_m_bar", "T_bar_bar"):
            assert np.max(np.abs(getattr(pt.torsion, name))) <= 1e-12, name


def test_hopf_torsion_derivative_nonzero():
    pt = tensors_at("hopf3", [1, 0, 0])
    assert np.max(np.abs(pt.torsion.T_bar)) > 0.1
    assert identities.residual_commutation("C1", pt).passed


def test_iwasawa_curvature_derivative():
    for z in samples("iwasawa", 3):
        assert np.max(np.abs(tensors_at("iwasawa", z).curvature.R_m)) <= 1e-7


def test_fubini_study_second_bianchi_at_origin():
    rep = identities.residual_bianchi("second", tensors_at("fubini_study3", [0, 0, 0]), "standard")
    assert rep.max_abs_residual <= 1e-8


def test_low_order_jet_rejected():
    j = metric_jet(entry("hopf3").spec, [1, 0, 0], order=2)
    conn = chern_connection(j)
    with pytest.raises(JetOrderError):
        point_tensors(j)
    assert conn.gamma.shape == (3, 3, 3)


# frames


def test_frame_of_identity():
    assert np.allclose(unitary_frame_at(np.eye(3)).e, np.eye(3))


def test_frame_is_lower_triangular_convention():
    e = unitary_frame_at(np.diag([4.0, 1.0, 1.0])).e
    assert np.allclose(e, np.diag([0.5, 1, 1]))


@pytest.mark.parametrize("name", ["iwasawa", "hopf3", "fubini_study3"])
def test_frame_is_unitary_and_lower_triangular(name):
    j = jet(name, [1, 0, 0] if name != "hopf3" else [1, 0.3j, -0.2])
    fr = unitary_frame_at(j)
    assert np.allclose(fr.e, np.tril(fr.e))
    assert np.all(np.diagonal(fr.e).real > 0)
    assert np.max(np.abs(fr.gram(j.g) - np.eye(3))) <= 1e-12


def test_to_frame_identity():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3, 3))
    assert np.array_equal(to_frame(A, "dbdb", np.eye(3)), A)


def test_constant_curvature_is_frame_invariant(rng):
    R = curvature(jet("fubini_study3", [0, 0, 0])).R
    u = random_unitary(rng)
    assert np.max(np.abs(to_frame(R, "dbdb", u) - FS_R0)) < 1e-13


def test_to_frame_signature_mismatch():
    with pytest.raises(ValueError):
        to_frame(np.zeros((3, 3)), "udd", np.eye(3))


# structural invariants


@pytest.mark.parametrize("name", ["flat3", "fubini_study3", "iwasawa", "hopf3"])
def test_first_bianchi_on_catalog(name):
    for z in samples(name, 20):
        assert identities.residual_bianchi("first", tensors_at(name, z)).max_abs_residual <= 1e-8


@pytest.mark.parametrize("name", ["fubini_study3", "hopf3"])
def test_symmetries(name):
    for z in samples(name, 4):
        pt = tensors_at(name, z)
        R, T = pt.curvature.R, pt.torsion.T
        assert np.max(np.abs(R - np.conj(R.transpose(1, 0, 3, 2)))) <= 1e-12
        assert np.max(np.abs(T + T.transpose(0, 2, 1))) <= 1e-12


def test_residuals_are_frame_covariant(rng):
    pt = tensors_at("hopf3", samples("hopf3", 1)[0])
    rotated = pt.with_frame(pt.frame.rotated(random_unitary(rng)))
    held = 0
    for a, b in zip(identities.run_suite(pt), identities.run_suite(rotated)):
        assert (a.identity, a.variant) == (b.identity, b.variant)
        assert a.passed == b.passed
        # max-abs of a nonzero residual is not a frame invariant; a vanishing one is
        if a.passed:
            held += 1
            assert abs(a.max_abs_residual - b.max_abs_residual) <= 1e-9
    assert held >= 5
