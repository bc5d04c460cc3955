import numpy as np
import pytest

from chernlab import functionals as fn
from chernlab.functionals import _Objective, _retract_a, _retract_u

from conftest import random_unitary, samples, tensors_at

FS0 = tensors_at("fubini_study3", [0, 0, 0]).curvature


def test_hsc_flat():
    R = tensors_at("flat3", [0.2, 0, 0]).curvature
    assert fn.hsc(R, [1, 2j, 0]) == 0


@pytest.mark.parametrize("X", [[1, 0, 0], np.ones(3) / np.sqrt(3), [0.3, -1j, 2]])
def test_hsc_fubini_study_origin(X):
    assert fn.hsc(FS0, X) == pytest.approx(2, abs=1e-12)


def test_hsc_constant_on_fubini_study(rng):
    for z in samples("fubini_study3", 5):
        R = tensors_at("fubini_study3", z).curvature
        for _ in range(4):
            X = rng.normal(size=3) + 1j * rng.normal(size=3)
            assert fn.hsc(R, X) == pytest.approx(2, abs=1e-6)


def test_hsc_zero_vector():
    with pytest.raises(ValueError):
        fn.hsc(FS0, [0, 0, 0])


def test_rbc_values():
    assert fn.rbc(FS0, [1, 0, 0]) == pytest.approx(2)
    assert fn.rbc(FS0, [1, 1, 1]) == pytest.approx(4)
    assert fn.rbc(FS0, [2, 2, 2]) == pytest.approx(4)
    assert fn.rbc(tensors_at("flat3", [0, 0, 0]).curvature, [0.1, 0.5, 1]) == 0


@pytest.mark.parametrize("a", [[-1, 1, 1], [0, 0, 0]])
def test_rbc_bad_weights(a):
    with pytest.raises(ValueError):
        fn.rbc(FS0, a)


def test_rbc_at_basis_vector_is_hsc():
    R = tensors_at("fubini_study3", samples("fubini_study3", 1)[0]).curvature
    for i in range(3):
        e = np.eye(3)[i]
        assert fn.rbc(R, e) == pytest.approx(fn.hsc(R, e), abs=1e-12)


@pytest.mark.parametrize("name", ["flat3", "fubini_study3", "iwasawa", "hopf3"])
def test_bisectional_matrix_is_real(name):
    for z in samples(name, 5):
        q = np.einsum("iijj->ij", tensors_at(name, z).curvature.R)
        assert np.max(np.abs(q.imag)) <= 1e-10


def test_rotate_matches_frame_change(rng):
    pt = tensors_at("hopf3", samples("hopf3", 1)[0])
    u = random_unitary(rng)
    assert np.allclose(fn.rotate(pt.curvature, u), pt.with_frame(pt.frame.rotated(u)).curvature.R, atol=1e-12)


# extremes


def test_extremes_flat():
    sp = fn.rbc_extremes(tensors_at("flat3", [0, 0, 0]).curvature)
    assert (sp.min_value, sp.max_value) == (0, 0)
    assert sp.sign() == "zero"


def test_extremes_fubini_study_origin():
    sp = fn.rbc_extremes(FS0)
    assert sp.min_value == pytest.approx(2, abs=1e-3)
    assert sp.max_value == pytest.approx(4, abs=1e-3)
    assert sp.converged
    assert sp.sign() == "positive"
    for value, (u, a) in ((sp.min_value, sp.argmin), (sp.max_value, sp.argmax)):
        assert fn.rbc(fn.rotate(FS0, u), a) == pytest.approx(value, abs=1e-12)


def test_extremes_iwasawa():
    sp = fn.rbc_extremes(tensors_at("iwasawa", samples("iwasawa", 1)[0]).curvature)
    assert abs(sp.min_value) <= 1e-6 and abs(sp.max_value) <= 1e-6


def test_extremes_bracket_hsc(rng):
    R = tensors_at("fubini_study3", samples("fubini_study3", 1, seed=3)[0]).curvature
    sp = fn.rbc_extremes(R)
    for _ in range(20):
        X = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert sp.min_value - 1e-6 <= fn.hsc(R, X) <= sp.max_value + 1e-6


def test_extremes_invariant_under_base_rotation(rng):
    R = tensors_at("hopf3", samples("hopf3", 1)[0]).curvature.R
    a = fn.rbc_extremes(R)
    b = fn.rbc_extremes(fn.rotate(R, random_unitary(rng)), seed=5)
    assert a.min_value == pytest.approx(b.min_value, abs=1e-6)
    assert a.max_value == pytest.approx(b.max_value, abs=1e-6)


def test_extremes_bound_by_components():
    R = tensors_at("hopf3", samples("hopf3", 1)[0]).curvature.R
    sp = fn.rbc_extremes(R, restarts=4)
    bound = 9 * np.max(np.abs(R))
    assert -bound <= sp.min_value <= sp.max_value <= bound


@pytest.mark.parametrize(
    "lo, hi, label",
    [(1, 2, "positive"), (-2, -1, "negative"), (0, 1, "nonnegative"), (-1, 0, "nonpositive"), (-1, 1, "indefinite")],
)
def test_sign_verdicts(lo, hi, label):
    sp = fn.BisectionalSpectrum(lo, hi, (None, None), (None, None), 1, True)
    assert sp.sign() == label


def test_gradient_matches_directional_derivative(rng):
    R = tensors_at("hopf3", samples("hopf3", 1)[0]).curvature.R
    obj = _Objective(R, 1.0)
    u = random_unitary(rng)[None]
    a = np.abs(rng.normal(size=(1, 3)))
    a /= np.linalg.norm(a)
    f0, q = obj.value(u, a)
    g_u, g_a = obj.gradient(u, a, q)
    # skew-Hermitian direction and a tangent direction on the sphere
    h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    xi = 0.5 * (h - h.conj().T)
    da = rng.normal(size=3)
    da -= (da @ a[0]) * a[0]
    predicted = np.sum((np.conj(g_u[0]) * xi).real) + g_a[0] @ da
    t = 1e-6
    plus = obj.value(_retract_u(u, t * xi[None]), _retract_a(a + t * da))[0]
    minus = obj.value(_retract_u(u, -t * xi[None]), _retract_a(a - t * da))[0]
    assert (plus - minus)[0] / (2 * t) == pytest.approx(predicted, rel=1e-5)


# Ricci, eta, f


def test_ricci_flat():
    R = tensors_at("flat3", [0, 0, 0]).curvature
    for kind in (1, 2, 3):
        assert not np.any(fn.ricci(R, kind))


def test_ricci_fubini_study_origin():
    for kind in (1, 2, 3):
        assert np.allclose(fn.ricci(FS0, kind), 4 * np.eye(3))


def test_ricci_iwasawa():
    for z in samples("iwasawa", 5):
        R = tensors_at("iwasawa", z).curvature
        for kind in (1, 2, 3):
            assert np.max(np.abs(fn.ricci(R, kind))) <= 1e-7


def test_ricci_kind_checked():
    with pytest.raises(ValueError):
        fn.ricci(FS0, 4)


def test_eta_flat_and_iwasawa():
    assert not np.any(fn.gauduchon_eta(tensors_at("flat3", [0, 0, 0]).torsion))
    for z in samples("iwasawa", 20):
        T = tensors_at("iwasawa", z).torsion
        assert np.max(np.abs(fn.gauduchon_eta(T))) <= 1e-9
        assert fn.is_balanced(T)


def test_eta_hopf_not_balanced():
    T = tensors_at("hopf3", [1, 0, 0]).torsion
    assert np.max(np.abs(fn.gauduchon_eta(T))) >= 0.1
    assert not fn.is_balanced(T)


def test_torsion_norm():
    assert fn.torsion_norm(tensors_at("flat3", [0, 0, 0]).torsion) == 0
    for z in samples("iwasawa", 20):
        assert fn.torsion_norm(tensors_at("iwasawa", z).torsion) == pytest.approx(2, abs=1e-12)


def test_accepts_bare_arrays():
    T = np.zeros((3, 3, 3))
    T[2, 0, 1], T[2, 1, 0] = -1, 1
    assert fn.torsion_norm(T) == 2
    assert not np.any(fn.gauduchon_eta(T))
