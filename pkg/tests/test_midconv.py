from fractions import Fraction as F

import numpy as np
import pytest

from fuchsmono.fuchsian import ThetaParams, build_system
from fuchsmono.midconv import (convolution_matrices, kernel_spaces, middle_convolution, okamoto_s2,
                               s2_system, s_matrix, s_matrix_reduction, u_frame_det)
from fuchsmono.errors import ParameterError

from test_fuchsian import rand_frac, random_system


def rel_dev(red, target):
    want = target.numeric().arrays()
    scale = max(1.0, max(np.abs(a).max() for a in want))
    return max(np.abs(a - b).max() for a, b in zip(red, want)) / scale


@pytest.fixture
def system():
    return build_system(ThetaParams(F(1, 3), F(-1, 2), F(2, 5), F(3, 7)), F(2, 3), F(-5, 4), F(3, 2), F(-2))


def test_block_pattern():
    A = [np.arange(4).reshape(2, 2) + 1j * i for i in range(3)]
    ct = convolution_matrices(*A, 0.7)
    for i, B in enumerate(ct.matrices):
        for r in range(3):
            blk = B[2 * r:2 * r + 2]
            if r != i:
                assert not blk.any()
        for j in range(3):
            want = A[j] + (0.7 * np.eye(2) if j == i else 0)
            assert np.allclose(B[2 * i:2 * i + 2, 2 * j:2 * j + 2], want)


def test_nu_zero_is_plain_embedding():
    A = [np.random.default_rng(i).normal(size=(2, 2)) for i in range(3)]
    ct = convolution_matrices(*A, 0)
    row = np.hstack(A)
    for i, B in enumerate(ct.matrices):
        assert np.allclose(B[2 * i:2 * i + 2], row)
        assert np.linalg.matrix_rank(B) <= 2


def test_kernel_generators(system):
    s = system.numeric()
    sp = kernel_spaces(system, s.params.kappa1)
    assert np.allclose(sp.K[0], [1, 0, 1, 0, 1, 0])
    ct = convolution_matrices(*s.arrays(), s.params.kappa1)
    for B in ct.matrices:
        assert np.abs(B @ sp.K[0]).max() < 1e-12
    for i, gens in enumerate(sp.L):
        for v in gens:
            assert np.abs(s.arrays()[i] @ v[2 * i:2 * i + 2]).max() < 1e-12


def test_reduced_tuple_equals_s2_image(system):
    red, rec = middle_convolution(system, complex(system.params.kappa1))
    assert rec.dim_KL == 4
    assert rel_dev(red, s2_system(system)) < 1e-9


def test_reduced_residue_sum(system):
    red, _ = middle_convolution(system, complex(system.params.kappa1))
    p2, _, _ = okamoto_s2(system.params, system.lam, system.mu)
    Binf = -(red[0] + red[1] + red[2])
    assert np.allclose(Binf, np.diag([complex(p2.kappa1), complex(p2.kappa2)]), atol=1e-10)


def test_fifty_random_draws(rng):
    worst = 0.0
    for _ in range(50):
        s = random_system(rng)
        red, _ = middle_convolution(s, complex(s.params.kappa1))
        worst = max(worst, rel_dev(red, s2_system(s)))
    assert worst < 1e-9


def test_s_matrix_route(system):
    blocks, conj = s_matrix_reduction(system)
    assert rel_dev(blocks, s2_system(system)) < 1e-9
    # last four columns of S span the invariant K + L
    for C in conj:
        assert np.abs(C[:2, 2:]).max() < 1e-9 * max(1, np.abs(C).max())


def test_s_matrix_determinant(system):
    S = s_matrix(system)
    assert abs(np.linalg.det(S) - u_frame_det(system)) < 1e-10 * abs(u_frame_det(system))


def test_quotient_and_s_routes_agree(system):
    red, _ = middle_convolution(system, complex(system.params.kappa1))
    blocks, _ = s_matrix_reduction(system)
    assert max(np.abs(a - b).max() for a, b in zip(red, blocks)) < 1e-9


def test_s2_on_picard_parameters():
    p2, lam2, mu2 = okamoto_s2(ThetaParams(0, 0, 0, 1), F(1, 3), F(2))
    assert p2.as_tuple() == (F(1, 2), F(1, 2), F(1, 2), F(1, 2))
    assert lam2 == F(1, 3) + F(1, 4) and mu2 == 2


def test_s2_involution_exact(rng):
    for _ in range(50):
        th = ThetaParams(*(rand_frac(rng, nonzero=False) for _ in range(4)))
        lam, mu = rand_frac(rng), rand_frac(rng)
        p2, l2, m2 = okamoto_s2(th, lam, mu)
        p3, l3, m3 = okamoto_s2(p2, l2, m2)
        assert p3 == th and l3 == lam and m3 == mu


def test_s2_kappa1_zero_fixes():
    th = ThetaParams(F(1), F(2), F(-1), F(2))        # kappa1 = 0
    p2, l2, m2 = okamoto_s2(th, F(3, 2), F(5))
    assert th.kappa1 == 0
    assert (p2.theta0, p2.theta1, p2.thetat) == (th.theta0, th.theta1, th.thetat)
    assert l2 == F(3, 2)


def test_s2_mu_zero():
    with pytest.raises(ParameterError):
        okamoto_s2(ThetaParams(0, 0, 0, 1), 1, 0)
