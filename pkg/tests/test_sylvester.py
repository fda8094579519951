import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cascadecomp.errors import (
    ContourError,
    IllConditionedSeparationWarning,
    SpectrumSeparationError,
)
from cascadecomp.matops import eig
from cascadecomp.sylvester import (
    Contour,
    SylvesterProblem,
    default_contour,
    residual,
    solve_contour,
    solve_direct,
)

from conftest import random_diagonalizable


def random_problem(rng, n, m):
    a1, _ = random_diagonalizable(rng, n, 1.0, 3.0)
    a2, _ = random_diagonalizable(rng, m, -3.0, -1.0)
    q = rng.uniform(-1.0, 1.0, (n, m))
    return SylvesterProblem(a1=a1, a2=a2, q=q)


class TestDirect:
    def test_scalar(self):
        p = SylvesterProblem(a1=[[1.0]], a2=[[-1.0]], q=[[2.0]])
        assert np.allclose(solve_direct(p), [[1.0]])

    def test_decoupled_rows(self):
        p = SylvesterProblem(
            a1=np.diag([1.0, 2.0]), a2=[[-3.0]], q=np.array([[4.0], [5.0]])
        )
        assert np.allclose(solve_direct(p), [[1.0], [1.0]])

    def test_random_residuals(self):
        rng = np.random.default_rng(31)
        for _ in range(15):
            p = random_problem(rng, 4, 3)
            s = solve_direct(p)
            scale = (np.linalg.norm(p.a1) + np.linalg.norm(p.a2)) * np.linalg.norm(s)
            assert residual(p, s) <= 1e-9 * scale

    def test_linearity_in_q(self):
        rng = np.random.default_rng(37)
        p = random_problem(rng, 4, 3)
        s1 = solve_direct(p)
        s2 = solve_direct(SylvesterProblem(a1=p.a1, a2=p.a2, q=2.0 * p.q))
        assert np.linalg.norm(s2 - 2.0 * s1) <= 1e-12 * max(np.linalg.norm(s2), 1.0)

    def test_spectrum_overlap_rejected(self):
        with pytest.raises(SpectrumSeparationError):
            SylvesterProblem(a1=np.diag([1.0, 2.0]), a2=[[1.0]], q=np.ones((2, 1)))

    def test_near_overlap_warns(self):
        p = SylvesterProblem(a1=[[1.0]], a2=[[1.0 - 1e-7]], q=[[1.0]])
        with pytest.warns(IllConditionedSeparationWarning):
            solve_direct(p)

    @given(
        a=st.floats(-3.0, 3.0, allow_nan=False),
        b=st.floats(-3.0, 3.0, allow_nan=False),
        q=st.floats(-5.0, 5.0, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_scalar_closed_form_hypothesis(self, a, b, q):
        assume(abs(a - b) > 1e-3)
        p = SylvesterProblem(a1=[[a]], a2=[[b]], q=[[q]])
        assert abs(solve_direct(p)[0, 0] - q / (a - b)) <= 1e-9 * max(
            abs(q / (a - b)), 1.0
        )


class TestContour:
    def test_scalar_circle(self):
        p = SylvesterProblem(a1=[[1.0]], a2=[[-1.0]], q=[[2.0]])
        s = solve_contour(p, Contour(center=1.0, radius=1.0))
        assert np.allclose(s, [[1.0]], atol=1e-10)

    def test_cross_method_agreement(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            p = random_problem(rng, 4, 3)
            s_direct = solve_direct(p)
            s_contour = solve_contour(p, default_contour(p))
            assert np.linalg.norm(s_contour - s_direct) <= 1e-8

    def test_contour_enclosing_both_rejected(self):
        p = SylvesterProblem(a1=[[1.0]], a2=[[-1.0]], q=[[2.0]])
        with pytest.raises(ContourError):
            solve_contour(p, Contour(center=0.0, radius=10.0))

    def test_contour_missing_a1_rejected(self):
        p = SylvesterProblem(a1=[[1.0]], a2=[[-1.0]], q=[[2.0]])
        with pytest.raises(ContourError):
            solve_contour(p, Contour(center=5.0, radius=1.0))

    def test_too_few_nodes_rejected(self):
        with pytest.raises(ContourError):
            Contour(center=0.0, radius=1.0, nodes=4)

    def test_default_contour_validates(self):
        rng = np.random.default_rng(43)
        p = random_problem(rng, 5, 4)
        c = default_contour(p)
        w1 = eig(p.a1)
        assert np.all(np.abs(w1 - c.center) <= c.radius - 1e-6)
        assert np.all(np.abs(eig(p.a2) - c.center) >= c.radius + 1e-6)


class TestResidual:
    def test_exact_solution(self):
        p = SylvesterProblem(a1=[[1.0]], a2=[[-1.0]], q=[[2.0]])
        assert residual(p, [[1.0]]) <= 1e-15

    def test_zero_candidate(self):
        rng = np.random.default_rng(47)
        p = random_problem(rng, 3, 3)
        assert abs(residual(p, np.zeros((3, 3))) - np.linalg.norm(p.q)) <= 1e-12

    def test_perturbation_linearity(self):
        rng = np.random.default_rng(53)
        p = random_problem(rng, 4, 3)
        s = solve_direct(p)
        e = rng.uniform(-1.0, 1.0, s.shape)
        want = np.linalg.norm(p.a1 @ e - e @ p.a2)
        assert abs(residual(p, s + e) - want) <= 1e-12 * max(want, 1.0)


class TestBlockSimilarity:
    def test_off_diagonal_vanishes(self):
        # the transform built from S block-diagonalizes [[A1, Q], [0, A2]]
        rng = np.random.default_rng(59)
        for _ in range(5):
            p = random_problem(rng, 4, 3)
            s = solve_direct(p)
            n, m = 4, 3
            block = np.block([[p.a1, p.q], [np.zeros((m, n)), p.a2]])
            t = np.block([[np.eye(n), s], [np.zeros((m, n)), np.eye(m)]])
            out = t @ block @ np.linalg.inv(t)
            assert np.linalg.norm(out[:n, n:]) <= 1e-9
            assert np.allclose(out[:n, :n], p.a1, atol=1e-9)
            assert np.allclose(out[n:, n:], p.a2, atol=1e-9)
