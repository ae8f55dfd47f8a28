import numpy as np
import pytest

from szegokernel.curvature import (
	curvature_matrix,
	det_curvature_affine,
	det_curvature_x,
	positivity_check,
)
from szegokernel.domains import ReinhardtDomain

SPHERE = ReinhardtDomain(1, 2, "m0^2 + m1^2")
ELLIPSOID = ReinhardtDomain(1, 2, "m0^2 + 4*m1^2")
FERMAT = ReinhardtDomain(1, 4, "m0^4 + m1^4")
QUARTIC3 = ReinhardtDomain(
	2, 4, "m0^4 + m1^4 + m2^4 + m0^2*m1^2 + m0^2*m2^2 + m1^2*m2^2"
)

ALL = (SPHERE, ELLIPSOID, FERMAT, QUARTIC3)


def random_chart_points(n, count, seed):
	rng = np.random.default_rng(seed)
	m = rng.uniform(0.2, 1.3, size=(count, n))
	phase = rng.uniform(0, 2 * np.pi, size=(count, n))
	return m * np.exp(1j * phase)


def test_sphere_curvature_is_fubini_study():
	for z in random_chart_points(1, 6, 21):
		s = abs(z[0]) ** 2
		theta = curvature_matrix(SPHERE, z)
		assert theta[0, 0] == pytest.approx(1.0 / (1.0 + s) ** 2, rel=1e-12)


def test_ellipsoid_curvature_closed_form():
	for z in random_chart_points(1, 6, 22):
		rho = 1.0 + 4.0 * abs(z[0]) ** 2
		assert curvature_matrix(ELLIPSOID, z)[0, 0] == pytest.approx(
			4.0 / rho ** 2, rel=1e-12
		)
		assert det_curvature_affine(ELLIPSOID, z) == pytest.approx(
			4.0 / rho ** 2, rel=1e-12
		)


def test_fermat_curvature_closed_form():
	for z in random_chart_points(1, 6, 23):
		s = abs(z[0]) ** 2
		expected = 2.0 * s / (1.0 + s * s) ** 2
		assert det_curvature_x(FERMAT, np.concatenate([[1.0], z])) == pytest.approx(
			expected, rel=1e-12
		)


def test_determinant_routes_agree():
	for domain, seed in ((ELLIPSOID, 31), (FERMAT, 32), (QUARTIC3, 33)):
		for z in random_chart_points(domain.n, 8, seed):
			via_minor = det_curvature_affine(domain, z)
			via_full = det_curvature_x(domain, np.concatenate([[1.0 + 0j], z]))
			via_matrix = float(
				np.linalg.det(curvature_matrix(domain, z)).real
			)
			assert via_minor == pytest.approx(via_full, rel=1e-10)
			assert via_matrix == pytest.approx(via_full, rel=1e-10)


def test_determinant_scale_invariance():
	rng = np.random.default_rng(34)
	for domain in (ELLIPSOID, QUARTIC3):
		for z in random_chart_points(domain.n, 6, 35):
			x = np.concatenate([[1.0 + 0j], z])
			base = det_curvature_x(domain, x)
			for _ in range(3):
				c = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
				assert det_curvature_x(domain, c * x) == pytest.approx(
					base, rel=1e-12
				)


def test_curvature_positive_on_admissible_domains():
	for domain, seed in ((SPHERE, 41), (ELLIPSOID, 42), (QUARTIC3, 43)):
		ok, min_eig = positivity_check(
			domain, random_chart_points(domain.n, 10, seed)
		)
		assert ok
		assert min_eig > 0.0
