import math

import numpy as np
import pytest

from szegokernel.asymptotics import (
	a0_closed_form,
	a1_closed_form,
	closed_coefficients,
	fit_expansion,
	kernel_sequence,
	log_a0_extended,
	verify_expansion,
)
from szegokernel.domains import GeometryError, ReinhardtDomain
from szegokernel.measure import QuadratureError, QuadratureSpec

SPHERE = ReinhardtDomain(1, 2, "m0^2 + m1^2")
SPHERE2 = ReinhardtDomain(2, 2, "m0^2 + m1^2 + m2^2")
ELLIPSOID = ReinhardtDomain(1, 2, "m0^2 + 4*m1^2")
FERMAT = ReinhardtDomain(1, 4, "m0^4 + m1^4")
WEIGHTED = ReinhardtDomain(1, 2, "m0^2 + m1^2", weight="m1^2")

Q = QuadratureSpec(nodes_per_dim=48, refinement_levels=3, target_rel_tol=1e-10)


def test_sphere_coefficients():
	c = closed_coefficients(SPHERE, [0.6, 0.8])
	assert c.power == 1
	assert c.a0 == pytest.approx(1 / (2 * math.pi ** 2), rel=1e-10)
	assert c.a1 == pytest.approx(1 / (2 * math.pi ** 2), rel=1e-10)


def test_sphere_coefficients_dimension_two():
	x = [0.5, 0.5, math.sqrt(0.5)]
	c = closed_coefficients(SPHERE2, x)
	assert c.a0 == pytest.approx(1 / (2 * math.pi ** 3), rel=1e-8)
	assert c.a1 == pytest.approx(3 / (2 * math.pi ** 3), rel=1e-8)


def test_ellipsoid_coefficients():
	# exact values worked out by hand for rho = m0^2 + 4 m1^2 at (0.6, 0.4):
	# a0 = det H / (2 pi^2 sqrt(m0^2 + 16 m1^2)), trace term 2829/10658
	x = [0.6, 0.4]
	a0 = 10 / (math.pi ** 2 * math.sqrt(73))
	assert a0_closed_form(ELLIPSOID, x) == pytest.approx(a0, rel=1e-10)
	assert a1_closed_form(ELLIPSOID, x) == pytest.approx(
		a0 * 13487 / 10658, rel=1e-9
	)


def test_weighted_sphere_coefficients():
	# the weight e^{m1^2} scales a0 by e^{-u} and shifts the trace term
	# to 7/25 at (0.6, 0.8) while the metric stays round
	x = [0.6, 0.8]
	a0 = math.exp(-0.64) / (2 * math.pi ** 2)
	assert a0_closed_form(WEIGHTED, x) == pytest.approx(a0, rel=1e-10)
	assert a1_closed_form(WEIGHTED, x) == pytest.approx(a0 * 1.28, rel=1e-9)


def test_fermat_coefficients():
	# frozen from a 40-digit evaluation of the closed forms at m1 = 0.9:
	# a0 = m0^2 m1^2 / (pi^2 sqrt(m0^6 + m1^6)), scalar curvature 4
	m1 = 0.9
	m0 = (1 - m1 ** 4) ** 0.25
	x = [m0, m1]
	assert a0_closed_form(FERMAT, x) == pytest.approx(
		0.056210252395459752, rel=1e-10
	)
	assert a1_closed_form(FERMAT, x) == pytest.approx(
		-0.027462498237524672, rel=1e-9
	)


def test_log_a0_is_ray_invariant():
	rng = np.random.default_rng(5)
	for domain in (SPHERE, ELLIPSOID, FERMAT, WEIGHTED):
		m = rng.uniform(0.3, 1.5, size=domain.nvar)
		base = log_a0_extended(domain, m)
		for t in (0.25, 2.0, 7.5):
			assert log_a0_extended(domain, t * m) == pytest.approx(
				base, rel=1e-12
			)


def test_closed_forms_reject_bad_points():
	with pytest.raises(GeometryError):
		a0_closed_form(SPHERE, [0.3, 0.4])
	with pytest.raises(GeometryError):
		a1_closed_form(SPHERE, [1.0, 0.0])
	with pytest.raises(GeometryError):
		log_a0_extended(SPHERE, [0.5, 0.0])


def test_fit_recovers_exact_two_term_sequence():
	ks = np.arange(10, 61)
	values = 2.5 * ks + 0.7
	fit = fit_expansion(ks, values, 1)
	assert fit.a0 == pytest.approx(2.5, rel=1e-12)
	assert fit.a1 == pytest.approx(0.7, rel=1e-10)
	assert abs(fit.power - 1.0) < 1e-3
	assert fit.a0_spread < 1e-12


def test_fit_handles_higher_order_tail():
	# a k^{n-2} tail biases the pair estimator by c/(k k') on a0 and by
	# roughly 2 c / k on a1; assert at those scales, not tighter
	ks = np.arange(10, 81)
	values = 1.3 * ks ** 2 + 0.4 * ks - 2.0
	fit = fit_expansion(ks, values, 2)
	assert fit.a0 == pytest.approx(1.3, rel=5e-4)
	assert fit.a1 == pytest.approx(0.4, rel=0.15)
	assert abs(fit.power - 2.0) < 1e-2


def test_fit_rejects_bad_input():
	with pytest.raises(ValueError):
		fit_expansion([1, 2, 3], [1.0, 2.0, 3.0], 1)
	with pytest.raises(ValueError):
		fit_expansion([0, 1, 2, 3], [1.0, 2.0, 3.0, 4.0], 1)
	with pytest.raises(ValueError):
		fit_expansion([1, 2, 3, 4], [1.0, -2.0, 3.0, 4.0], 1)


def test_sphere_expansion_verifies():
	report = verify_expansion(SPHERE, [0.6, 0.8], 10, 60, Q)
	assert report.rel_a0 < 1e-6
	assert report.rel_a1 < 1e-4
	assert abs(report.fit.power - 1.0) < 0.01
	assert report.closed.a0 == pytest.approx(1 / (2 * math.pi ** 2), rel=1e-10)
	assert any("k^1" in w for w in report.warnings)


def test_kernel_sequence_deterministic_across_workers():
	_, ks1, v1 = kernel_sequence(SPHERE, [0.6, 0.8], 3, 8, Q, workers=1)
	_, ks2, v2 = kernel_sequence(SPHERE, [0.6, 0.8], 3, 8, Q, workers=2)
	assert ks1 == ks2
	assert v1 == v2


def test_kernel_sequence_rejects_starved_quadrature():
	starved = QuadratureSpec(
		nodes_per_dim=8, refinement_levels=1, target_rel_tol=1e-15
	)
	with pytest.raises(QuadratureError):
		kernel_sequence(ELLIPSOID, [0.6, 0.4], 2, 6, starved)
