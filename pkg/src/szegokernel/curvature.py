"""Curvature of the induced metric on the projectivized boundary.

On the chart x_0 != 0 with affine coordinates z = (x_1/x_0, ..., x_n/x_0)
the metric form has components

    Theta_ij = (2/l) (rho H_ij - rho_i rho_jbar) / rho^2

evaluated at (1, z), with H the complex Hessian of rho and rho_i the
holomorphic gradient.  Its determinant has two equivalent contractions,
kept separate on purpose so they can cross-check each other:

  * a bordered form det A * (1 - v A^{-1} v*) in the minor A = rho * H
    over x_1..x_n with border v = d rho/d x_0, and
  * a full-Hessian form (2/l)^{n+2} (|x_0|^2/rho)^{n+1} det H, which is
    invariant under x -> c x and needs no chart at all.
"""

from __future__ import annotations

import numpy as np

from .domains import GeometryError, ReinhardtDomain, complex_gradient, complex_hessian

__all__ = [
	"curvature_matrix",
	"det_curvature_affine",
	"det_curvature_x",
	"positivity_check",
]

_COND_LIMIT = 1e12


def _lift(z) -> np.ndarray:
	z = np.atleast_1d(np.asarray(z, dtype=complex))
	return np.concatenate([[1.0 + 0.0j], z])


def curvature_matrix(domain: ReinhardtDomain, z) -> np.ndarray:
	"""Metric components Theta_ij at the chart point (1, z), i,j = 1..n."""
	x = _lift(z)
	m = domain.moduli(x)
	rho = domain.rho_at(m)
	if rho <= 0.0:
		raise GeometryError("curvature needs rho > 0")
	g = complex_gradient(domain, x)  # d rho / d conj(x_i)
	H = complex_hessian(domain, x).full
	grad_holo = np.conj(g)
	scale = 2.0 / float(domain.order)
	block = H[1:, 1:]
	outer = np.outer(grad_holo[1:], g[1:])
	return scale * (rho * block - outer) / rho ** 2


def det_curvature_affine(domain: ReinhardtDomain, z) -> float:
	"""det Theta at (1, z) through the bordered minor.

	Rejects the computation when the minor is too ill-conditioned to
	invert reliably instead of returning noise.
	"""
	x = _lift(z)
	m = domain.moduli(x)
	rho = domain.rho_at(m)
	if rho <= 0.0:
		raise GeometryError("curvature needs rho > 0")
	H = complex_hessian(domain, x).full
	A = rho * H[1:, 1:]
	cond = np.linalg.cond(A)
	if not np.isfinite(cond) or cond > _COND_LIMIT:
		raise GeometryError(
			f"curvature minor condition number {cond:.3e} exceeds {_COND_LIMIT:.0e}"
		)
	# Theta = c (A - u u*) with c = 2/(l rho^2) and u the holomorphic
	# gradient over x_1..x_n, so det Theta = c^n det(A) (1 - u* A^{-1} u).
	u = np.conj(complex_gradient(domain, x))[1:]
	scale = (2.0 / (float(domain.order) * rho ** 2)) ** domain.n
	det_a = np.linalg.det(A)
	corr = 1.0 - (np.conj(u) @ np.linalg.solve(A, u)).real
	return float(scale * det_a.real * corr)


def det_curvature_x(domain: ReinhardtDomain, x) -> float:
	"""det Theta computed from the full Hessian at any lift x of the chart
	point; invariant under complex rescaling of x."""
	z = np.asarray(x, dtype=complex)
	if z[0] == 0:
		raise GeometryError("the chart x_0 != 0 is required")
	m = domain.moduli(z)
	rho = domain.rho_at(m)
	if rho <= 0.0:
		raise GeometryError("curvature needs rho > 0")
	H = complex_hessian(domain, z).full
	det_h = np.linalg.det(H)
	if abs(det_h.imag) > 1e-8 * max(abs(det_h.real), 1e-300):
		raise GeometryError(f"Hessian determinant not real: {det_h!r}")
	n = domain.n
	scale = (2.0 / float(domain.order)) ** (n + 2)
	return float(scale * (m[0] ** 2 / rho) ** (n + 1) * det_h.real)


def positivity_check(domain: ReinhardtDomain, chart_points) -> tuple:
	"""Smallest eigenvalue of Theta over the given chart points.

	Returns (all_positive, min_eigenvalue).
	"""
	min_eig = np.inf
	for z in chart_points:
		theta = curvature_matrix(domain, z)
		eigs = np.linalg.eigvalsh(0.5 * (theta + theta.conj().T))
		min_eig = min(min_eig, float(eigs[0]))
	return bool(min_eig > 0.0), min_eig
