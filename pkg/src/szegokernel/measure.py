"""Boundary measure, projective weight, and quadrature over both routes.

Torus invariance collapses every boundary integral to the moduli slice

    D = { r in R^n_+ : rho(0, r_1, ..., r_n) < 1 },

with the first modulus R_0 = R_0(r) solved from rho = 1.  Writing psi =
rho^{-1/l}, the induced surface measure becomes

    int_M F dmu_ind = (2 pi)^{n+1} int_D F(R_0, r) dens(R_0, r) r_1...r_n dr,
    dens = R_0 sqrt(sum_i (dpsi/dm_i)^2) / |dpsi/dm_0|,

where the common radial factor of the psi gradient cancels in the ratio,
so dens = R_0 sqrt(sum_i f_i^2) / f_0 in terms of the moduli gradient of
rho alone.  The same integral can be pushed to the chart of the
projectivized boundary: with y = (1, r) and the fiber weight

    h_E(y) = 2 pi e^{u} |y|^{2n+2} (psi^2/2)^n sqrt(sum_i (dpsi/dm_i)^2),

one has  int_M F dmu = (2 pi)^n int F(y psi(y)) h_E(y) fs(r) r_1...r_n dr
with fs the Fubini-Study volume density 2^n / (1 + |z|^2)^{n+1}.  The two
routes share no code path past this module, which is what makes their
agreement a meaningful check downstream.

All quadrature is iterated Gauss-Legendre with doubling refinement; node
grids are cached on the domain per (route, nodes, mapping).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .domains import GeometryError, ReinhardtDomain
from .expressions import evaluate

__all__ = [
	"QuadratureSpec",
	"QuadratureError",
	"IntegralEstimate",
	"WeightedGrid",
	"solve_boundary_radius",
	"induced_density",
	"hE_weight",
	"fs_volume_density",
	"integrate_boundary",
	"integrate_projective",
	"weighted_boundary_grid",
]

_BOUNDARY_TOL = 1e-13


class QuadratureError(RuntimeError):
	"""Raised when a quadrature or boundary solve does not converge; the
	last two estimates, when available, ride along in `estimates`."""

	def __init__(self, message: str, estimates=None):
		super().__init__(message)
		self.estimates = estimates


@dataclass(frozen=True)
class QuadratureSpec:
	"""Controls for all integrals: base nodes per dimension, the half-line
	mapping used on the chart route, how many node-doubling refinements may
	run, and the relative tolerance that stops them."""

	nodes_per_dim: int = 64
	mapping: str = "algebraic"
	refinement_levels: int = 3
	target_rel_tol: float = 1e-9

	def __post_init__(self):
		if self.nodes_per_dim < 8:
			raise ValueError("nodes_per_dim must be at least 8")
		if self.mapping not in ("algebraic", "tangent"):
			raise ValueError(f"unknown mapping {self.mapping!r}")
		if self.refinement_levels < 1:
			raise ValueError("refinement_levels must be at least 1")
		if not 0.0 < self.target_rel_tol < 1.0:
			raise ValueError("target_rel_tol must be in (0, 1)")


@dataclass
class IntegralEstimate:
	value: float
	rel_change: float
	levels_used: int
	converged: bool


@dataclass
class WeightedGrid:
	"""Boundary moduli log m, log quadrature weights, and the constant
	log prefactor, for either route.  A monomial integral is then

	    exp(prefactor) * sum exp(2 J . log_m + log_w).
	"""

	log_m: np.ndarray
	log_w: np.ndarray
	prefactor: float


@lru_cache(maxsize=64)
def _gl_unit(count: int):
	x, w = np.polynomial.legendre.leggauss(count)
	return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=64)
def _gl_halfline(count: int, mapping: str):
	t, w = _gl_unit(count)
	if mapping == "algebraic":
		r = t / (1.0 - t)
		jac = 1.0 / (1.0 - t) ** 2
	else:
		r = np.tan(0.5 * np.pi * t)
		jac = 0.5 * np.pi * (1.0 + r * r)
	return r, w * jac


def _solve_axis(domain: ReinhardtDomain, base: np.ndarray, axis: int) -> np.ndarray:
	"""Solve rho(base with slot `axis` set to t) = 1 for t > 0, columnwise.
	`base` must lie strictly inside the domain on that slot's zero set."""
	pts = np.array(base, dtype=float)
	count = pts.shape[1]

	def rho_of(t):
		pts[axis] = t
		return np.asarray(domain.rho_at(pts))

	hi = np.ones(count)
	for _ in range(200):
		low = rho_of(hi) < 1.0
		if not np.any(low):
			break
		hi[low] *= 2.0
	else:
		raise QuadratureError(
			f"domain slice unbounded along m{axis}: rho never reaches 1"
		)
	lo = np.zeros(count)
	t = 0.5 * hi
	fprime_expr = domain.rho_grad[axis]
	for _ in range(120):
		f = rho_of(t) - 1.0
		if float(np.max(np.abs(f))) <= _BOUNDARY_TOL:
			break
		lo = np.where(f < 0.0, t, lo)
		hi = np.where(f > 0.0, t, hi)
		fp = np.asarray(evaluate(fprime_expr, pts))
		with np.errstate(divide="ignore", invalid="ignore"):
			step = np.where(fp != 0.0, f / np.where(fp != 0.0, fp, 1.0), np.inf)
			candidate = t - step
		bad = ~np.isfinite(candidate) | (candidate <= lo) | (candidate >= hi)
		t = np.where(bad, 0.5 * (lo + hi), candidate)
	else:
		worst = float(np.max(np.abs(rho_of(t) - 1.0)))
		raise QuadratureError(
			f"boundary solve along m{axis} stalled at |rho - 1| = {worst:.3e}"
		)
	pts[axis] = t
	return t


def solve_boundary_radius(domain: ReinhardtDomain, r) -> float | np.ndarray:
	"""First modulus R_0(r) with (R_0, r) on the boundary; r of shape (n,)
	or (n, N)."""
	arr = np.asarray(r, dtype=float)
	single = arr.ndim == 1
	cols = arr.reshape(domain.n, -1)
	base = np.vstack([np.zeros(cols.shape[1]), cols])
	t = _solve_axis(domain, base, 0)
	return float(t[0]) if single else t.reshape(arr.shape[1:])


def induced_density(domain: ReinhardtDomain, m) -> float | np.ndarray:
	"""Surface density against dr of the induced measure on the moduli
	slice, at boundary moduli m = (R_0, r)."""
	arr = np.asarray(m, dtype=float)
	f = domain.grad_at(arr)
	f0 = f[0]
	if np.any(f0 <= 0.0):
		raise GeometryError("density needs drho/dm0 > 0 (monotone domain)")
	out = arr[0] * np.sqrt(np.sum(f * f, axis=0)) / f0
	return float(out) if arr.ndim == 1 else out


def _log_hE(domain: ReinhardtDomain, y) -> float | np.ndarray:
	arr = np.asarray(y, dtype=float)
	rho = np.asarray(domain.rho_at(arr))
	if np.any(rho <= 0.0):
		raise GeometryError("h_E needs rho > 0")
	inv_l = 1.0 / float(domain.order)
	log_rho = np.log(rho)
	log_psi = -inv_l * log_rho
	f = domain.grad_at(arr)
	# |grad psi| = (1/l) rho^{-1/l - 1} |grad rho|
	log_grad_psi = (
		-math.log(float(domain.order))
		+ (-inv_l - 1.0) * log_rho
		+ 0.5 * np.log(np.sum(f * f, axis=0))
	)
	tau = arr * np.exp(log_psi)
	u = np.asarray(domain.weight_at(tau))
	n = domain.n
	out = (
		math.log(2.0 * math.pi)
		+ u
		+ (n + 1) * np.log(np.sum(arr * arr, axis=0))
		+ n * (2.0 * log_psi - math.log(2.0))
		+ log_grad_psi
	)
	return out


def hE_weight(domain: ReinhardtDomain, y) -> float | np.ndarray:
	"""Fiber weight h_E at chart-lift moduli y (any point off the origin);
	homogeneous of degree 0."""
	out = np.exp(_log_hE(domain, y))
	return float(out) if np.asarray(y).ndim == 1 else out


def fs_volume_density(z) -> float | np.ndarray:
	"""Fubini-Study volume density on the chart, against the Lebesgue
	measure of the affine coordinates; z is complex or moduli, shape
	(n,) or (n, ...)."""
	arr = np.abs(np.asarray(z))
	n = arr.shape[0]
	s = np.sum(arr * arr, axis=0)
	out = 2.0 ** n / (1.0 + s) ** (n + 1)
	return float(out) if arr.ndim == 1 else out


# ---------------------------------------------------------------------------
# Node grids


def _boundary_grid(domain: ReinhardtDomain, nodes: int) -> WeightedGrid:
	key = ("bgrid", nodes)
	if key in domain.cache:
		return domain.cache[key]
	x, w = _gl_unit(nodes)
	# sample each bounded coordinate through a sine map: node spacing then
	# shrinks quadratically at the slice edge, which tames the inverse
	# fractional powers of R_0 the density picks up when the homogeneity
	# order exceeds 2
	s = np.sin(0.5 * np.pi * x)
	logj = np.log(0.5 * np.pi * np.cos(0.5 * np.pi * x))
	pts = np.zeros((domain.nvar, 1))
	logw = np.zeros(1)
	for axis in range(1, domain.nvar):
		limit = _solve_axis(domain, pts, axis)
		count = pts.shape[1]
		pts = np.repeat(pts, nodes, axis=1)
		logw = np.repeat(logw, nodes)
		r = (limit[:, None] * s[None, :]).ravel()
		pts[axis] = r
		logw = (
			logw
			+ np.tile(np.log(w) + logj, count)
			+ np.repeat(np.log(limit), nodes)
			+ np.log(r)
		)
	r0 = _solve_axis(domain, pts, 0)
	pts[0] = r0
	logw = (
		logw
		+ np.log(induced_density(domain, pts))
		+ np.asarray(domain.weight_at(pts))
	)
	grid = WeightedGrid(np.log(pts), logw, (domain.n + 1) * math.log(2.0 * math.pi))
	domain.cache[key] = grid
	return grid


def _projective_grid(domain: ReinhardtDomain, nodes: int, mapping: str) -> WeightedGrid:
	# polar coordinates on the chart orthant: a mapped radial leg and
	# Gauss-Legendre angles.  A per-axis product map would leave the
	# integrand discontinuous at the infinite corner (its limit there
	# depends on the approach direction), capping tensor quadrature at
	# algebraic order; blowing the corner up into angles restores smooth
	# integrands in every variable.
	key = ("pgrid", nodes, mapping)
	if key in domain.cache:
		return domain.cache[key]
	n = domain.n
	radius, wr = _gl_halfline(nodes, mapping)
	log_leg = [np.log(wr) + (n - 1) * np.log(radius)]
	legs = [radius]
	x, w = _gl_unit(nodes)
	phi = 0.5 * np.pi * x
	for i in range(n - 1):
		legs.append(phi)
		log_leg.append(np.log(0.5 * np.pi * w) + (n - 2 - i) * np.log(np.sin(phi)))
	mesh = np.meshgrid(*legs, indexing="ij")
	flat = [m.ravel() for m in mesh]
	logw = np.zeros((nodes,) * n)
	for i, lw in enumerate(log_leg):
		shape = [1] * n
		shape[i] = nodes
		logw = logw + lw.reshape(shape)
	logw = logw.ravel()
	big_r = flat[0]
	direction = np.ones((n, big_r.shape[0]))
	for i in range(n - 1):
		direction[i] *= np.cos(flat[i + 1])
		direction[i + 1 :] *= np.sin(flat[i + 1])
	r = big_r * direction
	logw = logw + np.sum(np.log(r), axis=0)
	y = np.vstack([np.ones(r.shape[1]), r])
	logw = logw + _log_hE(domain, y) + np.log(fs_volume_density(r))
	psi = np.asarray(domain.rho_at(y)) ** (-1.0 / float(domain.order))
	m = y * psi
	grid = WeightedGrid(np.log(m), logw, n * math.log(2.0 * math.pi))
	domain.cache[key] = grid
	return grid


def weighted_boundary_grid(
	domain: ReinhardtDomain,
	route: str,
	nodes: int,
	mapping: str = "algebraic",
) -> WeightedGrid:
	"""Quadrature grid in boundary moduli for the given route; exp(log_w)
	already carries the weight e^u, the measure density, and the moduli
	Jacobian, so only the integrand's own factor remains to be added."""
	if route == "boundary":
		return _boundary_grid(domain, nodes)
	if route == "projective":
		return _projective_grid(domain, nodes, mapping)
	raise ValueError(f"unknown route {route!r}")


def _refine(domain, q, builder, integrand, route_label):
	last = None
	value = None
	for level in range(q.refinement_levels + 1):
		grid = builder(q.nodes_per_dim * 2 ** level)
		vals = np.asarray(integrand(np.exp(grid.log_m)))
		total = math.exp(grid.prefactor) * float(np.sum(np.exp(grid.log_w) * vals))
		if value is not None:
			change = abs(total - value) / max(abs(total), 1e-300)
			if change <= q.target_rel_tol:
				return IntegralEstimate(total, change, level, True)
			last = value
		value = total
	raise QuadratureError(
		f"{route_label} integral did not converge to {q.target_rel_tol:.1e} "
		f"within {q.refinement_levels} refinements",
		estimates=(last, value),
	)


def integrate_boundary(
	domain: ReinhardtDomain, integrand, q: QuadratureSpec
) -> IntegralEstimate:
	"""Integrate a torus-invariant function of the boundary moduli against
	e^u dmu_ind over the whole boundary."""
	return _refine(
		domain,
		q,
		lambda nodes: _boundary_grid(domain, nodes),
		integrand,
		"boundary",
	)


def integrate_projective(
	domain: ReinhardtDomain, integrand, q: QuadratureSpec
) -> IntegralEstimate:
	"""Same integral pushed through the chart route: the integrand is again
	evaluated at boundary moduli (of the fiber point over each chart node)
	and weighted by h_E times the Fubini-Study volume."""
	return _refine(
		domain,
		q,
		lambda nodes: _projective_grid(domain, nodes, q.mapping),
		integrand,
		"projective",
	)
