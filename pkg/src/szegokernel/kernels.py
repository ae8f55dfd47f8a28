"""Monomial norms and partial kernel sums.

For the weight mu = e^u mu_ind on the boundary, the monomials x^J with
|J| = k are orthogonal by torus symmetry, so the degree-k partial kernel
on the diagonal is the explicit sum

    Pi_k(x) = sum_{|J| = k} |x^J|^2 / <x^J, x^J>.

Norms are quadratures of 2J-th moduli powers; everything is carried in
log space so large k stays well inside double range.  Tables can be
built through either measure route, which must agree; the degree-k
Bergman diagonal on the chart is the same sum twisted by the fiber
weight, B_k = h_E * Pi_k along the fibration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .domains import ReinhardtDomain
from .measure import QuadratureSpec, _log_hE, weighted_boundary_grid

__all__ = [
	"enumerate_multi_indices",
	"NormEstimate",
	"NormTable",
	"monomial_norm",
	"build_norm_table",
	"partial_szego",
	"interior_rescale",
	"RescaledPoint",
	"bergman_diag",
]


def enumerate_multi_indices(n: int, k: int) -> list:
	"""All (n+1)-tuples of nonnegative integers summing to k, first slot
	decreasing fastest last: (k,0,...), ..., (0,...,0,k)."""
	if n < 0 or k < 0:
		raise ValueError("need n >= 0 and k >= 0")
	if n == 0:
		return [(k,)]
	out = []
	for j in range(k, -1, -1):
		out.extend((j,) + rest for rest in enumerate_multi_indices(n - 1, k - j))
	return out


def _logsumexp(t: np.ndarray) -> float:
	m = float(np.max(t))
	if not np.isfinite(m):
		return -math.inf
	return m + math.log(float(np.sum(np.exp(t - m))))


def _route_grid(domain, route, q, level, k):
	nodes = q.nodes_per_dim * 2 ** level
	mapping = q.mapping
	if route == "projective" and k == 0 and mapping == "algebraic":
		# the k = 0 chart integrand decays too slowly for the algebraic
		# map; fall back to the tangent map with twice the nodes
		mapping = "tangent"
		nodes *= 2
	return weighted_boundary_grid(domain, route, nodes, mapping)


def _norm_logs(domain, j_rows: np.ndarray, k: int, q, route: str):
	"""Log norms for the given multi-index rows, refined until the relative
	change between node-doubling passes meets the tolerance."""
	prev = None
	rel = np.full(len(j_rows), np.inf)
	level = 0
	for level in range(q.refinement_levels + 1):
		grid = _route_grid(domain, route, q, level, k)
		logs = np.empty(len(j_rows))
		for row, j in enumerate(j_rows):
			logs[row] = _logsumexp(grid.log_w + (2.0 * j) @ grid.log_m)
		logs += grid.prefactor
		if prev is not None:
			rel = np.abs(np.expm1(logs - prev))
			if np.all(rel <= q.target_rel_tol):
				return logs, rel, np.ones(len(j_rows), dtype=bool), level
		prev = logs
	return prev, rel, rel <= q.target_rel_tol, level


@dataclass
class NormEstimate:
	value: float
	log_value: float
	rel_err: float
	converged: bool


def monomial_norm(
	domain: ReinhardtDomain,
	index,
	q: QuadratureSpec,
	route: str = "boundary",
) -> NormEstimate:
	"""Weighted L^2 norm squared of the monomial x^index."""
	j = np.atleast_2d(np.asarray(index, dtype=float))
	if j.shape[1] != domain.nvar or np.any(j < 0):
		raise ValueError(f"index must have {domain.nvar} nonnegative entries")
	k = int(round(float(j.sum())))
	logs, rel, conv, _ = _norm_logs(domain, j, k, q, route)
	return NormEstimate(math.exp(logs[0]), float(logs[0]), float(rel[0]), bool(conv[0]))


@dataclass
class NormTable:
	"""All degree-k monomial norms for one domain and route."""

	n: int
	k: int
	route: str
	indices: tuple
	log_norms: np.ndarray
	rel_errs: np.ndarray
	converged: np.ndarray
	levels_used: int

	@property
	def complete(self) -> bool:
		return bool(np.all(self.converged))

	def _slot(self, index) -> int:
		key = tuple(int(v) for v in index)
		if not hasattr(self, "_lookup"):
			self._lookup = {j: i for i, j in enumerate(self.indices)}
		if key not in self._lookup:
			raise KeyError(f"index {key} is not of degree {self.k} in {self.n + 1} slots")
		return self._lookup[key]

	def log_norm(self, index) -> float:
		return float(self.log_norms[self._slot(index)])

	def norm(self, index) -> float:
		return math.exp(self.log_norm(index))


def build_norm_table(
	domain: ReinhardtDomain,
	k: int,
	q: QuadratureSpec,
	route: str = "boundary",
) -> NormTable:
	"""Norms of every monomial of degree k.  A table whose entries did not
	all meet the tolerance is returned with converged flags cleared rather
	than silently wrong; consumers refuse incomplete tables."""
	indices = enumerate_multi_indices(domain.n, k)
	j_rows = np.asarray(indices, dtype=float)
	logs, rel, conv, level = _norm_logs(domain, j_rows, k, q, route)
	return NormTable(
		domain.n, k, route, tuple(indices), logs, rel, conv, level
	)


def partial_szego(
	domain: ReinhardtDomain, k: int, x, table: NormTable
) -> float:
	"""Diagonal value Pi_k(x) from a complete degree-k norm table; valid at
	any x, on or off the boundary."""
	if table.k != k or table.n != domain.n:
		raise ValueError(
			f"table is for (n={table.n}, k={table.k}), requested (n={domain.n}, k={k})"
		)
	if not table.complete:
		raise ValueError(
			"norm table is incomplete (quadrature tolerance not met); "
			"refine the quadrature before evaluating kernels"
		)
	m = domain.moduli(x)
	j_rows = np.asarray(table.indices, dtype=float)
	zero = m == 0.0
	alive = ~np.any(j_rows[:, zero] > 0, axis=1)
	if not np.any(alive):
		return 0.0
	log_m = np.where(zero, 0.0, np.log(np.where(zero, 1.0, m)))
	t = (2.0 * j_rows[alive]) @ log_m - table.log_norms[alive]
	return math.exp(_logsumexp(t))


@dataclass
class RescaledPoint:
	"""Projection of an interior point to the boundary along its ray,
	with the exact per-degree kernel scaling Pi_k(x) =
	factor(k) * Pi_k(boundary_point)."""

	boundary_point: np.ndarray
	rho: float
	order: Fraction

	def factor(self, k: int) -> float:
		return self.rho ** (2.0 * k / float(self.order))


def interior_rescale(domain: ReinhardtDomain, x) -> RescaledPoint:
	z = np.asarray(x, dtype=complex)
	m = domain.moduli(z)
	rho = float(domain.rho_at(m))
	if rho <= 0.0:
		raise ValueError("cannot rescale a point with rho = 0 to the boundary")
	psi = rho ** (-1.0 / float(domain.order))
	return RescaledPoint(z * psi, rho, domain.order)


def bergman_diag(
	domain: ReinhardtDomain, k: int, z, table: NormTable
) -> float:
	"""Degree-k Bergman kernel diagonal on the chart: the monomial sections
	pulled back to the chart, paired with the fiber weight h_E."""
	if not table.complete:
		raise ValueError("norm table is incomplete")
	zz = np.atleast_1d(np.asarray(z, dtype=complex))
	if len(zz) != domain.n:
		raise ValueError(f"chart point must have {domain.n} coordinates")
	y = np.concatenate([[1.0 + 0.0j], zz])
	my = domain.moduli(y)
	rho = float(domain.rho_at(my))
	log_psi = -math.log(rho) / float(domain.order)
	log_he = float(_log_hE(domain, my))
	j_rows = np.asarray(table.indices, dtype=float)
	zero = my == 0.0
	alive = ~np.any(j_rows[:, zero] > 0, axis=1)
	if not np.any(alive):
		return 0.0
	# pulled-back monomial: |x^J|^2 at y psi(y) is psi^{2k} prod |y_i|^{2 j_i}
	log_my = np.where(zero, 0.0, np.log(np.where(zero, 1.0, my)))
	t = (2.0 * j_rows[alive]) @ log_my
	t = t + 2.0 * k * log_psi + log_he - table.log_norms[alive]
	return math.exp(_logsumexp(t))
