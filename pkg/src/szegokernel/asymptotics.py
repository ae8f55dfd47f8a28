"""Diagonal expansion of the degree-k kernel sums.

At a boundary point x with every coordinate off its axis the partial
sums grow like

    Pi_k(x) = k^n ( a0 + a1 / k + O(1/k^2) ),

and both coefficients are pointwise expressions in the defining data.
The leading one is

    a0 = (2/l)^{n+1} det H / ( pi^{n+1} e^u sqrt(sum_i f_i^2) ),

with H the complex Hessian of rho and f_i its moduli partials.  Extended
off the boundary along rays it becomes degree zero, hence a function on
the chart:

    ln a0 = const + ln det H - u(tau) + c ln rho - (1/2) ln sum_i f_i^2,
    c = (2n + 1 - l n) / l,    tau = boundary projection,

and its chart complex Hessian drives the subleading coefficient

    a1 = a0 ( r / 2 + tr(Theta^{-1} Hc[ln a0]) ),
    r = -tr(Theta^{-1} Hc[ln det Theta]),

where Theta is the chart metric and Hc the complex Hessian in the
affine coordinates z.  Every scalar involved is torus invariant, so Hc
collapses at the real representative (1, w) to radial derivatives:
(phi_ii + phi_i / w_i) / 4 on the diagonal and phi_ij / 4 off it, with
subscripts denoting moduli partials.

a1_closed_form computes the two traces twice, through symbolic order-2
jets of the chart expressions and through Richardson-refined central
differences of the plainly numeric routines, and refuses to answer when
the routes disagree; an agreement failure means the geometry is broken,
not that one route deserves trust.

The fitting side (fit_expansion, verify_expansion) recovers a0 and a1
from computed kernel sequences by Richardson elimination and compares
them against the closed forms.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .curvature import curvature_matrix, det_curvature_x
from .domains import GeometryError, ReinhardtDomain
from .expressions import (
	call,
	const,
	eval_jet2,
	negate,
	power,
	product_of,
	quotient,
	substitute,
	sum_of,
	var,
)
from .kernels import build_norm_table, partial_szego
from .measure import QuadratureError, QuadratureSpec

__all__ = [
	"AsymptoticCoefficients",
	"ExpansionFit",
	"ExpansionReport",
	"a0_closed_form",
	"a1_closed_form",
	"closed_coefficients",
	"fit_expansion",
	"log_a0_extended",
	"verify_expansion",
]

_BOUNDARY_TOL = 1e-10
_ROUTE_AGREEMENT = 1e-4


@dataclass(frozen=True)
class AsymptoticCoefficients:
	"""Closed-form expansion coefficients at one boundary point."""

	a0: float
	a1: float
	power: int


def _real_hessian(domain: ReinhardtDomain, m) -> np.ndarray:
	"""Complex Hessian of rho at points with positive real coordinates:
	H_ij = f_ij / 4 off the diagonal, H_ii = f_ii / 4 + f_i / (4 m_i)."""
	arr = np.asarray(m, dtype=float)
	h = 0.25 * domain.hess_at(arr)
	idx = np.arange(domain.nvar)
	h[idx, idx] += 0.25 * domain.grad_at(arr) / arr
	return h


def log_a0_extended(domain: ReinhardtDomain, m) -> float | np.ndarray:
	"""ln a0 continued off the boundary along rays; degree zero in the
	moduli.  Requires every modulus positive, shape (nvar,) or
	(nvar, ...)."""
	arr = np.asarray(m, dtype=float)
	if np.any(arr <= 0.0):
		raise GeometryError("a0 needs every modulus positive")
	rho = np.asarray(domain.rho_at(arr))
	if np.any(rho <= 0.0):
		raise GeometryError("a0 needs rho > 0")
	h = _real_hessian(domain, arr)
	det_h = np.linalg.det(np.moveaxis(h, (0, 1), (-2, -1)))
	if np.any(det_h <= 0.0):
		raise GeometryError("complex Hessian of rho is not positive here")
	f = domain.grad_at(arr)
	grad_sq = np.sum(f * f, axis=0)
	tau = arr * rho ** float(domain.psi_exponent)
	u = np.asarray(domain.weight_at(tau))
	n = domain.n
	ell = float(domain.order)
	c_rho = (2 * n + 1 - ell * n) / ell
	out = (
		(n + 1) * math.log(2.0 / ell)
		- (n + 1) * math.log(math.pi)
		+ np.log(det_h)
		- u
		+ c_rho * np.log(rho)
		- 0.5 * np.log(grad_sq)
	)
	return float(out) if arr.ndim == 1 else out


def a0_closed_form(domain: ReinhardtDomain, x) -> float:
	m = domain.moduli(x)
	if m.ndim != 1:
		raise ValueError("one point at a time")
	rho = float(domain.rho_at(m))
	if abs(rho - 1.0) > _BOUNDARY_TOL:
		raise GeometryError(f"point is off the boundary: rho = {rho!r}")
	return math.exp(log_a0_extended(domain, m))


def _parity(perm) -> int:
	flips = sum(
		1
		for i in range(len(perm))
		for j in range(i + 1, len(perm))
		if perm[i] > perm[j]
	)
	return -1 if flips % 2 else 1


def _det_expr(entry, indices):
	"""Leibniz determinant of a symmetric matrix of expressions; entry is
	a callable (i, j) -> Expression over the given index list."""
	terms = []
	for perm in permutations(range(len(indices))):
		factors = [entry(indices[r], indices[perm[r]]) for r in range(len(indices))]
		term = product_of(factors)
		terms.append(term if _parity(perm) > 0 else negate(term))
	return sum_of(terms)


def _chart_exprs(domain: ReinhardtDomain) -> dict:
	"""Chart scalars ln det Theta and ln a0 as expressions in the moduli
	with m0 pinned to 1, valid at real representatives (1, w)."""
	if "chart_exprs" in domain.cache:
		return domain.cache["chart_exprs"]
	n1 = domain.nvar
	hess = {}
	for i in range(n1):
		for j in range(i, n1):
			e = product_of([const(0.25), domain.rho_hess[(i, j)]])
			if i == j:
				e = sum_of(
					[e, quotient(domain.rho_grad[i], product_of([const(4.0), var(i)]))]
				)
			hess[(i, j)] = e

	def h_entry(i, j):
		return hess[(i, j) if i <= j else (j, i)]

	rho = domain.rho
	scale = const(2.0 / float(domain.order))
	theta = {}
	for i in range(1, n1):
		for j in range(i, n1):
			num = sum_of(
				[
					product_of([rho, h_entry(i, j)]),
					negate(
						product_of(
							[const(0.25), domain.rho_grad[i], domain.rho_grad[j]]
						)
					),
				]
			)
			theta[(i, j)] = product_of(
				[scale, quotient(num, product_of([rho, rho]))]
			)

	def t_entry(i, j):
		return theta[(i, j) if i <= j else (j, i)]

	det_theta = _det_expr(t_entry, list(range(1, n1)))
	det_h = _det_expr(h_entry, list(range(n1)))
	n = domain.n
	ell = float(domain.order)
	c_rho = (2 * n + 1 - ell * n) / ell
	tau = [
		product_of([var(i), power(rho, domain.psi_exponent)]) for i in range(n1)
	]
	grad_sq = sum_of([product_of([g, g]) for g in domain.rho_grad])
	log_a0 = sum_of(
		[
			call("log", det_h),
			negate(substitute(domain.weight, tau)),
			product_of([const(c_rho), call("log", rho)]),
			product_of([const(-0.5), call("log", grad_sq)]),
		]
	)
	pin_m0 = [const(1.0)] + [var(i) for i in range(1, n1)]
	out = {
		"log_det_theta": substitute(call("log", det_theta), pin_m0),
		"log_a0": substitute(log_a0, pin_m0),
	}
	domain.cache["chart_exprs"] = out
	return out


def _radial_to_complex(grad: np.ndarray, hess: np.ndarray, w: np.ndarray) -> np.ndarray:
	"""Chart complex Hessian of a torus-invariant scalar at the real point
	(1, w) from its moduli gradient and Hessian over w."""
	out = 0.25 * np.asarray(hess, dtype=float).copy()
	idx = np.arange(len(w))
	out[idx, idx] += 0.25 * np.asarray(grad, dtype=float) / w
	return out


def _fd_gradient_hessian(fn, w: np.ndarray, step: float = 1e-3):
	"""Central-difference gradient and Hessian with one Richardson level."""
	w = np.asarray(w, dtype=float)
	d = len(w)

	def stencil(h_rel):
		steps = h_rel * np.maximum(1.0, np.abs(w))
		grad = np.empty(d)
		hess = np.empty((d, d))
		f0 = fn(w)
		for i in range(d):
			ei = np.zeros(d)
			ei[i] = steps[i]
			fp = fn(w + ei)
			fm = fn(w - ei)
			grad[i] = (fp - fm) / (2.0 * steps[i])
			hess[i, i] = (fp - 2.0 * f0 + fm) / steps[i] ** 2
			for j in range(i + 1, d):
				ej = np.zeros(d)
				ej[j] = steps[j]
				mixed = (
					fn(w + ei + ej)
					- fn(w + ei - ej)
					- fn(w - ei + ej)
					+ fn(w - ei - ej)
				) / (4.0 * steps[i] * steps[j])
				hess[i, j] = mixed
				hess[j, i] = mixed
		return grad, hess

	g1, h1 = stencil(step)
	g2, h2 = stencil(step / 2.0)
	return (4.0 * g2 - g1) / 3.0, (4.0 * h2 - h1) / 3.0


def _curvature_traces(domain: ReinhardtDomain, w: np.ndarray):
	"""(r, T) at the real chart point w by the jet route, cross-checked
	against finite differences of the numeric routines."""
	theta = curvature_matrix(domain, w)
	if np.max(np.abs(theta.imag)) > 1e-10 * max(np.max(np.abs(theta.real)), 1e-300):
		raise GeometryError("chart metric is not real at a real point")
	theta_r = theta.real
	exprs = _chart_exprs(domain)
	lift = np.concatenate([[1.0], w])
	j_a0 = eval_jet2(exprs["log_a0"], lift)
	j_th = eval_jet2(exprs["log_det_theta"], lift)
	hc_a0 = _radial_to_complex(j_a0.gradient[1:], j_a0.hessian_matrix()[1:, 1:], w)
	hc_th = _radial_to_complex(j_th.gradient[1:], j_th.hessian_matrix()[1:, 1:], w)
	trace = float(np.trace(np.linalg.solve(theta_r, hc_a0)))
	curv = -float(np.trace(np.linalg.solve(theta_r, hc_th)))

	def a0_fn(v):
		return float(log_a0_extended(domain, np.concatenate([[1.0], v])))

	def theta_fn(v):
		return math.log(det_curvature_x(domain, np.concatenate([[1.0], v])))

	g_a0, h_a0 = _fd_gradient_hessian(a0_fn, w)
	g_th, h_th = _fd_gradient_hessian(theta_fn, w)
	trace_fd = float(np.trace(np.linalg.solve(theta_r, _radial_to_complex(g_a0, h_a0, w))))
	curv_fd = -float(np.trace(np.linalg.solve(theta_r, _radial_to_complex(g_th, h_th, w))))
	span = max(1.0, abs(trace), abs(curv))
	if abs(trace - trace_fd) > _ROUTE_AGREEMENT * span or abs(curv - curv_fd) > _ROUTE_AGREEMENT * span:
		raise GeometryError(
			"jet and finite-difference curvature traces disagree: "
			f"trace {trace!r} vs {trace_fd!r}, scalar curvature {curv!r} vs {curv_fd!r}"
		)
	return curv, trace


def a1_closed_form(domain: ReinhardtDomain, x) -> float:
	m = domain.moduli(x)
	if m.ndim != 1:
		raise ValueError("one point at a time")
	if np.any(m <= 0.0):
		raise GeometryError("a1 needs every coordinate off its axis")
	rho = float(domain.rho_at(m))
	if abs(rho - 1.0) > _BOUNDARY_TOL:
		raise GeometryError(f"point is off the boundary: rho = {rho!r}")
	w = m[1:] / m[0]
	curv, trace = _curvature_traces(domain, w)
	a0 = math.exp(log_a0_extended(domain, m))
	return a0 * (0.5 * curv + trace)


def closed_coefficients(domain: ReinhardtDomain, x) -> AsymptoticCoefficients:
	return AsymptoticCoefficients(
		a0_closed_form(domain, x), a1_closed_form(domain, x), domain.n
	)


@dataclass(frozen=True)
class ExpansionFit:
	"""Coefficients recovered from a computed kernel sequence."""

	a0: float
	a1: float
	power: float
	a0_spread: float
	a1_spread: float
	pairs_used: int

	def to_dict(self) -> dict:
		return {
			"a0": self.a0,
			"a1": self.a1,
			"power": self.power,
			"a0_spread": self.a0_spread,
			"a1_spread": self.a1_spread,
			"pairs_used": self.pairs_used,
		}


def _pair_eliminate(ks: np.ndarray, seq: np.ndarray, pairs: int):
	"""Richardson elimination of the 1/k term over the top consecutive
	pairs: seq = c + O(1/k) gives (k seq_k - k' seq_k')/(k - k')."""
	vals = []
	for hi in range(len(ks) - 1, max(len(ks) - 1 - pairs, 0), -1):
		k1, k0 = ks[hi], ks[hi - 1]
		vals.append((k1 * seq[hi] - k0 * seq[hi - 1]) / (k1 - k0))
	return np.array(vals)


def fit_expansion(ks, values, n: int) -> ExpansionFit:
	"""Recover a0, a1 and the growth exponent from Pi_k values assuming
	Pi_k = a0 k^n + a1 k^{n-1} + O(k^{n-2})."""
	karr = np.asarray(ks, dtype=float)
	varr = np.asarray(values, dtype=float)
	if karr.ndim != 1 or karr.shape != varr.shape:
		raise ValueError("ks and values must be matching 1-d sequences")
	if len(karr) < 4:
		raise ValueError("need at least 4 degrees to fit the expansion")
	if np.any(np.diff(karr) <= 0) or karr[0] < 1:
		raise ValueError("degrees must be strictly increasing and >= 1")
	if np.any(varr <= 0.0):
		raise ValueError("kernel values must be positive")
	s = varr / karr ** n
	a0_vals = _pair_eliminate(karr, s, 5)
	a0 = float(np.mean(a0_vals))
	a0_spread = float(np.max(np.abs(a0_vals - a0)) / abs(a0))
	t = (varr - a0 * karr ** n) / karr ** (n - 1)
	a1_vals = _pair_eliminate(karr, t, 5)
	a1 = float(np.mean(a1_vals))
	a1_spread = float(np.max(np.abs(a1_vals - a1)) / max(abs(a1), abs(a0)))
	half = len(karr) // 2
	log_k = np.log(karr[half:])
	log_v = np.log(varr[half:])
	slope = float(np.polyfit(log_k, log_v, 1)[0])
	k_geo = math.exp(float(np.mean(log_k)))
	power = slope + (a1 / a0) / k_geo
	return ExpansionFit(a0, a1, power, a0_spread, a1_spread, len(a0_vals))


@dataclass(frozen=True)
class ExpansionReport:
	"""Fitted-versus-closed comparison of the expansion at one point."""

	moduli: tuple
	route: str
	ks: tuple
	values: tuple
	fit: ExpansionFit
	closed: AsymptoticCoefficients
	rel_a0: float
	rel_a1: float
	warnings: tuple

	def to_dict(self) -> dict:
		return {
			"moduli": list(self.moduli),
			"route": self.route,
			"ks": list(self.ks),
			"values": list(self.values),
			"fit": self.fit.to_dict(),
			"closed": {
				"a0": self.closed.a0,
				"a1": self.closed.a1,
				"power": self.closed.power,
			},
			"rel_a0": self.rel_a0,
			"rel_a1": self.rel_a1,
			"warnings": list(self.warnings),
		}


def _norm_table_job(args):
	domain, k, q, route = args
	return build_norm_table(domain, k, q, route)


def kernel_sequence(
	domain: ReinhardtDomain,
	x,
	k_min: int,
	k_max: int,
	q: QuadratureSpec,
	route: str = "boundary",
	workers: int = 1,
):
	"""Pi_k at the boundary projection of x for k_min..k_max.  Tables for
	different degrees are independent, so they may be built in worker
	processes; the result does not depend on the worker count."""
	if k_min < 1 or k_max < k_min:
		raise ValueError("need 1 <= k_min <= k_max")
	m = domain.moduli(x)
	m_boundary = domain.boundary_projection(m)
	ks = list(range(k_min, k_max + 1))
	jobs = [(domain, k, q, route) for k in ks]
	if workers > 1:
		with ProcessPoolExecutor(max_workers=workers) as pool:
			tables = list(pool.map(_norm_table_job, jobs))
	else:
		tables = [_norm_table_job(job) for job in jobs]
	for k, table in zip(ks, tables):
		if not table.complete:
			raise QuadratureError(
				f"monomial norms at degree {k} did not meet the tolerance; "
				"refine the quadrature"
			)
	values = [partial_szego(domain, k, m_boundary, t) for k, t in zip(ks, tables)]
	return m_boundary, ks, values


def verify_expansion(
	domain: ReinhardtDomain,
	x,
	k_min: int,
	k_max: int,
	q: QuadratureSpec,
	route: str = "boundary",
	workers: int = 1,
) -> ExpansionReport:
	"""Fit the expansion from computed kernel values and compare against
	the closed forms at the boundary projection of x."""
	m_boundary, ks, values = kernel_sequence(
		domain, x, k_min, k_max, q, route, workers
	)
	fit = fit_expansion(ks, values, domain.n)
	closed = closed_coefficients(domain, m_boundary)
	rel_a0 = abs(fit.a0 - closed.a0) / abs(closed.a0)
	denom = abs(closed.a1) if closed.a1 != 0.0 else abs(closed.a0)
	rel_a1 = abs(fit.a1 - closed.a1) / denom
	warnings = [
		f"model: Pi_k = a0 k^{domain.n} + a1 k^{domain.n - 1} + ...; "
		f"fitted growth exponent {fit.power:.4f}"
	]
	if abs(fit.power - domain.n) > 0.05:
		warnings.append(
			f"fitted exponent is far from the model power {domain.n}; "
			"the fit window may be too short"
		)
	if fit.a0_spread > 1e-3:
		warnings.append(
			f"leading Richardson pairs spread {fit.a0_spread:.2e}; "
			"increase k_max or tighten the quadrature"
		)
	return ExpansionReport(
		tuple(float(v) for v in m_boundary),
		route,
		tuple(ks),
		tuple(float(v) for v in values),
		fit,
		closed,
		float(rel_a0),
		float(rel_a1),
		tuple(warnings),
	)
