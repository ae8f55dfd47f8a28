"""Homogeneous Reinhardt domains given by a defining function of moduli.

A domain is the sublevel set rho^{-1}[0, 1) in C^{n+1}, where

    rho(x) = f(|x_0|, ..., |x_n|)

and f is positively homogeneous of some order l > 0, positive away from
the origin, and strictly increasing in each modulus on the open orthant.
Everything downstream (boundary measure, curvature, kernel asymptotics)
consumes first and second complex derivatives of rho, which reduce to
moduli derivatives of f through the chain rule below; those moduli
derivatives are taken symbolically once and cached on the domain.

With f_i = df/dm_i and m_i = |x_i|,

    d rho / d conj(x_i)      = f_i x_i / (2 m_i)
    d2 rho / dx_i d conj(x_j) = f_ij conj(x_i) x_j / (4 m_i m_j)   (i != j)
    d2 rho / dx_i d conj(x_i) = f_ii / 4 + f_i / (4 m_i)

and homogeneity gives the Euler identities

    sum_i x_i d rho/dx_i      = (l/2) rho
    sum_i x_i H_ij            = (l/2) d rho / d conj(x_j)

which `euler_residuals` turns into a cheap self-test of the whole
derivative stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .expressions import (
	Const,
	Expression,
	JetValue,
	check_homogeneity,
	differentiate,
	eval_jet2,
	evaluate,
	max_variable_index,
	parse_expression,
)

__all__ = [
	"DomainDefinitionError",
	"GeometryError",
	"ReinhardtDomain",
	"ComplexHessian",
	"EulerResiduals",
	"CheckResult",
	"ValidationReport",
	"psi_jet",
	"complex_gradient",
	"complex_hessian",
	"euler_residuals",
	"validate_domain",
]


class DomainDefinitionError(ValueError):
	"""The defining data do not describe an admissible domain."""


class GeometryError(RuntimeError):
	"""A geometric quantity was requested where it is not defined."""


def _as_expression(value, var_count: int) -> Expression:
	if isinstance(value, Expression):
		if max_variable_index(value) >= var_count:
			raise DomainDefinitionError(
				f"expression uses m{max_variable_index(value)} but the domain has "
				f"variables m0..m{var_count - 1}"
			)
		return value
	return parse_expression(str(value), var_count=var_count)


class ReinhardtDomain:
	"""Domain data: dimension, homogeneity order, defining function, and an
	optional torus-invariant log-weight u (the measure is e^u times the
	induced one).

	`rho` and `weight` may be expression text or parsed Expressions in the
	moduli variables m0..mn.  The homogeneity of rho is verified at
	construction on random positive points.
	"""

	def __init__(self, n: int, order, rho, weight=None):
		if n < 1:
			raise DomainDefinitionError("need n >= 1 (at least two coordinates)")
		self.n = int(n)
		self.nvar = self.n + 1
		self.order = Fraction(order)
		if self.order <= 0:
			raise DomainDefinitionError("homogeneity order must be positive")
		self.rho = _as_expression(rho, self.nvar)
		self.weight = (
			Const(0.0) if weight is None else _as_expression(weight, self.nvar)
		)
		check = check_homogeneity(self.rho, float(self.order), self.nvar)
		if not check:
			raise DomainDefinitionError(
				f"defining function is not homogeneous of order {self.order}: "
				f"max relative defect {check.max_rel_err:.3e} {check.detail}"
			)

	def __repr__(self) -> str:
		return (
			f"ReinhardtDomain(n={self.n}, order={self.order}, rho={self.rho}, "
			f"weight={self.weight})"
		)

	def __getstate__(self):
		state = dict(self.__dict__)
		state.pop("_cache", None)
		return state

	def __setstate__(self, state):
		self.__dict__.update(state)

	@property
	def cache(self) -> dict:
		if "_cache" not in self.__dict__:
			self._cache = {}
		return self._cache

	@cached_property
	def psi_exponent(self) -> Fraction:
		return Fraction(-1) / self.order

	@cached_property
	def rho_grad(self) -> tuple:
		return tuple(differentiate(self.rho, i) for i in range(self.nvar))

	@cached_property
	def rho_hess(self) -> dict:
		out = {}
		for i in range(self.nvar):
			for j in range(i, self.nvar):
				out[(i, j)] = differentiate(self.rho_grad[i], j)
		return out

	# numeric helpers; all accept moduli of shape (nvar,) or (nvar, ...)

	@staticmethod
	def moduli(x) -> np.ndarray:
		return np.abs(np.asarray(x, dtype=complex)).astype(float)

	def rho_at(self, m):
		return evaluate(self.rho, m)

	def weight_at(self, m):
		return evaluate(self.weight, m)

	def grad_at(self, m) -> np.ndarray:
		arr = np.asarray(m, dtype=float)
		rows = [evaluate(g, arr) for g in self.rho_grad]
		return np.stack([np.broadcast_to(r, arr.shape[1:]) for r in rows]) if arr.ndim > 1 else np.array(rows)

	def hess_at(self, m) -> np.ndarray:
		arr = np.asarray(m, dtype=float)
		tail = arr.shape[1:]
		out = np.zeros((self.nvar, self.nvar) + tail)
		for (i, j), e in self.rho_hess.items():
			v = evaluate(e, arr)
			out[i, j] = v
			out[j, i] = v
		return out

	def psi_at(self, m):
		r = self.rho_at(m)
		if np.any(np.asarray(r) <= 0.0):
			raise GeometryError("psi requires rho > 0")
		return np.asarray(r) ** float(self.psi_exponent) if np.ndim(r) else r ** float(self.psi_exponent)

	def boundary_projection(self, m) -> np.ndarray:
		"""Scale moduli onto rho = 1 along the ray through m."""
		return np.asarray(m, dtype=float) * self.psi_at(m)


def psi_jet(domain: ReinhardtDomain, m) -> JetValue:
	"""Order-2 jet of psi = rho^{-1/l} in the moduli variables."""
	return eval_jet2(domain.rho, m).pow_rational(domain.psi_exponent)


def complex_gradient(domain: ReinhardtDomain, x) -> np.ndarray:
	"""The conjugate-holomorphic gradient g[i] = d rho / d conj(x_i).

	The holomorphic one is its conjugate since rho is real.  Entries with
	x_i = 0 are zero by torus symmetry.
	"""
	z = np.asarray(x, dtype=complex)
	m = domain.moduli(z)
	f = domain.grad_at(m)
	safe = np.where(m > 0.0, 2.0 * m, 1.0)
	out = f * z / safe
	return np.where(m > 0.0, out, 0.0 + 0.0j)


@dataclass
class ComplexHessian:
	"""Full complex Hessian H[i, j] = d2 rho / dx_i d conj(x_j)."""

	full: np.ndarray

	@property
	def minor(self) -> np.ndarray:
		"""Lower-right block over the coordinates x_1..x_n."""
		return self.full[1:, 1:]


def complex_hessian(domain: ReinhardtDomain, x) -> ComplexHessian:
	z = np.asarray(x, dtype=complex)
	m = domain.moduli(z)
	if np.any(m == 0.0):
		raise GeometryError(
			"complex Hessian entries need all coordinates nonzero"
		)
	f = domain.grad_at(m)
	fij = domain.hess_at(m)
	nvar = domain.nvar
	out = np.zeros((nvar, nvar), dtype=complex)
	for i in range(nvar):
		out[i, i] = fij[i, i] / 4.0 + f[i] / (4.0 * m[i])
		for j in range(i + 1, nvar):
			out[i, j] = fij[i, j] * np.conj(z[i]) * z[j] / (4.0 * m[i] * m[j])
			out[j, i] = np.conj(out[i, j])
	return ComplexHessian(out)


@dataclass
class EulerResiduals:
	"""Relative residuals of the homogeneity identities at one point."""

	radial: float
	conjugate: float
	rows: np.ndarray

	@property
	def max_rel(self) -> float:
		return max(self.radial, self.conjugate, float(np.max(self.rows)))


def euler_residuals(domain: ReinhardtDomain, x) -> EulerResiduals:
	"""Check sum_i x_i drho/dx_i = (l/2) rho and the Hessian row identity
	sum_i x_i H_ij = (l/2) drho/dconj(x_j).  Needs nonzero coordinates."""
	z = np.asarray(x, dtype=complex)
	m = domain.moduli(z)
	rho = domain.rho_at(m)
	half_l = float(domain.order) / 2.0
	g = complex_gradient(domain, z)
	tiny = 1e-300

	lhs = np.sum(z * np.conj(g))
	target = half_l * rho
	scale = max(abs(target), float(np.sum(np.abs(z * g))), tiny)
	radial = abs(lhs - target) / scale

	lhs_c = np.sum(np.conj(z) * g)
	conjugate = abs(lhs_c - target) / scale

	H = complex_hessian(domain, z).full
	rows = np.zeros(domain.nvar)
	for j in range(domain.nvar):
		row = np.sum(z * H[:, j])
		want = half_l * g[j]
		s = max(abs(want), float(np.sum(np.abs(z * H[:, j]))), tiny)
		rows[j] = abs(row - want) / s
	return EulerResiduals(float(radial), float(conjugate), rows)


@dataclass
class CheckResult:
	name: str
	passed: bool
	detail: str = ""


@dataclass
class ValidationReport:
	checks: list = field(default_factory=list)

	@property
	def ok(self) -> bool:
		return all(c.passed for c in self.checks)

	def failures(self) -> list:
		return [c for c in self.checks if not c.passed]

	def to_dict(self) -> dict:
		return {
			"ok": self.ok,
			"checks": [
				{"name": c.name, "passed": c.passed, "detail": c.detail}
				for c in self.checks
			],
		}


def _random_complex_points(nvar: int, count: int, rng) -> np.ndarray:
	m = rng.uniform(0.3, 1.5, size=(count, nvar))
	phase = rng.uniform(0.0, 2.0 * np.pi, size=(count, nvar))
	return m * np.exp(1j * phase)


def validate_domain(
	domain: ReinhardtDomain, samples: int = 64, seed: int = 11
) -> ValidationReport:
	"""Run the admissibility checks: homogeneity, positivity and strict
	monotonicity of rho, bounded coordinate slices, the Euler identities,
	plurisubharmonicity, and positivity of the induced metric."""
	rng = np.random.default_rng(seed)
	report = ValidationReport()

	hom = check_homogeneity(domain.rho, float(domain.order), domain.nvar)
	report.checks.append(
		CheckResult(
			"homogeneity",
			bool(hom),
			f"max relative defect {hom.max_rel_err:.3e} {hom.detail}".strip(),
		)
	)

	m = rng.uniform(0.2, 1.8, size=(domain.nvar, samples))
	try:
		rho = np.asarray(domain.rho_at(m))
		ok = bool(np.all(rho > 0.0))
		report.checks.append(
			CheckResult("positivity", ok, f"min rho {float(np.min(rho)):.3e}")
		)
		grad = domain.grad_at(m)
		ok = bool(np.all(grad > 0.0))
		report.checks.append(
			CheckResult(
				"monotonicity", ok, f"min drho/dm {float(np.min(grad)):.3e}"
			)
		)
	except ArithmeticError as exc:
		report.checks.append(CheckResult("positivity", False, str(exc)))
		return report

	axis_vals = []
	for i in range(domain.nvar):
		e_i = np.zeros(domain.nvar)
		e_i[i] = 1.0
		axis_vals.append(float(domain.rho_at(e_i)))
	ok = all(v > 0.0 for v in axis_vals)
	report.checks.append(
		CheckResult(
			"bounded_slices",
			ok,
			"rho at unit axis points: "
			+ ", ".join(f"{v:.3e}" for v in axis_vals),
		)
	)
	if not ok:
		return report

	worst = 0.0
	for z in _random_complex_points(domain.nvar, 12, rng):
		worst = max(worst, euler_residuals(domain, z).max_rel)
	report.checks.append(
		CheckResult("euler_identities", worst <= 1e-10, f"max residual {worst:.3e}")
	)

	min_eig = np.inf
	for z in _random_complex_points(domain.nvar, 12, rng):
		H = complex_hessian(domain, z).full
		eigs = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
		min_eig = min(min_eig, float(eigs[0]))
	report.checks.append(
		CheckResult(
			"plurisubharmonic", min_eig > 0.0, f"min Hessian eigenvalue {min_eig:.3e}"
		)
	)

	from .curvature import positivity_check

	charts = _random_complex_points(domain.n, 12, rng)
	ok, min_curv = positivity_check(domain, charts)
	report.checks.append(
		CheckResult(
			"metric_positive", ok, f"min curvature eigenvalue {min_curv:.3e}"
		)
	)
	return report
