"""Run configuration: one INI file drives every subcommand.

    [domain]            n, order, rho, weight (optional)
    [point]             x = comma-separated coordinates (complex allowed)
    [quadrature]        nodes, mapping, levels, tol (all optional)
    [run]               k_min, k_max, route, workers, out, tol_a0, tol_a1

config_hash identifies what gets computed; execution details (workers,
out) and judgment thresholds (tol_a0, tol_a1) stay out of it so reruns
that only change those still match cached artifacts.
"""

from __future__ import annotations

import hashlib
import json
from configparser import ConfigParser
from configparser import Error as IniError
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .domains import ReinhardtDomain
from .expressions import print_expression
from .measure import QuadratureSpec

__all__ = ["ConfigError", "RunConfig", "config_hash", "load_config"]


class ConfigError(ValueError):
	pass


_SECTIONS = {
	"domain": {"n", "order", "rho", "weight"},
	"point": {"x"},
	"quadrature": {"nodes", "mapping", "levels", "tol"},
	"run": {"k_min", "k_max", "route", "workers", "out", "tol_a0", "tol_a1"},
}
_ROUTES = ("boundary", "projective", "both")


@dataclass(frozen=True)
class RunConfig:
	domain: ReinhardtDomain
	point: np.ndarray | None
	quadrature: QuadratureSpec
	k_min: int
	k_max: int
	route: str
	workers: int
	out: str | None
	tol_a0: float
	tol_a1: float

	def with_overrides(
		self,
		k_min=None,
		k_max=None,
		nodes=None,
		route=None,
		workers=None,
		out=None,
	) -> "RunConfig":
		cfg = self
		if nodes is not None:
			if nodes < 8:
				raise ConfigError("nodes must be at least 8")
			cfg = replace(
				cfg,
				quadrature=QuadratureSpec(
					nodes_per_dim=nodes,
					mapping=cfg.quadrature.mapping,
					refinement_levels=cfg.quadrature.refinement_levels,
					target_rel_tol=cfg.quadrature.target_rel_tol,
				),
			)
		if k_min is not None:
			cfg = replace(cfg, k_min=k_min)
		if k_max is not None:
			cfg = replace(cfg, k_max=k_max)
		if route is not None:
			if route not in _ROUTES:
				raise ConfigError(f"unknown route {route!r}")
			cfg = replace(cfg, route=route)
		if workers is not None:
			if workers < 1:
				raise ConfigError("workers must be at least 1")
			cfg = replace(cfg, workers=workers)
		if out is not None:
			cfg = replace(cfg, out=out)
		if not 1 <= cfg.k_min <= cfg.k_max:
			raise ConfigError("need 1 <= k_min <= k_max")
		return cfg

	def require_point(self) -> np.ndarray:
		if self.point is None:
			raise ConfigError("this command needs [point] x in the config")
		return self.point


def _parse_scalar(section: str, key: str, text: str, kind, check=None, what=""):
	try:
		value = kind(text)
	except (ValueError, ZeroDivisionError) as exc:
		raise ConfigError(f"[{section}] {key}: {exc}") from None
	if check is not None and not check(value):
		raise ConfigError(f"[{section}] {key} must be {what}, got {text!r}")
	return value


def load_config(path: str) -> RunConfig:
	parser = ConfigParser(interpolation=None)
	try:
		with open(path, encoding="utf-8") as handle:
			parser.read_file(handle)
	except OSError as exc:
		raise ConfigError(f"cannot read config {path!r}: {exc}") from None
	except IniError as exc:
		raise ConfigError(f"malformed config {path!r}: {exc}") from None
	for section in parser.sections():
		if section not in _SECTIONS:
			raise ConfigError(f"unknown section [{section}]")
		for key in parser[section]:
			if key not in _SECTIONS[section]:
				raise ConfigError(f"unknown key {key!r} in [{section}]")
	if "domain" not in parser:
		raise ConfigError("config needs a [domain] section")
	dom = parser["domain"]
	for key in ("n", "order", "rho"):
		if key not in dom:
			raise ConfigError(f"[domain] {key} is required")
	n = _parse_scalar("domain", "n", dom["n"], int, lambda v: v >= 1, ">= 1")
	order = _parse_scalar(
		"domain", "order", dom["order"], Fraction, lambda v: v > 0, "positive"
	)
	domain = ReinhardtDomain(n, order, dom["rho"], dom.get("weight"))

	point = None
	if "point" in parser and "x" in parser["point"]:
		tokens = [t.strip() for t in parser["point"]["x"].split(",")]
		point = np.array(
			[_parse_scalar("point", "x", t, complex) for t in tokens]
		)
		if len(point) != domain.nvar:
			raise ConfigError(
				f"[point] x has {len(point)} coordinates, domain needs {domain.nvar}"
			)

	quad = parser["quadrature"] if "quadrature" in parser else {}
	spec_kwargs = {}
	if "nodes" in quad:
		spec_kwargs["nodes_per_dim"] = _parse_scalar(
			"quadrature", "nodes", quad["nodes"], int, lambda v: v >= 8, ">= 8"
		)
	if "mapping" in quad:
		spec_kwargs["mapping"] = _parse_scalar(
			"quadrature",
			"mapping",
			quad["mapping"],
			str,
			lambda v: v in ("algebraic", "tangent"),
			"algebraic or tangent",
		)
	if "levels" in quad:
		spec_kwargs["refinement_levels"] = _parse_scalar(
			"quadrature", "levels", quad["levels"], int, lambda v: v >= 1, ">= 1"
		)
	if "tol" in quad:
		spec_kwargs["target_rel_tol"] = _parse_scalar(
			"quadrature", "tol", quad["tol"], float, lambda v: 0 < v < 1, "in (0, 1)"
		)
	quadrature = QuadratureSpec(**spec_kwargs)

	run = parser["run"] if "run" in parser else {}
	k_min = _parse_scalar("run", "k_min", run.get("k_min", "1"), int, lambda v: v >= 1, ">= 1")
	k_max = _parse_scalar("run", "k_max", run.get("k_max", "20"), int, lambda v: v >= 1, ">= 1")
	if k_min > k_max:
		raise ConfigError("need k_min <= k_max")
	route = run.get("route", "boundary")
	if route not in _ROUTES:
		raise ConfigError(f"unknown route {route!r}")
	workers = _parse_scalar("run", "workers", run.get("workers", "1"), int, lambda v: v >= 1, ">= 1")
	tol_a0 = _parse_scalar("run", "tol_a0", run.get("tol_a0", "0.02"), float, lambda v: 0 < v < 1, "in (0, 1)")
	tol_a1 = _parse_scalar("run", "tol_a1", run.get("tol_a1", "0.05"), float, lambda v: 0 < v < 1, "in (0, 1)")
	return RunConfig(
		domain,
		point,
		quadrature,
		k_min,
		k_max,
		route,
		workers,
		run.get("out"),
		tol_a0,
		tol_a1,
	)


def config_hash(cfg: RunConfig) -> str:
	"""Digest of everything that determines computed values."""
	payload = {
		"n": cfg.domain.n,
		"order": str(cfg.domain.order),
		"rho": print_expression(cfg.domain.rho),
		"weight": print_expression(cfg.domain.weight),
		"point": None
		if cfg.point is None
		else [repr(complex(v)) for v in cfg.point],
		"nodes": cfg.quadrature.nodes_per_dim,
		"mapping": cfg.quadrature.mapping,
		"levels": cfg.quadrature.refinement_levels,
		"tol": repr(cfg.quadrature.target_rel_tol),
		"k_min": cfg.k_min,
		"k_max": cfg.k_max,
		"route": cfg.route,
	}
	blob = json.dumps(payload, sort_keys=True).encode("utf-8")
	return hashlib.sha256(blob).hexdigest()[:16]
