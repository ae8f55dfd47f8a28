"""Command line front end.

Every subcommand reads the same INI config (see config.py) and accepts a
small set of overrides.  Outputs are deterministic: CSV tables carry '#'
metadata lines with the tool version and config hash, JSON reports are
stable under rerunning, and the worker count never changes a number.

Exit codes: 0 success, 1 a validation or verification failed, 2 bad
usage, config, or geometry, 3 quadrature did not converge.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .asymptotics import closed_coefficients, verify_expansion
from .config import ConfigError, config_hash, load_config
from .domains import GeometryError, validate_domain
from .expressions import print_expression
from .kernels import build_norm_table, partial_szego
from .measure import QuadratureError

__all__ = ["main"]


def _load(args) -> tuple:
	cfg = load_config(args.config)
	cfg = cfg.with_overrides(
		k_min=args.k_min,
		k_max=args.k_max,
		nodes=args.nodes,
		route=args.route,
		workers=args.workers,
		out=args.out,
	)
	return cfg, config_hash(cfg)


def _emit(text: str, out_path) -> None:
	if out_path:
		with open(out_path, "w", encoding="utf-8") as handle:
			handle.write(text)
	else:
		sys.stdout.write(text)


def _metadata(cfg, digest: str, route: str) -> list:
	d = cfg.domain
	q = cfg.quadrature
	return [
		f"# szegokernel {__version__}",
		f"# config_hash = {digest}",
		f"# domain: n = {d.n}, order = {d.order}, rho = {print_expression(d.rho)}, "
		f"weight = {print_expression(d.weight)}",
		f"# route = {route}",
		f"# quadrature: nodes = {q.nodes_per_dim}, mapping = {q.mapping}, "
		f"levels = {q.refinement_levels}, tol = {q.target_rel_tol!r}",
	]


def _single_route(cfg) -> str:
	if cfg.route == "both":
		raise ConfigError(
			"route 'both' only applies to verify; pick boundary or projective"
		)
	return cfg.route


def _cached_output_current(out_path, digest: str) -> bool:
	if not out_path or not os.path.exists(out_path):
		return False
	marker = f"# config_hash = {digest}"
	try:
		with open(out_path, encoding="utf-8") as handle:
			return any(line.rstrip("\n") == marker for _, line in zip(range(8), handle))
	except OSError:
		return False


def _cmd_validate(args) -> int:
	cfg, _ = _load(args)
	report = validate_domain(cfg.domain)
	lines = []
	for check in report.checks:
		status = "ok" if check.passed else "FAIL"
		detail = f" ({check.detail})" if check.detail else ""
		lines.append(f"{check.name}: {status}{detail}")
	lines.append("domain valid" if report.ok else "domain invalid")
	_emit("\n".join(lines) + "\n", cfg.out)
	return 0 if report.ok else 1


def _cmd_norms(args) -> int:
	cfg, digest = _load(args)
	route = _single_route(cfg)
	if _cached_output_current(cfg.out, digest):
		sys.stdout.write(f"{cfg.out} is current (config_hash {digest}); skipping\n")
		return 0
	header = ["k"] + [f"j{i}" for i in range(cfg.domain.nvar)] + [
		"norm",
		"log_norm",
		"rel_err",
	]
	rows = [",".join(header)]
	for k in range(cfg.k_min, cfg.k_max + 1):
		table = build_norm_table(cfg.domain, k, cfg.quadrature, route)
		if not table.complete:
			raise QuadratureError(
				f"monomial norms at degree {k} did not meet the tolerance"
			)
		for slot, index in enumerate(table.indices):
			log_norm = float(table.log_norms[slot])
			rows.append(
				",".join(
					[str(k)]
					+ [str(j) for j in index]
					+ [
						repr(math.exp(log_norm)),
						repr(log_norm),
						repr(float(table.rel_errs[slot])),
					]
				)
			)
	text = "\n".join(_metadata(cfg, digest, route) + rows) + "\n"
	_emit(text, cfg.out)
	return 0


def _cmd_szego(args) -> int:
	cfg, digest = _load(args)
	route = _single_route(cfg)
	point = cfg.require_point()
	rows = ["k,value"]
	for k in range(cfg.k_min, cfg.k_max + 1):
		table = build_norm_table(cfg.domain, k, cfg.quadrature, route)
		if not table.complete:
			raise QuadratureError(
				f"monomial norms at degree {k} did not meet the tolerance"
			)
		rows.append(f"{k},{partial_szego(cfg.domain, k, point, table)!r}")
	text = "\n".join(_metadata(cfg, digest, route) + rows) + "\n"
	_emit(text, cfg.out)
	return 0


def _cmd_coeffs(args) -> int:
	cfg, digest = _load(args)
	point = cfg.require_point()
	m = cfg.domain.boundary_projection(cfg.domain.moduli(point))
	coeffs = closed_coefficients(cfg.domain, m)
	data = {
		"tool_version": __version__,
		"config_hash": digest,
		"moduli": [float(v) for v in m],
		"a0": coeffs.a0,
		"a1": coeffs.a1,
		"power": coeffs.power,
	}
	_emit(json.dumps(data, indent=2) + "\n", cfg.out)
	return 0


def _cmd_verify(args) -> int:
	cfg, digest = _load(args)
	point = cfg.require_point()
	routes = ["boundary", "projective"] if cfg.route == "both" else [cfg.route]
	reports = {}
	for route in routes:
		reports[route] = verify_expansion(
			cfg.domain,
			point,
			cfg.k_min,
			cfg.k_max,
			cfg.quadrature,
			route=route,
			workers=cfg.workers,
		)
	consistency = None
	if len(routes) == 2:
		a = reports["boundary"].values
		b = reports["projective"].values
		consistency = max(
			abs(x - y) / max(abs(x), abs(y)) for x, y in zip(a, b)
		)
	ok = all(
		r.rel_a0 <= cfg.tol_a0 and r.rel_a1 <= cfg.tol_a1
		for r in reports.values()
	)
	data = {
		"tool_version": __version__,
		"config_hash": digest,
		"tolerances": {"a0": cfg.tol_a0, "a1": cfg.tol_a1},
		"reports": {route: reports[route].to_dict() for route in routes},
		"route_consistency": consistency,
		"pass": ok,
	}
	_emit(json.dumps(data, indent=2) + "\n", cfg.out)
	return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(
		prog="szegokernel",
		description="monomial norms, partial kernel sums, and their expansion",
	)
	parser.add_argument(
		"--version", action="version", version=f"%(prog)s {__version__}"
	)
	subs = parser.add_subparsers(dest="command", required=True)
	commands = [
		("validate", _cmd_validate, "check a domain definition"),
		("norms", _cmd_norms, "monomial norm table as CSV"),
		("szego", _cmd_szego, "partial kernel sums at the config point"),
		("coeffs", _cmd_coeffs, "closed-form expansion coefficients"),
		("verify", _cmd_verify, "fit the expansion and compare to closed forms"),
	]
	for name, handler, text in commands:
		sub = subs.add_parser(name, help=text)
		sub.add_argument("config", help="path to the INI config")
		sub.add_argument("--k-min", type=int, dest="k_min")
		sub.add_argument("--k-max", type=int, dest="k_max")
		sub.add_argument("--nodes", type=int)
		sub.add_argument("--route", choices=["boundary", "projective", "both"])
		sub.add_argument("--workers", type=int)
		sub.add_argument("--out")
		sub.set_defaults(handler=handler)
	return parser


def main(argv=None) -> int:
	args = _build_parser().parse_args(argv)
	try:
		return args.handler(args)
	except QuadratureError as exc:
		print(f"error: {exc}", file=sys.stderr)
		return 3
	except (ValueError, GeometryError) as exc:
		# ConfigError, ParseError, DomainDefinitionError and bad points all
		# land here; anything else is a bug and should raise
		print(f"error: {exc}", file=sys.stderr)
		return 2


if __name__ == "__main__":
	sys.exit(main())
