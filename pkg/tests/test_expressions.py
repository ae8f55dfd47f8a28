import numpy as np
import pytest

from szegokernel.expressions import (
	Const,
	EvalDomainError,
	ParseError,
	check_homogeneity,
	const,
	differentiate,
	eval_jet2,
	evaluate,
	max_variable_index,
	parse_expression,
	power,
	print_expression,
	quotient,
	substitute,
	var,
)

CORPUS = [
	"m0^2 + m1^2",
	"m0^4 + m1^4 + m0^2*m1^2",
	"m0^2 + 4*m1^2",
	"sqrt(m0^2 + m1^2)",
	"exp(m1^2)",
	"log(1 + m0^2)",
	"m0^2*m1^2/(m0^2 + m1^2)",
	"(m0 + m1)^(3/2)",
	"m0^-2 + m1^(-3/2)",
	"1/(2*sqrt(m0)) - m1/m0^2",
	"2.5e-3*m0 + 0.125",
]


def test_round_trip_is_fixed_point():
	for text in CORPUS:
		tree = parse_expression(text)
		printed = print_expression(tree)
		again = parse_expression(printed)
		assert again == tree
		assert print_expression(again) == printed


def test_parse_matches_hand_built_tree():
	tree = parse_expression("m0^2 + 4*m1^2")
	from szegokernel.expressions import Product, Sum, Var

	assert isinstance(tree, Sum)
	assert tree.terms[0] == power(var(0), 2)
	assert isinstance(tree.terms[1], Product)
	assert tree.terms[1].factors[0] == Const(4.0)
	assert tree.terms[1].factors[1] == power(var(1), 2)
	assert isinstance(tree.terms[1].factors[1].base, Var)


@pytest.mark.parametrize(
	"text,offset",
	[
		("m0^(2", 5),
		("m0 + * m1", 5),
		("q0 + m1", 0),
		("m0^2.5", 3),
		("sqrt 2", 5),
		("m0^(1/0)", 6),
		("m0*", 3),
		("(m0 + m1", 8),
		("m0 $ m1", 3),
	],
)
def test_parse_errors_carry_offsets(text, offset):
	with pytest.raises(ParseError) as err:
		parse_expression(text)
	assert err.value.offset == offset


def test_variable_bound_enforced():
	assert parse_expression("m1^2", var_count=2) == power(var(1), 2)
	with pytest.raises(ParseError) as err:
		parse_expression("m0^2 + m3^2", var_count=2)
	assert err.value.offset == 7


def test_negative_constant_folds_at_parse_time():
	with pytest.raises(ParseError):
		parse_expression("log(0 - 1)")
	with pytest.raises(ParseError):
		parse_expression("sqrt(0 - 2)")
	with pytest.raises(ParseError):
		parse_expression("(0 - 1)^(1/2)")


def test_repeated_derivative_collapses_to_constant():
	tree = parse_expression("m0^4")
	for _ in range(4):
		tree = differentiate(tree, 0)
	assert tree == Const(24.0)
	assert differentiate(tree, 0) == Const(0.0)


def test_quotient_derivative_prints_and_reparses():
	tree = quotient(const(1.0), var(0))
	d = differentiate(tree, 0)
	printed = print_expression(d)
	assert parse_expression(printed) == d
	assert evaluate(d, [2.0]) == pytest.approx(-0.25)


def test_vectorized_evaluation_matches_pointwise():
	rng = np.random.default_rng(41)
	points = rng.uniform(0.3, 1.7, size=(2, 64))
	for text in CORPUS:
		tree = parse_expression(text)
		batch = evaluate(tree, points)
		assert batch.shape == (64,)
		for col in range(0, 64, 17):
			single = evaluate(tree, points[:, col])
			assert batch[col] == pytest.approx(single, rel=1e-14)


def test_evaluation_domain_errors():
	with pytest.raises(EvalDomainError):
		evaluate(parse_expression("log(m0)"), [-1.0])
	with pytest.raises(EvalDomainError):
		evaluate(parse_expression("sqrt(m0)"), [-0.5])
	with pytest.raises(EvalDomainError):
		evaluate(parse_expression("1/m0"), [0.0])
	with pytest.raises(EvalDomainError):
		evaluate(parse_expression("m0^(1/2)"), [-2.0])
	with pytest.raises(EvalDomainError):
		evaluate(parse_expression("m0^-2"), [0.0])


def test_jet_gradient_matches_symbolic_derivatives():
	rng = np.random.default_rng(1903)
	for text in CORPUS:
		tree = parse_expression(text)
		nvar = max_variable_index(tree) + 1
		if nvar == 0:
			continue
		points = rng.uniform(0.4, 1.6, size=(nvar, 8))
		jet = eval_jet2(tree, points)
		assert jet.value == pytest.approx(evaluate(tree, points), rel=1e-13)
		for i in range(nvar):
			di = differentiate(tree, i)
			assert jet.gradient[i] == pytest.approx(
				evaluate(di, points), rel=1e-12, abs=1e-12
			)
			for j in range(i, nvar):
				dij = differentiate(di, j)
				slot = jet.pair_slot(i, j)
				assert jet.hessian[slot] == pytest.approx(
					evaluate(dij, points), rel=1e-11, abs=1e-11
				)


def test_jet_hessian_matches_finite_differences():
	rng = np.random.default_rng(52)
	tree = parse_expression("sqrt(m0^4 + m1^4 + m0^2*m1^2)*exp(m1^2)/m0")
	for _ in range(10):
		p = rng.uniform(0.5, 1.5, size=2)
		jet = eval_jet2(tree, p)
		h = 1e-5
		full = jet.hessian_matrix()
		assert full == pytest.approx(full.T)
		for i in range(2):
			for j in range(2):
				pp = p.copy()
				pp[i] += h
				pp[j] += h
				pm = p.copy()
				pm[i] += h
				pm[j] -= h
				mp = p.copy()
				mp[i] -= h
				mp[j] += h
				mm = p.copy()
				mm[i] -= h
				mm[j] -= h
				fd = (
					evaluate(tree, pp)
					- evaluate(tree, pm)
					- evaluate(tree, mp)
					+ evaluate(tree, mm)
				) / (4 * h * h)
				assert full[i, j] == pytest.approx(fd, rel=2e-4, abs=2e-4)


def test_substitute_restricts_to_chart():
	tree = parse_expression("m0^2*m1^2 + m0^4")
	chart = substitute(tree, [const(1.0), var(1)])
	assert chart == parse_expression("m1^2 + 1")
	assert evaluate(chart, [9.0, 2.0]) == pytest.approx(5.0)


def test_substitute_composes():
	tree = parse_expression("m0^2 + m1^2")
	scaled = substitute(tree, [parse_expression("2*m0"), parse_expression("2*m1")])
	assert evaluate(scaled, [0.3, 0.4]) == pytest.approx(4 * 0.25)


def test_homogeneity_check():
	assert check_homogeneity(parse_expression("m0^4 + m0^2*m1^2"), 4.0)
	assert check_homogeneity(
		parse_expression("m0^2*m1^2/(m0^2 + m1^2)"), 2.0
	)
	assert check_homogeneity(parse_expression("sqrt(m0^2 + m1^2)"), 1.0)
	bad = check_homogeneity(parse_expression("m0^2 + m1^3"), 2.0)
	assert not bad
	assert bad.max_rel_err > 1e-3


def test_known_hessian_entries():
	tree = parse_expression("m0^2*m1")
	jet = eval_jet2(tree, [1.5, 0.7])
	full = jet.hessian_matrix()
	assert full[0, 0] == pytest.approx(2 * 0.7)
	assert full[0, 1] == pytest.approx(2 * 1.5)
	assert full[1, 1] == pytest.approx(0.0)


def test_printer_handles_signs_inside_sums():
	d = differentiate(parse_expression("m0^2 - m1^2"), 1)
	printed = print_expression(d)
	assert parse_expression(printed) == d
	assert evaluate(d, [0.0, 3.0]) == pytest.approx(-6.0)
