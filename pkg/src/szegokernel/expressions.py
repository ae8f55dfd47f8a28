"""Symbolic expressions in the moduli variables m0, m1, ...

A domain is described by a smooth function of the moduli |x_i|, so the
whole pipeline runs on a small expression language:

    expr     := term (("+" | "-") term)*
    term     := factor (("*" | "/") factor)*
    factor   := base ("^" exponent)?
    base     := number | variable | "(" expr ")" | func "(" expr ")"
    variable := "m" digits
    func     := "sqrt" | "exp" | "log"
    exponent := integer | "(" integer "/" positive_integer ")"

Exponents are rational and reduced to lowest terms, so exact symbolic
differentiation stays closed under the grammar.  Smart constructors fold
constants; no other simplification is attempted, which keeps printing a
fixed point of parse -> print -> parse.

Evaluation is vectorized over trailing axes of the value array, and
`eval_jet2` propagates value, gradient and the (packed symmetric) Hessian
in one pass for second-order geometry without finite differences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ParseError",
    "EvalDomainError",
    "Expression",
    "Const",
    "Var",
    "Sum",
    "Product",
    "Quotient",
    "Power",
    "Call",
    "JetValue",
    "parse_expression",
    "print_expression",
    "differentiate",
    "evaluate",
    "eval_jet2",
    "substitute",
    "check_homogeneity",
    "max_variable_index",
]


class ParseError(ValueError):
	"""Raised on malformed expression text; carries the byte offset."""

	def __init__(self, message: str, offset: int):
		super().__init__(f"{message} (offset {offset})")
		self.offset = offset


class EvalDomainError(ArithmeticError):
	"""Raised when evaluation leaves the real domain (log of a
	non-positive value, fractional power of a negative base, division
	by zero)."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Expression:
	def __str__(self) -> str:
		return print_expression(self)


@dataclass(frozen=True)
class Const(Expression):
	value: float


@dataclass(frozen=True)
class Var(Expression):
	index: int


@dataclass(frozen=True)
class Sum(Expression):
	terms: tuple


@dataclass(frozen=True)
class Product(Expression):
	factors: tuple


@dataclass(frozen=True)
class Quotient(Expression):
	numerator: Expression
	denominator: Expression


@dataclass(frozen=True)
class Power(Expression):
	base: Expression
	exponent: Fraction


@dataclass(frozen=True)
class Call(Expression):
	name: str  # "sqrt" | "exp" | "log"
	argument: Expression


_FUNCTIONS = ("sqrt", "exp", "log")


# ---------------------------------------------------------------------------
# Smart constructors.  All construction goes through these so constant
# subtrees collapse eagerly and the printer sees a canonical shape.


def const(value: float) -> Const:
	v = float(value)
	if v == 0.0:
		v = 0.0  # normalize -0.0
	return Const(v)


def var(index: int) -> Var:
	if index < 0:
		raise ValueError("variable index must be nonnegative")
	return Var(index)


def sum_of(terms: Sequence[Expression]) -> Expression:
	flat: list[Expression] = []
	const_total = 0.0
	for t in terms:
		if isinstance(t, Sum):
			sub = t.terms
		else:
			sub = (t,)
		for s in sub:
			if isinstance(s, Const):
				const_total += s.value
			else:
				flat.append(s)
	if const_total != 0.0 or not flat:
		flat.append(const(const_total))
	if len(flat) == 1:
		return flat[0]
	return Sum(tuple(flat))


def product_of(factors: Sequence[Expression]) -> Expression:
	flat: list[Expression] = []
	const_total = 1.0
	for f in factors:
		if isinstance(f, Product):
			sub = f.factors
		else:
			sub = (f,)
		for s in sub:
			if isinstance(s, Const):
				const_total *= s.value
			else:
				flat.append(s)
	if const_total == 0.0:
		return const(0.0)
	if const_total != 1.0 or not flat:
		flat.insert(0, const(const_total))
	if len(flat) == 1:
		return flat[0]
	return Product(tuple(flat))


def negate(e: Expression) -> Expression:
	return product_of((const(-1.0), e))


def quotient(numerator: Expression, denominator: Expression) -> Expression:
	if isinstance(denominator, Const):
		if denominator.value == 0.0:
			raise EvalDomainError("division by constant zero")
		if isinstance(numerator, Const):
			return const(numerator.value / denominator.value)
		if denominator.value == 1.0:
			return numerator
	if isinstance(numerator, Const) and numerator.value == 0.0:
		return const(0.0)
	return Quotient(numerator, denominator)


def power(base: Expression, exponent) -> Expression:
	q = exponent if isinstance(exponent, Fraction) else Fraction(exponent)
	if q == 0:
		return const(1.0)
	if q == 1:
		return base
	if isinstance(base, Const):
		v = base.value
		if v > 0.0 or (q.denominator == 1 and (v != 0.0 or q > 0)):
			return const(v ** float(q) if v > 0.0 else v ** int(q))
		if v == 0.0 and q > 0:
			return const(0.0)
		raise EvalDomainError(f"cannot raise constant {v} to power {q}")
	return Power(base, q)


def call(name: str, argument: Expression) -> Expression:
	if name not in _FUNCTIONS:
		raise ValueError(f"unknown function {name!r}")
	if isinstance(argument, Const):
		v = argument.value
		if name == "sqrt":
			if v < 0.0:
				raise EvalDomainError("sqrt of negative constant")
			return const(v ** 0.5)
		if name == "exp":
			return const(float(np.exp(v)))
		if v <= 0.0:
			raise EvalDomainError("log of non-positive constant")
		return const(float(np.log(v)))
	return Call(name, argument)


# ---------------------------------------------------------------------------
# Parsing


_TOKEN_RE = re.compile(
	r"""
	(?P<ws>\s+)
	| (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
	| (?P<name>[A-Za-z_][A-Za-z_0-9]*)
	| (?P<op>[-+*/^()])
	""",
	re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
	kind: str  # "number" | "name" | "op" | "end"
	text: str
	offset: int


def _tokenize(text: str) -> list[_Token]:
	tokens: list[_Token] = []
	pos = 0
	while pos < len(text):
		match = _TOKEN_RE.match(text, pos)
		if match is None:
			raise ParseError(f"unexpected character {text[pos]!r}", pos)
		kind = match.lastgroup
		if kind != "ws":
			tokens.append(_Token(kind, match.group(), pos))
		pos = match.end()
	tokens.append(_Token("end", "", len(text)))
	return tokens


class _Parser:
	def __init__(self, text: str, var_count: int | None):
		self.text = text
		self.tokens = _tokenize(text)
		self.pos = 0
		self.var_count = var_count

	def peek(self) -> _Token:
		return self.tokens[self.pos]

	def advance(self) -> _Token:
		tok = self.tokens[self.pos]
		self.pos += 1
		return tok

	def expect_op(self, op: str) -> _Token:
		tok = self.peek()
		if tok.kind != "op" or tok.text != op:
			raise ParseError(f"expected {op!r}", tok.offset)
		return self.advance()

	def parse(self) -> Expression:
		expr = self.parse_expr()
		tok = self.peek()
		if tok.kind != "end":
			raise ParseError(f"unexpected trailing input {tok.text!r}", tok.offset)
		return expr

	def parse_expr(self) -> Expression:
		terms = [self.parse_term()]
		while True:
			tok = self.peek()
			if tok.kind == "op" and tok.text in "+-":
				self.advance()
				rhs = self.parse_term()
				terms.append(rhs if tok.text == "+" else negate(rhs))
			else:
				return sum_of(terms)

	def parse_term(self) -> Expression:
		result = self.parse_factor()
		while True:
			tok = self.peek()
			if tok.kind == "op" and tok.text in "*/":
				self.advance()
				rhs = self.parse_factor()
				if tok.text == "*":
					result = product_of((result, rhs))
				else:
					try:
						result = quotient(result, rhs)
					except EvalDomainError:
						raise ParseError("division by zero", tok.offset) from None
			else:
				return result

	def parse_factor(self) -> Expression:
		base = self.parse_base()
		tok = self.peek()
		if tok.kind == "op" and tok.text == "^":
			self.advance()
			exponent = self.parse_exponent()
			try:
				return power(base, exponent)
			except EvalDomainError as exc:
				raise ParseError(str(exc), tok.offset) from None
		return base

	def parse_base(self) -> Expression:
		tok = self.advance()
		if tok.kind == "number":
			return const(float(tok.text))
		if tok.kind == "name":
			if re.fullmatch(r"m\d+", tok.text):
				index = int(tok.text[1:])
				if self.var_count is not None and index >= self.var_count:
					raise ParseError(
						f"variable m{index} out of range (expected < m{self.var_count})",
						tok.offset,
					)
				return var(index)
			if tok.text in _FUNCTIONS:
				self.expect_op("(")
				argument = self.parse_expr()
				self.expect_op(")")
				try:
					return call(tok.text, argument)
				except EvalDomainError as exc:
					raise ParseError(str(exc), tok.offset) from None
			raise ParseError(f"unknown identifier {tok.text!r}", tok.offset)
		if tok.kind == "op" and tok.text == "(":
			expr = self.parse_expr()
			self.expect_op(")")
			return expr
		raise ParseError(f"expected a value, found {tok.text or 'end of input'!r}", tok.offset)

	def parse_signed_integer(self) -> int:
		sign = 1
		tok = self.peek()
		if tok.kind == "op" and tok.text in "+-":
			self.advance()
			if tok.text == "-":
				sign = -1
			tok = self.peek()
		if tok.kind != "number":
			raise ParseError("expected an integer exponent", tok.offset)
		if "." in tok.text or "e" in tok.text or "E" in tok.text:
			raise ParseError("exponent must be an integer", tok.offset)
		self.advance()
		return sign * int(tok.text)

	def parse_exponent(self) -> Fraction:
		tok = self.peek()
		if tok.kind == "op" and tok.text == "(":
			self.advance()
			numerator = self.parse_signed_integer()
			self.expect_op("/")
			den_tok = self.peek()
			denominator = self.parse_signed_integer()
			if denominator <= 0:
				raise ParseError("exponent denominator must be positive", den_tok.offset)
			self.expect_op(")")
			return Fraction(numerator, denominator)
		return Fraction(self.parse_signed_integer())


def parse_expression(text: str, var_count: int | None = None) -> Expression:
	"""Parse `text` into an Expression.

	`var_count`, when given, bounds the admissible variable indices, so a
	domain over (m0, ..., mn) rejects stray variables at parse time.
	"""
	return _Parser(text, var_count).parse()


# ---------------------------------------------------------------------------
# Printing.  The printer emits only grammar-valid text and is a fixed
# point: parse(print(e)) == e for every constructor-built e.  Negative
# values have no literal form, so they print as "(0 - x)" except inside
# sums, where the sign folds into the separator.

_PREC_SUM = 0
_PREC_TERM = 1
_PREC_FACTOR = 2


def _format_const(v: float) -> str:
	if v == int(v) and abs(v) < 1e16:
		return str(int(v))
	return repr(v)


def _split_sign(e: Expression):
	if isinstance(e, Const) and e.value < 0.0:
		return -1, const(-e.value)
	if isinstance(e, Product):
		head = e.factors[0]
		if isinstance(head, Const) and head.value < 0.0:
			return -1, product_of((const(-head.value),) + e.factors[1:])
	return 1, e


def _print(e: Expression, prec: int) -> str:
	if isinstance(e, Const):
		if e.value < 0.0:
			return f"(0 - {_format_const(-e.value)})"
		return _format_const(e.value)
	if isinstance(e, Var):
		return f"m{e.index}"
	if isinstance(e, Sum):
		parts: list[str] = []
		for i, term in enumerate(e.terms):
			sign, body = _split_sign(term)
			text = _print(body, _PREC_TERM)
			if i == 0:
				parts.append(f"0 - {text}" if sign < 0 else text)
			else:
				parts.append(f" - {text}" if sign < 0 else f" + {text}")
		out = "".join(parts)
		return f"({out})" if prec > _PREC_SUM else out
	if isinstance(e, Product):
		sign, body = _split_sign(e)
		if sign < 0:
			return f"(0 - {_print(body, _PREC_TERM)})"
		out = "*".join(_print(f, _PREC_FACTOR) for f in e.factors)
		return f"({out})" if prec > _PREC_TERM else out
	if isinstance(e, Quotient):
		num = _print(e.numerator, _PREC_TERM)
		den = _print(e.denominator, _PREC_FACTOR)
		out = f"{num}/{den}"
		return f"({out})" if prec > _PREC_TERM else out
	if isinstance(e, Power):
		if isinstance(e.base, Power):
			base = f"({_print(e.base, _PREC_SUM)})"
		else:
			base = _print(e.base, _PREC_FACTOR)
		q = e.exponent
		exp = str(q.numerator) if q.denominator == 1 else f"({q.numerator}/{q.denominator})"
		return f"{base}^{exp}"
	if isinstance(e, Call):
		return f"{e.name}({_print(e.argument, _PREC_SUM)})"
	raise TypeError(f"not an expression: {e!r}")


def print_expression(e: Expression) -> str:
	return _print(e, _PREC_SUM)


# ---------------------------------------------------------------------------
# Differentiation


def differentiate(e: Expression, index: int) -> Expression:
	"""Exact partial derivative with respect to m<index>."""
	if isinstance(e, Const):
		return const(0.0)
	if isinstance(e, Var):
		return const(1.0 if e.index == index else 0.0)
	if isinstance(e, Sum):
		return sum_of([differentiate(t, index) for t in e.terms])
	if isinstance(e, Product):
		terms = []
		for i, f in enumerate(e.factors):
			df = differentiate(f, index)
			if isinstance(df, Const) and df.value == 0.0:
				continue
			rest = e.factors[:i] + e.factors[i + 1 :]
			terms.append(product_of((df,) + rest))
		return sum_of(terms)
	if isinstance(e, Quotient):
		da = differentiate(e.numerator, index)
		db = differentiate(e.denominator, index)
		num = sum_of(
			(
				product_of((da, e.denominator)),
				negate(product_of((e.numerator, db))),
			)
		)
		return quotient(num, power(e.denominator, 2))
	if isinstance(e, Power):
		du = differentiate(e.base, index)
		if isinstance(du, Const) and du.value == 0.0:
			return const(0.0)
		return product_of(
			(const(float(e.exponent)), power(e.base, e.exponent - 1), du)
		)
	if isinstance(e, Call):
		du = differentiate(e.argument, index)
		if isinstance(du, Const) and du.value == 0.0:
			return const(0.0)
		if e.name == "sqrt":
			return quotient(du, product_of((const(2.0), call("sqrt", e.argument))))
		if e.name == "exp":
			return product_of((call("exp", e.argument), du))
		return quotient(du, e.argument)
	raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation


def _check(cond: bool, message: str):
	if not cond:
		raise EvalDomainError(message)


def _eval(e: Expression, values: np.ndarray):
	if isinstance(e, Const):
		return e.value
	if isinstance(e, Var):
		if e.index >= values.shape[0]:
			raise ValueError(
				f"expression references m{e.index} but only {values.shape[0]} values were given"
			)
		return values[e.index]
	if isinstance(e, Sum):
		result = _eval(e.terms[0], values)
		for t in e.terms[1:]:
			result = result + _eval(t, values)
		return result
	if isinstance(e, Product):
		result = _eval(e.factors[0], values)
		for f in e.factors[1:]:
			result = result * _eval(f, values)
		return result
	if isinstance(e, Quotient):
		num = _eval(e.numerator, values)
		den = _eval(e.denominator, values)
		_check(bool(np.all(den != 0.0)), "division by zero")
		return num / den
	if isinstance(e, Power):
		base = _eval(e.base, values)
		q = e.exponent
		if q.denominator == 1:
			p = int(q)
			if p < 0:
				_check(bool(np.all(base != 0.0)), "zero base with negative exponent")
			return base ** p
		_check(bool(np.all(base >= 0.0)), f"negative base with exponent {q}")
		if q < 0:
			_check(bool(np.all(base != 0.0)), "zero base with negative exponent")
		return base ** float(q)
	if isinstance(e, Call):
		arg = _eval(e.argument, values)
		if e.name == "sqrt":
			_check(bool(np.all(arg >= 0.0)), "sqrt of negative value")
			return np.sqrt(arg)
		if e.name == "exp":
			return np.exp(arg)
		_check(bool(np.all(arg > 0.0)), "log of non-positive value")
		return np.log(arg)
	raise TypeError(f"not an expression: {e!r}")


def evaluate(e: Expression, values) -> float | np.ndarray:
	"""Evaluate at `values` of shape (nvar,) -> float, or (nvar, ...) -> array."""
	arr = np.asarray(values, dtype=float)
	result = _eval(e, arr)
	if arr.ndim == 1:
		return float(result)
	if np.isscalar(result) or np.ndim(result) == 0:
		return np.full(arr.shape[1:], float(result))
	return np.asarray(result, dtype=float)


# ---------------------------------------------------------------------------
# Order-2 jets.  The Hessian is stored once per unordered pair in the
# order (0,0), (0,1), ..., (0,n), (1,1), ..., so symmetry is structural.


def _pair_indices(nvar: int):
	rows = []
	cols = []
	for i in range(nvar):
		for j in range(i, nvar):
			rows.append(i)
			cols.append(j)
	return np.array(rows), np.array(cols)


_PAIR_CACHE: dict[int, tuple] = {}


def _pairs(nvar: int):
	if nvar not in _PAIR_CACHE:
		_PAIR_CACHE[nvar] = _pair_indices(nvar)
	return _PAIR_CACHE[nvar]


@dataclass
class JetValue:
	"""Value, gradient and packed symmetric Hessian of a scalar quantity."""

	nvar: int
	value: np.ndarray
	gradient: np.ndarray  # shape (nvar,) + tail
	hessian: np.ndarray  # shape (nvar*(nvar+1)//2,) + tail

	@classmethod
	def constant(cls, value, nvar: int, tail: tuple = ()) -> "JetValue":
		npairs = nvar * (nvar + 1) // 2
		return cls(
			nvar,
			np.full(tail, float(value)) if tail else np.float64(value),
			np.zeros((nvar,) + tail),
			np.zeros((npairs,) + tail),
		)

	@classmethod
	def variable(cls, index: int, value, nvar: int) -> "JetValue":
		v = np.asarray(value, dtype=float)
		jet = cls.constant(0.0, nvar, v.shape)
		jet.value = v.copy()
		jet.gradient[index] = 1.0
		return jet

	def pair_slot(self, i: int, j: int) -> int:
		if i > j:
			i, j = j, i
		return i * self.nvar - (i * (i - 1)) // 2 + (j - i)

	def hessian_matrix(self) -> np.ndarray:
		rows, cols = _pairs(self.nvar)
		tail = np.shape(self.value)
		full = np.zeros((self.nvar, self.nvar) + tail)
		full[rows, cols] = self.hessian
		full[cols, rows] = self.hessian
		return full

	def __add__(self, other: "JetValue") -> "JetValue":
		return JetValue(
			self.nvar,
			self.value + other.value,
			self.gradient + other.gradient,
			self.hessian + other.hessian,
		)

	def __sub__(self, other: "JetValue") -> "JetValue":
		return JetValue(
			self.nvar,
			self.value - other.value,
			self.gradient - other.gradient,
			self.hessian - other.hessian,
		)

	def __mul__(self, other: "JetValue") -> "JetValue":
		rows, cols = _pairs(self.nvar)
		cross = self.gradient[rows] * other.gradient[cols]
		cross = cross + self.gradient[cols] * other.gradient[rows]
		return JetValue(
			self.nvar,
			self.value * other.value,
			self.gradient * other.value + other.gradient * self.value,
			self.hessian * other.value + other.hessian * self.value + cross,
		)

	def chain(self, f0, f1, f2) -> "JetValue":
		"""Compose with a scalar map given by value/first/second derivative
		at self.value."""
		rows, cols = _pairs(self.nvar)
		outer = self.gradient[rows] * self.gradient[cols]
		return JetValue(
			self.nvar,
			f0,
			f1 * self.gradient,
			f1 * self.hessian + f2 * outer,
		)

	def reciprocal(self) -> "JetValue":
		v = self.value
		_check(bool(np.all(v != 0.0)), "division by zero")
		return self.chain(1.0 / v, -1.0 / v ** 2, 2.0 / v ** 3)

	def __truediv__(self, other: "JetValue") -> "JetValue":
		return self * other.reciprocal()

	def pow_rational(self, q: Fraction) -> "JetValue":
		v = self.value
		if q.denominator == 1:
			p = int(q)
			if p < 0:
				_check(bool(np.all(v != 0.0)), "zero base with negative exponent")
			return self.chain(
				v ** p, p * v ** (p - 1) if p != 0 else np.zeros_like(v), p * (p - 1) * v ** (p - 2) if p not in (0, 1) else np.zeros_like(v)
			)
		_check(bool(np.all(v > 0.0)), f"non-positive base with exponent {q}")
		fq = float(q)
		return self.chain(v ** fq, fq * v ** (fq - 1.0), fq * (fq - 1.0) * v ** (fq - 2.0))


def eval_jet2(e: Expression, values) -> JetValue:
	"""Value, gradient and Hessian of `e` at `values` (vectorized like
	`evaluate`)."""
	arr = np.asarray(values, dtype=float)
	nvar = arr.shape[0]
	tail = arr.shape[1:]
	return _eval_jet(e, arr, nvar, tail)


def _eval_jet(e: Expression, arr: np.ndarray, nvar: int, tail: tuple) -> JetValue:
	if isinstance(e, Const):
		return JetValue.constant(e.value, nvar, tail)
	if isinstance(e, Var):
		if e.index >= nvar:
			raise ValueError(
				f"expression references m{e.index} but only {nvar} values were given"
			)
		return JetValue.variable(e.index, arr[e.index], nvar)
	if isinstance(e, Sum):
		result = _eval_jet(e.terms[0], arr, nvar, tail)
		for t in e.terms[1:]:
			result = result + _eval_jet(t, arr, nvar, tail)
		return result
	if isinstance(e, Product):
		result = _eval_jet(e.factors[0], arr, nvar, tail)
		for f in e.factors[1:]:
			result = result * _eval_jet(f, arr, nvar, tail)
		return result
	if isinstance(e, Quotient):
		num = _eval_jet(e.numerator, arr, nvar, tail)
		den = _eval_jet(e.denominator, arr, nvar, tail)
		return num / den
	if isinstance(e, Power):
		return _eval_jet(e.base, arr, nvar, tail).pow_rational(e.exponent)
	if isinstance(e, Call):
		jet = _eval_jet(e.argument, arr, nvar, tail)
		v = jet.value
		if e.name == "sqrt":
			_check(bool(np.all(v > 0.0)), "sqrt jet at non-positive value")
			s = np.sqrt(v)
			return jet.chain(s, 0.5 / s, -0.25 / (s * v))
		if e.name == "exp":
			ev = np.exp(v)
			return jet.chain(ev, ev, ev)
		_check(bool(np.all(v > 0.0)), "log of non-positive value")
		return jet.chain(np.log(v), 1.0 / v, -1.0 / v ** 2)
	raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Structural helpers


def substitute(e: Expression, replacements: Sequence[Expression]) -> Expression:
	"""Replace every variable m<i> by replacements[i], rebuilding through
	the folding constructors."""
	if isinstance(e, Const):
		return e
	if isinstance(e, Var):
		if e.index >= len(replacements):
			raise ValueError(f"no replacement for m{e.index}")
		return replacements[e.index]
	if isinstance(e, Sum):
		return sum_of([substitute(t, replacements) for t in e.terms])
	if isinstance(e, Product):
		return product_of([substitute(f, replacements) for f in e.factors])
	if isinstance(e, Quotient):
		return quotient(
			substitute(e.numerator, replacements),
			substitute(e.denominator, replacements),
		)
	if isinstance(e, Power):
		return power(substitute(e.base, replacements), e.exponent)
	if isinstance(e, Call):
		return call(e.name, substitute(e.argument, replacements))
	raise TypeError(f"not an expression: {e!r}")


def max_variable_index(e: Expression) -> int:
	"""Largest variable index used, or -1 for a constant expression."""
	if isinstance(e, Const):
		return -1
	if isinstance(e, Var):
		return e.index
	if isinstance(e, Sum):
		return max(max_variable_index(t) for t in e.terms)
	if isinstance(e, Product):
		return max(max_variable_index(f) for f in e.factors)
	if isinstance(e, Quotient):
		return max(
			max_variable_index(e.numerator), max_variable_index(e.denominator)
		)
	if isinstance(e, Power):
		return max_variable_index(e.base)
	if isinstance(e, Call):
		return max_variable_index(e.argument)
	raise TypeError(f"not an expression: {e!r}")


@dataclass
class HomogeneityCheck:
	ok: bool
	order: float
	max_rel_err: float
	detail: str = ""

	def __bool__(self) -> bool:
		return self.ok


def check_homogeneity(
	e: Expression,
	order: float,
	var_count: int | None = None,
	samples: int = 32,
	tol: float = 1e-9,
	seed: int = 777,
) -> HomogeneityCheck:
	"""Check f(t*m) == t^order * f(m) on random positive points for
	t in {0.5, 2, 3}."""
	nvar = var_count if var_count is not None else max_variable_index(e) + 1
	if nvar <= 0:
		ok = isinstance(e, Const) or order == 0.0
		return HomogeneityCheck(ok, order, 0.0, "constant expression")
	rng = np.random.default_rng(seed)
	points = rng.uniform(0.25, 2.0, size=(nvar, samples))
	worst = 0.0
	try:
		base = evaluate(e, points)
		for t in (0.5, 2.0, 3.0):
			scaled = evaluate(e, t * points)
			expected = t ** order * base
			scale = np.maximum(np.abs(expected), 1e-300)
			worst = max(worst, float(np.max(np.abs(scaled - expected) / scale)))
	except EvalDomainError as exc:
		return HomogeneityCheck(False, order, np.inf, f"evaluation failed: {exc}")
	return HomogeneityCheck(worst <= tol, order, worst)
