"""Laurent polynomials with complex coefficients."""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

UNDERFLOW = 1e-300
LETTERS = "xyz"


class ParseError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class CoefficientRangeError(ArithmeticError):
    """A Hadamard power pushed a coefficient outside double range."""


@dataclass(frozen=True)
class LaurentPolynomial:
    """``sum a_s x**s`` over a finite support, terms sorted by exponent.

    Build with :meth:`from_terms`; the constructor trusts its input.
    """

    n: int
    terms: tuple  # ((exponent tuple, complex coefficient), ...)

    @classmethod
    def from_terms(cls, terms, n=None):
        if isinstance(terms, Mapping):
            terms = terms.items()
        merged: dict = {}
        for exp, coef in terms:
            exp = tuple(int(e) for e in exp)
            merged[exp] = merged.get(exp, 0) + complex(coef)
        if n is None:
            dims = {len(e) for e in merged}
            if len(dims) != 1:
                raise ValueError("exponent vectors must share one length")
            n = dims.pop()
        if any(len(e) != n for e in merged):
            raise ValueError(f"exponent vectors must have length {n}")
        kept = tuple(sorted((e, c) for e, c in merged.items() if c != 0))
        if not kept:
            raise ValueError("polynomial is zero")
        if n < 1:
            raise ValueError("dimension must be positive")
        return cls(n, kept)

    # accessors

    @property
    def support(self):
        return [e for e, _ in self.terms]

    @property
    def coefficients(self):
        return [c for _, c in self.terms]

    def exponent_array(self):
        return np.array(self.support, dtype=int).reshape(len(self.terms), self.n)

    def log_moduli(self):
        return np.array([math.log(abs(c)) for c in self.coefficients])

    def phases(self):
        return np.array([cmath.phase(c) for c in self.coefficients])

    def coefficient(self, exp):
        return dict(self.terms).get(tuple(exp), 0j)

    def __len__(self):
        return len(self.terms)

    def __str__(self):
        return format_polynomial(self)

    def degree_range(self, axis):
        col = [e[axis] for e in self.support]
        return min(col), max(col)

    def monomial_shift(self, m):
        """``x**m * f``."""
        m = tuple(int(v) for v in m)
        return LaurentPolynomial(
            self.n, tuple(sorted((tuple(a + b for a, b in zip(e, m)), c) for e, c in self.terms))
        )

    def scale(self, c):
        return LaurentPolynomial.from_terms([(e, a * c) for e, a in self.terms], self.n)


def evaluate(f, x):
    """``f(x)`` at a point of the torus (zero coordinates allowed only when
    no exponent of that variable is negative)."""
    x = [complex(v) for v in x]
    if len(x) != f.n:
        raise ValueError(f"expected {f.n} coordinates, got {len(x)}")
    total = 0j
    for exp, coef in f.terms:
        term = coef
        for xi, e in zip(x, exp):
            if xi == 0 and e < 0:
                raise ZeroDivisionError("zero coordinate under a negative exponent")
            term *= xi**e
        total += term
    return total


def hadamard_log_coefficients(f, r):
    """Log-moduli and phases of the coefficients of the ``r``-th Hadamard
    power, valid for any ``r > 0`` without forming the coefficients."""
    if not r > 0:
        raise ValueError("Hadamard exponent must be positive")
    return r * f.log_moduli(), r * f.phases()


def hadamard_power(f, r):
    """Coefficient-wise power ``a_s**r`` with the principal branch of Arg."""
    logm, ph = hadamard_log_coefficients(f, r)
    if logm.max() > math.log(np.finfo(float).max):
        raise CoefficientRangeError(f"Hadamard power {r} overflows a coefficient")
    if logm.min() < math.log(UNDERFLOW):
        raise CoefficientRangeError(f"Hadamard power {r} underflows a coefficient below {UNDERFLOW}")
    if float(r).is_integer():
        # exact for real coefficients; principal branch for complex ones agrees
        return LaurentPolynomial(
            f.n, tuple((e, c ** int(r)) for e, c in f.terms)
        )
    coefs = np.exp(logm) * np.exp(1j * ph)
    return LaurentPolynomial(f.n, tuple((e, complex(c)) for e, c in zip(f.support, coefs)))


def restrict_to_cell(f, cell):
    """Truncation of ``f`` to the exponents lying in the closed cell."""
    from .lattice import convex_contains

    support = f.support
    inside = convex_contains(cell.vertices, support)
    kept = [(e, c) for (e, c), ok in zip(f.terms, inside) if ok]
    if not kept:
        raise ValueError("truncation to the cell is empty")
    return LaurentPolynomial(f.n, tuple(kept))


def newton_polytope(f):
    from .lattice import LatticePolytope

    return LatticePolytope.from_points(f.support)


# --- text format --------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<complex>\(\s*[-+]?[0-9.eE+-]+\s*,\s*[-+]?[0-9.eE+-]+\s*\))
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<var>[a-zA-Z]\d*)
  | (?P<op>[-+*/^()])
""",
    re.VERBOSE,
)


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def _complex_literal(tok, pos):
    body = tok.strip()[1:-1]
    re_s, im_s = body.split(",")
    try:
        return complex(float(re_s), float(im_s))
    except ValueError:
        raise ParseError(f"bad complex literal {tok!r}", pos) from None


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.take()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def integer(self):
        sign = 1
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        if self.peek()[0] == "op" and self.peek()[1] == "(":
            self.take()
            value = self.integer()
            self.expect("op", ")")
            return sign * value
        tok = self.expect("num")
        if not re.fullmatch(r"\d+", tok[1]):
            raise ParseError(f"exponent must be an integer, found {tok[1]!r}", tok[2])
        return sign * int(tok[1])

    def number(self):
        tok = self.take()
        if tok[0] == "num":
            return complex(float(tok[1]))
        if tok[0] == "complex":
            return _complex_literal(tok[1], tok[2])
        raise ParseError(f"expected a number, found {tok[1] or 'end of input'!r}", tok[2])

    def term(self):
        coef = 1 + 0j
        powers: dict = {}
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                if tok[1] == "-":
                    coef = -coef
                continue
            break
        while True:
            tok = self.peek()
            if tok[0] in ("num", "complex"):
                coef *= self.number()
            elif tok[0] == "var":
                self.take()
                exp = 1
                if self.peek()[0] == "op" and self.peek()[1] == "^":
                    self.take()
                    exp = self.integer()
                powers[(tok[1], tok[2])] = exp
            else:
                raise ParseError(f"expected a coefficient or variable, found {tok[1] or 'end of input'!r}", tok[2])
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "*":
                self.take()
                continue
            if nxt[0] == "op" and nxt[1] == "/":
                self.take()
                denom = self.number()
                if denom == 0:
                    raise ParseError("division by zero", nxt[2])
                coef /= denom
                nxt = self.peek()
                if nxt[0] == "op" and nxt[1] == "*":
                    self.take()
                    continue
            break
        return coef, powers

    def polynomial(self):
        terms = [self.term()]
        while True:
            tok = self.peek()
            if tok[0] == "end":
                return terms
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                coef, powers = self.term()
                terms.append((-coef if tok[1] == "-" else coef, powers))
                continue
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])


def _variable_index(name, pos):
    if len(name) == 1 and name in LETTERS:
        return "letter", LETTERS.index(name)
    m = re.fullmatch(r"x(\d+)", name)
    if m and int(m.group(1)) >= 1:
        return "indexed", int(m.group(1)) - 1
    raise ParseError(f"unknown variable {name!r}", pos)


def parse_polynomial(text, n=None):
    """Parse ``"1 + 3*x - (0,2)*x^-1*y^2 + x*y/2"`` style input.

    Variables are ``x, y, z`` or ``x1 .. xn`` (not mixed). The dimension is
    the highest variable used unless ``n`` is given.
    """
    raw = _Parser(text).polynomial()
    style = None
    top = 0
    terms = []
    for coef, powers in raw:
        exps = {}
        for (name, pos), e in powers.items():
            kind, idx = _variable_index(name, pos)
            if style is None:
                style = kind
            elif style != kind:
                raise ParseError("cannot mix x,y,z with indexed variables", pos)
            exps[idx] = exps.get(idx, 0) + e
            top = max(top, idx + 1)
        terms.append((coef, exps))
    dim = n if n is not None else max(top, 1)
    if top > dim:
        raise ValueError(f"polynomial uses {top} variables but n={dim}")
    merged = []
    for coef, exps in terms:
        exp = tuple(exps.get(k, 0) for k in range(dim))
        merged.append((exp, coef))
    try:
        return LaurentPolynomial.from_terms(merged, dim)
    except ValueError as err:
        raise ValueError(f"{err} after merging like terms") from None


def _real_text(v):
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _format_coefficient(c):
    if c.imag == 0:
        return _real_text(c.real)
    return f"({float(c.real)!r},{float(c.imag)!r})"


def format_polynomial(f):
    """Canonical text; ``parse_polynomial(format_polynomial(f)) == f``."""
    names = list(LETTERS[: f.n]) if f.n <= 3 else [f"x{k + 1}" for k in range(f.n)]
    parts = []
    for exp, coef in f.terms:
        factors = [_format_coefficient(coef)]
        if coef == 1 and any(exp):
            factors = []
        for name, e in zip(names, exp):
            if e == 1:
                factors.append(name)
            elif e != 0:
                factors.append(f"{name}^{e}")
        parts.append("*".join(factors))
    text = " + ".join(parts)
    return text


# --- JSON ----------------------------------------------------------------


def polynomial_to_json(f):
    return {
        "n": f.n,
        "terms": [
            {"exp": list(e), "re": float(c.real), "im": float(c.imag)} for e, c in f.terms
        ],
    }


def polynomial_from_json(obj):
    try:
        n = int(obj["n"])
        terms = [(t["exp"], complex(t.get("re", 0.0), t.get("im", 0.0))) for t in obj["terms"]]
    except (KeyError, TypeError) as err:
        raise ValueError(f"malformed polynomial JSON: {err}") from None
    return LaurentPolynomial.from_terms(terms, n)


def as_polynomial(obj: "LaurentPolynomial | str | Iterable") -> LaurentPolynomial:
    if isinstance(obj, LaurentPolynomial):
        return obj
    if isinstance(obj, str):
        return parse_polynomial(obj)
    if isinstance(obj, Mapping):
        return polynomial_from_json(obj)
    return LaurentPolynomial.from_terms(obj)
