"""Sparse multivariate polynomials over a fixed, ordered variable registry.

Every polynomial in the pipeline (dynamics, set descriptions, storage
functions, multipliers) is an instance of :class:`Polynomial`.  Variables are
registered once, with a role, in a :class:`VarRegistry`; polynomials refer to
variables by registry index so that monomial comparison is cheap and the
monomial ordering (graded lexicographic over the registry order) is
deterministic across runs.

Polynomials are immutable values: all arithmetic returns new objects and the
term map is canonical (no stored zero coefficients).
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

ROLES = (
    "state_g",
    "state_psi",
    "time",
    "disturbance",
    "iqc_input",
    "uncertain_param",
)

Scalar = Union[int, float]


class StructuralError(ValueError):
    """Registry mismatch, unknown variable, or malformed structure."""


class PolyParseError(ValueError):
    """Raised by :func:`parse_polynomial` with position information."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at column {pos + 1})")
        self.pos = pos


class Var:
    __slots__ = ("name", "role")

    def __init__(self, name: str, role: str):
        if role not in ROLES:
            raise StructuralError(f"unknown variable role {role!r}")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise StructuralError(f"invalid variable name {name!r}")
        self.name = name
        self.role = role

    def __repr__(self):
        return f"Var({self.name!r}, {self.role!r})"

    def __eq__(self, other):
        return isinstance(other, Var) and self.name == other.name and self.role == other.role

    def __hash__(self):
        return hash((self.name, self.role))


class VarRegistry:
    """Ordered, immutable list of typed variables.

    The order fixed at construction defines the exponent-vector layout of
    every monomial and therefore the canonical basis enumeration; it never
    mutates.  ``zero_tol`` is the coefficient magnitude below which terms are
    dropped during canonicalization.
    """

    __slots__ = ("vars", "zero_tol", "_index")

    def __init__(self, variables: Iterable[Var], zero_tol: float = 1e-12):
        self.vars = tuple(variables)
        self.zero_tol = float(zero_tol)
        names = [v.name for v in self.vars]
        if len(set(names)) != len(names):
            raise StructuralError("variable names must be unique")
        self._index = {v.name: i for i, v in enumerate(self.vars)}

    @classmethod
    def build(
        cls,
        states: Sequence[str] = (),
        psi_states: Sequence[str] = (),
        time: str | None = None,
        disturbances: Sequence[str] = (),
        iqc_inputs: Sequence[str] = (),
        params: Sequence[str] = (),
        zero_tol: float = 1e-12,
    ) -> "VarRegistry":
        """Assemble a registry in the canonical role order.

        Order: plant states, filter states, time, disturbances, constrained
        inputs, uncertain parameters.
        """
        out: list[Var] = []
        out += [Var(n, "state_g") for n in states]
        out += [Var(n, "state_psi") for n in psi_states]
        if time is not None:
            out.append(Var(time, "time"))
        out += [Var(n, "disturbance") for n in disturbances]
        out += [Var(n, "iqc_input") for n in iqc_inputs]
        out += [Var(n, "uncertain_param") for n in params]
        return cls(out, zero_tol=zero_tol)

    def __len__(self) -> int:
        return len(self.vars)

    def __eq__(self, other):
        return isinstance(other, VarRegistry) and self.vars == other.vars

    def __hash__(self):
        return hash(self.vars)

    def __repr__(self):
        return "VarRegistry(" + ", ".join(f"{v.name}:{v.role}" for v in self.vars) + ")"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise StructuralError(f"unknown variable {name!r}") from None

    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.vars)

    def indices_by_role(self, *roles: str) -> tuple[int, ...]:
        for r in roles:
            if r not in ROLES:
                raise StructuralError(f"unknown variable role {r!r}")
        return tuple(i for i, v in enumerate(self.vars) if v.role in roles)


def grlex_key(mono: tuple[int, ...]) -> tuple:
    """Sort key for graded lexicographic order (ascending)."""
    return (sum(mono), mono)


def monomials_up_to(
    registry: VarRegistry, var_indices: Sequence[int], max_degree: int
) -> list[tuple[int, ...]]:
    """All monomials of total degree <= max_degree supported on the given
    variables, as full-width exponent tuples in graded-lex order."""
    n = len(registry)
    idx = list(var_indices)
    out: list[tuple[int, ...]] = []

    def rec(pos: int, remaining: int, current: list[int]):
        if pos == len(idx):
            out.append(tuple(current))
            return
        for e in range(remaining + 1):
            current[idx[pos]] = e
            rec(pos + 1, remaining - e, current)
        current[idx[pos]] = 0

    rec(0, max_degree, [0] * n)
    out.sort(key=grlex_key)
    return out


class Polynomial:
    """Sparse polynomial: map from exponent tuples to float coefficients."""

    __slots__ = ("registry", "terms")

    def __init__(self, registry: VarRegistry, terms: Mapping[tuple[int, ...], float]):
        self.registry = registry
        n = len(registry)
        tol = registry.zero_tol
        clean: dict[tuple[int, ...], float] = {}
        for mono, c in terms.items():
            if len(mono) != n:
                raise StructuralError(
                    f"exponent vector of length {len(mono)} in registry of size {n}"
                )
            c = float(c)
            if abs(c) > tol:
                clean[tuple(mono)] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, registry: VarRegistry) -> "Polynomial":
        return cls(registry, {})

    @classmethod
    def constant(cls, registry: VarRegistry, value: Scalar) -> "Polynomial":
        return cls(registry, {(0,) * len(registry): float(value)})

    @classmethod
    def variable(cls, registry: VarRegistry, name: str) -> "Polynomial":
        i = registry.index(name)
        mono = tuple(1 if j == i else 0 for j in range(len(registry)))
        return cls(registry, {mono: 1.0})

    @classmethod
    def from_monomial(
        cls, registry: VarRegistry, mono: tuple[int, ...], coeff: Scalar = 1.0
    ) -> "Polynomial":
        return cls(registry, {tuple(mono): float(coeff)})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0."""
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    def degree_in(self, name: str) -> int:
        i = self.registry.index(name)
        if not self.terms:
            return 0
        return max(m[i] for m in self.terms)

    def variables_present(self) -> tuple[int, ...]:
        """Registry indices of variables with a nonzero exponent somewhere."""
        n = len(self.registry)
        seen = [False] * n
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    seen[i] = True
        return tuple(i for i in range(n) if seen[i])

    def coefficient(self, mono: tuple[int, ...]) -> float:
        return self.terms.get(tuple(mono), 0.0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.registry == other.registry
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.registry, frozenset(self.terms.items())))

    # -- arithmetic --------------------------------------------------------

    def _check_same_registry(self, other: "Polynomial"):
        if self.registry != other.registry:
            raise StructuralError("polynomials belong to different registries")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.registry, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_registry(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0.0) + c
        return Polynomial(self.registry, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.registry, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.registry, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(
                self.registry, {m: c * float(other) for m, c in self.terms.items()}
            )
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_registry(other)
        terms: dict[tuple[int, ...], float] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                terms[m] = terms.get(m, 0.0) + c1 * c2
        return Polynomial(self.registry, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)) and other != 0:
            return self * (1.0 / float(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise StructuralError("polynomial powers must be non-negative integers")
        out = Polynomial.constant(self.registry, 1.0)
        for _ in range(k):
            out = out * self
        return out

    # -- calculus, evaluation, substitution --------------------------------

    def diff(self, name: str) -> "Polynomial":
        """Formal partial derivative with respect to a registry variable."""
        i = self.registry.index(name)
        terms: dict[tuple[int, ...], float] = {}
        for m, c in self.terms.items():
            e = m[i]
            if e == 0:
                continue
            dm = m[:i] + (e - 1,) + m[i + 1 :]
            terms[dm] = terms.get(dm, 0.0) + c * e
        return Polynomial(self.registry, terms)

    def eval(self, point: Mapping[str, Scalar]) -> float:
        """Evaluate at a full assignment of registry variables.

        Every registry variable must be assigned; use :meth:`substitute` for
        partial assignments.
        """
        vals = np.empty(len(self.registry))
        for i, v in enumerate(self.registry.vars):
            if v.name not in point:
                raise StructuralError(f"missing assignment for variable {v.name!r}")
            vals[i] = float(point[v.name])
        return self.eval_array(vals)

    def eval_array(self, vals: np.ndarray) -> float:
        total = 0.0
        for m, c in self.terms.items():
            term = c
            for i, e in enumerate(m):
                if e:
                    term *= vals[i] ** e
            total += term
        return total

    def substitute(
        self, bindings: Mapping[str, Union["Polynomial", Scalar]]
    ) -> "Polynomial":
        """Replace variables by polynomials or scalars over the same registry."""
        reg = self.registry
        idx_bind: dict[int, Polynomial] = {}
        for name, val in bindings.items():
            i = reg.index(name)
            if isinstance(val, Polynomial):
                if val.registry != reg:
                    raise StructuralError("substitution binding uses a different registry")
                idx_bind[i] = val
            else:
                idx_bind[i] = Polynomial.constant(reg, val)
        out = Polynomial.zero(reg)
        for m, c in self.terms.items():
            term = Polynomial.constant(reg, c)
            rest = list(m)
            for i, repl in idx_bind.items():
                e = m[i]
                if e:
                    rest[i] = 0
                    term = term * repl**e
            term = term * Polynomial.from_monomial(reg, tuple(rest))
            out = out + term
        return out

    def compile(self) -> "CompiledPoly":
        return CompiledPoly(self)

    # -- text form ---------------------------------------------------------

    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)})"


class CompiledPoly:
    """Vectorized evaluator: coefficients plus an exponent matrix.

    ``__call__`` accepts a 1-D point (length n) or a batch of shape (m, n).
    """

    __slots__ = ("coeffs", "exps", "n")

    def __init__(self, p: Polynomial):
        self.n = len(p.registry)
        if p.terms:
            monos = sorted(p.terms, key=grlex_key)
            self.coeffs = np.array([p.terms[m] for m in monos])
            self.exps = np.array(monos, dtype=np.int64)
        else:
            self.coeffs = np.zeros(0)
            self.exps = np.zeros((0, self.n), dtype=np.int64)

    def __call__(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        if self.coeffs.size == 0:
            return 0.0 if x.ndim == 1 else np.zeros(x.shape[0])
        if x.ndim == 1:
            return float(np.prod(x[None, :] ** self.exps, axis=1) @ self.coeffs)
        return np.prod(x[:, None, :] ** self.exps[None, :, :], axis=2) @ self.coeffs


def poly_vector_eval(polys: Sequence[CompiledPoly], x: np.ndarray) -> np.ndarray:
    """Evaluate a list of compiled polynomials at one point."""
    return np.array([p(x) for p in polys])


# -- canonical text serialization -------------------------------------------


def _format_coeff(c: float) -> str:
    # repr() round-trips doubles exactly and prints the shortest such literal
    return repr(abs(c))


def format_polynomial(p: Polynomial) -> str:
    """Canonical text form: graded-lex descending terms, '^' powers."""
    if not p.terms:
        return "0"
    names = p.registry.names()
    monos = sorted(p.terms, key=grlex_key, reverse=True)
    pieces: list[str] = []
    for k, m in enumerate(monos):
        c = p.terms[m]
        factors = []
        for i, e in enumerate(m):
            if e == 1:
                factors.append(names[i])
            elif e > 1:
                factors.append(f"{names[i]}^{e}")
        body = "*".join(factors)
        if body:
            mag = _format_coeff(c)
            body = body if mag == "1.0" else f"{mag}*{body}"
        else:
            body = _format_coeff(c)
        if k == 0:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append((" - " if c < 0 else " + ") + body)
    return "".join(pieces)


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise PolyParseError(f"unexpected character {text[pos]!r}", pos)
        for kind in ("num", "name", "op"):
            if m.group(kind) is not None:
                tokens.append((kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    return tokens


class _Parser:
    """Recursive-descent parser for the canonical polynomial text form.

    Grammar: expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
    factor := ('+'|'-') factor | power ; power := atom ('^' INT)? ;
    atom := NUM | NAME | '(' expr ')'.  Division is only by numeric literals.
    """

    def __init__(self, tokens, registry: VarRegistry, text_len: int):
        self.tokens = tokens
        self.registry = registry
        self.i = 0
        self.text_len = text_len

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self):
        tok = self._peek()
        if tok is None:
            raise PolyParseError("unexpected end of expression", self.text_len)
        self.i += 1
        return tok

    def _expect_op(self, op: str):
        tok = self._next()
        if tok[0] != "op" or tok[1] != op:
            raise PolyParseError(f"expected {op!r}", tok[2])

    def parse(self) -> Polynomial:
        p = self.expr()
        tok = self._peek()
        if tok is not None:
            raise PolyParseError(f"unexpected token {tok[1]!r}", tok[2])
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while True:
            tok = self._peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.i += 1
                rhs = self.term()
                p = p + rhs if tok[1] == "+" else p - rhs
            else:
                return p

    def term(self) -> Polynomial:
        p = self.factor()
        while True:
            tok = self._peek()
            if tok and tok[0] == "op" and tok[1] in "*/":
                self.i += 1
                rhs = self.factor()
                if tok[1] == "*":
                    p = p * rhs
                else:
                    if rhs.degree() != 0:
                        raise PolyParseError("division only by numeric constants", tok[2])
                    den = rhs.coefficient((0,) * len(self.registry))
                    if den == 0.0:
                        raise PolyParseError("division by zero", tok[2])
                    p = p * (1.0 / den)
            else:
                return p

    def factor(self) -> Polynomial:
        tok = self._peek()
        if tok and tok[0] == "op" and tok[1] in "+-":
            self.i += 1
            p = self.factor()
            return -p if tok[1] == "-" else p
        return self.power()

    def power(self) -> Polynomial:
        p = self.atom()
        tok = self._peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self.i += 1
            etok = self._next()
            if etok[0] != "num" or "." in etok[1] or "e" in etok[1].lower():
                raise PolyParseError("exponent must be a non-negative integer", etok[2])
            p = p ** int(etok[1])
        return p

    def atom(self) -> Polynomial:
        tok = self._next()
        if tok[0] == "num":
            return Polynomial.constant(self.registry, float(tok[1]))
        if tok[0] == "name":
            return Polynomial.variable(self.registry, tok[1])
        if tok[0] == "op" and tok[1] == "(":
            p = self.expr()
            self._expect_op(")")
            return p
        raise PolyParseError(f"unexpected token {tok[1]!r}", tok[2])


def parse_polynomial(text: str, registry: VarRegistry) -> Polynomial:
    """Parse the human-readable sum-of-terms form used in problem files."""
    tokens = _tokenize(text)
    if not tokens:
        raise PolyParseError("empty polynomial expression", 0)
    return _Parser(tokens, registry, len(text)).parse()
