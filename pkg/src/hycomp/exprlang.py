"""A small arithmetic expression language.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;            (* right associative *)
    atom    = number | name [ "(" expr { "," expr } ")" ] | "(" expr ")" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
            | "." digits [ exponent ] ;
    name    = letter { letter | digit | "_" } ;

Functions: sin, cos, exp, log, tanh, abs (one argument) and min, max (two or
more).  ``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.

Derivatives use forward-mode dual numbers.  At kinks the derivative of the
left branch is used: ``abs`` at 0 takes the slope of ``-x``; ``min``/``max``
ties take the slope of the first tied argument.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .geometry import Box, SmoothFn


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, expected: Sequence[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at byte {offset}{detail}")


class UnboundVariable(ExprError):
    pass


# --- AST ---------------------------------------------------------------------

class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    left: Expr
    right: Expr


class Add(BinOp):
    pass


class Sub(BinOp):
    pass


class Mul(BinOp):
    pass


class Div(BinOp):
    pass


class Pow(BinOp):
    pass


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple[Expr, ...]


UNARY_FUNCS = ("sin", "cos", "exp", "log", "tanh", "abs")
NARY_FUNCS = ("min", "max")
FUNCS = UNARY_FUNCS + NARY_FUNCS

_OPS = {Add: "+", Sub: "-", Mul: "*", Div: "/", Pow: "^"}


# --- lexer / parser ------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            off = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[off]!r}", len(src[:off].encode()),
                             ("number", "name", "operator"))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), len(src[:start].encode())))
        pos = m.end()
    toks.append(("end", "", len(src.encode())))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, off = self.peek()
        if val != value or kind != "op":
            raise ParseError(f"unexpected {val or 'end of input'!r}", off, (value,))
        self.i += 1

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", off, ("+", "-", "*", "/", "^", "end of input"))
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                if val not in FUNCS:
                    raise ParseError(f"unknown function {val!r}", off, FUNCS)
                self.take()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if val in UNARY_FUNCS and len(args) != 1:
                    raise ParseError(f"{val} takes one argument", off, (")",))
                if val in NARY_FUNCS and len(args) < 2:
                    raise ParseError(f"{val} takes at least two arguments", off, (",",))
                return Call(val, tuple(args))
            if val in FUNCS:
                raise ParseError(f"function {val!r} needs arguments", off, ("(",))
            return Var(val)
        if (kind, val) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {val or 'end of input'!r}", off, ("number", "name", "(", "-"))


def parse(src: str) -> Expr:
    if isinstance(src, (int, float)):
        src = repr(float(src))
    return _Parser(src).parse()


# --- printing ------------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def to_source(e: Expr) -> str:
    """Pretty-print with the minimum parentheses; ``parse(to_source(e)) == e``."""
    if isinstance(e, Num):
        v = e.value
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return repr(v)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}(" + ", ".join(to_source(a) for a in e.args) + ")"
    if isinstance(e, Neg):
        inner = to_source(e.arg)
        # operand of unary minus must itself be unary-level or tighter
        if isinstance(e.arg, BinOp) and not isinstance(e.arg, Pow):
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Pow):
        left = to_source(e.left)
        if not isinstance(e.left, (Num, Var, Call)) or (isinstance(e.left, Num) and e.left.value < 0):
            left = f"({left})"
        right = to_source(e.right)
        if isinstance(e.right, BinOp) and not isinstance(e.right, Pow):
            right = f"({right})"
        return f"{left}^{right}"
    if isinstance(e, BinOp):
        p = _PREC[type(e)]
        left, right = to_source(e.left), to_source(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        # left associative: equal precedence on the right needs parentheses
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {_OPS[type(e)]} {right}"
    raise TypeError(e)


def _prec(e: Expr) -> int:
    if isinstance(e, Num) and e.value < 0:
        return 3
    return _PREC.get(type(e), 5)


def variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, Neg):
        return variables(e.arg)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Call):
        out: set[str] = set()
        for a in e.args:
            out |= variables(a)
        return out
    raise TypeError(e)


def substitute(e: Expr, repl: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return repl.get(e.name, e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, repl))
    if isinstance(e, BinOp):
        return type(e)(substitute(e.left, repl), substitute(e.right, repl))
    if isinstance(e, Call):
        return Call(e.fn, tuple(substitute(a, repl) for a in e.args))
    raise TypeError(e)


# --- IEEE-style primitives --------------------------------------------------
# Python raises on several IEEE edge cases; these return inf/nan instead and
# record the event in ``flags`` when given.

def _note(flags, msg):
    if flags is not None:
        flags.append(msg)


def _div(a, b, flags=None):
    if b == 0.0:
        _note(flags, "division by zero")
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def _pow(a, b, flags=None):
    try:
        r = a ** b
    except ZeroDivisionError:
        _note(flags, "zero to a negative power")
        return math.inf
    except OverflowError:
        _note(flags, "overflow in power")
        return math.inf
    if isinstance(r, complex):
        _note(flags, "negative base with fractional exponent")
        return math.nan
    return float(r)


def _log(a, flags=None):
    if a > 0:
        return math.log(a)
    _note(flags, "log of non-positive argument")
    return -math.inf if a == 0 else math.nan


def _exp(a, flags=None):
    try:
        return math.exp(a)
    except OverflowError:
        _note(flags, "overflow in exp")
        return math.inf


def _sin(a, flags=None):
    return math.sin(a) if math.isfinite(a) else math.nan


def _cos(a, flags=None):
    return math.cos(a) if math.isfinite(a) else math.nan


def _tanh(a, flags=None):
    return math.tanh(a)


def _abs(a, flags=None):
    return abs(a)


def _min(*args, flags=None):
    best = args[0]
    for a in args[1:]:
        if a < best:
            best = a
    return best


def _max(*args, flags=None):
    best = args[0]
    for a in args[1:]:
        if a > best:
            best = a
    return best


_PRIMS = {"sin": _sin, "cos": _cos, "exp": _exp, "log": _log, "tanh": _tanh, "abs": _abs}


def evaluate(e: Expr, env: Mapping[str, float], flags: list | None = None) -> float:
    """Evaluate in IEEE double precision.

    Domain errors produce NaN (or inf) and append a message to ``flags``.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return float(env[e.name])
        except KeyError:
            raise UnboundVariable(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, env, flags)
    if isinstance(e, BinOp):
        a = evaluate(e.left, env, flags)
        b = evaluate(e.right, env, flags)
        if isinstance(e, Add):
            return a + b
        if isinstance(e, Sub):
            return a - b
        if isinstance(e, Mul):
            return a * b
        if isinstance(e, Div):
            return _div(a, b, flags)
        return _pow(a, b, flags)
    if isinstance(e, Call):
        args = [evaluate(a, env, flags) for a in e.args]
        if e.fn == "min":
            return _min(*args)
        if e.fn == "max":
            return _max(*args)
        return _PRIMS[e.fn](args[0], flags)
    raise TypeError(e)


# --- dual numbers -----------------------------------------------------------

class Dual:
    """Value plus gradient (a numpy vector) for forward-mode differentiation."""

    __slots__ = ("v", "d")

    def __init__(self, v: float, d):
        self.v = v
        self.d = d

    def __repr__(self):
        return f"Dual({self.v}, {self.d})"


def _dual_eval(e: Expr, env: Mapping[str, Dual], nvars: int, flags) -> Dual:
    if isinstance(e, Num):
        return Dual(e.value, np.zeros(nvars))
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        a = _dual_eval(e.arg, env, nvars, flags)
        return Dual(-a.v, -a.d)
    if isinstance(e, BinOp):
        a = _dual_eval(e.left, env, nvars, flags)
        b = _dual_eval(e.right, env, nvars, flags)
        if isinstance(e, Add):
            return Dual(a.v + b.v, a.d + b.d)
        if isinstance(e, Sub):
            return Dual(a.v - b.v, a.d - b.d)
        if isinstance(e, Mul):
            return Dual(a.v * b.v, a.d * b.v + a.v * b.d)
        if isinstance(e, Div):
            q = _div(a.v, b.v, flags)
            return Dual(q, (a.d - q * b.d) / b.v if b.v != 0 else np.full(nvars, math.nan))
        # power
        r = _pow(a.v, b.v, flags)
        if isinstance(e.right, Num) or not np.any(b.d):
            c = b.v
            if c == 0:
                return Dual(r, np.zeros(nvars))
            return Dual(r, c * _pow(a.v, c - 1, flags) * a.d)
        da = b.v * _pow(a.v, b.v - 1, flags) * a.d if np.any(a.d) else 0.0
        return Dual(r, da + r * _log(a.v, flags) * b.d)
    if isinstance(e, Call):
        args = [_dual_eval(x, env, nvars, flags) for x in e.args]
        if e.fn in ("min", "max"):
            pick = _min if e.fn == "min" else _max
            target = pick(*[a.v for a in args])
            for a in args:
                if a.v == target:
                    return a
            return Dual(target, np.full(nvars, math.nan))
        (a,) = args
        if e.fn == "sin":
            return Dual(_sin(a.v), math.cos(a.v) * a.d)
        if e.fn == "cos":
            return Dual(_cos(a.v), -math.sin(a.v) * a.d)
        if e.fn == "exp":
            ev = _exp(a.v, flags)
            return Dual(ev, ev * a.d)
        if e.fn == "log":
            return Dual(_log(a.v, flags), a.d / a.v if a.v != 0 else np.full(nvars, math.nan))
        if e.fn == "tanh":
            t = math.tanh(a.v)
            return Dual(t, (1 - t * t) * a.d)
        if e.fn == "abs":
            # left-branch slope at the kink
            return Dual(abs(a.v), a.d if a.v > 0 else -a.d)
    raise TypeError(e)


def gradient(e: Expr, env: Mapping[str, float], names: Sequence[str], flags=None) -> np.ndarray:
    """Derivatives of ``e`` with respect to ``names`` in one forward pass."""
    n = len(names)
    denv: dict[str, Dual] = {}
    for k, v in env.items():
        denv[k] = Dual(float(v), np.zeros(n))
    for i, name in enumerate(names):
        if name not in env:
            raise UnboundVariable(f"unbound variable {name!r}")
        seed = np.zeros(n)
        seed[i] = 1.0
        denv[name] = Dual(float(env[name]), seed)
    return np.asarray(_dual_eval(e, denv, n, flags).d, dtype=float).reshape(n)


def deriv(e: Expr, env: Mapping[str, float], var: str, flags=None) -> float:
    return float(gradient(e, env, [var], flags)[0])


# --- compilation ------------------------------------------------------------

def _py(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return f"v_{e.name}"
    if isinstance(e, Neg):
        return f"(-{_py(e.arg)})"
    if isinstance(e, Add):
        return f"({_py(e.left)} + {_py(e.right)})"
    if isinstance(e, Sub):
        return f"({_py(e.left)} - {_py(e.right)})"
    if isinstance(e, Mul):
        return f"({_py(e.left)} * {_py(e.right)})"
    if isinstance(e, Div):
        return f"_div({_py(e.left)}, {_py(e.right)})"
    if isinstance(e, Pow):
        return f"_pow({_py(e.left)}, {_py(e.right)})"
    if isinstance(e, Call):
        return f"_{e.fn}(" + ", ".join(_py(a) for a in e.args) + ")"
    raise TypeError(e)


_NS = {"_div": _div, "_pow": _pow, "_log": _log, "_exp": _exp, "_sin": _sin, "_cos": _cos,
       "_tanh": _tanh, "_abs": _abs, "_min": _min, "_max": _max}


def compile_vector(exprs: Sequence[Expr], names: Sequence[str]):
    """Compile expressions to ``f(x: ndarray) -> ndarray`` over the ordered ``names``.

    Produces results bit-identical to :func:`evaluate`.
    """
    for e in exprs:
        missing = variables(e) - set(names)
        if missing:
            raise UnboundVariable(f"unbound variable(s) {sorted(missing)}")
    unpack = "".join(f"    v_{n} = float(x[{i}])\n" for i, n in enumerate(names))
    body = ", ".join(_py(e) for e in exprs)
    src = f"def _f(x):\n{unpack}    return _np.array([{body}], dtype=float)\n"
    ns = dict(_NS, _np=np)
    exec(src, ns)  # noqa: S102 - source is generated from a parsed AST
    return ns["_f"]


@dataclass(frozen=True, eq=False)
class ExprMap:
    """An ordered list of expressions over ordered variable names."""

    names: tuple[str, ...]
    exprs: tuple[Expr, ...]

    @classmethod
    def of(cls, names: Sequence[str], sources: Sequence[str | Expr | float]) -> "ExprMap":
        exprs = tuple(s if isinstance(s, Expr) else parse(s) for s in sources)
        for e in exprs:
            missing = variables(e) - set(names)
            if missing:
                raise UnboundVariable(f"expression uses undeclared variable(s) {sorted(missing)}")
        if len(set(names)) != len(names):
            raise ExprError(f"duplicate variable names in {list(names)}")
        return cls(tuple(names), exprs)

    def sources(self) -> list[str]:
        return [to_source(e) for e in self.exprs]

    def to_fn(self, dom: Box, cod: Box | None = None, label: str = "") -> SmoothFn:
        if dom.dim != len(self.names):
            raise ExprError(f"{len(self.names)} variables declared for a {dom.dim}-dim box")
        f = compile_vector(self.exprs, self.names)
        names, exprs = self.names, self.exprs

        def jac(x):
            env = dict(zip(names, x.tolist()))
            return np.array([gradient(e, env, names) for e in exprs]).reshape(len(exprs), len(names))

        if cod is None:
            cod = Box.real(len(self.exprs))
        affine = _affine_of(self.exprs, self.names)
        return SmoothFn(dom, cod, f, jac, affine, label or ",".join(self.sources()),
                        meta={"names": list(names), "exprs": self.sources()})


def _affine_of(exprs, names):
    """Affine data when every expression is affine in the variables, else None."""
    rows, consts = [], []
    for e in exprs:
        coef = _linear_coeffs(e, names)
        if coef is None:
            return None
        rows.append(coef[0])
        consts.append(coef[1])
    return np.array(rows, dtype=float).reshape(len(exprs), len(names)), np.array(consts, dtype=float)


def _linear_coeffs(e, names):
    n = len(names)
    if isinstance(e, Num):
        return np.zeros(n), e.value
    if isinstance(e, Var):
        c = np.zeros(n)
        c[names.index(e.name)] = 1.0
        return c, 0.0
    if isinstance(e, Neg):
        r = _linear_coeffs(e.arg, names)
        return None if r is None else (-r[0], -r[1])
    if isinstance(e, (Add, Sub)):
        a, b = _linear_coeffs(e.left, names), _linear_coeffs(e.right, names)
        if a is None or b is None:
            return None
        s = 1.0 if isinstance(e, Add) else -1.0
        return a[0] + s * b[0], a[1] + s * b[1]
    if isinstance(e, Mul):
        a, b = _linear_coeffs(e.left, names), _linear_coeffs(e.right, names)
        if a is None or b is None:
            return None
        if not np.any(a[0]):
            return a[1] * b[0], a[1] * b[1]
        if not np.any(b[0]):
            return b[1] * a[0], b[1] * a[1]
        return None
    if isinstance(e, Div):
        a, b = _linear_coeffs(e.left, names), _linear_coeffs(e.right, names)
        if a is None or b is None or np.any(b[0]) or b[1] == 0:
            return None
        return a[0] / b[1], a[1] / b[1]
    return None


def expr_fn(names: Sequence[str], sources: Sequence[str], dom: Box, cod: Box | None = None,
            label: str = "") -> SmoothFn:
    """Shorthand: ``SmoothFn`` from expression sources over named coordinates."""
    return ExprMap.of(names, sources).to_fn(dom, cod, label)
