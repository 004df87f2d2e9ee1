"""Exact polynomial arithmetic: the f/g recurrence families, sparse
univariate and bivariate polynomials over the integers, Gaussian integers,
and exact division.

Coefficients are Python ints (arbitrary precision) or GaussianInt; nothing
here ever rounds.  Evaluation at floats is allowed and returns floats, but
stored polynomials stay exact.
"""

from __future__ import annotations

import threading as _threading
from dataclasses import dataclass


@dataclass(frozen=True)
class GaussianInt:
    """Gaussian integer a + b*i with exact integer parts."""

    re: int
    im: int = 0

    def __add__(self, other):
        other = _as_gauss(other)
        return GaussianInt(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_gauss(other)
        return GaussianInt(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _as_gauss(other) - self

    def __mul__(self, other):
        other = _as_gauss(other)
        return GaussianInt(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianInt(-self.re, -self.im)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not Gaussian integers")
        out = GaussianInt(1, 0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussianInt):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def conj(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        im = f"{self.im}i" if abs(self.im) != 1 else ("i" if self.im > 0 else "-i")
        if self.re == 0:
            return im
        sign = "+" if self.im > 0 else ""
        return f"({self.re}{sign}{im})"

    __repr__ = __str__


def _as_gauss(x) -> GaussianInt:
    if isinstance(x, GaussianInt):
        return x
    if isinstance(x, int):
        return GaussianInt(x, 0)
    return NotImplemented


def _coeff_exact_div(a, b):
    """Divide coefficient a by b exactly; return None if not divisible."""
    if isinstance(a, GaussianInt) or isinstance(b, GaussianInt):
        a, b = _as_gauss(a), _as_gauss(b)
        norm = b.re * b.re + b.im * b.im
        if norm == 0:
            raise ZeroDivisionError("division by zero coefficient")
        num = a * b.conj()
        if num.re % norm or num.im % norm:
            return None
        return GaussianInt(num.re // norm, num.im // norm)
    if b == 0:
        raise ZeroDivisionError("division by zero coefficient")
    q, r = divmod(a, b)
    return q if r == 0 else None


class UniPoly:
    """Sparse univariate polynomial: exponent -> exact coefficient.

    The variable name is display-only; arithmetic ignores it.
    """

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs=None, var: str = "x"):
        self.var = var
        self.coeffs = {}
        if coeffs:
            for e, c in coeffs.items():
                if c != 0:
                    self.coeffs[e] = c

    @classmethod
    def constant(cls, c, var: str = "x") -> "UniPoly":
        return cls({0: c}, var)

    @classmethod
    def monomial(cls, e: int, c=1, var: str = "x") -> "UniPoly":
        return cls({e: c}, var)

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return max(self.coeffs) if self.coeffs else -1

    def __getitem__(self, e: int):
        return self.coeffs.get(e, 0)

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, GaussianInt)):
            return self.coeffs == ({0: other} if other != 0 else {})
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __add__(self, other):
        if isinstance(other, (int, GaussianInt)):
            other = UniPoly.constant(other, self.var)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e, 0) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return UniPoly(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly({e: -c for e, c in self.coeffs.items()}, self.var)

    def __sub__(self, other):
        if isinstance(other, (int, GaussianInt)):
            other = UniPoly.constant(other, self.var)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, GaussianInt)):
            if other == 0:
                return UniPoly({}, self.var)
            return UniPoly({e: c * other for e, c in self.coeffs.items()}, self.var)
        out: dict = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                s = out.get(e, 0) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return UniPoly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "UniPoly":
        if n < 0:
            raise ValueError("negative polynomial powers unsupported")
        out = UniPoly.constant(1, self.var)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def map_exponents(self, k: int) -> "UniPoly":
        """Substitute x -> x**k (exponent scaling)."""
        return UniPoly({e * k: c for e, c in self.coeffs.items()}, self.var)

    def with_var(self, var: str) -> "UniPoly":
        return UniPoly(self.coeffs, var)

    def eval(self, x):
        """Horner evaluation; exact inputs give exact outputs."""
        if not self.coeffs:
            return 0 * x if not isinstance(x, (int, GaussianInt)) else 0
        exps = sorted(self.coeffs, reverse=True)
        acc = self.coeffs[exps[0]]
        prev = exps[0]
        for e in exps[1:]:
            acc = acc * x ** (prev - e) + self.coeffs[e]
            prev = e
        if prev:
            acc = acc * x**prev
        return acc

    def __str__(self):
        return _render_terms(
            [((e,), c) for e, c in sorted(self.coeffs.items())], (self.var,)
        )

    def __repr__(self):
        return f"UniPoly({self})"


class BiPoly:
    """Sparse bivariate polynomial over the integers.

    Keys are exponent pairs; the default variables (b, g) are the edge
    weight and the node-bias variable of the theta polynomial.
    """

    __slots__ = ("coeffs", "vars")

    def __init__(self, coeffs=None, vars: tuple[str, str] = ("b", "g")):
        self.vars = vars
        self.coeffs = {}
        if coeffs:
            for eg, c in coeffs.items():
                if c != 0:
                    self.coeffs[eg] = c

    @classmethod
    def constant(cls, c, vars: tuple[str, str] = ("b", "g")) -> "BiPoly":
        return cls({(0, 0): c}, vars)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, BiPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == ({(0, 0): other} if other != 0 else {})
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __add__(self, other):
        if isinstance(other, int):
            other = BiPoly.constant(other, self.vars)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            s = out.get(k, 0) + c
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return BiPoly(out, self.vars)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({k: -c for k, c in self.coeffs.items()}, self.vars)

    def __sub__(self, other):
        if isinstance(other, int):
            other = BiPoly.constant(other, self.vars)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return BiPoly({}, self.vars)
            return BiPoly({k: c * other for k, c in self.coeffs.items()}, self.vars)
        out: dict = {}
        for (e1, g1), c1 in self.coeffs.items():
            for (e2, g2), c2 in other.coeffs.items():
                k = (e1 + e2, g1 + g2)
                s = out.get(k, 0) + c1 * c2
                if s == 0:
                    out.pop(k, None)
                else:
                    out[k] = s
        return BiPoly(out, self.vars)

    __rmul__ = __mul__

    def add_term(self, bexp: int, gpoly: UniPoly) -> "BiPoly":
        """Add gpoly (a polynomial in the second variable) at first-variable
        power bexp."""
        out = dict(self.coeffs)
        for ge, c in gpoly.coeffs.items():
            k = (bexp, ge)
            s = out.get(k, 0) + c
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return BiPoly(out, self.vars)

    def first_degree(self) -> int:
        return max((e for e, _ in self.coeffs), default=-1)

    def eval_second(self, value) -> UniPoly:
        """Substitute the second variable by an exact value; returns a
        UniPoly in the first variable.  Powers of value are cached since
        theta polynomials repeat small second-variable exponents heavily."""
        powers = {0: 1}

        def pw(n):
            if n not in powers:
                powers[n] = powers[n - 1] * value if n - 1 in powers else value**n
            return powers[n]

        out: dict = {}
        for (be, ge), c in sorted(self.coeffs.items()):
            s = out.get(be, 0) + c * pw(ge)
            if s == 0:
                out.pop(be, None)
            else:
                out[be] = s
        return UniPoly(out, self.vars[0])

    def eval_first(self, value) -> UniPoly:
        """Substitute the first variable by an exact value; returns a
        UniPoly in the second variable."""
        out: dict = {}
        for (be, ge), c in self.coeffs.items():
            s = out.get(ge, 0) + c * value**be
            if s == 0:
                out.pop(ge, None)
            else:
                out[ge] = s
        return UniPoly(out, self.vars[1])

    def eval(self, bval, gval):
        return sum(c * bval**be * gval**ge for (be, ge), c in self.coeffs.items())

    def __str__(self):
        terms = sorted(
            self.coeffs.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0][0], kv[0][1])
        )
        return _render_terms([(k, c) for k, c in terms], self.vars)

    def __repr__(self):
        return f"BiPoly({self})"


def _render_terms(terms, var_names):
    """Canonical text: '1 + 3*b - 2*b^2*g^4'.  terms: [(exps tuple, coeff)]."""
    if not terms:
        return "0"
    parts = []
    for exps, c in terms:
        factors = []
        for name, e in zip(var_names, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        if isinstance(c, GaussianInt):
            coeff_txt = str(c)
            negative = False
        else:
            negative = c < 0
            c_abs = -c if negative else c
            coeff_txt = str(c_abs)
        if factors and coeff_txt == "1":
            body = "*".join(factors)
        elif factors:
            body = coeff_txt + "*" + "*".join(factors)
        else:
            body = coeff_txt
        if not parts:
            parts.append(("-" if negative else "") + body)
        else:
            parts.append(("- " if negative else "+ ") + body)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# The two recurrence families.  Both satisfy p_{n+1} = x*p_n + p_{n-1}; the
# f family (seeds 1, 0) is a shifted Chebyshev-II ladder and the g family
# (seeds x, -2) a shifted Chebyshev-I ladder.
# ---------------------------------------------------------------------------

_X = UniPoly({1: 1})
_F_CACHE: list[UniPoly] = [UniPoly({0: 1}), UniPoly({})]
_G_CACHE: list[UniPoly] = [UniPoly({1: 1}), UniPoly({0: -2})]
_CACHE_LOCK = _threading.Lock()


def _ladder(cache: list[UniPoly], n: int) -> UniPoly:
    if n < 0:
        raise ValueError("recurrence index must be nonnegative")
    if len(cache) <= n:
        # extend under a lock so concurrent callers never see a torn ladder
        with _CACHE_LOCK:
            while len(cache) <= n:
                cache.append(_X * cache[-1] + cache[-2])
    return cache[n]


def f_poly(n: int) -> UniPoly:
    """n-th polynomial of the ladder f_0=1, f_1=0, f_{n+1} = x f_n + f_{n-1}."""
    return _ladder(_F_CACHE, n)


def g_poly(n: int) -> UniPoly:
    """n-th polynomial of the ladder g_0=x, g_1=-2, g_{n+1} = x g_n + g_{n-1}."""
    return _ladder(_G_CACHE, n)


def f_values(x: float, n_max: int) -> list[float]:
    """[f_0(x), ..., f_{n_max}(x)] by direct recurrence (float)."""
    vals = [1.0, 0.0]
    for _ in range(2, n_max + 1):
        vals.append(x * vals[-1] + vals[-2])
    return vals[: n_max + 1]


def g_values(x: float, n_max: int) -> list[float]:
    """[g_0(x), ..., g_{n_max}(x)] by direct recurrence (float)."""
    vals = [x, -2.0]
    for _ in range(2, n_max + 1):
        vals.append(x * vals[-1] + vals[-2])
    return vals[: n_max + 1]


def f_product_identity_check(n: int, m: int) -> bool:
    """Whether f_{n+m-2} = f_n f_m + f_{n-1} f_{m-1} holds exactly."""
    if n < 1 or m < 1:
        raise ValueError("identity requires n, m >= 1")
    lhs = f_poly(n + m - 2)
    rhs = f_poly(n) * f_poly(m) + f_poly(n - 1) * f_poly(m - 1)
    return lhs == rhs


def exact_divide(num: UniPoly, den: UniPoly) -> UniPoly:
    """Exact polynomial division: return q with num == q*den.

    Raises DivisibilityError if any coefficient step is inexact or a
    nonzero remainder survives.
    """
    from .exceptions import DivisibilityError

    if den.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    rem = dict(num.coeffs)
    dd = den.degree
    dlead = den.coeffs[dd]
    quot: dict = {}
    while rem:
        rd = max(rem)
        if rd < dd:
            raise DivisibilityError(f"nonzero remainder of degree {rd}")
        q = _coeff_exact_div(rem[rd], dlead)
        if q is None:
            raise DivisibilityError("leading coefficient not divisible")
        quot[rd - dd] = q
        for e, c in den.coeffs.items():
            k = rd - dd + e
            s = rem.get(k, 0) - q * c
            if s == 0:
                rem.pop(k, None)
            else:
                rem[k] = s
    return UniPoly(quot, num.var)
