"""Weighted-degree polynomial maps Z^m -> R/Z with initial degrees D_i.

The basic generator p^j e_i carries weighted degree D_i + j(p-1); a map has
weighted degree <= d when every iterated difference along generators of
total degree > d vanishes.  Such maps are exactly the combinations
alpha + sum c/p^(r+1) binom(x_1, i_1) ... binom(x_m, i_m) over terms with
(sum_j D_j i_j) + r(p-1) <= d, they are periodic with period p^j e_i as
soon as D_i + j(p-1) > d, and they admit p-th roots by the denominator
shift r -> r+1 at the cost of p-1 degrees.

The module also holds Factor: families of torus polynomials on F_p^n
chained by p * P_(i,j) = P_(i,j-1), with depth extension via canonical
p-th roots and degree retraction.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import TorusValue, validate_prime
from .poly import NCPoly, NotPolynomialError


def gen_binom(x: int, i: int) -> int:
    """binom(x, i) for any integer x (product formula; integral)."""
    out = 1
    for u in range(i):
        out = out * (x - u) // (u + 1)
    return out


class WeightedPoly:
    """Canonical binomial-basis representation of a weighted-degree map."""

    __slots__ = ("p", "m", "D", "alpha", "terms")

    def __init__(self, p: int, m: int, D: Sequence[int], alpha: TorusValue,
                 terms: dict[tuple[tuple[int, ...], int], int] | None = None):
        validate_prime(p)
        if len(D) != m or any(d < 1 for d in D):
            raise ValueError("initial degrees must be >= 1, one per coordinate")
        self.p = p
        self.m = m
        self.D = tuple(D)
        self.alpha = alpha
        self.terms = {}
        for (i_vec, r), c in (terms or {}).items():
            mod = p ** (r + 1)
            c %= mod
            if c == 0:
                continue
            if c % p == 0:
                raise ValueError("coefficient divisible by p: reduce the depth r")
            if len(i_vec) != m or any(i < 0 for i in i_vec) or sum(i_vec) == 0:
                raise ValueError(f"bad exponent vector {i_vec}")
            self.terms[(tuple(i_vec), r)] = c

    def term_degree(self, i_vec: tuple[int, ...], r: int) -> int:
        return sum(d * i for d, i in zip(self.D, i_vec)) + r * (self.p - 1)

    def degree(self) -> float:
        if self.terms:
            return max(self.term_degree(i, r) for (i, r) in self.terms)
        return 0 if not self.alpha.is_zero() else float("-inf")

    def eval(self, x: Sequence[int]) -> TorusValue:
        total = self.alpha.as_fraction()
        for (i_vec, r), c in self.terms.items():
            mono = 1
            for xt, it in zip(x, i_vec):
                mono *= gen_binom(xt, it)
            total += Fraction(c * mono, self.p ** (r + 1))
        return TorusValue.from_fraction(self.p, total)

    def pth_root(self) -> "WeightedPoly":
        """p*root = self; per-term denominator shift, degree cost p-1."""
        alpha = TorusValue(self.p, self.alpha.num, self.alpha.exp + 1) \
            if not self.alpha.is_zero() else self.alpha
        return WeightedPoly(
            self.p, self.m, self.D, alpha,
            {(i, r + 1): c for (i, r), c in self.terms.items()})

    def scale_by_p(self) -> "WeightedPoly":
        """p * self: depth decrement; the r = 0 layer is annihilated."""
        terms = {}
        for (i, r), c in self.terms.items():
            if r >= 1 and c % self.p**r:
                terms[(i, r - 1)] = c % self.p**r
        return WeightedPoly(self.p, self.m, self.D, self.alpha.scale(self.p),
                            terms)

    def periods(self, d: int | None = None) -> tuple[int, ...]:
        """Periods p^K_i with K_i minimal such that D_i + K_i(p-1) > d."""
        if d is None:
            d = self.degree()
            d = 0 if d == float("-inf") else int(d)
        out = []
        for Di in self.D:
            j = 0
            while Di + j * (self.p - 1) <= d:
                j += 1
            out.append(self.p**j)
        return tuple(out)

    def tabulate(self, shape: Sequence[int]) -> "PeriodicMap":
        K = max([self.alpha.exp] + [r + 1 for (_, r) in self.terms], default=0)
        nums = np.zeros(tuple(shape), dtype=np.int64)
        mod = self.p**K if K else 1
        for x in itertools.product(*(range(s) for s in shape)):
            v = self.eval(x)
            nums[x] = v.num * self.p ** (K - v.exp)
        return PeriodicMap(self.p, self.m, self.D, tuple(shape), nums, K)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedPoly):
            return NotImplemented
        return (self.p, self.m, self.D, self.alpha, self.terms) == (
            other.p, other.m, other.D, other.alpha, other.terms)

    def to_json(self) -> dict:
        return {
            "p": self.p, "m": self.m, "D": list(self.D),
            "alpha": self.alpha.to_json(),
            "terms": [{"i": list(i), "r": r, "c": c}
                      for (i, r), c in sorted(self.terms.items())],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WeightedPoly":
        p = int(obj["p"])
        return cls(
            p, int(obj["m"]), [int(d) for d in obj["D"]],
            TorusValue.from_json(p, obj.get("alpha", {"num": 0, "exp": 0})),
            {(tuple(int(v) for v in t["i"]), int(t["r"])): int(t["c"])
             for t in obj.get("terms", [])},
        )

    def __repr__(self) -> str:
        return f"WeightedPoly(p={self.p}, D={self.D}, {len(self.terms)} terms)"


class PeriodicMap:
    """A periodic map Z^m -> (1/p^K)Z/Z stored on its fundamental box."""

    __slots__ = ("p", "m", "D", "box", "nums", "K")

    def __init__(self, p: int, m: int, D: Sequence[int], box: Sequence[int],
                 nums: np.ndarray, K: int):
        self.p = p
        self.m = m
        self.D = tuple(D)
        self.box = tuple(box)
        self.nums = np.asarray(nums, dtype=np.int64) % (p**K if K else 1)
        self.K = K
        for side in self.box:
            e = side
            while e % p == 0:
                e //= p
            if e != 1:
                raise ValueError("periods must be powers of p")

    def value(self, x: Sequence[int]) -> TorusValue:
        idx = tuple(int(xt) % s for xt, s in zip(x, self.box))
        return TorusValue(self.p, int(self.nums[idx]), self.K)

    def diff(self, axis: int, step: int) -> "PeriodicMap":
        """Forward difference along step * e_axis, using periodic wrap."""
        mod = self.p**self.K if self.K else 1
        rolled = np.roll(self.nums, -step, axis=axis)
        return PeriodicMap(self.p, self.m, self.D, self.box,
                           (rolled - self.nums) % mod, self.K)

    def is_zero(self) -> bool:
        return not self.nums.any()


def weighted_degree(f: "WeightedPoly | PeriodicMap",
                    d_cap: int | None = None) -> float:
    """Weighted degree: max term degree for binomial-basis input, else the
    least d passing the derivative criterion on the fundamental box."""
    if isinstance(f, WeightedPoly):
        return f.degree()
    if not isinstance(f, PeriodicMap):
        raise TypeError("need a WeightedPoly or a PeriodicMap with periods")
    if f.is_zero():
        return float("-inf")
    if d_cap is None:
        d_cap = sum(d * (s - 1) for d, s in zip(f.D, f.box)) \
            + max(f.K - 1, 0) * (f.p - 1) + f.p
    for d in range(0, d_cap + 1):
        if _degree_at_most(f, d):
            return d
    raise NotPolynomialError(f"no weighted degree <= {d_cap} fits")


def _degree_at_most(f: PeriodicMap, d: int) -> bool:
    p = f.p
    # forced periods: p^j e_i is a period once D_i + j(p-1) > d
    gens: list[tuple[int, int, int]] = []  # (axis, step, degree)
    for i, Di in enumerate(f.D):
        j = 0
        while Di + j * (p - 1) <= d:
            gens.append((i, p**j % f.box[i], Di + j * (p - 1)))
            j += 1
        if p**j % f.box[i] != 0 and not f.diff(i, p**j % f.box[i]).is_zero():
            return False

    # minimal violating multigenerators: total degree > d but any proper
    # sub-multiset within d
    def rec(table: PeriodicMap, start: int, total: int) -> bool:
        for g in range(start, len(gens)):
            axis, step, deg = gens[g]
            if total + deg > d:
                if total + deg - deg <= d:  # minimal violator
                    if not table.diff(axis, step).is_zero():
                        return False
                continue
            if not rec(table.diff(axis, step), g, total + deg):
                return False
        return True

    return rec(f, 0, 0)


def binomial_expand(f: PeriodicMap, d_bound: int) -> WeightedPoly:
    """Unique binomial-basis coefficients of a weighted degree <= d map.

    Newton coefficients are iterated forward differences at the origin; the
    basis is triangular under differencing so round-trips are exact.  A
    residual after reconstruction means the input exceeds the bound.
    """
    p, m = f.p, f.m
    maxi = [d_bound // Di for Di in f.D]
    alpha = f.value((0,) * m)
    terms: dict[tuple[tuple[int, ...], int], int] = {}
    for i_vec in itertools.product(*(range(mi + 1) for mi in maxi)):
        if sum(Di * ii for Di, ii in zip(f.D, i_vec)) > d_bound:
            continue
        table = f
        for axis, reps in enumerate(i_vec):
            for _ in range(reps):
                table = table.diff(axis, 1)
        gamma = table.value((0,) * m)
        if sum(i_vec) == 0 or gamma.is_zero():
            continue
        r = gamma.exp - 1
        if sum(Di * ii for Di, ii in zip(f.D, i_vec)) + r * (p - 1) > d_bound:
            raise NotPolynomialError(
                f"coefficient at {i_vec} has depth {r}: exceeds degree bound")
        terms[(i_vec, r)] = gamma.num
    out = WeightedPoly(p, m, f.D, alpha, terms)
    # residual check on the common-period box
    check_box = tuple(max(sf, so) for sf, so in zip(f.box, out.periods(d_bound)))
    for x in itertools.product(*(range(s) for s in check_box)):
        if out.eval(x) != f.value(x):
            raise NotPolynomialError("reconstruction residual: exceeds degree bound")
    return out


def weighted_pth_root(f: WeightedPoly) -> WeightedPoly:
    return f.pth_root()


def periodicity_check(f: WeightedPoly, d: int) -> dict:
    """Confirm the forced periods and extract the top linear part:
    for every i with some j_i solving D_i + j_i(p-1) = d, the difference
    along p^(j_i) e_i is the constant c_i / p."""
    p = f.p
    periods = f.periods(d)
    table = f.tabulate(periods)
    report: dict = {"periods": {}, "top_coefficients": {}, "pass": True}
    for i, per in enumerate(periods):
        ok = all(
            f.eval(tuple(x + (per if t == i else 0) for t, x in enumerate(pt)))
            == f.eval(pt)
            for pt in itertools.product(*(range(s) for s in periods))
        )
        report["periods"][f"p^{round(math.log(per, p))}e_{i+1}"] = ok
        report["pass"] &= ok
    for i, Di in enumerate(f.D):
        if (d - Di) % (p - 1) != 0 or d < Di:
            continue
        j_i = (d - Di) // (p - 1)
        step = p**j_i % periods[i]
        if step == 0:
            # p^(j_i) e_i is already a full period: the difference is zero
            report["top_coefficients"][i + 1] = 0
            continue
        diffed = table.diff(i, step)
        vals = {diffed.value(pt) for pt in
                itertools.product(*(range(s) for s in periods))}
        if len(vals) != 1:
            report["pass"] = False
            report["top_coefficients"][i + 1] = None
            continue
        v = vals.pop()
        if v.is_zero():
            report["top_coefficients"][i + 1] = 0
        elif v.exp == 1:
            report["top_coefficients"][i + 1] = v.num
        else:
            report["pass"] = False
            report["top_coefficients"][i + 1] = None
    return report


# ---------------------------------------------------------------------------
# factors: chained families p * P_(i,j) = P_(i,j-1)


class Factor:
    """A family of torus polynomials chained by multiplication by p.

    chains[i] is (D_i, [P_(i,0), ..., P_(i,J_i)]) with deg P_(i,j) bounded
    by D_i + j(p-1), values of P_(i,j) in (1/p^(j+1))Z/Z, and
    p P_(i,j) = P_(i,j-1) (the j = 0 layer is classical).  Regularity is an
    asymptotic notion and is accepted as a caller-supplied flag only.
    """

    def __init__(self, p: int, n: int,
                 chains: Sequence[tuple[int, Sequence[NCPoly]]],
                 regular: bool = False):
        self.p = p
        self.n = n
        self.chains = [(int(D), list(polys)) for D, polys in chains]
        self.regular = regular
        self.validate()

    def validate(self) -> None:
        p = self.p
        for D, polys in self.chains:
            if D < 2:
                raise ValueError("initial degrees must be >= 2")
            prev: NCPoly | None = None
            for j, poly in enumerate(polys):
                if (poly.p, poly.n) != (p, self.n):
                    raise ValueError("chain polynomial on the wrong space")
                if poly.K > j + 1:
                    raise ValueError(
                        f"layer {j} takes values outside (1/p^{j+1})Z/Z")
                if poly.degree() > D + j * (p - 1):
                    raise ValueError(f"layer {j} exceeds degree {D + j*(p-1)}")
                mult = poly.mul_by_p()
                if prev is None:
                    if not mult.is_zero():
                        raise ValueError("layer 0 is not classical")
                elif mult != prev:
                    raise ValueError(f"broken chain at layer {j}")
                prev = poly

    @property
    def dimension(self) -> int:
        return len(self.chains)

    @property
    def depths(self) -> tuple[int, ...]:
        return tuple(len(polys) - 1 for _, polys in self.chains)

    @property
    def initial_degrees(self) -> tuple[int, ...]:
        return tuple(D for D, _ in self.chains)

    def degree(self) -> int:
        return max(
            (D + (len(polys) - 1) * (self.p - 1) for D, polys in self.chains),
            default=0)

    def depth_extend(self, new_depths: Sequence[int]) -> "Factor":
        """Adjoin canonical p-th roots so chain i reaches depth new_depths[i];
        original layers are untouched."""
        if len(new_depths) != self.dimension:
            raise ValueError("one target depth per chain")
        chains = []
        for (D, polys), target in zip(self.chains, new_depths):
            if target < len(polys) - 1:
                raise ValueError("depth extension cannot shrink a chain")
            polys = list(polys)
            while len(polys) - 1 < target:
                polys.append(polys[-1].pth_root())
            chains.append((D, polys))
        return Factor(self.p, self.n, chains, regular=self.regular)

    def retract(self, d: int) -> "Factor":
        """Degree <= d depth retraction: delete layers with D_i + j(p-1) > d."""
        chains = []
        for D, polys in self.chains:
            kept = [poly for j, poly in enumerate(polys)
                    if D + j * (self.p - 1) <= d]
            if kept:
                chains.append((D, kept))
        return Factor(self.p, self.n, chains, regular=self.regular)

    def top_values(self, idx: int) -> tuple[int, ...]:
        """Integer coordinates a_i with P_(i,J_i)(x) = a_i / p^(J_i+1)."""
        out = []
        for _, polys in self.chains:
            top = polys[-1]
            J = len(polys) - 1
            out.append(int(top.nums[idx]) * self.p ** (J + 1 - top.K)
                       % self.p ** (J + 1))
        return tuple(out)

    def pullback(self, wp: WeightedPoly) -> NCPoly:
        """Q(x) = f(a_1, ..., a_m) through the top coordinates."""
        if wp.m != self.dimension:
            raise ValueError("dimension mismatch")
        from .core import space
        sp = space(self.p, self.n)
        values = [wp.eval(self.top_values(idx)) for idx in range(sp.size)]
        return NCPoly.from_values(self.p, self.n, values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Factor):
            return NotImplemented
        return (self.p, self.n, self.chains) == (other.p, other.n, other.chains)

    def to_json(self) -> dict:
        return {
            "p": self.p, "n": self.n,
            "chains": [
                {"D": D, "J": len(polys) - 1,
                 "polys": [poly.to_json() for poly in polys]}
                for D, polys in self.chains
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Factor":
        return cls(
            int(obj["p"]), int(obj["n"]),
            [(int(ch["D"]), [NCPoly.from_json(pj) for pj in ch["polys"]])
             for ch in obj["chains"]],
        )


def factor_depth_extend(F: Factor, new_depths: Sequence[int]) -> Factor:
    return F.depth_extend(new_depths)


def factor_retract(F: Factor, d: int) -> Factor:
    return F.retract(d)
