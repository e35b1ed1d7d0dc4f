"""Symmetric multilinear forms V^k -> F_p and their calculus.

A form is stored by its values on sorted basis tuples (equivalently,
coordinate multisets) and extended everywhere by multilinearity.  The
classical ones (CSMForm) vanish whenever p or more arguments coincide;
their coefficients live on multisets with every multiplicity below p, and
they are exactly the k-th derivatives of classical polynomials.

The bias of a form is computed exactly by counting, over the first k-1
arguments, how often the remaining slot yields the zero character; the
last-slot test only needs the n basis directions.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import (
    FVec,
    UnityCounter,
    check_budget,
    space,
)
from .parallel import chunk_ranges, ordered_map
from .poly import CanonicalForm, NCPoly, TorusValue

Multiset = tuple[int, ...]


class MultilinearForm:
    """Symmetric k-linear map V^k -> F_p given by values on basis multisets."""

    classical = False

    def __init__(self, p: int, n: int, k: int, coeffs: dict[Multiset, int] | None = None):
        if k < 1:
            raise ValueError("arity must be >= 1")
        self.p = p
        self.n = n
        self.k = k
        self.coeffs: dict[Multiset, int] = {}
        for key, c in (coeffs or {}).items():
            c %= p
            if c == 0:
                continue
            key = tuple(sorted(key))
            if len(key) != k or any(not 0 <= i < n for i in key):
                raise ValueError(f"bad multiset {key}")
            self._validate(key)
            self.coeffs[key] = c

    def _validate(self, key: Multiset) -> None:
        pass

    def value(self, key: Iterable[int]) -> int:
        return self.coeffs.get(tuple(sorted(key)), 0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultilinearForm):
            return NotImplemented
        return (self.p, self.n, self.k, self.coeffs) == (
            other.p, other.n, other.k, other.coeffs)

    def __add__(self, other: "MultilinearForm") -> "MultilinearForm":
        out: dict[Multiset, int] = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = (out.get(key, 0) + c) % self.p
        cls = CSMForm if self.classical and other.classical else MultilinearForm
        return cls(self.p, self.n, self.k, out)

    def scale(self, a: int) -> "MultilinearForm":
        return type(self)(self.p, self.n, self.k,
                          {key: a * c for key, c in self.coeffs.items()})

    def dense_tensor(self) -> np.ndarray:
        """Full (n,)*k value tensor; filled via symmetry."""
        T = np.zeros((self.n,) * self.k, dtype=np.int8)
        for key, c in self.coeffs.items():
            for perm in set(itertools.permutations(key)):
                T[perm] = c
        return T

    def evaluate(self, args: Sequence[FVec]) -> int:
        if len(args) != self.k:
            raise ValueError(f"need {self.k} arguments")
        idx = np.array([[a.idx] for a in args], dtype=np.int64)
        return int(self.eval_batch([row for row in idx])[0])

    def eval_batch(self, arg_indices: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate on B tuples given as k index arrays of shape (B,)."""
        sp = space(self.p, self.n)
        dig = sp.digits.astype(np.int64)
        cur = np.broadcast_to(
            self.dense_tensor().astype(np.int64).reshape((1,) + (self.n,) * self.k),
            (len(arg_indices[0]),) + (self.n,) * self.k,
        )
        for t, idx in enumerate(arg_indices):
            d = dig[np.asarray(idx, dtype=np.int64)]  # (B, n)
            rest = self.n ** (self.k - 1 - t)
            cur = (
                np.einsum("bi,bir->br", d, cur.reshape(len(d), self.n, rest)) % self.p
            )
        return cur.reshape(-1)

    def argument_permutation_invariant(self, args: Sequence[FVec]) -> bool:
        vals = {self.evaluate([args[i] for i in perm])
                for perm in itertools.permutations(range(self.k))}
        return len(vals) == 1

    def to_json(self) -> dict:
        return {
            "p": self.p, "n": self.n, "k": self.k,
            "coeffs": [
                {"multiset": [i + 1 for i in key], "c": c}
                for key, c in sorted(self.coeffs.items())
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MultilinearForm":
        return cls(
            int(obj["p"]), int(obj["n"]), int(obj["k"]),
            {tuple(int(i) - 1 for i in t["multiset"]): int(t["c"])
             for t in obj.get("coeffs", [])},
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}(p={self.p}, n={self.n}, k={self.k}, {len(self.coeffs)} terms)"


class CSMForm(MultilinearForm):
    """Classical symmetric multilinear form: multiplicities stay below p."""

    classical = True

    def _validate(self, key: Multiset) -> None:
        for i in set(key):
            if key.count(i) >= self.p:
                raise ValueError(
                    f"multiplicity >= p in {key}: form is not classical")


# ---------------------------------------------------------------------------
# extraction and antiderivative


def dk_extract(P: NCPoly, k: int) -> MultilinearForm:
    """The k-fold derivative d^k P as a symmetric multilinear form.

    Requires deg P <= k so that the iterated derivative is independent of
    the base point.  Returns a CSMForm when P is classical.
    """
    if P.degree() > k:
        raise ValueError(f"degree {P.degree()} exceeds arity {k}: d^k depends on x")
    sp = space(P.p, P.n)
    coeffs: dict[Multiset, int] = {}
    for key in itertools.combinations_with_replacement(range(P.n), k):
        units = [sp.unit_index(i) for i in key]
        total = 0
        modK = P.p**P.K if P.K else 1
        for mask in range(1 << k):
            idx = 0
            for t in range(k):
                if mask >> t & 1:
                    idx = sp.add_indices(idx, units[t])
            sign = 1 if (k - bin(mask).count("1")) % 2 == 0 else -1
            total += sign * int(P.nums[idx])
        val = TorusValue(P.p, total, P.K)
        if val.is_zero():
            continue
        if val.exp != 1:
            raise ValueError("d^k values left iota(F); input is not a polynomial")
        coeffs[key] = val.num
    if P.is_classical():
        return CSMForm(P.p, P.n, k, coeffs)
    return MultilinearForm(P.p, P.n, k, coeffs)


def antiderivative(T: CSMForm) -> NCPoly:
    """A classical P of degree <= k with d^k P = T (monomial construction:
    each multiset A contributes iota(prod x_j^(a_j) / a_j!))."""
    if not T.classical:
        raise ValueError("antiderivative needs a classical form")
    p = T.p
    terms: dict[tuple[tuple[int, ...], int], int] = {}
    for key, c in T.coeffs.items():
        exps = [0] * T.n
        for i in key:
            exps[i] += 1
        inv_fact = 1
        for a in exps:
            fact = 1
            for u in range(2, a + 1):
                fact = fact * u % p
            inv_fact = inv_fact * pow(fact, p - 2, p) % p
        slot = (tuple(exps), 0)
        terms[slot] = (terms.get(slot, 0) + c * inv_fact) % p
    return NCPoly.from_canonical(
        CanonicalForm(p, T.n, TorusValue.zero(p), terms))


# ---------------------------------------------------------------------------
# concatenation and symmetric powers


def concat(S: MultilinearForm, T: MultilinearForm) -> MultilinearForm:
    """Concatenation S * T: sum over partitions of the k+l argument slots."""
    if (S.p, S.n) != (T.p, T.n):
        raise ValueError("mismatched forms")
    p, n = S.p, S.n
    k, l = S.k, T.k
    out: dict[Multiset, int] = {}
    for tup in itertools.combinations_with_replacement(range(n), k + l):
        total = 0
        for A in itertools.combinations(range(k + l), k):
            Aset = set(A)
            left = tuple(tup[i] for i in A)
            right = tuple(tup[i] for i in range(k + l) if i not in Aset)
            total += S.value(left) * T.value(right)
        if total % p:
            out[tup] = total % p
    cls = CSMForm if S.classical and T.classical else MultilinearForm
    return cls(p, n, k + l, out)


def _block_partitions(positions: tuple[int, ...], k: int):
    """Partitions of positions into unordered blocks of size k."""
    if not positions:
        yield ()
        return
    first = positions[0]
    rest = positions[1:]
    for companions in itertools.combinations(rest, k - 1):
        block = (first,) + companions
        remaining = tuple(i for i in rest if i not in companions)
        for tail in _block_partitions(remaining, k):
            yield (block,) + tail


def sym_power(T: MultilinearForm, m: int) -> MultilinearForm:
    """Sym^m(T): sum over partitions into m blocks of size k; defined for
    k >= 2 (the classicality argument fails for linear forms)."""
    if T.k < 2:
        raise ValueError("symmetric powers need arity k >= 2")
    if m < 1:
        raise ValueError("m must be positive")
    p, n, k = T.p, T.n, T.k
    out: dict[Multiset, int] = {}
    for tup in itertools.combinations_with_replacement(range(n), m * k):
        total = 0
        for blocks in _block_partitions(tuple(range(m * k)), k):
            prod = 1
            for block in blocks:
                prod = prod * T.value(tuple(tup[i] for i in block)) % p
                if prod == 0:
                    break
            total += prod
        if total % p:
            out[tup] = total % p
    cls = type(T) if T.classical else MultilinearForm
    return cls(p, n, m * k, out)


def binomial_lift_power(P: NCPoly, m: int, k: int | None = None) -> NCPoly:
    """A classical Q of degree <= mk with d^(mk) Q = Sym^m(d^k P).

    P is lifted to Z/p^(M+1) through iterated canonical p-th roots (M
    minimal with m < p^(M+1)); Q is the periodic map n -> binom(n, m) mod p
    applied to the lift.
    """
    if not P.is_classical():
        raise ValueError("binomial lift needs a classical polynomial")
    p = P.p
    if k is None:
        k = max(int(P.degree()), 2)
    if k < 2:
        raise ValueError("need degree bound k >= 2")
    if P.degree() > k:
        raise ValueError("degree exceeds stated bound")
    if m == 1:
        return P
    M = 0
    while p ** (M + 1) <= m:
        M += 1
    lift = P
    for _ in range(M):
        lift = lift.pth_root()
    modulus = p ** (M + 1)
    ints = lift.nums * (modulus // p**lift.K) % modulus
    binom_mod = np.array(
        [_comb(v, m) % p for v in range(modulus)], dtype=np.int64
    )
    return NCPoly.from_classical_table(p, P.n, binom_mod[ints])


def _comb(v: int, m: int) -> int:
    out = 1
    for u in range(m):
        out = out * (v - u) // (u + 1)
    return out


# ---------------------------------------------------------------------------
# exact bias


def bias(form: MultilinearForm, budget: int | None = None, threads: int = 1) -> Fraction:
    """E e(iota(T)) over V^k, exactly.

    Equals the density of (k-1)-tuples whose last-slot restriction vanishes
    identically; the restriction is tested on the n basis directions.
    """
    p, n, k = form.p, form.n, form.k
    N = space(p, n).size
    check_budget(N ** max(k - 1, 0) * max(n, 1), budget)
    if k == 1:
        zero = all(form.value((i,)) == 0 for i in range(n))
        return Fraction(1 if zero else 0, 1)
    if p == 2:
        count = _count_vanishing_p2(form, threads)
    else:
        count = _count_vanishing_generic(form, threads)
    return Fraction(count, N ** (k - 1))


def _packed_tensor(form: MultilinearForm) -> np.ndarray:
    """uint32 tensor of shape (n,)*(k-1): bit i holds T(e_..., e_i)."""
    n, k = form.n, form.k
    W = np.zeros((n,) * (k - 1), dtype=np.uint32)
    dense = form.dense_tensor()
    flat = dense.reshape((-1, n)) if k > 1 else dense.reshape(1, n)
    packed = np.zeros(flat.shape[0], dtype=np.uint32)
    for i in range(n):
        packed |= (flat[:, i].astype(np.uint32) & 1) << np.uint32(i)
    return packed.reshape(W.shape)


def _subset_xor_expand(words: np.ndarray) -> np.ndarray:
    """From per-bit words w_j, the xor-fold over every subset h: arr[h]."""
    n = words.shape[0]
    arr = np.zeros((1 << n,) + words.shape[1:], dtype=np.uint32)
    for j in range(n):
        arr[1 << j: 2 << j] = arr[: 1 << j] ^ words[j]
    return arr


def _xor_fold(W: np.ndarray, h: int) -> np.ndarray:
    out = np.zeros(W.shape[1:], dtype=np.uint32)
    m = 0
    while h:
        if h & 1:
            out = out ^ W[m]
        h >>= 1
        m += 1
    return out


def _count_vanishing_p2(form: MultilinearForm, threads: int) -> int:
    n, k = form.n, form.k
    W = _packed_tensor(form)

    def count_from(tensor: np.ndarray, arity_left: int) -> int:
        # tensor has shape (n,)*arity_left, one packed word per basis tuple
        if arity_left == 1:
            arr = _subset_xor_expand(tensor)
            return int(np.count_nonzero(arr == 0))
        if arity_left == 2:
            rows = _subset_xor_expand(tensor)           # (N, n)
            arr = np.zeros((rows.shape[0], 1 << n), dtype=np.uint32)
            for j in range(n):
                arr[:, 1 << j: 2 << j] = arr[:, : 1 << j] ^ rows[:, j: j + 1]
            return int(np.count_nonzero(arr == 0))

        def chunk_count(rng: range) -> int:
            sub = 0
            for h in rng:
                sub += count_from(_xor_fold(tensor, h), arity_left - 1)
            return sub

        chunks = chunk_ranges(range(1 << n), threads if arity_left == k - 1 else 1)
        return sum(ordered_map(chunk_count, chunks, threads))

    return count_from(W, k - 1)


def _count_vanishing_generic(form: MultilinearForm, threads: int) -> int:
    p, n, k = form.p, form.n, form.k
    sp = space(p, n)
    dig = sp.digits.astype(np.int64)
    D = form.dense_tensor().astype(np.int64)

    def rec(tensor: np.ndarray, arity_left: int) -> int:
        if arity_left == 1:
            vals = dig @ tensor % p  # (N, n) basis values per h
            return int(np.count_nonzero(~vals.any(axis=1)))
        total = 0
        for h in range(sp.size):
            folded = np.tensordot(dig[h], tensor, axes=(0, 0)) % p
            total += rec(folded, arity_left - 1)
        return total

    return rec(D, k - 1)


def naive_bias(form: MultilinearForm, budget: int | None = None) -> Fraction:
    """Direct |V|^k character sum, via exact residue counters."""
    p, n, k = form.p, form.n, form.k
    sp = space(p, n)
    N = sp.size
    check_budget(N**k, budget)
    dig = sp.digits.astype(np.int64)
    cur = form.dense_tensor().astype(np.int64)
    for t in range(k):
        cur = np.moveaxis(np.tensordot(dig, cur, axes=(1, t)) % p, 0, t)
    counter = UnityCounter(p, 1)
    counter.add_residues(cur.reshape(-1))
    frac = counter.expectation().as_fraction()
    assert frac is not None, "bias of a multilinear form must be rational"
    return frac


# ---------------------------------------------------------------------------
# the p-fold repetition identity


def check_dkp(P: NCPoly, k: int, trials: int = 64, rng=None,
              exhaustive_cap: int = 4096) -> tuple[int, list]:
    """Verify d^k P(h1 x p, h2, ..) = -d^(k-p+1)(pP)(h1, h2, ..) on tuples.

    Exhaustive when |V|^(k-p+1) fits under the cap, otherwise on random
    tuples.  Returns (number checked, failures).
    """
    p, n = P.p, P.n
    if k <= p:
        raise ValueError("identity needs k > p")
    if P.degree() > k:
        raise ValueError("degree exceeds k")
    sp = space(p, n)
    r = k - p + 1  # argument count
    pP = P.mul_by_p()
    N = sp.size

    def lhs_rhs(tup: tuple[int, ...]):
        cur = P
        for _ in range(p):
            cur = cur.derivative(FVec(p, n, tup[0]))
        for idx in tup[1:]:
            cur = cur.derivative(FVec(p, n, idx))
        lhs = cur.value_at_index(0)
        cur = pP
        for idx in tup:
            cur = cur.derivative(FVec(p, n, idx))
        rhs = cur.value_at_index(0)
        return lhs, rhs

    if N**r <= exhaustive_cap:
        tuples = itertools.product(range(N), repeat=r)
    else:
        if rng is None:
            raise ValueError("need an rng for sampled checking")
        tuples = (tuple(rng.below(N) for _ in range(r)) for _ in range(trials))

    checked = 0
    failures = []
    for tup in tuples:
        lhs, rhs = lhs_rhs(tuple(tup))
        checked += 1
        if lhs != -rhs:
            failures.append({"tuple": list(tup), "lhs": str(lhs), "rhs": str(rhs)})
    return checked, failures
