"""Vectorised exhaustive scans over cube groups.

Elements of a product of cyclic groups are packed into mixed-radix integer
codes; whole populations of 2^k-tuples are then checked against both cube
criteria (face alternating sums vs Taylor coefficients) with numpy
arithmetic.  When the ambient tuple count is too large to scan, the face
solution set is counted exactly instead: it is the kernel of an explicit
homomorphism into a product of quotients, so its size is the ambient size
divided by the size of the image subgroup, which a breadth-first span
computes exactly.
"""

from __future__ import annotations

import numpy as np

from .core import BudgetExceeded
from .cubes import CubePoint, FilteredAbelianGroup, _faces, hk_size


def element_code(G: FilteredAbelianGroup, g) -> int:
    code = 0
    radix = 1
    for x, o in zip(g, G.orders):
        code += (x % o) * radix
        radix *= o
    return code


def code_element(G: FilteredAbelianGroup, code: int):
    out = []
    for o in G.orders:
        out.append(code % o)
        code //= o
    return tuple(out)


def _member_tables(G: FilteredAbelianGroup, k: int) -> list[np.ndarray]:
    tables = []
    for i in range(k + 1):
        tab = np.zeros(G.size, dtype=bool)
        for g in G.level(i):
            tab[element_code(G, g)] = True
        tables.append(tab)
    return tables


def _signed_sum_codes(tuples: np.ndarray, masks, signs, G: FilteredAbelianGroup
                      ) -> np.ndarray:
    """Codes of sum_j signs[j] * tuples[:, masks[j]] in the product group."""
    total = np.zeros(len(tuples), dtype=np.int64)
    radix = 1
    for t, o in enumerate(G.orders):
        comp = np.zeros(len(tuples), dtype=np.int64)
        for m, s in zip(masks, signs):
            dig = tuples[:, m] // radix % o
            comp = comp + (dig if s > 0 else -dig)
        total = total + comp % o * radix
        radix *= o
    return total


def face_member_mask(tuples: np.ndarray, G: FilteredAbelianGroup, k: int,
                     member=None) -> np.ndarray:
    """Which rows satisfy the face criterion (all alternating sums in G_i)."""
    member = member or _member_tables(G, k)
    mask = np.ones(len(tuples), dtype=bool)
    for dim, masks in _faces(k):
        signs = [1 if bin(m).count("1") % 2 == 0 else -1 for m in masks]
        codes = _signed_sum_codes(tuples, masks, signs, G)
        mask &= member[dim][codes]
        if not mask.any():
            break
    return mask


def taylor_member_mask(tuples: np.ndarray, G: FilteredAbelianGroup, k: int,
                       member=None) -> np.ndarray:
    """Which rows have every Taylor coefficient g_J inside G_|J|."""
    member = member or _member_tables(G, k)
    mask = np.ones(len(tuples), dtype=bool)
    for J in range(1 << k):
        subs = [I for I in range(J + 1) if I & J == I]
        signs = [1 if (bin(J).count("1") - bin(I).count("1")) % 2 == 0 else -1
                 for I in subs]
        codes = _signed_sum_codes(tuples, subs, signs, G)
        mask &= member[bin(J).count("1")][codes]
    return mask


def equivalence_scan(G: FilteredAbelianGroup, k: int, chunk: int = 1 << 18,
                     full_cap: int = 1 << 24) -> dict:
    """Face criterion vs Taylor criterion over every tuple in G^(2^k).

    Returns {"tuples", "disagreements", "members"}; the scan is chunked and
    deterministic.  Raises BudgetExceeded past full_cap.
    """
    total = G.size ** (1 << k)
    if total > full_cap:
        raise BudgetExceeded(f"{total} tuples exceeds scan cap {full_cap}")
    member = _member_tables(G, k)
    disagreements = 0
    members = 0
    width = 1 << k
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        tuples = np.empty((len(codes), width), dtype=np.int64)
        for e in range(width):
            tuples[:, e] = codes // G.size**e % G.size
        m_face = face_member_mask(tuples, G, k, member)
        m_taylor = taylor_member_mask(tuples, G, k, member)
        disagreements += int((m_face != m_taylor).sum())
        members += int(m_face.sum())
    return {"tuples": total, "disagreements": disagreements, "members": members}


def counted_equivalence(G: FilteredAbelianGroup, k: int,
                        span_cap: int = 1 << 21) -> dict:
    """Exact equivalence check without scanning every tuple.

    Both criteria cut out subgroups of G^(2^k).  The Taylor set has exactly
    prod_J |G_|J|| elements (the parameterisation is injective), and every
    HK generator satisfies the face criterion, so Taylor subset-of face
    holds; the face set is the kernel of the homomorphism sending a tuple
    to its face sums in the quotients G/G_i, whose image a breadth-first
    span counts.  Equal cardinalities then force equality of the two sets.
    """
    taylor_count = hk_size(G, k)
    member = _member_tables(G, k)

    # HK generators satisfy the face criterion
    width = 1 << k
    for dim, masks in _faces(k):
        codim_level = G.level(k - dim)
        for g in codim_level:
            entries = [g if m in masks else G.zero for m in range(width)]
            cube = np.array([[element_code(G, e) for e in entries]])
            if not face_member_mask(cube, G, k, member)[0]:
                return {"equal": False, "reason": "generator fails face test"}

    # label maps: canonical coset representative codes per level
    label_maps = []
    add_table_needed = max(G.orders) ** 0  # keep lints quiet
    for i in range(k + 1):
        lab = np.full(G.size, -1, dtype=np.int64)
        level_codes = [element_code(G, g) for g in G.level(i)]
        for x in range(G.size):
            xe = code_element(G, x)
            reps = [element_code(G, G.add(xe, code_element(G, c)))
                    for c in level_codes]
            lab[x] = min(reps)
        label_maps.append(lab)

    faces = _faces(k)

    def phi(tuple_codes: tuple[int, ...]) -> tuple[int, ...]:
        out = []
        for dim, masks in faces:
            total = G.zero
            for m in masks:
                e = code_element(G, tuple_codes[m])
                total = G.add(total, e if bin(m).count("1") % 2 == 0 else G.neg(e))
            out.append(int(label_maps[dim][element_code(G, total)]))
        return tuple(out)

    # generators of the ambient tuple group: unit digits at each vertex
    gens = []
    for e in range(width):
        radix = 1
        for o in G.orders:
            if o > 1:
                tup = [0] * width
                tup[e] = radix
                gens.append(tuple(tup))
            radix *= o

    def add_tuples(a, b):
        out = []
        for x, y in zip(a, b):
            xe, ye = code_element(G, x), code_element(G, y)
            out.append(element_code(G, G.add(xe, ye)))
        return tuple(out)

    zero_tuple = tuple([0] * width)
    image = {phi(zero_tuple): zero_tuple}
    frontier = [zero_tuple]
    while frontier:
        cur = frontier.pop()
        for g in gens:
            nxt = add_tuples(cur, g)
            key = phi(nxt)
            if key not in image:
                if len(image) >= span_cap:
                    raise BudgetExceeded("image span exceeds cap")
                image[key] = nxt
                frontier.append(nxt)
    face_count = G.size**width // len(image)
    return {
        "equal": face_count == taylor_count,
        "taylor_count": taylor_count,
        "face_count": face_count,
        "image_size": len(image),
    }


def enumerate_cube_codes(G: FilteredAbelianGroup, k: int,
                         cap: int = 1 << 20) -> np.ndarray:
    """All k-cubes as an (M, 2^k) array of element codes (Taylor parameterised)."""
    M = hk_size(G, k)
    if M > cap:
        raise BudgetExceeded(f"{M} cubes exceeds cap {cap}")
    width = 1 << k
    level_codes = [
        np.array(sorted(element_code(G, g) for g in G.level(bin(J).count("1"))),
                 dtype=np.int64)
        for J in range(width)
    ]
    combos = np.stack(
        [g.reshape(-1) for g in np.meshgrid(*level_codes, indexing="ij")], axis=1
    ) if width else np.zeros((1, 0), dtype=np.int64)
    out = np.zeros((len(combos), width), dtype=np.int64)
    for omega in range(width):
        acc = np.zeros(len(combos), dtype=np.int64)
        radix = 1
        for o in G.orders:
            comp = np.zeros(len(combos), dtype=np.int64)
            sub = omega
            while True:
                comp += combos[:, sub] // radix % o
                if sub == 0:
                    break
                sub = (sub - 1) & omega
            acc += comp % o * radix
            radix *= o
        out[:, omega] = acc
    return out


def preserves_cubes_fast(phi_codes: np.ndarray, H: FilteredAbelianGroup,
                         G: FilteredAbelianGroup, k_max: int,
                         cap: int = 1 << 20):
    """Entrywise image of every H-cube is a G-cube, vectorised.

    phi_codes maps H element codes to G element codes.  Returns
    (preserved, counterexample CubePoint or None).
    """
    for k in range(k_max + 1):
        cubes = enumerate_cube_codes(H, k, cap=cap)
        images = phi_codes[cubes]
        mask = face_member_mask(images, G, k, _member_tables(G, k))
        if not mask.all():
            bad = cubes[int(np.argmin(mask))]
            cube = CubePoint(k, [code_element(H, int(c)) for c in bad])
            return False, cube
    return True, None
