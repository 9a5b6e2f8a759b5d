"""Formal types and their classification under the relative affine Weyl group.

A formal type collects the Cartan coefficients of a reduced connection in
grades [-r, 0]; the relative affine Weyl group acts through
rho(n)(X) = Ad*(n) X - rho_s((dn) n^{-1}), realized here on generator words:
zeta-twists d_j, swaps of equal blocks, and the uniformizer translations.
Orbit equivalence is decided by enumerating the finite twist/swap group and
matching residue slots up to the (1/e_j)Z translation shifts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvalidFormalType, NotNormalizer
from .klinear import CYC_ZERO, Cyclotomic
from .matrices import LoopMatrix
from .scalars import PuiseuxSeries, ratio
from .strata import Connection, Stratum, centralizer_dimension
from .torus import TorusData, in_cartan, pi_s


class FormalType:
    """Coefficients a_{j,m} of w_j^m for grades m/e_j in [-depth, 0]."""

    __slots__ = ("torus", "depth", "coeffs")

    def __init__(self, torus: TorusData, depth, coeffs):
        self.torus = torus
        self.depth = ratio(depth)
        clean = {}
        for (j, m), c in coeffs.items():
            c = Cyclotomic.coerce(c)
            if c.is_zero():
                continue
            g = Fraction(m, torus.block_sizes[j])
            if g < -self.depth or g > 0:
                raise InvalidFormalType(
                    f"coefficient at grade {g} outside [-{self.depth}, 0]"
                )
            clean[(j, int(m))] = c
        self.coeffs = clean

    def coeff(self, j, m) -> Cyclotomic:
        return self.coeffs.get((j, int(m)), CYC_ZERO)

    def ordered_coeffs(self):
        return sorted(
            self.coeffs.items(),
            key=lambda kv: (Fraction(kv[0][1], self.torus.block_sizes[kv[0][0]]), kv[0][0]),
        )

    def lift_matrix(self) -> LoopMatrix:
        """The canonical Cartan lift: sum a_{j,m} w_j^m, exact."""
        out = LoopMatrix.zero(self.torus.n)
        for (j, m), c in self.coeffs.items():
            out = out + self.torus.uniformizer_power(j, m).scale(c)
        return out

    def leading_matrix(self) -> LoopMatrix:
        out = LoopMatrix.zero(self.torus.n)
        r = self.depth
        for (j, m), c in self.coeffs.items():
            if Fraction(m, self.torus.block_sizes[j]) == -r:
                out = out + self.torus.uniformizer_power(j, m).scale(c)
        return out

    def residues(self):
        """Grade-0 coefficients by block."""
        return [self.coeff(j, 0) for j in range(self.torus.num_blocks)]

    def __eq__(self, other):
        if not isinstance(other, FormalType):
            return NotImplemented
        return (
            self.torus.block_sizes == other.torus.block_sizes
            and self.depth == other.depth
            and set(self.coeffs) == set(other.coeffs)
            and all(self.coeffs[k] == other.coeffs[k] for k in self.coeffs)
        )

    def __repr__(self):
        items = ", ".join(
            f"(block {j+1}, grade {Fraction(m, self.torus.block_sizes[j])}): {c}"
            for (j, m), c in self.ordered_coeffs()
        )
        return f"FormalType(depth={self.depth}; {items or '0'})"


def validate(ft: FormalType):
    """(is_valid, diagnoses).  The leading term must be regular (graded
    centralizer of k-dimension n over a period); depth-zero types use the
    split torus and need all root values of the residue off Z."""
    diagnoses = []
    torus = ft.torus
    r = ft.depth
    if r == 0:
        if any(e != 1 for e in torus.block_sizes):
            diagnoses.append("depth-zero formal types use the split torus")
            return False, diagnoses
        res = [ft.coeff(j, 0) for j in range(torus.n)]
        for i in range(torus.n):
            for j in range(torus.n):
                if i == j:
                    continue
                val = res[i] - res[j]
                if val.is_rational() and val.as_rational().denominator == 1:
                    diagnoses.append(
                        f"root value {val} of the residue lies in Z (blocks {i+1},{j+1})"
                    )
        return (not diagnoses), diagnoses
    admissible = False
    for e in torus.block_sizes:
        if (r * e).denominator == 1:
            admissible = True
    if not admissible:
        diagnoses.append(f"depth {r} is not a grade of the Cartan")
        return False, diagnoses
    lead = ft.leading_matrix()
    if lead.is_zero():
        diagnoses.append("no nonzero coefficient at the leading grade")
        return False, diagnoses
    st = Stratum(torus.base_point, r, lead)
    dim = centralizer_dimension(st)
    if dim != torus.n:
        diagnoses.append(
            f"leading term centralizer has dimension {dim}, expected {torus.n}"
        )
        return False, diagnoses
    return True, diagnoses


def excluded_hyperplanes(ft: FormalType, x) -> list:
    """For depth 0: the roots alpha with alpha(Res A) = alpha(x) at the
    queried point (the point-dependence of regularity)."""
    out = []
    if ft.depth != 0:
        return out
    res = [ft.coeff(j, 0) for j in range(ft.torus.n)]
    for i in range(ft.torus.n):
        for j in range(ft.torus.n):
            if i == j:
                continue
            val = res[i] - res[j]
            if val.is_rational() and val.as_rational() == x[i] - x[j]:
                out.append((i, j))
    return out


def realize(ft: FormalType) -> Connection:
    """The connection with matrix the canonical lift of the formal type."""
    ok, diagnoses = validate(ft)
    if not ok:
        raise InvalidFormalType("; ".join(diagnoses))
    return Connection(ft.lift_matrix())


# ---------------------------------------------------------------------------
# the relative affine Weyl group


@dataclass
class RelWeylElt:
    """A word in the normalizer generators, with its cached matrix.

    Letters: ("twist", j, k) for d_j^k; ("swap", a, b) for an equal-size
    block swap; ("translate", j, k) for w_j^k.
    """

    torus: TorusData
    word: tuple = ()
    _matrix: LoopMatrix | None = field(default=None, repr=False)

    @classmethod
    def identity(cls, torus):
        return cls(torus, ())

    @classmethod
    def twist(cls, torus, j, k=1):
        return cls(torus, (("twist", j, k),))

    @classmethod
    def swap(cls, torus, a, b):
        return cls(torus, (("swap", a, b),))

    @classmethod
    def translate(cls, torus, j, k=1):
        return cls(torus, (("translate", j, k),))

    def __mul__(self, other: "RelWeylElt") -> "RelWeylElt":
        if self.torus.block_sizes != other.torus.block_sizes:
            raise ValueError("mismatched tori")
        return RelWeylElt(self.torus, self.word + other.word)

    def _letter_matrix(self, letter) -> LoopMatrix:
        kind = letter[0]
        t = self.torus
        if kind == "twist":
            _, j, k = letter
            m = LoopMatrix.identity(t.n)
            base = t.twist_matrix(j)
            for _ in range(k % t.block_sizes[j]):
                m = m * base
            return m
        if kind == "swap":
            _, a, b = letter
            return t.swap_matrix(a, b)
        if kind == "translate":
            _, j, k = letter
            m = t.uniformizer_power(j, k)
            for j2 in range(t.num_blocks):
                if j2 != j:
                    m = m + t.block_identity(j2)
            return m
        raise ValueError(f"unknown generator {letter!r}")

    @property
    def matrix(self) -> LoopMatrix:
        if self._matrix is None:
            m = LoopMatrix.identity(self.torus.n)
            for letter in self.word:
                m = m * self._letter_matrix(letter)
            self._matrix = m
        return self._matrix

    def normalizes(self) -> bool:
        mat = self.matrix
        inv = mat.inverse()
        for j in range(self.torus.num_blocks):
            w = self.torus.uniformizer(j)
            if not in_cartan(self.torus, mat * w * inv):
                return False
        return True

    def __str__(self):
        if not self.word:
            return "1"
        parts = []
        for kind, *args in self.word:
            if kind == "twist":
                j, k = args
                parts.append(f"d{j+1}" + (f"^{k}" if k != 1 else ""))
            elif kind == "swap":
                a, b = args
                parts.append(f"s{a+1},{b+1}")
            else:
                j, k = args
                parts.append(f"p{j+1}" + (f"^{k}" if k != 1 else ""))
        return "*".join(parts)


def rho_act(n: RelWeylElt, ft: FormalType) -> FormalType:
    """The affine action on formal types: Ad*(n) minus the Cartan part of the
    Maurer-Cartan term, truncated to grades [-r, 0]."""
    torus = ft.torus
    if n.torus.block_sizes != torus.block_sizes:
        raise NotNormalizer("generator word belongs to another torus")
    if not n.normalizes():
        raise NotNormalizer("word does not normalize the torus")
    mat = n.matrix
    inv = mat.inverse()
    moved = mat * ft.lift_matrix() * inv
    if not in_cartan(torus, moved):
        raise NotNormalizer("Ad image left the Cartan")
    translated = pi_s(torus, mat.tau() * inv)
    out = pi_s(torus, moved) - translated
    coeffs = {}
    for (j, m), c in out.coeffs.items():
        g = Fraction(m, torus.block_sizes[j])
        if -ft.depth <= g <= 0:
            coeffs[(j, m)] = c
    return FormalType(torus, ft.depth, coeffs)


def _block_permutations(torus: TorusData):
    """Permutations of blocks preserving sizes, as tuples sigma with
    sigma[j] = image block."""
    groups: dict[int, list] = {}
    for j, e in enumerate(torus.block_sizes):
        groups.setdefault(e, []).append(j)
    perms_by_group = []
    for e, idx in sorted(groups.items()):
        perms_by_group.append((idx, list(itertools.permutations(idx))))
    for choice in itertools.product(*(p for _, p in perms_by_group)):
        sigma = list(range(torus.num_blocks))
        for (idx, _), perm in zip(perms_by_group, choice):
            for src, dst in zip(idx, perm):
                sigma[src] = dst
        yield tuple(sigma)


def _sigma_word(torus: TorusData, sigma) -> RelWeylElt:
    """A swap word realizing the block permutation sigma."""
    arr = list(range(torus.num_blocks))
    letters = []
    for pos in range(torus.num_blocks):
        cur_pos = arr.index(sigma[pos])
        if cur_pos != pos:
            letters.append(("swap", pos, cur_pos))
            arr[pos], arr[cur_pos] = arr[cur_pos], arr[pos]
    return RelWeylElt(torus, tuple(letters))


def orbit_equivalent(ft1: FormalType, ft2: FormalType):
    """A relative-affine-Weyl word n with rho_act(n, ft1) = ft2, or None.

    Enumerates the finite twist/swap group; translation parts are then
    determined slot by slot on the residues.
    """
    torus = ft1.torus
    if (
        torus.block_sizes != ft2.torus.block_sizes
        or ft1.depth != ft2.depth
    ):
        return None
    nblocks = torus.num_blocks
    for sigma in _block_permutations(torus):
        # after applying sigma, block j of ft1 lands at sigma[j]
        twist_ranges = [range(torus.block_sizes[j]) for j in range(nblocks)]
        for twists in itertools.product(*twist_ranges):
            ok = True
            for (j, m), c in ft1.coeffs.items():
                if m == 0:
                    continue
                e = torus.block_sizes[j]
                moved = Cyclotomic.zeta(e, (-m * twists[j]) % e) * c
                if ft2.coeff(sigma[j], m) != moved:
                    ok = False
                    break
            if ok:
                for (j2, m), c in ft2.coeffs.items():
                    if m == 0:
                        continue
                    j = sigma.index(j2)
                    e = torus.block_sizes[j]
                    moved = Cyclotomic.zeta(e, (-m * twists[j]) % e) * ft1.coeff(j, m)
                    if moved != c:
                        ok = False
                        break
            if not ok:
                continue
            shifts = []
            for j in range(nblocks):
                e = torus.block_sizes[j]
                diff = ft1.coeff(j, 0) - ft2.coeff(sigma[j], 0)
                if not diff.is_rational():
                    shifts = None
                    break
                k = diff.as_rational() * e
                if k.denominator != 1:
                    shifts = None
                    break
                shifts.append(int(k))
            if shifts is None:
                continue
            word = _sigma_word(torus, sigma)
            for j in range(nblocks):
                if twists[j]:
                    word = word * RelWeylElt.twist(torus, j, twists[j])
                if shifts[j]:
                    word = word * RelWeylElt.translate(torus, j, shifts[j])
            if rho_act(word, ft1) == ft2:
                return word
    return None
