"""
Concrete finite-rank JB*-triples.

Three kinds are supported:
    Matrix(p, q)      L(C^q, C^p) with {x,y,z} = ½(xy*z + zy*x), spectral norm
    Commutative(n)    C^n with {x,y,z} = x·conj(y)·z componentwise, max norm
    DirectSum(parts)  ℓ∞-sum of the above, product componentwise

Elements are coordinate vectors in a fixed canonical basis (row-major matrix
units, standard vectors, concatenation for sums) so every LinearMap matrix is
reproducible given the same arithmetic.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from jbtriple_kit.algebra.errors import FactorMismatchError, FactorSpecError

logger = logging.getLogger(__name__)

MATRIX = "matrix"
COMMUTATIVE = "commutative"
DIRECT_SUM = "sum"

SeedLike = Union[None, int, Sequence[int], np.random.SeedSequence, np.random.Generator]


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Generators pass through untouched, anything else seeds a fresh one."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------- Factor descriptors ----------
@dataclass(frozen=True)
class FactorDescriptor:
    kind: str
    p: int = 0
    q: int = 0
    n: int = 0
    parts: Tuple["FactorDescriptor", ...] = ()

    @property
    def dim(self) -> int:
        if self.kind == MATRIX:
            return self.p * self.q
        if self.kind == COMMUTATIVE:
            return self.n
        return sum(part.dim for part in self.parts)

    @property
    def rank(self) -> int:
        if self.kind == MATRIX:
            return min(self.p, self.q)
        if self.kind == COMMUTATIVE:
            return self.n
        return sum(part.rank for part in self.parts)

    @property
    def admits_unitary(self) -> bool:
        """True when Γ₁ is non-empty."""
        if self.kind == MATRIX:
            return self.p == self.q
        if self.kind == COMMUTATIVE:
            return True
        return all(part.admits_unitary for part in self.parts)

    def slices(self) -> List[slice]:
        """Coordinate ranges of the summands (a single full range for non-sums)."""
        if self.kind != DIRECT_SUM:
            return [slice(0, self.dim)]
        out, start = [], 0
        for part in self.parts:
            out.append(slice(start, start + part.dim))
            start += part.dim
        return out

    def __str__(self) -> str:
        if self.kind == MATRIX:
            return f"matrix:{self.p}x{self.q}"
        if self.kind == COMMUTATIVE:
            return f"commutative:{self.n}"
        return "sum:[" + ",".join(str(part) for part in self.parts) + "]"


def matrix_factor(p: int, q: int) -> FactorDescriptor:
    if int(p) <= 0 or int(q) <= 0:
        raise FactorSpecError(f"matrix factor needs positive dimensions, got {p}x{q}")
    return FactorDescriptor(MATRIX, p=int(p), q=int(q))


def commutative_factor(n: int) -> FactorDescriptor:
    if int(n) <= 0:
        raise FactorSpecError(f"commutative factor needs positive dimension, got {n}")
    return FactorDescriptor(COMMUTATIVE, n=int(n))


def direct_sum(parts: Iterable[FactorDescriptor]) -> FactorDescriptor:
    flat: List[FactorDescriptor] = []
    for part in parts:
        if part.kind == DIRECT_SUM:
            flat.extend(part.parts)
        else:
            flat.append(part)
    if not flat:
        raise FactorSpecError("direct sum needs at least one part")
    return FactorDescriptor(DIRECT_SUM, parts=tuple(flat))


_MATRIX_RE = re.compile(r"^\s*matrix\s*:\s*(-?\d+)\s*[x×]\s*(-?\d+)\s*$", re.IGNORECASE)
_COMM_RE = re.compile(r"^\s*commutative\s*:\s*(-?\d+)\s*$", re.IGNORECASE)
_SUM_RE = re.compile(r"^\s*sum\s*:\s*\[(.*)\]\s*$", re.IGNORECASE)


def _split_top_level(text: str) -> List[str]:
    items, depth, buf = [], 0, []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            items.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    if buf:
        items.append("".join(buf))
    return [item for item in (s.strip() for s in items) if item]


def parse_factor(text: str) -> FactorDescriptor:
    """Parse `matrix:PxQ`, `commutative:N` or `sum:[spec,...]`."""
    m = _MATRIX_RE.match(text)
    if m:
        return matrix_factor(int(m.group(1)), int(m.group(2)))
    m = _COMM_RE.match(text)
    if m:
        return commutative_factor(int(m.group(1)))
    m = _SUM_RE.match(text)
    if m:
        return direct_sum(parse_factor(item) for item in _split_top_level(m.group(1)))
    raise FactorSpecError(f"cannot parse factor spec {text!r}")


def make_factor(spec: Union[str, Mapping, FactorDescriptor]) -> FactorDescriptor:
    """Build a descriptor from a spec string, a JSON tag-union mapping or a descriptor."""
    if isinstance(spec, FactorDescriptor):
        if spec.kind == MATRIX:
            return matrix_factor(spec.p, spec.q)
        if spec.kind == COMMUTATIVE:
            return commutative_factor(spec.n)
        return direct_sum(spec.parts)
    if isinstance(spec, str):
        return parse_factor(spec)
    if isinstance(spec, Mapping):
        kind = str(spec.get("kind", "")).lower()
        try:
            if kind == MATRIX:
                return matrix_factor(spec["p"], spec["q"])
            if kind == COMMUTATIVE:
                return commutative_factor(spec["n"])
            if kind in (DIRECT_SUM, "direct_sum", "directsum"):
                return direct_sum(make_factor(part) for part in spec["parts"])
        except KeyError as e:
            raise FactorSpecError(f"factor mapping {dict(spec)!r} misses key {e}") from e
        raise FactorSpecError(f"unknown factor kind {kind!r}")
    raise FactorSpecError(f"unsupported factor spec type {type(spec).__name__}")


# ---------- Elements ----------
@dataclass(frozen=True, eq=False)
class Element:
    factor: FactorDescriptor
    coords: np.ndarray = field(repr=False)

    # numpy scalars must defer to __rmul__ instead of broadcasting
    __array_ufunc__ = None

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.complex128).reshape(-1)
        if c.shape[0] != self.factor.dim:
            raise FactorSpecError(
                f"{self.factor} expects {self.factor.dim} coordinates, got {c.shape[0]}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def _other(self, other: "Element") -> np.ndarray:
        if not isinstance(other, Element):
            return NotImplemented
        if other.factor != self.factor:
            raise FactorMismatchError(self.factor, other.factor)
        return other.coords

    def __add__(self, other: "Element") -> "Element":
        c = self._other(other)
        if c is NotImplemented:
            return NotImplemented
        return Element(self.factor, self.coords + c)

    def __sub__(self, other: "Element") -> "Element":
        c = self._other(other)
        if c is NotImplemented:
            return NotImplemented
        return Element(self.factor, self.coords - c)

    def __neg__(self) -> "Element":
        return Element(self.factor, -self.coords)

    def __mul__(self, scalar: complex) -> "Element":
        if isinstance(scalar, Element):
            return NotImplemented
        return Element(self.factor, complex(scalar) * self.coords)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "Element":
        return Element(self.factor, self.coords / complex(scalar))

    def as_matrix(self) -> np.ndarray:
        if self.factor.kind != MATRIX:
            raise FactorSpecError(f"{self.factor} is not a matrix factor")
        return self.coords.reshape(self.factor.p, self.factor.q)

    def parts(self) -> List["Element"]:
        f = self.factor
        if f.kind != DIRECT_SUM:
            return [self]
        return [Element(part, self.coords[s]) for part, s in zip(f.parts, f.slices())]

    def __repr__(self) -> str:
        return f"Element({self.factor}, {np.array2string(self.coords, precision=6)})"


def element(f: FactorDescriptor, coords) -> Element:
    return Element(f, coords)


def from_matrix(f: FactorDescriptor, mat) -> Element:
    return Element(f, np.asarray(mat, dtype=np.complex128).reshape(-1))


def zero(f: FactorDescriptor) -> Element:
    return Element(f, np.zeros(f.dim, dtype=np.complex128))


def basis(f: FactorDescriptor) -> List[Element]:
    eye = np.eye(f.dim, dtype=np.complex128)
    return [Element(f, eye[j]) for j in range(f.dim)]


def embed(f: FactorDescriptor, index: int, part_element: Element) -> Element:
    """Place an element of summand `index` into the direct sum `f`."""
    coords = np.zeros(f.dim, dtype=np.complex128)
    coords[f.slices()[index]] = part_element.coords
    return Element(f, coords)


def check_factor(f: FactorDescriptor, *elements: Element) -> None:
    for x in elements:
        if x.factor != f:
            raise FactorMismatchError(f, x.factor)


# ---------- Coordinate-level kernels ----------
def _triple_coords(f: FactorDescriptor, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    if f.kind == MATRIX:
        X = x.reshape(f.p, f.q)
        Ys = y.reshape(f.p, f.q).conj().T
        Z = z.reshape(f.p, f.q)
        return (0.5 * (X @ Ys @ Z + Z @ Ys @ X)).reshape(-1)
    if f.kind == COMMUTATIVE:
        return x * np.conj(y) * z
    out = np.empty(f.dim, dtype=np.complex128)
    for part, s in zip(f.parts, f.slices()):
        out[s] = _triple_coords(part, x[s], y[s], z[s])
    return out


def _norm_coords(f: FactorDescriptor, x: np.ndarray) -> float:
    if f.kind == MATRIX:
        return float(np.linalg.norm(x.reshape(f.p, f.q), 2))
    if f.kind == COMMUTATIVE:
        return float(np.max(np.abs(x))) if x.size else 0.0
    return max((_norm_coords(part, x[s]) for part, s in zip(f.parts, f.slices())), default=0.0)


# ---------- Linear and conjugate-linear maps ----------
@dataclass(frozen=True, eq=False)
class LinearMap:
    """z ↦ matrix·coords(z)."""

    factor: FactorDescriptor
    matrix: np.ndarray = field(repr=False)

    __array_ufunc__ = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        d = self.factor.dim
        if m.shape != (d, d):
            raise FactorSpecError(f"map on {self.factor} needs a {d}x{d} matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, f: FactorDescriptor) -> "LinearMap":
        return cls(f, np.eye(f.dim, dtype=np.complex128))

    @classmethod
    def zero(cls, f: FactorDescriptor) -> "LinearMap":
        return cls(f, np.zeros((f.dim, f.dim), dtype=np.complex128))

    def apply(self, x: Element) -> Element:
        check_factor(self.factor, x)
        return Element(self.factor, self.matrix @ x.coords)

    __call__ = apply

    def __matmul__(self, other):
        if isinstance(other, LinearMap):
            check_same_space(self, other)
            return LinearMap(self.factor, self.matrix @ other.matrix)
        if isinstance(other, ConjugateLinearMap):
            check_same_space(self, other)
            return ConjugateLinearMap(self.factor, self.matrix @ other.matrix)
        return NotImplemented

    def __add__(self, other: "LinearMap") -> "LinearMap":
        check_same_space(self, other)
        return LinearMap(self.factor, self.matrix + other.matrix)

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        check_same_space(self, other)
        return LinearMap(self.factor, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "LinearMap":
        return LinearMap(self.factor, complex(scalar) * self.matrix)

    __rmul__ = __mul__

    def inverse(self) -> "LinearMap":
        return LinearMap(self.factor, np.linalg.inv(self.matrix))

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.matrix))


@dataclass(frozen=True, eq=False)
class ConjugateLinearMap:
    """z ↦ matrix·conj(coords(z))."""

    factor: FactorDescriptor
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        d = self.factor.dim
        if m.shape != (d, d):
            raise FactorSpecError(f"map on {self.factor} needs a {d}x{d} matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, x: Element) -> Element:
        check_factor(self.factor, x)
        return Element(self.factor, self.matrix @ np.conj(x.coords))

    __call__ = apply

    def __matmul__(self, other):
        # M1·conj(M2·w) = M1·conj(M2)·conj(w)
        if isinstance(other, LinearMap):
            check_same_space(self, other)
            return ConjugateLinearMap(self.factor, self.matrix @ np.conj(other.matrix))
        if isinstance(other, ConjugateLinearMap):
            check_same_space(self, other)
            return LinearMap(self.factor, self.matrix @ np.conj(other.matrix))
        return NotImplemented

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.matrix))


def check_same_space(a, b) -> None:
    if a.factor != b.factor:
        raise FactorMismatchError(a.factor, b.factor)


# ---------- Public operations ----------
def triple_product(f: FactorDescriptor, x: Element, y: Element, z: Element) -> Element:
    check_factor(f, x, y, z)
    return Element(f, _triple_coords(f, x.coords, y.coords, z.coords))


def d_operator(f: FactorDescriptor, x: Element, y: Element) -> LinearMap:
    """D(x,y): z ↦ {x,y,z}; column j is {x, y, basis_j}."""
    check_factor(f, x, y)
    eye = np.eye(f.dim, dtype=np.complex128)
    cols = [_triple_coords(f, x.coords, y.coords, eye[j]) for j in range(f.dim)]
    return LinearMap(f, np.column_stack(cols) if cols else eye)


def q_operator(f: FactorDescriptor, x: Element) -> ConjugateLinearMap:
    """Q_x: z ↦ {x,z,x}; conjugate-linear, so column j is Q_x(basis_j)."""
    check_factor(f, x)
    eye = np.eye(f.dim, dtype=np.complex128)
    cols = [_triple_coords(f, x.coords, eye[j], x.coords) for j in range(f.dim)]
    return ConjugateLinearMap(f, np.column_stack(cols) if cols else eye)


def ball_norm(f: FactorDescriptor, x: Element) -> float:
    check_factor(f, x)
    return _norm_coords(f, x.coords)


def random_element(f: FactorDescriptor, seed: SeedLike, radius: float = 1.0,
                   exact: bool = False) -> Element:
    """Gaussian direction rescaled to ball_norm radius·u, u uniform in (0,1] (or exactly radius)."""
    if radius <= 0:
        raise FactorSpecError(f"radius must be positive, got {radius}")
    rng = as_generator(seed)
    c = rng.standard_normal(f.dim) + 1j * rng.standard_normal(f.dim)
    nrm = _norm_coords(f, c)
    while nrm == 0.0:
        c = rng.standard_normal(f.dim) + 1j * rng.standard_normal(f.dim)
        nrm = _norm_coords(f, c)
    scale = radius if exact else radius * (1.0 - rng.random())
    return Element(f, c * (scale / nrm))


def random_polydisc(f: FactorDescriptor, seed: SeedLike, radius: float = 1.0) -> Element:
    """Coordinates uniform in the polydisc of the given radius (not normalised in ball_norm)."""
    rng = as_generator(seed)
    r = radius * np.sqrt(rng.random(f.dim))
    return Element(f, r * np.exp(2j * np.pi * rng.random(f.dim)))


# ---------- Operator norms ----------
def two_sided_norm(A: np.ndarray, C: np.ndarray) -> float:
    """‖z ↦ A z C‖ in the spectral norm equals ‖A‖·‖C‖."""
    return float(np.linalg.norm(A, 2) * np.linalg.norm(C, 2))


def d_operator_norm(f: FactorDescriptor, x: Element) -> float:
    """Exact ‖D(x,x)‖ with respect to the JB*-norm."""
    check_factor(f, x)
    return _d_norm_coords(f, x.coords)


def _d_norm_coords(f: FactorDescriptor, x: np.ndarray) -> float:
    if f.kind == MATRIX:
        X = x.reshape(f.p, f.q)
        # z ↦ ½(Az + zC) with A = xx*, C = x*x; both positive with top eigenvalue ‖x‖²
        return 0.5 * float(np.linalg.norm(X @ X.conj().T, 2) + np.linalg.norm(X.conj().T @ X, 2))
    if f.kind == COMMUTATIVE:
        return float(np.max(np.abs(x) ** 2)) if x.size else 0.0
    # block-diagonal maps on an ℓ∞-sum: norm is the max of the block norms
    return max((_d_norm_coords(part, x[s]) for part, s in zip(f.parts, f.slices())), default=0.0)


def sampled_operator_norm(f: FactorDescriptor, op, n: int = 1000, seed: SeedLike = 0) -> float:
    """Lower bound of ‖op‖ from n random unit vectors."""
    rng = as_generator(seed)
    best = 0.0
    for _ in range(n):
        u = random_element(f, rng, 1.0, exact=True)
        best = max(best, ball_norm(f, op.apply(u)))
    return best
