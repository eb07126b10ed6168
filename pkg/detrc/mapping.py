"""Fixed (untrained) weight matrices.

Builders for the four mapping families used by the models:

- random uniform U(-sigma, sigma) maps (ESN input/recurrence, TCRC-ELM)
- Chebyshev maps, dense and fully deterministic (TCRC-CM)
- block-sparse logistic maps, fully deterministic (TCRC-LM)
- spectral-radius rescaling of square maps (ESN recurrence)

Every WeightMap carries the MapRecipe it was built from; recipes serialize to
JSON and rebuild_map() reconstructs the identical matrix from one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import scipy.linalg as la
from numpy.typing import ArrayLike
from scipy import sparse

from .errors import DomainError, ParameterError, ShapeError, SpectralRadiusZeroError

logger = logging.getLogger(__name__)

# Seeds are portable across releases only for the same generator + version
PRNG_NAME = "numpy.Philox"
PRNG_VERSION = 1

POWER_ITERATION_TOL = 1e-10
POWER_ITERATION_MAX_ITER = 10_000


@dataclass(frozen=True)
class MapRecipe:
    """How a WeightMap was constructed.

    Attributes:
        kind: "random_uniform", "chebyshev", "logistic", "spectral_rescale"
              or "explicit"
        params: Builder parameters (JSON-serializable)
        seed: PRNG seed for random maps
        prng: Generator name and version for random maps
        base: Recipe of the map a rescale was applied to
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    prng: Optional[str] = None
    base: Optional["MapRecipe"] = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind, "params": dict(self.params)}
        if self.seed is not None:
            data["seed"] = self.seed
        if self.prng is not None:
            data["prng"] = self.prng
        if self.base is not None:
            data["base"] = self.base.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MapRecipe":
        base = data.get("base")
        return cls(
            kind=data["kind"],
            params=dict(data.get("params", {})),
            seed=data.get("seed"),
            prng=data.get("prng"),
            base=cls.from_dict(base) if base else None,
        )


@dataclass(frozen=True, eq=False)
class WeightMap:
    """A dense or CSR-sparse real matrix used as a fixed mapping."""

    rows: int
    cols: int
    recipe: MapRecipe
    dense: Optional[np.ndarray] = None
    csr: Optional[sparse.csr_matrix] = None

    def __post_init__(self) -> None:
        if (self.dense is None) == (self.csr is None):
            raise ParameterError("storage", "dense/csr", "exactly one storage is required")
        matrix = self.dense if self.dense is not None else self.csr
        if matrix.shape != (self.rows, self.cols):
            raise ShapeError("Stored matrix shape mismatch", (self.rows, self.cols), matrix.shape)
        values = self.dense if self.dense is not None else self.csr.data
        if not np.all(np.isfinite(values)):
            raise ParameterError("values", "non-finite", "map entries must be finite")
        if self.csr is not None and not self.csr.has_canonical_format:
            raise ParameterError("csr", "non-canonical", "duplicate or unsorted entries")
        if self.dense is not None:
            self.dense.flags.writeable = False

    @property
    def is_sparse(self) -> bool:
        return self.csr is not None

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        """Stored entries (explicit zeros of a sparse map included)."""
        if self.csr is not None:
            return int(self.csr.nnz)
        return int(np.count_nonzero(self.dense))

    def to_dense(self) -> "WeightMap":
        if self.dense is not None:
            return self
        return WeightMap(self.rows, self.cols, self.recipe, dense=self.csr.toarray())

    def to_sparse(self) -> "WeightMap":
        if self.csr is not None:
            return self
        return WeightMap(self.rows, self.cols, self.recipe, csr=sparse.csr_matrix(self.dense))

    def toarray(self) -> np.ndarray:
        return self.dense.copy() if self.dense is not None else self.csr.toarray()

    def triplets(self) -> list[tuple[int, int, float]]:
        """(row, col, value) for every stored entry, row-major order."""
        coo = (self.csr if self.csr is not None else sparse.csr_matrix(self.dense)).tocoo()
        return [(int(r), int(c), float(v)) for r, c, v in zip(coo.row, coo.col, coo.data)]

    def support(self) -> set[tuple[int, int]]:
        return {(r, c) for r, c, _ in self.triplets()}

    @classmethod
    def from_dense(cls, matrix: ArrayLike) -> "WeightMap":
        arr = np.array(matrix, dtype=np.float64)
        if arr.ndim != 2 or 0 in arr.shape:
            raise ShapeError("Dense map must be a non-empty 2-D array", "2-D", arr.shape)
        return cls(arr.shape[0], arr.shape[1], MapRecipe(kind="explicit"), dense=arr)

    @classmethod
    def from_triplets(
        cls, rows: int, cols: int, triplets: list[tuple[int, int, float]]
    ) -> "WeightMap":
        """Build a sparse map; duplicate or out-of-range indices are rejected."""
        if rows < 1 or cols < 1:
            raise ParameterError("shape", (rows, cols), "rows and cols must be >= 1")
        seen: set[tuple[int, int]] = set()
        for r, c, _ in triplets:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ShapeError("Triplet index out of range", (rows, cols), (r, c))
            if (r, c) in seen:
                raise ParameterError("triplets", (r, c), "duplicate (row, col) pair")
            seen.add((r, c))
        ordered = sorted(triplets, key=lambda t: (t[0], t[1]))
        indptr = np.zeros(rows + 1, dtype=np.int64)
        for r, _, _ in ordered:
            indptr[r + 1] += 1
        indptr = np.cumsum(indptr)
        indices = np.array([c for _, c, _ in ordered], dtype=np.int64)
        data = np.array([v for _, _, v in ordered], dtype=np.float64)
        csr = sparse.csr_matrix((data, indices, indptr), shape=(rows, cols))
        return cls(rows, cols, MapRecipe(kind="explicit"), csr=csr)


@dataclass(frozen=True)
class ChebyshevParams:
    """Parameters of the Chebyshev map: amplitude p, frequency q, degree k_cheb."""

    p: float
    q: float
    k_cheb: float

    def __post_init__(self) -> None:
        if not 0 < self.p <= 1:
            raise ParameterError("p", self.p, "must lie in (0, 1] to stay in arccos's domain")
        if self.q == 0:
            raise ParameterError("q", self.q, "must be nonzero")


@dataclass(frozen=True)
class LogisticParams:
    """Parameters of the logistic map: growth r, seed shape a/b, blocks of n_expand."""

    r: float
    a: float
    b: float
    n_expand: int

    def __post_init__(self) -> None:
        if not 0 < self.r <= 4:
            raise ParameterError("r", self.r, "must lie in (0, 4]")
        if self.b == 0:
            raise ParameterError("b", self.b, "must be nonzero")
        if int(self.n_expand) != self.n_expand or self.n_expand < 1:
            raise ParameterError("n_expand", self.n_expand, "must be an integer >= 1")


def _generator(seed: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or seed >= 2**64:
        raise ParameterError("seed", seed, "must be a 64-bit unsigned integer")
    seq = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(seq))


def build_random_uniform(
    rows: int, cols: int, sigma: float, seed: int, stream: int = 0
) -> WeightMap:
    """Dense map with i.i.d. U(-sigma, sigma) entries.

    Args:
        rows: Output dimension
        cols: Input dimension
        sigma: Half-width of the uniform distribution
        seed: 64-bit seed; identical seeds give identical matrices
        stream: Independent sub-stream of the seed (e.g. input vs recurrence)

    Raises:
        ParameterError: empty shape or sigma <= 0
    """
    if rows < 1 or cols < 1:
        raise ParameterError("shape", (rows, cols), "rows and cols must be >= 1")
    if not sigma > 0:
        raise ParameterError("sigma", sigma, "must be > 0")
    rng = _generator(seed, stream)
    matrix = rng.uniform(-sigma, sigma, size=(rows, cols))
    recipe = MapRecipe(
        kind="random_uniform",
        params={"rows": rows, "cols": cols, "sigma": sigma, "stream": stream},
        seed=int(seed),
        prng=f"{PRNG_NAME}/v{PRNG_VERSION}",
    )
    return WeightMap(rows, cols, recipe, dense=matrix)


def build_chebyshev(rows: int, cols: int, params: ChebyshevParams) -> WeightMap:
    """Dense Chebyshev map.

    Row 0 is W[0, i] = p * sin((i - 1) * pi / (q * (cols + 1))); each later
    row applies the Chebyshev recurrence W[j, i] = cos(k * arccos(W[j-1, i])).

    Raises:
        ParameterError: empty shape
        DomainError: a value outside [-1, 1] would enter arccos
    """
    if rows < 1 or cols < 1:
        raise ParameterError("shape", (rows, cols), "rows and cols must be >= 1")
    matrix = np.empty((rows, cols), dtype=np.float64)
    i = np.arange(cols, dtype=np.float64)
    matrix[0] = params.p * np.sin((i - 1.0) * np.pi / (params.q * (cols + 1)))
    for j in range(1, rows):
        prev = matrix[j - 1]
        if np.any(np.abs(prev) > 1.0):
            raise DomainError(f"Chebyshev row {j - 1} leaves [-1, 1]")
        matrix[j] = np.cos(params.k_cheb * np.arccos(prev))
    recipe = MapRecipe(
        kind="chebyshev",
        params={"rows": rows, "cols": cols, "p": params.p, "q": params.q, "k_cheb": params.k_cheb},
    )
    return WeightMap(rows, cols, recipe, dense=matrix)


def logistic_chain(seed: float, r: float, length: int) -> np.ndarray:
    """w_0 = seed, w_j = r * w_{j-1} * (1 - w_{j-1}) for j < length."""
    out = np.empty(length, dtype=np.float64)
    w = float(seed)
    for j in range(length):
        out[j] = w
        w = r * w * (1.0 - w)
    return out


def build_logistic_sparse(rows: int, cols: int, params: LogisticParams) -> WeightMap:
    """Block-sparse logistic map with n_expand stored entries per column.

    Column c occupies rows c*n .. (c+1)*n - 1. Its values follow the logistic
    recurrence down the block, seeded by a * sin(i * pi / ((rows - 1) * b))
    with i = c*n the global row of the block's first entry.

    Raises:
        ParameterError: rows != n_expand * cols, or a seed outside [0, 1]
    """
    if rows < 1 or cols < 1:
        raise ParameterError("shape", (rows, cols), "rows and cols must be >= 1")
    n = int(params.n_expand)
    if rows % cols != 0 or rows // cols != n:
        raise ParameterError("rows", rows, f"must equal n_expand * cols = {n * cols}")

    starts = np.arange(cols, dtype=np.float64) * n
    if rows > 1:
        seeds = params.a * np.sin(starts * np.pi / ((rows - 1) * params.b))
    else:
        seeds = np.zeros(1)
    bad = np.flatnonzero((seeds < 0.0) | (seeds > 1.0))
    if bad.size:
        c = int(bad[0])
        raise ParameterError(
            "a/b", (params.a, params.b), f"seed {seeds[c]!r} of column {c} outside [0, 1]"
        )

    blocks = np.empty((n, cols), dtype=np.float64)
    blocks[0] = seeds
    for j in range(1, n):
        prev = blocks[j - 1]
        blocks[j] = params.r * prev * (1.0 - prev)

    # One stored entry per row: row c*n + j holds blocks[j, c]
    data = blocks.T.reshape(-1)
    indices = np.arange(rows, dtype=np.int64) // n
    indptr = np.arange(rows + 1, dtype=np.int64)
    csr = sparse.csr_matrix((data, indices, indptr), shape=(rows, cols))
    recipe = MapRecipe(
        kind="logistic",
        params={"rows": rows, "cols": cols, "r": params.r, "a": params.a, "b": params.b,
                "n_expand": n},
    )
    return WeightMap(rows, cols, recipe, csr=csr)


def _power_iteration(matrix: Any, tol: float, max_iter: int) -> Optional[float]:
    """Dominant |eigenvalue| by power iteration; None if it does not settle."""
    rng = _generator(0, stream=0)
    v = rng.standard_normal(matrix.shape[0])
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iter):
        u = matrix @ v
        lam = float(np.linalg.norm(u))
        if lam == 0.0:
            return 0.0
        v = u / lam
        if abs(lam - prev) <= tol * lam:
            return lam
        prev = lam
    return None


def spectral_radius(
    w: WeightMap, tol: float = POWER_ITERATION_TOL, max_iter: int = POWER_ITERATION_MAX_ITER
) -> float:
    """Largest eigenvalue magnitude of a square map.

    Dense maps use the full spectrum. Sparse maps use power iteration and fall
    back to the dense spectrum when it does not converge (a dominant complex
    pair never settles under power iteration).
    """
    if w.rows != w.cols:
        raise ShapeError("Spectral radius needs a square map", "square", w.shape)
    if w.is_sparse:
        radius = _power_iteration(w.csr, tol, max_iter)
        if radius is not None:
            logger.debug(f"Power iteration spectral radius {radius!r}")
            return radius
        logger.debug("Power iteration did not converge, using dense eigenvalues")
    eigenvalues = la.eigvals(w.toarray())
    return float(np.max(np.abs(eigenvalues)))


def rescale_spectral_radius(w: WeightMap, rho: float) -> WeightMap:
    """Scale a square map so its spectral radius equals rho.

    Raises:
        ShapeError: w is not square
        ParameterError: rho <= 0
        SpectralRadiusZeroError: w is zero or nilpotent
    """
    if w.rows != w.cols:
        raise ShapeError("Spectral rescaling needs a square map", "square", w.shape)
    if not rho > 0:
        raise ParameterError("rho", rho, "must be > 0")
    radius = spectral_radius(w)
    scale = float(np.abs(w.csr.data).max() if w.is_sparse and w.nnz else np.abs(w.toarray()).max())
    if not radius > np.finfo(np.float64).eps * max(1.0, scale):
        raise SpectralRadiusZeroError(f"Spectral radius {radius!r} is zero; cannot rescale")
    factor = rho / radius
    recipe = MapRecipe(kind="spectral_rescale", params={"rho": rho}, base=w.recipe)
    if w.is_sparse:
        return WeightMap(w.rows, w.cols, recipe, csr=(w.csr * factor).tocsr())
    return WeightMap(w.rows, w.cols, recipe, dense=w.dense * factor)


def apply_map(w: WeightMap, v: ArrayLike) -> np.ndarray:
    """Matrix product w @ v for a vector (cols,) or a batch of columns (cols, T)."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim not in (1, 2) or arr.shape[0] != w.cols:
        raise ShapeError("Map input dimension mismatch", w.cols, arr.shape)
    if w.csr is not None:
        return np.asarray(w.csr @ arr)
    return w.dense @ arr


def rebuild_map(recipe: MapRecipe) -> WeightMap:
    """Reconstruct a map from its recipe.

    Raises:
        ParameterError: explicit maps or unknown kinds
    """
    p = recipe.params
    if recipe.kind == "random_uniform":
        if recipe.prng != f"{PRNG_NAME}/v{PRNG_VERSION}":
            raise ParameterError("prng", recipe.prng, f"only {PRNG_NAME}/v{PRNG_VERSION} supported")
        return build_random_uniform(
            p["rows"], p["cols"], p["sigma"], recipe.seed, p.get("stream", 0)
        )
    if recipe.kind == "chebyshev":
        return build_chebyshev(p["rows"], p["cols"], ChebyshevParams(p["p"], p["q"], p["k_cheb"]))
    if recipe.kind == "logistic":
        return build_logistic_sparse(
            p["rows"], p["cols"], LogisticParams(p["r"], p["a"], p["b"], p["n_expand"])
        )
    if recipe.kind == "spectral_rescale" and recipe.base is not None:
        return rescale_spectral_radius(rebuild_map(recipe.base), p["rho"])
    raise ParameterError("recipe", recipe.kind, "map kind cannot be reconstructed")
