"""Box averages over the diagonal group and the cone-direction pushforward.

Haar measure on a compact diagonal orbit is approximated by sampling the
Lie-algebra box [-L, L]^n with a counter-based generator, so sample i is a
pure function of (seed, i) and runs reproduce exactly.

Cone points of U exp(diag(w)) base Z^d are found without ever forming that
product in floats: the diagonal scaling moves into per-axis box radii on the
fixed base (enumerated exactly), and the skew-free residue z = exp(diag(w)) y
is O(1) componentwise, so U z is accurate.  Forming the product matrix first
would lose the points to cancellation once |w| is large.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import spheremeasure as sm
from .latgeo import (
    LatticeBasis,
    SquareMatrix,
    _integerize,
    lattice_points_in_box,
    lattice_points_in_box_exact,
)


@dataclass(frozen=True)
class OrbitSampleSet:
    base: LatticeBasis
    half_width: float
    count: int
    seed: int
    log_coords: np.ndarray  # shape (count, d-1)
    samples: tuple[LatticeBasis, ...]


def _draw_box(seed: int, count: int, n: int, half_width: float) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed))
    if count == 0:
        return np.zeros((0, n))
    return gen.uniform(-half_width, half_width, size=(count, n))


def sample_orbit(
    base: LatticeBasis, L: float, N: int, seed: int, unit_logs=None
) -> OrbitSampleSet:
    """N samples exp(diag(v, -sum v)) base with v uniform in [-L, L]^(d-1).

    When unit_logs (rows spanning the log-lattice of the orbit stabilizer)
    are supplied, v is drawn uniformly from the exact fundamental
    parallelepiped they span instead of the box.
    """
    if L <= 0:
        raise ValueError("half width must be positive")
    if N < 0:
        raise ValueError("sample count must be nonnegative")
    d = base.dim
    if unit_logs is not None:
        U = np.asarray(unit_logs, dtype=float).reshape(d - 1, d - 1)
        X = _draw_box(int(seed), N, d - 1, 0.5) + 0.5  # uniform in [0, 1)^n
        V = X @ U
    else:
        V = _draw_box(int(seed), N, d - 1, float(L))
    mats = _sample_matrices(base.matrix.entries, V)
    samples = []
    for i in range(N):
        smat = SquareMatrix(mats[i], error_bound=1e-12 * float(np.max(np.abs(mats[i]))))
        samples.append(LatticeBasis(smat, covolume=abs(smat.det()), unimodular=base.unimodular))
    V.setflags(write=False)
    return OrbitSampleSet(base, float(L), N, int(seed), V, tuple(samples))


def _sample_matrices(base_mat: np.ndarray, V: np.ndarray) -> np.ndarray:
    diag = np.concatenate([V, -V.sum(axis=1, keepdims=True)], axis=1)
    return np.exp(diag)[:, :, None] * base_mat[None, :, :]


def _theta_atoms(mat: np.ndarray, eps: float):
    """Directions of the cone points of one well-conditioned basis matrix."""
    d = mat.shape[0]
    pairs = lattice_points_in_box(mat, [eps] * (d - 1) + [1.0])
    dirs = []
    for _, v in pairs:
        proj = v[: d - 1]
        sup = float(np.max(np.abs(proj)))
        if 0.0 < sup < eps and abs(float(v[d - 1])) <= 1.0:
            dirs.append(proj / np.linalg.norm(proj))
    return dirs


def _theta_atoms_flowed(base_ints, base_scale: int, w: np.ndarray, eps: float, Umat, Uinv_abs):
    """Directions of cone points of U exp(diag(w, -sum w)) base Z^d.

    The diagonal scaling lives in the box radii; the residues z are O(1)
    componentwise, so the float application of U is accurate.
    """
    d = len(base_ints)
    diag = np.concatenate([w, [-w.sum()]])
    grow = np.exp(diag)
    target = np.array([eps] * (d - 1) + [1.0])
    reach = target if Uinv_abs is None else Uinv_abs @ target
    radii = reach * np.exp(-diag) * (1.0 + 1e-12)
    dirs = []
    for _, y in lattice_points_in_box_exact(base_ints, base_scale, radii):
        z = grow * y
        v = Umat @ z if Umat is not None else z
        proj = v[: d - 1]
        sup = float(np.max(np.abs(proj)))
        if 0.0 < sup < eps and abs(float(v[d - 1])) <= 1.0:
            dirs.append(proj / np.linalg.norm(proj))
    return dirs


def theta_eps(lattice: LatticeBasis, eps: float) -> sm.DirectionMeasure:
    """Uniform probability on directions of the cone points, or zero measure."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    dirs = _theta_atoms(lattice.matrix.entries, eps)
    n = lattice.dim - 1
    if not dirs:
        return sm.zero_measure(n)
    w = 1.0 / len(dirs)
    return sm.from_atoms(n, [(v, w) for v in dirs])


def _push_chunk(args):
    base_ints, base_scale, W, eps, Umat, Uinv_abs = args
    n = len(base_ints) - 1
    vecs, wts = [], []
    hits = 0
    for i in range(W.shape[0]):
        dirs = _theta_atoms_flowed(base_ints, base_scale, W[i], eps, Umat, Uinv_abs)
        if not dirs:
            continue
        hits += 1
        w = 1.0 / len(dirs)
        vecs.extend(dirs)
        wts.extend([w] * len(dirs))
    return np.array(vecs).reshape(-1, n), np.array(wts), hits


def pushforward_minvec(
    samples: OrbitSampleSet,
    eps: float,
    U: SquareMatrix | None = None,
    workers: int = 1,
) -> sm.DirectionMeasure:
    """Average of theta_eps over the (optionally U-translated) samples.

    Total mass equals the fraction of samples whose translate meets the cone.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    N = samples.count
    n = samples.base.dim - 1
    if N == 0:
        return sm.zero_measure(n)
    base = samples.base
    if base.exact_mantissa is not None:
        base_ints, base_scale = base.exact_mantissa, base.exact_scale
    else:
        base_ints, base_scale = _integerize(base.matrix.entries)
    # cone membership at half width L probes coefficients near e^L, so the
    # basis must carry roughly 2L/ln2 extra bits beyond the answer precision
    needed = int(2.0 * samples.half_width / math.log(2.0)) + 40
    if base_scale < needed:
        import warnings

        warnings.warn(
            f"basis precision {base_scale} bits is below the ~{needed} needed "
            f"at half width {samples.half_width}; cone hits can be "
            "misclassified (rebuild the field with more precision bits)",
            stacklevel=2,
        )
    Umat = U.entries if U is not None else None
    Uinv_abs = np.abs(np.linalg.inv(Umat)) if Umat is not None else None
    W = samples.log_coords
    if workers <= 1:
        results = [_push_chunk((base_ints, base_scale, W, eps, Umat, Uinv_abs))]
    else:
        bounds = np.linspace(0, N, workers + 1, dtype=int)
        chunks = [
            (base_ints, base_scale, W[bounds[i] : bounds[i + 1]], eps, Umat, Uinv_abs)
            for i in range(workers)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_push_chunk, chunks))
    vecs = np.vstack([r[0] for r in results])
    wts = np.concatenate([r[1] for r in results]) / N
    hits = sum(r[2] for r in results)
    if len(wts) == 0:
        return sm.zero_measure(n)
    mu = sm.merge_atoms(sm.DirectionMeasure(n, vecs, wts))
    assert abs(mu.total_mass - hits / N) < 1e-9
    return mu


def save_orbit_measure_csv(path, mu: sm.DirectionMeasure, samples: OrbitSampleSet, eps: float, conjugated: bool) -> None:
    with open(path, "w") as fh:
        fh.write(
            f"# seed={samples.seed} L={samples.half_width:.17g} N={samples.count} "
            f"eps={eps:.17g} conjugator={'applied' if conjugated else 'none'}\n"
        )
        cols = [f"x_{i+1}" for i in range(mu.dim)] + ["weight"]
        fh.write(",".join(cols) + "\n")
        for v, w in zip(mu.vectors, mu.weights):
            fh.write(",".join(f"{x:.17g}" for x in v) + f",{w:.17g}\n")
