"""Random-matrix approximation of free convolutions.

For diagonal ``A``, ``B`` whose entries are the quantiles ``(k + 1/2)/N`` of
``mu1`` and ``mu2`` and a Haar unitary ``U``, the spectra of ``A + U B U*``,
``A^{1/2} U B U* A^{1/2}`` and ``A U B U*`` approximate ``mu1 [+] mu2`` and the
two products.

Only columns of ``U`` that meet entries of ``B`` differing from its most
frequent value ``b0`` matter, since ``U B U* = b0 I + V D V*`` with ``V`` the
corresponding ``N x n`` block of ``U`` (itself a Haar isometry).  The factor
with fewer such entries is the one rotated; spectra are invariant under the
swap.  Products also drop the zero rows of the fixed factor, each of which
contributes an exact zero eigenvalue.

Trials use independent ``PCG64`` streams seeded with ``SeedSequence([seed,
trial])``, so output does not depend on the order in which trials run.
"""

import json
from dataclasses import dataclass

import numpy as np

from .density import DensityGrid, recover_measure
from .errors import CarrierMismatchError, UnsupportedInputError
from .measures import CircleMeasure, PosMeasure, RealMeasure

__all__ = [
    "EigenSample",
    "haar_columns",
    "quantile_diagonal",
    "sample_additive",
    "sample_mult_pos",
    "sample_mult_circle",
    "sample",
    "ks_distance",
    "SNAP_TOL",
]

SNAP_TOL = 1e-8
_MODEL_OF_OP = {"add": "additive", "mul-pos": "mult-pos", "mul-circle": "mult-circle"}


@dataclass(frozen=True, eq=False)
class EigenSample:
    """Eigenvalues (angles in ``[0, 2 pi)`` for the circle) of all trials, trial after trial."""

    model: str
    dimension: int
    trials: int
    seed: int
    eigenvalues: np.ndarray

    @property
    def carrier(self):
        return {"additive": "line", "mult-pos": "halfline", "mult-circle": "circle"}[self.model]

    def metadata(self):
        return {"schema": "freeconv/1", "model": self.model, "dimension": self.dimension,
                "trials": self.trials, "seed": self.seed, "count": int(self.eigenvalues.size),
                "prng": "numpy PCG64, SeedSequence([seed, trial])"}

    def save(self, csv_path, json_path=None):
        """Single-column CSV plus a JSON metadata file (default: same stem, ``.json``)."""
        with open(csv_path, "w") as fh:
            fh.write("eigenvalue\n")
            for v in self.eigenvalues:
                fh.write(f"{float(v)!r}\n")
        if json_path is None:
            json_path = csv_path.rsplit(".", 1)[0] + ".json"
        with open(json_path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _rng(seed, trial):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(trial)])))


def haar_columns(rng, n_rows, n_cols):
    """First ``n_cols`` columns of a Haar unitary of size ``n_rows``."""
    z = (rng.standard_normal((n_rows, n_cols)) + 1j * rng.standard_normal((n_rows, n_cols))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def quantile_diagonal(mu, n):
    """Quantiles of ``mu`` at ``(k + 1/2) / n``."""
    try:
        return np.asarray(mu.quantile((np.arange(n) + 0.5) / n), float)
    except (AttributeError, NotImplementedError) as exc:
        raise UnsupportedInputError(f"cannot sample from {mu!r}: {exc}", code="not-sampleable") from None


def _mode_split(values):
    """Most frequent value and the indices of the other entries."""
    uniq, counts = np.unique(values, return_counts=True)
    mode = uniq[np.argmax(counts)]
    return mode, np.flatnonzero(values != mode)


def _check(mu1, mu2, cls, n):
    if not (isinstance(mu1, cls) and isinstance(mu2, cls)):
        raise CarrierMismatchError(f"both measures must be {cls.__name__} instances")
    if n < 2:
        raise ValueError("matrix dimension must be at least 2")


def _plan(a, b):
    """Decide which diagonal stays fixed; returns ``(fixed, mode, rotated indices, deltas)``."""
    ma, ia = _mode_split(a)
    mb, ib = _mode_split(b)
    if ia.size < ib.size:
        return b, ma, ia, a[ia] - ma
    return a, mb, ib, b[ib] - mb


def _lowrank_eigs(base, w, d):
    """Eigenvalues of ``c I + W diag(d) W*`` where ``base`` is the constant ``c``, via QR of ``W``."""
    m, n = w.shape
    q, r = np.linalg.qr(w)
    core = (r * d) @ r.conj().T
    inner = np.linalg.eigvalsh(0.5 * (core + core.conj().T))
    return np.concatenate([base + inner, np.full(m - n, base)])


def _hermitian_eigs(fixed_diag, w, d):
    """Eigenvalues of ``diag(fixed_diag) + W diag(d) W*``."""
    m, n = w.shape
    if n == 0:
        return np.sort(fixed_diag)
    if n < m and np.all(fixed_diag == fixed_diag[0]):
        return np.sort(_lowrank_eigs(fixed_diag[0], w, d))
    h = (w * d) @ w.conj().T
    h[np.diag_indices(m)] += fixed_diag
    return np.linalg.eigvalsh(0.5 * (h + h.conj().T))


def _additive_trial(a, b, rng):
    fixed, mode, idx, d = _plan(a, b)
    v = haar_columns(rng, a.size, idx.size) if idx.size else np.zeros((a.size, 0))
    return _hermitian_eigs(fixed + mode, v, d)


def _mult_pos_trial(a, b, rng):
    fixed, mode, idx, d = _plan(a, b)
    n = a.size
    v = haar_columns(rng, n, idx.size) if idx.size else np.zeros((n, 0))
    live = np.flatnonzero(fixed > 0.0)
    zeros = np.zeros(n - live.size)
    root = np.sqrt(fixed[live])
    w = root[:, None] * v[live]
    eigs = _hermitian_eigs(mode * fixed[live], w, d)
    return np.sort(np.concatenate([zeros, np.maximum(eigs, 0.0)]))


def _mult_circle_trial(a, b, rng):
    ua, ub = np.exp(1j * a), np.exp(1j * b)
    fixed, mode, idx, d = _plan(ua, ub)
    n = a.size
    if idx.size == 0:
        lam = fixed * mode
    else:
        v = haar_columns(rng, n, idx.size)
        m = (v * d) @ v.conj().T
        m[np.diag_indices(n)] += mode
        lam = np.linalg.eigvals(fixed[:, None] * m)
    return np.sort(np.mod(np.angle(lam), 2.0 * np.pi))


def _sample(model, trial_fn, mu1, mu2, n, trials, seed):
    a = quantile_diagonal(mu1, n)
    b = quantile_diagonal(mu2, n)
    eigs = [trial_fn(a, b, _rng(seed, t)) for t in range(trials)]
    return EigenSample(model, int(n), int(trials), int(seed), np.concatenate(eigs))


def sample_additive(mu1, mu2, n, trials, seed=0):
    """Spectra of ``A + U B U*``."""
    _check(mu1, mu2, RealMeasure, n)
    return _sample("additive", _additive_trial, mu1, mu2, n, trials, seed)


def sample_mult_pos(mu1, mu2, n, trials, seed=0):
    """Spectra of ``A^{1/2} U B U* A^{1/2}`` for measures on ``[0, inf)``."""
    _check(mu1, mu2, PosMeasure, n)
    return _sample("mult-pos", _mult_pos_trial, mu1, mu2, n, trials, seed)


def sample_mult_circle(mu1, mu2, n, trials, seed=0):
    """Eigenvalue angles of ``A U B U*`` for diagonal unitaries ``A``, ``B``."""
    _check(mu1, mu2, CircleMeasure, n)
    return _sample("mult-circle", _mult_circle_trial, mu1, mu2, n, trials, seed)


def sample(mu1, mu2, op, n, trials, seed=0):
    fn = {"add": sample_additive, "mul-pos": sample_mult_pos, "mul-circle": sample_mult_circle}[op]
    return fn(mu1, mu2, n, trials, seed)


def _reference_measure(reference, carrier):
    if isinstance(reference, tuple) and reference and isinstance(reference[0], DensityGrid):
        grid, atoms = reference[0], (reference[1] if len(reference) > 1 else ())
        return recover_measure(grid, atoms, carrier)
    if isinstance(reference, DensityGrid):
        return recover_measure(reference, (), carrier)
    return reference


def ks_distance(sample, reference, snap_tol=SNAP_TOL):
    """Kolmogorov distance between the empirical law of ``sample`` and ``reference``.

    ``reference`` is a measure or a ``(DensityGrid, atoms)`` pair.  Sample
    points within ``snap_tol`` of a reference atom are moved onto it, so that
    rounding in the eigensolver does not split an atom.
    """
    ref = _reference_measure(reference, sample.carrier)
    needed = CircleMeasure if sample.carrier == "circle" else RealMeasure
    if not isinstance(ref, needed):
        raise CarrierMismatchError(f"{sample.model} sample cannot be compared with {type(ref).__name__}")
    x = np.sort(np.asarray(sample.eigenvalues, float))
    if ref.atoms:
        pos = ref.positions
        k = np.clip(np.searchsorted(pos, x), 1, pos.size - 1) if pos.size > 1 else np.zeros(x.size, int)
        cand = np.stack([pos[np.maximum(k - 1, 0)], pos[k]])
        dist = np.abs(cand - x)
        best = np.argmin(dist, axis=0)
        near = dist[best, np.arange(x.size)] <= snap_tol
        x = np.sort(np.where(near, cand[best, np.arange(x.size)], x))
    uniq, counts = np.unique(x, return_counts=True)
    n = x.size
    right_emp = np.cumsum(counts) / n
    left_emp = right_emp - counts / n
    right_ref = ref.cdf(uniq)
    left_ref = ref.cdf(uniq, left=True)
    return float(max(np.max(np.abs(right_ref - right_emp)), np.max(np.abs(left_ref - left_emp))))
