"""Pair-data generation: tensor grids and one-step Euler simulation.

Each dataset row is an independent experiment: start at z, take a single
Euler step of length h under dx = b(x)dt + Lambda(x)dB_t + sigma dL_t, and
record (z, x). All randomness comes from counter-based per-row streams keyed
by (seed, row index), so output bytes depend only on (model, Z, h, seed),
never on chunking or worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import cms_block, sim_noise_block
from .errors import DomainError, EvaluationDomainError, GridSizeError, SimulationError
from .rng import RandomStream, split_key, stream_key
from .stable import scale_stable

GRID_ROW_CAP = 200_000_000

# rows per work unit; fixed so results never depend on the worker count
CHUNK_ROWS = 1 << 16

WORKERS_ENV_VAR = "LEVYSID_WORKERS"


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "")
    try:
        w = int(raw)
    except ValueError:
        return 1
    return max(1, w)


@dataclass(frozen=True, eq=False)
class DatasetPair:
    """Initial points Z and their one-step images X, with the step size h."""

    n: int
    M: int
    h: float
    Z: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        if self.h <= 0.0:
            raise DomainError(f"h must be positive, got {self.h}")
        if self.Z.shape != (self.M, self.n) or self.X.shape != (self.M, self.n):
            raise DomainError(
                f"Z and X must both be ({self.M}, {self.n}); "
                f"got {self.Z.shape} and {self.X.shape}")
        if self.M < 1:
            raise DomainError("dataset must contain at least one row")

    @classmethod
    def from_arrays(cls, Z, X, h):
        Z = np.ascontiguousarray(Z, dtype=np.float64)
        X = np.ascontiguousarray(X, dtype=np.float64)
        if Z.ndim == 1:
            Z = Z[:, None]
        if X.ndim == 1:
            X = X[:, None]
        if not np.all(np.isfinite(Z)) or not np.all(np.isfinite(X)):
            raise DomainError("dataset entries must all be finite")
        return cls(Z.shape[1], Z.shape[0], float(h), Z, X)


def generate_grid(bounds, mesh):
    """Tensor-product grid with inclusive endpoints.

    Rows are ordered lexicographically in the axis indices (first axis
    slowest). A degenerate axis (mesh 1) sits at its lower bound.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    mesh = [int(m) for m in mesh]
    if len(bounds) != len(mesh) or not bounds:
        raise DomainError("bounds and mesh must have equal positive length")
    total = 1
    for (lo, hi), m in zip(bounds, mesh):
        if m < 1:
            raise DomainError(f"mesh entries must be >= 1, got {m}")
        if not lo < hi:
            raise DomainError(f"need lower < upper per axis, got [{lo}, {hi}]")
        total *= m
    if total > GRID_ROW_CAP:
        raise GridSizeError(
            f"grid would contain {total} rows, cap is {GRID_ROW_CAP}")
    axes = [np.array([lo]) if m == 1 else np.linspace(lo, hi, m)
            for (lo, hi), m in zip(bounds, mesh)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.ascontiguousarray(
        np.stack([g.reshape(-1) for g in grids], axis=1))


def _model_noise_arrays(model):
    if model.levy is None:
        return None, None, None
    alphas = np.array([p.alpha for p in model.levy])
    betas = np.array([p.beta for p in model.levy])
    sigmas = np.array([p.sigma for p in model.levy])
    return alphas, betas, sigmas


def _step_block(model, Z_block, h, base_key, row0, out):
    """One Euler step for a contiguous block of rows; writes into out."""
    m, n = Z_block.shape
    try:
        drift = model.drift_at(Z_block)
        lam = model.gaussian_at(Z_block)
    except EvaluationDomainError as exc:
        raise SimulationError(
            f"coefficient evaluation failed on rows {row0}..{row0 + m - 1}: {exc}",
            row=row0) from exc

    alphas, betas, sigmas = _model_noise_arrays(model)
    if alphas is None:
        # Levy disabled: only the normals part of each row stream is consumed
        gauss, _ = sim_noise_block(base_key, row0, m,
                                   np.full(n, 1.5), np.zeros(n))
        jump_term = 0.0
    else:
        gauss, jumps = sim_noise_block(base_key, row0, m, alphas, betas)
        jump_term = np.empty_like(Z_block)
        for i in range(n):
            scale = h ** (1.0 / alphas[i])
            jump_term[:, i] = sigmas[i] * scale_stable(
                jumps[:, i], alphas[i], betas[i], scale)

    if n == 1:
        gpart = lam[:, 0, 0] * gauss[:, 0]
        out[:, 0] = Z_block[:, 0] + drift[:, 0] * h + np.sqrt(h) * gpart
    else:
        gpart = np.einsum("rij,rj->ri", lam, gauss)
        out[:] = Z_block + drift * h + np.sqrt(h) * gpart
    out += jump_term


def euler_pair_step(model, z, h, stream):
    """Single Euler step from one point using an explicit row stream.

    Equivalent to the row's result inside simulate_pairs when given that
    row's substream; counters 0..2n-1 feed the normals and 2n..4n-1 the
    stable draws.
    """
    z = np.asarray(z, dtype=np.float64).reshape(1, -1)
    if z.shape[1] != model.n:
        raise DomainError(f"z must have length {model.n}, got {z.shape[1]}")
    if h <= 0.0:
        raise DomainError(f"h must be positive, got {h}")
    n = model.n
    try:
        drift = model.drift_at(z)[0]
        lam = model.gaussian_at(z)[0]
    except EvaluationDomainError as exc:
        raise SimulationError(f"coefficient evaluation failed: {exc}") from exc

    if not isinstance(stream, RandomStream):
        raise DomainError("stream must be a RandomStream")
    gauss = stream.normals(n)
    x = z[0] + drift * h + np.sqrt(h) * (lam @ gauss)
    if model.levy is not None:
        for i, p in enumerate(model.levy):
            std = cms_block(stream.key, 2 * n + 2 * i, 1, p.alpha, p.beta)
            scale = h ** (1.0 / p.alpha)
            x[i] += p.sigma * scale_stable(std, p.alpha, p.beta, scale)[0]
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise SimulationError(
            f"non-finite state after Euler step in component {bad + 1}",
            component=bad + 1)
    return x


def simulate_pairs(model, Z, h, seed):
    """Apply one Euler step to every row of Z; returns a DatasetPair.

    Parallel chunks write disjoint slices of the output; the per-row counter
    streams make the result identical for any worker count.
    """
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.ndim != 2 or Z.shape[1] != model.n:
        raise DomainError(f"Z must be (M, {model.n}), got shape {Z.shape}")
    if Z.shape[0] < 1:
        raise DomainError("Z must contain at least one row")
    if not np.all(np.isfinite(Z)):
        raise DomainError("Z entries must all be finite")
    if h <= 0.0:
        raise DomainError(f"h must be positive, got {h}")

    M = Z.shape[0]
    base_key = stream_key(int(seed), 0)
    X = np.empty_like(Z)

    def run_chunk(start):
        stop = min(start + CHUNK_ROWS, M)
        _step_block(model, Z[start:stop], h, base_key, start, X[start:stop])
        block = X[start:stop]
        if not np.all(np.isfinite(block)):
            r, c = np.argwhere(~np.isfinite(block))[0]
            raise SimulationError(
                f"non-finite state at row {start + int(r)}, component {int(c) + 1}",
                row=start + int(r), component=int(c) + 1)

    starts = range(0, M, CHUNK_ROWS)
    workers = worker_count()
    if workers <= 1 or len(starts) <= 1:
        for s in starts:
            run_chunk(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # list() drains the iterator so worker exceptions surface here
            list(pool.map(run_chunk, starts))

    return DatasetPair(model.n, M, float(h), Z, X)


def row_stream_key(seed, row):
    """Key of the substream that drives dataset row ``row`` under ``seed``."""
    return split_key(stream_key(int(seed), 0), int(row))
