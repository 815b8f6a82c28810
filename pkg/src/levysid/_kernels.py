"""Hot numeric kernels, in numba and pure-numpy variants.

Each kernel exists twice: a scalar-loop version compiled with ``@jit`` (a
no-op decorator on the numpy backend) and a vectorized numpy version. The
module-level dispatchers pick the loop version when the numba backend is
active and the vectorized one otherwise. Integer mixing is exact in both, so
the backends agree bitwise on uniforms; transcendental transforms may differ
by ulps (different libm builds), which the distribution tests absorb.

Counter layout per simulated row (dimension n):
  counters 0 .. 2n-1    -> n Box-Muller normals (2 per draw)
  counters 2n .. 4n-1   -> n stable draws (angle uniform, exponential uniform)
"""

import math

import numpy as np

from .backend import NUMBA_AVAILABLE, jit
from .rng import GAMMA, SPLIT, _mix64_np, uniform_block

_U64_GAMMA = np.uint64(GAMMA)
_U64_SPLIT = np.uint64(SPLIT)
_U64_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_M2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0**-53
_HALF_PI = math.pi / 2.0


# ---------------------------------------------------------------------------
# scalar-loop kernels (numba path)

@jit
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _U64_M1
    z = (z ^ (z >> np.uint64(27))) * _U64_M2
    return z ^ (z >> np.uint64(31))


@jit
def _uniform(key, j):
    # counter j of stream `key`, in the open interval (0,1)
    r = _mix64(key + (np.uint64(j) + np.uint64(1)) * _U64_GAMMA)
    return (np.float64(r >> np.uint64(11)) + 0.5) * _TWO_M53


@jit
def _row_key(base, row):
    return _mix64(base + _mix64((np.uint64(row) + np.uint64(1)) * _U64_SPLIT))


@jit
def _cms_one(ua, ue, alpha, beta, b0, s0):
    """One standard stable draw from an angle uniform and an exponential uniform.

    b0 = arctan(beta*tan(pi*alpha/2))/alpha and s0 = (1+beta^2 tan^2)^(1/(2 alpha))
    are per-parameter constants hoisted by the caller; both terms of the alpha=1
    branch stay finite because ua, ue are strictly inside (0,1).
    """
    phi = math.pi * (ua - 0.5)
    w = -math.log(ue)
    if alpha == 1.0:
        t = _HALF_PI + beta * phi
        return (t * math.tan(phi)
                - beta * math.log(_HALF_PI * w * math.cos(phi) / t)) / _HALF_PI
    ap = alpha * (phi + b0)
    return (s0 * math.sin(ap) / math.cos(phi) ** (1.0 / alpha)
            * (math.cos(phi - ap) / w) ** ((1.0 - alpha) / alpha))


@jit
def _normals_loop(key, start, count, out):
    for i in range(count):
        u1 = _uniform(key, start + 2 * i)
        u2 = _uniform(key, start + 2 * i + 1)
        out[i] = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@jit
def _cms_loop(key, start, count, alpha, beta, b0, s0, out):
    for i in range(count):
        ua = _uniform(key, start + 2 * i)
        ue = _uniform(key, start + 2 * i + 1)
        out[i] = _cms_one(ua, ue, alpha, beta, b0, s0)


@jit
def _sim_noise_loop(base, row0, nrows, alphas, betas, b0s, s0s, gauss, jumps):
    n = alphas.shape[0]
    for r in range(nrows):
        rk = _row_key(base, row0 + r)
        for i in range(n):
            u1 = _uniform(rk, 2 * i)
            u2 = _uniform(rk, 2 * i + 1)
            gauss[r, i] = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        for i in range(n):
            ua = _uniform(rk, 2 * n + 2 * i)
            ue = _uniform(rk, 2 * n + 2 * i + 1)
            jumps[r, i] = _cms_one(ua, ue, alphas[i], betas[i], b0s[i], s0s[i])


# ---------------------------------------------------------------------------
# vectorized kernels (numpy path)

def _cms_consts(alpha, beta):
    """Hoisted CMS constants (b0, s0); dummies for the alpha=1 branch."""
    if alpha == 1.0:
        return 0.0, 1.0
    ta = math.tan(_HALF_PI * alpha)
    return math.atan(beta * ta) / alpha, (1.0 + (beta * ta) ** 2) ** (0.5 / alpha)


def _cms_np(ua, ue, alpha, beta):
    phi = np.pi * (ua - 0.5)
    w = -np.log(ue)
    if alpha == 1.0:
        t = _HALF_PI + beta * phi
        return (t * np.tan(phi) - beta * np.log(_HALF_PI * w * np.cos(phi) / t)) / _HALF_PI
    b0, s0 = _cms_consts(alpha, beta)
    ap = alpha * (phi + b0)
    return (s0 * np.sin(ap) / np.cos(phi) ** (1.0 / alpha)
            * (np.cos(phi - ap) / w) ** ((1.0 - alpha) / alpha))


def _normals_np(key, start, count):
    u = uniform_block(key, start, 2 * count)
    return np.sqrt(-2.0 * np.log(u[0::2])) * np.cos(2.0 * np.pi * u[1::2])


def _cms_block_np(key, start, count, alpha, beta):
    u = uniform_block(key, start, 2 * count)
    return _cms_np(u[0::2], u[1::2], alpha, beta)


def _row_keys_np(base, row0, nrows):
    rows = np.arange(row0, row0 + nrows, dtype=np.uint64)
    return _mix64_np(np.uint64(base)
                     + _mix64_np((rows + np.uint64(1)) * _U64_SPLIT))


def _sim_noise_np(base, row0, nrows, alphas, betas):
    n = alphas.shape[0]
    rk = _row_keys_np(base, row0, nrows)
    js = np.arange(1, 4 * n + 1, dtype=np.uint64)
    raw = _mix64_np(rk[:, None] + js[None, :] * _U64_GAMMA)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53
    gauss = np.sqrt(-2.0 * np.log(u[:, 0:2 * n:2])) * np.cos(2.0 * np.pi * u[:, 1:2 * n:2])
    jumps = np.empty((nrows, n))
    for i in range(n):
        jumps[:, i] = _cms_np(u[:, 2 * n + 2 * i], u[:, 2 * n + 2 * i + 1],
                              alphas[i], betas[i])
    return gauss, jumps


# ---------------------------------------------------------------------------
# dispatchers

def normals_block(key, start, count):
    """count standard normals from counters start..start+2*count-1."""
    if NUMBA_AVAILABLE:
        out = np.empty(count)
        _normals_loop(np.uint64(key), start, count, out)
        return out
    return _normals_np(key, start, count)


def cms_block(key, start, count, alpha, beta):
    """count standard S_alpha(1, beta, 0) draws, two counters per draw."""
    if NUMBA_AVAILABLE:
        out = np.empty(count)
        b0, s0 = _cms_consts(alpha, beta)
        _cms_loop(np.uint64(key), start, count, float(alpha), float(beta), b0, s0, out)
        return out
    return _cms_block_np(key, start, count, alpha, beta)


def sim_noise_block(base_key, row0, nrows, alphas, betas):
    """Per-row noise for rows row0..row0+nrows-1 of a simulation.

    Returns (gauss, jumps): nrows x n standard normals and nrows x n standard
    stable draws, each row read from its own (seed, row)-derived stream so the
    result is independent of how rows are batched across workers.
    """
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    if NUMBA_AVAILABLE:
        n = alphas.shape[0]
        consts = [_cms_consts(a, b) for a, b in zip(alphas, betas)]
        b0s = np.array([c[0] for c in consts])
        s0s = np.array([c[1] for c in consts])
        gauss = np.empty((nrows, n))
        jumps = np.empty((nrows, n))
        _sim_noise_loop(np.uint64(base_key), row0, nrows, alphas, betas,
                        b0s, s0s, gauss, jumps)
        return gauss, jumps
    return _sim_noise_np(base_key, row0, nrows, alphas, betas)
