"""Hot numerical kernels for the memcomputing dynamics.

Two interchangeable backends compute identical results bit for bit:

* ``"numba"``: @njit loops fused over the whole stepping budget (fast path);
* ``"numpy"``: vectorized ufunc twin (fallback, and the reference the numba
  path is tested against).

The default backend is numba when importable; set ``MEMSAT_DISABLE_NUMBA=1``
(or the standard ``NUMBA_DISABLE_JIT``) to force the numpy path. Bit equality
holds because both backends accumulate per-variable clause contributions in
ascending clause order (``np.add.at`` is sequential) and evaluate every
floating expression in the same operand order and dtype.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


def _env_disabled() -> bool:
    if os.environ.get("MEMSAT_DISABLE_NUMBA", "0") not in ("", "0"):
        return True
    return bool(os.environ.get("NUMBA_DISABLE_JIT"))


DEFAULT_BACKEND = "numba" if (NUMBA_AVAILABLE and not _env_disabled()) else "numpy"

# Layout of the packed parameter vector shared by both backends. HALF/ONE/ZERO
# ride along so kernels never touch a bare literal (keeps float32 runs pure).
ALPHA, BETA, GAMMA, DELTA, EPS, ZETA, DT, XL_MAX, HALF, ONE, ZERO = range(11)
N_PARAMS = 11


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return DEFAULT_BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def pack_params(
    alpha: float,
    beta: float,
    gamma: float,
    delta: float,
    epsilon: float,
    zeta: float,
    dt: float,
    xl_max: float,
    dtype=np.float64,
) -> np.ndarray:
    p = np.zeros(N_PARAMS, dtype=dtype)
    p[ALPHA] = alpha
    p[BETA] = beta
    p[GAMMA] = gamma
    p[DELTA] = delta
    p[EPS] = epsilon
    p[ZETA] = zeta
    p[DT] = dt
    p[XL_MAX] = xl_max
    p[HALF] = 0.5
    p[ONE] = 1.0
    p[ZERO] = 0.0
    return p


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

@njit(cache=True)
def _sat_check_nb(idx, qf, v):
    for m in range(idx.shape[0]):
        ok = False
        for s in range(3):
            if (v[idx[m, s]] >= 0) == (qf[m, s] > 0):
                ok = True
                break
        if not ok:
            return False
    return True


@njit(cache=True)
def _derivs_nb(idx, qf, v, xs, xl, p, tie_first, dv, dxs, dxl):
    half = p[HALF]
    one = p[ONE]
    zero = p[ZERO]
    for i in range(v.shape[0]):
        dv[i] = zero
    for m in range(idx.shape[0]):
        i0 = idx[m, 0]
        i1 = idx[m, 1]
        i2 = idx[m, 2]
        q0 = qf[m, 0]
        q1 = qf[m, 1]
        q2 = qf[m, 2]
        t0 = one - q0 * v[i0]
        t1 = one - q1 * v[i1]
        t2 = one - q2 * v[i2]
        tmin = min(min(t0, t1), t2)
        c = half * tmin
        g0 = half * q0 * min(t1, t2)
        g1 = half * q1 * min(t0, t2)
        g2 = half * q2 * min(t0, t1)
        a0 = t0 == tmin
        a1 = t1 == tmin
        a2 = t2 == tmin
        if tie_first != 0:
            if a0:
                a1 = False
                a2 = False
            elif a1:
                a2 = False
        r0 = half * (q0 - v[i0]) if a0 else zero
        r1 = half * (q1 - v[i1]) if a1 else zero
        r2 = half * (q2 - v[i2]) if a2 else zero
        g_scale = xl[m] * xs[m]
        r_scale = (one + p[ZETA] * xl[m]) * (one - xs[m])
        dv[i0] += g_scale * g0 + r_scale * r0
        dv[i1] += g_scale * g1 + r_scale * r1
        dv[i2] += g_scale * g2 + r_scale * r2
        dxs[m] = p[BETA] * (xs[m] + p[EPS]) * (c - p[GAMMA])
        dxl[m] = p[ALPHA] * (c - p[DELTA])


@njit(cache=True)
def _run_nb(idx, qf, v, xs, xl, p, tie_first, max_steps, check_every, t0):
    half = p[HALF]
    one = p[ONE]
    zero = p[ZERO]
    dt = p[DT]
    eps = p[EPS]
    xs_hi = one - eps
    xl_max = p[XL_MAX]
    n = v.shape[0]
    n_clauses = idx.shape[0]
    dv = np.zeros_like(v)
    for k in range(1, max_steps + 1):
        for i in range(n):
            dv[i] = zero
        for m in range(n_clauses):
            i0 = idx[m, 0]
            i1 = idx[m, 1]
            i2 = idx[m, 2]
            q0 = qf[m, 0]
            q1 = qf[m, 1]
            q2 = qf[m, 2]
            t0_ = one - q0 * v[i0]
            t1_ = one - q1 * v[i1]
            t2_ = one - q2 * v[i2]
            tmin = min(min(t0_, t1_), t2_)
            c = half * tmin
            g0 = half * q0 * min(t1_, t2_)
            g1 = half * q1 * min(t0_, t2_)
            g2 = half * q2 * min(t0_, t1_)
            a0 = t0_ == tmin
            a1 = t1_ == tmin
            a2 = t2_ == tmin
            if tie_first != 0:
                if a0:
                    a1 = False
                    a2 = False
                elif a1:
                    a2 = False
            r0 = half * (q0 - v[i0]) if a0 else zero
            r1 = half * (q1 - v[i1]) if a1 else zero
            r2 = half * (q2 - v[i2]) if a2 else zero
            g_scale = xl[m] * xs[m]
            r_scale = (one + p[ZETA] * xl[m]) * (one - xs[m])
            dv[i0] += g_scale * g0 + r_scale * r0
            dv[i1] += g_scale * g1 + r_scale * r1
            dv[i2] += g_scale * g2 + r_scale * r2
            dxs = p[BETA] * (xs[m] + eps) * (c - p[GAMMA])
            xs[m] = min(max(xs[m] + dt * dxs, eps), xs_hi)
            dxl = p[ALPHA] * (c - p[DELTA])
            xl[m] = min(max(xl[m] + dt * dxl, one), xl_max)
        for i in range(n):
            v[i] = min(max(v[i] + dt * dv[i], -one), one)
        if check_every > 0 and (t0 + k) % check_every == 0:
            if _sat_check_nb(idx, qf, v):
                return True, k
    return False, max_steps


# ---------------------------------------------------------------------------
# numpy backend (vectorized twin; identical op order per element)
# ---------------------------------------------------------------------------

def _sat_check_np(idx, qf, v):
    if idx.shape[0] == 0:
        return True
    lit_sat = (v[idx] >= 0) == (qf > 0)
    return bool(np.all(np.any(lit_sat, axis=1)))


def _clause_terms_np(idx, qf, v, p):
    """Per-literal terms (1 - q*v), their row minimum, and min-attainment mask."""
    t = p[ONE] - qf * v[idx]
    tmin = np.minimum(np.minimum(t[:, 0], t[:, 1]), t[:, 2])
    return t, tmin


def clause_values(idx, qf, v, p):
    """C_m = half * min over the clause's literal terms; shape (M,)."""
    _, tmin = _clause_terms_np(idx, qf, v, p)
    return p[HALF] * tmin


def _derivs_np(idx, qf, v, xs, xl, p, tie_first):
    half = p[HALF]
    one = p[ONE]
    zero = p[ZERO]
    n = v.shape[0]
    if idx.shape[0] == 0:
        z = np.full(n, zero, dtype=v.dtype)
        return z, np.zeros(0, dtype=v.dtype), np.zeros(0, dtype=v.dtype)
    t, tmin = _clause_terms_np(idx, qf, v, p)
    c = half * tmin
    g = np.empty_like(t)
    g[:, 0] = half * qf[:, 0] * np.minimum(t[:, 1], t[:, 2])
    g[:, 1] = half * qf[:, 1] * np.minimum(t[:, 0], t[:, 2])
    g[:, 2] = half * qf[:, 2] * np.minimum(t[:, 0], t[:, 1])
    attain = t == tmin[:, None]
    if tie_first:
        first = np.argmax(attain, axis=1)
        attain = np.zeros_like(attain)
        attain[np.arange(attain.shape[0]), first] = True
    r = np.where(attain, half * (qf - v[idx]), zero)
    g_scale = xl * xs
    r_scale = (one + p[ZETA] * xl) * (one - xs)
    contrib = g_scale[:, None] * g + r_scale[:, None] * r
    dv = np.full(n, zero, dtype=v.dtype)
    np.add.at(dv, idx.ravel(), contrib.ravel())
    dxs = p[BETA] * (xs + p[EPS]) * (c - p[GAMMA])
    dxl = p[ALPHA] * (c - p[DELTA])
    return dv, dxs, dxl


def _step_np(idx, qf, v, xs, xl, p, tie_first):
    one = p[ONE]
    dt = p[DT]
    eps = p[EPS]
    dv, dxs, dxl = _derivs_np(idx, qf, v, xs, xl, p, tie_first)
    xs[:] = np.minimum(np.maximum(xs + dt * dxs, eps), one - eps)
    xl[:] = np.minimum(np.maximum(xl + dt * dxl, one), p[XL_MAX])
    v[:] = np.minimum(np.maximum(v + dt * dv, -one), one)


def _run_np(idx, qf, v, xs, xl, p, tie_first, max_steps, check_every, t0):
    for k in range(1, max_steps + 1):
        _step_np(idx, qf, v, xs, xl, p, tie_first)
        if check_every > 0 and (t0 + k) % check_every == 0:
            if _sat_check_np(idx, qf, v):
                return True, k
    return False, max_steps


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def derivatives_arrays(idx, qf, v, xs, xl, p, tie_first=False, backend=None):
    """Right-hand sides (dv, dxs, dxl) at the given state; no mutation."""
    backend = resolve_backend(backend)
    if backend == "numba":
        dv = np.empty_like(v)
        dxs = np.empty_like(xs)
        dxl = np.empty_like(xl)
        _derivs_nb(idx, qf, v, xs, xl, p, int(tie_first), dv, dxs, dxl)
        return dv, dxs, dxl
    return _derivs_np(idx, qf, v, xs, xl, p, tie_first)


def run_inplace(
    idx,
    qf,
    v,
    xs,
    xl,
    p,
    tie_first=False,
    max_steps=1,
    check_every=0,
    t0=0,
    backend=None,
):
    """Advance the state in place by up to ``max_steps`` Euler steps.

    A satisfaction check runs after each step whose global index ``t0 + k``
    is a positive multiple of ``check_every`` (0 disables checking). Returns
    ``(found, steps_taken)``; on ``found`` the state is left at the detection
    step.
    """
    backend = resolve_backend(backend)
    run = _run_nb if backend == "numba" else _run_np
    found, steps = run(
        idx, qf, v, xs, xl, p, int(tie_first), int(max_steps), int(check_every), int(t0)
    )
    return bool(found), int(steps)


def sat_check(idx, qf, v, backend=None):
    """True iff the sign assignment (v >= 0) satisfies every clause."""
    backend = resolve_backend(backend)
    if backend == "numba":
        return bool(_sat_check_nb(idx, qf, v))
    return _sat_check_np(idx, qf, v)
