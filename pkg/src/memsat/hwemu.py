"""Fixed-point emulation of the hardware solve schedule.

One Euler step is realized as M+1 sequential intervals: interval m in
[0, M) evaluates clause m (its C, G, R values), accumulates that clause's
contributions to the per-variable voltage sums, and updates the clause's own
memory variables; the final interval applies the accumulated voltage updates
and clamps. Voltage writes are deferred to the last interval, so every
clause evaluation within a macro step observes the voltages from the step's
start (the block-RAM read/write delay behavior).

Number representation
---------------------
Values are signed fixed point: raw integer r in format Q(int_bits,
frac_bits) denotes r / 2**frac_bits, total width 1 + int_bits + frac_bits
bits. Voltages and short-term memory share one format; long-term memory
uses a same-total-width format whose integer part is widened to cover its
clamp ceiling 1e4 * M. Clause-level C, G, R carry one extra fraction bit
(the 1/2 factors are exact). Multiplications round to nearest, ties to
even. Working registers are 62-bit: any intermediate that would exceed
them saturates and is counted, as are out-of-range quantizations.

The stepping loop exists twice from one source: compiled with numba on
int64 (fast path) and as plain Python on unbounded ints (fallback path,
also the oracle the compiled path is tested against bit for bit). Backend
selection follows :mod:`memsat.kernels`.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import cnf, kernels
from .cnf import Instance
from .dynamics import Params, SolverState
from .errors import ConfigError, ContractError
from .solver import BUDGET_EXHAUSTED, SAT, RunRecord, SolveConfig, initialize

if kernels.NUMBA_AVAILABLE:
    from numba import njit
else:  # pragma: no cover - numba is a hard dependency
    njit = None

# Working-register magnitude bound (62 bits). Keeping one spare bit under
# int64 lets the limb arithmetic below stay overflow-free in compiled code.
_MAXW = (1 << 62) - 1
_MINW = -_MAXW
_MASK31 = (1 << 31) - 1

QUANTIZE_SAT = 0
ARITH_SAT = 1

DEFAULT_INT_BITS = 11
DEFAULT_FRAC_BITS = 20


@dataclass(frozen=True)
class FixedPointFormat:
    """Signed Q(int_bits, frac_bits); total width 1 + int_bits + frac_bits."""

    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.frac_bits < 1:
            raise ConfigError(f"frac_bits must be >= 1, got {self.frac_bits}")
        if self.int_bits < 0:
            raise ConfigError(f"int_bits must be >= 0, got {self.int_bits}")
        if self.total_bits > 64:
            raise ConfigError(f"total width {self.total_bits} exceeds 64 bits")
        if self.frac_bits > 60:
            # one extra fraction bit is used for C/G/R and products must fit
            # the 62-bit working registers
            raise ConfigError(f"frac_bits must be <= 60, got {self.frac_bits}")

    @property
    def total_bits(self) -> int:
        return 1 + self.int_bits + self.frac_bits

    @property
    def raw_max(self) -> int:
        return (1 << (self.int_bits + self.frac_bits)) - 1

    @property
    def raw_min(self) -> int:
        return -(1 << (self.int_bits + self.frac_bits))

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    def to_float(self, raw: int) -> float:
        return raw / self.scale

    def covers(self, value: float) -> bool:
        return self.raw_min <= value * self.scale <= self.raw_max


def default_format() -> FixedPointFormat:
    return FixedPointFormat(DEFAULT_INT_BITS, DEFAULT_FRAC_BITS)


def quantize(x: float, fmt: FixedPointFormat) -> int:
    """Raw fixed-point value of x: round to nearest even, saturate at range."""
    raw, _ = _quantize_flag(x, fmt)
    return raw


def _quantize_flag(x: float, fmt: FixedPointFormat) -> tuple[int, bool]:
    raw = round(float(x) * fmt.scale)
    if raw > fmt.raw_max:
        return fmt.raw_max, True
    if raw < fmt.raw_min:
        return fmt.raw_min, True
    return raw, False


def xl_format_for(v_fmt: FixedPointFormat, num_clauses: int) -> FixedPointFormat:
    """Same-total-width format whose integer part covers the x_l ceiling."""
    ceiling = 10_000 * max(num_clauses, 1)
    int_bits = ceiling.bit_length()
    frac_bits = (v_fmt.int_bits + v_fmt.frac_bits) - int_bits
    if frac_bits < 1:
        raise ConfigError(
            f"total width {v_fmt.total_bits} cannot represent x_l up to {ceiling} "
            "with at least one fraction bit"
        )
    return FixedPointFormat(int_bits, frac_bits)


def validate_formats(v_fmt: FixedPointFormat, xl_fmt: FixedPointFormat, instance: Instance) -> None:
    if v_fmt.int_bits < 1:
        raise ConfigError("voltage format cannot represent [-1, 1]; need int_bits >= 1")
    ceiling = 10_000 * max(instance.num_clauses, 1)
    if not xl_fmt.covers(ceiling):
        raise ConfigError(f"x_l format cannot represent the ceiling {ceiling}")


# ---------------------------------------------------------------------------
# saturating 62-bit arithmetic, single source for compiled and Python paths
# ---------------------------------------------------------------------------
#
# In compiled code the operands are int64 and overflow wraps, so wraps are
# detected by sign; in plain Python the same expressions run on unbounded
# ints, so range checks fire instead. Both paths return identical values.

def _sat_add(a, b, counters):
    c = a + b
    if c > _MAXW or (a > 0 and b > 0 and c < 0):
        counters[ARITH_SAT] += 1
        return _MAXW
    if c < _MINW or (a < 0 and b < 0 and c >= 0):
        counters[ARITH_SAT] += 1
        return _MINW
    return c


def _mulshift_rne(a, b, s, counters):
    # (a * b) >> s, rounding to nearest even, saturated to +-(2**62 - 1).
    # |a|, |b| <= 2**62 - 1, 0 <= s <= 63. 31-bit limbs keep every partial
    # product below 2**62, which int64 holds exactly.
    neg = (a < 0) != (b < 0)
    ua = -a if a < 0 else a
    ub = -b if b < 0 else b
    a0 = ua & _MASK31
    a1 = ua >> 31
    b0 = ub & _MASK31
    b1 = ub >> 31
    p00 = a0 * b0
    pmid = a1 * b0 + a0 * b1
    p11 = a1 * b1
    lo = p00 + ((pmid & _MASK31) << 31)
    hi = p11 + (pmid >> 31) + (lo >> 62)
    lo = lo & _MAXW
    # magnitude = hi * 2**62 + lo
    if s == 0:
        if hi != 0 or lo > _MAXW:
            counters[ARITH_SAT] += 1
            return _MINW if neg else _MAXW
        q = lo
    elif s <= 62:
        if (hi >> s) != 0:
            counters[ARITH_SAT] += 1
            return _MINW if neg else _MAXW
        q = (hi << (62 - s)) + (lo >> s)
        rem = lo & ((1 << s) - 1)
        half = 1 << (s - 1)
        if rem > half or (rem == half and (q & 1) == 1):
            q += 1
    else:  # s == 63
        q = hi >> 1
        rem = ((hi & 1) << 62) + lo
        half = 1 << 62
        if rem > half or (rem == half and (q & 1) == 1):
            q += 1
    if q > _MAXW:
        counters[ARITH_SAT] += 1
        q = _MAXW
    return -q if neg else q


def _build_shift_round(mulshift):
    def shift_round(x, s, counters):
        # x >> s with round-to-nearest-even; negative s is an exact left shift.
        if s <= 0:
            k = -s
            mag = -x if x < 0 else x
            if mag > (_MAXW >> k):
                counters[ARITH_SAT] += 1
                return _MINW if x < 0 else _MAXW
            return x << k
        return mulshift(x, 1, s, counters)

    return shift_round


_shift_round_rne = _build_shift_round(_mulshift_rne)


# Packed integer-constant layout for the stepping loop.
(
    C_ONE_V,
    C_EPS,
    C_XS_HI,
    C_GAMMA2,
    C_DELTA2,
    C_BETA,
    C_ALPHA,
    C_ZETA,
    C_DT,
    C_ONE_L,
    C_XL_MAX,
    C_FV,
    C_FL,
    C_TIE_FIRST,
) = range(14)
_N_CONSTS = 14


def _build_run_hw(mulshift, sat_add, shift_round):
    def run_hw(idx, qpos, v, xs, xl, consts, max_steps, check_every, t0, counters, dv):
        one_v = int(consts[C_ONE_V])
        eps_q = int(consts[C_EPS])
        xs_hi = int(consts[C_XS_HI])
        gamma2 = int(consts[C_GAMMA2])
        delta2 = int(consts[C_DELTA2])
        beta_q = int(consts[C_BETA])
        alpha_q = int(consts[C_ALPHA])
        zeta_q = int(consts[C_ZETA])
        dt_q = int(consts[C_DT])
        one_l = int(consts[C_ONE_L])
        xl_max = int(consts[C_XL_MAX])
        fv = int(consts[C_FV])
        fl = int(consts[C_FL])
        tie_first = int(consts[C_TIE_FIRST])
        conv = fv - fl
        n = v.shape[0]
        n_clauses = idx.shape[0]
        for k in range(1, max_steps + 1):
            for i in range(n):
                dv[i] = 0
            for m in range(n_clauses):
                i0 = int(idx[m, 0])
                i1 = int(idx[m, 1])
                i2 = int(idx[m, 2])
                q0 = int(qpos[m, 0])
                q1 = int(qpos[m, 1])
                q2 = int(qpos[m, 2])
                v0 = int(v[i0])
                v1 = int(v[i1])
                v2 = int(v[i2])
                t0_ = one_v - q0 * v0
                t1_ = one_v - q1 * v1
                t2_ = one_v - q2 * v2
                tmin = min(min(t0_, t1_), t2_)
                # C, G, R carry frac fv+1; the 1/2 factor is the implied bit.
                c2 = tmin
                g0 = q0 * min(t1_, t2_)
                g1 = q1 * min(t0_, t2_)
                g2 = q2 * min(t0_, t1_)
                a0 = t0_ == tmin
                a1 = t1_ == tmin
                a2 = t2_ == tmin
                if tie_first != 0:
                    if a0:
                        a1 = False
                        a2 = False
                    elif a1:
                        a2 = False
                r0 = q0 * one_v - v0 if a0 else 0
                r1 = q1 * one_v - v1 if a1 else 0
                r2 = q2 * one_v - v2 if a2 else 0
                xsm = int(xs[m])
                xlm = int(xl[m])
                g_scale = mulshift(xlm, xsm, fl, counters)
                z = mulshift(zeta_q, xlm, fl, counters)
                w = sat_add(one_v, z, counters)
                u = mulshift(w, one_v - xsm, fv, counters)
                c0_ = sat_add(
                    mulshift(g_scale, g0, fv + 1, counters),
                    mulshift(u, r0, fv + 1, counters),
                    counters,
                )
                c1_ = sat_add(
                    mulshift(g_scale, g1, fv + 1, counters),
                    mulshift(u, r1, fv + 1, counters),
                    counters,
                )
                c2_ = sat_add(
                    mulshift(g_scale, g2, fv + 1, counters),
                    mulshift(u, r2, fv + 1, counters),
                    counters,
                )
                dv[i0] = sat_add(int(dv[i0]), c0_, counters)
                dv[i1] = sat_add(int(dv[i1]), c1_, counters)
                dv[i2] = sat_add(int(dv[i2]), c2_, counters)
                # memory updates stay inside this clause's interval
                p1 = mulshift(xsm + eps_q, c2 - gamma2, fv + 1, counters)
                dxs = mulshift(beta_q, p1, fv, counters)
                step_s = mulshift(dxs, dt_q, fv, counters)
                nxs = sat_add(xsm, step_s, counters)
                xs[m] = min(max(nxs, eps_q), xs_hi)
                dxl = mulshift(alpha_q, c2 - delta2, fv + 1, counters)
                step_l = mulshift(dxl, dt_q, fv, counters)
                step_l = shift_round(step_l, conv, counters)
                nxl = sat_add(xlm, step_l, counters)
                xl[m] = min(max(nxl, one_l), xl_max)
            # final interval: apply the accumulated voltage updates
            for i in range(n):
                dvi = mulshift(int(dv[i]), dt_q, fv, counters)
                nv = sat_add(int(v[i]), dvi, counters)
                v[i] = min(max(nv, -one_v), one_v)
            if check_every > 0 and (t0 + k) % check_every == 0:
                sat_all = True
                for m in range(n_clauses):
                    ok = False
                    for s in range(3):
                        if (int(v[int(idx[m, s])]) >= 0) == (int(qpos[m, s]) > 0):
                            ok = True
                            break
                    if not ok:
                        sat_all = False
                        break
                if sat_all:
                    return True, k
        return False, max_steps

    return run_hw


_run_hw_py = _build_run_hw(_mulshift_rne, _sat_add, _shift_round_rne)

if kernels.NUMBA_AVAILABLE:
    _mulshift_nb = njit(cache=True)(_mulshift_rne)
    _sat_add_nb = njit(cache=True)(_sat_add)
    _shift_round_nb = njit(_build_shift_round(_mulshift_nb))
    _run_hw_nb = njit(_build_run_hw(_mulshift_nb, _sat_add_nb, _shift_round_nb))
else:  # pragma: no cover
    _run_hw_nb = None


# ---------------------------------------------------------------------------
# state and parameter packing
# ---------------------------------------------------------------------------

@dataclass
class HwState:
    """Fixed-point solver state: raw int64 arrays plus their formats."""

    v: np.ndarray
    xs: np.ndarray
    xl: np.ndarray
    t: int
    v_fmt: FixedPointFormat
    xl_fmt: FixedPointFormat

    def copy(self) -> "HwState":
        return HwState(self.v.copy(), self.xs.copy(), self.xl.copy(), self.t, self.v_fmt, self.xl_fmt)

    def to_float(self) -> SolverState:
        return SolverState(
            v=self.v.astype(np.float64) / self.v_fmt.scale,
            xs=self.xs.astype(np.float64) / self.v_fmt.scale,
            xl=self.xl.astype(np.float64) / self.xl_fmt.scale,
            t=self.t,
        )


@dataclass
class ScheduledStep:
    """Trace of one macro step: per-interval clause results and voltage sums.

    Raw values: c, g, r carry frac_bits+1 fraction bits; dv_contrib and
    dv_total carry frac_bits. ``intervals`` counts clock intervals consumed
    (M clause intervals plus the voltage-update interval).
    """

    intervals: int
    v_snapshot: np.ndarray
    c: np.ndarray
    g: np.ndarray
    r: np.ndarray
    dv_contrib: np.ndarray
    dv_total: np.ndarray


def to_fixed(
    instance: Instance,
    state: SolverState,
    v_fmt: FixedPointFormat,
    xl_fmt: FixedPointFormat | None = None,
    counters: np.ndarray | None = None,
) -> HwState:
    """Quantize a float state into fixed point, counting saturations."""
    if xl_fmt is None:
        xl_fmt = xl_format_for(v_fmt, instance.num_clauses)
    validate_formats(v_fmt, xl_fmt, instance)

    def q(arr, fmt):
        out = np.zeros(len(arr), dtype=np.int64)
        for i, x in enumerate(arr):
            raw, sat = _quantize_flag(float(x), fmt)
            if sat and counters is not None:
                counters[QUANTIZE_SAT] += 1
            out[i] = raw
        return out

    return HwState(
        v=q(state.v, v_fmt),
        xs=q(state.xs, v_fmt),
        xl=q(state.xl, xl_fmt),
        t=state.t,
        v_fmt=v_fmt,
        xl_fmt=xl_fmt,
    )


def _pack_consts(
    params: Params,
    v_fmt: FixedPointFormat,
    xl_fmt: FixedPointFormat,
    counters: np.ndarray | None = None,
) -> np.ndarray:
    consts = np.zeros(_N_CONSTS, dtype=np.int64)

    def q(x, fmt):
        raw, sat = _quantize_flag(x, fmt)
        if sat and counters is not None:
            counters[QUANTIZE_SAT] += 1
        return raw

    eps_q = q(params.epsilon, v_fmt)
    consts[C_ONE_V] = v_fmt.scale
    consts[C_EPS] = eps_q
    consts[C_XS_HI] = v_fmt.scale - eps_q
    consts[C_GAMMA2] = q(params.gamma, v_fmt) << 1
    consts[C_DELTA2] = q(params.delta, v_fmt) << 1
    consts[C_BETA] = q(params.beta, v_fmt)
    consts[C_ALPHA] = q(params.alpha, v_fmt)
    consts[C_ZETA] = q(params.zeta, v_fmt)
    consts[C_DT] = q(params.dt, v_fmt)
    consts[C_ONE_L] = xl_fmt.scale
    consts[C_XL_MAX] = q(params.xl_max, xl_fmt)
    consts[C_FV] = v_fmt.frac_bits
    consts[C_FL] = xl_fmt.frac_bits
    consts[C_TIE_FIRST] = 1 if params.tie_first else 0
    return consts


def _run(instance, hw, consts, max_steps, check_every, t0, counters, backend=None):
    backend = kernels.resolve_backend(backend)
    dv = np.zeros(instance.num_vars, dtype=np.int64)
    run = _run_hw_nb if backend == "numba" else _run_hw_py
    found, steps = run(
        instance.var_idx,
        instance.polarities.astype(np.int64),
        hw.v,
        hw.xs,
        hw.xl,
        consts,
        int(max_steps),
        int(check_every),
        int(t0),
        counters,
        dv,
    )
    return bool(found), int(steps)


def scheduled_step(
    instance: Instance,
    state: HwState,
    params: Params,
    counters: np.ndarray | None = None,
    backend: str | None = None,
) -> HwState:
    """One macro step (M+1 intervals); equals a fixed-point Euler step."""
    if counters is None:
        counters = np.zeros(2, dtype=np.int64)
    consts = _pack_consts(params, state.v_fmt, state.xl_fmt, counters)
    out = state.copy()
    _run(instance, out, consts, 1, 0, state.t, counters, backend=backend)
    out.t = state.t + 1
    return out


def scheduled_step_traced(
    instance: Instance,
    state: HwState,
    params: Params,
    counters: np.ndarray | None = None,
) -> tuple[HwState, ScheduledStep]:
    """As ``scheduled_step`` (Python path), recording per-interval results."""
    if counters is None:
        counters = np.zeros(2, dtype=np.int64)
    consts = _pack_consts(params, state.v_fmt, state.xl_fmt, counters)
    one_v = int(consts[C_ONE_V])
    fv = int(consts[C_FV])
    fl = int(consts[C_FL])
    m_count = instance.num_clauses
    n = instance.num_vars
    idx = instance.var_idx
    qpos = instance.polarities

    out = state.copy()
    snapshot = state.v.copy()
    c_arr = np.zeros(m_count, dtype=np.int64)
    g_arr = np.zeros((m_count, 3), dtype=np.int64)
    r_arr = np.zeros((m_count, 3), dtype=np.int64)
    contrib = np.zeros((m_count, 3), dtype=np.int64)
    dv = [0] * n

    for m in range(m_count):
        ii = [int(idx[m, s]) for s in range(3)]
        qq = [int(qpos[m, s]) for s in range(3)]
        vv = [int(snapshot[i]) for i in ii]
        t = [one_v - qq[s] * vv[s] for s in range(3)]
        tmin = min(t)
        c_arr[m] = tmin
        others = ((1, 2), (0, 2), (0, 1))
        attain = [t[s] == tmin for s in range(3)]
        if params.tie_first:
            seen = False
            for s in range(3):
                if attain[s] and not seen:
                    seen = True
                elif attain[s]:
                    attain[s] = False
        xsm = int(out.xs[m])
        xlm = int(out.xl[m])
        g_scale = _mulshift_rne(xlm, xsm, fl, counters)
        z = _mulshift_rne(int(consts[C_ZETA]), xlm, fl, counters)
        w = _sat_add(one_v, z, counters)
        u = _mulshift_rne(w, one_v - xsm, fv, counters)
        for s in range(3):
            j, k = others[s]
            g_arr[m, s] = qq[s] * min(t[j], t[k])
            r_arr[m, s] = (qq[s] * one_v - vv[s]) if attain[s] else 0
            term = _sat_add(
                _mulshift_rne(g_scale, int(g_arr[m, s]), fv + 1, counters),
                _mulshift_rne(u, int(r_arr[m, s]), fv + 1, counters),
                counters,
            )
            contrib[m, s] = term
            dv[ii[s]] = _sat_add(dv[ii[s]], term, counters)
        p1 = _mulshift_rne(xsm + int(consts[C_EPS]), int(c_arr[m]) - int(consts[C_GAMMA2]), fv + 1, counters)
        dxs = _mulshift_rne(int(consts[C_BETA]), p1, fv, counters)
        step_s = _mulshift_rne(dxs, int(consts[C_DT]), fv, counters)
        out.xs[m] = min(max(_sat_add(xsm, step_s, counters), int(consts[C_EPS])), int(consts[C_XS_HI]))
        dxl = _mulshift_rne(int(consts[C_ALPHA]), int(c_arr[m]) - int(consts[C_DELTA2]), fv + 1, counters)
        step_l = _mulshift_rne(dxl, int(consts[C_DT]), fv, counters)
        step_l = _shift_round_rne(step_l, fv - fl, counters)
        out.xl[m] = min(max(_sat_add(xlm, step_l, counters), int(consts[C_ONE_L])), int(consts[C_XL_MAX]))

    for i in range(n):
        dvi = _mulshift_rne(dv[i], int(consts[C_DT]), fv, counters)
        out.v[i] = min(max(_sat_add(int(out.v[i]), dvi, counters), -one_v), one_v)
    out.t = state.t + 1

    trace = ScheduledStep(
        intervals=m_count + 1,
        v_snapshot=snapshot,
        c=c_arr,
        g=g_arr,
        r=r_arr,
        dv_contrib=contrib,
        dv_total=np.array(dv, dtype=np.int64),
    )
    return out, trace


def solve_hw(
    instance: Instance,
    config: SolveConfig,
    fmt: FixedPointFormat | None = None,
    backend: str | None = None,
) -> RunRecord:
    """Run the scheduled fixed-point solve to SAT or budget exhaustion.

    The returned record carries the interval count (``cycles``, one clock
    cycle per interval: steps * (M+1)) and the saturation counters.
    """
    start = time.perf_counter()
    if fmt is None:
        fmt = default_format()
    xl_fmt = xl_format_for(fmt, instance.num_clauses)
    params = config.resolve_params(instance)
    counters = np.zeros(2, dtype=np.int64)
    consts = _pack_consts(params, fmt, xl_fmt, counters)

    float_state = initialize(instance, config)
    hw = to_fixed(instance, float_state, fmt, xl_fmt, counters)

    found, steps = _run(
        instance, hw, consts, config.max_steps, config.check_every, 0, counters, backend=backend
    )
    hw.t = steps
    assignment = None
    if found:
        assignment = tuple(bool(b) for b in (hw.v >= 0))
        if not cnf.evaluate(instance, assignment):
            raise ContractError("fixed-point satisfaction check disagrees with the clause evaluator")
    wall = time.perf_counter() - start
    return RunRecord(
        outcome=SAT if found else BUDGET_EXHAUSTED,
        assignment=assignment,
        steps=steps,
        wall_time=wall,
        seed=config.seed,
        instance_digest=instance.digest,
        cycles=steps * (instance.num_clauses + 1),
        saturation={"quantize": int(counters[QUANTIZE_SAT]), "arith": int(counters[ARITH_SAT])},
    )
