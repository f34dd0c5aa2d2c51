"""Group-wise MMSE-OSIC detection with a block-compressed covariance recursion.

The proposed detector (`detect_gstbc`) never inverts the full regularized
Gram matrix directly.  It grows the inverse layer by layer through a
rank-one-per-block Schur recursion (`init_covariance`), then detects the
layers in decreasing post-MMSE quality order, deflating the inverse after
every cancellation (`deflate_covariance`).  All states stay in compressed
Alamouti form: diagonal blocks of both the Gram matrix and its inverse are
real scalar multiples of I2 throughout, which is what makes layer
selection a plain scalar argmin and the deflation a block rank-one update.

Reference detectors are included for benchmarking: a one-shot linear MMSE
equalizer, a brute-force symbol-wise MMSE-OSIC that re-inverts densely at
every step, a symbol-wise SIC constrained to the group-wise detection
order (equivalent, decision for decision, to `detect_gstbc`), and the
recursion with ordering disabled.  The dense references use the counted
helpers in `gstbc.dense`, so every detector reports its flop tally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .alamouti import (
    AlamoutiBlock,
    StructuredHermitianBlockMatrix,
    ab_adjoint_apply,
    ab_add,
    ab_apply,
    ab_adjoint,
    ab_mul,
    ab_scale_real,
    ab_sub,
    sbm_leading,
    sbm_matvec,
    sbm_swap_blocks,
)
from .channel import ChannelMatrix, EquivalentChannel, ReceivedVector, build_equivalent
from .dense import adjoint_apply, gj_inverse_hpd, gram_plus_alpha
from .errors import InvalidDimensions, NonPositiveAlpha, SingularPivot
from .flops import FlopCounter, cabs2, cadd, cmul, csub, flop_scope, radd, rcmul, rdiv, rmul, rsub
from .modulation import qpsk_slice

_PIVOT_REL_TOL = 1e-12
_IMAG_REL_TOL = 1e-9

Slicer = Callable[[complex], complex]


@dataclass(frozen=True)
class DetectorWorkspace:
    """Per-depth state of the group-wise recursion.

    `m` layers remain; `Rbar` and `Qbar` are the compressed regularized
    Gram matrix of the remaining columns and its inverse; `z` is the
    running matched-filter vector (length 2m); `p` maps the current block
    position to the original layer index (full length, never truncated);
    `alpha` is the MMSE regularizer.
    """

    m: int
    Rbar: StructuredHermitianBlockMatrix
    Qbar: StructuredHermitianBlockMatrix
    z: tuple
    p: tuple
    alpha: float


@dataclass(frozen=True)
class TraceStep:
    """Snapshot taken after ordering, before cancellation, at one depth."""

    workspace: DetectorWorkspace
    y1: complex
    y2: complex


@dataclass(frozen=True)
class DetectionResult:
    """Hard decisions, pre-slicing soft values, detection order and cost.

    `decisions` and `soft` are indexed by the original symbol positions.
    `order` lists original indices in detection sequence: layer indices
    for the group-wise detectors, symbol indices for the symbol-wise
    ones, and the natural order for the linear equalizer.
    """

    decisions: np.ndarray
    soft: np.ndarray
    order: tuple
    flops: FlopCounter
    trace: Optional[tuple] = None


def _as_array(x):
    return x.entries if isinstance(x, ReceivedVector) else np.asarray(x)


def _as_equivalent(hp):
    """Accept the physical gains or the already-stacked equivalent form.

    Assembling the equivalent channel is sign flips and conjugations
    only, which the operation convention does not charge.
    """
    if isinstance(hp, ChannelMatrix):
        hp = build_equivalent(hp)
    return hp


def _check_instance(hp, x, alpha: float):
    a = np.asarray(_as_equivalent(hp).array)
    xv = _as_array(x)
    if a.ndim != 2 or a.shape[0] % 2 or a.shape[1] % 2 or a.shape[1] == 0:
        raise InvalidDimensions(f"equivalent channel must be 2N x 2M, got {a.shape}")
    if xv.ndim != 1 or xv.size != a.shape[0]:
        raise InvalidDimensions(f"received vector length {xv.size} does not match 2N={a.shape[0]}")
    if not alpha > 0:
        raise NonPositiveAlpha(f"alpha must be > 0, got {alpha}")
    return a, xv


def matched_filter(hp, x) -> tuple:
    """Return H'^H x' as a tuple of 2M complex values."""
    a = np.asarray(_as_equivalent(hp).array)
    xv = _as_array(x)
    if xv.size != a.shape[0]:
        raise InvalidDimensions(f"received vector length {xv.size} does not match 2N={a.shape[0]}")
    rows = a.tolist()
    xs = xv.tolist()
    n_rows = len(xs)
    out = []
    for k in range(a.shape[1]):
        acc = cmul(rows[0][k].conjugate(), xs[0])
        for r in range(1, n_rows):
            acc = cadd(acc, cmul(rows[r][k].conjugate(), xs[r]))
        out.append(acc)
    return tuple(out)


def init_gram(hp, alpha: float) -> StructuredHermitianBlockMatrix:
    """Assemble H'^H H' + alpha I in compressed form.

    The column-pair orthogonality of the equivalent channel makes every
    diagonal block a real multiple of I2 and every off-diagonal block
    Alamouti, so only those parts are ever computed: per off-diagonal
    block 4N complex mults, per diagonal scalar 4N real mults.
    """
    if not alpha > 0:
        raise NonPositiveAlpha(f"alpha must be > 0, got {alpha}")
    arr = np.asarray(_as_equivalent(hp).array)
    m = arr.shape[1] // 2
    n = arr.shape[0] // 2
    # per receive antenna and layer: a = gain of the first antenna in the
    # pair, b = gain of the second; redundancy rows are implied
    a = arr[0::2, 0::2].tolist()
    b = arr[0::2, 1::2].tolist()
    diag = []
    for i in range(m):
        acc = radd(cabs2(a[0][i]), cabs2(b[0][i]))
        for r in range(1, n):
            acc = radd(acc, radd(cabs2(a[r][i]), cabs2(b[r][i])))
        diag.append(radd(acc, alpha))
    upper = []
    for i in range(m):
        for j in range(i + 1, m):
            acc1 = acc2 = None
            for r in range(n):
                ai, bi, aj, bj = a[r][i], b[r][i], a[r][j], b[r][j]
                t1 = cadd(cmul(ai.conjugate(), aj), cmul(bi, bj.conjugate()))
                t2 = csub(cmul(bi.conjugate(), aj), cmul(ai, bj.conjugate()))
                acc1 = t1 if acc1 is None else cadd(acc1, t1)
                acc2 = t2 if acc2 is None else cadd(acc2, t2)
            upper.append(AlamoutiBlock(acc1, acc2))
    return StructuredHermitianBlockMatrix(m, tuple(diag), tuple(upper))


def _pivot_guard(value, scale, what):
    if value <= _PIVOT_REL_TOL * max(scale, 1e-300):
        raise SingularPivot(f"{what} pivot {value!r} vanishes at scale {scale!r}")


def init_covariance(rbar: StructuredHermitianBlockMatrix) -> StructuredHermitianBlockMatrix:
    """Invert the compressed Gram matrix by growing one block at a time.

    Starting from the 2x2 case, each step appends one layer: with Q the
    current inverse, v the new off-diagonal block column of `rbar` and
    upsilon the new diagonal scalar, the quadratic form of the first
    column of v gives the new inverse diagonal scalar

        omega = 1 / (upsilon - v1^H Q v1),

    the new block column is w = -omega (Q v), and the leading part becomes
    Q + omega (Q v)(Q v)^H.  The quadratic form is computed once as a
    complex number and must come out real; a stale imaginary part or a
    non-positive denominator raises SingularPivot.
    """
    m = rbar.m
    scale = sum(rbar.diag) / m
    _pivot_guard(rbar.diag[0], scale, "leading diagonal")
    q = StructuredHermitianBlockMatrix(1, (rdiv(1.0, rbar.diag[0]),), ())
    for mm in range(2, m + 1):
        k = mm - 1
        v = [rbar.block(j, k) for j in range(k)]
        upsilon = rbar.diag[k]
        u = sbm_matvec(q, v)
        # quadratic form over the first expanded column of v and Q v
        beta = cmul(v[0].a1.conjugate(), u[0].a1)
        beta = cadd(beta, cmul(v[0].a2.conjugate(), u[0].a2))
        for j in range(1, k):
            beta = cadd(beta, cmul(v[j].a1.conjugate(), u[j].a1))
            beta = cadd(beta, cmul(v[j].a2.conjugate(), u[j].a2))
        if abs(beta.imag) > _IMAG_REL_TOL * max(abs(beta.real), 1e-300):
            raise SingularPivot(f"quadratic form {beta!r} lost its real structure")
        denom = rsub(upsilon, beta.real)
        _pivot_guard(denom, scale, "covariance recursion")
        omega = rdiv(1.0, denom)
        w = [ab_scale_real(-omega, uj) for uj in u]
        new_diag = []
        for i in range(k):
            grow = rmul(omega, radd(cabs2(u[i].a1), cabs2(u[i].a2)))
            new_diag.append(radd(q.diag[i], grow))
        new_diag.append(omega)
        new_upper = []
        for i in range(k):
            for j in range(i + 1, k):
                neg_wj = AlamoutiBlock(-w[j].a1, -w[j].a2)
                new_upper.append(ab_add(q.block(i, j), ab_mul(u[i], ab_adjoint(neg_wj))))
            new_upper.append(w[i])
        q = StructuredHermitianBlockMatrix(mm, tuple(new_diag), tuple(new_upper))
    return q


def select_layer(ws: DetectorWorkspace) -> int:
    """Pick the layer with the smallest inverse diagonal (best post-MMSE
    quality); returns the even scalar index 2(i+1) of the chosen block.
    Ties resolve to the smallest index."""
    best = 0
    best_val = ws.Qbar.diag[0]
    for i in range(1, ws.m):
        if ws.Qbar.diag[i] < best_val:
            best = i
            best_val = ws.Qbar.diag[i]
    return 2 * (best + 1)


def permute_workspace(ws: DetectorWorkspace, l: int) -> DetectorWorkspace:
    """Swap the chosen block into the last position of every state.

    `l` is the even scalar index returned by `select_layer`.  Data
    movement only; no flops.
    """
    if l % 2 or not 2 <= l <= 2 * ws.m:
        raise InvalidDimensions(f"block index must be even in [2, {2 * ws.m}], got {l}")
    k = l // 2 - 1
    last = ws.m - 1
    if k == last:
        return ws
    z = list(ws.z)
    z[2 * k], z[2 * last] = z[2 * last], z[2 * k]
    z[2 * k + 1], z[2 * last + 1] = z[2 * last + 1], z[2 * k + 1]
    p = list(ws.p)
    p[k], p[last] = p[last], p[k]
    return DetectorWorkspace(
        ws.m,
        sbm_swap_blocks(ws.Rbar, k, last),
        sbm_swap_blocks(ws.Qbar, k, last),
        tuple(z),
        tuple(p),
        ws.alpha,
    )


def estimate_layer(ws: DetectorWorkspace):
    """Soft estimates of the last block's symbol pair.

    Applies the adjoint of the last block column of the inverse to the
    running matched-filter vector; the diagonal block is a real scalar,
    so its contribution uses the cheap real-times-complex path.
    """
    m = ws.m
    omega = ws.Qbar.diag[m - 1]
    y1 = rcmul(omega, ws.z[2 * m - 2])
    y2 = rcmul(omega, ws.z[2 * m - 1])
    for j in range(m - 1):
        c1, c2 = ab_adjoint_apply(ws.Qbar.block(j, m - 1), ws.z[2 * j], ws.z[2 * j + 1])
        y1 = cadd(y1, c1)
        y2 = cadd(y2, c2)
    return y1, y2


def deflate_covariance(ws: DetectorWorkspace) -> StructuredHermitianBlockMatrix:
    """Inverse of the leading Gram submatrix after removing the last block.

    Undoes the growth step: with omega the last inverse diagonal and w the
    last inverse block column, the deflated inverse is T - (1/omega) w w^H
    on the leading part.  Raises SingularPivot if omega has collapsed.
    """
    m = ws.m
    q = ws.Qbar
    omega = q.diag[m - 1]
    _pivot_guard(omega, sum(q.diag) / m, "covariance deflation")
    inv_omega = rdiv(1.0, omega)
    w = [q.block(j, m - 1) for j in range(m - 1)]
    wt = [ab_scale_real(inv_omega, wj) for wj in w]
    diag = []
    for i in range(m - 1):
        drop = rmul(inv_omega, radd(cabs2(w[i].a1), cabs2(w[i].a2)))
        diag.append(rsub(q.diag[i], drop))
    upper = []
    for i in range(m - 1):
        for j in range(i + 1, m - 1):
            upper.append(ab_sub(q.block(i, j), ab_mul(wt[i], ab_adjoint(w[j]))))
    return StructuredHermitianBlockMatrix(m - 1, tuple(diag), tuple(upper))


def cancel_layer(ws: DetectorWorkspace, s1: complex, s2: complex) -> DetectorWorkspace:
    """Subtract the detected pair and shrink every state by one block.

    The matched-filter vector loses the detected layer's contribution
    through the off-diagonal Gram column, the Gram matrix truncates to its
    leading principal part, and the inverse deflates to match, so the
    returned workspace again satisfies Rbar Qbar = I.
    """
    m = ws.m
    q_next = deflate_covariance(ws)
    z = []
    for j in range(m - 1):
        t1, t2 = ab_apply(ws.Rbar.block(j, m - 1), s1, s2)
        z.append(csub(ws.z[2 * j], t1))
        z.append(csub(ws.z[2 * j + 1], t2))
    return DetectorWorkspace(
        m - 1,
        sbm_leading(ws.Rbar, m - 1),
        q_next,
        tuple(z),
        ws.p,
        ws.alpha,
    )


def _detect_recursive(hp, x, alpha, slicer, ordered, record_trace):
    a, _ = _check_instance(hp, x, alpha)
    m = a.shape[1] // 2
    local = FlopCounter()
    trace = [] if record_trace else None
    with flop_scope(local):
        z = matched_filter(hp, x)
        rbar = init_gram(hp, alpha)
        qbar = init_covariance(rbar)
        ws = DetectorWorkspace(m, rbar, qbar, z, tuple(range(m)), alpha)
        decisions = [0j] * (2 * m)
        soft = [0j] * (2 * m)
        for mm in range(m, 1, -1):
            l = select_layer(ws) if ordered else 2 * mm
            ws = permute_workspace(ws, l)
            y1, y2 = estimate_layer(ws)
            if record_trace:
                trace.append(TraceStep(ws, y1, y2))
            s1 = slicer(y1)
            s2 = slicer(y2)
            layer = ws.p[mm - 1]
            decisions[2 * layer] = s1
            decisions[2 * layer + 1] = s2
            soft[2 * layer] = y1
            soft[2 * layer + 1] = y2
            ws = cancel_layer(ws, s1, s2)
        y1, y2 = estimate_layer(ws)
        if record_trace:
            trace.append(TraceStep(ws, y1, y2))
        layer = ws.p[0]
        decisions[2 * layer] = slicer(y1)
        decisions[2 * layer + 1] = slicer(y2)
        soft[2 * layer] = y1
        soft[2 * layer + 1] = y2
    # ws.p[mm - 1] froze at the step that detected depth mm, so the
    # detection sequence is p reversed
    order = tuple(ws.p[::-1])
    return DetectionResult(
        np.array(decisions, dtype=np.complex128),
        np.array(soft, dtype=np.complex128),
        order,
        local,
        tuple(trace) if record_trace else None,
    )


def detect_gstbc(
    hp,
    x,
    alpha: float,
    slicer: Slicer = qpsk_slice,
    record_trace: bool = False,
) -> DetectionResult:
    """Group-wise MMSE-OSIC detection with optimal layer ordering.

    Layers are detected best-first (smallest inverse diagonal), each
    detected pair is cancelled from the matched-filter state, and the
    compressed inverse is deflated instead of recomputed.  `record_trace`
    keeps a per-depth snapshot of the workspace and soft pair for
    verification.
    """
    return _detect_recursive(hp, x, alpha, slicer, True, record_trace)


def detect_fixed_order(
    hp,
    x,
    alpha: float,
    slicer: Slicer = qpsk_slice,
    record_trace: bool = False,
) -> DetectionResult:
    """Same recursion as `detect_gstbc` with ordering disabled (last block
    first, every step).  Isolates the gain of the ordering rule."""
    return _detect_recursive(hp, x, alpha, slicer, False, record_trace)


def detect_linear_mmse(
    hp,
    x,
    alpha: float,
    slicer: Slicer = qpsk_slice,
) -> DetectionResult:
    """One-shot linear MMSE: y = (H'^H H' + alpha I)^{-1} H'^H x'."""
    a, xv = _check_instance(hp, x, alpha)
    n_sym = a.shape[1]
    local = FlopCounter()
    with flop_scope(local):
        cols = [a[:, k].tolist() for k in range(n_sym)]
        g = gram_plus_alpha(cols, alpha)
        q = gj_inverse_hpd(g)
        z = adjoint_apply(cols, xv.tolist())
        soft = []
        for k in range(n_sym):
            acc = cmul(q[k][0], z[0])
            for j in range(1, n_sym):
                acc = cadd(acc, cmul(q[k][j], z[j]))
            soft.append(acc)
        decisions = [slicer(y) for y in soft]
    return DetectionResult(
        np.array(decisions, dtype=np.complex128),
        np.array(soft, dtype=np.complex128),
        tuple(range(n_sym // 2)),
        local,
    )


def detect_osic_symbolwise(
    hp,
    x,
    alpha: float,
    slicer: Slicer = qpsk_slice,
) -> DetectionResult:
    """Symbol-wise MMSE-OSIC, brute force; the ordering oracle.

    At each of the 2M steps the regularized inverse of the remaining
    columns is recomputed densely, the symbol with the smallest inverse
    diagonal is estimated, sliced, cancelled from the residual, and its
    column dropped.  O(M^4) on purpose; no block structure is used.
    """
    a, xv = _check_instance(hp, x, alpha)
    n_sym = a.shape[1]
    local = FlopCounter()
    with flop_scope(local):
        cols = {k: a[:, k].tolist() for k in range(n_sym)}
        active = list(range(n_sym))
        residual = xv.tolist()
        decisions = [0j] * n_sym
        soft = [0j] * n_sym
        order = []
        while active:
            col_list = [cols[k] for k in active]
            q = gj_inverse_hpd(gram_plus_alpha(col_list, alpha))
            pos = 0
            for i in range(1, len(active)):
                if q[i][i].real < q[pos][pos].real:
                    pos = i
            z = adjoint_apply(col_list, residual)
            y = cmul(q[pos][0], z[0])
            for j in range(1, len(active)):
                y = cadd(y, cmul(q[pos][j], z[j]))
            sym = active[pos]
            s_hat = slicer(y)
            decisions[sym] = s_hat
            soft[sym] = y
            order.append(sym)
            col = cols[sym]
            for r in range(len(residual)):
                residual[r] = csub(residual[r], cmul(col[r], s_hat))
            active.pop(pos)
    return DetectionResult(
        np.array(decisions, dtype=np.complex128),
        np.array(soft, dtype=np.complex128),
        tuple(order),
        local,
    )


def detect_sic_groupwise_symbolwise(
    hp,
    x,
    alpha: float,
    slicer: Slicer = qpsk_slice,
) -> DetectionResult:
    """Symbol-wise SIC restricted to the group-wise detection order.

    Layers are chosen exactly as in `detect_gstbc` (smallest inverse
    diagonal over layer blocks, same interchange bookkeeping, so ties
    resolve identically), but the two symbols of the chosen layer are
    detected sequentially: second symbol first, cancelled, then the first
    symbol from a freshly inverted reduced system.  Everything is dense
    recomputation; the column-pair orthogonality of the equivalent channel
    makes the decisions match `detect_gstbc` decision for decision.
    """
    a, xv = _check_instance(hp, x, alpha)
    m = a.shape[1] // 2
    local = FlopCounter()
    with flop_scope(local):
        cols = {k: a[:, k].tolist() for k in range(2 * m)}
        arrange = list(range(m))
        residual = xv.tolist()
        decisions = [0j] * (2 * m)
        soft = [0j] * (2 * m)
        order = []

        def row_estimate(col_list, q, row):
            z = adjoint_apply(col_list, residual)
            y = cmul(q[row][0], z[0])
            for j in range(1, len(col_list)):
                y = cadd(y, cmul(q[row][j], z[j]))
            return y

        def cancel(sym, s_hat):
            col = cols[sym]
            for r in range(len(residual)):
                residual[r] = csub(residual[r], cmul(col[r], s_hat))

        for mm in range(m, 0, -1):
            syms = [s for lay in arrange[:mm] for s in (2 * lay, 2 * lay + 1)]
            col_list = [cols[k] for k in syms]
            q = gj_inverse_hpd(gram_plus_alpha(col_list, alpha))
            pos = 0
            for i in range(1, mm):
                if q[2 * i + 1][2 * i + 1].real < q[2 * pos + 1][2 * pos + 1].real:
                    pos = i
            layer = arrange[pos]
            order.append(layer)
            # second symbol of the chosen pair first, from the full inverse
            y2 = row_estimate(col_list, q, 2 * pos + 1)
            s2 = slicer(y2)
            decisions[2 * layer + 1] = s2
            soft[2 * layer + 1] = y2
            cancel(2 * layer + 1, s2)
            # mirror the interchange bookkeeping of the compressed recursion
            # so tie resolution matches it exactly
            arrange[pos], arrange[mm - 1] = arrange[mm - 1], arrange[pos]
            # then the first symbol, from a freshly inverted reduced system
            syms = [s for lay in arrange[: mm - 1] for s in (2 * lay, 2 * lay + 1)]
            syms.append(2 * layer)
            col_list = [cols[k] for k in syms]
            q = gj_inverse_hpd(gram_plus_alpha(col_list, alpha))
            y1 = row_estimate(col_list, q, 2 * mm - 2)
            s1 = slicer(y1)
            decisions[2 * layer] = s1
            soft[2 * layer] = y1
            cancel(2 * layer, s1)
    return DetectionResult(
        np.array(decisions, dtype=np.complex128),
        np.array(soft, dtype=np.complex128),
        tuple(order),
        local,
    )

SCALAR_DETECTORS = {
    "proposed": detect_gstbc,
    "fixed_order": detect_fixed_order,
    "linear_mmse": detect_linear_mmse,
    "osic_symbolwise": detect_osic_symbolwise,
    "sic_groupwise": detect_sic_groupwise_symbolwise,
}
