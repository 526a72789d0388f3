"""Truncated MacLaurin-series arithmetic and coefficient propagation.

The sink output of a validated network, seen as a function of a single
source input, is analytic with no constant term; this module computes its
first ``M`` coefficients (and, in jet form, their exact partial derivatives
with respect to every weight) by propagating truncated series layer by
layer: each node forms the weighted sum of its predecessors' series and
composes the activation on top.

Series are stored densely as ``c_1..c_M`` (the constant term is not
representable, which is exactly the f(0) = 0 regime).  Internally the
arithmetic uses length ``M+1`` arrays including the degree-0 slot so that
Horner evaluation of the outer polynomial in the truncated ring stays a
plain convolution loop; the slot is zero on every public boundary.

``oracle_expand`` is an independent brute-force check: it expands the whole
composition as an exact (untruncated) polynomial via naive convolution
products and truncates only at the end.  It shares no code with the
truncated path on purpose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegreeOverflow, OrderMismatch, ValidationError
from .network import Network

#: Default degree cap for the brute-force oracle.
ORACLE_DEGREE_CAP = 4096


def default_order(edge_count: int) -> int:
    """Default truncation order for analysis: |E| + 2."""
    return edge_count + 2


@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients ``c_1..c_M`` of a series with no constant term."""

    coeffs: np.ndarray

    def __init__(self, coeffs):
        arr = np.asarray(coeffs, dtype=float).copy()
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("series coefficients must be a non-empty 1-D array")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def order(self) -> int:
        return self.coeffs.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order == other.order and np.array_equal(self.coeffs, other.coeffs)

    def __getitem__(self, k: int) -> float:
        """Coefficient of ``x^k`` (1-based)."""
        if not 1 <= k <= self.order:
            raise IndexError(f"no coefficient {k} in an order-{self.order} series")
        return float(self.coeffs[k - 1])


@dataclass(frozen=True)
class JetSeries:
    """Series coefficients paired with gradients w.r.t. every weight.

    ``values`` has shape ``(M,)``, ``grads`` shape ``(M, |E|)`` with columns
    in the canonical edge order of :meth:`LayeredTopology.edges`.
    """

    values: np.ndarray
    grads: np.ndarray

    def __init__(self, values, grads):
        v = np.asarray(values, dtype=float).copy()
        g = np.asarray(grads, dtype=float).copy()
        if g.shape[0] != v.shape[0]:
            raise ValidationError("gradient rows must match coefficient count")
        v.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "grads", g)

    @property
    def order(self) -> int:
        return self.values.size

    @property
    def edge_count(self) -> int:
        return self.grads.shape[1]

    def series(self) -> TruncatedSeries:
        return TruncatedSeries(self.values)

    def jacobian(self, rows: int | None = None) -> np.ndarray:
        """Rows 1..``rows`` of the coefficient Jacobian (default: all)."""
        return np.array(self.grads[: rows if rows is not None else self.order])


# ---------------------------------------------------------------------------
# truncated-ring primitives (length M+1 arrays, slot 0 = constant term)
# ---------------------------------------------------------------------------

def _mul_trunc(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m = a.size
    return np.convolve(a, b)[:m]


def _conv_trunc_mat(a: np.ndarray, bmat: np.ndarray) -> np.ndarray:
    """Truncated convolution of vector ``a`` with each column of ``bmat``."""
    m = a.size
    out = np.zeros_like(bmat)
    for k in range(m):
        if a[k] != 0.0:
            out[k:] += a[k] * bmat[: m - k]
    return out


def _compose_full(outer: np.ndarray, g_full: np.ndarray) -> np.ndarray:
    """Horner evaluation of ``f(g)`` in the truncated ring.

    ``outer`` holds ``a_1..a_M``; ``g_full`` is a length ``M+1`` array with
    zero constant term.  Coefficient ``k`` of the result depends only on
    ``a_1..a_k`` and ``g_1..g_k``.
    """
    m = outer.size
    p = np.zeros(m + 1)
    p[0] = outer[m - 1]
    for k in range(m - 2, -1, -1):
        p = _mul_trunc(p, g_full)
        p[0] += outer[k]
    return _mul_trunc(p, g_full)


def compose(outer, inner: TruncatedSeries) -> TruncatedSeries:
    """Series of ``f o g`` truncated at the common order.

    ``outer`` is the coefficient list ``a_1..a_M`` of f; ``inner`` must be
    truncated at the same order M.
    """
    outer = np.asarray(outer, dtype=float)
    if outer.ndim != 1 or outer.size != inner.order:
        raise OrderMismatch(
            f"outer has {outer.size} coefficients, inner is order {inner.order}"
        )
    g_full = np.concatenate(([0.0], inner.coeffs))
    return TruncatedSeries(_compose_full(outer, g_full)[1:])


def propagate(net: Network, order: int) -> TruncatedSeries:
    """Coefficients ``A_1..A_M`` of the sink output for a unit source series.

    Layer 0 carries the identity series; each node applies its weighted sum
    of predecessor series followed by composition with the activation.
    """
    net.topology.require_single_source_sink("coefficient propagation")
    a = net.activation.coefficients(order)
    current = [np.concatenate(([0.0], [1.0], np.zeros(order - 1)))]
    for l in range(1, net.depth + 1):
        block = net.weights.block(l)
        nxt = []
        for i in range(block.shape[0]):
            s = np.zeros(order + 1)
            for j in range(block.shape[1]):
                s += block[i, j] * current[j]
            nxt.append(_compose_full(a, s))
        current = nxt
    return TruncatedSeries(current[0][1:])


def propagate_jet(net: Network, order: int) -> JetSeries:
    """Like :func:`propagate` but carrying exact weight gradients.

    Forward-mode differentiation runs through the same recursion: node
    states are (series, gradient-matrix) pairs and every ring product
    applies the ordinary product rule.
    """
    net.topology.require_single_source_sink("coefficient propagation")
    a = net.activation.coefficients(order)
    n_edges = net.edge_count
    m1 = order + 1

    zero_grad = np.zeros((m1, n_edges))
    src = np.concatenate(([0.0], [1.0], np.zeros(order - 1)))
    current = [(src, zero_grad)]

    edge_base = 0
    for l in range(1, net.depth + 1):
        block = net.weights.block(l)
        rows, cols = block.shape
        nxt = []
        for i in range(rows):
            s = np.zeros(m1)
            s_grad = np.zeros((m1, n_edges))
            for j in range(cols):
                gj_val, gj_grad = current[j]
                w = block[i, j]
                s += w * gj_val
                s_grad += w * gj_grad
                s_grad[:, edge_base + i * cols + j] += gj_val
            nxt.append(_jet_compose(a, s, s_grad))
        current = nxt
        edge_base += rows * cols

    val, grad = current[0]
    return JetSeries(val[1:], grad[1:])


def _jet_compose(outer: np.ndarray, g: np.ndarray, g_grad: np.ndarray):
    m = outer.size
    p = np.zeros(m + 1)
    p_grad = np.zeros_like(g_grad)
    p[0] = outer[m - 1]
    for k in range(m - 2, -1, -1):
        p, p_grad = _jet_mul(p, p_grad, g, g_grad)
        p[0] += outer[k]
    return _jet_mul(p, p_grad, g, g_grad)


def _jet_mul(av, ag, bv, bg):
    val = _mul_trunc(av, bv)
    grad = _conv_trunc_mat(av, bg) + _conv_trunc_mat(bv, ag)
    return val, grad


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def oracle_expand(
    net: Network, order: int, degree_cap: int = ORACLE_DEGREE_CAP
) -> TruncatedSeries:
    """Exact expansion of the nested composition, truncated at the end.

    Only polynomial activations are accepted (the expansion must be finite).
    Every node's function of the source input is kept as a full coefficient
    array starting at degree 0; powers of the inner polynomial are built by
    repeated naive convolution.
    """
    net.topology.require_single_source_sink("oracle expansion")
    if net.activation.kind != "polynomial":
        raise ValidationError("oracle_expand needs a polynomial activation")
    a = net.activation.coeffs

    def apply_f(poly: np.ndarray) -> np.ndarray:
        power = np.array([1.0])
        terms = [np.array([0.0])]
        for ak in a:
            power = np.convolve(power, poly)
            if power.size > degree_cap + 1:
                raise DegreeOverflow(
                    f"intermediate degree {power.size - 1} exceeds cap {degree_cap}"
                )
            if ak != 0.0:
                terms.append(ak * power)
        out = np.zeros(max(t.size for t in terms))
        for t in terms:
            out[: t.size] += t
        return out

    current = [np.array([0.0, 1.0])]
    for l in range(1, net.depth + 1):
        block = net.weights.block(l)
        nxt = []
        for i in range(block.shape[0]):
            width = max(current[j].size for j in range(block.shape[1]))
            s = np.zeros(width)
            for j in range(block.shape[1]):
                s[: current[j].size] += block[i, j] * current[j]
            nxt.append(apply_f(s))
        current = nxt

    full = current[0]
    out = np.zeros(order)
    upto = min(order + 1, full.size)
    out[: upto - 1] = full[1:upto]
    if full.size and abs(full[0]) > 0.0:
        raise ValidationError("oracle produced a constant term; activation had a0 != 0?")
    return TruncatedSeries(out)
