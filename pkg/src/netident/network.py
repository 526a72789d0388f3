"""Layered feed-forward network model: topologies, weights, activations.

A network is the triple (topology, weights, activation).  Topologies are
lists of layer sizes ``[n_0, ..., n_L]``; weights are per-layer dense blocks
where block ``l`` (1-based) has shape ``(n_l, n_{l-1})`` and entry ``(i, j)``
is the weight of the edge from node ``j`` of layer ``l-1`` into node ``i``
of layer ``l``.  Activations map 0 to 0 and are described either by stored
MacLaurin coefficients ``a_1..a_M`` or by a closed-form kind that generates
coefficients on demand.

Everything here is immutable after construction and validated exactly once.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    BadLayer,
    EmptyLayer,
    InfeasibleOrdering,
    NonzeroConstantTerm,
    RangeContainsZero,
    SeriesDomainExceeded,
    ShapeMismatch,
    ValidationError,
    ZeroWeight,
)

ACTIVATION_KINDS = ("maclaurin", "polynomial", "expm1", "tanh")

#: Trusted evaluation radius for truncated MacLaurin activations.
DEFAULT_SERIES_RADIUS = 0.5

#: Default weight sampling range and ordered-sampling margin.
DEFAULT_WEIGHT_RANGE = (0.5, 3.0)
DEFAULT_ORDER_MARGIN = 0.1


@dataclass(frozen=True)
class LayeredTopology:
    """Layer sizes ``n_0..n_L`` of a layered feed-forward graph."""

    layer_sizes: tuple[int, ...]

    def __init__(self, layer_sizes: Sequence[int]):
        sizes = tuple(int(n) for n in layer_sizes)
        if len(sizes) < 2:
            raise ValidationError("a topology needs at least two layers (depth >= 1)")
        for l, n in enumerate(sizes):
            if n < 1:
                raise EmptyLayer(f"layer {l} has {n} nodes; every layer needs at least one")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def depth(self) -> int:
        """Number of edge layers L."""
        return len(self.layer_sizes) - 1

    @property
    def edge_count(self) -> int:
        """|E| of the fully-connected graph on these layers."""
        s = self.layer_sizes
        return sum(s[l - 1] * s[l] for l in range(1, len(s)))

    @property
    def single_source_sink(self) -> bool:
        return self.layer_sizes[0] == 1 and self.layer_sizes[-1] == 1

    def block_shape(self, l: int) -> tuple[int, int]:
        """Shape (rows, cols) of weight block ``W^l``, ``1 <= l <= L``."""
        if not 1 <= l <= self.depth:
            raise BadLayer(f"no weight block W^{l} in a depth-{self.depth} topology")
        return (self.layer_sizes[l], self.layer_sizes[l - 1])

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Canonical edge enumeration: layer-major, then row-major per block.

        Yields 1-based ``(l, i, j)`` with ``i`` in layer ``l`` and ``j`` in
        layer ``l-1``.  Jacobian columns follow this order everywhere.
        """
        for l in range(1, self.depth + 1):
            rows, cols = self.block_shape(l)
            for i in range(1, rows + 1):
                for j in range(1, cols + 1):
                    yield (l, i, j)

    def require_single_source_sink(self, what: str) -> None:
        if not self.single_source_sink:
            raise ValidationError(
                f"{what} requires one source and one sink "
                f"(n_0 = n_L = 1); got layers {list(self.layer_sizes)}"
            )


class WeightMatrix:
    """Per-layer dense weight blocks ``W^1..W^L`` with nonzero entries."""

    def __init__(self, blocks: Sequence[np.ndarray]):
        self.blocks = [np.array(b, dtype=float) for b in blocks]
        for b in self.blocks:
            if b.ndim != 2:
                raise ShapeMismatch(f"weight block must be 2-D, got shape {b.shape}")
            b.setflags(write=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightMatrix):
            return NotImplemented
        return len(self.blocks) == len(other.blocks) and all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in zip(self.blocks, other.blocks)
        )

    def __repr__(self) -> str:
        shapes = "x".join(f"({r},{c})" for r, c in (b.shape for b in self.blocks))
        return f"WeightMatrix[{shapes}]"

    def block(self, l: int) -> np.ndarray:
        """Block ``W^l`` (1-based layer index)."""
        return self.blocks[l - 1]

    def entry(self, l: int, i: int, j: int) -> float:
        """Entry ``w^l_{ij}`` with 1-based indices."""
        return float(self.blocks[l - 1][i - 1, j - 1])

    def to_vector(self) -> np.ndarray:
        """Flatten into canonical edge order (see ``LayeredTopology.edges``)."""
        return np.concatenate([b.ravel() for b in self.blocks])

    @staticmethod
    def from_vector(topology: LayeredTopology, vec: np.ndarray) -> "WeightMatrix":
        vec = np.asarray(vec, dtype=float)
        if vec.size != topology.edge_count:
            raise ShapeMismatch(
                f"expected {topology.edge_count} weights, got {vec.size}"
            )
        blocks, pos = [], 0
        for l in range(1, topology.depth + 1):
            rows, cols = topology.block_shape(l)
            blocks.append(vec[pos : pos + rows * cols].reshape(rows, cols))
            pos += rows * cols
        return WeightMatrix(blocks)

    def is_ordered_positive(self, tol: float = 0.0) -> bool:
        """Membership in the ordered-positive class: all entries positive and,
        per layer and column, strictly decreasing down the rows (within tol)."""
        for b in self.blocks:
            if np.any(b <= 0):
                return False
            if np.any(np.diff(b, axis=0) >= tol):
                return False
        return True


def _tanh_coefficients(order: int) -> list[float]:
    # t' = 1 - t^2 with t(0) = 0 gives an exact rational recurrence.
    a: list[Fraction] = [Fraction(0)] * (order + 1)
    if order >= 1:
        a[1] = Fraction(1)
    for m in range(2, order + 1):
        conv = sum(a[i] * a[m - 1 - i] for i in range(1, m - 1))
        a[m] = -conv / m
    return [float(c) for c in a[1:]]


@dataclass(frozen=True)
class AnalyticActivation:
    """Node nonlinearity with f(0) = 0.

    ``maclaurin`` and ``polynomial`` kinds store coefficients ``a_1..a_M``
    explicitly (``polynomial`` is exactly the finite sum; ``maclaurin`` is a
    truncation trusted only inside ``radius``).  ``expm1`` and ``tanh``
    generate coefficients to any order from exact formulas.
    """

    kind: str
    coeffs: tuple[float, ...] = ()
    radius: float = DEFAULT_SERIES_RADIUS

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise ValidationError(f"unknown activation kind {self.kind!r}")
        if self.kind in ("maclaurin", "polynomial"):
            if len(self.coeffs) == 0:
                raise ValidationError(f"{self.kind} activation needs coefficients a_1..a_M")
            object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        elif self.coeffs:
            raise ValidationError(f"{self.kind} activation takes no stored coefficients")

    def coefficients(self, order: int) -> np.ndarray:
        """MacLaurin coefficients ``a_1..a_order`` as a float array.

        Stored kinds are zero-padded beyond their list (exact for
        ``polynomial``; for ``maclaurin`` the stored truncation is taken at
        face value).  Closed-form kinds are generated exactly.
        """
        if order < 1:
            raise ValidationError("order must be >= 1")
        if self.kind == "expm1":
            return np.array([1.0 / math.factorial(k) for k in range(1, order + 1)])
        if self.kind == "tanh":
            return np.array(_tanh_coefficients(order))
        out = np.zeros(order)
        upto = min(order, len(self.coeffs))
        out[:upto] = self.coeffs[:upto]
        return out

    def __call__(self, x: float) -> float:
        """Pointwise evaluation, closed form where available."""
        if self.kind == "expm1":
            return math.expm1(x)
        if self.kind == "tanh":
            return math.tanh(x)
        if self.kind == "maclaurin" and abs(x) > self.radius:
            raise SeriesDomainExceeded(
                f"|{x}| exceeds the trusted radius {self.radius} of a truncated series"
            )
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc * x


@dataclass(frozen=True)
class Network:
    """Validated network (topology, weights, activation)."""

    topology: LayeredTopology
    weights: WeightMatrix
    activation: AnalyticActivation
    _mask: tuple = field(default=(), repr=False, compare=False)  # reserved, unused

    def __post_init__(self):
        topo, W = self.topology, self.weights
        if len(W.blocks) != topo.depth:
            raise ShapeMismatch(
                f"{len(W.blocks)} weight blocks for a depth-{topo.depth} topology"
            )
        for l in range(1, topo.depth + 1):
            b = W.block(l)
            if b.shape != topo.block_shape(l):
                raise ShapeMismatch(
                    f"W^{l} has shape {b.shape}, expected {topo.block_shape(l)}"
                )
            zeros = np.argwhere(b == 0.0)
            if zeros.size:
                i, j = zeros[0]
                raise ZeroWeight(l, int(i) + 1, int(j) + 1)
            if not np.all(np.isfinite(b)):
                raise ValidationError(f"W^{l} contains non-finite entries")

    @property
    def depth(self) -> int:
        return self.topology.depth

    @property
    def edge_count(self) -> int:
        return self.topology.edge_count

    def to_dict(self) -> dict:
        act: dict = {"kind": self.activation.kind}
        if self.activation.kind in ("maclaurin", "polynomial"):
            act["coeffs"] = list(self.activation.coeffs)
            if self.activation.kind == "maclaurin":
                act["radius"] = self.activation.radius
        return {
            "layers": list(self.topology.layer_sizes),
            "activation": act,
            "weights": [b.tolist() for b in self.weights.blocks],
        }

    def content_hash(self) -> str:
        import hashlib

        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def validate_network(spec: dict) -> Network:
    """Build a :class:`Network` from a raw description, enforcing invariants.

    The accepted schema is the network JSON schema::

        {"layers": [1, 2, 1],
         "activation": {"kind": "expm1"} |
                       {"kind": "maclaurin", "coeffs": [a1, ...], "radius": 0.5} |
                       {"kind": "polynomial", "coeffs": [a1, ...]},
         "weights": [[[...]], ...]}   # weights[l-1] is the n_l x n_{l-1} block

    An explicit ``a0`` key (or a leading constant under ``coeffs0``) is
    rejected: the supported class has f(0) = 0.
    """
    if not isinstance(spec, dict):
        raise ValidationError("network spec must be a mapping")
    try:
        layers = spec["layers"]
        act_spec = spec["activation"]
        weight_blocks = spec["weights"]
    except KeyError as exc:
        raise ValidationError(f"network spec missing key {exc}") from None

    topo = LayeredTopology(layers)

    if not isinstance(act_spec, dict) or "kind" not in act_spec:
        raise ValidationError("activation spec must be a mapping with a 'kind'")
    kind = act_spec["kind"]
    if "a0" in act_spec and float(act_spec["a0"]) != 0.0:
        raise NonzeroConstantTerm("activation encodes a0 != 0; f(0) must be 0")
    coeffs = act_spec.get("coeffs", ())
    if "a0" not in act_spec and isinstance(coeffs, dict):
        raise ValidationError("coeffs must be a list a_1..a_M")
    kwargs = {}
    if kind == "maclaurin" and "radius" in act_spec:
        kwargs["radius"] = float(act_spec["radius"])
    activation = AnalyticActivation(kind, tuple(coeffs), **kwargs)

    return Network(topo, WeightMatrix(weight_blocks), activation)


def network_from_json(text: str) -> Network:
    return validate_network(json.loads(text))


def network_to_json(net: Network) -> str:
    # json round-trips doubles exactly via repr, so parse(serialize(net)) == net.
    return json.dumps(net.to_dict(), indent=2)


def load_network(path: str) -> Network:
    with open(path) as fh:
        return network_from_json(fh.read())


def save_network(net: Network, path: str) -> None:
    write_text_atomic(path, network_to_json(net) + "\n")


def write_text_atomic(path: str, text: str) -> None:
    """Write via a temp file plus rename so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".netident-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# weight sampling
# ---------------------------------------------------------------------------

def random_weights(
    topology: LayeredTopology,
    seed: int,
    weight_range: tuple[float, float] = DEFAULT_WEIGHT_RANGE,
) -> WeightMatrix:
    """I.i.d. uniform nonzero weights on ``weight_range``; deterministic in seed.

    The range must not straddle (or touch) zero, so sampled matrices are
    automatically consistent with the fully-connected edge set.
    """
    lo, hi = float(weight_range[0]), float(weight_range[1])
    if lo >= hi:
        raise ValidationError(f"empty weight range ({lo}, {hi})")
    if lo <= 0.0 <= hi:
        raise RangeContainsZero(f"weight range ({lo}, {hi}) contains zero")
    rng = np.random.default_rng(seed)
    blocks = [
        rng.uniform(lo, hi, size=topology.block_shape(l))
        for l in range(1, topology.depth + 1)
    ]
    return WeightMatrix(blocks)


def random_ordered_weights(
    topology: LayeredTopology,
    seed: int,
    weight_range: tuple[float, float] = DEFAULT_WEIGHT_RANGE,
    margin: float = DEFAULT_ORDER_MARGIN,
) -> WeightMatrix:
    """Sample ordered-positive weights: per layer and column, entries strictly
    decrease down the rows with pairwise gaps >= ``margin``.

    Each column draws sorted uniforms on the margin-reduced span and adds the
    gap offsets back, which keeps the distribution uniform over the feasible
    ordered region.
    """
    lo, hi = float(weight_range[0]), float(weight_range[1])
    if lo <= 0:
        raise ValidationError("ordered-positive sampling needs a positive range")
    if margin <= 0:
        raise ValidationError("margin must be positive")
    rng = np.random.default_rng(seed)
    blocks = []
    for l in range(1, topology.depth + 1):
        rows, cols = topology.block_shape(l)
        span = (hi - lo) - (rows - 1) * margin
        if span <= 0:
            raise InfeasibleOrdering(
                f"layer {l}: {rows - 1} gaps of {margin} do not fit in ({lo}, {hi})"
            )
        block = np.empty((rows, cols))
        for j in range(cols):
            base = np.sort(rng.uniform(0.0, span, size=rows))[::-1]
            offsets = margin * np.arange(rows - 1, -1, -1)
            block[:, j] = lo + base + offsets
        blocks.append(block)
    return WeightMatrix(blocks)


def permute_hidden_layer(net: Network, l: int, perm: Sequence[int]) -> Network:
    """Relabel the nodes of hidden layer ``l`` by ``perm`` (0-based).

    Row ``i`` of the new ``W^l`` is row ``perm[i]`` of the old one, and the
    columns of ``W^{l+1}`` move the same way, so the returned network is
    input-output equivalent to ``net``.
    """
    if not 1 <= l <= net.depth - 1:
        raise BadLayer(f"layer {l} is not hidden; sources and sinks cannot be permuted")
    n = net.topology.layer_sizes[l]
    perm = list(perm)
    if sorted(perm) != list(range(n)):
        raise ValidationError(f"{perm} is not a permutation of 0..{n - 1}")
    blocks = [b.copy() for b in net.weights.blocks]
    blocks[l - 1] = blocks[l - 1][perm, :]
    blocks[l] = blocks[l][:, perm]
    return Network(net.topology, WeightMatrix(blocks), net.activation)
