"""Minimal dense-tensor reverse-mode automatic differentiation.

Values are float64 numpy arrays wrapped in graph nodes. Each operation
records its parents and a backward rule at construction time; backward()
runs one reverse topological sweep and accumulates gradients into every
reachable node. The op inventory is deliberately small: exactly what a
mean-pooled tanh encoder with a contrastive objective needs.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConfigError,
    ContractError,
    DegenerateVectorError,
    EmptySentenceError,
    ShapeError,
)

_NORM_FLOOR = 1e-12


def as_tensor(data, name: str = "tensor") -> np.ndarray:
    """Coerce data to a contiguous float64 array, rejecting non-finite entries."""
    arr = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
    if arr.size and not np.isfinite(arr).all():
        raise ContractError(f"{name} contains non-finite entries")
    return arr


class Node:
    """One vertex of the computation graph.

    value   float64 array produced by the forward pass
    grad    accumulated gradient of the same shape, zero until backward()
    parents upstream nodes this value was computed from
    _rule   closure that adds this node's contribution to parents' grads
    """

    __slots__ = ("value", "grad", "op", "parents", "_rule")

    def __init__(self, value: np.ndarray, op: str = "leaf", parents: Sequence["Node"] = ()):
        self.value = value
        self.grad = np.zeros_like(value)
        self.op = op
        self.parents = tuple(parents)
        self._rule = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def __repr__(self) -> str:
        return f"Node(op={self.op!r}, shape={self.value.shape})"


def leaf(data, name: str = "leaf") -> Node:
    """Wrap raw data as a graph leaf (a trainable parameter or an input)."""
    return Node(as_tensor(data, name), op=name)


def _topo_order(root: Node) -> list[Node]:
    """Iterative post-order over the graph: parents before children."""
    order: list[Node] = []
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(root: Node) -> None:
    """Accumulate d(root)/d(node) into node.grad for every node under root.

    The root must be scalar. Gradients add onto whatever is already stored,
    so persistent leaves (parameters) must be zeroed between steps.
    """
    if root.value.ndim != 0:
        raise ContractError(
            f"backward expects a scalar root, got shape {root.value.shape}"
        )
    order = _topo_order(root)
    root.grad = np.ones_like(root.value)
    for node in reversed(order):
        if node._rule is not None:
            node._rule()


def zero_grads(nodes: Iterable[Node]) -> None:
    for node in nodes:
        node.zero_grad()


# ---------------------------------------------------------------------------
# elementwise and affine ops


def add(a: Node, b: Node) -> Node:
    if a.value.shape != b.value.shape:
        raise ShapeError(f"add: shapes {a.value.shape} and {b.value.shape} differ")
    out = Node(a.value + b.value, "add", (a, b))

    def rule():
        a.grad += out.grad
        b.grad += out.grad

    out._rule = rule
    return out


def sub(a: Node, b: Node) -> Node:
    if a.value.shape != b.value.shape:
        raise ShapeError(f"sub: shapes {a.value.shape} and {b.value.shape} differ")
    out = Node(a.value - b.value, "sub", (a, b))

    def rule():
        a.grad += out.grad
        b.grad -= out.grad

    out._rule = rule
    return out


def sub_col(m: Node, v: Node) -> Node:
    """Subtract a vector [n] from every column of a matrix [n, m]."""
    if m.value.ndim != 2 or v.value.ndim != 1 or m.value.shape[0] != v.value.shape[0]:
        raise ShapeError(
            f"sub_col: shapes {m.value.shape} and {v.value.shape} are incompatible"
        )
    out = Node(m.value - v.value[:, None], "sub_col", (m, v))

    def rule():
        m.grad += out.grad
        v.grad -= out.grad.sum(axis=1)

    out._rule = rule
    return out


def scale(a: Node, c: float) -> Node:
    """Multiply by a python scalar constant (not a graph node)."""
    c = float(c)
    if not np.isfinite(c):
        raise ContractError("scale: constant must be finite")
    out = Node(a.value * c, "scale", (a,))

    def rule():
        a.grad += out.grad * c

    out._rule = rule
    return out


def matmul(a: Node, b: Node) -> Node:
    """Matrix product. Supports [m,k]@[k,n] and the vector form [k]@[k,n]."""
    av, bv = a.value, b.value
    if av.ndim == 2 and bv.ndim == 2:
        if av.shape[1] != bv.shape[0]:
            raise ShapeError(f"matmul: shapes {av.shape} and {bv.shape} do not chain")
        out = Node(av @ bv, "matmul", (a, b))

        def rule():
            a.grad += out.grad @ bv.T
            b.grad += av.T @ out.grad

    elif av.ndim == 1 and bv.ndim == 2:
        if av.shape[0] != bv.shape[0]:
            raise ShapeError(f"matmul: shapes {av.shape} and {bv.shape} do not chain")
        out = Node(av @ bv, "matmul", (a, b))

        def rule():
            a.grad += bv @ out.grad
            b.grad += np.outer(av, out.grad)

    else:
        raise ShapeError(
            f"matmul: unsupported ranks for shapes {av.shape} and {bv.shape}"
        )
    out._rule = rule
    return out


def tanh_elem(a: Node) -> Node:
    y = np.tanh(a.value)
    out = Node(y, "tanh", (a,))

    def rule():
        a.grad += out.grad * (1.0 - y * y)

    out._rule = rule
    return out


# ---------------------------------------------------------------------------
# pooling, normalization, similarity


def mean_pool(rows: Node) -> Node:
    """Average the rows of a [t, d] matrix into a [d] vector."""
    if rows.value.ndim != 2:
        raise ShapeError(f"mean_pool: expected a 2-d input, got shape {rows.value.shape}")
    t = rows.value.shape[0]
    if t == 0:
        raise EmptySentenceError("mean_pool: cannot pool zero rows")
    out = Node(rows.value.mean(axis=0), "mean_pool", (rows,))

    def rule():
        rows.grad += out.grad[None, :] / t

    out._rule = rule
    return out


def l2_normalize(v: Node) -> Node:
    """Scale a vector to unit euclidean norm; differentiable."""
    if v.value.ndim != 1:
        raise ShapeError(f"l2_normalize: expected a vector, got shape {v.value.shape}")
    norm = float(np.linalg.norm(v.value))
    if norm <= _NORM_FLOOR:
        raise DegenerateVectorError(
            f"l2_normalize: vector norm {norm:.3e} is too small to normalize"
        )
    y = v.value / norm
    out = Node(y, "l2_normalize", (v,))

    def rule():
        g = out.grad
        v.grad += (g - y * float(y @ g)) / norm

    out._rule = rule
    return out


def cosine_matrix(a: Node, b: Node) -> Node:
    """All-pairs cosine similarity: entry (i, j) = cos(a_i, b_j).

    Inputs are [n, d] and [m, d]. Both row normalizations are folded into
    one op so the backward rule is a pair of dense products rather than a
    chain of intermediate nodes.
    """
    av, bv = a.value, b.value
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[1]:
        raise ShapeError(
            f"cosine_matrix: incompatible shapes {av.shape} and {bv.shape}"
        )
    na = np.linalg.norm(av, axis=1)
    nb = np.linalg.norm(bv, axis=1)
    for name, norms in (("left", na), ("right", nb)):
        bad = np.flatnonzero(norms <= _NORM_FLOOR)
        if bad.size:
            raise DegenerateVectorError(
                f"cosine_matrix: {name} row {int(bad[0])} has near-zero norm"
            )
    u = av / na[:, None]
    w = bv / nb[:, None]
    out = Node(u @ w.T, "cosine_matrix", (a, b))

    def rule():
        g = out.grad
        du = g @ w
        dw = g.T @ u
        a.grad += (du - u * (u * du).sum(axis=1, keepdims=True)) / na[:, None]
        b.grad += (dw - w * (w * dw).sum(axis=1, keepdims=True)) / nb[:, None]

    out._rule = rule
    return out


def dropout_forward(a: Node, rate: float, mask_seed) -> tuple[Node, np.ndarray]:
    """Inverted dropout: zero entries with probability rate, scale survivors.

    The keep mask is drawn from a generator seeded with mask_seed, so the
    same seed always produces the same mask. Returns (node, keep_mask).
    """
    rate = float(rate)
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    rng = np.random.default_rng(mask_seed)
    keep = rng.random(a.value.shape) >= rate
    multiplier = keep / (1.0 - rate)
    out = Node(a.value * multiplier, "dropout", (a,))

    def rule():
        a.grad += out.grad * multiplier

    out._rule = rule
    return out, keep


def logsumexp_row(s: Node) -> Node:
    """Row-wise log-sum-exp of a [n, m] matrix, max-shifted for stability."""
    if s.value.ndim != 2:
        raise ShapeError(f"logsumexp_row: expected a 2-d input, got shape {s.value.shape}")
    if s.value.shape[1] == 0:
        raise ShapeError("logsumexp_row: rows must have at least one column")
    row_max = s.value.max(axis=1)
    shifted = np.exp(s.value - row_max[:, None])
    y = row_max + np.log(shifted.sum(axis=1))
    out = Node(y, "logsumexp_row", (s,))

    def rule():
        softmax = np.exp(s.value - y[:, None])
        s.grad += softmax * out.grad[:, None]

    out._rule = rule
    return out


# ---------------------------------------------------------------------------
# structural ops


def lookup(table: Node, ids: Sequence[int]) -> Node:
    """Gather rows of an embedding table; backward scatters gradients back."""
    if table.value.ndim != 2:
        raise ShapeError(f"lookup: table must be 2-d, got shape {table.value.shape}")
    idx = np.asarray(ids, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise EmptySentenceError("lookup: need at least one id")
    rows = table.value.shape[0]
    if idx.min() < 0 or idx.max() >= rows:
        bad = int(idx[(idx < 0) | (idx >= rows)][0])
        raise ShapeError(f"lookup: id {bad} outside table with {rows} rows")
    out = Node(table.value[idx], "lookup", (table,))

    def rule():
        np.add.at(table.grad, idx, out.grad)

    out._rule = rule
    return out


def stack_rows(vectors: Sequence[Node]) -> Node:
    """Stack n equal-length vectors into an [n, d] matrix."""
    if len(vectors) == 0:
        raise ContractError("stack_rows: need at least one vector")
    d = vectors[0].value.shape
    for v in vectors:
        if v.value.ndim != 1 or v.value.shape != d:
            raise ShapeError(
                f"stack_rows: expected vectors of shape {d}, got {v.value.shape}"
            )
    out = Node(np.stack([v.value for v in vectors]), "stack_rows", tuple(vectors))

    def rule():
        for i, v in enumerate(vectors):
            v.grad += out.grad[i]

    out._rule = rule
    return out


def concat_cols(a: Node, b: Node) -> Node:
    """Concatenate two matrices with equal row counts along columns."""
    av, bv = a.value, b.value
    if av.ndim != 2 or bv.ndim != 2 or av.shape[0] != bv.shape[0]:
        raise ShapeError(f"concat_cols: incompatible shapes {av.shape} and {bv.shape}")
    split = av.shape[1]
    out = Node(np.concatenate([av, bv], axis=1), "concat_cols", (a, b))

    def rule():
        a.grad += out.grad[:, :split]
        b.grad += out.grad[:, split:]

    out._rule = rule
    return out


def diag_part(m: Node) -> Node:
    """Extract the diagonal of a square matrix as a vector."""
    mv = m.value
    if mv.ndim != 2 or mv.shape[0] != mv.shape[1]:
        raise ShapeError(f"diag_part: expected a square matrix, got shape {mv.shape}")
    n = mv.shape[0]
    idx = np.arange(n)
    out = Node(mv[idx, idx].copy(), "diag_part", (m,))

    def rule():
        m.grad[idx, idx] += out.grad

    out._rule = rule
    return out


def as_column(v: Node) -> Node:
    """Reshape a vector [n] into a single-column matrix [n, 1]."""
    if v.value.ndim != 1:
        raise ShapeError(f"as_column: expected a vector, got shape {v.value.shape}")
    out = Node(v.value[:, None].copy(), "as_column", (v,))

    def rule():
        v.grad += out.grad[:, 0]

    out._rule = rule
    return out


def mean_vec(v: Node) -> Node:
    """Mean of a vector's entries as a scalar node."""
    if v.value.ndim != 1 or v.value.shape[0] == 0:
        raise ShapeError(f"mean_vec: expected a nonempty vector, got shape {v.value.shape}")
    n = v.value.shape[0]
    out = Node(np.asarray(v.value.mean()), "mean_vec", (v,))

    def rule():
        v.grad += out.grad / n

    out._rule = rule
    return out
