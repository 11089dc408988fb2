"""
Tensor and tape primitives for reverse-mode differentiation.

Every arithmetic operation on a Tensor is evaluated eagerly with numpy and,
when its tape is recording, appended to the tape together with a
vector-Jacobian product (VJP) closure. `Tape.backward` walks the recorded
nodes once in reverse order and accumulates gradients for every leaf.

All values are float64. A NaN or Inf produced by any operation raises
NonFiniteError immediately, naming the operation that produced it.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


class NonFiniteError(ArithmeticError):
    """Raised when an operation produces NaN or Inf."""


class TapeError(RuntimeError):
    """Raised on misuse of a tape (empty tape, mixed tapes)."""


VJP = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]
Operand = Union["Tensor", np.ndarray, float, int]


@dataclass
class _Node:
    """One recorded primitive: its op name, parent node indices and VJP."""
    op: str
    parents: Tuple[Optional[int], ...]
    vjp: Optional[VJP]  # None for leaves


def _as_array(value) -> np.ndarray:
    return np.asarray(value, dtype=np.float64)


def _check_finite(value: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(f"Non-finite value produced by '{op}'")


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """
    A dense float64 array bound to a Tape.

    Attributes:
        value: numpy array holding the forward value
        tape: Tape the tensor belongs to
        index: node index on the tape, or None for constants
    """

    __slots__ = ("value", "tape", "index")

    # numpy must defer to Tensor's reflected operators (array * tensor)
    __array_ufunc__ = None

    def __init__(self, value: np.ndarray, tape: "Tape", index: Optional[int] = None):
        self.value = value
        self.tape = tape
        self.index = index

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def data(self) -> List[float]:
        """Row-major values."""
        return self.value.ravel().tolist()

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def requires_grad(self) -> bool:
        return self.index is not None

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def numpy(self) -> np.ndarray:
        return self.value.copy()

    def item(self) -> float:
        if self.value.size != 1:
            raise ShapeError(f"item() needs a single value, got shape {self.shape}")
        return float(self.value.reshape(()))

    def __repr__(self) -> str:
        kind = "var" if self.requires_grad else "const"
        return f"Tensor({kind}, shape={self.shape})"

    def __add__(self, other: Operand) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: Operand) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: Operand) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: Operand) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: Operand) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: Operand) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: Operand) -> "Tensor":
        return div(self, other)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __matmul__(self, other: Operand) -> "Tensor":
        return matmul(self, other)

    def __rmatmul__(self, other: Operand) -> "Tensor":
        return matmul(other, self)

    def __pow__(self, exponent: int) -> "Tensor":
        return power(self, exponent)


class Tape:
    """
    Ordered record of primitive operations.

    A tape created with `record=False` evaluates operations without keeping
    nodes; it is used for evaluation-only rollouts.
    """

    def __init__(self, record: bool = True):
        self.record = record
        self._nodes: List[_Node] = []
        self._watched: Dict[int, Tuple[np.ndarray, Tensor]] = {}

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def ops(self) -> List[str]:
        return [node.op for node in self._nodes]

    def constant(self, value) -> Tensor:
        array = _as_array(value)
        _check_finite(array, "constant")
        return Tensor(array, self, None)

    def variable(self, value) -> Tensor:
        """Create a leaf that receives a gradient in `backward`."""
        array = _as_array(value)
        _check_finite(array, "variable")
        if not self.record:
            return Tensor(array, self, None)
        self._nodes.append(_Node("leaf", (), None))
        return Tensor(array, self, len(self._nodes) - 1)

    def watch(self, array: np.ndarray) -> Tensor:
        """
        Return the leaf bound to `array`, creating it on first use.

        Repeated calls with the same array object return the same leaf, so a
        parameter used at every step of a rollout accumulates one gradient.
        """
        entry = self._watched.get(id(array))
        if entry is not None and entry[0] is array:
            return entry[1]
        tensor = self.variable(array)
        self._watched[id(array)] = (array, tensor)
        return tensor

    def push(self, op: str, value: np.ndarray, parents: Sequence[Tensor], vjp: VJP) -> Tensor:
        _check_finite(value, op)
        if not self.record or all(p.index is None for p in parents):
            return Tensor(value, self, None)
        self._nodes.append(_Node(op, tuple(p.index for p in parents), vjp))
        return Tensor(value, self, len(self._nodes) - 1)

    def backward(self, output: Tensor) -> "Gradients":
        """
        Propagate d(output)/d(node) from a scalar output back to every leaf.

        Args:
            output: Scalar tensor recorded on this tape

        Returns:
            Gradients for all leaves of the tape
        """
        if output.tape is not self:
            raise TapeError("Output tensor belongs to a different tape")
        if not self._nodes:
            raise TapeError("Cannot run backward on an empty tape")
        if output.value.size != 1:
            raise ShapeError(f"backward needs a scalar output, got shape {output.shape}")

        leaf_grads: Dict[int, np.ndarray] = {}
        if output.index is None:
            # constant output: every gradient is zero
            return Gradients(self, leaf_grads)

        pending: Dict[int, np.ndarray] = {output.index: np.ones_like(output.value)}
        for idx in range(output.index, -1, -1):
            grad = pending.pop(idx, None)
            if grad is None:
                continue
            node = self._nodes[idx]
            if node.vjp is None:
                leaf_grads[idx] = grad
                continue
            for parent, parent_grad in zip(node.parents, node.vjp(grad)):
                if parent is None or parent_grad is None:
                    continue
                if parent in pending:
                    pending[parent] = pending[parent] + parent_grad
                else:
                    pending[parent] = parent_grad
        return Gradients(self, leaf_grads)


class Gradients:
    """Gradients of a scalar with respect to the leaves of a tape."""

    def __init__(self, tape: Tape, leaf_grads: Dict[int, np.ndarray]):
        self._tape = tape
        self._grads = leaf_grads

    def __len__(self) -> int:
        return len(self._grads)

    def wrt(self, target: Union[Tensor, np.ndarray]) -> np.ndarray:
        """
        Gradient with respect to a leaf tensor or a watched array.

        Leaves that the output does not depend on get a zero gradient.
        """
        if isinstance(target, Tensor):
            tensor = target
        else:
            entry = self._tape._watched.get(id(target))
            if entry is None or entry[0] is not target:
                return np.zeros_like(_as_array(target))
            tensor = entry[1]
        if tensor.index is None:
            return np.zeros_like(tensor.value)
        grad = self._grads.get(tensor.index)
        if grad is None:
            return np.zeros_like(tensor.value)
        return grad.reshape(tensor.shape)

    def for_arrays(self, arrays: Sequence[np.ndarray]) -> List[np.ndarray]:
        return [self.wrt(array) for array in arrays]


# ============================================================================
# Primitive operations
# ============================================================================

def _tape_of(*operands: Operand) -> Tape:
    tape = None
    for operand in operands:
        if isinstance(operand, Tensor):
            if tape is None:
                tape = operand.tape
            elif operand.tape is not tape:
                raise TapeError("Operands belong to different tapes")
    if tape is None:
        raise TapeError("At least one operand must be a Tensor")
    return tape


def _lift(tape: Tape, operand: Operand) -> Tensor:
    if isinstance(operand, Tensor):
        return operand
    return tape.constant(operand)


def _binary(a: Operand, b: Operand) -> Tuple[Tape, Tensor, Tensor]:
    tape = _tape_of(a, b)
    return tape, _lift(tape, a), _lift(tape, b)


def _compute(fn: Callable[[], np.ndarray], op: str) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        try:
            return np.asarray(fn(), dtype=np.float64)
        except ValueError as exc:
            raise ShapeError(f"Shape mismatch in '{op}': {exc}") from exc


def add(a: Operand, b: Operand) -> Tensor:
    tape, a, b = _binary(a, b)
    value = _compute(lambda: a.value + b.value, "add")
    sa, sb = a.shape, b.shape
    return tape.push("add", value, (a, b),
                     lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a: Operand, b: Operand) -> Tensor:
    tape, a, b = _binary(a, b)
    value = _compute(lambda: a.value - b.value, "sub")
    sa, sb = a.shape, b.shape
    return tape.push("sub", value, (a, b),
                     lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a: Operand, b: Operand) -> Tensor:
    tape, a, b = _binary(a, b)
    av, bv = a.value, b.value
    value = _compute(lambda: av * bv, "mul")
    return tape.push("mul", value, (a, b),
                     lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)))


def div(a: Operand, b: Operand) -> Tensor:
    tape, a, b = _binary(a, b)
    av, bv = a.value, b.value
    value = _compute(lambda: av / bv, "div")
    return tape.push("div", value, (a, b),
                     lambda g: (_unbroadcast(g / bv, av.shape),
                                _unbroadcast(-g * av / (bv * bv), bv.shape)))


def neg(a: Tensor) -> Tensor:
    value = -a.value
    return a.tape.push("neg", value, (a,), lambda g: (-g,))


def matmul(a: Operand, b: Operand) -> Tensor:
    tape, a, b = _binary(a, b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    av, bv = a.value, b.value
    value = _compute(lambda: av @ bv, "matmul")
    return tape.push("matmul", value, (a, b), lambda g: (g @ bv.T, av.T @ g))


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise ShapeError(f"transpose needs a 2-D operand, got {a.shape}")
    return a.tape.push("transpose", a.value.T.copy(), (a,), lambda g: (g.T,))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.value)
    return a.tape.push("tanh", y, (a,), lambda g: (g * (1.0 - y * y),))


def cos(a: Tensor) -> Tensor:
    av = a.value
    return a.tape.push("cos", np.cos(av), (a,), lambda g: (-g * np.sin(av),))


def square(a: Tensor) -> Tensor:
    av = a.value
    value = _compute(lambda: av * av, "square")
    return a.tape.push("square", value, (a,), lambda g: (2.0 * g * av,))


def power(a: Tensor, exponent: int) -> Tensor:
    if not isinstance(exponent, int) or exponent < 1:
        raise ValueError(f"power supports positive integer exponents, got {exponent!r}")
    av = a.value
    value = _compute(lambda: av ** exponent, "power")
    return a.tape.push("power", value, (a,),
                       lambda g: (g * exponent * av ** (exponent - 1),))


def sum(a: Tensor, axis: Optional[int] = None) -> Tensor:  # noqa: A001 - mirrors numpy
    shape = a.shape
    value = _compute(lambda: a.value.sum(axis=axis), "sum")
    if axis is None:
        vjp = lambda g: (np.broadcast_to(g, shape).copy(),)  # noqa: E731
    else:
        vjp = lambda g: (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)  # noqa: E731
    return a.tape.push("sum", value, (a,), vjp)


def concat(parts: Sequence[Operand], axis: int = 1) -> Tensor:
    tape = _tape_of(*parts)
    tensors = [_lift(tape, part) for part in parts]
    value = _compute(lambda: np.concatenate([t.value for t in tensors], axis=axis), "concat")
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def vjp(g: np.ndarray):
        return tuple(np.split(g, bounds, axis=axis))

    return tape.push("concat", value, tensors, vjp)


def columns(a: Tensor, start: int, stop: int) -> Tensor:
    """Slice columns `start:stop` of a 2-D tensor."""
    if a.ndim != 2:
        raise ShapeError(f"columns needs a 2-D operand, got {a.shape}")
    shape = a.shape

    def vjp(g: np.ndarray):
        full = np.zeros(shape)
        full[:, start:stop] = g
        return (full,)

    return a.tape.push("columns", a.value[:, start:stop].copy(), (a,), vjp)
