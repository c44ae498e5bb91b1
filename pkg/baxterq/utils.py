from collections.abc import Mapping
from functools import partial

import numpy as np


NOT_SET = object()


def balanced_reduce(operator, seq, initializer=NOT_SET):
    """
    Has the same result as Python's reduce function, but performs the calculations in a different order.

    For tensor products this keeps the intermediate operands small for as long as possible:

    reduce(kron, [a, b, c, d])
    kron(kron(kron(a, b), c), d)

    balanced_reduce(kron, [a, b, c, d])
    kron(kron(a, b), kron(c, d))

    The order of the factors is preserved, so the result is identical.
    """
    # Casting all iterables to list makes the implementation simpler
    if not isinstance(seq, list):
        seq = list(seq)

    # Note, it needs to be possible to use None as an initial value
    if initializer is not NOT_SET:
        if len(seq) == 0:
            return initializer
        else:
            return operator(initializer, balanced_reduce(operator, seq))

    if len(seq) == 0:
        raise TypeError("reduce() of empty sequence with no initial value")
    elif len(seq) == 1:
        return seq[0]
    else:
        break_point = len(seq) // 2
        first_set = balanced_reduce(operator, seq[:break_point])
        second_set = balanced_reduce(operator, seq[break_point:])
        return operator(first_set, second_set)


# Kronecker product of a sequence of matrices or vectors, leftmost factor slowest
KRON = partial(balanced_reduce, np.kron)


def deep_update(source, overrides):
    """Update a nested dictionary or similar mapping.

    Modify ``source`` in place.
    """
    for key, value in overrides.items():
        if isinstance(value, Mapping) and value:
            returned = deep_update(source.get(key, {}), value)
            source[key] = returned
        else:
            source[key] = overrides[key]
    return source


def relative_residual(lhs, rhs, scale=None):
    """
    Norm of ``lhs - rhs`` relative to the largest of the two sides (or ``scale``).

    Works for scalars, vectors and matrices alike; matrices use the Frobenius norm.
    """
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    if scale is None:
        scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs) / scale)


def ratio_residual(ratios):
    """
    Largest deviation from one of a collection of ratios (computed over closed form).
    """
    ratios = np.asarray(ratios, dtype=complex)
    if not ratios.size:
        return 0.0
    return float(np.max(np.abs(ratios - 1)))
