import logging
import math

from dataclasses import dataclass

import numpy as np
import scipy.linalg


logger = logging.getLogger("baxterq.numerics")


DEFAULT_CONDITION_CAP = 1e10

POINTS_PER_EDGE = 1024
MAX_POINTS_PER_EDGE = 2**15
SUBDIVISION_POINTS_PER_EDGE = 128
MAX_SUBDIVISION_DEPTH = 40

# |f| on the contour below this fraction of its maximum counts as a boundary zero
BOUNDARY_ZERO_RTOL = 1e-12
# Offset applied to a rectangle with a zero on its boundary, relative to the shorter side
BOUNDARY_SHIFT = 1e-3

NEWTON_STEP = 1e-6
NEWTON_MAX_ITERATIONS = 60


class NumericalError(Exception):
    pass


class IllConditionedError(NumericalError):
    def __init__(self, *args, condition=None):
        self.condition = condition
        super().__init__(*args)


class ConvergenceError(NumericalError):
    def __init__(self, *args, iterations=None):
        self.iterations = iterations
        super().__init__(*args)


class SingularPointError(NumericalError):
    def __init__(self, *args, point=None):
        self.point = point
        super().__init__(*args)


class BoundaryZeroError(NumericalError):
    def __init__(self, *args, point=None):
        self.point = point
        super().__init__(*args)


class WindingMismatchError(NumericalError):
    def __init__(self, *args, winding=None, found=None):
        self.winding = winding
        self.found = found
        super().__init__(*args)


def condition_number(A):
    A = np.asarray(A, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        condition = float(np.linalg.cond(A))
    if not math.isfinite(condition):
        return math.inf
    return condition


def solve_linear(A, B, cond_cap=DEFAULT_CONDITION_CAP, tol=1e-10):
    """
    Solve ``A X = B`` and return ``(X, condition)``.

    The 2-norm condition number is computed up front; anything above ``cond_cap``
    is refused rather than solved. The solution is re-checked by its residual.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"solve_linear needs a square matrix, got shape {A.shape}")

    condition = condition_number(A)
    if condition > cond_cap:
        raise IllConditionedError(
            f"Matrix condition estimate {condition:.3e} exceeds cap {cond_cap:.1e}",
            condition=condition,
        )

    try:
        X = scipy.linalg.solve(A, B)
    except scipy.linalg.LinAlgError as e:
        raise IllConditionedError(str(e), condition=math.inf) from e

    residual = np.linalg.norm(A @ X - B)
    scale = np.linalg.norm(A) * np.linalg.norm(X) + np.linalg.norm(B)
    if scale and residual > tol * scale:
        raise IllConditionedError(
            f"Linear solve residual {residual / scale:.3e} above {tol:.1e}",
            condition=condition,
        )

    logger.debug("solve_linear: n=%d condition=%.3e", A.shape[0], condition)
    return X, condition


class Factorization:
    """
    LU factorization of a square matrix, kept for repeated solves against the
    same left-hand side.
    """

    def __init__(self, A, cond_cap=DEFAULT_CONDITION_CAP):
        self.matrix = np.asarray(A, dtype=complex)
        self.condition = condition_number(self.matrix)
        if self.condition > cond_cap:
            raise IllConditionedError(
                f"Matrix condition estimate {self.condition:.3e} exceeds cap {cond_cap:.1e}",
                condition=self.condition,
            )
        self.lu = scipy.linalg.lu_factor(self.matrix)

    def solve(self, B):
        return scipy.linalg.lu_solve(self.lu, np.asarray(B, dtype=complex))

    def __repr__(self):
        return f"<Factorization n={self.matrix.shape[0]} condition={self.condition:.3e}>"


def eig_decompose(A, tol=1e-10):
    """
    Eigenvalues and unit-length right eigenvectors (as columns) of a square matrix.
    """
    A = np.asarray(A, dtype=complex)
    try:
        eigenvalues, eigenvectors = scipy.linalg.eig(A)
    except scipy.linalg.LinAlgError as e:
        # LAPACK reports the index of the first eigenvalue that failed to converge
        raise ConvergenceError(f"Eigen-decomposition did not converge: {e}") from e

    eigenvectors = eigenvectors / np.linalg.norm(eigenvectors, axis=0)

    scale = max(np.linalg.norm(A, 2), np.finfo(float).tiny)
    defects = np.linalg.norm(A @ eigenvectors - eigenvectors * eigenvalues, axis=0)
    if defects.size and defects.max() > tol * scale:
        raise ConvergenceError(
            f"Eigenpair defect {defects.max() / scale:.3e} above {tol:.1e}"
        )
    return eigenvalues, eigenvectors


def trapezoid_2d(
    f, nx, ny, x_period, y_period, offset=(0.0, 0.0), dynamic_range=1e12
):
    """
    Uniform-grid trapezoid rule for a doubly periodic integrand over
    [0, x_period) × [0, y_period).

    ``f`` is called once with two equally shaped arrays (x, y). ``offset`` shifts
    the grid by a fraction of a step in each direction.
    """
    x = (np.arange(nx) + offset[0]) * (x_period / nx)
    y = (np.arange(ny) + offset[1]) * (y_period / ny)
    X, Y = np.meshgrid(x, y, indexing="ij")

    values = np.asarray(f(X, Y), dtype=complex)
    check_integrand(values, X, Y, dynamic_range)
    return complex(values.sum() * (x_period * y_period / (nx * ny)))


def check_integrand(values, X, Y, dynamic_range=1e12):
    magnitudes = np.abs(values)

    finite = np.isfinite(magnitudes)
    if not finite.all():
        index = np.unravel_index(np.argmin(finite), values.shape)
        point = complex(X[index], Y[index])
        raise SingularPointError(
            f"Integrand is not finite at x+iy = {point:.6g}; shift the grid by half a step",
            point=point,
        )

    peak = magnitudes.max() if magnitudes.size else 0.0
    typical = float(np.median(magnitudes)) if magnitudes.size else 0.0
    if typical > 0 and peak > dynamic_range * typical:
        index = np.unravel_index(np.argmax(magnitudes), values.shape)
        point = complex(X[index], Y[index])
        raise SingularPointError(
            f"Integrand exceeds its dynamic-range cap near x+iy = {point:.6g}",
            point=point,
        )


@dataclass(frozen=True)
class Rectangle:
    corner: complex
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(
                f"Rectangle needs positive width and height, got {self.width}, {self.height}"
            )
        object.__setattr__(self, "corner", complex(self.corner))

    @property
    def vertices(self):
        c = self.corner
        return (
            c,
            c + self.width,
            c + self.width + 1j * self.height,
            c + 1j * self.height,
        )

    @property
    def center(self):
        return self.corner + (self.width + 1j * self.height) / 2

    def contains(self, u):
        d = complex(u) - self.corner
        return 0 <= d.real <= self.width and 0 <= d.imag <= self.height

    def boundary(self, points_per_edge):
        """
        Counter-clockwise contour points; each edge contributes its start vertex
        but not its end vertex.
        """
        s = np.arange(points_per_edge) / points_per_edge
        vertices = self.vertices
        edges = [
            start + s * (end - start)
            for start, end in zip(vertices, vertices[1:] + vertices[:1])
        ]
        return np.concatenate(edges)

    def shifted(self, offset):
        return Rectangle(self.corner + offset, self.width, self.height)

    def split(self, fraction=0.5):
        """
        Split across the longest side.
        """
        if self.width >= self.height:
            w = self.width * fraction
            return (
                Rectangle(self.corner, w, self.height),
                Rectangle(self.corner + w, self.width - w, self.height),
            )
        h = self.height * fraction
        return (
            Rectangle(self.corner, self.width, h),
            Rectangle(self.corner + 1j * h, self.width, self.height - h),
        )


def winding_number(f, rect, points_per_edge=POINTS_PER_EDGE):
    """
    Winding number of ``f`` around the boundary of ``rect`` by phase accumulation.

    The contour is refined until no phase step exceeds π/2. Returns the winding
    and the largest |f| seen on the contour.
    """
    while True:
        path = rect.boundary(points_per_edge)
        values = np.asarray(f(path), dtype=complex)
        magnitudes = np.abs(values)

        if not np.all(np.isfinite(magnitudes)):
            point = complex(path[np.argmin(np.isfinite(magnitudes))])
            raise SingularPointError(
                f"Function is not finite on the contour at {point:.6g}", point=point
            )

        peak = magnitudes.max()
        if magnitudes.min() <= BOUNDARY_ZERO_RTOL * peak:
            point = complex(path[np.argmin(magnitudes)])
            raise BoundaryZeroError(
                f"Zero on the contour near {point:.6g}", point=point
            )

        steps = np.angle(np.roll(values, -1) / values)
        if np.max(np.abs(steps)) <= np.pi / 2:
            winding = int(round(steps.sum() / (2 * np.pi)))
            return winding, float(peak)

        if points_per_edge >= MAX_POINTS_PER_EDGE:
            raise ConvergenceError(
                f"Phase steps stay above π/2 with {points_per_edge} points per edge"
            )
        points_per_edge *= 2


def newton_refine(f, u0, scale, residual_tol=1e-8, bounds=None):
    """
    Damped Newton iteration with a central-difference derivative.

    With ``bounds`` (a Rectangle) every accepted iterate stays inside it; a step
    that cannot be damped back in raises ConvergenceError, as do non-finite values.
    """

    def evaluate(points):
        try:
            values = np.asarray(f(np.asarray(points, dtype=complex)), dtype=complex)
        except (ValueError, FloatingPointError) as e:
            raise ConvergenceError(f"Function evaluation failed near {points[0]:.6g}: {e}") from e
        if not np.all(np.isfinite(values)):
            raise ConvergenceError(f"Function is not finite near {points[0]:.6g}")
        return values

    u = complex(u0)
    fu = evaluate([u])[0]
    for iteration in range(1, NEWTON_MAX_ITERATIONS + 1):
        if fu == 0:
            return u
        h = NEWTON_STEP * (1 + abs(u))
        forward, backward = evaluate([u + h, u - h])
        derivative = (forward - backward) / (2 * h)
        if derivative == 0:
            raise ConvergenceError(
                f"Vanishing derivative at {u:.6g}", iterations=iteration
            )

        step = fu / derivative
        damping = 1.0
        while True:
            candidate = u - damping * step
            inside = bounds is None or bounds.contains(candidate)
            if inside:
                fc = evaluate([candidate])[0]
                if abs(fc) < abs(fu):
                    break
            if damping < 1e-4:
                if not inside:
                    raise ConvergenceError(
                        f"Newton step from {u:.6g} leaves {bounds}", iterations=iteration
                    )
                break
            damping /= 2

        u, fu = candidate, fc
        if abs(damping * step) < 1e-14 * (1 + abs(u)):
            break
    else:
        iteration = NEWTON_MAX_ITERATIONS

    if abs(fu) > residual_tol * scale:
        raise ConvergenceError(
            f"Newton stalled at {u:.6g} with |f| = {abs(fu):.3e} (scale {scale:.3e})",
            iterations=iteration,
        )
    return u


def _split_counted(f, rect):
    """
    Split ``rect`` and count the zeros in both halves, nudging the cut when it
    runs through a zero.
    """
    for fraction in (0.5, 0.513, 0.471, 0.537):
        halves = rect.split(fraction)
        try:
            return [
                (half, winding_number(f, half, SUBDIVISION_POINTS_PER_EDGE)[0])
                for half in halves
            ]
        except BoundaryZeroError:
            continue
    raise BoundaryZeroError(f"Could not split {rect} away from zeros")


def _locate(f, rect, count, scale, residual_tol, depth=0):
    if count <= 0:
        return []

    if count == 1:
        try:
            return [newton_refine(f, rect.center, scale, residual_tol, bounds=rect)]
        except ConvergenceError as e:
            logger.debug("Newton failed in %s (%s); subdividing", rect, e)

    if depth >= MAX_SUBDIVISION_DEPTH:
        # A multiple zero: the rectangle has shrunk onto it
        try:
            root = newton_refine(f, rect.center, scale, residual_tol)
        except ConvergenceError:
            logger.warning("Newton failed on a %d-fold zero; using %s", count, rect.center)
            root = rect.center
        return [root] * count

    children = _split_counted(f, rect)
    if sum(child_count for _, child_count in children) != count:
        raise WindingMismatchError(
            f"Sub-rectangle windings {[c for _, c in children]} do not add up to {count}",
            winding=count,
            found=sum(c for _, c in children),
        )

    roots = []
    for child, child_count in children:
        roots.extend(_locate(f, child, child_count, scale, residual_tol, depth + 1))
    return roots


def find_zeros_in_rectangle(
    f,
    rect,
    expected_count=None,
    points_per_edge=POINTS_PER_EDGE,
    residual_tol=1e-8,
):
    """
    Zeros of an analytic function inside ``rect``.

    ``f`` must accept a numpy array of complex points. The number of zeros comes
    from the argument principle; each zero is isolated by bisecting the rectangle
    and polished by damped Newton. If a zero sits on the boundary the rectangle is
    shifted once by a small offset.
    """
    try:
        winding, scale = winding_number(f, rect, points_per_edge)
    except BoundaryZeroError as e:
        offset = BOUNDARY_SHIFT * min(rect.width, rect.height) * (1 + 1j)
        logger.warning(
            "Zero on the boundary near %s; shifting rectangle by %s", e.point, offset
        )
        rect = rect.shifted(offset)
        winding, scale = winding_number(f, rect, points_per_edge)

    if expected_count is not None and winding != expected_count:
        raise WindingMismatchError(
            f"Argument principle counts {winding} zeros, expected {expected_count}",
            winding=winding,
            found=None,
        )

    roots = _locate(f, rect, winding, scale, residual_tol)
    if len(roots) != winding:
        raise WindingMismatchError(
            f"Refined {len(roots)} zeros but the winding number is {winding}",
            winding=winding,
            found=len(roots),
        )

    return sorted(roots, key=lambda u: (round(u.real, 10), round(u.imag, 10)))


class DegenerateParameterError(NumericalError):
    pass
