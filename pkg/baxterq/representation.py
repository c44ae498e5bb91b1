"""
The spin-l representation of the Sklyanin algebra.

Operators act on the (2l+1)-dimensional space of even theta functions

    Θ = {f : f(z+1) = f(-z) = f(z), f(z+τ) = e^{-4lπi(2z+τ)} f(z)}

and are stored as matrices in the basis e_k(z; a, b) = [z;a]_k [z;b]_{2l-k}.
Coordinates are obtained by collocation at 2l+1 seeded points.
"""

import logging

from dataclasses import dataclass

import numpy as np

from baxterq.numerics import (
    DegenerateParameterError,
    Factorization,
    IllConditionedError,
    NumericalError,
    SingularPointError,
)
from baxterq.theta import (
    TH00,
    TH10,
    lattice_distance,
    theta00,
    theta01,
    theta10,
    theta11,
    theta_ab,
    za_bracket_k,
)
from baxterq.utils import relative_residual


logger = logging.getLogger("baxterq.representation")


DEFAULT_A_PARAM = 0.2313
DEFAULT_B_PARAM = -0.4177

MAX_RESAMPLES = 20
BASIS_CONDITION_CAP = 1e8
FRESH_POINTS = 3
MEMBERSHIP_RTOL = 1e-8

# Collocation points avoid zeros of the difference-operator denominator [2z]
COLLOCATION_GUARD = 1e-3
DENOMINATOR_GUARD = 1e-8
GENERICITY_GUARD = 1e-6

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# Cyclic triples (α, β, γ) of the defining relations
CYCLIC = ((1, 2, 3), (2, 3, 1), (3, 1, 2))

# Signs of S^0..S^3 under the involutive automorphisms X_1, X_2, X_3
AUTOMORPHISM_SIGNS = {
    1: (1, 1, -1, -1),
    2: (1, -1, 1, -1),
    3: (1, -1, -1, 1),
}


class OffSpaceError(NumericalError):
    def __init__(self, *args, residual=None):
        self.residual = residual
        super().__init__(*args)


def is_generic(a, b, two_l, params):
    """
    The basis e_k(z; a, b) needs a ± b + 2jη off the period lattice.
    """
    eta = params.eta
    for j in range(1 - two_l, two_l):
        if lattice_distance(a - b + 2 * j * eta, params) < GENERICITY_GUARD:
            return False
    for j in range(two_l):
        if lattice_distance(a + b + 2 * j * eta, params) < GENERICITY_GUARD:
            return False
    return True


def draw_collocation_points(params, count, rng):
    """
    Seeded points in (0.05, 0.95) × (0.05t, 0.45t) with |[2z]| >= 1e-3.

    No two such points are related by z -> -z modulo the lattice.
    """
    points = []
    while len(points) < count:
        z = complex(
            rng.uniform(0.05, 0.95), params.t * rng.uniform(0.05, 0.45)
        )
        if abs(theta11(2 * z, params)) < COLLOCATION_GUARD:
            continue
        if any(abs(z - other) < 1e-3 for other in points):
            continue
        points.append(z)
    return np.array(points)


class ThetaBasis:
    """
    Basis e_k(z; a, b), k = 0..2l, of the even theta space, with the collocation
    data that turns functions into coordinate vectors.
    """

    def __init__(self, params, two_l, a_param, b_param, points, check_points, seed):
        self.params = params
        self.two_l = two_l
        self.a_param = complex(a_param)
        self.b_param = complex(b_param)
        self.points = np.asarray(points, dtype=complex)
        self.check_points = np.asarray(check_points, dtype=complex)
        self.seed = seed

        self.matrix = self.values(self.points)
        self.check_matrix = self.values(self.check_points)
        self.factorization = Factorization(self.matrix, cond_cap=BASIS_CONDITION_CAP)

    @classmethod
    def build(
        cls,
        params,
        seed=0,
        a_param=DEFAULT_A_PARAM,
        b_param=DEFAULT_B_PARAM,
        two_l=None,
        resample_parameters=True,
    ):
        if two_l is None:
            two_l = params.two_l
        rng = np.random.default_rng(seed)

        best_condition = None
        for attempt in range(MAX_RESAMPLES + 1):
            if not is_generic(a_param, b_param, two_l, params):
                if not resample_parameters:
                    raise DegenerateParameterError(
                        f"Basis parameters a={a_param}, b={b_param} are not generic"
                    )
                logger.warning(
                    "Basis parameters a=%s, b=%s are not generic; resampling",
                    a_param,
                    b_param,
                )
                a_param = complex(rng.uniform(-0.5, 0.5), params.t * rng.uniform(0, 0.5))
                b_param = complex(rng.uniform(-0.5, 0.5), params.t * rng.uniform(0, 0.5))
                continue

            points = draw_collocation_points(params, two_l + 1 + FRESH_POINTS, rng)
            try:
                basis = cls(
                    params,
                    two_l,
                    a_param,
                    b_param,
                    points[: two_l + 1],
                    points[two_l + 1 :],
                    seed,
                )
            except IllConditionedError as e:
                if best_condition is None or e.condition < best_condition:
                    best_condition = e.condition
                logger.warning(
                    "Collocation attempt %d ill-conditioned (%.3e); resampling points",
                    attempt,
                    e.condition,
                )
                continue

            logger.debug(
                "Theta basis 2l=%d seed=%s condition=%.3e",
                two_l,
                seed,
                basis.condition,
            )
            return basis

        raise IllConditionedError(
            f"No well-conditioned collocation set after {MAX_RESAMPLES} resamples",
            condition=best_condition,
        )

    @property
    def dim(self):
        return self.two_l + 1

    @property
    def condition(self):
        return self.factorization.condition

    def function(self, k):
        return lambda z: basis_eval(self, k, z)

    def values(self, z):
        """
        Basis functions at ``z``; the result has a trailing axis of length 2l+1.
        """
        z = np.asarray(z, dtype=complex)
        return np.stack([basis_eval(self, k, z) for k in range(self.dim)], axis=-1)

    def evaluate(self, coefficients, z):
        return self.values(z) @ np.asarray(coefficients, dtype=complex)

    def coefficients(self, point_values):
        """
        Coordinates of functions given by their values at the collocation points.

        ``point_values`` has the collocation points on its last axis; a batch of
        functions can be passed as a 2-D array.
        """
        point_values = np.asarray(point_values, dtype=complex)
        if point_values.ndim == 1:
            return self.factorization.solve(point_values)
        return self.factorization.solve(point_values.T).T

    def membership_residual(self, coefficients, check_values):
        predicted = np.asarray(coefficients) @ self.check_matrix.T
        scale = max(
            float(np.max(np.abs(check_values))),
            float(np.max(np.abs(predicted))),
            np.finfo(float).tiny,
        )
        return float(np.max(np.abs(predicted - check_values)) / scale)

    def space_law_residual(self, zs):
        """
        f(z+1) = f(-z) = f(z) for each basis function at the given points.
        """
        zs = np.asarray(zs, dtype=complex)
        base = self.values(zs)
        return max(
            relative_residual(self.values(zs + 1), base),
            relative_residual(self.values(-zs), base),
        )

    def __repr__(self):
        return f"<ThetaBasis 2l={self.two_l} a={self.a_param} b={self.b_param} seed={self.seed}>"


def basis_eval(basis, k, z):
    if not 0 <= k <= basis.two_l:
        raise IndexError(f"Basis index {k} outside 0..{basis.two_l}")
    return za_bracket_k(z, basis.a_param, k, basis.params) * za_bracket_k(
        z, basis.b_param, basis.two_l - k, basis.params
    )


def expand_in_basis(basis, f, rtol=MEMBERSHIP_RTOL):
    """
    Coordinate vector of ``f`` (a vectorised callable) in ``basis``.

    The expansion is re-checked at fresh points; a function outside the space
    raises OffSpaceError.
    """
    coefficients = basis.coefficients(np.asarray(f(basis.points), dtype=complex))
    check_values = np.asarray(f(basis.check_points), dtype=complex)

    residual = basis.membership_residual(coefficients, check_values)
    if residual > rtol:
        raise OffSpaceError(
            f"Function is not in the theta space (fresh-point residual {residual:.3e})",
            residual=residual,
        )
    return coefficients


def expand_many(basis, f, rtol=MEMBERSHIP_RTOL):
    """
    Coordinates of a family of functions at once. ``f`` maps an array of points
    of shape (p,) to values of shape (m, p); the result has shape (m, 2l+1).
    """
    values = np.asarray(f(basis.points), dtype=complex)
    coefficients = basis.coefficients(values)
    check_values = np.asarray(f(basis.check_points), dtype=complex)

    predicted = coefficients @ basis.check_matrix.T
    scale = np.maximum(
        np.maximum(np.abs(check_values).max(axis=1), np.abs(predicted).max(axis=1)),
        np.finfo(float).tiny,
    )
    residual = float(np.max(np.abs(predicted - check_values).max(axis=1) / scale))
    if residual > rtol:
        raise OffSpaceError(
            f"Function family leaves the theta space (fresh-point residual {residual:.3e})",
            residual=residual,
        )
    return coefficients


def s_coefficient(a, w, params):
    eta = params.eta
    if a == 0:
        return theta11(eta, params) * theta11(2 * w, params)
    if a == 1:
        return theta10(eta, params) * theta10(2 * w, params)
    if a == 2:
        return 1j * theta00(eta, params) * theta00(2 * w, params)
    if a == 3:
        return theta01(eta, params) * theta01(2 * w, params)
    raise IndexError(f"Generator index {a} outside 0..3")


def apply_difference_op(a, f, params):
    """
    The generator S^a as a difference operator:

        (S^a f)(z) = [s_a(z - lη) f(z + η) - s_a(-z - lη) f(z - η)] / [2z]
    """
    eta = params.eta
    shift = float(params.l) * eta

    def image(z):
        z = np.asarray(z, dtype=complex)
        denominator = theta11(2 * z, params)
        small = np.abs(denominator) < DENOMINATOR_GUARD
        if np.any(small):
            point = complex(z.flat[int(np.argmax(small))])
            raise SingularPointError(
                f"[2z] vanishes at z = {point:.6g}", point=point
            )
        return (
            s_coefficient(a, z - shift, params) * f(z + eta)
            - s_coefficient(a, -z - shift, params) * f(z - eta)
        ) / denominator

    return image


@dataclass(frozen=True)
class RepMatrices:
    S: tuple
    basis: ThetaBasis

    def __getitem__(self, a):
        return self.S[a]

    def __iter__(self):
        return iter(self.S)


def operator_matrix(basis, operator):
    """
    Matrix of a linear map on the theta space; ``operator`` maps a callable to a
    callable.
    """
    return np.column_stack(
        [expand_in_basis(basis, operator(basis.function(k))) for k in range(basis.dim)]
    )


def rep_matrices(params, basis):
    S = tuple(
        operator_matrix(basis, lambda f, a=a: apply_difference_op(a, f, params))
        for a in range(4)
    )
    rep = RepMatrices(S=S, basis=basis)

    residual = commutation_residual(rep, params)
    if residual > 1e-9:
        logger.warning(
            "Commutation residual %.3e for %r is above 1e-9", residual, params
        )
    return rep


def structure_constants(params, u):
    """
    J_{αβ} = (W_α² - W_β²) / (W_γ² - W_0²) for the cyclic triples, keyed by (α, β).
    """
    from baxterq.lattice import w_weights

    W = w_weights(u, params)
    constants = {}
    for alpha, beta, gamma in CYCLIC:
        denominator = W[gamma] ** 2 - W[0] ** 2
        if abs(denominator) < 1e-12:
            raise DegenerateParameterError(
                f"Structure constant J_{alpha}{beta} is singular for eta={params.eta}"
            )
        constants[(alpha, beta)] = (W[alpha] ** 2 - W[beta] ** 2) / denominator
    return constants


def _commutator(A, B):
    return A @ B - B @ A


def _anticommutator(A, B):
    return A @ B + B @ A


def commutation_residual(rep, params, u_values=(0.3, 0.7)):
    """
    Largest relative violation of

        [S^α, S^0] = -i J_{αβ} {S^β, S^γ}
        [S^α, S^β] = i {S^0, S^γ}

    over the cyclic triples, together with the drift of J between two values of u.
    """
    first = structure_constants(params, u_values[0])
    second = structure_constants(params, u_values[1])
    worst = max(
        abs(first[key] - second[key]) / max(1.0, abs(first[key]), abs(second[key]))
        for key in first
    )

    S = rep.S
    norms = [np.linalg.norm(m) for m in S]
    for alpha, beta, gamma in CYCLIC:
        J = first[(alpha, beta)]
        scale = max(norms[alpha] * norms[0], abs(J) * norms[beta] * norms[gamma])
        worst = max(
            worst,
            relative_residual(
                _commutator(S[alpha], S[0]),
                -1j * J * _anticommutator(S[beta], S[gamma]),
                scale,
            ),
        )

        scale = max(norms[alpha] * norms[beta], norms[0] * norms[gamma])
        worst = max(
            worst,
            relative_residual(
                _commutator(S[alpha], S[beta]),
                1j * _anticommutator(S[0], S[gamma]),
                scale,
            ),
        )
    return worst


@dataclass(frozen=True)
class UMatrices:
    U1: np.ndarray
    U2: np.ndarray
    U3: np.ndarray

    def __getitem__(self, a):
        return {1: self.U1, 2: self.U2, 3: self.U3}[a]


def u_matrices(params, basis):
    l = float(params.l)
    tau = params.tau
    phase = np.exp(1j * np.pi * l)

    def half_shift(f):
        return lambda z: phase * f(np.asarray(z) + 0.5)

    def tau_half_shift(f):
        return lambda z: (
            phase
            * np.exp(1j * np.pi * l * (4 * np.asarray(z) + tau))
            * f(np.asarray(z) + tau / 2)
        )

    U1 = operator_matrix(basis, half_shift)
    U3 = operator_matrix(basis, tau_half_shift)
    return UMatrices(U1=U1, U2=U3 @ U1, U3=U3)


def u_relation_residual(U, params):
    """
    U_a² = (-1)^{2l}, U_2 = U_3 U_1 and U_a U_b = (-1)^{2l} U_b U_a.
    """
    sign = (-1) ** params.two_l
    identity = np.eye(U.U1.shape[0])
    worst = max(relative_residual(U[a] @ U[a], sign * identity) for a in (1, 2, 3))
    worst = max(worst, relative_residual(U.U3 @ U.U1, U.U2))
    for a, b in ((1, 2), (2, 3), (3, 1)):
        worst = max(worst, relative_residual(U[a] @ U[b], sign * U[b] @ U[a]))
    return worst


def intertwining_residual(rep, U):
    """
    U_a^{-1} S^b U_a = X_a(S^b), where X_a flips the sign of the two generators
    other than S^0 and S^a.
    """
    worst = 0.0
    for a, signs in AUTOMORPHISM_SIGNS.items():
        inverse = np.linalg.inv(U[a])
        for b in range(4):
            worst = max(
                worst,
                relative_residual(inverse @ rep[b] @ U[a], signs[b] * rep[b]),
            )
    return worst


def pauli_identification(basis, params):
    """
    Change of basis for l = 1/2 onto θ00(2z|2τ) ∓ θ10(2z|2τ), returned as the
    matrix whose columns are the coordinates of the two new basis vectors.
    """
    if params.two_l != 1:
        raise ValueError("The Pauli identification only exists for l = 1/2")
    doubled = 2 * params.tau

    def even(z):
        return theta_ab(TH00, 2 * np.asarray(z), doubled, params.series_truncation)

    def odd(z):
        return theta_ab(TH10, 2 * np.asarray(z), doubled, params.series_truncation)

    return np.column_stack(
        [
            expand_in_basis(basis, lambda z: even(z) - odd(z)),
            expand_in_basis(basis, lambda z: even(z) + odd(z)),
        ]
    )


def pauli_residual(rep, params):
    """
    For l = 1/2, S^a = [2η] σ^a after the Pauli identification.
    """
    P = pauli_identification(rep.basis, params)
    P_inverse = np.linalg.inv(P)
    scale = theta11(2 * params.eta, params)
    return max(
        float(np.max(np.abs(P_inverse @ rep[a] @ P - scale * PAULI[a])))
        / abs(scale)
        for a in range(4)
    )
