"""
The Sklyanin form on the theta space and the closed forms it is checked
against: elliptic binomial coefficients, elliptic 6j-symbols and the
biorthogonality of the bases e^N_k(z; a, b).

    <f, g> = ∫_0^1 dx ∫_0^{Im τ} dy  conj(f(z)) g(z) μ(z, z̄),   z = x + iy
"""

import logging
import math

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from baxterq.lattice import omega_function
from baxterq.numerics import (
    DegenerateParameterError,
    NumericalError,
    SingularPointError,
    trapezoid_2d,
)
from baxterq.representation import ThetaBasis, expand_in_basis
from baxterq.theta import bracket_k, theta00, theta11, za_bracket_k
from baxterq.utils import KRON, relative_residual


logger = logging.getLogger("baxterq.sklyanin")


DEFAULT_GRID = (64, 64)
MAX_GRID = 512
QUADRATURE_RTOL = 1e-8
MIN_GRID = 32

KERNEL_GUARD = 1e-8
DENOMINATOR_GUARD = 1e-12
PRODUCT_CUTOFF = 1e-16


class NotPositiveDefiniteError(NumericalError):
    def __init__(self, *args, min_eigenvalue=None):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(*args)


def mu_kernel(z, w, params, two_l=None):
    """
    μ(z, w) = [2z][2w] / ∏_{j=0}^{2l+1} θ00(z+w+(2j-2l-1)η) θ00(z-w+(2j-2l-1)η)
    """
    if two_l is None:
        two_l = params.two_l
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    eta = params.eta

    denominator = np.ones(np.broadcast(z, w).shape, dtype=complex)
    for j in range(two_l + 2):
        shift = (2 * j - two_l - 1) * eta
        for factor in (theta00(z + w + shift, params), theta00(z - w + shift, params)):
            small = np.abs(factor) < KERNEL_GUARD
            if np.any(small):
                index = np.unravel_index(int(np.argmax(small)), small.shape) if small.ndim else ()
                zz = complex(np.broadcast_to(z, small.shape)[index])
                ww = complex(np.broadcast_to(w, small.shape)[index])
                raise SingularPointError(
                    f"Kernel denominator vanishes at z={zz:.6g}, w={ww:.6g} (j={j})",
                    point=zz,
                )
            denominator = denominator * factor

    result = theta11(2 * z, params) * theta11(2 * w, params) / denominator
    if np.ndim(result) == 0:
        return complex(result)
    return result


def _integrate(integrand, grid, params):
    """
    Trapezoid rule on the fundamental cell; a grid hitting a singular point is
    shifted by half a step once.
    """
    nx, ny = grid
    try:
        return trapezoid_2d(integrand, nx, ny, 1.0, params.t)
    except SingularPointError as e:
        logger.warning(
            "Singular quadrature point near %s on a %dx%d grid; shifting by half a step",
            e.point,
            nx,
            ny,
        )
        return trapezoid_2d(integrand, nx, ny, 1.0, params.t, offset=(0.5, 0.5))


def weighted_integral(evaluate, grid, params, two_l=None):
    """
    ∫ evaluate(z) μ(z, z̄) over the cell; ``evaluate`` maps an array of points to
    an array with the same leading shape and optional trailing axes.
    """

    def integrand(X, Y):
        Z = X + 1j * Y
        return evaluate(Z) * mu_kernel(Z, np.conj(Z), params, two_l)

    return _integrate(integrand, grid, params)


def sklyanin_pairing(f, g, params, grid=DEFAULT_GRID, two_l=None):
    """
    <f, g> for vectorised callables, conjugate-linear in ``f``.
    """
    if min(grid) < MIN_GRID:
        raise ValueError(f"Quadrature grid must be at least {MIN_GRID}x{MIN_GRID}, got {grid}")
    return weighted_integral(lambda Z: np.conj(f(Z)) * g(Z), grid, params, two_l)


def sklyanin_inner(f_coeffs, g_coeffs, basis, grid=DEFAULT_GRID):
    return sklyanin_pairing(
        lambda Z: basis.evaluate(f_coeffs, Z),
        lambda Z: basis.evaluate(g_coeffs, Z),
        basis.params,
        grid,
        two_l=basis.two_l,
    )


def converged(compute, grid=DEFAULT_GRID, max_grid=MAX_GRID, rtol=QUADRATURE_RTOL):
    """
    Run ``compute(grid)``, doubling the grid until two successive values agree to
    ``rtol``. Returns (value, grid, estimate); the estimate is the last relative
    change, and a value still moving at ``max_grid`` is returned with a warning.
    """
    grid = tuple(grid)
    value = compute(grid)
    estimate = math.inf
    while max(grid) < max_grid:
        finer = tuple(min(2 * n, max_grid) for n in grid)
        refined = compute(finer)
        estimate = relative_residual(refined, value)
        grid, value = finer, refined
        logger.debug("Quadrature %s: relative change %.3e", grid, estimate)
        if estimate < rtol:
            return value, grid, estimate

    logger.warning(
        "Quadrature did not settle below %.1e at %s (last change %.3e)",
        rtol,
        grid,
        estimate,
    )
    return value, grid, estimate


@dataclass(frozen=True)
class GramMatrix:
    G: np.ndarray
    grid: tuple
    convergence_estimate: float

    @property
    def min_eigenvalue(self):
        return float(np.min(np.linalg.eigvalsh((self.G + self.G.conj().T) / 2)))

    @property
    def hermitian_residual(self):
        return relative_residual(self.G, self.G.conj().T)


def gram_values(basis, grid):
    def evaluate(Z):
        V = basis.values(Z)
        return np.conj(V)[..., :, None] * V[..., None, :]

    nx, ny = grid
    try:
        return _gram_on_grid(evaluate, basis, nx, ny, (0.0, 0.0))
    except SingularPointError as e:
        logger.warning(
            "Singular quadrature point near %s on a %dx%d grid; shifting by half a step",
            e.point,
            nx,
            ny,
        )
        return _gram_on_grid(evaluate, basis, nx, ny, (0.5, 0.5))


def _gram_on_grid(evaluate, basis, nx, ny, offset):
    params = basis.params
    x = (np.arange(nx) + offset[0]) / nx
    y = (np.arange(ny) + offset[1]) * (params.t / ny)
    X, Y = np.meshgrid(x, y, indexing="ij")
    Z = X + 1j * Y
    weights = mu_kernel(Z, np.conj(Z), params, basis.two_l)
    if not np.all(np.isfinite(weights)):
        raise SingularPointError("Kernel is not finite on the grid", point=None)
    products = evaluate(Z) * weights[..., None, None]
    return products.sum(axis=(0, 1)) * (params.t / (nx * ny))


def gram_matrix(basis, grid=DEFAULT_GRID, max_grid=MAX_GRID, rtol=QUADRATURE_RTOL):
    """
    Pairwise Sklyanin form of the basis vectors, checked Hermitian and positive
    definite.
    """
    G, used, estimate = converged(
        lambda g: gram_values(basis, g), grid, max_grid, rtol
    )
    gram = GramMatrix(G=(G + G.conj().T) / 2, grid=used, convergence_estimate=estimate)

    hermitian = relative_residual(G, G.conj().T)
    if hermitian > 1e-8:
        logger.warning("Gram matrix Hermitian defect %.3e", hermitian)

    smallest = gram.min_eigenvalue
    if smallest <= 0:
        raise NotPositiveDefiniteError(
            f"Gram matrix is not positive definite (min eigenvalue {smallest:.3e})",
            min_eigenvalue=smallest,
        )
    logger.debug(
        "Gram matrix on %s grid: min eigenvalue %.3e, change %.3e",
        used,
        smallest,
        estimate,
    )
    return gram


def self_adjointness_residual(gram, rep):
    G = gram.G
    return max(
        float(np.linalg.norm(G @ S - S.conj().T @ G) / np.linalg.norm(G @ S))
        for S in rep.S
    )


def u_unitarity_residual(gram, U):
    """
    U_a is unitary for the Sklyanin form: U_a^H G U_a = G.
    """
    G = gram.G
    return max(relative_residual(U[a].conj().T @ G @ U[a], G) for a in (1, 2, 3))


class OrthonormalFrame:
    """
    Coordinates c' = R c in which the Sklyanin form becomes the standard dot
    product, with G = R^H R.
    """

    def __init__(self, G, R=None):
        self.G = np.asarray(G, dtype=complex)
        if R is None:
            try:
                R = scipy.linalg.cholesky(self.G, lower=False)
            except scipy.linalg.LinAlgError as e:
                raise NotPositiveDefiniteError(
                    f"Cholesky factorization failed: {e}"
                ) from e
        self.R = np.asarray(R, dtype=complex)
        self.R_inverse = scipy.linalg.solve_triangular(
            self.R, np.eye(self.R.shape[0]), lower=False
        )

    @property
    def dim(self):
        return self.R.shape[0]

    def vector(self, c):
        return self.R @ c

    def to_frame(self, A):
        return self.R @ A @ self.R_inverse

    def adjoint(self, A):
        """
        Adjoint of ``A`` (given in basis coordinates) for the Sklyanin form,
        returned in basis coordinates: G⁻¹ A^H G.
        """
        return self.R_inverse @ self.to_frame(A).conj().T @ self.R

    def inner(self, f, g):
        return complex(np.vdot(self.R @ f, self.R @ g))

    def power(self, N):
        """
        Frame of the N-fold tensor product, where the Gram matrix is G^{⊗N}.
        """
        return OrthonormalFrame(KRON([self.G] * N), R=KRON([self.R] * N))

    def factorization_residual(self):
        return relative_residual(self.R.conj().T @ self.R, self.G)


def orthonormal_frame(gram):
    G = gram.G if isinstance(gram, GramMatrix) else gram
    return OrthonormalFrame(G)


def frame_hermiticity_residual(frame, rep):
    return max(
        relative_residual(frame.to_frame(S), frame.to_frame(S).conj().T) for S in rep.S
    )


def _checked(value, label):
    if abs(value) < DENOMINATOR_GUARD:
        raise DegenerateParameterError(f"{label} vanishes; parameters are not generic")
    return value


def elliptic_binomial(n, k, a, b, c, params):
    """
    C_n^k(a, b, c) in [z;a]_k = Σ_n C_n^k(a, b, c) [z;b]_n [z;c]_{k-n}.
    """
    if not 0 <= n <= k:
        raise ValueError(f"elliptic_binomial needs 0 <= n <= k, got n={n}, k={k}")
    eta = params.eta
    two_eta = 2 * eta

    def br(x, m):
        return bracket_k(x, m, params)

    numerator = (
        br(two_eta, k)
        * br(a - c, n)
        * br(a + c + 2 * (k - n) * eta, n)
        * br(a - b, k - n)
        * br(a + b + 2 * n * eta, k - n)
    )
    denominator = (
        br(two_eta, n)
        * br(two_eta, k - n)
        * br(b - c + 2 * (n - k) * eta, n)
        * br(c - b - 2 * n * eta, k - n)
        * br(b + c, k)
    )
    return numerator / _checked(denominator, "Elliptic binomial denominator")


def binomial_expansion_residual(k, a, b, c, params, zs):
    zs = np.asarray(zs, dtype=complex)
    lhs = za_bracket_k(zs, a, k, params)
    rhs = sum(
        elliptic_binomial(n, k, a, b, c, params)
        * za_bracket_k(zs, b, n, params)
        * za_bracket_k(zs, c, k - n, params)
        for n in range(k + 1)
    )
    return relative_residual(lhs, rhs)


def six_j_symbol(target, k, a, b, c, d, Nn, params):
    """
    R^target_k(a, b, c, d; N), the coefficient of e^N_target(z; c, d) in
    e^N_k(z; a, b).
    """
    eta = params.eta
    return sum(
        elliptic_binomial(j, k, a, c, b + 2 * (Nn - k) * eta, params)
        * elliptic_binomial(target - j, Nn - j, b, c + 2 * j * eta, d, params)
        for j in range(min(k, target) + 1)
    )


def extremal_6j(a, b, c, d, Nn, params):
    """
    R^N_N(a, b, c, d; N) = [d;a]_N / [d;c]_N; independent of ``b``.
    """
    denominator = _checked(za_bracket_k(d, c, Nn, params), "[d;c]_N")
    return za_bracket_k(d, a, Nn, params) / denominator


def six_j_by_collocation(k, a, b, c, d, Nn, params, seed=0):
    """
    Coefficients of e^N_k(z; a, b) in the basis e^N_·(z; c, d), by collocation.
    """
    basis = ThetaBasis.build(
        params, seed=seed, a_param=c, b_param=d, two_l=Nn, resample_parameters=False
    )
    return expand_in_basis(
        basis,
        lambda z: za_bracket_k(z, a, k, params) * za_bracket_k(z, b, Nn - k, params),
    )


def c_constant(Nn, params):
    """
    C_N = -2η e^{3πiτ/4} e^{-πi(N+2)τ/2} / ([2(N+1)η] ∏_{j>=1} (1 - e^{2jπiτ})³)

    The factor e^{-πi(N+2)τ/2} matches the quadrature normalisation of the form.
    """
    tau = params.tau
    product = 1.0 + 0j
    j = 1
    while True:
        q = np.exp(2j * np.pi * j * tau)
        if abs(q) < PRODUCT_CUTOFF:
            break
        product *= (1 - q) ** 3
        j += 1
    denominator = _checked(
        theta11(2 * (Nn + 1) * params.eta, params) * product, "[2(N+1)η]"
    )
    phase = np.exp(3j * np.pi * tau / 4 - 1j * np.pi * (Nn + 2) * tau / 2)
    return -2 * params.eta * phase / denominator


def gamma_coefficient(k, c, d, Nn, params):
    eta = params.eta
    tau = params.tau

    def br(x, m=None):
        if m is None:
            return theta11(x, params)
        return bracket_k(x, m, params)

    cd = c - d
    numerator = (
        br(cd - 2 * Nn * eta)
        * br(2 * eta, k)
        * br(cd + 2 * eta, k)
        * br(cd + 2 * (1 - Nn) * eta, Nn)
        * br(c + d, Nn)
    )
    denominator = (
        br(cd + 2 * (2 * k - Nn) * eta) * br(-2 * Nn * eta, k) * br(cd - 2 * Nn * eta, k)
    )
    return (
        np.exp(1j * np.pi * Nn * (tau - 1) / 2)
        * numerator
        / _checked(denominator, "Gamma denominator")
    )


def gamma_top_closed_form(c, d, Nn, params):
    """
    Γ^N_N(c, d) = e^{πiN(τ+1)/2} [c-d]_N [c+d]_N
    """
    return (
        np.exp(1j * np.pi * Nn * (params.tau + 1) / 2)
        * bracket_k(c - d, Nn, params)
        * bracket_k(c + d, Nn, params)
    )


def dual_parameters(c, d, Nn, params):
    """
    Parameters (α, β) of the basis dual to e^N_·(z; c, d).
    """
    shift = (1 - Nn) * params.eta
    half = (params.tau + 1) / 2
    return (
        -np.conj(d) + shift + half,
        -np.conj(c) + shift - half,
    )


def natural_basis_function(k, a, b, Nn, params):
    return lambda z: za_bracket_k(z, a, k, params) * za_bracket_k(z, b, Nn - k, params)


def dual_pairing_closed_form(k, m, c, d, Nn, params):
    """
    <e^N_m(z; α, β), e^N_k(z; c, d)> with (α, β) the dual parameters:

        C_N e^{2πi(-dm + c(N-m) - N(1+τ)/4)} Γ^N_k(c, d) δ_{k,m}
    """
    if k != m:
        return 0j
    phase = np.exp(2j * np.pi * (-d * m + c * (Nn - m) - Nn * (1 + params.tau) / 4))
    return c_constant(Nn, params) * phase * gamma_coefficient(k, c, d, Nn, params)


def dual_pairing_numeric(k, m, c, d, Nn, params, grid=DEFAULT_GRID):
    alpha, beta = dual_parameters(c, d, Nn, params)
    return sklyanin_pairing(
        natural_basis_function(m, alpha, beta, Nn, params),
        natural_basis_function(k, c, d, Nn, params),
        params,
        grid,
        two_l=Nn,
    )


def omega_pair_parameters(u, u_prime, v, v_prime, lam, lam_prime, sigma, sigma_prime, params):
    """
    (α, γ) identifying ω_{σλ}(-ū; σv) and ω_{σ'λ'}(u'; σ'v') with e^{2l}_{2l}.
    """
    l = float(params.l)
    eta = params.eta
    offset = -(2 * l - 1) * eta
    alpha = (lam - sigma * np.conj(u) - v) / 2 + sigma * l * eta + offset
    gamma = (lam_prime + sigma_prime * u_prime - v_prime) / 2 + sigma_prime * l * eta + offset
    return alpha, gamma


def omega_pair_closed_form(u, u_prime, v, v_prime, lam, lam_prime, sigma, sigma_prime, params):
    """
    <ω_{σλ}(-ū; σv), ω_{σ'λ'}(u'; σ'v')> in closed form:

        C_{2l} e^{πilτ} ∏_j θ00(γ - ᾱ + (2j-2l+1)η) θ00(γ + ᾱ + (2j+2l-1)η)
    """
    Nn = params.two_l
    eta = params.eta
    alpha, gamma = omega_pair_parameters(
        u, u_prime, v, v_prime, lam, lam_prime, sigma, sigma_prime, params
    )
    alpha_bar = np.conj(alpha)
    product = 1.0 + 0j
    for j in range(Nn):
        product *= theta00(gamma - alpha_bar + (2 * j - Nn + 1) * eta, params)
        product *= theta00(gamma + alpha_bar + (2 * j + Nn - 1) * eta, params)
    return c_constant(Nn, params) * np.exp(1j * np.pi * Nn * params.tau / 2) * product


def omega_pair_numeric(
    u, u_prime, v, v_prime, lam, lam_prime, sigma, sigma_prime, params, grid=DEFAULT_GRID
):
    return sklyanin_pairing(
        omega_function(sigma * lam, -np.conj(u), sigma * v, params),
        omega_function(sigma_prime * lam_prime, u_prime, sigma_prime * v_prime, params),
        params,
        grid,
    )
