"""
Baxter's Q-operator for the higher-spin chain.

Columns of Q_R(u) are tensor products of local pseudo vacua
φ(u; v, λ, σ) = g_N ⊗ ⋯ ⊗ g_1 with g_j = ω_{σ_j λ_j}(u; σ_j v). Then

    Q_L(u) = Q_R(-ū)*          (adjoint for the Sklyanin form on the chain)
    Q(u)   = Q_R(u) Q_R(u0)⁻¹  = Q_L(u0)⁻¹ Q_L(u)
"""

import itertools
import logging

from dataclasses import dataclass, field

import numpy as np

from baxterq.lattice import (
    ChainSpace,
    commutator_residual,
    gauge_entries,
    gauge_matrix,
    omega_vector,
    omega_vectors,
    transfer_matrix,
)
from baxterq.numerics import (
    DegenerateParameterError,
    Factorization,
    IllConditionedError,
    solve_linear,
)
from baxterq.sklyanin import omega_pair_closed_form
from baxterq.theta import ParameterError, theta11
from baxterq.utils import relative_residual


logger = logging.getLogger("baxterq.qoperator")


QR_CONDITION_CAP = 1e8
MAX_SPEC_RESAMPLES = 20
U0_CANDIDATES = 8
GAUGE_MARGIN = 1e-3


@dataclass(frozen=True)
class SigmaSequence:
    """
    Signs (σ_1, ..., σ_N) in site order.
    """

    signs: tuple

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (1, -1) for s in signs):
            raise ParameterError(f"Signs must be +1 or -1, got {signs}", field_name="sigma")
        if sum(signs):
            raise ParameterError(f"Signs must sum to zero, got {signs}", field_name="sigma")
        object.__setattr__(self, "signs", signs)

    def __iter__(self):
        return iter(self.signs)

    def __len__(self):
        return len(self.signs)

    def __getitem__(self, j):
        return self.signs[j]

    def __str__(self):
        return "".join("+" if s > 0 else "-" for s in self.signs)


def sigma_sequences(N):
    if N < 2 or N % 2:
        raise ParameterError(
            f"N must be even and at least 2, got {N}", field_name="N"
        )
    return [
        SigmaSequence(signs)
        for signs in itertools.product((1, -1), repeat=N)
        if sum(signs) == 0
    ]


def lambda_sequence(lam, sigma, params):
    """
    λ_1 = λ, λ_{j+1} = λ_j + 4σ_j lη; balanced signs close the sequence.
    """
    step = 4 * float(params.l) * params.eta
    lambdas = [lam]
    for s in sigma:
        lambdas.append(lambdas[-1] + s * step)
    return lambdas


def sigma_lambda_sum_residual(lam, sigma, params):
    """
    |Σ_k σ_k λ_k + 2Nlη|
    """
    lambdas = lambda_sequence(lam, sigma, params)
    total = sum(s * x for s, x in zip(sigma, lambdas))
    return abs(total + 2 * params.N * float(params.l) * params.eta)


@dataclass(frozen=True)
class ColumnSpec:
    v: float
    lam: float
    sigma: SigmaSequence

    def lambdas(self, params):
        return lambda_sequence(self.lam, self.sigma, params)

    def key(self):
        # Columns depend on (λ, v) only through λ - v
        return (str(self.sigma), round(self.lam - self.v, 9))

    def as_dict(self):
        return {"v": self.v, "lambda": self.lam, "sigma": str(self.sigma)}


def h_pm(u, sign, params):
    """
    h_±(u) = (2[u ∓ 2lη])^N
    """
    if sign not in (1, -1, "+", "-"):
        raise ValueError(f"sign must be + or -, got {sign!r}")
    s = 1 if sign in (1, "+") else -1
    return (2 * theta11(u - s * params.two_l * params.eta, params)) ** params.N


def site_vectors(u, spec, basis, params):
    lambdas = spec.lambdas(params)
    return [
        omega_vector(s * lambdas[j], u, s * spec.v, basis, params)
        for j, s in enumerate(spec.sigma)
    ]


def phi_column(u, spec, basis, params, chain=None):
    if chain is None:
        chain = ChainSpace(params)
    return chain.product_vector(site_vectors(u, spec, basis, params))


def phi_columns(us, specs, basis, params, chain=None):
    """
    Q_R columns at several spectral parameters; returns an array indexed
    [u, row, column].
    """
    us = np.atleast_1d(np.asarray(us, dtype=complex)).ravel()
    columns = []
    for spec in specs:
        lambdas = spec.lambdas(params)
        # g_N ⊗ ⋯ ⊗ g_1 built row-wise over u, g_N slowest
        vectors = None
        for j in reversed(range(params.N)):
            s = spec.sigma[j]
            g = omega_vectors(s * lambdas[j], us, s * spec.v, basis, params)
            if vectors is None:
                vectors = g
            else:
                vectors = (vectors[:, :, None] * g[:, None, :]).reshape(len(us), -1)
        columns.append(vectors)
    return np.stack(columns, axis=-1)


def build_qr(u, specs, basis, params, chain=None):
    return phi_columns([u], specs, basis, params, chain)[0]


def three_term(f, u, params):
    eta = params.eta
    return h_pm(u, "-", params) * f(u - 2 * eta) + h_pm(u, "+", params) * f(u + 2 * eta)


def phi_three_term_residual(u, spec, rep, basis, params, chain=None):
    """
    T(u) φ(u) = h_-(u) φ(u-2η) + h_+(u) φ(u+2η)
    """
    if chain is None:
        chain = ChainSpace(params)
    T = transfer_matrix(u, rep, params, chain)
    return relative_residual(
        T @ phi_column(u, spec, basis, params, chain),
        three_term(lambda x: phi_column(x, spec, basis, params, chain), u, params),
    )


def gauge_step_residual(spec, params):
    """
    M_{σ_jλ_j + 4lη}(σ_j v) = M_{λ_{j+1}}(v) along the sequence.
    """
    lambdas = spec.lambdas(params)
    step = 4 * float(params.l) * params.eta
    return max(
        relative_residual(
            gauge_entries(s * lambdas[j] + step, s * spec.v, params),
            gauge_entries(lambdas[j + 1], spec.v, params),
        )
        for j, s in enumerate(spec.sigma)
    )


def spec_is_generic(spec, params):
    for lam in spec.lambdas(params):
        if abs(theta11(lam, params)) < GAUGE_MARGIN:
            return False
        try:
            gauge_matrix(lam, spec.v, params)
        except DegenerateParameterError:
            return False
    # M_λ(v) degenerates as v approaches the integers
    return min(abs(spec.v - round(spec.v)), abs(spec.lam - round(spec.lam))) > GAUGE_MARGIN


def draw_specs(params, rng, count=None):
    """
    Seeded (v, λ) draws in (0.05, 0.95), cycling through the balanced sign
    sequences; duplicates and gauge-singular draws are rejected.
    """
    if count is None:
        count = params.chain_dim
    sequences = sigma_sequences(params.N)
    specs = []
    seen = set()
    while len(specs) < count:
        sigma = sequences[len(specs) % len(sequences)]
        spec = ColumnSpec(
            v=float(rng.uniform(0.05, 0.95)),
            lam=float(rng.uniform(0.05, 0.95)),
            sigma=sigma,
        )
        if spec.key() in seen or not spec_is_generic(spec, params):
            continue
        seen.add(spec.key())
        specs.append(spec)
    return specs


def draw_u0_candidates(params, rng, count=U0_CANDIDATES):
    return [
        complex(rng.uniform(0.05, 0.95), params.t * rng.uniform(0.05, 0.95))
        for _ in range(count)
    ]


@dataclass
class QFamily:
    specs: list
    u0: complex
    basis: object
    params: object
    chain: ChainSpace
    factorization: Factorization = field(repr=False)

    @property
    def condition_estimate(self):
        return self.factorization.condition

    def qr(self, u):
        return build_qr(u, self.specs, self.basis, self.params, self.chain)

    def qr_inverse(self):
        return self.factorization.solve(np.eye(self.chain.dim))

    def q(self, u):
        """
        Q(u) = Q_R(u) Q_R(u0)⁻¹
        """
        return self.qr(u) @ self.qr_inverse()

    def ql(self, u, chain_frame):
        return build_ql(u, self.specs, self.basis, chain_frame, self.params, self.chain)

    def q_values(self, us, w):
        """
        Eigenvalue of Q(u) on the eigenvector ``w`` at each of ``us``:
        q(u) = w^H Q_R(u) x / w^H w with Q_R(u0) x = w.
        """
        us = np.atleast_1d(np.asarray(us, dtype=complex))
        w = np.asarray(w, dtype=complex)
        x = self.factorization.solve(w)
        columns = phi_columns(us, self.specs, self.basis, self.params, self.chain)
        values = np.einsum("i,uik,k->u", w.conj(), columns, x) / np.vdot(w, w)
        return values.reshape(us.shape)

    def as_dict(self):
        return {
            "u0": [self.u0.real, self.u0.imag],
            "condition": self.condition_estimate,
            "specs": [spec.as_dict() for spec in self.specs],
        }


def sample_column_specs(
    params,
    seed,
    basis,
    chain=None,
    u0_candidates=U0_CANDIDATES,
    cond_cap=QR_CONDITION_CAP,
    max_resamples=MAX_SPEC_RESAMPLES,
):
    """
    Draw (2l+1)^N column specs and a base point u0 so that Q_R(u0) is invertible
    below ``cond_cap``; u0 is the best of ``u0_candidates`` seeded points.
    """
    if chain is None:
        chain = ChainSpace(params)
    rng = np.random.default_rng(seed)

    best = None
    for attempt in range(max_resamples + 1):
        specs = draw_specs(params, rng, chain.dim)
        for u0 in draw_u0_candidates(params, rng, u0_candidates):
            try:
                factorization = Factorization(
                    build_qr(u0, specs, basis, params, chain), cond_cap=np.inf
                )
            except DegenerateParameterError:
                continue
            condition = factorization.condition
            if best is None or condition < best[0]:
                best = (condition, specs, u0, factorization)

        if best is not None and best[0] < cond_cap:
            condition, specs, u0, factorization = best
            logger.info(
                "Q_R(u0) accepted after %d resample(s): u0=%s condition=%.3e",
                attempt,
                u0,
                condition,
            )
            return QFamily(
                specs=specs,
                u0=u0,
                basis=basis,
                params=params,
                chain=chain,
                factorization=factorization,
            )
        logger.warning(
            "Q_R(u0) condition %.3e above %.1e on attempt %d; resampling specs",
            best[0] if best else np.inf,
            cond_cap,
            attempt,
        )

    raise IllConditionedError(
        f"Q_R(u0) stays rank deficient after {max_resamples} resamples "
        f"(best condition {best[0] if best else np.inf:.3e})",
        condition=best[0] if best else np.inf,
    )


def qr_three_term_residual(u, family, rep):
    T = transfer_matrix(u, rep, family.params, family.chain)
    return relative_residual(T @ family.qr(u), three_term(family.qr, u, family.params))


def qr_periodicity_residual(u, family):
    return relative_residual(family.qr(u + 2), family.qr(u))


def build_ql(u, specs, basis, chain_frame, params, chain=None):
    """
    Q_L(u) = Q_R(-ū)^H G, mapping the chain space to C^dim.
    """
    qr = build_qr(-np.conj(u), specs, basis, params, chain)
    return qr.conj().T @ chain_frame.G


def ql_three_term_residual(u, family, rep, chain_frame):
    T = transfer_matrix(u, rep, family.params, family.chain)
    return relative_residual(
        family.ql(u, chain_frame) @ T,
        three_term(lambda x: family.ql(x, chain_frame), u, family.params),
    )


def transfer_adjoint_residual(u, rep, chain_frame, params, chain=None):
    """
    T(u)* = T(-ū) in the chain Sklyanin form.
    """
    if chain is None:
        chain = ChainSpace(params)
    return relative_residual(
        chain_frame.adjoint(transfer_matrix(u, rep, params, chain)),
        transfer_matrix(-np.conj(u), rep, params, chain),
    )


def phi_pairing(u, u_prime, spec, spec_prime, basis, frame, params):
    """
    Φ(u, u') = <φ(-ū; spec), φ(u'; spec')> as a product of site pairings.
    """
    left = site_vectors(-np.conj(u), spec, basis, params)
    right = site_vectors(u_prime, spec_prime, basis, params)
    value = 1.0 + 0j
    for g, g_prime in zip(left, right):
        value *= frame.inner(g, g_prime)
    return value


def phi_pairing_direct(u, u_prime, spec, spec_prime, basis, chain_frame, params, chain=None):
    if chain is None:
        chain = ChainSpace(params)
    return chain_frame.inner(
        phi_column(-np.conj(u), spec, basis, params, chain),
        phi_column(u_prime, spec_prime, basis, params, chain),
    )


def phi_symmetry_residual(u, u_prime, spec, spec_prime, basis, frame, params):
    forward = phi_pairing(u, u_prime, spec, spec_prime, basis, frame, params)
    backward = phi_pairing(u_prime, u, spec, spec_prime, basis, frame, params)
    return relative_residual(forward, backward)


def site_pairing_ratios(u, u_prime, spec, spec_prime, basis, frame, params):
    """
    Per-site quadrature pairing divided by the closed form; the chain pairing
    factorises into these sites, so every ratio is one.
    """
    left = site_vectors(-np.conj(u), spec, basis, params)
    right = site_vectors(u_prime, spec_prime, basis, params)
    lambdas = spec.lambdas(params)
    lambdas_prime = spec_prime.lambdas(params)
    ratios = []
    for k in range(params.N):
        numeric = frame.inner(left[k], right[k])
        closed = omega_pair_closed_form(
            u,
            u_prime,
            spec.v,
            spec_prime.v,
            lambdas[k],
            lambdas_prime[k],
            spec.sigma[k],
            spec_prime.sigma[k],
            params,
        )
        ratios.append(numeric / closed)
    return ratios


def ql_qr_commutation_residual(u, u_prime, family, chain_frame):
    """
    Q_L(u) Q_R(u') = Q_L(u') Q_R(u)
    """
    return relative_residual(
        family.ql(u, chain_frame) @ family.qr(u_prime),
        family.ql(u_prime, chain_frame) @ family.qr(u),
    )


def build_q(u, family):
    return family.q(u)


def q_relation_residuals(u, u_prime, family, rep, chain_frame):
    """
    Residuals of the Q-operator relations, keyed by the relation they test.
    """
    params = family.params
    Q = family.q(u)
    Q_prime = family.q(u_prime)
    T = transfer_matrix(u, rep, params, family.chain)

    ql0 = family.ql(family.u0, chain_frame)
    q_from_left, _ = solve_linear(ql0, family.ql(u, chain_frame), cond_cap=np.inf, tol=1e-6)

    return {
        "Q=QLQL": relative_residual(Q, q_from_left),
        "QQ=QQ": commutator_residual(Q, Q_prime),
        "TQ=QT": commutator_residual(T, Q),
        "TQ": relative_residual(T @ Q, three_term(family.q, u, params)),
        "QT": relative_residual(Q @ T, three_term(family.q, u, params)),
    }


def u_factors(u, params):
    """
    Factors of the U_1 and U_3 laws: e^{-Nlπi} and e^{Nlπi(τ-1) + 2Nlπiu}.
    """
    nl = params.nl
    return (
        np.exp(-1j * np.pi * nl),
        np.exp(1j * np.pi * nl * (params.tau - 1) + 2j * np.pi * nl * u),
    )


def u_law_residuals(u, family, U, chain_frame):
    """
    U-laws for Q_R, Q_L and Q, keyed by operator.
    """
    params = family.params
    chain = family.chain
    U1N = chain.tensor_power(U.U1)
    U3N = chain.tensor_power(U.U3)
    one, three = u_factors(u, params)
    tau = params.tau

    qr = family.qr(u)
    ql = family.ql(u, chain_frame)
    Q = family.q(u)
    Q_one = family.q(u + 1)
    Q_tau = family.q(u + tau)
    return {
        "QR": max(
            relative_residual(U1N @ qr, one * family.qr(u + 1)),
            relative_residual(U3N @ qr, three * family.qr(u + tau)),
        ),
        "QL": max(
            relative_residual(ql @ U1N, one * family.ql(u + 1, chain_frame)),
            relative_residual(ql @ U3N, three * family.ql(u + tau, chain_frame)),
        ),
        "Q": max(
            relative_residual(U1N @ Q, one * Q_one),
            relative_residual(Q @ U1N, one * Q_one),
            relative_residual(U3N @ Q, three * Q_tau),
            relative_residual(Q @ U3N, three * Q_tau),
        ),
    }
