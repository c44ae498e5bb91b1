"""
L-operators, Baxter's R-matrix, the transfer matrix and the gauge-twisted
L-operators acting on local pseudo vacua.

Chain operators act on V_N ⊗ ⋯ ⊗ V_1 with site 1 the fastest-varying index, so
a site-local operator at site j is embedded as I ⊗ ⋯ ⊗ op ⊗ I^{⊗(j-1)}.
"""

import logging

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from baxterq.numerics import DegenerateParameterError
from baxterq.representation import (
    PAULI,
    expand_in_basis,
    expand_many,
    pauli_identification,
)
from baxterq.theta import (
    TH00,
    TH01,
    ParameterError,
    theta00,
    theta01,
    theta10,
    theta11,
    theta_ab,
    za_bracket_k,
)
from baxterq.utils import KRON, relative_residual


logger = logging.getLogger("baxterq.lattice")


MAX_CHAIN_DIM = 4096
GAUGE_DETERMINANT_GUARD = 1e-10
WEIGHT_GUARD = 1e-14

BLOCKS = ("--", "-+", "+-", "++")


def w_weights(u, params, shift="L"):
    """
    W_0..W_3 at ``u``; the R-matrix weights are W^R_a(u) = W^L_a(u + η).
    """
    if shift == "R":
        u = np.asarray(u) + params.eta
    elif shift != "L":
        raise ValueError(f"shift must be 'L' or 'R', got {shift!r}")

    eta = params.eta
    numerators = (theta11, theta10, theta00, theta01)
    weights = []
    for evaluate in numerators:
        denominator = evaluate(eta, params)
        if abs(denominator) < WEIGHT_GUARD:
            raise DegenerateParameterError(
                f"{evaluate.__name__}(eta) vanishes for eta={eta}"
            )
        weights.append(evaluate(u, params) / denominator)
    return tuple(weights)


@dataclass(frozen=True)
class LOperator:
    """
    L(u) as a 2×2 array of (2l+1)×(2l+1) blocks, auxiliary index outermost.
    """

    blocks: dict
    u: complex

    def __getitem__(self, key):
        return self.blocks[key]

    def block(self, a, b):
        return self.blocks["-+"[a] + "-+"[b]]

    @property
    def matrix(self):
        return np.block(
            [[self.blocks["--"], self.blocks["-+"]], [self.blocks["+-"], self.blocks["++"]]]
        )


def l_operator(u, rep, params):
    W0, W1, W2, W3 = w_weights(u, params)
    S0, S1, S2, S3 = rep.S
    blocks = {
        "--": W0 * S0 + W3 * S3,
        "-+": W1 * S1 - 1j * W2 * S2,
        "+-": W1 * S1 + 1j * W2 * S2,
        "++": W0 * S0 - W3 * S3,
    }
    return LOperator(blocks=blocks, u=complex(u))


def l_operator_from_weights(u, rep, params):
    """
    Σ_a W_a(u) σ^a ⊗ S^a, assembled directly from the Pauli matrices.
    """
    W = w_weights(u, params)
    return sum(W[a] * np.kron(PAULI[a], rep[a]) for a in range(4))


def adjoint_block_residual(u, rep, frame, params):
    """
    (L_{--}(u))* = -L_{++}(-ū), (L_{-+}(u))* = L_{+-}(-ū) and the mirror pair,
    with adjoints taken in the Sklyanin form.
    """
    L = l_operator(u, rep, params)
    M = l_operator(-np.conj(u), rep, params)
    pairs = (("--", "++", -1), ("-+", "+-", 1), ("+-", "-+", 1), ("++", "--", -1))
    return max(
        relative_residual(frame.adjoint(L[key]), sign * M[image])
        for key, image, sign in pairs
    )


def r_matrix(u, params):
    W = w_weights(u, params, shift="R")
    return sum(W[a] * np.kron(PAULI[a], PAULI[a]) for a in range(4))


def rll_residual(u, v, rep, params):
    """
    L_12(v) L_13(u) R_23(u-v) = R_23(u-v) L_13(u) L_12(v) on V ⊗ C² ⊗ C².
    """
    d = rep[0].shape[0]
    I2 = np.eye(2)
    Wu = w_weights(u, params)
    Wv = w_weights(v, params)
    WR = w_weights(u - v, params, shift="R")

    L12 = sum(Wv[a] * KRON([rep[a], PAULI[a], I2]) for a in range(4))
    L13 = sum(Wu[a] * KRON([rep[a], I2, PAULI[a]]) for a in range(4))
    R23 = sum(WR[a] * KRON([np.eye(d), PAULI[a], PAULI[a]]) for a in range(4))
    return relative_residual(L12 @ L13 @ R23, R23 @ L13 @ L12)


def eight_vertex_residual(u, rep, params):
    """
    For l = 1/2, L(u) = [2η] R(u - η) once S^a is carried to the Pauli basis.
    """
    P = pauli_identification(rep.basis, params)
    P_inverse = np.linalg.inv(P)
    W = w_weights(u, params)
    L = sum(W[a] * np.kron(PAULI[a], P_inverse @ rep[a] @ P) for a in range(4))
    return relative_residual(L, theta11(2 * params.eta, params) * r_matrix(u - params.eta, params))


class ChainSpace:
    """
    The chain space V_N ⊗ ⋯ ⊗ V_1 of dimension (2l+1)^N.
    """

    def __init__(self, params):
        self.params = params
        self.site_dim = params.dim
        self.sites = params.N
        self.dim = params.chain_dim
        if self.dim > MAX_CHAIN_DIM:
            raise ParameterError(
                f"Chain dimension {self.dim} exceeds the dense-storage limit {MAX_CHAIN_DIM}",
                field_name="N",
            )

    def embed(self, op, site):
        """
        ``op`` acting at ``site`` (1-based), identity elsewhere.
        """
        if not 1 <= site <= self.sites:
            raise IndexError(f"Site {site} outside 1..{self.sites}")
        d = self.site_dim
        return KRON(
            [np.eye(d ** (self.sites - site)), op, np.eye(d ** (site - 1))]
        )

    def product_vector(self, site_vectors):
        """
        g_N ⊗ ⋯ ⊗ g_1 from ``site_vectors`` listed as (g_1, ..., g_N).
        """
        if len(site_vectors) != self.sites:
            raise ValueError(
                f"Need {self.sites} site vectors, got {len(site_vectors)}"
            )
        return KRON(list(reversed(site_vectors)))

    def tensor_power(self, op):
        return KRON([op] * self.sites)

    def digits(self, index):
        """
        Per-site digits (k_1, ..., k_N) of a flattened chain index.
        """
        return tuple((index // self.site_dim**j) % self.site_dim for j in range(self.sites))

    def __repr__(self):
        return f"<ChainSpace d={self.site_dim} N={self.sites} dim={self.dim}>"


def _block_product(chain, site_blocks):
    """
    Ordered product L_N ⋯ L_1 of 2×2 block operators over the chain; each entry
    of ``site_blocks`` is a 2×2 nested list of site matrices.
    """
    identity = np.eye(chain.dim, dtype=complex)
    zero = np.zeros((chain.dim, chain.dim), dtype=complex)
    P = [[identity, zero], [zero, identity]]
    for site, blocks in enumerate(site_blocks, start=1):
        embedded = [[chain.embed(blocks[a][c], site) for c in range(2)] for a in range(2)]
        P = [
            [embedded[a][0] @ P[0][b] + embedded[a][1] @ P[1][b] for b in range(2)]
            for a in range(2)
        ]
    return P


def transfer_matrix(u, rep, params, chain=None):
    if chain is None:
        chain = ChainSpace(params)
    L = l_operator(u, rep, params)
    blocks = [[L.block(a, b) for b in range(2)] for a in range(2)]
    P = _block_product(chain, [blocks] * chain.sites)
    return P[0][0] + P[1][1]


def commutator_residual(A, B):
    scale = max(np.linalg.norm(A @ B), np.linalg.norm(B @ A))
    return relative_residual(A @ B, B @ A, scale)


@dataclass(frozen=True)
class GaugeMatrix:
    M: np.ndarray
    lam: complex
    v: complex

    @property
    def determinant(self):
        return complex(np.linalg.det(self.M))

    @property
    def inverse(self):
        return np.linalg.inv(self.M)


def gauge_entries(lam, v, params):
    half = params.tau / 2
    trunc = params.series_truncation
    minus = (lam - v) / 2
    plus = (lam + v) / 2
    return np.array(
        [
            [-theta_ab(TH00, minus, half, trunc), -theta_ab(TH00, plus, half, trunc)],
            [theta_ab(TH01, minus, half, trunc), theta_ab(TH01, plus, half, trunc)],
        ],
        dtype=complex,
    )


def gauge_matrix(lam, v, params):
    """
    M_λ(v), built from θ00 and θ01 at modulus τ/2.

    Raises DegenerateParameterError when the determinant is below the guard; this
    happens exactly when the two columns coincide up to the lattice.
    """
    M = gauge_entries(lam, v, params)
    determinant = abs(np.linalg.det(M))
    scale = max(float(np.max(np.abs(M))) ** 2, np.finfo(float).tiny)
    if determinant < GAUGE_DETERMINANT_GUARD * scale:
        raise DegenerateParameterError(
            f"Gauge matrix is singular at lambda={lam}, v={v} (|det| = {determinant:.3e})"
        )
    return GaugeMatrix(M=M, lam=complex(lam), v=complex(v))


def gauge_evenness_residual(lam, v, params):
    return relative_residual(gauge_entries(-lam, -v, params), gauge_entries(lam, v, params))


@dataclass(frozen=True)
class TwistedL:
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray

    def block(self, a, b):
        return ((self.alpha, self.beta), (self.gamma, self.delta))[a][b]


def twisted_blocks(L, left, right):
    """
    Entries of left⁻¹ L right for scalar 2×2 ``left``/``right`` and block L.
    """
    inverse = left.inverse
    Mr = right.M
    entries = [[None, None], [None, None]]
    for a in range(2):
        for b in range(2):
            entries[a][b] = sum(
                inverse[a, c] * L.block(c, d) * Mr[d, b]
                for c in range(2)
                for d in range(2)
            )
    return TwistedL(
        alpha=entries[0][0], beta=entries[0][1], gamma=entries[1][0], delta=entries[1][1]
    )


def twisted_l(lam, lam_prime, u, v, rep, params):
    """
    M_λ(v)⁻¹ L(u) M_λ'(v) as its four entries (α, β, γ, δ).
    """
    return twisted_blocks(
        l_operator(u, rep, params),
        gauge_matrix(lam, v, params),
        gauge_matrix(lam_prime, v, params),
    )


def vacuum_offset(lam, u, v, params):
    return (lam + u - v) / 2 + (1 - float(params.l)) * params.eta


def omega_function(lam, u, v, params):
    """
    The local pseudo vacuum ω_λ(u;v) = [z;x]_{2l} with x = (λ+u-v)/2 + (1-l)η.
    """
    x = vacuum_offset(lam, u, v, params)
    return lambda z: za_bracket_k(z, x, params.two_l, params)


def omega_vector(lam, u, v, basis, params):
    return expand_in_basis(basis, omega_function(lam, u, v, params))


def omega_vectors(lam, us, v, basis, params):
    """
    ω_λ(u;v) for every u in ``us``, as rows of a (len(us), 2l+1) array.
    """
    x = vacuum_offset(lam, np.asarray(us, dtype=complex).ravel(), v, params)
    return expand_many(
        basis,
        lambda z: za_bracket_k(
            np.asarray(z)[None, :], x[:, None], params.two_l, params
        ),
    )


def intertwiner_function(lam, m, u, v, params):
    m = Fraction(m)
    l = params.l
    if (l - m).denominator != 1 or not -l <= m <= l:
        raise ParameterError(f"m must be one of -l..l, got {m}", field_name="m")
    lam_prime = lam + 4 * float(m) * params.eta
    x = vacuum_offset(lam, u, v, params)
    x_prime = vacuum_offset(lam_prime, u, v, params)
    return lambda z: (
        za_bracket_k(z, x, int(l + m), params) * za_bracket_k(z, x_prime, int(l - m), params)
    )


def intertwiner_vector(lam, m, u, v, basis, params):
    return expand_in_basis(basis, intertwiner_function(lam, m, u, v, params))


def omega_shift_residual(lam, u, v, basis, params):
    """
    ω_{λ±2η}(u;v) = ω_λ(u±2η;v) as coordinate vectors.
    """
    eta = params.eta
    return max(
        relative_residual(
            omega_vector(lam + s * eta, u, v, basis, params),
            omega_vector(lam, u + s * eta, v, basis, params),
        )
        for s in (2, -2)
    )


def vacuum_action_residual(lam, u, v, sign, rep, basis, params):
    """
    Largest residual of the α, γ and δ actions on the pseudo vacuum:

        α ω = 2[u+2lη] ω_{λ-2η},  γ ω = 0,  δ ω = 2[u-2lη][λ]/[λ+4lη] ω_{λ+2η}

    ``sign = -1`` uses ω_{-λ}(u;-v) with λ' = λ - 4lη.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    two_l_eta = params.two_l * params.eta

    tw = twisted_l(lam + 2 * sign * two_l_eta, lam, u, v, rep, params)
    w = omega_vector(sign * lam, u, sign * v, basis, params)
    down = omega_vector(sign * lam - 2 * params.eta, u, sign * v, basis, params)
    up = omega_vector(sign * lam + 2 * params.eta, u, sign * v, basis, params)

    alpha_coefficient = 2 * theta11(u + two_l_eta, params)
    delta_coefficient = (
        2
        * theta11(u - two_l_eta, params)
        * theta11(lam, params)
        / theta11(lam + 2 * sign * two_l_eta, params)
    )

    alpha_w = tw.alpha @ w
    delta_w = tw.delta @ w
    gamma_scale = max(np.linalg.norm(alpha_w), np.linalg.norm(delta_w))
    return max(
        relative_residual(alpha_w, alpha_coefficient * down),
        relative_residual(tw.gamma @ w, 0 * w, gamma_scale),
        relative_residual(delta_w, delta_coefficient * up),
    )


def u_on_omega_residual(lam, u, v, U, basis, params):
    """
    U_1 ω_λ(u;v) = e^{-lπi} ω_λ(u+1;v) and
    U_3 ω_λ(u;v) = e^{lπi(τ-1) + 2lπi(λ+u-v+2lη)} ω_λ(u+τ;v).
    """
    l = float(params.l)
    tau = params.tau
    w = omega_vector(lam, u, v, basis, params)
    one = relative_residual(
        U.U1 @ w, np.exp(-1j * np.pi * l) * omega_vector(lam, u + 1, v, basis, params)
    )
    factor = np.exp(
        1j * np.pi * l * (tau - 1)
        + 2j * np.pi * l * (lam + u - v + 2 * l * params.eta)
    )
    three = relative_residual(
        U.U3 @ w, factor * omega_vector(lam, u + tau, v, basis, params)
    )
    return max(one, three)


def twisted_transfer_matrix(u, v, lambdas, rep, params, chain=None):
    """
    tr ∏ M_{λ_{j+1}}⁻¹ L_j(u) M_{λ_j} for a closed sequence λ_1, ..., λ_{N+1} = λ_1.
    """
    if chain is None:
        chain = ChainSpace(params)
    if len(lambdas) != chain.sites + 1:
        raise ValueError(f"Need {chain.sites + 1} lambda values, got {len(lambdas)}")

    L = l_operator(u, rep, params)
    gauges = [gauge_matrix(lam, v, params) for lam in lambdas]
    site_blocks = []
    for j in range(chain.sites):
        tw = twisted_blocks(L, gauges[j + 1], gauges[j])
        site_blocks.append([[tw.block(a, b) for b in range(2)] for a in range(2)])

    P = _block_product(chain, site_blocks)
    # P = M_{λ_{N+1}}⁻¹ (L_N ⋯ L_1) M_{λ_1}; the trace picks up M_{λ_1}⁻¹ M_{λ_{N+1}}
    closing = gauges[0].inverse @ gauges[-1].M
    return sum(closing[b, a] * P[a][b] for a in range(2) for b in range(2))


def u_commutation_residual(u, rep, U, params, chain=None):
    """
    [T(u), U_a^{⊗N}] = 0 for a = 1, 2, 3.
    """
    if chain is None:
        chain = ChainSpace(params)
    T = transfer_matrix(u, rep, params, chain)
    return max(commutator_residual(T, chain.tensor_power(U[a])) for a in (1, 2, 3))
