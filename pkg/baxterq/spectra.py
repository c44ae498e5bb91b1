"""
Joint spectra of T(u) and Q(u) on the sectors of U_1^{⊗N}, U_3^{⊗N}, and the
Bethe roots read off from the Q-eigenvalues.
"""

import logging

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from baxterq.lattice import ChainSpace, commutator_residual, transfer_matrix
from baxterq.numerics import (
    NumericalError,
    Rectangle,
    eig_decompose,
    find_zeros_in_rectangle,
)
from baxterq.qoperator import h_pm, u_factors
from baxterq.theta import lattice_distance, theta11
from baxterq.utils import relative_residual


logger = logging.getLogger("baxterq.spectra")


DEGENERACY_GAP = 1e-6
# Corner of the root-search cell in units of the periods; half-periods stay a
# quarter period away from every edge
CELL_OFFSET = -0.25
ROOT_COLLISION = 1e-6
ROOT_CLEARANCE = 1e-3
INVOLUTION_TOL = 1e-9
GRID_POINTS = 16


class UnresolvedDegeneracyError(NumericalError):
    def __init__(self, *args, cluster=None):
        self.cluster = cluster
        super().__init__(*args)


class CollidingRootsError(NumericalError):
    pass


@dataclass(frozen=True)
class Sector:
    nu1: int
    nu3: int
    basis: np.ndarray = field(repr=False)

    @property
    def dimension(self):
        return self.basis.shape[1]

    @property
    def projector(self):
        return self.basis @ self.basis.conj().T

    @property
    def label(self):
        return (self.nu1, self.nu3)


def split_points(params):
    return (
        complex(0.1234, 0.2345 * params.t),
        complex(0.3717, 0.1129 * params.t),
    )


def u_grid(params, count=GRID_POINTS):
    """
    Deterministic points spread over the fundamental cell.
    """
    k = np.arange(count)
    return 0.05 + 0.9 * k / count + 1j * params.t * (0.1 + 0.8 * ((7 * k) % count) / count)


def sector_decomposition(U, params, chain=None):
    """
    Joint ±1 eigenspaces of U_1^{⊗N} and U_3^{⊗N}, ordered by (ν1, ν3).
    """
    if chain is None:
        chain = ChainSpace(params)
    U1N = chain.tensor_power(U.U1)
    U3N = chain.tensor_power(U.U3)
    identity = np.eye(chain.dim)

    for name, op in (("U1", U1N), ("U3", U3N)):
        defect = relative_residual(op @ op, identity)
        if defect > INVOLUTION_TOL:
            raise NumericalError(
                f"{name}^N is not an involution (defect {defect:.3e})"
            )
    defect = commutator_residual(U1N, U3N)
    if defect > 1e-10:
        raise NumericalError(f"U1^N and U3^N do not commute (defect {defect:.3e})")

    sectors = []
    for nu1 in (0, 1):
        for nu3 in (0, 1):
            P = (
                (identity + (-1) ** nu1 * U1N)
                @ (identity + (-1) ** nu3 * U3N)
                / 4
            )
            basis = scipy.linalg.orth(P, rcond=1e-8)
            sectors.append(Sector(nu1=nu1, nu3=nu3, basis=basis))

    total = sum(sector.dimension for sector in sectors)
    if total != chain.dim:
        raise NumericalError(
            f"Sector dimensions add up to {total}, expected {chain.dim}"
        )
    return sectors


def sector_residual(sector, U, chain):
    """
    U_a^{⊗N} acts on the sector as (-1)^{ν_a}.
    """
    if not sector.dimension:
        return 0.0
    V = sector.basis
    return max(
        relative_residual(chain.tensor_power(U[a]) @ V, (-1) ** nu * V)
        for a, nu in ((1, sector.nu1), (3, sector.nu3))
    )


@dataclass
class EigenPair:
    vector: np.ndarray
    sector: Sector
    index: int
    T_eval: object = field(repr=False)
    family: object = field(repr=False)

    def Lambda(self, u):
        w = self.vector
        return complex(np.vdot(w, self.T_eval(u) @ w) / np.vdot(w, w))

    def q(self, u):
        return self.family.q_values(u, self.vector)

    def joint_residual(self, us, Q_eval):
        w = self.vector
        worst = 0.0
        for u in us:
            Tw = self.T_eval(u) @ w
            Qw = Q_eval(u) @ w
            worst = max(
                worst,
                relative_residual(Tw, self.Lambda(u) * w),
                relative_residual(Qw, (np.vdot(w, Qw) / np.vdot(w, w)) * w),
            )
        return worst


def _clusters(values, gap):
    """
    Group indices of (sorted) eigenvalues closer than ``gap`` to a neighbour.
    """
    order = sorted(range(len(values)), key=lambda i: (values[i].real, values[i].imag))
    groups = [[order[0]]] if order else []
    for i in order[1:]:
        if abs(values[i] - values[groups[-1][-1]]) < gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _split(W, operators, gap):
    """
    Eigenvectors spanning the columns of ``W`` that diagonalise the first of
    ``operators`` able to separate them.
    """
    for op in operators:
        B = np.linalg.lstsq(W, op @ W, rcond=None)[0]
        values, vectors = eig_decompose(B, tol=1e-8)
        scale = max(1.0, float(np.max(np.abs(values))))
        if all(len(group) == 1 for group in _clusters(values, gap * scale)):
            return W @ vectors
    return None


def joint_eigenbasis(T_eval, Q_eval, sectors, u_split1, u_split2, family, gap=DEGENERACY_GAP):
    """
    Eigenvectors common to T(u) and Q(u), sector by sector. Near-degenerate
    clusters of T(u_split1) are split with T(u_split2) and then Q(u_split1).
    """
    T1 = T_eval(u_split1)
    T2 = T_eval(u_split2)
    Q1 = Q_eval(u_split1)

    pairs = []
    for sector in sectors:
        if not sector.dimension:
            continue
        V = sector.basis
        values, vectors = eig_decompose(V.conj().T @ T1 @ V, tol=1e-8)
        vectors = V @ vectors

        scale = max(1.0, float(np.max(np.abs(values))))
        resolved = []
        for group in _clusters(values, gap * scale):
            if len(group) == 1:
                resolved.append(vectors[:, group[0]])
                continue
            logger.warning(
                "Sector %s: %d near-degenerate eigenvalues at the first split point; splitting",
                sector.label,
                len(group),
            )
            split = _split(vectors[:, group], (T2, Q1), gap)
            if split is None:
                raise UnresolvedDegeneracyError(
                    f"Sector {sector.label}: cluster {group} not split at either point",
                    cluster=[complex(values[i]) for i in group],
                )
            resolved.extend(split.T)

        for w in resolved:
            w = w / np.linalg.norm(w)
            pairs.append(
                EigenPair(
                    vector=w,
                    sector=sector,
                    index=len([p for p in pairs if p.sector is sector]),
                    T_eval=T_eval,
                    family=family,
                )
            )
    return pairs


def tq_scalar_residual(pair, params, us):
    """
    Λ(u) q(u) = h_-(u) q(u-2η) + h_+(u) q(u+2η) along ``us``.
    """
    eta = params.eta
    us = np.asarray(us, dtype=complex)
    q = pair.q(us)
    q_down = pair.q(us - 2 * eta)
    q_up = pair.q(us + 2 * eta)
    Lambda = np.array([pair.Lambda(u) for u in us])
    return relative_residual(
        Lambda * q, h_pm(us, "-", params) * q_down + h_pm(us, "+", params) * q_up
    )


def q_quasi_periodicity_residual(pair, params, us):
    """
    (-1)^{ν1} q(u) = e^{-Nlπi} q(u+1) and
    (-1)^{ν3} q(u) = e^{Nlπi(τ-1) + 2Nlπiu} q(u+τ).
    """
    us = np.asarray(us, dtype=complex)
    q = pair.q(us)
    one, three = u_factors(us, params)
    return max(
        relative_residual((-1) ** pair.sector.nu1 * q, one * pair.q(us + 1)),
        relative_residual((-1) ** pair.sector.nu3 * q, three * pair.q(us + params.tau)),
    )


def fundamental_rectangle(params):
    return Rectangle(
        corner=complex(CELL_OFFSET, CELL_OFFSET * params.t),
        width=1.0,
        height=params.t,
    )


@dataclass
class BetheRoots:
    roots: tuple
    sector: Sector
    eigen_index: int
    q_residuals: tuple = ()

    @property
    def count(self):
        return len(self.roots)

    def canonical_roots(self, params):
        """
        Representatives with q(u) = C e^{ν1πiu} ∏[u - u_j]; the first root is
        moved by n1·τ, n1 = -Im(Σu)/Im τ - ν1/2.
        """
        roots = list(self.roots)
        if not roots:
            return roots
        n1 = int(round(-sum(roots).imag / params.t - self.sector.nu1 / 2))
        roots[0] = roots[0] + n1 * params.tau
        return roots

    def rows(self):
        for k, (root, residual) in enumerate(zip(self.roots, self.q_residuals)):
            yield {
                "sector_nu1": self.sector.nu1,
                "sector_nu3": self.sector.nu3,
                "eigen_index": self.eigen_index,
                "root_index": k,
                "re_u": root.real,
                "im_u": root.imag,
                "q_residual": residual,
            }


def bethe_roots(pair, params):
    """
    The Nl zeros of q(u) in the fundamental rectangle.
    """
    rect = fundamental_rectangle(params)
    roots = find_zeros_in_rectangle(pair.q, rect, expected_count=params.nl)
    scale = float(np.max(np.abs(pair.q(rect.boundary(64)))))
    residuals = tuple(float(abs(pair.q(root)[0]) / scale) for root in roots)
    return BetheRoots(
        roots=tuple(roots),
        sector=pair.sector,
        eigen_index=pair.index,
        q_residuals=residuals,
    )


def explicit_form_residual(pair, roots, params, us=None):
    """
    q(u) / (e^{ν1πiu} ∏[u - u_j]) is constant.
    """
    if us is None:
        us = u_grid(params)
    us = np.asarray(us, dtype=complex)
    canonical = roots.canonical_roots(params)
    denominator = np.exp(1j * np.pi * roots.sector.nu1 * us)
    for root in canonical:
        denominator = denominator * theta11(us - root, params)
    ratio = pair.q(us) / denominator
    return float(np.max(np.abs(ratio - ratio[0])) / abs(ratio[0]))


def sum_rule_residual(roots, params):
    """
    Lattice distance of Σu_j from -ν1τ/2 + ν3/2.
    """
    target = -roots.sector.nu1 * params.tau / 2 + roots.sector.nu3 / 2
    return lattice_distance(sum(roots.roots) - target, params)


def _check_distinct(roots, params):
    for j, a in enumerate(roots):
        if lattice_distance(a, params) < ROOT_COLLISION:
            raise CollidingRootsError(f"Root {a} sits on the period lattice")
        for b in roots[j + 1 :]:
            if lattice_distance(a - b, params) < ROOT_COLLISION:
                raise CollidingRootsError(f"Roots {a} and {b} collide")


def bethe_equation_residual(roots, params):
    """
    ([u_j+2lη]/[u_j-2lη])^N = e^{4ν1πiη} ∏_{k≠j} [u_j-u_k+2η]/[u_j-u_k-2η]
    """
    canonical = roots.canonical_roots(params)
    _check_distinct(canonical, params)
    eta = params.eta
    two_l_eta = params.two_l * eta
    phase = np.exp(4j * np.pi * roots.sector.nu1 * eta)

    worst = 0.0
    for j, uj in enumerate(canonical):
        lhs = (theta11(uj + two_l_eta, params) / theta11(uj - two_l_eta, params)) ** params.N
        rhs = phase
        for k, uk in enumerate(canonical):
            if k != j:
                rhs *= theta11(uj - uk + 2 * eta, params) / theta11(uj - uk - 2 * eta, params)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return worst


def eigenvalue_formula(u, roots, params):
    """
    Λ(u) = (2[u+2lη])^N e^{-2ν1πiη} ∏ [u-u_j-2η]/[u-u_j]
         + (2[u-2lη])^N e^{2ν1πiη}  ∏ [u-u_j+2η]/[u-u_j]
    """
    eta = params.eta
    nu1 = roots.sector.nu1
    down = h_pm(u, "-", params) * np.exp(-2j * np.pi * nu1 * eta)
    up = h_pm(u, "+", params) * np.exp(2j * np.pi * nu1 * eta)
    for root in roots.canonical_roots(params):
        base = theta11(u - root, params)
        down = down * theta11(u - root - 2 * eta, params) / base
        up = up * theta11(u - root + 2 * eta, params) / base
    return down + up


def eigenvalue_reconstruction_residual(pair, roots, us, params):
    worst = 0.0
    for u in us:
        if min(
            (lattice_distance(u - root, params) for root in roots.roots), default=1.0
        ) < ROOT_CLEARANCE:
            logger.warning("Skipping u=%s: too close to a Bethe root", u)
            continue
        Lambda = pair.Lambda(u)
        worst = max(worst, abs(Lambda - eigenvalue_formula(u, roots, params)) / abs(Lambda))
    return worst


def recover_planted_roots(centres, params):
    """
    Zeros of ∏[u - c_j] found by the rectangle extractor, matched to ``centres``.
    """

    def f(u):
        u = np.asarray(u, dtype=complex)
        value = np.ones(u.shape, dtype=complex)
        for c in centres:
            value = value * theta11(u - c, params)
        return value

    found = find_zeros_in_rectangle(
        f, fundamental_rectangle(params), expected_count=len(centres)
    )
    return max(min(lattice_distance(r - c, params) for r in found) for c in centres)


def direct_spectrum_residual(pairs, T_eval, points):
    """
    Each Λ(u) matches an eigenvalue of a direct diagonalisation of T(u).
    """
    worst = 0.0
    for u in points:
        values, _ = eig_decompose(T_eval(u), tol=1e-8)
        scale = max(1.0, float(np.max(np.abs(values))))
        for pair in pairs:
            Lambda = pair.Lambda(u)
            worst = max(worst, float(np.min(np.abs(values - Lambda))) / scale)
    return worst


@dataclass
class Spectrum:
    sectors: list
    pairs: list
    roots: list

    def rows(self):
        for roots in self.roots:
            yield from roots.rows()


def compute_spectrum(family, rep, U, params, chain=None):
    if chain is None:
        chain = family.chain

    def T_eval(u):
        return transfer_matrix(u, rep, params, chain)

    sectors = sector_decomposition(U, params, chain)
    first, second = split_points(params)
    pairs = joint_eigenbasis(T_eval, family.q, sectors, first, second, family)
    roots = [bethe_roots(pair, params) for pair in pairs]
    for found in roots:
        logger.debug(
            "Sector %s eigenvector %d: roots %s",
            found.sector.label,
            found.eigen_index,
            found.roots,
        )
    return Spectrum(sectors=sectors, pairs=pairs, roots=roots)
