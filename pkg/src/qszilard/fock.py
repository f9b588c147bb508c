"""Bosonic Fock basis over hard-wall box modes and the contact Hamiltonian.

Single-particle modes of a box of length ell are phi_k(x) = sqrt(2/ell) *
sin(k pi x / ell) with energies eps_k = k^2 pi^2 / (2 ell^2).  The
many-body basis is the set of occupation vectors with fixed particle number
and non-interacting energy below a cutoff; the two-body contact interaction
g * delta(x1 - x2) has closed-form matrix elements in this basis, so no
quadrature enters the Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigvalsh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import ConvergenceError, EmptyBasisError, InvalidParameterError


@dataclass(frozen=True)
class ModeBasis:
    """The lowest ``n_modes`` box eigenmodes of a box of length ``length``."""

    length: float
    n_modes: int
    energies: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidParameterError(f"length must be positive, got {self.length}")
        if self.n_modes < 1:
            raise InvalidParameterError(f"n_modes must be >= 1, got {self.n_modes}")
        k = np.arange(1, self.n_modes + 1, dtype=float)
        object.__setattr__(self, "energies", k**2 * np.pi**2 / (2.0 * self.length**2))


def build_fock_basis(
    n: int,
    n_modes: int,
    energy_cutoff: float | None = None,
    mode_energies: np.ndarray | None = None,
) -> np.ndarray:
    """Enumerate occupation vectors with ``n`` particles below the cutoff.

    Returns an (n_states, n_modes) integer array in ascending lexicographic
    order on the occupation vector.  ``energy_cutoff`` bounds the
    non-interacting energy sum(occ_k * eps_k); ``None`` means no cutoff.
    Mode energies default to the unit box.
    """
    if n < 0:
        raise InvalidParameterError(f"particle number must be >= 0, got {n}")
    if n_modes < 1:
        raise InvalidParameterError(f"n_modes must be >= 1, got {n_modes}")
    eps = (
        np.asarray(mode_energies, dtype=float)
        if mode_energies is not None
        else ModeBasis(1.0, n_modes).energies
    )
    if eps.shape != (n_modes,):
        raise InvalidParameterError("mode_energies length must equal n_modes")
    if n == 0:
        return np.zeros((1, n_modes), dtype=np.int64)
    cutoff = np.inf if energy_cutoff is None else float(energy_cutoff)
    if n * eps[0] > cutoff * (1 + 1e-12) + 1e-12:
        raise EmptyBasisError(
            f"energy cutoff {cutoff} lies below the non-interacting ground energy {n * eps[0]}"
        )

    states: list[tuple[int, ...]] = []
    occ = [0] * n_modes
    tol = 1e-9

    def rec(mode: int, left: int, energy: float):
        if mode == n_modes - 1:
            if energy + left * eps[mode] <= cutoff + tol:
                occ[mode] = left
                states.append(tuple(occ))
                occ[mode] = 0
            return
        nxt = eps[mode + 1]
        for c in range(left + 1):
            e2 = energy + c * eps[mode]
            if e2 + (left - c) * nxt > cutoff + tol:
                continue
            occ[mode] = c
            rec(mode + 1, left - c, e2)
            occ[mode] = 0

    rec(0, n, 0.0)
    if not states:
        raise EmptyBasisError("energy cutoff excludes every Fock state")
    return np.array(states, dtype=np.int64)


def _d(a: int, b: int) -> float:
    if a == b:
        return 1.0 if a == 0 else 0.5
    return 0.0


def delta_matrix_element(i: int, j: int, k: int, l: int, length: float = 1.0) -> float:
    """Quartic sine-mode overlap integral int_0^ell phi_i phi_j phi_k phi_l dx.

    Closed form: products of sines reduce to cosines of index sums and
    differences, and only matching frequencies survive the integral.  Fully
    symmetric under i<->j, k<->l and (ij)<->(kl); vanishes when i+j+k+l is
    odd (parity selection).
    """
    for idx in (i, j, k, l):
        if idx < 1:
            raise InvalidParameterError("mode indices are 1-based and must be >= 1")
    if not length > 0:
        raise InvalidParameterError(f"length must be positive, got {length}")
    a, b = abs(i - j), i + j
    c, d = abs(k - l), k + l
    return (_d(a, c) - _d(a, d) - _d(b, c) + _d(b, d)) / length


def _d_vec(a: np.ndarray, b) -> np.ndarray:
    return np.where(a == b, np.where(a == 0, 1.0, 0.5), 0.0)


def _candidate_pairs(a_s: int, b_s: int, n_modes: int):
    """Target pairs (i <= j, 1-based) with a non-vanishing element, plus elements.

    The closed form is non-zero only if |i-j| or i+j matches |k-l| or k+l
    of the source pair, which shrinks the candidate set from O(M^2) to
    O(M); the unit-length integrals come along for free.
    """
    i_parts = []
    j_parts = []
    for ssum in (a_s, b_s):
        i = np.arange(max(1, ssum - n_modes), ssum // 2 + 1)
        i_parts.append(i)
        j_parts.append(ssum - i)
    for d in (a_s, b_s):
        i = np.arange(1, n_modes - d + 1)
        i_parts.append(i)
        j_parts.append(i + d)
    i_all = np.concatenate(i_parts)
    j_all = np.concatenate(j_parts)
    # the source pair itself shows up in two families; keep each pair once
    _, keep = np.unique(i_all * (n_modes + 1) + j_all, return_index=True)
    i_all, j_all = i_all[keep], j_all[keep]
    a_t = j_all - i_all
    b_t = i_all + j_all
    ival = (
        _d_vec(a_t, a_s) - _d_vec(a_t, b_s) - _d_vec(b_t, a_s) + _d_vec(b_t, b_s)
    )
    nz = ival != 0.0
    return i_all[nz], j_all[nz], ival[nz]


def _assemble_two_particle(
    basis: np.ndarray, coupling: float, mode_basis: ModeBasis, cutoff: float
) -> sp.csr_matrix:
    """Vectorized n = 2 assembly: states are single mode pairs (a <= b).

    The pair operator reduces to <ij|V|kl> = (g/2) f_ij f_kl I_ijkl with
    f = 2 for distinct modes and sqrt(2) for a doubly occupied one.
    """
    n_states, n_modes = basis.shape
    eps = mode_basis.energies
    inv_len = 1.0 / mode_basis.length
    pair_a = np.empty(n_states, dtype=np.int64)
    pair_b = np.empty(n_states, dtype=np.int64)
    pair_index = np.full((n_modes, n_modes), -1, dtype=np.int64)
    for s, occ in enumerate(basis):
        nz = np.flatnonzero(occ)
        a = nz[0]
        b = nz[0] if len(nz) == 1 else nz[1]
        pair_a[s], pair_b[s] = a, b
        pair_index[a, b] = s
    kinetic = eps[pair_a] + eps[pair_b]
    factor = np.where(pair_a == pair_b, np.sqrt(2.0), 2.0)

    rows = [np.arange(n_states)]
    cols = [np.arange(n_states)]
    vals = [kinetic]
    if coupling != 0.0:
        half_g = 0.5 * coupling
        for s in range(n_states):
            p, q = pair_a[s] + 1, pair_b[s] + 1
            i1, j1, ival = _candidate_pairs(int(q - p), int(p + q), n_modes)
            t = pair_index[i1 - 1, j1 - 1]  # -1 when outside the basis
            ok = t >= s
            t = t[ok]
            if len(t) == 0:
                continue
            rows.append(t)
            cols.append(np.full(len(t), s))
            vals.append(half_g * factor[s] * factor[t] * ival[ok] * inv_len)
    lower = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_states, n_states),
    ).tocsr()
    return (lower + sp.tril(lower, k=-1).T).tocsr()


def assemble_hamiltonian(
    basis: np.ndarray,
    coupling: float,
    mode_basis: ModeBasis,
    energy_cutoff: float | None = None,
) -> sp.csr_matrix:
    """Second-quantized Hamiltonian sum_k eps_k n_k + (g/2) sum I_ijkl a+_i a+_j a_l a_k.

    ``basis`` is an (S, M) occupation array (see :func:`build_fock_basis`);
    the result is a symmetric sparse matrix, diagonal at g = 0.  Passing the
    basis cutoff lets target states be pruned by energy before lookup.
    """
    basis = np.asarray(basis)
    if basis.ndim != 2 or basis.shape[0] == 0:
        raise InvalidParameterError("basis must be a non-empty (n_states, n_modes) array")
    n_states, n_modes = basis.shape
    if n_modes != mode_basis.n_modes:
        raise InvalidParameterError("basis and mode_basis disagree on the mode count")
    eps = mode_basis.energies
    inv_len = 1.0 / mode_basis.length
    cutoff = np.inf if energy_cutoff is None else float(energy_cutoff) + 1e-9

    total = int(basis[0].sum())
    if total == 2 and coupling != 0.0:
        return _assemble_two_particle(basis, coupling, mode_basis, cutoff)

    index = {tuple(row): s for s, row in enumerate(basis)}
    kinetic = basis @ eps
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    half_g = 0.5 * coupling
    cand_memo: dict[tuple[int, int], tuple] = {}

    if coupling != 0.0:
        for s in range(n_states):
            occ = basis[s]
            occ_list = occ.tolist()
            occupied = [m for m in range(n_modes) if occ_list[m] > 0]
            e_state = kinetic[s]
            for ai, k in enumerate(occupied):
                for l in occupied[ai:]:
                    same = k == l
                    if same and occ_list[k] < 2:
                        continue
                    amp1 = np.sqrt(occ_list[k] * (occ_list[l] - same))
                    m_src = 1.0 if same else 2.0
                    p, q = k + 1, l + 1
                    key = (q - p, p + q)
                    cand = cand_memo.get(key)
                    if cand is None:
                        cand = _candidate_pairs(key[0], key[1], n_modes)
                        cand_memo[key] = cand
                    i_arr, j_arr, ival_arr = cand
                    e_removed = e_state - eps[k] - eps[l]
                    keep = np.flatnonzero(
                        e_removed + eps[i_arr - 1] + eps[j_arr - 1] <= cutoff
                    )
                    for c in keep:
                        i0 = int(i_arr[c]) - 1
                        j0 = int(j_arr[c]) - 1
                        tgt = list(occ_list)
                        tgt[k] -= 1
                        tgt[l] -= 1
                        tgt[i0] += 1
                        tgt[j0] += 1
                        t = index.get(tuple(tgt))
                        if t is None or t < s:
                            continue
                        wi = occ_list[i0] - (i0 == k) - (i0 == l)
                        wj = occ_list[j0] - (j0 == k) - (j0 == l)
                        m_tgt = 1.0 if i0 == j0 else 2.0
                        amp2 = np.sqrt((wj + 1) * (wi + (i0 == j0) + 1))
                        rows.append(t)
                        cols.append(s)
                        vals.append(
                            half_g * m_src * m_tgt * (ival_arr[c] * inv_len) * amp1 * amp2
                        )

    lower = sp.coo_matrix((vals, (rows, cols)), shape=(n_states, n_states)).tocsr()
    lower += sp.diags(kinetic, format="csr")
    return (lower + sp.tril(lower, k=-1).T).tocsr()


def lowest_eigenvalues(
    hamiltonian,
    k: int,
    *,
    solver_tol: float = 1e-9,
    dense_threshold: int = 4500,
) -> np.ndarray:
    """The ``k`` smallest eigenvalues of a symmetric matrix, ascending.

    Dense LAPACK below ``dense_threshold``; above it a Lanczos-type
    iterative solver that touches the matrix only through matrix-vector
    products.  Iterative non-convergence raises :class:`ConvergenceError`
    carrying the residual count.
    """
    dim = hamiltonian.shape[0]
    if k < 1 or k > dim:
        raise InvalidParameterError(f"k must be in [1, {dim}], got {k}")
    if dim <= dense_threshold or k > max(1, dim - 2):
        dense = hamiltonian.toarray() if sp.issparse(hamiltonian) else np.asarray(hamiltonian)
        return eigvalsh(dense)[:k]
    # deterministic start vector keeps repeated runs byte-identical
    v0 = np.full(dim, 1.0 / np.sqrt(dim))
    try:
        vals = eigsh(
            hamiltonian,
            k=k,
            which="SA",
            tol=solver_tol,
            v0=v0,
            maxiter=max(10000, 40 * dim),
            return_eigenvectors=False,
        )
    except ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"iterative eigensolver converged only {len(exc.eigenvalues)}/{k} eigenvalues",
            residual=float(k - len(exc.eigenvalues)),
            payload=np.sort(exc.eigenvalues),
        ) from exc
    return np.sort(vals)
