"""Independent reference implementations used as test oracles.

Everything here deliberately avoids the package's own fast paths: dense
Kronecker/entrywise operator construction, brute-force enumeration sums,
scipy expm/quadrature, and generic QP solvers. Slow and obvious on
purpose.
"""

import itertools

import numpy as np
import scipy.integrate
import scipy.linalg

_H1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def dense_single_qubit(gate, qubit, n):
    """Full 2^n operator for a 1-qubit gate; qubit 0 = least significant bit."""
    return np.kron(np.eye(2 ** (n - 1 - qubit)), np.kron(gate, np.eye(2**qubit)))


def dense_two_qubit(gate4, q1, q2, n):
    """Full 2^n operator for a 4x4 gate on (q1, q2), q1 = high local bit."""
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    mask = ~((1 << q1) | (1 << q2))
    for row in range(dim):
        for col in range(dim):
            if (row & mask) != (col & mask):
                continue
            r = 2 * ((row >> q1) & 1) + ((row >> q2) & 1)
            c = 2 * ((col >> q1) & 1) + ((col >> q2) & 1)
            out[row, col] = gate4[r, c]
    return out


def dense_hadamard_all(n):
    out = np.array([[1.0]])
    for _ in range(n):
        out = np.kron(out, _H1)
    return out.astype(complex)


def enum_iqp_phases(x, lam, alpha):
    """Direct double-loop evaluation of the phase vector."""
    d = len(x)
    phases = np.zeros(2**d)
    for b in range(2**d):
        s = [1.0 if ((b >> j) & 1) == 0 else -1.0 for j in range(d)]
        total = sum(lam * x[j] * s[j] for j in range(d))
        for j in range(d):
            for k in range(j + 1, d):
                total += lam**alpha * x[j] * x[k] * s[j] * s[k]
        phases[b] = total
    return phases


def dense_embed(family, x, lam, alpha=2.0, n_layers=4, boundary="open"):
    """Dense-matrix construction of every feature-map state."""
    x = np.asarray(x, dtype=float)
    d = len(x)
    e0 = np.zeros(2**d, dtype=complex)
    e0[0] = 1.0
    if family in ("iqp", "classical_iqp"):
        diag = np.diag(np.exp(-1j * enum_iqp_phases(x, lam, alpha)))
        h_all = dense_hadamard_all(d)
        chain = diag @ h_all
        if family == "iqp":
            chain = diag @ h_all @ chain
        return chain @ e0
    if family == "product_z":
        op = np.eye(2**d, dtype=complex)
        for j in range(d):
            gate = scipy.linalg.expm(-1j * lam * x[j] * _SZ)
            op = dense_single_qubit(gate, j, d) @ op
        return op @ e0
    if family == "heisenberg":
        exchange = 0.25 * (np.kron(_SX, _SX) + np.kron(_SY, _SY) + np.kron(_SZ, _SZ))
        field = np.kron(_SZ, np.eye(2))
        layer = np.eye(2**d, dtype=complex)
        for j in range(d - 1):
            gate = scipy.linalg.expm(-1j * (exchange + lam * x[j] * field))
            layer = dense_two_qubit(gate, j, j + 1, d) @ layer
        if boundary == "periodic":
            gate = scipy.linalg.expm(-1j * (exchange + lam * x[d - 1] * field))
            layer = dense_two_qubit(gate, d - 1, 0, d) @ layer
        else:
            gate = scipy.linalg.expm(-1j * lam * x[d - 1] * _SZ)
            layer = dense_single_qubit(gate, d - 1, d) @ layer
        state = e0
        for _ in range(n_layers):
            state = layer @ state
        return state
    raise ValueError(family)


def classical_iqp_kernel_value(x1, x2, lam, alpha):
    """Closed-form polynomial-time fidelity of the single-round map."""
    p1 = enum_iqp_phases(x1, lam, alpha)
    p2 = enum_iqp_phases(x2, lam, alpha)
    return abs(np.mean(np.exp(-1j * (p1 - p2)))) ** 2


def gennorm_abs_moment(beta, k):
    """E|x|^k under density beta/(2*Gamma(1/beta)) * exp(-|x|^beta), by quadrature."""
    from math import gamma

    norm = beta / (2.0 * gamma(1.0 / beta))
    integrand = lambda t: 2.0 * norm * t**k * np.exp(-(t**beta))
    value, _ = scipy.integrate.quad(integrand, 0.0, np.inf)
    return value


# ---------------------------------------------------------------------------
# Quadratic-programming references for the SVM dual.


def qp_enumeration(kernel, y, C, tol=1e-9):
    """Brute-force active-set enumeration of the SVM dual KKT system.

    Tries every (lower/free/upper) assignment, solves the equality-
    constrained system for the free block, and keeps KKT-feasible
    candidates. Exponential: use only for N <= ~9.
    """
    kernel = np.asarray(kernel, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    q_mat = np.outer(y, y) * kernel
    best = None
    for assignment in itertools.product((0, 1, 2), repeat=n):
        free = [i for i, a in enumerate(assignment) if a == 1]
        upper = [i for i, a in enumerate(assignment) if a == 2]
        alpha = np.zeros(n)
        alpha[upper] = C
        if free:
            size = len(free)
            lhs = np.zeros((size + 1, size + 1))
            lhs[:size, :size] = q_mat[np.ix_(free, free)]
            lhs[:size, size] = y[free]
            lhs[size, :size] = y[free]
            rhs = np.zeros(size + 1)
            rhs[:size] = 1.0 - q_mat[np.ix_(free, upper)] @ (C * np.ones(len(upper)))
            rhs[size] = -C * y[upper].sum()
            try:
                sol = np.linalg.solve(lhs, rhs)
            except np.linalg.LinAlgError:
                continue
            alpha[free] = sol[:size]
            nu = sol[size]
            if alpha[free].min() < -tol or alpha[free].max() > C + tol:
                continue
        else:
            if abs(y @ alpha) > tol * max(1.0, C * n):
                continue
            nu = None
        station = q_mat @ alpha - 1.0
        if nu is None:
            # No free block: nu is any value in the interval allowed by the
            # bound constraints (lower alphas need station + nu*y >= 0,
            # upper alphas need <= 0).
            lo, hi = -np.inf, np.inf
            for i in range(n):
                at_lower = alpha[i] <= tol
                if (at_lower and y[i] > 0) or (not at_lower and y[i] < 0):
                    lo = max(lo, -station[i] * y[i])
                else:
                    hi = min(hi, -station[i] * y[i])
            if lo > hi + 1e-9:
                continue
            if np.isinf(lo) and np.isinf(hi):
                nu = 0.0
            elif np.isinf(lo):
                nu = hi
            elif np.isinf(hi):
                nu = lo
            else:
                nu = 0.5 * (lo + hi)
        ok = True
        for i in range(n):
            g = station[i] + nu * y[i]
            if alpha[i] <= tol and g < -1e-7:
                ok = False
                break
            if alpha[i] >= C - tol and g > 1e-7:
                ok = False
                break
            if tol < alpha[i] < C - tol and abs(g) > 1e-7:
                ok = False
                break
        if not ok:
            continue
        objective = 0.5 * alpha @ q_mat @ alpha - alpha.sum()
        if best is None or objective < best[0] - 1e-12:
            best = (objective, alpha.copy(), float(nu))
    if best is None:
        raise RuntimeError("enumeration found no KKT point")
    _, alpha, nu = best
    return alpha, nu


def qp_cvxopt(kernel, y, C):
    """Generic interior-point QP solve of the SVM dual via cvxopt."""
    from cvxopt import matrix, solvers

    kernel = np.asarray(kernel, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    q_mat = np.outer(y, y) * kernel
    P = matrix(q_mat + 1e-12 * np.eye(n))
    q = matrix(-np.ones(n))
    G = matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = matrix(np.concatenate([np.zeros(n), C * np.ones(n)]))
    A = matrix(y[None, :])
    b = matrix(np.zeros(1))
    opts = {"show_progress": False, "abstol": 1e-10, "reltol": 1e-10, "feastol": 1e-10}
    sol = solvers.qp(P, q, G, h, A, b, options=opts)
    if sol["status"] != "optimal":
        raise RuntimeError(f"cvxopt status {sol['status']}")
    alpha = np.asarray(sol["x"]).ravel()
    nu = float(np.asarray(sol["y"]).ravel()[0])
    return alpha, nu


def qp_decisions(kernel, y, alpha, bias):
    return np.asarray(kernel, dtype=float) @ (alpha * np.asarray(y, dtype=float)) + bias
