#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Convex quadratic programs: modelling, epigraph helpers and solvers.

Programs have the form

    minimize    1/2 z'Hz + f'z + offset
    subject to  A_eq z = b_eq,  A_in z <= b_in.

They are assembled from affine expressions with a QpBuilder and solved
with an operator splitting (ADMM) method, or with any other backend
from the register below.

"""
import warnings
from collections import namedtuple
import numpy as np
import scipy.linalg
import scipy.optimize

from robustdd.misc import get_register, ModelError

# qp backends by name, see solve_qp
backends, register_backend = get_register()

KktResiduals = namedtuple(
    "KktResiduals", ["stationarity", "primal", "dual", "complementarity"])


class Expr:
    """
    Affine expression sum_v M_v z_v + const, with one row per entry.

    Supports +, -, scalar * expr, matrix @ expr and row indexing, so that
    constraints can be written like ``H @ alpha - x_bar``.

    Parameters
    ----------
    terms : dict
        Variable name -> coefficient matrix of shape (rows, size of variable).
    const : ndarray
        Constant part, shape (rows, ).

    """
    # let numpy hand binary operators over to this class
    __array_ufunc__ = None

    def __init__(self, terms, const):
        self.terms = terms
        self.const = np.asarray(const, dtype=float)

    @property
    def rows(self):
        return self.const.shape[0]

    @classmethod
    def constant(cls, value):
        return cls({}, np.atleast_1d(np.asarray(value, dtype=float)))

    def _coerce(self, other):
        if isinstance(other, Expr):
            return other
        other = np.asarray(other, dtype=float)
        return Expr({}, np.broadcast_to(other, (self.rows, )).copy())

    def __add__(self, other):
        other = self._coerce(other)
        if other.rows != self.rows:
            raise ValueError(f"Can not add expressions with {self.rows} and {other.rows} rows")
        terms = dict(self.terms)
        for name, mat in other.terms.items():
            terms[name] = terms[name] + mat if name in terms else mat
        return Expr(terms, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return Expr({name: -mat for name, mat in self.terms.items()}, -self.const)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        factor = np.asarray(other, dtype=float)
        if factor.ndim == 0:
            return Expr({n: factor * m for n, m in self.terms.items()}, factor * self.const)
        if factor.shape != (self.rows, ):
            raise ValueError(f"Can only scale rows elementwise, got shape {factor.shape}")
        return Expr({n: factor[:, None] * m for n, m in self.terms.items()},
                    factor * self.const)

    __rmul__ = __mul__

    def __rmatmul__(self, matrix):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        if matrix.shape[1] != self.rows:
            raise ValueError(
                f"Matrix of shape {matrix.shape} does not fit an expression with {self.rows} rows")
        return Expr({n: matrix @ m for n, m in self.terms.items()}, matrix @ self.const)

    def __getitem__(self, key):
        idx = np.atleast_1d(np.arange(self.rows)[key])
        return Expr({n: m[idx] for n, m in self.terms.items()}, self.const[idx])

    def __len__(self):
        return self.rows

    def sum(self):
        """ Sum of all rows as a one row expression. """
        return np.ones((1, self.rows)) @ self

    def value(self, values):
        """ Evaluate for a dict of variable values. """
        out = self.const.copy()
        for name, mat in self.terms.items():
            out += mat @ values[name]
        return out


class QuadraticProgram:
    """
    A convex QP in the form 1/2 z'Hz + f'z + offset, A_eq z = b_eq, A_in z <= b_in.

    Parameters
    ----------
    H : ndarray
        Cost matrix, symmetrized on construction.
    f : ndarray
    A_eq, b_eq, A_in, b_in : ndarray
    variables : dict, optional
        Variable name -> slice into z.
    offset : float
        Constant part of the cost.
    eq_labels, in_labels : list, optional
        One label per constraint row.

    """
    def __init__(self, H, f, A_eq=None, b_eq=None, A_in=None, b_in=None,
                 variables=None, offset=0., eq_labels=None, in_labels=None):
        H = np.atleast_2d(np.asarray(H, dtype=float))
        self.H = 0.5 * (H + H.T)
        self.f = np.asarray(f, dtype=float).reshape(-1)
        n_vars = self.f.size
        if self.H.shape != (n_vars, n_vars):
            raise ModelError(f"H must be {n_vars} x {n_vars}, got {self.H.shape}")

        def rows(mat, vec, name):
            if mat is None:
                return np.zeros((0, n_vars)), np.zeros(0)
            mat = np.asarray(mat, dtype=float).reshape(-1, n_vars)
            vec = np.asarray(vec, dtype=float).reshape(-1)
            if mat.shape[0] != vec.size:
                raise ModelError(f"{name}: {mat.shape[0]} rows but {vec.size} right hand sides")
            return mat, vec

        self.A_eq, self.b_eq = rows(A_eq, b_eq, "equalities")
        self.A_in, self.b_in = rows(A_in, b_in, "inequalities")
        self.variables = {"z": slice(0, n_vars)} if variables is None else variables
        self.offset = float(offset)
        self.eq_labels = eq_labels or [f"eq[{i}]" for i in range(self.A_eq.shape[0])]
        self.in_labels = in_labels or [f"in[{i}]" for i in range(self.A_in.shape[0])]

    @property
    def n_vars(self):
        return self.f.size

    def objective(self, z):
        return float(0.5 * z @ self.H @ z + self.f @ z + self.offset)

    def extract(self, z):
        """ Split a solution vector into the named variables. """
        return {name: z[slc].copy() for name, slc in self.variables.items()}

    def violations(self, z):
        """
        Largest violation of the equality and inequality rows.

        Returns
        -------
        value : float
        label : str or None
            Label of the most violated row.

        """
        candidates = []
        if self.A_eq.shape[0]:
            viol = np.abs(self.A_eq @ z - self.b_eq)
            i = int(np.argmax(viol))
            candidates.append((viol[i], self.eq_labels[i]))
        if self.A_in.shape[0]:
            viol = self.A_in @ z - self.b_in
            i = int(np.argmax(viol))
            candidates.append((max(viol[i], 0.), self.in_labels[i]))
        if not candidates:
            return 0., None
        return max(candidates, key=lambda c: c[0])

    def dump(self, file):
        """
        Write the program as labelled dense blocks in plain text.

        Parameters
        ----------
        file : str
            Path of the text file.

        """
        with open(file, "w") as f_out:
            f_out.write("# 1/2 z'Hz + f'z + offset, A_eq z = b_eq, A_in z <= b_in\n")
            f_out.write(f"offset {self.offset!r}\n")
            f_out.write("variables " + " ".join(
                f"{name}:{slc.start}:{slc.stop}" for name, slc in self.variables.items()) + "\n")
            for label, block in (("H", self.H), ("f", self.f[None, :]),
                                 ("A_eq", self.A_eq), ("b_eq", self.b_eq[None, :]),
                                 ("A_in", self.A_in), ("b_in", self.b_in[None, :])):
                f_out.write(f"[{label}] {block.shape[0]} {block.shape[1]}\n")
                np.savetxt(f_out, block, fmt="%.17g")


class QpBuilder:
    """
    Collects variables, cost terms and constraints of a QP.

    Examples
    --------
    >>> qp = QpBuilder()
    >>> z = qp.variable("z", 2)
    >>> qp.add_quadratic(z)
    >>> qp.less_equal(-z, -1.)
    >>> program = qp.build()

    """
    def __init__(self):
        self._sizes = {}
        self._quadratic = []
        self._linear = []
        self._eq = []
        self._in = []

    def variable(self, name, size):
        """ New variable block, returned as the identity expression. """
        if name in self._sizes:
            raise ValueError(f"Variable {name} exists already")
        self._sizes[name] = int(size)
        return Expr({name: np.eye(size)}, np.zeros(size))

    def add_quadratic(self, expr, weight=1.):
        """ Add expr' W expr to the cost. W is a scalar, a diagonal or a PSD matrix. """
        weight = np.asarray(weight, dtype=float)
        if weight.ndim == 0:
            weight = weight * np.eye(expr.rows)
        elif weight.ndim == 1:
            weight = np.diag(weight)
        self._quadratic.append((expr, weight))

    def add_linear(self, expr, weight=1.):
        """ Add weight' expr to the cost. """
        weight = np.broadcast_to(np.asarray(weight, dtype=float), (expr.rows, ))
        self._linear.append((expr, weight))

    def equal(self, expr, rhs=0., label="eq"):
        """ expr == rhs, rowwise. """
        self._eq.append((expr - rhs, label))

    def less_equal(self, expr, rhs=0., label="in"):
        """ expr <= rhs, rowwise. """
        self._in.append((expr - rhs, label))

    def _full(self, expr, slices, n_vars):
        mat = np.zeros((expr.rows, n_vars))
        for name, coeff in expr.terms.items():
            mat[:, slices[name]] += coeff
        return mat

    def _stack(self, items, slices, n_vars):
        if not items:
            return None, None, []
        mats, rhs, labels = [], [], []
        for expr, label in items:
            mats.append(self._full(expr, slices, n_vars))
            rhs.append(-expr.const)
            labels.extend(f"{label}[{i}]" for i in range(expr.rows))
        return np.vstack(mats), np.concatenate(rhs), labels

    def build(self):
        """ Assemble the QuadraticProgram. """
        slices, start = {}, 0
        for name, size in self._sizes.items():
            slices[name] = slice(start, start + size)
            start += size
        n_vars = start

        H, f, offset = np.zeros((n_vars, n_vars)), np.zeros(n_vars), 0.
        for expr, weight in self._quadratic:
            mat = self._full(expr, slices, n_vars)
            H += 2 * mat.T @ weight @ mat
            f += 2 * mat.T @ weight @ expr.const
            offset += expr.const @ weight @ expr.const
        for expr, weight in self._linear:
            f += self._full(expr, slices, n_vars).T @ weight
            offset += weight @ expr.const

        A_eq, b_eq, eq_labels = self._stack(self._eq, slices, n_vars)
        A_in, b_in, in_labels = self._stack(self._in, slices, n_vars)
        return QuadraticProgram(H, f, A_eq, b_eq, A_in, b_in, variables=slices,
                                offset=offset, eq_labels=eq_labels, in_labels=in_labels)


def epigraph_abs(builder, expr, name):
    """
    Scalar t >= ||expr||_1 via s_i >= |expr_i| and t = sum s_i.

    Returns
    -------
    Expr
        The one row expression of t.

    """
    s = builder.variable(name + "_abs", expr.rows)
    t = builder.variable(name, 1)
    builder.less_equal(expr - s, 0., label=name + "_pos")
    builder.less_equal(-expr - s, 0., label=name + "_neg")
    builder.equal(t - s.sum(), 0., label=name + "_sum")
    return t


def epigraph_inf(builder, expr, name):
    """ Scalar t >= ||expr||_inf via -t <= expr_i <= t. """
    t = builder.variable(name, 1)
    ones = np.ones((expr.rows, 1))
    builder.less_equal(expr - ones @ t, 0., label=name + "_pos")
    builder.less_equal(-expr - ones @ t, 0., label=name + "_neg")
    return t


class QpSolution:
    """
    Result of a solver run.

    Attributes
    ----------
    z : ndarray
        The last iterate (optimizer if status is 'optimal').
    objective : float
    status : str
        'optimal', 'infeasible' or 'max_iter'.
    kkt_residuals : KktResiduals
    iterations : int
    values : dict
        Named variable blocks of z.
    y : ndarray or None
        Multipliers of the stacked rows [A_eq; A_in].

    """
    def __init__(self, z, objective, status, kkt_residuals, iterations, values, y=None):
        self.z = z
        self.objective = objective
        self.status = status
        self.kkt_residuals = kkt_residuals
        self.iterations = iterations
        self.values = values
        self.y = y

    def __repr__(self):
        return (f"QpSolution(status={self.status}, objective={self.objective:.6g}, "
                f"iterations={self.iterations})")


def check_psd(H):
    """ Raise a ModelError if H has a clearly negative eigenvalue. """
    if H.size == 0:
        return
    eig_min = scipy.linalg.eigvalsh(H, subset_by_index=[0, 0])[0]
    if eig_min < -1e-9 * max(1., np.max(np.abs(H))):
        raise ModelError(f"Cost matrix is not positive semidefinite (eigenvalue {eig_min:.3g})")


def _stacked(qp):
    """ Rows of the program as l <= A z <= u. """
    A = np.vstack([qp.A_eq, qp.A_in])
    lower = np.concatenate([qp.b_eq, np.full(qp.A_in.shape[0], -np.inf)])
    upper = np.concatenate([qp.b_eq, qp.b_in])
    return A, lower, upper


def kkt_residuals(P, q, A, lower, upper, x, z, y):
    """
    Residuals of the KKT conditions of min 1/2 x'Px + q'x s.t. l <= Ax <= u.

    z is a point of the box [l, u] paired with the multipliers y.

    """
    stationarity = P @ x + q + A.T @ y
    primal = A @ x - z
    # y_i > 0 needs a finite upper, y_i < 0 a finite lower bound
    dual = np.where(np.isinf(upper), np.maximum(y, 0.), 0.) \
        + np.where(np.isinf(lower), np.maximum(-y, 0.), 0.)
    gap_upper = np.where(np.isinf(upper), 0., np.maximum(y, 0.) * (upper - np.where(np.isinf(upper), 0., z)))
    gap_lower = np.where(np.isinf(lower), 0., np.maximum(-y, 0.) * (np.where(np.isinf(lower), 0., z) - lower))
    return KktResiduals(*(float(np.max(np.abs(r), initial=0.)) for r in (
        stationarity, primal, dual, np.maximum(np.abs(gap_upper), np.abs(gap_lower)))))


@register_backend
class AdmmSolver:
    """
    Operator splitting QP solver (ADMM on l <= Az <= u).

    Ruiz equilibration of the KKT matrix, over-relaxation, adaptive step
    size rho and polishing of the final active set. Residuals are measured
    on the equilibrated problem.

    Parameters
    ----------
    tol : float
        Absolute tolerance of all KKT residuals.
    max_iter : int
        Maximum number of ADMM iterations.
    sigma : float
        Proximal regularization of the x update.
    rho : float
        Initial step size.
    alpha : float
        Relaxation parameter in (0, 2).
    scaling_iter : int
        Number of Ruiz equilibration passes.
    check_interval : int
        Termination and infeasibility are checked every that many iterations.
    polish_interval : int
        Try polishing every that many iterations.
    eps_infeasible : float
        Tolerance of the primal infeasibility certificate.

    """
    def __init__(self, tol=1e-7, max_iter=200000, sigma=1e-6, rho=0.1, alpha=1.6,
                 scaling_iter=15, check_interval=25, polish_interval=200,
                 eps_infeasible=1e-5):
        self.tol = tol
        self.max_iter = max_iter
        self.sigma = sigma
        self.rho = rho
        self.alpha = alpha
        self.scaling_iter = scaling_iter
        self.check_interval = check_interval
        self.polish_interval = polish_interval
        self.eps_infeasible = eps_infeasible
        self.rho_min, self.rho_max = 1e-6, 1e6
        self.rho_eq_factor = 1e3

    def _scale(self, P, q, A, lower, upper):
        """ Ruiz equilibration, returns the scaled data and D, E, c. """
        n, m = P.shape[0], A.shape[0]
        d_vec, e_vec, c = np.ones(n), np.ones(m), 1.
        P, q, A = P.copy(), q.copy(), A.copy()

        def limited(norms):
            norms = np.where(norms < 1e-4, 1., norms)
            return np.minimum(norms, 1e4)

        for _ in range(self.scaling_iter):
            col_norms = np.max(np.abs(np.vstack([P, A])), axis=0, initial=0.)
            row_norms = np.max(np.abs(A), axis=1, initial=0.)
            delta_d = 1. / np.sqrt(limited(col_norms))
            delta_e = 1. / np.sqrt(limited(row_norms))
            P = delta_d[:, None] * P * delta_d[None, :]
            A = delta_e[:, None] * A * delta_d[None, :]
            q = delta_d * q
            d_vec *= delta_d
            e_vec *= delta_e

            cost_norm = max(np.mean(np.max(np.abs(P), axis=0, initial=0.)),
                            np.max(np.abs(q), initial=0.))
            gamma = 1. / min(max(cost_norm, 1e-4), 1e4)
            P, q, c = gamma * P, gamma * q, gamma * c

        with np.errstate(invalid="ignore"):
            return P, q, A, e_vec * lower, e_vec * upper, d_vec, e_vec, c

    def _rho_vector(self, rho, lower, upper):
        rho_vec = np.full(lower.shape, rho)
        rho_vec[lower == upper] = self.rho_eq_factor * rho
        rho_vec[np.isinf(lower) & np.isinf(upper)] = self.rho_min
        return rho_vec

    def _factor(self, P, A, rho_vec):
        kkt = P + self.sigma * np.eye(P.shape[0]) + A.T @ (rho_vec[:, None] * A)
        return scipy.linalg.cho_factor(kkt)

    def _is_infeasible(self, A, lower, upper, delta_y):
        norm_dy = np.max(np.abs(delta_y), initial=0.)
        if norm_dy < 1e-12:
            return False
        eps = self.eps_infeasible * norm_dy
        if np.max(np.abs(A.T @ delta_y), initial=0.) > eps:
            return False
        pos, neg = np.maximum(delta_y, 0.), np.minimum(delta_y, 0.)
        if np.any((pos > eps) & np.isinf(upper)) or np.any((neg < -eps) & np.isinf(lower)):
            return False
        support = np.sum(np.where(np.isinf(upper), 0., upper) * pos) \
            + np.sum(np.where(np.isinf(lower), 0., lower) * neg)
        return support < -eps

    def _polish(self, P, q, A, lower, upper, x, z, y):
        """
        Solve the equality constrained problem of the guessed active set.

        Returns
        -------
        tuple or None
            (x, z, y) of the polished point, None if the linear solve fails.

        """
        active_low = (z - lower < -y) & np.isfinite(lower)
        active_up = (upper - z < y) & np.isfinite(upper)
        active = active_low | active_up
        idx = np.flatnonzero(active)
        bounds = np.where(active_up, upper, lower)[idx]
        A_act = A[idx]
        n, k = P.shape[0], idx.size
        delta = 1e-9
        kkt = np.block([[P, A_act.T], [A_act, np.zeros((k, k))]])
        kkt_reg = kkt + np.diag(np.concatenate([np.full(n, delta), np.full(k, -delta)]))
        rhs = np.concatenate([-q, bounds])
        try:
            lu = scipy.linalg.lu_factor(kkt_reg)
        except (ValueError, np.linalg.LinAlgError):
            return None
        sol = scipy.linalg.lu_solve(lu, rhs)
        for _ in range(5):
            sol = sol + scipy.linalg.lu_solve(lu, rhs - kkt @ sol)
        if not np.all(np.isfinite(sol)):
            return None
        x_pol = sol[:n]
        y_pol = np.zeros_like(y)
        y_pol[idx] = sol[n:]
        z_pol = np.clip(A @ x_pol, lower, upper)
        return x_pol, z_pol, y_pol

    def solve(self, qp, x0=None):
        """
        Solve a QuadraticProgram.

        Parameters
        ----------
        qp : QuadraticProgram
        x0 : ndarray, optional
            Warm start of the primal variables.

        Returns
        -------
        QpSolution

        """
        check_psd(qp.H)
        A_raw, lower_raw, upper_raw = _stacked(qp)
        P, q, A, lower, upper, d_vec, e_vec, c = self._scale(
            qp.H, qp.f, A_raw, lower_raw, upper_raw)
        n, m = P.shape[0], A.shape[0]

        x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float) / d_vec
        z = np.clip(A @ x, lower, upper)
        y = np.zeros(m)
        rho = self.rho
        rho_vec = self._rho_vector(rho, lower, upper)
        factor = self._factor(P, A, rho_vec)

        status, best = "max_iter", None
        iteration = 0
        for iteration in range(1, self.max_iter + 1):
            y_prev = y
            rhs = self.sigma * x - q + A.T @ (rho_vec * z - y)
            x_tilde = scipy.linalg.cho_solve(factor, rhs)
            z_tilde = A @ x_tilde
            x = self.alpha * x_tilde + (1 - self.alpha) * x
            z_relaxed = self.alpha * z_tilde + (1 - self.alpha) * z
            z = np.clip(z_relaxed + y / rho_vec, lower, upper)
            y = y + rho_vec * (z_relaxed - z)

            if iteration % self.check_interval:
                continue
            res = kkt_residuals(P, q, A, lower, upper, x, z, y)
            if max(res) <= self.tol:
                status, best = "optimal", (x, z, y, res)
                polished = self._polish(P, q, A, lower, upper, x, z, y)
                if polished is not None:
                    res_pol = kkt_residuals(P, q, A, lower, upper, *polished)
                    if max(res_pol) <= max(res):
                        best = (*polished, res_pol)
                break
            if self._is_infeasible(A, lower, upper, y - y_prev):
                status, best = "infeasible", (x, z, y, res)
                break
            if iteration % self.polish_interval == 0:
                polished = self._polish(P, q, A, lower, upper, x, z, y)
                if polished is not None:
                    res_pol = kkt_residuals(P, q, A, lower, upper, *polished)
                    if max(res_pol) <= self.tol:
                        status, best = "optimal", (*polished, res_pol)
                        break

            # adapt the step size to balance primal and dual residuals
            prim_norm = max(np.max(np.abs(A @ x), initial=0.), np.max(np.abs(z), initial=0.), 1e-10)
            dual_norm = max(np.max(np.abs(P @ x), initial=0.), np.max(np.abs(A.T @ y), initial=0.),
                            np.max(np.abs(q), initial=0.), 1e-10)
            ratio = (res.primal / prim_norm) / max(res.stationarity / dual_norm, 1e-30)
            rho_new = float(np.clip(rho * np.sqrt(ratio), self.rho_min, self.rho_max))
            if rho_new > 5 * rho or rho_new < rho / 5:
                rho = rho_new
                rho_vec = self._rho_vector(rho, lower, upper)
                factor = self._factor(P, A, rho_vec)

        if best is None:
            best = (x, z, y, kkt_residuals(P, q, A, lower, upper, x, z, y))
            warnings.warn(f"ADMM stopped after {self.max_iter} iterations, "
                          f"residuals {tuple(best[3])}")
        x, _, y, res = best
        z_orig = d_vec * x
        y_orig = e_vec * y / c
        return QpSolution(z_orig, qp.objective(z_orig), status, res, iteration,
                          qp.extract(z_orig), y=y_orig)


@register_backend
class OsqpSolver:
    """
    Adapter for the external osqp package.

    Residuals are recomputed on the unscaled problem.

    """
    def __init__(self, tol=1e-7, max_iter=200000):
        self.tol = tol
        self.max_iter = max_iter

    def solve(self, qp, x0=None):
        import osqp
        import scipy.sparse as sparse

        check_psd(qp.H)
        A, lower, upper = _stacked(qp)
        solver = osqp.OSQP()
        solver.setup(P=sparse.csc_matrix(np.triu(qp.H)), q=qp.f, A=sparse.csc_matrix(A),
                     l=lower, u=upper, eps_abs=self.tol, eps_rel=0., eps_prim_inf=1e-5,
                     max_iter=self.max_iter, polish=True, verbose=False)
        if x0 is not None:
            solver.warm_start(x=x0)
        result = solver.solve()
        status_val = result.info.status_val
        if status_val in (1, 2):
            status = "optimal"
        elif status_val in (-3, 3):
            status = "infeasible"
        else:
            status = "max_iter"
        x = np.asarray(result.x, dtype=float)
        y = np.asarray(result.y, dtype=float)
        if status == "infeasible" or not np.all(np.isfinite(x)):
            x = np.nan_to_num(x)
            y = np.nan_to_num(y)
        z = np.clip(A @ x, lower, upper)
        res = kkt_residuals(qp.H, qp.f, A, lower, upper, x, z, y)
        return QpSolution(x, qp.objective(x), status, res, result.info.iter,
                          qp.extract(x), y=y)


def solve_qp(qp, tol=1e-7, max_iter=200000, backend="AdmmSolver", x0=None):
    """
    Solve a QuadraticProgram with one of the registered backends.

    Parameters
    ----------
    qp : QuadraticProgram
    tol : float
        KKT tolerance.
    max_iter : int
    backend : str
        Name in the backend register, 'AdmmSolver' or 'OsqpSolver'.
    x0 : ndarray, optional
        Warm start.

    Returns
    -------
    QpSolution

    """
    if backend not in backends:
        raise KeyError(f"Unknown qp backend {backend}, must be one of {sorted(backends)}")
    return backends[backend](tol=tol, max_iter=max_iter).solve(qp, x0=x0)


QpBenchmark = namedtuple("QpBenchmark", ["count", "all_optimal", "max_objective_error", "max_kkt"])


def random_box_qp(rng, n_vars):
    """ Strictly convex QP with box constraints, and its bounds. """
    M = rng.normal(size=(n_vars, n_vars))
    H = M @ M.T + np.eye(n_vars)
    f = rng.normal(scale=5., size=n_vars)
    lb = -rng.uniform(0.1, 1., size=n_vars)
    ub = rng.uniform(0.1, 1., size=n_vars)
    A_in = np.vstack([np.eye(n_vars), -np.eye(n_vars)])
    b_in = np.concatenate([ub, -lb])
    return QuadraticProgram(H, f, A_in=A_in, b_in=b_in), lb, ub


def box_reference(qp, lb, ub):
    """ Reference optimum of a box constrained QP by projected quasi newton. """
    result = scipy.optimize.minimize(
        qp.objective, np.zeros(qp.n_vars), jac=lambda z: qp.H @ z + qp.f,
        method="L-BFGS-B", bounds=list(zip(lb, ub)),
        options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 20000})
    return result.x, qp.objective(result.x)


def benchmark_box_qps(count=100, max_vars=50, seed=42, **solver_kwargs):
    """
    Solve random box constrained QPs and compare with box_reference.

    Parameters
    ----------
    count : int
    max_vars : int
        The number of variables is drawn from 1 .. max_vars.
    seed : int
    solver_kwargs
        Passed to solve_qp.

    Returns
    -------
    QpBenchmark
        max_objective_error is the largest |J - J_ref| / max(|J_ref|, 1),
        max_kkt the largest reported KKT residual.

    """
    rng = np.random.default_rng(seed)
    all_optimal, max_error, max_kkt = True, 0., 0.
    for _ in range(count):
        qp, lb, ub = random_box_qp(rng, int(rng.integers(1, max_vars + 1)))
        solution = solve_qp(qp, **solver_kwargs)
        _, reference = box_reference(qp, lb, ub)
        all_optimal = all_optimal and solution.status == "optimal"
        max_error = max(max_error, abs(solution.objective - reference) / max(abs(reference), 1.))
        max_kkt = max(max_kkt, max(solution.kkt_residuals))
    return QpBenchmark(count, all_optimal, float(max_error), float(max_kkt))
