"""Linear solvers: conjugate gradients and cached Helmholtz factorizations.

The pressure Poisson system is solved matrix-free by preconditioned CG on
the symmetric positive-semidefinite operator -L (Neumann Laplacian), with
the constant null space removed by subtracting the mean from the iterate and
residual every iteration.  The preconditioner is the exact spectral inverse
on the uniform rectangular grid (a cosine-transform solve), so CG typically
converges in a couple of iterations while the residual contract is still
enforced explicitly.

The implicit diffusion systems (sigma I - dt L) are symmetric M-matrices;
they are solved by a cached sparse LU factorization, which keeps solution
errors at machine-precision scale, small enough that the discrete maximum
principles survive with the round-off slacks used by the invariant checks.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.fft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NoConvergence
from .grid import Grid2D

#: residual may exceed its target by this factor before NoConvergence
ACCEPT_FACTOR = 10.0
#: iterations without residual improvement before CG is declared stalled
STALL_WINDOW = 60


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a.ravel(), b.ravel()))


def cg(apply_a, b, x0=None, *, target, max_iter, precond=None, pin_mean=False):
    """Conjugate gradients with a max-norm residual target.

    ``target`` is an absolute bound on ||b - A x||_inf.  Returns
    ``(x, res_inf, iterations)``.  If the target is unreachable (stall or
    iteration cap) the best iterate is accepted when its residual is within
    ACCEPT_FACTOR of the target, otherwise NoConvergence is raised.
    """
    x = np.zeros_like(b) if x0 is None else x0.astype(float, copy=True)
    if pin_mean:
        x -= x.mean()
    r = b - apply_a(x)
    if pin_mean:
        r -= r.mean()
    res = float(np.max(np.abs(r))) if r.size else 0.0
    if res <= target:
        return x, res, 0

    z = precond(r) if precond is not None else r.copy()
    p = z.copy()
    rz = _dot(r, z)
    best_res, best_x = res, x.copy()
    last_improve = 0
    k = 0

    for k in range(1, max_iter + 1):
        ap = apply_a(p)
        pap = _dot(p, ap)
        if pap <= 0.0:
            break
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        if pin_mean:
            x -= x.mean()
            r -= r.mean()
        res = float(np.max(np.abs(r)))
        if res < best_res:
            best_res, best_x = res, x.copy()
            last_improve = k
        if res <= target:
            return x, res, k
        if k - last_improve >= STALL_WINDOW:
            break
        z = precond(r) if precond is not None else r.copy()
        rz_new = _dot(r, z)
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p

    if best_res <= ACCEPT_FACTOR * target:
        return best_x, best_res, k
    raise NoConvergence(
        f"CG residual {best_res:.3e} above target {target:.3e} after {k} iterations",
        iterations=k,
        last_residual=best_res,
    )


# ---------------------------------------------------------------------------
# Spectral (DCT) machinery for the Neumann Laplacian
# ---------------------------------------------------------------------------


def neumann_eigenvalues(grid: Grid2D) -> np.ndarray:
    """Eigenvalues of the 5-point Neumann Laplacian in the DCT-II basis.

    Entry (ky, kx) corresponds to the mode cos(pi kx (i+1/2)/nx) *
    cos(pi ky (j+1/2)/ny); all eigenvalues are <= 0 and (0, 0) is the
    constant null mode.
    """
    lam_x = -(2.0 / grid.hx**2) * (1.0 - np.cos(np.pi * np.arange(grid.nx) / grid.nx))
    lam_y = -(2.0 / grid.hy**2) * (1.0 - np.cos(np.pi * np.arange(grid.ny) / grid.ny))
    return lam_y[:, None] + lam_x[None, :]


def poisson_dct_solve(rhs: np.ndarray, eig: np.ndarray) -> np.ndarray:
    """Exact mean-free solve of L q = rhs - mean(rhs) on the uniform grid."""
    coef = scipy.fft.dctn(rhs, type=2, norm="ortho")
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(eig != 0.0, coef / eig, 0.0)
    return scipy.fft.idctn(coef, type=2, norm="ortho")


# ---------------------------------------------------------------------------
# Sparse Neumann Laplacian and cached Helmholtz factorizations
# ---------------------------------------------------------------------------


def _tridiag_neumann(n: int, h: float) -> sp.csr_matrix:
    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / (h * h)


@lru_cache(maxsize=4)
def neumann_laplacian_matrix(grid: Grid2D) -> sp.csr_matrix:
    """Sparse 5-point Neumann Laplacian for C-order flattened (ny, nx) cells."""
    lx = _tridiag_neumann(grid.nx, grid.hx)
    ly = _tridiag_neumann(grid.ny, grid.hy)
    ix = sp.identity(grid.nx, format="csr")
    iy = sp.identity(grid.ny, format="csr")
    return (sp.kron(iy, lx) + sp.kron(ly, ix)).tocsr()


@lru_cache(maxsize=8)
def _helmholtz_factor(grid: Grid2D, sigma: float, dt: float):
    lap = neumann_laplacian_matrix(grid)
    a = (sigma * sp.identity(lap.shape[0], format="csr") - dt * lap).tocsr()
    return a, spla.splu(a.tocsc())


def solve_helmholtz(rhs: np.ndarray, grid: Grid2D, sigma: float, dt: float, tol: float) -> np.ndarray:
    """Solve (sigma I - dt L) x = rhs on cell values via cached sparse LU.

    The residual is verified against tol*(1 + ||rhs||_inf); a direct solve
    sits far below that for any sane system, so a failure here means the
    matrix assembly and the stencil disagree.
    """
    a, lu = _helmholtz_factor(grid, sigma, dt)
    b = rhs.ravel()
    x = lu.solve(b)
    res = float(np.max(np.abs(a @ x - b)))
    bound = tol * (1.0 + float(np.max(np.abs(b))))
    if res > bound:
        raise NoConvergence(
            f"Helmholtz LU residual {res:.3e} above {bound:.3e}",
            iterations=1,
            last_residual=res,
        )
    return x.reshape(rhs.shape)
