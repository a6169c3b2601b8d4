"""Iterative interference alignment with per-stream zero-forcing receivers.

The solver alternates between the forward and reverse directions, each time
picking the least-interfered subspace from the residual interference
covariance. Precoders are driven purely by the cross channels, so the
effective direct gains stay unit-variance Gaussian; combiners are rebuilt at
the end to zero-force both inter-user and inter-stream interference.
"""
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, crandn, rng_stream
from .config import NetworkConfig
from .errors import InfeasibleConfigError, NonConvergenceError, RankDeficiencyError

__all__ = [
    "SolverOptions",
    "IaSolution",
    "BatchIaResult",
    "solve_ia",
    "solve_ia_batch",
    "zf_combiners",
    "effective_gains",
    "alignment_residuals",
]


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-9  # residual interference power at convergence
    max_iter: int = 5000
    seed: int = 0  # seeds the random unitary initialization
    rank_rtol: float = 1e-3  # zero-forcing rank-deficiency threshold
    track_history: bool = False


@dataclass
class IaSolution:
    """Precoders F (K,Nt,d), combiners W (K,Nr,d), and derived quantities."""

    F: np.ndarray
    W: np.ndarray
    leakage: float
    gains: np.ndarray  # (K, d) effective direct gains
    iterations: int
    converged: bool
    leakage_history: np.ndarray | None = None


@dataclass
class BatchIaResult:
    F: np.ndarray  # (B, K, Nt, d)
    W: np.ndarray  # (B, K, Nr, d)
    leakage: np.ndarray  # (B,)
    gains: np.ndarray  # (B, K, d)
    iterations: np.ndarray  # (B,)
    converged: np.ndarray  # (B,) bool
    leakage_history: np.ndarray | None = None  # (n_iter, B) when tracked


def _fix_phase(V: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant entry is real-positive."""
    mag = np.abs(V)
    significant = mag > 1e-8 * np.max(mag, axis=-2, keepdims=True)
    first = np.argmax(significant, axis=-2)
    pivot = np.take_along_axis(V, first[..., None, :], axis=-2)
    phase = pivot / np.maximum(np.abs(pivot), 1e-300)
    return V * phase.conj()


def _min_eigvecs(Q: np.ndarray, d: int) -> np.ndarray:
    """Eigenvectors of the d smallest eigenvalues of stacked Hermitian Q."""
    n = Q.shape[-1]
    if n == 2 and d == 1:
        a = Q[..., 0, 0].real
        c = Q[..., 1, 1].real
        b = Q[..., 0, 1]
        half = 0.5 * (a - c)
        r = np.sqrt(half * half + (b * b.conj()).real)
        lam = 0.5 * (a + c) - r
        # subtract the larger diagonal entry to avoid cancellation
        upper = a >= c
        v0 = np.where(upper, b, lam - c)
        v1 = np.where(upper, lam - a, b.conj())
        norm = np.sqrt((v0 * v0.conj()).real + (v1 * v1.conj()).real)
        degenerate = norm < 1e-150
        v0 = np.where(degenerate, 1.0 + 0.0j, v0)
        v1 = np.where(degenerate, 0.0 + 0.0j, v1)
        norm = np.where(degenerate, 1.0, norm)
        return np.stack([v0 / norm, v1 / norm], axis=-1)[..., None]
    _, vecs = np.linalg.eigh(Q)  # ascending eigenvalues
    return vecs[..., :d]


_OFFDIAG_CACHE: dict[int, np.ndarray] = {}


def _offdiag(K: int) -> np.ndarray:
    if K not in _OFFDIAG_CACHE:
        _OFFDIAG_CACHE[K] = 1.0 - np.eye(K)
    return _OFFDIAG_CACHE[K]


def _cross_leakage(W, Hf, K):
    proj = np.einsum("bird,bikre->bikde", W.conj(), Hf)
    return np.einsum("bikde,bikde,ik->b", proj, proj.conj(), _offdiag(K)).real


def solve_ia_batch(H: np.ndarray, cfg: NetworkConfig, opts: SolverOptions | None = None) -> BatchIaResult:
    """Alternating leakage minimization over a batch of channel draws.

    H has shape (B, K, K, Nr, Nt). Items that fail to reach ``opts.tol``
    within ``opts.max_iter`` iterations are reported with converged=False
    rather than raising, so Monte Carlo sweeps survive stragglers.
    """
    opts = opts or SolverOptions()
    B, K, _, Nr, Nt = H.shape
    d = cfg.d
    off = _offdiag(K)

    rng = rng_stream(opts.seed)
    F0 = crandn(rng, B, K, Nt, d)
    F, _ = np.linalg.qr(F0)

    F_out = np.empty_like(F)
    W_out = np.empty((B, K, Nr, d), dtype=complex)
    leak_out = np.full(B, np.inf)
    iter_out = np.zeros(B, dtype=int)
    hist = [] if opts.track_history else None

    active = np.arange(B)
    Ha, Fa = H, F
    for it in range(1, opts.max_iter + 1):
        Hf = np.einsum("bikrt,bktd->bikrd", Ha, Fa)
        Q = np.einsum("bikrd,biksd,ik->birs", Hf, Hf.conj(), off)
        W = _min_eigvecs(Q, d)
        leak = _cross_leakage(W, Hf, K)
        if hist is not None:
            snap = np.full(B, np.nan)
            snap[active] = leak
            hist.append(snap)
        done = leak <= opts.tol
        if it == opts.max_iter:
            done = np.ones_like(done)
        if done.any():
            idx = active[done]
            F_out[idx] = Fa[done]
            W_out[idx] = W[done]
            leak_out[idx] = leak[done]
            iter_out[idx] = it
            keep = ~done
            active, Ha, Fa, W = active[keep], Ha[keep], Fa[keep], W[keep]
            if active.size == 0:
                break
        Gw = np.einsum("bikrt,bird->biktd", Ha.conj(), W)
        R = np.einsum("biktd,bikud,ik->bktu", Gw, Gw.conj(), off)
        Fa = _min_eigvecs(R, d)

    converged = leak_out <= opts.tol
    # final combiners: per-stream zero-forcing of every interfering direction
    W_zf, zf_ok = _zf_combiners_batch(H, F_out, cfg, opts.rank_rtol)
    resid = alignment_residuals(H, F_out, W_zf)
    leak_final = np.einsum("bimkl,bimkl->b", resid, resid).real
    converged &= zf_ok & (leak_final <= opts.tol)
    F_out = _fix_phase(F_out)
    W_zf = _fix_phase(W_zf)
    diag = np.arange(K)
    gains = np.einsum("birm,birt,bitm->bim", W_zf.conj(), H[:, diag, diag], F_out)
    return BatchIaResult(
        F=F_out,
        W=W_zf,
        leakage=leak_final,
        gains=gains,
        iterations=iter_out,
        converged=converged,
        leakage_history=np.array(hist) if hist is not None else None,
    )


def _zf_combiners_batch(H, F, cfg, rank_rtol):
    """Null-space combiners for all streams; returns (W, ok_mask)."""
    B, K = H.shape[0], cfg.K
    d, Nr = cfg.d, cfg.Nr
    Hf = np.einsum("bikrt,bktd->bikrd", H, F)
    # covariance of every effective direction seen at rx i, then remove the
    # desired stream's own column per (i, m)
    Qfull = np.einsum("bikrd,biksd->birs", Hf, Hf.conj())
    diag = np.arange(K)
    own = Hf[:, diag, diag]  # (B, K, Nr, d) direct-stream directions
    Qm = Qfull[:, :, None] - np.einsum("birm,bism->bimrs", own, own.conj())
    W = _min_eigvecs(Qm, 1)[..., 0]  # (B, K, d, Nr)
    # rank check: smallest eigenvalue must be tiny relative to the largest
    lam_min = np.einsum("bimr,bimrs,bims->bim", W.conj(), Qm, W).real
    lam_max = np.einsum("bimrr->bim", Qm).real  # trace upper-bounds lam_max
    ok = np.all(lam_min <= (rank_rtol**2) * np.maximum(lam_max, 1e-300), axis=(1, 2))
    return W.swapaxes(-1, -2), ok


def zf_combiners(F: np.ndarray, channels: ChannelSet, cfg: NetworkConfig, rank_rtol: float = 1e-3) -> np.ndarray:
    """Unit-norm combiners orthogonal to every interfering direction.

    Raises RankDeficiencyError when the interference at some receiver spans
    the full receive space, in which case zero-forcing would be meaningless.
    """
    W, ok = _zf_combiners_batch(channels.H[None], F[None], cfg, rank_rtol)
    if not ok[0]:
        raise RankDeficiencyError(
            "interference spans the full receive space at some receiver; "
            "no zero-forcing direction exists at the requested tolerance"
        )
    return _fix_phase(W[0])


def alignment_residuals(H: np.ndarray, F: np.ndarray, W: np.ndarray) -> np.ndarray:
    """|w_i^m* H_ik f_k^l| for every stream pair, own stream zeroed.

    Batched: H (B,K,K,Nr,Nt), F (B,K,Nt,d), W (B,K,Nr,d) -> (B,K,d,K,d).
    """
    r = np.einsum("birm,bikrt,bktl->bimkl", W.conj(), H, F)
    K, d = F.shape[1], F.shape[3]
    own = np.einsum("ik,ml->imkl", np.eye(K), np.eye(d)).astype(bool)
    r = np.abs(r)
    r[:, own] = 0.0
    return r


def solve_ia(channels: ChannelSet, cfg: NetworkConfig, opts: SolverOptions | None = None) -> IaSolution:
    """Alignment solution for one channel realization.

    Only the cross channels enter the precoder updates; the direct channels
    appear solely in the final combiners (inter-stream zero-forcing) and in
    the effective gains.
    """
    if not cfg.ia_feasible:
        raise InfeasibleConfigError(
            f"cfg K={cfg.K} Nt={cfg.Nt} Nr={cfg.Nr} d={cfg.d} violates the "
            f"proper-system rule d*(K+1) <= Nt+Nr"
        )
    opts = opts or SolverOptions()
    res = solve_ia_batch(channels.H[None], cfg, opts)
    sol = IaSolution(
        F=res.F[0],
        W=res.W[0],
        leakage=float(res.leakage[0]),
        gains=res.gains[0],
        iterations=int(res.iterations[0]),
        converged=bool(res.converged[0]),
        leakage_history=None if res.leakage_history is None else res.leakage_history[:, 0],
    )
    if not sol.converged:
        raise NonConvergenceError(
            f"leakage {sol.leakage:.3e} still above tol {opts.tol:.1e} "
            f"after {opts.max_iter} iterations",
            solution=sol,
        )
    return sol


def effective_gains(sol: IaSolution, channels: ChannelSet) -> np.ndarray:
    """Complex per-stream direct gains w_i^m* H_ii f_i^m, shape (K, d)."""
    K = channels.H.shape[0]
    diag = np.arange(K)
    return np.einsum("irm,irt,itm->im", sol.W.conj(), channels.H[diag, diag], sol.F)
