"""Convergent Cross Mapping: delay-embedding nearest-neighbor
cross-prediction whose skill converges with library size when the mapped
variable leaves an imprint on the embedded one.

Skill for "x from y" is the Pearson correlation between x and its estimate
reconstructed from y's shadow manifold; by the usual CCM reading, recovering
x from y's manifold indicates that x influences y.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import TooShortError, ZeroVarianceError
from .timeseries import TimeSeries

__all__ = ["DelayEmbedding", "CcmResult", "delay_embed", "cross_map", "ccm_pair"]


@dataclass(frozen=True)
class DelayEmbedding:
    """Takens reconstruction: point i is (x(i), x(i+tau), ..., x(i+(E-1)tau)).

    source_indices maps each point to the time of its last coordinate,
    i + (E-1)*tau, the index at which cross-map estimates are aligned.
    """

    E: int
    tau: int
    points: np.ndarray
    source_indices: np.ndarray

    def __post_init__(self):
        if self.points.shape[1] != self.E:
            raise ValueError("points must have E columns")
        if len(self.points) != len(self.source_indices):
            raise ValueError("one source index per point required")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def theiler_window(self) -> int:
        return (self.E - 1) * self.tau


@dataclass(frozen=True)
class CcmResult:
    """Cross-map skill per library size for both directions.

    skill_xy is the skill of estimating x from y's shadow manifold;
    skill_yx the reverse.
    """

    lib_sizes: np.ndarray
    skill_xy: np.ndarray
    skill_yx: np.ndarray

    def __post_init__(self):
        if not (len(self.lib_sizes) == len(self.skill_xy) == len(self.skill_yx)):
            raise ValueError("arrays must share length")
        for s in (self.skill_xy, self.skill_yx):
            if np.any(np.abs(s[np.isfinite(s)]) > 1.0 + 1e-12):
                raise ValueError("skills must lie in [-1, 1]")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("lib_size,skill_xy,skill_yx\n")
        for i in range(len(self.lib_sizes)):
            buf.write(
                f"{int(self.lib_sizes[i])},{float(self.skill_xy[i])!r},"
                f"{float(self.skill_yx[i])!r}\n"
            )
        return buf.getvalue()


def delay_embed(ts: TimeSeries, E: int, tau: int) -> DelayEmbedding:
    """Embed a series into E dimensions with delay tau."""
    if E < 1 or tau < 1:
        raise ValueError("E and tau must be >= 1")
    n = len(ts)
    span = (E - 1) * tau
    if n <= span:
        raise TooShortError(f"need length > (E-1)*tau = {span}, got {n}")
    count = n - span
    idx = np.arange(count)[:, None] + np.arange(E)[None, :] * tau
    return DelayEmbedding(
        E=E,
        tau=tau,
        points=ts.values[idx],
        source_indices=np.arange(count) + span,
    )


def _simplex_weights(d: np.ndarray) -> np.ndarray:
    """exp(-d_i/d_1) weights, renormalized; all mass on exact matches when
    the nearest distance is zero. Works on (k,) or (n, k) arrays."""
    d = np.atleast_2d(d)
    d1 = d[:, :1]
    zero_near = d1 == 0.0
    safe = np.where(zero_near, 1.0, d1)
    w = np.where(zero_near, (d == 0.0).astype(np.float64), np.exp(-d / safe))
    return w / w.sum(axis=1, keepdims=True)


def cross_map(
    source_emb: DelayEmbedding,
    target: TimeSeries,
    lib_size: int,
    seed: int = 0,
) -> float:
    """Simplex cross-map skill using a random library of embedding points.

    Each point is estimated from its E+1 nearest library neighbors
    (excluding points within the Theiler window of the query), weighted by
    exp(-d_i/d_1) and renormalized; ties at d_1 = 0 collapse to uniform
    weight over the exact matches. Returns the Pearson correlation between
    estimated and actual target values at the aligned time indices.
    """
    n_points = len(source_emb)
    k = source_emb.E + 1
    if lib_size < k + 1:
        raise TooShortError(f"lib_size must be >= E+2 = {k + 1}")
    if lib_size > n_points:
        raise TooShortError(f"lib_size {lib_size} exceeds {n_points} points")
    rng = np.random.default_rng(seed)
    lib = (
        np.sort(rng.choice(n_points, size=lib_size, replace=False))
        if lib_size < n_points
        else np.arange(n_points)
    )
    tree = cKDTree(source_emb.points[lib])
    # query extra neighbors so that Theiler-window removal still leaves k
    theiler = source_emb.theiler_window
    kq = min(k + 2 * theiler + 2, lib_size)
    dists, nbrs = tree.query(source_emb.points, k=kq, workers=-1)
    if kq == 1:
        dists = dists[:, None]
        nbrs = nbrs[:, None]
    lib_ids = lib[nbrs]
    target_vals = target.values[source_emb.source_indices]
    if np.ptp(target_vals) == 0.0:
        raise ZeroVarianceError("target series is constant")
    valid = np.abs(lib_ids - np.arange(n_points)[:, None]) > theiler
    # stable argsort pushes the valid columns first, preserving distance order
    pos = np.argsort(~valid, axis=1, kind="stable")[:, :k]
    rows = np.arange(n_points)[:, None]
    d = dists[rows, pos]
    cand = lib_ids[rows, pos]
    estimates = (_simplex_weights(d) * target_vals[cand]).sum(axis=1)
    # rows whose capped query ran out of admissible neighbors: brute force
    for i in np.nonzero(valid.sum(axis=1) < k)[0]:
        ok = np.abs(lib - i) > theiler
        if not np.any(ok):
            raise TooShortError("no admissible neighbors outside Theiler window")
        d_all = np.linalg.norm(source_emb.points[lib[ok]] - source_emb.points[i], axis=1)
        order = np.argsort(d_all, kind="stable")[:k]
        w = _simplex_weights(d_all[order])[0]
        estimates[i] = np.dot(w, target_vals[lib[ok][order]])
    if np.ptp(estimates) == 0.0:
        return 0.0
    return float(np.corrcoef(estimates, target_vals)[0, 1])


def ccm_pair(
    x: TimeSeries,
    y: TimeSeries,
    E: int = 2,
    tau: int = 1,
    lib_sizes=(250, 500, 1000, 2000, 4000),
    n_replicates: int = 2,
    seed: int = 0,
) -> CcmResult:
    """Cross-map skill curves in both directions, averaged over random
    library draws."""
    if len(x) != len(y):
        raise TooShortError("series must have equal length")
    emb_x = delay_embed(x, E, tau)
    emb_y = delay_embed(y, E, tau)
    sizes = np.array(sorted(int(s) for s in lib_sizes))
    if np.any(sizes > len(emb_x)):
        raise TooShortError("a library size exceeds the embedding size")
    skill_xy = np.empty(sizes.size)
    skill_yx = np.empty(sizes.size)
    for i, size in enumerate(sizes):
        acc_xy = 0.0
        acc_yx = 0.0
        for rep in range(n_replicates):
            rep_seed = int(
                np.random.SeedSequence([seed, int(size), rep]).generate_state(1)[0]
            )
            acc_xy += cross_map(emb_y, x, size, seed=rep_seed)
            acc_yx += cross_map(emb_x, y, size, seed=rep_seed + 1)
        skill_xy[i] = acc_xy / n_replicates
        skill_yx[i] = acc_yx / n_replicates
    return CcmResult(lib_sizes=sizes, skill_xy=skill_xy, skill_yx=skill_yx)
