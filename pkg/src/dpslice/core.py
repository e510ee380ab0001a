"""Model configuration and the shared state types for the mixture samplers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

LABEL_DTYPE = np.int64

LOG_2PI = math.log(2.0 * math.pi)

# simplex bookkeeping tolerance used by state validation
SIMPLEX_TOL = 1e-10


class InconsistentStateError(RuntimeError):
    """Sampler state violates a structural invariant (labels out of range,
    weights off the simplex, slice above its own component weight, ...)."""


class RunawayExtensionError(RuntimeError):
    """Component-extension loop exceeded its iteration cap."""

    def __init__(self, umin: float, cap: int):
        self.umin = umin
        self.cap = cap
        super().__init__(
            f"extension loop exceeded {cap} iterations (umin={umin:.3e})")


@dataclass(frozen=True)
class ModelConfig:
    """Univariate Normal mixture with fixed observation variance and a
    Normal base measure over atom locations.

    ``alpha_prior_rate`` left as None means "resolve to 3*log(n) when the
    data size is known" (see :func:`resolved_for`). ``alpha_fixed`` disables
    concentration updates entirely.
    """

    sigma2: float = 1.0
    base_mean: float = 0.0
    base_var: float = 1.0
    alpha_prior_shape: float = 3.0
    alpha_prior_rate: float | None = None
    alpha_fixed: float | None = None
    max_extension: int = 10_000_000

    def __post_init__(self) -> None:
        if self.sigma2 <= 0.0 or not math.isfinite(self.sigma2):
            raise ValueError(f"sigma2 must be positive and finite: {self.sigma2}")
        if self.base_var <= 0.0 or not math.isfinite(self.base_var):
            raise ValueError(f"base_var must be positive and finite: {self.base_var}")
        if not math.isfinite(self.base_mean):
            raise ValueError("base_mean must be finite")
        if self.alpha_prior_shape <= 0.0:
            raise ValueError("alpha_prior_shape must be positive")
        if self.alpha_prior_rate is not None and self.alpha_prior_rate <= 0.0:
            raise ValueError("alpha_prior_rate must be positive when given")
        if self.alpha_fixed is not None and self.alpha_fixed <= 0.0:
            raise ValueError("alpha_fixed must be positive when given")
        if self.max_extension < 1:
            raise ValueError("max_extension must be >= 1")

    def resolved_for(self, n: int) -> "ModelConfig":
        """Fill the data-size-dependent default prior rate 3*log(n)."""
        if self.alpha_prior_rate is not None or self.alpha_fixed is not None:
            return self
        if n < 2:
            # log(1) = 0 is not a usable rate; fall back to shape/1
            return replace(self, alpha_prior_rate=1.0)
        return replace(self, alpha_prior_rate=3.0 * math.log(n))


@dataclass(frozen=True)
class Partition:
    """Set partition of [n] in canonical form.

    labels[i] in {1..H} in order of first appearance; sizes[h-1] counts the
    members of block h.
    """

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def num_blocks(self) -> int:
        return int(self.sizes.size)

    def block_indices(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        bounds = np.cumsum(self.sizes)[:-1]
        return np.split(order, bounds)

    def validate(self) -> None:
        labels, sizes = self.labels, self.sizes
        if labels.ndim != 1 or labels.size == 0:
            raise InconsistentStateError("labels must be a nonempty 1-D vector")
        h = sizes.size
        if labels.min() != 1 or labels.max() != h:
            raise InconsistentStateError("labels must cover 1..H exactly")
        counts = np.bincount(labels, minlength=h + 1)[1:]
        if not np.array_equal(counts, sizes):
            raise InconsistentStateError("sizes disagree with labels")
        nxt = 1
        seen = set()
        for c in labels.tolist():
            if c not in seen:
                if c != nxt:
                    raise InconsistentStateError("labels not in order of appearance")
                seen.add(c)
                nxt += 1


def relabel_compact(raw_labels) -> Partition:
    """Canonicalize arbitrary positive labels to order-of-appearance 1..H."""
    part, _ = relabel_compact_with_map(raw_labels)
    return part


def relabel_compact_with_map(raw_labels) -> tuple[Partition, np.ndarray]:
    """As :func:`relabel_compact`, also returning the original label value of
    each new block (new block h came from ``origin[h-1]``)."""
    raw = np.asarray(raw_labels, dtype=LABEL_DTYPE)
    if raw.ndim != 1 or raw.size == 0:
        raise ValueError("labels must be a nonempty 1-D vector")
    if raw.min() < 1:
        raise ValueError("labels must be positive integers")
    uniq, first, inv = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty(uniq.size, dtype=LABEL_DTYPE)
    rank[order] = np.arange(1, uniq.size + 1, dtype=LABEL_DTYPE)
    labels = rank[inv]
    sizes = np.bincount(labels, minlength=uniq.size + 1)[1:]
    origin = uniq[order]
    return Partition(labels=labels, sizes=sizes), origin


@dataclass
class WeightState:
    """Instantiated mixture weights: one weight per occupied component,
    the stick weights instantiated beyond them, and the leftover mass."""

    allocated: np.ndarray
    tail: np.ndarray
    residual: float

    @property
    def k_total(self) -> int:
        return int(self.allocated.size + self.tail.size)

    def all_weights(self) -> np.ndarray:
        return np.concatenate([self.allocated, self.tail])

    def validate(self) -> None:
        w = self.all_weights()
        if w.size and w.min() <= 0.0:
            raise InconsistentStateError("weights must be strictly positive")
        if not 0.0 <= self.residual < 1.0:
            raise InconsistentStateError(f"residual out of range: {self.residual}")
        total = float(w.sum() + self.residual)
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise InconsistentStateError(f"weights + residual = {total} != 1")


@dataclass
class MixtureState:
    """Full sampler state. Fields other than (partition, alpha) are populated
    only by the samplers that persist them; a fresh chain starts with None."""

    partition: Partition
    alpha: float
    weights: WeightState | None = None
    atoms: np.ndarray | None = None
    slices: np.ndarray | None = None
    umin: float | None = None

    def validate(self) -> None:
        self.partition.validate()
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise InconsistentStateError(f"alpha must be positive: {self.alpha}")
        if self.weights is not None:
            self.weights.validate()
            if self.weights.allocated.size != self.partition.num_blocks:
                raise InconsistentStateError("one allocated weight per block required")
        if self.atoms is not None and self.weights is not None:
            if self.atoms.size not in (self.weights.k_total, self.partition.num_blocks):
                raise InconsistentStateError("atom vector length mismatch")
        if self.slices is not None:
            if self.weights is None:
                raise InconsistentStateError("slices without weights")
            if self.slices.size != self.partition.n:
                raise InconsistentStateError("one slice per observation required")
            wi = self.weights.allocated[self.partition.labels - 1]
            if np.any(self.slices <= 0.0) or np.any(self.slices >= wi):
                raise InconsistentStateError("need 0 < u_i < weight of own component")
            if self.umin is None or self.umin != float(self.slices.min()):
                raise InconsistentStateError("umin is not the minimum slice")


@dataclass(frozen=True)
class TraceRecord:
    """One sweep worth of trace output.

    ``k_total`` is the number of instantiated components the sweep worked
    with (truncation level); ``num_clusters`` the occupied count after the
    sweep. ``elapsed_ns`` covers the sweep body including its bookkeeping.
    """

    iteration: int
    k_total: int
    num_clusters: int
    loglik: float
    alpha: float
    elapsed_ns: int

    CSV_HEADER = "iter,K,H,loglik,alpha,elapsed_ns"

    def csv_row(self) -> str:
        return (f"{self.iteration},{self.k_total},{self.num_clusters},"
                f"{self.loglik!r},{self.alpha!r},{self.elapsed_ns}")


def log_likelihood(data: np.ndarray, labels: np.ndarray, atoms: np.ndarray,
                   cfg: ModelConfig) -> float:
    """Sum of log Normal(y_i; atom of its block, sigma2)."""
    y = np.asarray(data, dtype=float)
    lab = np.asarray(labels)
    if atoms is None:
        raise InconsistentStateError("no atoms instantiated")
    phi = np.asarray(atoms, dtype=float)
    if lab.size and int(lab.max()) > phi.size:
        raise InconsistentStateError(
            f"label {int(lab.max())} has no atom (only {phi.size} instantiated)")
    resid = y - phi[lab - 1]
    return float(-0.5 * (resid @ resid) / cfg.sigma2
                 - 0.5 * y.size * (LOG_2PI + math.log(cfg.sigma2)))


def state_log_likelihood(state: "MixtureState", data, cfg: ModelConfig) -> float:
    """log_likelihood evaluated at a full sampler state."""
    return log_likelihood(data, state.partition.labels, state.atoms, cfg)


def rand_index(labels_p, labels_q) -> float:
    """Fraction of the n-choose-2 pairs on which two clusterings agree."""
    p = np.asarray(labels_p)
    q = np.asarray(labels_q)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("label vectors must be 1-D with equal length")
    n = p.size
    if n < 2:
        raise ValueError("need at least two items")
    pc = relabel_compact(p).labels - 1
    qc = relabel_compact(q).labels - 1
    hp = int(pc.max()) + 1
    hq = int(qc.max()) + 1
    cont = np.bincount(pc * hq + qc, minlength=hp * hq).reshape(hp, hq)

    def pairs2(v):
        v = v.astype(float)
        return float((v * (v - 1.0)).sum() / 2.0)

    total = n * (n - 1) / 2.0
    same_both = pairs2(cont.ravel())
    same_p = pairs2(cont.sum(axis=1))
    same_q = pairs2(cont.sum(axis=0))
    agreements = total - same_p - same_q + 2.0 * same_both
    return float(agreements / total)
