"""Eigendecomposition, spectrum classification, photon profiles and state shapes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .errors import NotHermitianError
from .lattice import AtomSpec, BandEdges, BasisLayout

HERMITIAN_TOL = 1e-12


class Label(str, enum.Enum):
    LOWER_BOUND = "LOWER_BOUND"
    LOWER_BAND = "LOWER_BAND"
    GAP = "GAP"
    UPPER_BAND = "UPPER_BAND"
    UPPER_BOUND = "UPPER_BOUND"

    @property
    def is_band(self) -> bool:
        return self in (Label.LOWER_BAND, Label.UPPER_BAND)


class Shape(str, enum.Enum):
    SPLITTING = "SPLITTING"
    COMBINING = "COMBINING"
    DELOCALIZED = "DELOCALIZED"


@dataclass(frozen=True)
class ShapeThresholds:
    """Knobs of :func:`shape_classify`; all are fractions."""

    peak_floor: float = 0.05
    dip_ratio: float = 0.5
    min_footprint: float = 0.5
    pad_cells: int = 1


DEFAULT_SHAPE_THRESHOLDS = ShapeThresholds()


@dataclass(frozen=True)
class EigenSystem:
    """Ascending energies with eigenvectors stored as the columns of ``vectors``."""

    energies: np.ndarray
    vectors: np.ndarray
    labels: tuple[Label, ...] | None = None
    ambiguous: tuple[bool, ...] | None = None

    def __len__(self) -> int:
        return len(self.energies)

    def state(self, k: int) -> np.ndarray:
        return self.vectors[:, k]

    def with_labels(self, labels, ambiguous) -> "EigenSystem":
        return EigenSystem(self.energies, self.vectors, tuple(labels), tuple(ambiguous))

    def indices(self, label: Label) -> np.ndarray:
        if self.labels is None:
            raise ValueError("eigensystem is not classified")
        return np.array([k for k, lab in enumerate(self.labels) if lab == label], dtype=int)

    @property
    def gap_indices(self) -> np.ndarray:
        return self.indices(Label.GAP)


def check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> float:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    asym = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if asym > tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian: max |H - H^dag| = {asym:.3e}")
    return asym


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # Make the largest-magnitude entry of each column real and positive (first index wins ties).
    mags = np.abs(vectors)
    pivots = np.argmax(mags >= mags.max(axis=0, keepdims=True) * (1 - 1e-9), axis=0)
    cols = np.arange(vectors.shape[1])
    ref = vectors[pivots, cols]
    phase = ref / np.abs(ref)
    out = vectors / phase[None, :]
    if np.isrealobj(vectors):
        out = out.real
    else:
        out[pivots, cols] = out[pivots, cols].real
    return out


@numba.njit(cache=True)
def jacobi_inplace(a, v, tol, max_sweeps):
    """Cyclic Jacobi sweeps on real symmetric ``a``; rotations are accumulated into ``v``.

    On return ``a`` is diagonal to ``tol * ||a||_F``.  Returns the sweep count,
    or -1 without convergence.
    """
    n = a.shape[0]
    norm2 = 0.0
    for i in range(n):
        for j in range(n):
            norm2 += a[i, j] * a[i, j]
    limit = tol * tol * norm2
    # rotations this small cannot change any entry at working precision
    skip = 1e-3 * tol * math.sqrt(norm2) / n
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        if off <= limit:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                a[p, p] -= t * apq
                a[q, q] += t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = a[k, p]
                        akq = a[k, q]
                        nkp = c * akp - s * akq
                        nkq = s * akp + c * akq
                        a[k, p] = nkp
                        a[p, k] = nkp
                        a[k, q] = nkq
                        a[q, k] = nkq
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return -1


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Returns unsorted eigenvalues and eigenvector columns.
    """
    work = np.array(a, dtype=float)
    v = np.eye(work.shape[0])
    if jacobi_inplace(work, v, tol, max_sweeps) < 0:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.diag(work).copy(), v


def eigendecompose(h: np.ndarray, method: str = "lapack") -> EigenSystem:
    """Full Hermitian eigendecomposition with ascending energies.

    ``method="lapack"`` calls ``numpy.linalg.eigh``; ``method="jacobi"`` uses
    :func:`jacobi_eigh` (real symmetric input only).  Eigenvector phases are
    fixed so that identical input gives identical output.
    """
    h = np.asarray(h)
    check_hermitian(h)
    if np.iscomplexobj(h) and not np.any(h.imag):
        h = h.real
    if method == "lapack":
        energies, vectors = np.linalg.eigh(h)
    elif method == "jacobi":
        if np.iscomplexobj(h):
            raise ValueError("jacobi method supports real symmetric matrices only")
        energies, vectors = jacobi_eigh(h)
        order = np.argsort(energies, kind="stable")
        energies, vectors = energies[order], vectors[:, order]
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return EigenSystem(np.asarray(energies, dtype=float), _fix_phases(vectors))


def classify(es: EigenSystem, edges: BandEdges, margin: float = 1e-6) -> EigenSystem:
    """Label every state by where its energy sits relative to the band edges.

    States within ``margin`` of an edge get the adjacent band label and are
    flagged in ``ambiguous``.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    lo_min, lo_max = edges.lower_band
    up_min, up_max = edges.upper_band
    labels, ambiguous = [], []
    for e in es.energies:
        near = min(abs(e - lo_min), abs(e - lo_max), abs(e - up_min), abs(e - up_max)) <= margin
        if e < lo_min - margin:
            lab = Label.LOWER_BOUND
        elif e > up_max + margin:
            lab = Label.UPPER_BOUND
        elif abs(e) < up_min - margin:
            lab = Label.GAP
        elif e < 0:
            lab = Label.LOWER_BAND
        else:
            lab = Label.UPPER_BAND
        labels.append(lab)
        ambiguous.append(bool(near))
    return es.with_labels(labels, ambiguous)


@dataclass(frozen=True)
class PhotonDistribution:
    """Probabilities of one state split by basis kind.

    ``sites`` follows the interleaved (A,1),(B,1),... order; ``cells`` sums A and B.
    """

    sites: np.ndarray
    atoms: np.ndarray
    vacuum: float = 0.0
    L: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "L", len(self.sites) // 2)

    @property
    def cells(self) -> np.ndarray:
        return self.sites.reshape(self.L, 2).sum(axis=1)

    @property
    def photon_total(self) -> float:
        return float(self.sites.sum())

    @property
    def total(self) -> float:
        return float(self.sites.sum() + self.atoms.sum() + self.vacuum)


def photon_distribution(psi: np.ndarray, layout: BasisLayout) -> PhotonDistribution:
    psi = np.asarray(psi)
    if psi.shape[-1] != layout.dim:
        raise ValueError(f"state of length {psi.shape[-1]} does not match layout dim {layout.dim}")
    p = np.abs(psi) ** 2
    vac = float(p[0]) if layout.include_vacuum else 0.0
    return PhotonDistribution(sites=p[layout.photon_slice], atoms=p[layout.atom_slice], vacuum=vac)


def overlap(a: np.ndarray, b: np.ndarray) -> complex:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"states live in different layouts: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2`` for normalized states of the same layout."""
    return abs(overlap(a, b)) ** 2


@dataclass(frozen=True)
class ShapeReport:
    dominant_atom: int | None
    footprint_probability: float
    peak_count: int
    shape: Shape


def _window_sites(atom: AtomSpec, L: int, pad: int) -> np.ndarray:
    lo, hi = min(atom.n, atom.m) - pad, max(atom.n, atom.m) + pad
    cells = (np.arange(lo, hi + 1) - 1) % L
    return np.stack([2 * cells, 2 * cells + 1], axis=1).ravel()


def _significant_peaks(profile: np.ndarray, floor: float, dip_ratio: float) -> list[int]:
    padded = np.concatenate([[-np.inf], profile, [-np.inf]])
    peaks = [
        i for i in range(len(profile))
        if profile[i] >= floor and padded[i + 1] > padded[i] and padded[i + 1] >= padded[i + 2]
    ]
    merged: list[int] = []
    for p in peaks:
        if merged:
            prev = merged[-1]
            dip = profile[prev:p + 1].min()
            if dip >= dip_ratio * min(profile[prev], profile[p]):
                if profile[p] > profile[prev]:
                    merged[-1] = p
                continue
        merged.append(p)
    return merged


def shape_classify(
    dist: PhotonDistribution,
    atoms: Sequence[AtomSpec],
    thresholds: ShapeThresholds = DEFAULT_SHAPE_THRESHOLDS,
) -> ShapeReport:
    """Decide whether a localized photon profile is split over the two legs or combined.

    The dominant atom is the one whose padded footprint holds the most photon
    probability.  Inside that window, local maxima above ``peak_floor`` of the
    global maximum are merged unless a dip below ``dip_ratio`` of the smaller
    peak separates them.  Two or more surviving peaks mean SPLITTING, one means
    COMBINING.  Less than ``min_footprint`` of the photon weight in the window
    means DELOCALIZED.  ``dominant_atom`` is 1-based.
    """
    sites = np.asarray(dist.sites, dtype=float)
    total = sites.sum()
    if not atoms or total <= 0:
        return ShapeReport(None, 0.0, 0, Shape.DELOCALIZED)
    L = len(sites) // 2
    windows = [_window_sites(a, L, thresholds.pad_cells) for a in atoms]
    mass = [sites[np.unique(w)].sum() / total for w in windows]
    k = int(np.argmax(mass))
    footprint = float(mass[k])
    profile = sites[windows[k]]
    peaks = _significant_peaks(profile, thresholds.peak_floor * sites.max(), thresholds.dip_ratio)
    if footprint < thresholds.min_footprint:
        shape = Shape.DELOCALIZED
    elif len(peaks) >= 2:
        shape = Shape.SPLITTING
    else:
        shape = Shape.COMBINING
    return ShapeReport(k + 1, footprint, len(peaks), shape)
