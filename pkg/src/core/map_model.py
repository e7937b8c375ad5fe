"""
Detection quality model

Empirical patch-detection mAP as a cubic in the uplinked frame resolution,
plus a least-squares fitter to regenerate the curve from measured
(resolution, mAP) pairs.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from utils.logger import get_logger

logger = get_logger()


class MapDomainError(ValueError):
    """Resolution outside the curve's domain"""


class FitError(ValueError):
    """Too few distinct resolutions to determine the polynomial"""


PAIRS_HEADER = ('resolution_ppi', 'map')


@dataclass(frozen=True)
class MapCurve:
    """
    Polynomial mAP(p), coefficients highest power first

    Values are clamped to ``clamp_range``; evaluation outside ``domain`` is rejected.
    """
    coeffs: Tuple[float, ...] = (4.5e-6, -4.7e-3, 1.6, -90.0)
    domain: Tuple[float, float] = (64.0, 416.0)
    clamp_range: Tuple[float, float] = (0.0, 100.0)
    fit_rms: Optional[float] = None

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise ValueError("MapCurve needs at least one coefficient")
        if not self.domain[0] < self.domain[1]:
            raise ValueError(f"Empty curve domain: {self.domain}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def raw(self, p: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Unclamped polynomial value, no domain check"""
        return np.polyval(self.coeffs, p)

    def check_domain(self, p: Union[float, np.ndarray]) -> None:
        lo, hi = self.domain
        values = np.asarray(p, dtype=np.float64)
        if np.any(values < lo) or np.any(values > hi) or np.any(~np.isfinite(values)):
            raise MapDomainError(f"Resolution {p} outside [{lo}, {hi}] ppi")


DEFAULT_CURVE = MapCurve()


def map_score(p: float, curve: MapCurve = DEFAULT_CURVE) -> float:
    """
    Detection mAP (0-100) for a frame of resolution p

    Raises:
        MapDomainError: p outside the curve domain
    """
    curve.check_domain(p)
    lo, hi = curve.clamp_range
    return float(min(max(curve.raw(float(p)), lo), hi))


def map_scores(p: np.ndarray, curve: MapCurve = DEFAULT_CURVE) -> np.ndarray:
    """Vectorized map_score"""
    curve.check_domain(p)
    lo, hi = curve.clamp_range
    return np.clip(curve.raw(np.asarray(p, dtype=np.float64)), lo, hi)


def fit_curve(pairs: Iterable[Tuple[float, float]], degree: int = 3,
              domain: Optional[Tuple[float, float]] = None) -> MapCurve:
    """
    Ordinary least-squares polynomial fit

    The Vandermonde matrix is built on resolutions scaled to [-1, 1]-ish
    magnitudes and solved with an SVD-based solver; coefficients are then
    mapped back to raw ppi units.

    Args:
        pairs: (resolution, mAP) samples
        degree: Polynomial degree
        domain: Curve domain, defaults to the sample range

    Returns:
        MapCurve with ``fit_rms`` set to the residual RMS

    Raises:
        FitError: Fewer than degree+1 distinct resolutions
    """
    data = np.asarray(list(pairs), dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != 2:
        raise FitError("pairs must be a sequence of (resolution, mAP)")
    p, y = data[:, 0], data[:, 1]
    distinct = np.unique(p).size
    if distinct < degree + 1:
        raise FitError(
            f"Degree {degree} fit needs {degree + 1} distinct resolutions, got {distinct}"
        )

    scale = float(np.max(np.abs(p))) or 1.0
    vander = np.vander(p / scale, degree + 1)
    scaled, _, rank, _ = np.linalg.lstsq(vander, y, rcond=None)
    if rank < degree + 1:
        raise FitError(f"Rank-deficient design matrix (rank {rank})")

    powers = np.arange(degree, -1, -1)
    coeffs = scaled / scale ** powers
    residual = np.polyval(coeffs, p) - y
    rms = float(np.sqrt(np.mean(residual ** 2)))

    if domain is None:
        domain = (float(p.min()), float(p.max()))
    logger.info(f"Fitted degree-{degree} mAP curve on {len(p)} points, residual RMS {rms:.6g}")
    return MapCurve(coeffs=tuple(float(c) for c in coeffs), domain=domain, fit_rms=rms)


def load_pairs_csv(filepath: Union[str, Path]) -> Sequence[Tuple[float, float]]:
    """
    Read resolution/mAP samples from a CSV with header ``resolution_ppi,map``

    Raises:
        FitError: Missing columns or non-numeric values
    """
    path = Path(filepath)
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        logger.error(f"Failed to read pairs file {path}: {e}")
        raise FitError(f"Cannot read {path}: {e}") from e

    missing = [c for c in PAIRS_HEADER if c not in frame.columns]
    if missing:
        raise FitError(f"{path} lacks column(s) {', '.join(missing)}")
    try:
        values = frame[list(PAIRS_HEADER)].astype(np.float64).to_numpy()
    except ValueError as e:
        raise FitError(f"{path} contains non-numeric values: {e}") from e
    logger.debug(f"Loaded {len(values)} resolution/mAP pairs from {path}")
    return [(float(a), float(b)) for a, b in values]


def save_curve(filepath: Union[str, Path], curve: MapCurve) -> None:
    """Write coefficients one per line, highest power first, after comment headers"""
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# domain={curve.domain[0]!r},{curve.domain[1]!r}"]
    if curve.fit_rms is not None:
        lines.append(f"# rms={curve.fit_rms!r}")
    lines.extend(repr(float(c)) for c in curve.coeffs)
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    logger.info(f"Saved mAP curve to {path}")


def load_curve(filepath: Union[str, Path]) -> MapCurve:
    """Read a curve written by save_curve"""
    path = Path(filepath)
    coeffs = []
    domain = DEFAULT_CURVE.domain
    rms = None
    for line in path.read_text(encoding='utf-8').splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith('#'):
            key, _, value = line[1:].strip().partition('=')
            if key == 'domain':
                lo, hi = value.split(',')
                domain = (float(lo), float(hi))
            elif key == 'rms':
                rms = float(value)
            continue
        coeffs.append(float(line))
    if not coeffs:
        raise FitError(f"No coefficients in {path}")
    return MapCurve(coeffs=tuple(coeffs), domain=domain, fit_rms=rms)
