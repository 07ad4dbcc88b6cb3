"""Empirical and semi-analytic bit error rate, plus LLR histogram diagnostics.

The semi-analytic estimate for one frame uses the decoder's final
log-ratios.  Positions whose a-posteriori probabilities are both above
``e^-500`` qualify; over those ``L_d2`` positions the mean of the
sign-corrected log-ratio ``Y = mean(x_i * llr_i)`` (``x_i = +-1`` for the
transmitted bit) gives ``P_f = erfc(sqrt(|Y| / 4)) / 2``.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.special import erfc

from .codes import bits_to_antipodal
from .errors import DegenerateFrameError, InvalidArgumentError

__all__ = [
    "LOG_PROB_CUTOFF",
    "MIN_HIST_VALUES",
    "BerRecord",
    "HistogramResult",
    "qualifying_mask",
    "semi_analytic_frame_ber",
    "aggregate",
    "empirical_ber",
    "signed_llr",
    "histogram_diagnostics",
    "write_histogram_csv",
    "write_histogram_summary",
]

LOG_PROB_CUTOFF = -500.0
MIN_HIST_VALUES = 30


@dataclass
class BerRecord:
    sinr_db: float
    frames: int
    bit_errors: int
    bits_counted: int
    ber_empirical: float
    ber_semianalytic: float
    mean_L_d2: float
    sigma2_w: float = float("nan")
    degenerate_frames: int = 0
    failed_frames: int = 0
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def qualifying_mask(llr, cutoff=LOG_PROB_CUTOFF):
    """Positions where both ``ln P(+1)`` and ``ln P(-1)`` exceed ``cutoff``.

    The smaller of the two log-probabilities is ``-log(1 + e^|llr|)``.
    """
    llr = np.asarray(llr, dtype=float)
    return -np.logaddexp(0.0, np.abs(llr)) > cutoff


def signed_llr(llr, a, mask=None):
    """``x_i * llr_i`` over qualifying positions (``x_i = +1`` for bit 0)."""
    llr = np.asarray(llr, dtype=float)
    a = np.asarray(a)
    if llr.shape != a.shape:
        raise InvalidArgumentError("llr and data bits differ in length")
    mask = qualifying_mask(llr) if mask is None else mask
    return (bits_to_antipodal(a) * llr)[mask]


def semi_analytic_frame_ber(llr, a, cutoff=LOG_PROB_CUTOFF):
    """Return ``(P_f, L_d2)`` for one frame.

    ``cutoff=-inf`` averages over every position, using the clamped
    log-ratios of saturated ones.

    Raises
    ------
    DegenerateFrameError
        If no position qualifies.
    """
    values = signed_llr(llr, a, qualifying_mask(llr, cutoff))
    if values.size == 0:
        raise DegenerateFrameError("no decoder output passed the e^-500 filter")
    y = values.mean()
    return float(0.5 * erfc(np.sqrt(abs(y) / 4.0))), int(values.size)


def aggregate(p_f):
    """Average of per-frame estimates, summed in the given order."""
    p_f = np.asarray(p_f, dtype=float)
    if p_f.size == 0:
        raise InvalidArgumentError("need at least one frame")
    return float(np.sum(p_f) / p_f.size)


def empirical_ber(a_hat, a, exclude_mask=None):
    """``(errors, counted)`` over the positions not excluded."""
    a_hat = np.asarray(a_hat)
    a = np.asarray(a)
    if a_hat.shape != a.shape:
        raise InvalidArgumentError(f"length mismatch: {a_hat.shape} vs {a.shape}")
    keep = np.ones(a.shape, bool) if exclude_mask is None else ~np.asarray(exclude_mask, bool)
    return int(np.count_nonzero(a_hat[keep] != a[keep])), int(np.count_nonzero(keep))


@dataclass
class HistogramResult:
    edges: np.ndarray
    density: np.ndarray
    n: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    insufficient: bool = False

    def moments(self):
        return {
            "n": self.n,
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "insufficient": self.insufficient,
        }


def histogram_diagnostics(values, bins=50):
    """Density-normalised histogram and sample moments of ``values``.

    Fewer than 30 values set ``insufficient``; moments are still reported
    where defined.
    """
    if bins < 10:
        raise InvalidArgumentError("use at least 10 bins")
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        return HistogramResult(np.zeros(bins + 1), np.zeros(bins), 0,
                               *(float("nan"),) * 4, insufficient=True)
    spread = np.ptp(values) > 0
    density, edges = np.histogram(values, bins=bins, density=spread)
    if not spread:
        density = density / (n * np.diff(edges))
    # shape moments are undefined for a constant sample
    skew = float(stats.skew(values)) if n > 2 and spread else float("nan")
    kurt = float(stats.kurtosis(values)) if n > 3 and spread else float("nan")
    return HistogramResult(
        edges=edges,
        density=density,
        n=int(n),
        mean=float(values.mean()),
        variance=float(values.var(ddof=1)) if n > 1 else 0.0,
        skewness=skew,
        excess_kurtosis=kurt,
        insufficient=n < MIN_HIST_VALUES,
    )


def write_histogram_csv(results, path):
    """``results`` maps a frame id (or ``"pooled"``) to a HistogramResult."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write("bin_left,bin_right,density,frame_id\n")
        for frame_id, h in results.items():
            for lo, hi, d in zip(h.edges[:-1], h.edges[1:], h.density):
                fh.write(f"{float(lo)!r},{float(hi)!r},{float(d)!r},{frame_id}\n")


def write_histogram_summary(results, path, extra=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"frames": {str(k): h.moments() for k, h in results.items()}}
    if extra:
        doc.update(extra)
    path.write_text(json.dumps(doc, indent=2, allow_nan=True) + "\n")
