"""Monte-Carlo BER experiments: configuration, frame pipeline and sweeps.

A frame goes through encode -> antenna mapping -> channel -> combining ->
decode -> BER.  Every random draw of frame ``k`` comes from generators
seeded by ``SeedSequence(seed, spawn_key=(k, tag))``, so results do not
depend on how frames are spread over worker processes.
"""

import dataclasses
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import moments
from .ber import BerRecord, aggregate, empirical_ber, semi_analytic_frame_ber, signed_llr
from .channel import ChannelConfig, EqualizedFrame, draw_channel, matched_filter_combine, transmit_block
from .codes import build_trellis, make_interleaver
from .errors import (
    DegenerateFrameError,
    InvalidArgumentError,
    NumericalFailureError,
    UnreachableTargetError,
)
from .pctc import pctc_decode, pctc_encode
from .precoder import build_precoding_matrix, predictor_for
from .sctc import DEFAULT_ITERATIONS, sctc_decode, sctc_encode
from .sinr import REGIMES, calibrate_noise

__all__ = [
    "TAG_DATA",
    "TAG_DUMMY",
    "TAG_CHANNEL",
    "TAG_NOISE",
    "SimulationConfig",
    "FrameResult",
    "frame_rng",
    "map_symbols_to_blocks",
    "prepare_point",
    "run_frame",
    "run_frames",
    "run_point",
    "run_sweep",
    "write_results",
    "parse_config_text",
    "load_config",
]

log = logging.getLogger(__name__)

TAG_DATA, TAG_DUMMY, TAG_CHANNEL, TAG_NOISE = range(4)
CSV_COLUMNS = (
    "sinr_db", "ber_empirical", "ber_semianalytic", "frames", "bit_errors", "bits_counted", "mean_L_d2",
)
CODES = ("sctc", "pctc")
DEGENERATE_POLICIES = ("all-positions", "half")


@dataclass(frozen=True)
class SimulationConfig:
    """Full description of a BER experiment.

    ``sinr_regime`` selects the SINR definition used to calibrate the noise
    (see ``sinr.REGIMES``); ``"auto"`` means the before-combining value of
    the correlated regime (which is the uncorrelated one at ``rho = 0``) or
    of the precoded regime when precoding is on.  The weakest data antenna
    sets the noise level.

    ``degenerate_policy`` decides what a frame contributes to the
    semi-analytic estimate when none of its log-ratios passes the e^-500
    filter: ``"all-positions"`` averages over every position using the
    clamped log-ratios, ``"half"`` counts the frame as ``P_f = 0.5``.
    """

    n_tot: int = 32
    n_t: int = 16
    n_rt: int = 1
    l_d1: int = 1024
    code: str = "sctc"
    iterations: int = DEFAULT_ITERATIONS
    rho: float = 0.0
    precoding: bool = False
    dummy_data: bool = False
    sinr_sweep_db: tuple = (1.0, 2.0, 3.0)
    frames: int = 100
    seed: int = 1
    sigma2_h: float = 0.5
    workers: int = 1
    interleaver_seed: int = 12345
    sinr_regime: str = "auto"
    scale_by_gain: bool = True
    degenerate_policy: str = "all-positions"

    def __post_init__(self):
        object.__setattr__(self, "sinr_sweep_db", tuple(float(x) for x in self.sinr_sweep_db))
        object.__setattr__(self, "code", self.code.lower())
        if self.code not in CODES:
            raise InvalidArgumentError(f"code must be one of {CODES}, got {self.code!r}")
        if self.n_t < 1 or self.n_tot - self.n_t < 1:
            raise InvalidArgumentError(f"need 1 <= n_t < n_tot, got n_t={self.n_t}, n_tot={self.n_tot}")
        if self.n_rt < 1 or self.frames < 1 or self.iterations < 1 or self.l_d1 < 2:
            raise InvalidArgumentError("n_rt, frames, iterations must be >= 1 and l_d1 >= 2")
        if self.workers < 1:
            raise InvalidArgumentError("workers must be >= 1")
        if self.degenerate_policy not in DEGENERATE_POLICIES:
            raise InvalidArgumentError(f"degenerate_policy must be one of {DEGENERATE_POLICIES}")
        if self.sinr_regime != "auto" and self.sinr_regime not in REGIMES:
            raise InvalidArgumentError(f"sinr_regime must be 'auto' or one of {REGIMES}")
        per_block = self.data_antennas
        if per_block < 1:
            raise InvalidArgumentError("dummy data needs at least two transmit antennas")
        if self.l_d % per_block:
            step = per_block // math.gcd(per_block, 2)
            lo = (self.l_d1 // step) * step
            hint = [v for v in (lo, lo + step) if v >= 2]
            raise InvalidArgumentError(
                f"L_d = {self.l_d} is not a multiple of {per_block} symbols per block; "
                f"nearest valid l_d1: {hint}"
            )
        # builds the channel config, so its own checks run here as well
        self.channel()

    @property
    def n_r(self):
        return self.n_tot - self.n_t

    @property
    def l_d(self):
        return 2 * self.l_d1

    @property
    def data_antennas(self):
        return self.n_t - 1 if self.dummy_data else self.n_t

    @property
    def n_blocks(self):
        return self.l_d // self.data_antennas

    @property
    def regime(self):
        if self.sinr_regime != "auto":
            return self.sinr_regime
        return "precoded-before" if self.precoding else "correlated-before"

    def channel(self, sigma2_w=0.0):
        return ChannelConfig(
            n_t=self.n_t, n_r=self.n_r, n_rt=self.n_rt, sigma2_h=self.sigma2_h,
            sigma2_w=sigma2_w, rho=self.rho,
        )

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["sinr_sweep_db"] = list(self.sinr_sweep_db)
        return d


def _coerce(name, text):
    fields = {f.name: f for f in dataclasses.fields(SimulationConfig)}
    if name not in fields:
        raise InvalidArgumentError(f"unknown config key {name!r}")
    default = fields[name].default
    text = text.strip()
    if isinstance(default, bool):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise InvalidArgumentError(f"{name}: expected a boolean, got {text!r}")
    if isinstance(default, tuple):
        return tuple(float(v) for v in text.replace(",", " ").split())
    try:
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError as exc:
        raise InvalidArgumentError(f"{name}: {exc}") from None
    return text


def parse_config_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"line {lineno}: expected key = value")
        key, val = line.split("=", 1)
        key = key.strip()
        values[key] = _coerce(key, val)
    return values


def load_config(path=None, overrides=(), **kwargs):
    """Build a config from an optional file, ``key=value`` overrides and kwargs."""
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    for item in overrides:
        if "=" not in item:
            raise InvalidArgumentError(f"override {item!r} is not key=value")
        key, val = item.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), val)
    values.update({k: v for k, v in kwargs.items() if v is not None})
    return SimulationConfig(**values)


def frame_rng(seed, frame_index, tag):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(frame_index), int(tag)))
    return np.random.Generator(np.random.PCG64(ss))


def map_symbols_to_blocks(s, n_t, dummy_data=False, rng=None):
    """Lay the codeword out over transmit antennas, block by block.

    Returns ``(blocks, dummy_mask)`` with shapes ``(n_blocks, n_t)``.  In
    dummy mode antenna 1 of every block sends a random QPSK symbol drawn
    from ``rng`` and the codeword fills antennas 2..n_t.
    """
    s = np.asarray(s, dtype=complex).ravel()
    per_block = n_t - 1 if dummy_data else n_t
    if per_block < 1 or s.size % per_block:
        raise InvalidArgumentError(f"{s.size} symbols do not fill blocks of {per_block}")
    n_blocks = s.size // per_block
    mask = np.zeros((n_blocks, n_t), dtype=bool)
    if not dummy_data:
        return s.reshape(n_blocks, n_t), mask
    if rng is None:
        raise InvalidArgumentError("dummy data needs a random generator")
    blocks = np.empty((n_blocks, n_t), dtype=complex)
    bits = rng.integers(0, 2, size=(n_blocks, 2))
    blocks[:, 0] = (1 - 2 * bits[:, 0]) + 1j * (1 - 2 * bits[:, 1])
    blocks[:, 1:] = s.reshape(n_blocks, per_block)
    mask[:, 0] = True
    return blocks, mask


@dataclass
class FrameResult:
    frame_index: int
    bit_errors: int = 0
    bits_counted: int = 0
    p_f: float = 0.5
    l_d2: int = 0
    degenerate: bool = False
    failed: bool = False
    error: str = ""
    signed_llr: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True)
class PointSetup:
    """Everything a frame needs that is shared across frames of one point."""

    cfg: SimulationConfig
    sigma2_w: float
    interleaver: object
    precoder: np.ndarray
    sigma2_u: np.ndarray


@lru_cache(maxsize=8)
def prepare_point(cfg, sigma2_w):
    ch = cfg.channel(sigma2_w)
    length = cfg.l_d if cfg.code == "sctc" else cfg.l_d1
    interleaver = make_interleaver(length, cfg.interleaver_seed)
    precoder, error_vars = None, None
    if cfg.precoding:
        predictor = predictor_for(ch)
        precoder = build_precoding_matrix(predictor, cfg.n_t)
        error_vars = np.asarray(predictor.error_vars[: cfg.n_t])
    # analytic per-antenna variance per dimension after combining
    sigma2_u = 0.5 * moments.interference_noise_power(ch, combined=True, error_vars=error_vars)
    return PointSetup(cfg, float(sigma2_w), interleaver, precoder, sigma2_u)


def run_frame(setup, frame_index, keep_llr=False):
    cfg = setup.cfg
    ch = cfg.channel(setup.sigma2_w)
    trellis = build_trellis()
    res = FrameResult(frame_index=int(frame_index))

    a = frame_rng(cfg.seed, frame_index, TAG_DATA).integers(0, 2, cfg.l_d1)
    if cfg.code == "sctc":
        s = sctc_encode(a, setup.interleaver, trellis).s
    else:
        s = pctc_encode(a, setup.interleaver, trellis).s
    blocks, dummy = map_symbols_to_blocks(
        s, cfg.n_t, cfg.dummy_data, frame_rng(cfg.seed, frame_index, TAG_DUMMY)
    )
    h = draw_channel(ch, frame_rng(cfg.seed, frame_index, TAG_CHANNEL), size=(len(blocks), cfg.n_rt))
    r = transmit_block(blocks, h, ch, frame_rng(cfg.seed, frame_index, TAG_NOISE), setup.precoder)
    z = h if setup.precoder is None else h @ setup.precoder
    y, f = matched_filter_combine(r, z)
    sigma2_u = np.broadcast_to(setup.sigma2_u, y.shape)
    keep = ~dummy
    eq = EqualizedFrame(y[keep], f[keep], sigma2_u[keep])

    decode = sctc_decode if cfg.code == "sctc" else pctc_decode
    try:
        a_hat, llr = decode(eq, setup.interleaver, cfg.iterations, trellis, cfg.scale_by_gain)
    except NumericalFailureError as exc:
        res.failed, res.error = True, str(exc)
        return res
    res.bit_errors, res.bits_counted = empirical_ber(a_hat, a)
    try:
        res.p_f, res.l_d2 = semi_analytic_frame_ber(llr, a)
    except DegenerateFrameError:
        res.degenerate = True
        if cfg.degenerate_policy == "half":
            res.p_f, res.l_d2 = 0.5, 0
        else:
            res.p_f, _ = semi_analytic_frame_ber(llr, a, cutoff=-np.inf)
            res.l_d2 = 0
    if keep_llr:
        res.signed_llr = signed_llr(llr, a)
    return res


def _run_chunk(args):
    setup, indices, keep_llr = args
    # single-threaded BLAS inside workers avoids oversubscription
    from threadpoolctl import threadpool_limits

    with threadpool_limits(1):
        return [run_frame(setup, k, keep_llr) for k in indices]


def run_frames(setup, frames, workers=1, keep_llr=False):
    """Run frames ``0 .. frames-1`` and return results in frame order."""
    indices = list(range(int(frames)))
    if workers <= 1:
        return [run_frame(setup, k, keep_llr) for k in indices]
    n_chunks = min(len(indices), 4 * workers)
    chunks = [indices[i::n_chunks] for i in range(n_chunks)]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_run_chunk, [(setup, c, keep_llr) for c in chunks]):
            out.extend(part)
    out.sort(key=lambda r: r.frame_index)
    return out


def _metadata(cfg):
    return {
        "code": cfg.code,
        "rho": cfg.rho,
        "precoding": cfg.precoding,
        "dummy_data": cfg.dummy_data,
        "regime": cfg.regime,
    }


def calibrate(cfg, sinr_db):
    first = 2 if cfg.dummy_data else 1
    return calibrate_noise(
        cfg.channel(), sinr_db, cfg.regime, antennas=range(first, cfg.n_t + 1)
    )


def run_point(cfg, sinr_db, workers=None):
    """Calibrate the noise for ``sinr_db`` and simulate ``cfg.frames`` frames."""
    sigma2_w = calibrate(cfg, sinr_db)
    setup = prepare_point(cfg, sigma2_w)
    results = run_frames(setup, cfg.frames, workers or cfg.workers)
    ok = [r for r in results if not r.failed]
    errors = sum(r.bit_errors for r in ok)
    counted = sum(r.bits_counted for r in ok)
    return BerRecord(
        sinr_db=float(sinr_db),
        frames=len(ok),
        bit_errors=int(errors),
        bits_counted=int(counted),
        ber_empirical=errors / counted if counted else float("nan"),
        ber_semianalytic=aggregate([r.p_f for r in ok]) if ok else float("nan"),
        mean_L_d2=float(np.mean([r.l_d2 for r in ok])) if ok else float("nan"),
        sigma2_w=float(sigma2_w),
        degenerate_frames=sum(r.degenerate for r in ok),
        failed_frames=len(results) - len(ok),
        metadata=_metadata(cfg),
    )


def run_sweep(cfg, out_dir=None, workers=None):
    """One record per sweep point; unreachable points get a NaN record.

    Returns ``(records, problems)`` where ``problems`` lists the points
    that could not be simulated or had failed frames.
    """
    records, problems = [], []
    for sinr_db in cfg.sinr_sweep_db:
        try:
            rec = run_point(cfg, sinr_db, workers)
        except UnreachableTargetError as exc:
            log.warning("%s", exc)
            problems.append({"sinr_db": sinr_db, "reason": str(exc)})
            nan = float("nan")
            rec = BerRecord(sinr_db, 0, 0, 0, nan, nan, nan, metadata=_metadata(cfg))
        else:
            if rec.failed_frames:
                problems.append({"sinr_db": sinr_db, "reason": f"{rec.failed_frames} failed frames"})
        log.info("%.3f dB: empirical %.3g, semi-analytic %.3g", sinr_db, rec.ber_empirical,
                 rec.ber_semianalytic)
        records.append(rec)
    if out_dir is not None:
        write_results(cfg, records, out_dir, problems)
    return records, problems


def _fmt(x):
    return repr(float(x)) if isinstance(x, float) else str(x)


def write_results(cfg, records, out_dir, problems=()):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "ber.csv").open("w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(_fmt(getattr(rec, c)) for c in CSV_COLUMNS) + "\n")
    doc = {"config": cfg.to_dict(), "records": [r.to_dict() for r in records],
           "problems": list(problems)}
    (out / "ber.json").write_text(json.dumps(doc, indent=2) + "\n")
    for name, col in (("empirical", "ber_empirical"), ("semianalytic", "ber_semianalytic")):
        with (out / f"curve_{name}.dat").open("w") as fh:
            fh.write(f"# sinr_db {col}\n")
            for rec in records:
                fh.write(f"{_fmt(rec.sinr_db)} {_fmt(getattr(rec, col))}\n")
