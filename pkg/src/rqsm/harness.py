"""Monte Carlo BER engine.

Trials run in fixed-size blocks.  Trial ``t`` always draws its channel,
noise and data word from the streams ``(seed, t, purpose)``, so one block's
draws serve every SNR point (common random numbers) and any detector.
Early stopping is decided by folding finished blocks in block order, which
keeps the result independent of the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__, kernels
from .channel import RngStream, sample_channel, sample_word, standard_complex_normal
from .config import SystemConfig
from .constellation import QamConstellation, conventional, from_distances, split_words
from .designer import design
from .detectors import detect_block

DETECTORS = ("gd", "ml")
SOURCES = ("conventional", "optimized", "explicit")


@dataclass
class ExperimentConfig:
    N: int = 256
    Nr: int = 4
    M: int = 16
    es: float = 1.0
    snr_db: list = field(default_factory=lambda: [-30.0, -28.0, -26.0])
    detector: str = "gd"
    constellation: str = "conventional"
    distances: list | None = None
    design_method: str = "kkt"
    trials: int = 100_000
    target_errors: int | None = 200
    lowconf_errors: int = 20
    seed: int = 0
    block_size: int = 2000
    workers: int = 1

    def __post_init__(self):
        self.snr_db = [float(s) for s in np.atleast_1d(self.snr_db)]
        if not self.snr_db or not all(math.isfinite(s) for s in self.snr_db):
            raise ValueError("snr_db must be a non-empty list of finite values")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.block_size < 1 or self.workers < 1:
            raise ValueError("block_size and workers must be >= 1")
        if self.detector not in DETECTORS:
            raise ValueError(f"detector must be one of {DETECTORS}")
        if self.constellation not in SOURCES:
            raise ValueError(f"constellation must be one of {SOURCES}")
        if self.constellation == "explicit":
            if self.distances is None:
                raise ValueError("explicit constellation needs distances")
            self.distances = [float(d) for d in self.distances]
        SystemConfig(self.N, self.Nr, self.M, self.es)  # validates the physical parameters

    def system(self, snr_db: float) -> SystemConfig:
        return SystemConfig.from_snr_db(self.N, self.Nr, self.M, snr_db, self.es)

    @property
    def rate(self) -> int:
        return SystemConfig(self.N, self.Nr, self.M, self.es).rate

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def physics_dict(self) -> dict:
        """Everything that determines the BER body, excluding execution knobs."""
        d = self.to_dict()
        d.pop("workers")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.physics_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class BerPoint:
    snr_db: float
    bit_errors: int
    bits_sent: int
    trials: int
    distances: list
    wallclock: float = 0.0
    lowconf: bool = False

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_sent if self.bits_sent else float("nan")


@dataclass
class BerCurve:
    config: ExperimentConfig
    detector: str
    points: list
    version: str = __version__

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def config_hash(self) -> str:
        return self.config.digest()

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])


def constellation_for(cfg: ExperimentConfig, snr_db: float) -> QamConstellation:
    if cfg.constellation == "conventional":
        return conventional(cfg.M, cfg.es)
    if cfg.constellation == "explicit":
        return from_distances(cfg.distances, cfg.M, cfg.es)
    res = design(cfg.system(snr_db), method=cfg.design_method)
    return from_distances(res.distances, cfg.M, cfg.es)


@dataclass(frozen=True, eq=False)
class TrialDraws:
    """Channel, unit-power noise and data words for trials ``start .. start+count-1``."""

    start: int
    H: np.ndarray
    noise: np.ndarray
    words: np.ndarray


def draw_trials(cfg: ExperimentConfig, start: int, count: int) -> TrialDraws:
    H = np.empty((count, cfg.Nr, cfg.N), dtype=complex)
    W = np.empty((count, cfg.Nr), dtype=complex)
    words = np.empty(count, dtype=np.int64)
    R = cfg.rate
    for i in range(count):
        t = start + i
        H[i] = sample_channel(RngStream(cfg.seed, t, "channel"), cfg.Nr, cfg.N)
        W[i] = standard_complex_normal(RngStream(cfg.seed, t, "noise").generator(), cfg.Nr)
        words[i] = sample_word(RngStream(cfg.seed, t, "bits"), R)
    return TrialDraws(start, H, W, words)


def received(draws: TrialDraws, c: QamConstellation, sysc: SystemConfig) -> np.ndarray:
    m, n, ir, ii = split_words(draws.words, sysc.M, sysc.Nr)
    xr = c.real_dim.levels[ir]
    xi = c.imag_dim.levels[ii]
    y, _, _ = kernels.transmit_block(draws.H, m, n, xr, xi, sysc.beta)
    if sysc.n0 > 0:
        y = y + math.sqrt(sysc.n0) * draws.noise
    return y


def bit_errors(draws: TrialDraws, c: QamConstellation, sysc: SystemConfig, detectors) -> dict:
    y = received(draws, c, sysc)
    out = {}
    for det in detectors:
        hat = detect_block(y, draws.H, sysc.beta, c, det)
        out[det] = np.bitwise_count(hat ^ draws.words).astype(np.int64)
    return out


def run_trial(cfg: ExperimentConfig, trial: int, snr_db: float, c: QamConstellation | None = None,
              detector: str | None = None) -> int:
    """Bit errors of one trial, through the same path as :func:`sweep`."""
    c = constellation_for(cfg, snr_db) if c is None else c
    det = detector or cfg.detector
    return int(bit_errors(draw_trials(cfg, trial, 1), c, cfg.system(snr_db), (det,))[det][0])


def _block_task(args):
    cfg, b, count, active, consts, detectors = args
    t0 = time.perf_counter()
    draws = draw_trials(cfg, b * cfg.block_size, count)
    res = {}
    for s in active:
        errs = bit_errors(draws, consts[s], cfg.system(cfg.snr_db[s]), detectors)
        res[s] = {d: int(e.sum()) for d, e in errs.items()}
    return b, res, time.perf_counter() - t0


def _simulate(cfg: ExperimentConfig, detectors) -> dict:
    consts = [constellation_for(cfg, s) for s in cfg.snr_db]
    n_blocks = -(-cfg.trials // cfg.block_size)
    S = len(cfg.snr_db)
    errs = [{d: 0 for d in detectors} for _ in range(S)]
    trials = [0] * S
    clock = [0.0] * S
    active = list(range(S))
    R = cfg.rate
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        b = 0
        while active and b < n_blocks:
            wave = range(b, min(n_blocks, b + cfg.workers))
            tasks = [(cfg, k, min(cfg.block_size, cfg.trials - k * cfg.block_size), tuple(active), consts, detectors)
                     for k in wave]
            results = list(pool.map(_block_task, tasks)) if pool else [_block_task(t) for t in tasks]
            # fold strictly in block order; anything past a stop is discarded
            for k, res, dt in sorted(results, key=lambda r: r[0]):
                count = min(cfg.block_size, cfg.trials - k * cfg.block_size)
                for s in list(active):
                    for d in detectors:
                        errs[s][d] += res[s][d]
                    trials[s] += count
                    clock[s] += dt / max(1, len(res))
                    if cfg.target_errors is not None and all(errs[s][d] >= cfg.target_errors for d in detectors):
                        active.remove(s)
            b = wave.stop
    finally:
        if pool:
            pool.shutdown()
    curves = {}
    for d in detectors:
        pts = [BerPoint(snr_db=cfg.snr_db[s], bit_errors=errs[s][d], bits_sent=trials[s] * R, trials=trials[s],
                        distances=[float(v) for v in consts[s].distances], wallclock=clock[s],
                        lowconf=errs[s][d] < cfg.lowconf_errors)
               for s in range(S)]
        curves[d] = BerCurve(cfg, d, pts)
    return curves


def sweep(cfg: ExperimentConfig) -> BerCurve:
    return _simulate(cfg, (cfg.detector,))[cfg.detector]


def compare_detectors(cfg: ExperimentConfig) -> tuple[BerCurve, BerCurve]:
    """GD and ML on identical trials; stops a point once both have enough errors."""
    out = _simulate(cfg, DETECTORS)
    return out["gd"], out["ml"]


# --- CSV ------------------------------------------------------------------------------

BODY_COLUMNS = ("snr_db", "ber", "bit_errors", "bits_sent", "lowconf_flag")


def curve_body(curve: BerCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BODY_COLUMNS)
    for p in curve.points:
        w.writerow([repr(p.snr_db), repr(p.ber), p.bit_errors, p.bits_sent, int(p.lowconf)])
    return buf.getvalue()


def emit(curve: BerCurve, path) -> None:
    lines = [
        "# rqsm BER curve",
        f"# version: {curve.version}",
        f"# seed: {curve.seed}",
        f"# config_hash: {curve.config_hash}",
        f"# detector: {curve.detector}",
        f"# config: {json.dumps(curve.config.to_dict(), sort_keys=True)}",
    ]
    for p in curve.points:
        lines.append(f"# point: {json.dumps({'snr_db': p.snr_db, 'trials': p.trials, 'distances': p.distances, 'wallclock': p.wallclock})}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n" + curve_body(curve))


def read_curve(path) -> BerCurve:
    meta, points, body = {}, [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("# point: "):
                points.append(json.loads(line[len("# point: "):]))
            elif line.startswith("# ") and ": " in line:
                k, v = line[2:].rstrip("\n").split(": ", 1)
                meta[k] = v
            elif not line.startswith("#"):
                body.append(line)
    cfg = ExperimentConfig.from_dict(json.loads(meta["config"]))
    rows = list(csv.DictReader(body))
    pts = []
    for row, extra in zip(rows, points):
        pts.append(BerPoint(snr_db=float(row["snr_db"]), bit_errors=int(row["bit_errors"]),
                            bits_sent=int(row["bits_sent"]), trials=int(extra["trials"]),
                            distances=extra["distances"], wallclock=float(extra["wallclock"]),
                            lowconf=bool(int(row["lowconf_flag"]))))
    return BerCurve(cfg, meta["detector"], pts, meta["version"])
