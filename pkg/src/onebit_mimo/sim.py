"""Monte-Carlo FER harness with deterministic per-frame substreams.

Every frame simulates one coded block: a fresh Rayleigh channel, K random
info blocks, polar encoding, modulation, one-bit observation, detection and
decoding.  The random stream of frame i is derived from (master seed, i) with
a counter-based Philox generator, so runs are reproducible, frames can be
executed in parallel, and all detectors of a sweep see identical channels,
data, and noise (common random numbers).
"""

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .baseband import (
    constellation_by_name,
    draw_channel,
    lift_channel,
    transmit_block,
)
from .detectors import (
    detect_frame_ordered_scso,
    detect_frame_scso,
    detect_frame_so,
    detect_frame_zf,
)
from .fec import PolarCode, PolarCodec, RepetitionCode
from .spatial_code import build_code

DETECTOR_CHOICES = ("so", "scso", "oscso", "zf", "ml-genie")

CSV_COLUMNS = (
    "snr_db", "detector", "frames", "user_block_errors", "fer", "mean_scans",
    "seed", "frame_errors", "frame_fer",
)

CONVENTIONS = {
    "snr": "per-user average symbol energy in dB; symbols scaled by "
           "sqrt(10**(snr_db/10)), complex noise fixed at CN(0,1)",
    "q_function": "Gaussian tail Q(x) = 0.5*erfc(x/sqrt(2)); crossover "
                  "probabilities clamped to [1e-12, 0.5]",
    "tie_breaks": "argmax/argmin/majority ties resolve to the smallest "
                  "index or value",
    "llr_sign": "positive LLR favors coded bit 0",
    "polar": "Bhattacharyya frozen-set construction at 0 dB design SNR, "
             "min-sum SC decoding, frozen bits decode to 0",
    "fer": "fer = user_block_errors / (frames * num_users); frame_fer counts "
           "frames with at least one user-block error",
    "mean_scans": "codeword-distance evaluations per (slot, bit-position) "
                  "scan group, averaged over frames",
    "rng": "Philox keyed by SeedSequence(master_seed, spawn_key=(frame,))",
}


class ConfigError(ValueError):
    """Invalid simulation configuration; message names the offending field."""


@dataclass(frozen=True)
class SimConfig:
    """Sweep parameters; every field maps to a config-file key / CLI flag."""

    num_users: int = 6            # k
    num_rx: int = 12              # nr
    modulation: str = "4qam"      # mod
    code_spec: str = "polar:128:0.5"
    detectors: tuple = ("so",)    # detector (comma-separated)
    snr_start: float = 0.0        # snr A:B:STEP
    snr_stop: float = 10.0
    snr_step: float = 2.0
    frames: int = 100
    seed: int = 0
    out_path: str | None = None   # out
    out_format: str = "csv"       # format
    workers: int = 1

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SimConfig":
        """Build from flat string key-value pairs (config file / CLI keys)."""
        kwargs = {}
        try:
            for key, raw in mapping.items():
                if key not in _KEY_PARSERS:
                    raise ConfigError(f"unknown config key {key!r}")
                field_names, parser = _KEY_PARSERS[key]
                values = parser(raw)
                if len(field_names) == 1:
                    values = (values,)
                kwargs.update(zip(field_names, values))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "SimConfig":
        return cls.from_mapping(parse_config_file(path))

    def validate(self):
        if self.num_users < 1:
            raise ConfigError(f"k: need at least 1 user, got {self.num_users}")
        if self.num_rx < 1:
            raise ConfigError(f"nr: need at least 1 antenna, got {self.num_rx}")
        if self.frames < 1:
            raise ConfigError(f"frames: need at least 1, got {self.frames}")
        if self.workers < 1:
            raise ConfigError(f"workers: need at least 1, got {self.workers}")
        if self.out_format not in ("csv", "json"):
            raise ConfigError(f"format: unknown output format {self.out_format!r}")
        if not self.detectors:
            raise ConfigError("detector: none selected")
        for det in self.detectors:
            if det not in DETECTOR_CHOICES:
                raise ConfigError(
                    f"detector: {det!r} not in {'|'.join(DETECTOR_CHOICES)}"
                )
        try:
            constellation = constellation_by_name(self.modulation)
        except ValueError as exc:
            raise ConfigError(f"mod: {exc}") from exc
        try:
            codec = self.make_codec()
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"code: {exc}") from exc
        p = constellation.bits_per_symbol
        if codec.block_len % p != 0:
            raise ConfigError(
                f"code: block length {codec.block_len} is not a multiple of "
                f"{p} bits per symbol"
            )
        if "zf" in self.detectors and p != 2:
            raise ConfigError("detector: zf baseline requires 2 bits per symbol")
        if self.snr_step <= 0:
            raise ConfigError(f"snr: step must be positive, got {self.snr_step}")
        if not self.snr_grid():
            raise ConfigError("snr: empty grid")

    def snr_grid(self) -> list:
        count = int(np.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return [self.snr_start + i * self.snr_step for i in range(max(count, 0))]

    def make_constellation(self):
        return constellation_by_name(self.modulation)

    def make_codec(self):
        parts = self.code_spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"code spec {self.code_spec!r} is not family:n:rate")
        family, n_str, rate_str = parts
        n, rate = int(n_str), float(rate_str)
        if family == "polar":
            return PolarCodec(PolarCode.construct(n, rate))
        if family == "rep":
            num_info = rate * n
            if abs(num_info - round(num_info)) > 1e-9:
                raise ConfigError(f"code spec {self.code_spec!r}: non-integer k")
            return RepetitionCode(n, round(num_info))
        raise ConfigError(f"unknown code family {family!r}")


def _parse_snr(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"snr {text!r} is not A:B:STEP")
    return float(parts[0]), float(parts[1]), float(parts[2])


_KEY_PARSERS = {
    "k": (("num_users",), int),
    "nr": (("num_rx",), int),
    "mod": (("modulation",), str),
    "code": (("code_spec",), str),
    "detector": (("detectors",), lambda s: tuple(d.strip() for d in s.split(","))),
    "snr": (("snr_start", "snr_stop", "snr_step"), _parse_snr),
    "frames": (("frames",), int),
    "seed": (("seed",), int),
    "out": (("out_path",), str),
    "format": (("out_format",), str),
    "workers": (("workers",), int),
}


def parse_config_file(path) -> dict:
    """Flat ``key = value`` text; '#' starts a comment."""
    mapping = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            mapping[key] = value
    return mapping


@dataclass
class FerPoint:
    """Aggregated result of one (SNR, detector) cell of a sweep."""

    snr_db: float
    detector: str
    frames: int
    user_block_errors: int
    fer: float
    mean_scans: float
    seed: int
    frame_errors: int
    frame_fer: float
    wall_time_s: float = field(default=0.0, compare=False)


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Counter-based substream for one frame of a sweep."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(frame_index,))
    return np.random.Generator(np.random.Philox(ss))


def _messages_block(coded: np.ndarray, p: int) -> np.ndarray:
    """Per-slot messages of a (K, n) coded block; later bit = more significant."""
    k, n = coded.shape
    blocks = coded.reshape(k, n // p, p)[:, :, ::-1]
    return blocks @ (1 << np.arange(p - 1, -1, -1))


def _run_frames(cfg: SimConfig, snr_db: float, lo: int, hi: int) -> dict:
    """Simulate frames [lo, hi); returns per-detector accumulated counts."""
    constellation = cfg.make_constellation()
    codec = cfg.make_codec()
    p = constellation.bits_per_symbol
    needs_code = any(d != "zf" for d in cfg.detectors)
    acc = {d: [0, 0, 0, 0.0] for d in cfg.detectors}
    for frame in range(lo, hi):
        rng = frame_rng(cfg.seed, frame)
        channel = lift_channel(draw_channel(cfg.num_users, cfg.num_rx, rng))
        info = rng.integers(0, 2, size=(cfg.num_users, codec.num_info), dtype=np.uint8)
        coded = codec.encode(info)
        msgs = _messages_block(coded, p)
        symbols = constellation.points[msgs]
        x_block = np.vstack([symbols.real, symbols.imag])
        obs = transmit_block(channel, x_block, snr_db, rng)
        code = build_code(channel, constellation, snr_db) if needs_code else None
        for det in cfg.detectors:
            tic = time.perf_counter()
            evals = 0
            if det == "so":
                decoded, counter = detect_frame_so(obs, code, codec)
                evals = counter.evaluations
            elif det == "scso":
                decoded, counter = detect_frame_scso(obs, code, codec)
                evals = counter.evaluations
            elif det == "oscso":
                decoded, _, counter = detect_frame_ordered_scso(obs, code, codec)
                evals = counter.evaluations
            elif det == "ml-genie":
                decoded, counter = detect_frame_scso(obs, code, codec,
                                                     genie_messages=msgs)
                evals = counter.evaluations
            else:  # zf
                decoded = detect_frame_zf(obs, channel, snr_db, codec)
            toc = time.perf_counter()
            user_errors = int((decoded != info).any(axis=1).sum())
            entry = acc[det]
            entry[0] += user_errors
            entry[1] += int(user_errors > 0)
            entry[2] += evals
            entry[3] += toc - tic
    return acc


def run_fer_sweep(cfg: SimConfig) -> list:
    """Run the configured sweep; returns FerPoints ordered by (SNR, detector).

    Identical (seed, config) pairs produce identical points, serial or
    parallel: frame substreams depend only on (seed, frame index) and the
    per-point reduction is an integer sum.
    """
    cfg.validate()
    constellation = cfg.make_constellation()
    codec = cfg.make_codec()
    p = constellation.bits_per_symbol
    scan_groups = (codec.block_len // p) * p  # (slots, bit positions) per frame
    points = []
    for snr_db in cfg.snr_grid():
        if cfg.workers == 1:
            partials = [_run_frames(cfg, snr_db, 0, cfg.frames)]
        else:
            bounds = np.linspace(0, cfg.frames, cfg.workers + 1, dtype=int)
            jobs = [(cfg, snr_db, int(lo), int(hi))
                    for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                partials = list(pool.map(_run_frames_star, jobs))
        for det in cfg.detectors:
            user_err = sum(part[det][0] for part in partials)
            frame_err = sum(part[det][1] for part in partials)
            evals = sum(part[det][2] for part in partials)
            elapsed = sum(part[det][3] for part in partials)
            points.append(FerPoint(
                snr_db=snr_db,
                detector=det,
                frames=cfg.frames,
                user_block_errors=user_err,
                fer=user_err / (cfg.frames * cfg.num_users),
                mean_scans=evals / (cfg.frames * scan_groups),
                seed=cfg.seed,
                frame_errors=frame_err,
                frame_fer=frame_err / cfg.frames,
                wall_time_s=elapsed,
            ))
    return points


def _run_frames_star(args):
    return _run_frames(*args)


def metadata_dict(cfg: SimConfig | None = None, points=None) -> dict:
    meta = {"conventions": dict(CONVENTIONS)}
    if cfg is not None:
        meta["config"] = asdict(cfg)
        meta["master_seed"] = cfg.seed
    elif points:
        meta["master_seed"] = points[0].seed
    return meta


def _format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(points, path, out_format: str = "csv",
                 cfg: SimConfig | None = None):
    """Write sweep results; CSV gets a ``<path>.meta.json`` metadata sidecar.

    The CSV body is exactly one header plus one row per point (LF endings,
    '.' decimals, floats in round-trippable repr form).  JSON embeds the
    metadata next to the point records.
    """
    if not points:
        raise ValueError("no points to emit")
    meta = metadata_dict(cfg, points)
    if out_format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for pt in points:
                row = [getattr(pt, col) for col in CSV_COLUMNS]
                writer.writerow([_format_cell(cell) for cell in row])
        with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")
    elif out_format == "json":
        payload = {"metadata": meta, "points": [asdict(pt) for pt in points]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown output format {out_format!r}")


def read_points_csv(path) -> list:
    """Parse a result CSV back into FerPoints (wall time is not stored)."""
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(FerPoint(
                snr_db=float(row["snr_db"]),
                detector=row["detector"],
                frames=int(row["frames"]),
                user_block_errors=int(row["user_block_errors"]),
                fer=float(row["fer"]),
                mean_scans=float(row["mean_scans"]),
                seed=int(row["seed"]),
                frame_errors=int(row["frame_errors"]),
                frame_fer=float(row["frame_fer"]),
            ))
    return out


def read_points_json(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return [FerPoint(**record) for record in payload["points"]]
