"""Toy denoising loop that drives the attention layers through a fusion schedule.

The "denoiser" is a fixed linear contraction toward the attended latent. It
is not a diffusion model; it exists so the schedule, noise initialization and
conditioning plumbing can be exercised and their spectra inspected.
"""
from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .attention import (
    AttentionWeights,
    from_sequence,
    global_attention,
    project_qkv,
    sliding_window_layer,
    spectralblend_ta,
    to_sequence,
)
from .errors import ParameterError, ValidationError
from .spectral import gaussian_lpf
from .tensorio import RngSpec, encode_tensor, sample_gaussian, write_tensor

MODES = ("direct", "sliding_window", "freelong")
NOISE_INITS = ("random", "rescheduled")
NATIVE_FRAMES = 16

# independent RNG stream keys
_NOISE, _WEIGHTS, _PERMUTE, _EMBED = 1, 2, 3, 4


def reschedule_noise(base, total_frames: int, rng: RngSpec) -> np.ndarray:
    """Tile ``base`` along frames, shuffling frame order inside every block after the first.

    Each block of ``base.shape[1]`` frames is a seeded permutation of the base
    frames; block 0 keeps the original order.
    """
    base = np.asarray(base)
    if base.ndim != 4:
        raise ValidationError(f"base noise must be [C, N, h, w], got {list(base.shape)}")
    block = base.shape[1]
    if total_frames < 1 or total_frames % block:
        raise ParameterError(f"total_frames={total_frames} is not a positive multiple of {block}")
    gen = rng.generator(_PERMUTE)
    perms = [np.arange(block)] + [gen.permutation(block) for _ in range(total_frames // block - 1)]
    return np.concatenate([base[:, p] for p in perms], axis=1)


def parse_segments(text: str) -> list[tuple[int, str]]:
    """``"0:A,64:B"`` -> ``[(0, "A"), (64, "B")]``."""
    segments = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        start, sep, ident = part.partition(":")
        if not sep or not ident:
            raise ParameterError(f"segment {part!r} is not of the form START:ID")
        try:
            segments.append((int(start), ident))
        except ValueError:
            raise ParameterError(f"segment start {start!r} is not an integer") from None
    return segments


def check_segments(segments, total_frames: int) -> None:
    if not segments:
        raise ParameterError("at least one segment is required")
    starts = [s for s, _ in segments]
    if starts[0] != 0:
        raise ParameterError(f"first segment must start at frame 0, got {starts[0]}")
    if any(b <= a for a, b in zip(starts, starts[1:])):
        raise ParameterError(f"segment starts must be strictly increasing, got {starts}")
    if starts[-1] >= total_frames:
        raise ParameterError(f"segment start {starts[-1]} is beyond the last frame {total_frames - 1}")


def segment_conditioning(segments, total_frames: int, embeddings: dict) -> np.ndarray:
    """Per-frame table: frame ``f`` gets the embedding of the last segment starting at or before ``f``."""
    check_segments(segments, total_frames)
    for _, ident in segments:
        if ident not in embeddings:
            raise ParameterError(f"no embedding for segment id {ident!r}")
    dim = len(np.atleast_1d(embeddings[segments[0][1]]))
    table = np.empty((total_frames, dim))
    bounds = [s for s, _ in segments[1:]] + [total_frames]
    for (start, ident), end in zip(segments, bounds):
        table[start:end] = embeddings[ident]
    return table


def embedding_for(ident: str, dim: int, rng: RngSpec, scale: float = 0.1) -> np.ndarray:
    """Stand-in conditioning vector for an opaque id, derived from the seed."""
    return scale * rng.generator(_EMBED, zlib.crc32(ident.encode())).standard_normal(dim)


@dataclass
class DenoiseConfig:
    channels: int = 4
    frames: int = 128
    height: int = 16
    width: int = 16
    steps: int = 50
    tau: int = 25
    alpha: int = 8
    d0: float = 0.25
    seed: int = 0
    mode: str = "freelong"
    noise_init: str = "random"
    segments: list = field(default_factory=list)
    window: int = NATIVE_FRAMES
    stride: int = NATIVE_FRAMES // 2
    heads: int = 1
    snapshot_every: int = 0

    def validate(self) -> "DenoiseConfig":
        if min(self.channels, self.frames, self.height, self.width) < 1:
            raise ParameterError("latent dims must all be >= 1")
        if self.steps < 1:
            raise ParameterError(f"steps must be >= 1, got {self.steps}")
        if not 0 <= self.tau <= self.steps:
            raise ParameterError(f"tau must lie in [0, {self.steps}], got {self.tau}")
        if self.alpha < 0:
            raise ParameterError(f"alpha must be >= 0, got {self.alpha}")
        if not self.d0 > 0:
            raise ParameterError(f"d0 must be positive, got {self.d0}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.noise_init not in NOISE_INITS:
            raise ParameterError(f"noise_init must be one of {NOISE_INITS}, got {self.noise_init!r}")
        if self.noise_init == "rescheduled" and self.frames % NATIVE_FRAMES:
            raise ParameterError(f"rescheduled noise needs frames to be a multiple of {NATIVE_FRAMES}")
        if self.mode == "sliding_window" and not 1 <= self.window <= self.frames:
            raise ParameterError(f"window {self.window} must lie in [1, {self.frames}]")
        if self.stride < 1:
            raise ParameterError(f"stride must be >= 1, got {self.stride}")
        if self.channels % self.heads:
            raise ParameterError(f"heads={self.heads} must divide channels={self.channels}")
        if self.segments:
            check_segments(self.segments, self.frames)
        if self.snapshot_every < 0:
            raise ParameterError("snapshot_every must be >= 0")
        return self

    @property
    def rng(self) -> RngSpec:
        return RngSpec(self.seed)


@dataclass
class Trajectory:
    final: np.ndarray
    used_blend: list[bool]
    snapshots: dict[int, np.ndarray]
    conditioning: np.ndarray
    metadata: dict


def initial_latent(cfg: DenoiseConfig) -> np.ndarray:
    dims = (cfg.channels, cfg.frames, cfg.height, cfg.width)
    if cfg.noise_init == "random":
        return sample_gaussian(dims, cfg.rng, _NOISE)
    base = sample_gaussian((cfg.channels, NATIVE_FRAMES, cfg.height, cfg.width), cfg.rng, _NOISE)
    return reschedule_noise(base, cfg.frames, cfg.rng)


def run_toy_denoise(cfg: DenoiseConfig) -> Trajectory:
    """Run ``cfg.steps`` steps of ``x <- x - (x - (layer(x) + cond)) / T``.

    Steps are numbered from 1; in freelong mode the blended layer is used for
    steps ``<= tau`` and the windowed layer after that.
    """
    cfg.validate()
    rng = cfg.rng
    C, N, h, w = cfg.channels, cfg.frames, cfg.height, cfg.width
    weights = AttentionWeights.random(C, rng.generator(_WEIGHTS), cfg.heads)
    lpf = gaussian_lpf(N, h, w, cfg.d0) if cfg.mode == "freelong" else None
    if cfg.segments:
        ids = {ident for _, ident in cfg.segments}
        table = segment_conditioning(cfg.segments, N, {i: embedding_for(i, C, rng) for i in ids})
    else:
        table = np.zeros((N, C))
    cond = table.T[:, :, None, None]

    x = initial_latent(cfg).astype(np.float64)
    used_blend, snapshots = [], {}
    for step in range(1, cfg.steps + 1):
        if cfg.mode == "freelong":
            attended = spectralblend_ta(x, weights, cfg.alpha, lpf, step, cfg.tau)
        elif cfg.mode == "direct":
            q, k, v = project_qkv(to_sequence(x), weights)
            attended = from_sequence(global_attention(q, k, v, cfg.heads)[0], h, w)
        else:
            attended = from_sequence(sliding_window_layer(to_sequence(x), weights, cfg.window, cfg.stride), h, w)
        used_blend.append(cfg.mode == "freelong" and step <= cfg.tau)
        x = x - (x - (attended + cond)) / cfg.steps
        if cfg.snapshot_every and (step % cfg.snapshot_every == 0 or step == cfg.steps):
            snapshots[step] = x.astype(np.float32)

    meta = {"config": asdict(cfg), "rng_algorithm": rng.algorithm}
    return Trajectory(x.astype(np.float32), used_blend, snapshots, table, meta)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_run(traj: Trajectory, outdir) -> dict:
    """Write snapshots, the final latent and ``manifest.json``; return the manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {}
    items = [(f"snapshot_{s:04d}.vlt", a) for s, a in sorted(traj.snapshots.items())]
    items.append(("final.vlt", traj.final))
    items.append(("conditioning.vlt", traj.conditioning.astype(np.float32)))
    for name, arr in items:
        write_tensor(arr, outdir / name)
        files[name] = _sha256(encode_tensor(arr))
    manifest = {
        **traj.metadata,
        "used_blend": traj.used_blend,
        "blend_steps": [i + 1 for i, b in enumerate(traj.used_blend) if b],
        "conditioning_table": _segment_table(traj.metadata["config"]),
        "files": files,
    }
    text = json.dumps(manifest, indent=2, sort_keys=True)
    manifest["manifest_sha256"] = _sha256(text.encode())
    tmp = outdir / ".manifest.json.tmp"
    tmp.write_text(text + "\n")
    tmp.replace(outdir / "manifest.json")
    return manifest


def _segment_table(config: dict) -> list[dict]:
    segs = config["segments"] or []
    bounds = [s for s, _ in segs[1:]] + [config["frames"]]
    return [{"id": ident, "first_frame": s, "last_frame": e - 1} for (s, ident), e in zip(segs, bounds)]
