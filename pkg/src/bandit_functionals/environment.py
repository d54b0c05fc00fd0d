"""Simulated infinite-armed bandit with exact pull accounting."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import UnknownArm
from .model import Distribution


@dataclass(frozen=True)
class TranscriptRecord:
    step: int
    action: str
    arm_id: int
    observation: float | None


class BanditEnv:
    """Reservoir of arms whose hidden means are i.i.d. draws from ``dist``.

    Pulling arm ``i`` for the ``j``-th time returns ``X_i + noise_sd * Z_ij``.
    Both ``X_i`` and ``Z_ij`` are pure functions of ``(seed, i, j)``; see
    :mod:`bandit_functionals.rng`.

    Parameters
    ----------
    dist : Distribution
        Law of the hidden arm means.
    noise_sd : float
        Observation noise scale.  The sample-size schedules assume unit noise,
        so values other than 0 and 1 need ``allow_any_noise=True``.
    seed : int
        64-bit stream seed.
    record : bool
        Keep a per-action transcript (expensive for large batches).
    """

    def __init__(self, dist: Distribution, noise_sd: float = 1.0, seed: int = 0,
                 *, allow_any_noise: bool = False, record: bool = False):
        if noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        if noise_sd not in (0.0, 1.0) and not allow_any_noise:
            raise ValueError("noise_sd must be 0 or 1 unless allow_any_noise is set")
        self.dist = dist
        self.noise_sd = float(noise_sd)
        self.seed = int(seed)
        self.record = record
        self._means = np.empty(0)
        self._counts = np.empty(0, dtype=np.int64)
        self._path = np.empty(0)  # Brownian noise path at each arm's current count
        self._size = 0
        self._total = 0
        self._transcript: list[TranscriptRecord] = []

    # -- arms ---------------------------------------------------------------

    @property
    def num_arms(self) -> int:
        return self._size

    @property
    def total_pulls(self) -> int:
        return self._total

    def new_arm(self) -> int:
        return int(self.new_arms(1)[0])

    def new_arms(self, count: int) -> np.ndarray:
        """Draw ``count`` fresh arms and return their ids."""
        count = int(count)
        ids = np.arange(self._size, self._size + count, dtype=np.int64)
        means = np.asarray(self.dist.quantile(rng.uniforms(self.seed, rng.TAG_ARMS, ids)), dtype=float)
        self._grow(self._size + count)
        self._means[self._size:self._size + count] = means
        self._size += count
        if self.record:
            for i in ids:
                self._log("new", int(i), None)
        return ids

    def _grow(self, needed):
        if needed <= self._means.size:
            return
        cap = max(needed, 2 * self._means.size, 16)
        for name, dtype in (("_means", float), ("_counts", np.int64), ("_path", float)):
            old = getattr(self, name)
            new = np.zeros(cap, dtype=dtype)
            new[:old.size] = old
            setattr(self, name, new)

    def _check_ids(self, ids):
        ids = np.atleast_1d(np.asarray(ids, dtype=np.int64))
        if ids.size and (ids.min() < 0 or ids.max() >= self._size):
            raise UnknownArm(f"arm id out of range [0, {self._size})")
        return ids

    # -- pulls --------------------------------------------------------------

    def pull(self, arm_id: int) -> float:
        """One observation of ``arm_id``."""
        return float(self.pull_series(arm_id, 1)[0])

    def pull_series(self, arm_id: int, count: int) -> np.ndarray:
        """``count`` consecutive observations of a single arm, in pull order."""
        (arm,) = self._check_ids([arm_id])
        start = int(self._counts[arm])
        times = np.arange(start, start + count + 1, dtype=np.int64)
        path = rng.brownian(self.seed, np.full(times.size, arm), times)
        obs = self._means[arm] + self.noise_sd * np.diff(path)
        self._advance(np.array([arm]), count, path[-1:])
        if self.record:
            for y in obs:
                self._log("pull", int(arm), float(y))
        return obs

    def pull_many(self, arm_ids, count: int) -> np.ndarray:
        """Pull every arm in ``arm_ids`` (distinct) ``count`` times; return per-arm sums."""
        ids = self._check_ids(arm_ids)
        count = int(count)
        if count < 0:
            raise ValueError("count must be nonnegative")
        if np.unique(ids).size != ids.size:
            raise ValueError("arm ids in one batch must be distinct")
        if count == 0 or ids.size == 0:
            return np.zeros(ids.size)
        if self.record:
            return np.array([self.pull_series(int(i), count).sum() for i in ids])
        start_path = self._path[ids]
        end_path = rng.brownian(self.seed, ids, self._counts[ids] + count)
        sums = count * self._means[ids] + self.noise_sd * (end_path - start_path)
        self._advance(ids, count, end_path)
        return sums

    def _advance(self, ids, count, end_path):
        self._counts[ids] += count
        self._path[ids] = end_path
        self._total += count * ids.size

    def sample_means(self, arm_ids) -> np.ndarray:
        """Average of all observations collected so far for each arm."""
        ids = self._check_ids(arm_ids)
        counts = self._counts[ids]
        if np.any(counts == 0):
            raise ValueError("sample mean requested for an unpulled arm")
        return self._means[ids] + self.noise_sd * (self._path[ids] / counts)

    # -- accounting ---------------------------------------------------------

    def stats(self) -> tuple[int, list[int]]:
        return self._total, self._counts[:self._size].tolist()

    def pull_counts(self) -> np.ndarray:
        return self._counts[:self._size].copy()

    @property
    def transcript(self) -> list[TranscriptRecord]:
        return list(self._transcript)

    def _log(self, action, arm, obs):
        self._transcript.append(TranscriptRecord(len(self._transcript), action, arm, obs))

    def dump_transcript(self, path) -> None:
        """Write one JSON record per action, newline-delimited."""
        with open(path, "w") as fh:
            for rec in self._transcript:
                fh.write(json.dumps({"step": rec.step, "action": rec.action,
                                     "arm_id": rec.arm_id, "observation": rec.observation}) + "\n")

    # -- test-only hooks ----------------------------------------------------

    def reveal_means(self) -> np.ndarray:
        """Hidden arm means.  For oracles and tests only; learners must not call this."""
        return self._means[:self._size].copy()

    def reveal_sample_means_at(self, arm_ids, t: int) -> np.ndarray:
        """Sample mean each arm would show after exactly ``t`` pulls (tests only)."""
        ids = self._check_ids(arm_ids)
        path = rng.brownian(self.seed, ids, np.full(ids.size, int(t)))
        return self._means[ids] + self.noise_sd * path / t
