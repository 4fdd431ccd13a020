"""Majority-vote fusion of per-window decisions over a test instance."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .network import ModelConfig, NetworkParameters, forward
from .windowing import SchemeSpec, TestInstance, Window


@dataclass(frozen=True)
class VoteRecord:
    """Per-window votes and probabilities plus the fused decision."""

    votes: tuple[int, ...]
    probabilities: np.ndarray  # (n, num_classes)
    final: int
    tie_broken: bool
    origin: tuple[str, int] | None = None


def predict_window(
    params: NetworkParameters, config: ModelConfig, window: Window | np.ndarray
) -> tuple[int, np.ndarray]:
    """Classify one normalized window in inference mode.

    Returns (argmax class, probability vector); argmax ties resolve to the
    lowest class index.
    """
    values = window.values if isinstance(window, Window) else np.asarray(window)
    probs, _ = forward(config, params, values, training=False)
    probs = probs[0]
    return int(probs.argmax()), probs


def majority_vote(
    votes: Sequence[int], probs: Sequence[np.ndarray] | np.ndarray
) -> tuple[int, bool]:
    """Fuse expert votes: most frequent class wins.

    A count tie among leaders goes to the leader with the highest summed
    probability mass over all experts; any remaining tie goes to the lowest
    class index. ``tie_broken`` is set whenever counts alone were not decisive.
    """
    votes = list(votes)
    if not votes:
        raise ValueError("majority_vote needs at least one vote")
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] != len(votes):
        raise ValueError(
            f"expected one probability vector per vote, got {probs.shape} "
            f"for {len(votes)} votes"
        )
    num_classes = probs.shape[1]
    counts = np.bincount(votes, minlength=num_classes)
    top = counts.max()
    leaders = [c for c in range(num_classes) if counts[c] == top]
    if len(leaders) == 1:
        return leaders[0], False
    mass = probs.sum(axis=0)
    best = max(mass[c] for c in leaders)
    winners = [c for c in leaders if mass[c] == best]
    return winners[0], True


def predict_instance(
    params: NetworkParameters | Sequence[NetworkParameters],
    config: ModelConfig,
    instance: TestInstance,
    scheme: SchemeSpec,
) -> VoteRecord:
    """Classify each window of a test instance and fuse by majority vote.

    By default every expert is the same trained model; passing a sequence of
    parameter sets (one per expert) runs independently trained experts
    instead.
    """
    width = scheme.ensemble_width
    if len(instance.windows) != width:
        raise ValueError(
            f"instance has {len(instance.windows)} windows, scheme {scheme.id} "
            f"expects {width}"
        )
    stacked = np.stack([w.values for w in instance.windows])
    if isinstance(params, NetworkParameters):
        probs, _ = forward(config, params, stacked, training=False)
    else:
        experts = list(params)
        if len(experts) != width:
            raise ValueError(
                f"got {len(experts)} expert parameter sets, scheme expects {width}"
            )
        probs = np.stack(
            [forward(config, p, stacked[i], training=False)[0][0] for i, p in enumerate(experts)]
        )
    votes = tuple(int(v) for v in probs.argmax(axis=1))
    final, tie_broken = majority_vote(votes, probs)
    return VoteRecord(
        votes=votes,
        probabilities=probs,
        final=final,
        tie_broken=tie_broken,
        origin=instance.origin,
    )


def write_vote_log(records: Iterable[VoteRecord], path: str | Path) -> None:
    """Emit per-instance vote logs as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write("record_id,subsignal_index,votes,final,tie_broken\n")
        for rec in records:
            record_id, sub = rec.origin if rec.origin is not None else ("", "")
            votes = " ".join(str(v) for v in rec.votes)
            fh.write(f"{record_id},{sub},{votes},{rec.final},{str(rec.tie_broken).lower()}\n")
