"""Slanted triangular learning rates, discriminative rates and gradual unfreezing."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping

from ..errors import ContractError


@dataclass(frozen=True)
class STLRParams:
    lr_max: float
    ratio: float = 32.0
    cut_frac: float = 0.1
    total_steps: int = 2

    def __post_init__(self):
        if not self.lr_max > 0:
            raise ContractError("lr_max must be > 0")
        if not self.ratio > 1:
            raise ContractError("ratio must be > 1")
        if not 0 < self.cut_frac < 1:
            raise ContractError("cut_frac must lie in (0, 1)")
        if self.total_steps < 2:
            raise ContractError("total_steps must be >= 2")

    @property
    def cut(self) -> int:
        # clamp so both the rising and the falling leg have at least one step
        return min(max(1, math.floor(self.total_steps * self.cut_frac)), self.total_steps - 1)


def stlr_lr(t: int, p: STLRParams) -> float:
    """Learning rate at step ``t``: linear warm-up to ``lr_max`` at the cut, then linear decay.

    The floor is ``lr_max / ratio``, reached at ``t = 0`` and ``t = T``.
    """
    T, cut = p.total_steps, p.cut
    if not 0 <= t <= T:
        raise ContractError(f"step {t} outside [0, {T}]")
    if t == cut:
        return p.lr_max
    frac = t / cut if t < cut else 1 - (t - cut) / (T - cut)
    if frac == 0:
        return p.lr_max / p.ratio
    return p.lr_max * (1 + frac * (p.ratio - 1)) / p.ratio


def stlr_schedule(p: STLRParams) -> List[float]:
    return [stlr_lr(t, p) for t in range(p.total_steps + 1)]


def discriminative_lrs(base_lr: float, groups: int, decay: float = 2.6) -> List[float]:
    """Per-group rates G0..Gn: the last group gets ``base_lr``, each earlier one ``/ decay``."""
    if groups < 1:
        raise ContractError("groups must be >= 1")
    if not decay > 1:
        raise ContractError("decay must be > 1")
    lrs = [base_lr]
    for _ in range(groups - 1):
        lrs.append(lrs[-1] / decay)
    return lrs[::-1]


class UnfreezeSchedule:
    """Trainable layer groups per (1-based) epoch.

    Sets must grow monotonically and the final epoch must train every group.
    """

    def __init__(self, plan: Mapping[int, Iterable[int]], n_groups: int = 3):
        self.n_groups = n_groups
        self.plan: Dict[int, FrozenSet[int]] = {int(e): frozenset(g) for e, g in plan.items()}
        epochs = sorted(self.plan)
        if not epochs or epochs != list(range(1, len(epochs) + 1)):
            raise ContractError(f"schedule must cover epochs 1..N contiguously, got {epochs}")
        everything = frozenset(range(n_groups))
        prev = frozenset()
        for e in epochs:
            groups = self.plan[e]
            if not groups <= everything:
                raise ContractError(f"epoch {e}: unknown group in {sorted(groups)}")
            if not prev <= groups:
                raise ContractError(f"epoch {e}: trainable groups shrank from {sorted(prev)}")
            prev = groups
        if prev != everything:
            raise ContractError("the final epoch must train every group")

    @property
    def epochs(self) -> int:
        return len(self.plan)

    def __getitem__(self, epoch: int) -> FrozenSet[int]:
        return self.plan[epoch]

    def __eq__(self, other):
        return isinstance(other, UnfreezeSchedule) and self.plan == other.plan

    def __repr__(self):
        body = ", ".join(f"{e}: {sorted(g)}" for e, g in sorted(self.plan.items()))
        return f"UnfreezeSchedule({{{body}}})"

    @classmethod
    def gradual(cls, epochs: int, n_groups: int = 3) -> "UnfreezeSchedule":
        """Last group first, one more group per epoch; compressed so the final epoch trains all."""
        plan = {}
        for e in range(1, epochs + 1):
            k = min(n_groups, max(e, n_groups - (epochs - e)))
            plan[e] = range(n_groups - k, n_groups)
        return cls(plan, n_groups)

    @classmethod
    def full(cls, epochs: int, n_groups: int = 3) -> "UnfreezeSchedule":
        return cls({e: range(n_groups) for e in range(1, epochs + 1)}, n_groups)

    def to_dict(self) -> dict:
        return {str(e): sorted(g) for e, g in sorted(self.plan.items())}
