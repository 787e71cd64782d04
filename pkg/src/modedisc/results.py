from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PROB = "prob"
UD = "ud"
TASKS = (PROB, UD)
CHANNEL = "channel"
SOURCE = "source"


def check_task(task: str) -> str:
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}, got {task!r}")
    return task


@dataclass
class BoundResult:
    """One bound with enough metadata to reproduce it.

    ``bound`` is the value rounded to the safe side of the solver's
    duality gap. ``weights`` holds the optimal photon-number weights when
    the program exposes them.
    """

    scenario: str
    task: str
    bound: float
    status: str
    nbar: float | None = None
    n_max: int | None = None
    tol: float | None = None
    weights: np.ndarray | None = None
    primal: float | None = None
    dual: float | None = None
    family: str = ""
    wall_ms: float = 0.0
    details: dict = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "near-optimal")

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "task": self.task,
            "family": self.family,
            "nbar": self.nbar,
            "bound": self.bound,
            "status": self.status,
            "n_max": self.n_max,
            "tol": self.tol,
            "primal": self.primal,
            "dual": self.dual,
            "wall_ms": round(self.wall_ms, 3),
        }
        if self.weights is not None:
            out["weights"] = [float(x) for x in self.weights]
        for key, val in self.details.items():
            if isinstance(val, (int, float, str, bool)) or val is None:
                out[key] = val
        return out
