"""Toy-unit scenarios (G = hbar = m = M = R = T = 1) used by the oracle checks,
the verify subcommand and the acceptance tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .domain import ExperimentScenario, resolution_for_gamma, toy_scenario
from .records import MeasurementRecord, make_record

# 1024 intervals: the slice counts 256 and 128 and the CN step counts used
# below all land on record samples
RECORD_POINTS = 1025


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    gamma_tilde: float
    record_kind: str
    record_params: dict = field(default_factory=dict)
    l_P: float = 0.1
    l_Q: float = 0.25
    packet_center: float = 0.2
    packet_width: float = 0.55
    packet_momentum: float = 0.3

    def scenario(self) -> ExperimentScenario:
        return toy_scenario(l_P=self.l_P, l_Q=self.l_Q)

    @property
    def resolution(self) -> float:
        return resolution_for_gamma(self.scenario(), self.gamma_tilde)

    def record(self, n_points: int = RECORD_POINTS, resolution: float | None = None) -> MeasurementRecord:
        res = self.resolution if resolution is None else resolution
        return make_record(self.record_kind, 0.0, 1.0, n_points, res, **self.record_params)


CORPUS: tuple[CorpusEntry, ...] = (
    CorpusEntry("unmonitored", 0.0, "constant", {"c": 0.0}),
    CorpusEntry("weak_zero", 0.5, "constant", {"c": 0.0}),
    CorpusEntry("weak_constant", 0.5, "constant", {"c": 0.1}),
    CorpusEntry("strong_constant", 2.0, "constant", {"c": 0.3}),
    CorpusEntry("strong_free_fall", 2.0, "free_fall", {"l0": 0.2, "v0": 0.0, "g": 1.0}),
    CorpusEntry("strong_sinusoid", 2.0, "sinusoid", {"A": 0.2, "omega0": 2 * math.pi, "phi": 0.0}),
    CorpusEntry("weak_sinusoid", 0.5, "sinusoid", {"A": 0.2, "omega0": 2 * math.pi, "phi": 0.0}),
)


def corpus_entry(name: str) -> CorpusEntry:
    for e in CORPUS:
        if e.name == name:
            return e
    raise KeyError(name)
