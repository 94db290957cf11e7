#!/usr/bin/env python3
"""
Pydantic models for RedunFlow results
Provides type-safe data structures with validation for explanation records,
evaluation curves and reports, and the verification suite.
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class CurveMetric(str, Enum):
    """Quantity tracked along a masking curve"""
    POSTHOC_ACCURACY = "posthoc_accuracy"
    MODEL_OUTPUT = "model_output"


class CurvePoint(BaseModel):
    """One point of a masking curve, averaged over trials"""
    fraction: float = Field(..., ge=0, le=1, description="Share of the maskable features removed")
    value: float = Field(..., ge=0, le=1, description="Metric averaged over trials")
    std: float = Field(0.0, ge=0, description="Standard deviation across trials")

    model_config = ConfigDict(extra='forbid')


class MaskingCurve(BaseModel):
    """Metric as a function of the masked fraction"""
    metric: CurveMetric = CurveMetric.POSTHOC_ACCURACY
    points: List[CurvePoint] = Field(default_factory=list)
    cardinalities: List[List[int]] = Field(
        default_factory=list, description="Masked feature count per point and instance"
    )
    trials: int = Field(1, ge=1)

    model_config = ConfigDict(extra='forbid')

    @field_validator('points')
    @classmethod
    def validate_increasing(cls, v):
        fractions = [p.fraction for p in v]
        if any(b <= a for a, b in zip(fractions, fractions[1:])):
            raise ValueError("mask fractions must be strictly increasing")
        return v

    def values(self) -> List[float]:
        return [p.value for p in self.points]


class DirectionalDetail(BaseModel):
    """Per-instance outcome of sink and source masking"""
    instance_id: str
    sinks: List[int] = Field(default_factory=list)
    sources: List[int] = Field(default_factory=list)
    sink_masked_agrees: bool
    source_masked_agrees: bool

    model_config = ConfigDict(extra='forbid')

    @model_validator(mode='after')
    def validate_disjoint(self):
        if set(self.sinks) & set(self.sources):
            raise ValueError("sink and source sets must be disjoint")
        return self


class DirectionalReport(BaseModel):
    """Post-hoc accuracy after masking all sinks versus all sources, in percent"""
    accuracy_sink_masked: float = Field(..., ge=0, le=100)
    accuracy_source_masked: float = Field(..., ge=0, le=100)
    pct_features_masked_sink: float = Field(..., ge=0, le=100)
    pct_features_masked_source: float = Field(..., ge=0, le=100)
    instances: List[DirectionalDetail] = Field(default_factory=list)

    model_config = ConfigDict(extra='forbid')


class AucResult(BaseModel):
    """Insertion and deletion curves of one ranking on one instance"""
    iauc: float
    dauc: float
    insertion: List[float] = Field(default_factory=list)
    deletion: List[float] = Field(default_factory=list)
    target: int = Field(..., ge=0)

    model_config = ConfigDict(extra='forbid')


class GammaSweepRow(BaseModel):
    """Mean redundancy-graph density and sink-masked accuracy at one gamma"""
    gamma: float = Field(..., ge=0)
    density: float = Field(..., ge=0, le=1)
    sink_masked_accuracy: Optional[float] = Field(None, ge=0, le=1)
    instances: int = Field(..., ge=0)

    model_config = ConfigDict(extra='forbid')


class ExplanationRecord(BaseModel):
    """Everything computed for one instance, serialized as one JSON file"""
    instance_id: str
    d: int = Field(..., ge=1)
    target: int = Field(..., ge=0)
    method: str
    samples: Optional[int] = None
    seed: int
    phi: List[float]
    interaction: List[List[float]] = Field(..., description="Row i, column j: importance of i given j present")
    adjacency: List[List[float]] = Field(..., description="Transpose of interaction with zero diagonal")
    gamma: float = Field(..., ge=0)
    damping: float = Field(..., gt=0, lt=1)
    personalized: bool = False
    edges: List[Tuple[int, int]] = Field(default_factory=list)
    scc_groups: List[List[int]] = Field(default_factory=list)
    sources: List[int] = Field(default_factory=list)
    sinks: List[int] = Field(default_factory=list)
    pagerank: List[float] = Field(default_factory=list)
    pagerank_iterations: int = 0
    pagerank_converged: bool = True
    evaluations: int = 0
    feature_names: Optional[List[str]] = None
    runtime_seconds: Optional[float] = None

    model_config = ConfigDict(extra='forbid')

    @model_validator(mode='after')
    def validate_shapes(self):
        d = self.d
        if len(self.phi) != d or len(self.pagerank) not in (0, d):
            raise ValueError("phi and pagerank must have d entries")
        m = np.asarray(self.interaction, dtype=np.float64)
        a = np.asarray(self.adjacency, dtype=np.float64)
        if m.shape != (d, d) or a.shape != (d, d):
            raise ValueError("interaction and adjacency must be d x d")
        expected = m.T.copy()
        np.fill_diagonal(expected, 0.0)
        if not np.array_equal(a, expected):
            raise ValueError("adjacency must equal the transposed interaction matrix with zero diagonal")
        return self

    def interaction_matrix(self) -> np.ndarray:
        return np.asarray(self.interaction, dtype=np.float64)

    def adjacency_matrix(self) -> np.ndarray:
        return np.asarray(self.adjacency, dtype=np.float64)

    def ranking(self) -> List[int]:
        """Feature indices by descending PageRank, lower index first on ties"""
        scores = np.asarray(self.pagerank)
        return np.lexsort((np.arange(self.d), -scores)).tolist()


class CheckResult(BaseModel):
    """Outcome of one verification check over the seed range"""
    name: str
    passed: int = Field(0, ge=0)
    failed: int = Field(0, ge=0)
    first_failure_seed: Optional[int] = None
    detail: Optional[str] = None

    model_config = ConfigDict(extra='forbid')

    @property
    def ok(self) -> bool:
        return self.failed == 0


class SuiteReport(BaseModel):
    """Synthetic verification suite summary"""
    seeds: List[int] = Field(default_factory=list)
    checks: List[CheckResult] = Field(default_factory=list)
    observations: Dict[str, int] = Field(default_factory=dict, description="Logged, never asserted")
    fault_injected: bool = False

    model_config = ConfigDict(extra='forbid')

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed_checks(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.ok]


def create_explanation_record(
    instance_id: str,
    target: int,
    attribution,
    interaction,
    redundancy,
    sink_source,
    rank,
    damping: float,
    evaluations: int = 0,
    feature_names: Optional[List[str]] = None,
    runtime_seconds: Optional[float] = None,
) -> ExplanationRecord:
    """Create a validated record from the analysis objects of one instance"""
    m = interaction.m
    adjacency = m.T.copy()
    np.fill_diagonal(adjacency, 0.0)
    return ExplanationRecord(
        instance_id=instance_id,
        d=interaction.d,
        target=target,
        method=interaction.method,
        samples=interaction.sample_count,
        seed=interaction.seed or 0,
        phi=attribution.phi.tolist(),
        interaction=m.tolist(),
        adjacency=adjacency.tolist(),
        gamma=redundancy.gamma,
        damping=damping,
        personalized=rank.personalized,
        edges=redundancy.edge_list(),
        scc_groups=[list(c) for c in sink_source.condensation.components],
        sources=sink_source.sources,
        sinks=sink_source.sinks,
        pagerank=rank.scores.tolist(),
        pagerank_iterations=rank.iterations,
        pagerank_converged=rank.converged,
        evaluations=evaluations,
        feature_names=feature_names,
        runtime_seconds=runtime_seconds,
    )
