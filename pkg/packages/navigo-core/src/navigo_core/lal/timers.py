"""Waiting timers with forwarding-point priority."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from navigo_core.core.config_service import LalConfig
from navigo_core.core.models import FpClass, PacketKind

SECTION_M = 100.0


@dataclass(frozen=True)
class ClassTimers:
    """
    Timer band of one packet class, in milliseconds.

    Attributes:
        fp1: Base for nodes in a junction core
        fp2: Base for nodes in a junction ring
        per_section: Added per 100 m section the previous hop is closer than far_threshold
        edge_min: Edge-node timer when the previous hop is far
        edge_max: Edge-node timer when the previous hop is adjacent
        jitter: Upper bound of the uniform jitter
        cap: No draw exceeds this
    """

    fp1: float
    fp2: float
    per_section: float
    edge_min: float
    edge_max: float
    jitter: float
    cap: float


@dataclass(frozen=True)
class TimerParams:
    data: ClassTimers
    interest: ClassTimers
    far_threshold_m: float = 500.0
    hop_budget_ms: float = 50.0

    @classmethod
    def from_config(cls, config: LalConfig) -> TimerParams:
        return cls(
            data=ClassTimers(
                fp1=config.data_fp1_ms,
                fp2=config.data_fp2_ms,
                per_section=config.data_per_100m_ms,
                edge_min=config.data_edge_min_ms,
                edge_max=config.data_edge_max_ms,
                jitter=config.data_jitter_ms,
                cap=config.data_cap_ms,
            ),
            interest=ClassTimers(
                fp1=config.interest_fp1_ms,
                fp2=config.interest_fp2_ms,
                per_section=config.interest_per_100m_ms,
                edge_min=config.interest_edge_min_ms,
                edge_max=config.interest_edge_max_ms,
                jitter=config.interest_jitter_ms,
                cap=config.hop_budget_ms,
            ),
            far_threshold_m=config.far_threshold_m,
            hop_budget_ms=config.hop_budget_ms,
        )

    def band(self, kind: PacketKind) -> ClassTimers:
        return self.data if kind is PacketKind.DATA else self.interest

    @property
    def total_sections(self) -> int:
        return math.ceil(self.far_threshold_m / SECTION_M)


def sections_closer(params: TimerParams, dist_prev_hop: float) -> int:
    """100 m sections between the previous hop and the far threshold."""
    return max(0, math.ceil((params.far_threshold_m - dist_prev_hop) / SECTION_M))


def deterministic_timer(
    params: TimerParams, kind: PacketKind, fp: FpClass, dist_prev_hop: float
) -> float:
    """
    Jitter-free part of the waiting timer in milliseconds.

    FP nodes add a fixed increment for each section the previous hop is nearer than
    the far threshold. Edge nodes sit in a band above both FP classes, scaled by the
    same section count so that nearer previous hops wait longer.
    """
    if dist_prev_hop < 0:
        raise ValueError("Distance to previous hop must be non-negative")
    band = params.band(kind)
    k = sections_closer(params, dist_prev_hop)
    if fp is FpClass.FP1:
        value = band.fp1 + band.per_section * k
    elif fp is FpClass.FP2:
        value = band.fp2 + band.per_section * k
    else:
        value = band.edge_min + (band.edge_max - band.edge_min) * k / params.total_sections
    return min(value, band.cap, params.hop_budget_ms)


def waiting_timer(
    params: TimerParams,
    kind: PacketKind,
    fp: FpClass,
    dist_prev_hop: float,
    rng: np.random.Generator,
) -> float:
    """Waiting timer in milliseconds, deterministic given the generator state."""
    band = params.band(kind)
    base = deterministic_timer(params, kind, fp, dist_prev_hop)
    jitter = float(rng.uniform(0.0, band.jitter)) if band.jitter > 0 else 0.0
    return min(base + jitter, band.cap, params.hop_budget_ms)
