"""
Oracle-equivalence checks run as a dependency DAG.

Each check compares a closed form against its truncated Fock-space counterpart and reports
the deviation. A check runs once all its dependencies passed; if one of them failed or was
skipped, the check is skipped.
"""

from __future__ import annotations

import asyncio
import logging
import math
import time
from collections.abc import Callable

import networkx as nx  # type: ignore[import-untyped]
import numpy as np

from . import fock
from .errors import NlaQkdError
from .fourstate import correlation_Z, lambda_weights
from .nla import amplified_variance, equivalent_channel, equivalent_output_variance
from .record import RunRecord
from .types import (
    ChannelParams,
    Check,
    CheckOutcome,
    CheckStatus,
    Event,
    EventType,
    FockDensityMatrix,
    ProtocolParams,
)

logger = logging.getLogger(__name__)

Probe = Callable[[], tuple[float, str]]

_TERMINAL = {CheckStatus.PASSED, CheckStatus.FAILED, CheckStatus.SKIPPED}
_BLOCKING = {CheckStatus.FAILED, CheckStatus.SKIPPED}


class CheckGraph:
    """
    DAG of Checks stored in a DiGraph. Each node keeps the Check object in node['check'].
    Edges are oriented as: dependency  ->  check
    """

    def __init__(self) -> None:
        self.g = nx.DiGraph()

    # ── mutation ──────────────────────────────────────────────────────────────────
    def add_check(self, check: Check) -> None:
        self.g.add_node(check.id, check=check)
        for dep in check.dependencies:
            self.add_dependency(check.id, dep)

    def add_dependency(self, check_id: str, depends_on_id: str) -> None:
        if depends_on_id not in self.g:
            raise KeyError(f"unknown dependency {depends_on_id!r} of check {check_id!r}")
        self.g.add_edge(depends_on_id, check_id)
        if not nx.is_directed_acyclic_graph(self.g):
            self.g.remove_edge(depends_on_id, check_id)
            raise ValueError(f"dependency {depends_on_id!r} -> {check_id!r} closes a cycle")

    def mark_running(self, check_id: str) -> None:
        check = self.get(check_id)
        if check.status not in _TERMINAL:
            check.status = CheckStatus.RUNNING

    def mark_done(self, check_id: str, outcome: CheckOutcome) -> None:
        check = self.get(check_id)
        check.status = CheckStatus.PASSED if outcome.passed else CheckStatus.FAILED
        check.deviation = outcome.deviation
        check.detail = outcome.detail

    # ── queries ───────────────────────────────────────────────────────────────────
    def checks(self) -> list[Check]:
        return [self.g.nodes[n]["check"] for n in nx.topological_sort(self.g)]

    def get(self, check_id: str) -> Check:
        return self.g.nodes[check_id]["check"]

    def ready_checks(self) -> list[Check]:
        return [c for c in self.checks() if c.status is CheckStatus.READY]

    # ── readiness propagation ─────────────────────────────────────────────────────
    def recompute_readiness(self) -> list[Check]:
        """
        Idempotent pass over PENDING/READY nodes; returns the checks skipped by this pass.
        - Any predecessor FAILED/SKIPPED -> SKIPPED
        - All predecessors PASSED -> READY
        - Else -> PENDING
        """
        skipped: list[Check] = []
        for n in nx.topological_sort(self.g):
            check: Check = self.g.nodes[n]["check"]
            if check.status not in {CheckStatus.PENDING, CheckStatus.READY}:
                continue
            preds = [self.g.nodes[p]["check"] for p in self.g.predecessors(n)]
            blocker = next((p for p in preds if p.status in _BLOCKING), None)
            if blocker is not None:
                check.status = CheckStatus.SKIPPED
                check.detail = f"blocked by {blocker.id}"
                skipped.append(check)
            elif all(p.status is CheckStatus.PASSED for p in preds):
                check.status = CheckStatus.READY
            else:
                check.status = CheckStatus.PENDING
        return skipped

    def to_state(self) -> list[dict[str, object]]:
        return [
            {
                "id": c.id,
                "title": c.title,
                "status": c.status.value,
                "deviation": c.deviation,
                "tolerance": c.tolerance,
                "dependencies": list(self.g.predecessors(c.id)),
                "detail": c.detail,
            }
            for c in self.checks()
        ]


class VerificationRunner:
    """Runs the READY checks of the graph concurrently, round by round.

    ``batch_size`` caps how many checks one round dispatches; ``None`` dispatches them all.
    """

    def __init__(self, *, record: RunRecord | None = None, batch_size: int | None = None):
        self.record = record or RunRecord()
        self.batch_size = batch_size
        self.graph = CheckGraph()
        self._probes: dict[str, Probe] = {}
        self._events: list[Event] = []

    def add_check(self, check: Check, probe: Probe) -> None:
        self.graph.add_check(check)
        self._probes[check.id] = probe
        self._events.append(Event(type=EventType.CHECK_ADDED, payload=check.model_dump()))

    @property
    def events(self) -> list[Event]:
        return list(self._events)

    async def run(self) -> list[Check]:
        while True:
            for check in self.graph.recompute_readiness():
                logger.info("skipping %s: %s", check.id, check.detail)
                self._events.append(
                    Event(type=EventType.CHECK_SKIPPED, payload={"check": check.id})
                )
                await self.record.append_log(
                    {"check": check.id, "status": check.status.value, "note": check.detail}
                )
            await self.record.set("checks", self.graph.to_state())

            if all(c.status in _TERMINAL for c in self.graph.checks()):
                break
            batch = self.graph.ready_checks()[: self.batch_size]
            for check in batch:
                self.graph.mark_running(check.id)
                self._events.append(
                    Event(type=EventType.CHECK_DISPATCHED, payload={"check": check.id})
                )
            await asyncio.gather(*(self._run_check(c) for c in batch))

        await self.record.bump_metric("runs_completed", 1)
        await self.record.set("checks", self.graph.to_state())
        return self.graph.checks()

    async def _run_check(self, check: Check) -> None:
        t0 = time.perf_counter()
        try:
            deviation, detail = await asyncio.to_thread(self._probes[check.id])
            passed = math.isfinite(deviation) and deviation <= check.tolerance
        except (NlaQkdError, ValueError) as exc:
            deviation, detail, passed = math.nan, f"{type(exc).__name__}: {exc}", False
        outcome = CheckOutcome(
            check_id=check.id,
            passed=passed,
            deviation=None if math.isnan(deviation) else deviation,
            detail=detail,
            latency_ms=int((time.perf_counter() - t0) * 1000),
        )
        self.graph.mark_done(check.id, outcome)
        logger.info("%s %s (deviation %s)", check.id, check.status.value, outcome.deviation)
        await self.record.append_log(
            {"check": check.id, "status": check.status.value, "deviation": outcome.deviation}
        )
        await self.record.record_artifact(f"result:{check.id}", outcome.model_dump())
        self._events.append(Event(type=EventType.RESULT_EMITTED, payload=outcome.model_dump()))


# ── the oracle-equivalence suite ─────────────────────────────────────────────────────
def build_verification_suite(
    runner: VerificationRunner,
    *,
    alpha2: float = 0.125,
    cutoff: int = fock.DEFAULT_CUTOFF,
    gain: float = 2.0,
    lambda2: float = 0.01,
    displacement: float = 0.3,
    loss_db: float = 3.0,
    eps: float = 0.004,
) -> VerificationRunner:
    """Register the closed-form versus truncated-Fock checks on ``runner``."""
    p = ProtocolParams.from_alpha2(alpha2, beta=1.0)
    ch = ChannelParams.from_loss_db(loss_db, eps)
    alpha, lam = p.alpha, math.sqrt(lambda2)

    def lambda_normalization() -> tuple[float, str]:
        total = sum(lambda_weights(alpha).as_tuple())
        return abs(total - 1.0), f"sum of weights {total:.15g}"

    def phi_orthonormality() -> tuple[float, str]:
        phis = fock.build_phi_states(alpha, cutoff)
        gram = np.array([[a.overlap(b) for b in phis] for a in phis])
        return float(np.max(np.abs(gram - np.eye(4)))), f"N={cutoff}"

    def phi_decomposition() -> tuple[float, str]:
        return fock.phi_decomposition_error(alpha, cutoff), "coherent states from φ basis"

    def mode_variance() -> tuple[float, str]:
        var_a, var_b, n_b = fock.oracle_mode_variance(alpha, cutoff)
        dev = max(abs(var_a - p.v), abs(var_b - p.v), abs(n_b - p.alpha2))
        return dev, f"<X_A^2>={var_a:.12g} <X_B^2>={var_b:.12g} <n_B>={n_b:.12g}"

    def correlation() -> tuple[float, str]:
        z, z_oracle = correlation_Z(alpha), fock.oracle_Z(alpha, cutoff)
        return abs(z - z_oracle), f"Z={z:.12g} oracle={z_oracle:.12g}"

    def thermal_variance() -> tuple[float, str]:
        rho = fock.displaced_thermal(displacement, lam, cutoff)
        mean_a, var = fock.quadrature_moments(rho)
        expected = (1.0 + lambda2) / (1.0 - lambda2)
        dev = max(abs(var - expected), abs(mean_a - displacement))
        return dev, f"variance {var:.12g} expected {expected:.12g}"

    def amplified() -> FockDensityMatrix:
        return fock.amplify_displaced_thermal(displacement, lam, gain, cutoff)

    def nla_mean() -> tuple[float, str]:
        mean_a, _ = fock.quadrature_moments(amplified())
        expected = gain * (1.0 - lambda2) / (1.0 - gain * gain * lambda2) * displacement
        return abs(mean_a - expected), f"<a>={mean_a.real:.12g} expected {expected:.12g}"

    def nla_variance() -> tuple[float, str]:
        _, var = fock.quadrature_moments(amplified())
        glam2 = gain * gain * lambda2
        expected = (1.0 + glam2) / (1.0 - glam2)
        return abs(var - expected), f"variance {var:.12g} expected {expected:.12g}"

    def mixture_variance() -> tuple[float, str]:
        oracle = fock.oracle_output_variance(p, ch, gain, cutoff)
        closed = amplified_variance(p, ch, gain)
        return abs(oracle - closed), f"oracle {oracle:.12g} closed form {closed:.12g}"

    def channel_variance() -> tuple[float, str]:
        eq = equivalent_channel(ch, gain, alpha=alpha)
        closed = amplified_variance(p, ch, gain)
        via_channel = equivalent_output_variance(eq)
        regime = "physical" if eq.physical else f"beyond g_max={eq.g_max:.9g}"
        detail = f"1 + eta eps_g + 2 eta alpha^2 = {via_channel:.12g} ({regime})"
        return abs(closed - via_channel), detail

    runner.add_check(
        Check(id="lambda-normalization", title="λ weights sum to 1", tolerance=1e-12),
        lambda_normalization,
    )
    runner.add_check(
        Check(
            id="phi-orthonormality",
            title="φ_k orthonormal",
            tolerance=1e-8,
            dependencies=["lambda-normalization"],
        ),
        phi_orthonormality,
    )
    runner.add_check(
        Check(
            id="phi-decomposition",
            title="coherent states rebuilt from φ_k",
            tolerance=1e-10,
            dependencies=["phi-orthonormality"],
        ),
        phi_decomposition,
    )
    runner.add_check(
        Check(
            id="mode-variance",
            title="<X²> = V on both modes",
            tolerance=1e-8,
            dependencies=["phi-orthonormality"],
        ),
        mode_variance,
    )
    runner.add_check(
        Check(
            id="correlation",
            title="closed-form Z against <X_A X_B>",
            tolerance=1e-8,
            dependencies=["phi-orthonormality"],
        ),
        correlation,
    )
    runner.add_check(
        Check(
            id="displaced-thermal-variance",
            title="thermal variance (1+λ²)/(1−λ²)",
            tolerance=1e-6,
        ),
        thermal_variance,
    )
    runner.add_check(
        Check(
            id="nla-mean",
            title="amplified displacement",
            tolerance=1e-5,
            dependencies=["displaced-thermal-variance"],
        ),
        nla_mean,
    )
    runner.add_check(
        Check(
            id="nla-variance",
            title="amplified thermal variance",
            tolerance=1e-5,
            dependencies=["displaced-thermal-variance"],
        ),
        nla_variance,
    )
    runner.add_check(
        Check(
            id="mixture-variance",
            title="amplified four-state mixture variance",
            tolerance=1e-5,
            dependencies=["nla-mean", "nla-variance"],
        ),
        mixture_variance,
    )
    runner.add_check(
        Check(
            id="equivalent-channel-variance",
            title="equivalent-channel output variance",
            tolerance=1e-5,
            dependencies=["mixture-variance"],
        ),
        channel_variance,
    )
    return runner

