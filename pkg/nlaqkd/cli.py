from __future__ import annotations

import asyncio
import io
import logging
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import typer

from .checks import VerificationRunner, build_verification_suite
from .config import RunConfig, build_config
from .csvout import write_csv
from .errors import ConfigError, UnphysicalCovarianceError
from .fourstate import key_rate
from .grid import evaluate_grid
from .nla import equivalent_channel, g_max, nla_key_rate
from .record import RunRecord
from .solvers import applicable_rate, distance_to_loss, max_excess_noise
from .types import (
    ChannelParams,
    CheckStatus,
    FrontierOutcome,
    FrontierResult,
    KeyRateBreakdown,
    RateStatus,
)

app = typer.Typer(no_args_is_help=True, add_completion=False)

# shared options; None means "not given" so config files and defaults can fill in
VA = typer.Option(None, "--va", help="Modulation variance V_A = 2α².")
ALPHA2 = typer.Option(None, "--alpha2", help="α², mutually exclusive with --va.")
BETA = typer.Option(None, "--beta", help="Reconciliation efficiency β.")
EPS = typer.Option(None, "--eps", help="Excess noise ε (shot-noise units).")
LOSS_DB = typer.Option(None, "--loss-db", help="Channel loss in dB.")
DISTANCE = typer.Option(None, "--distance-km", help="Fiber length in km.")
ATTEN = typer.Option(None, "--atten", help="Fiber attenuation in dB/km.")
GAIN = typer.Option(None, "--gain", help="NLA gain g (omit for the original protocol).")
PSUCCESS = typer.Option(None, "--psuccess", help="inverse-g2 or a fixed probability.")
GRID = typer.Option(None, "--grid", help="Grid as start:stop:step.")
TOL = typer.Option(None, "--tol", help="Bisection tolerance.")
CUTOFF = typer.Option(None, "--cutoff", help="Photon-number cutoff N.")
WORKERS = typer.Option(None, "-w", "--workers", help="Grid points evaluated concurrently.")
CONFIG = typer.Option(None, "-c", "--config", help="TOML file with long flag names as keys.")
OUTPUT = typer.Option(None, "-o", "--output", help="Write CSV here instead of stdout.")


@app.callback()
def main(
    verbose: bool = typer.Option(False, "-v", "--verbose", help="Debug logging on stderr."),
) -> None:
    """Key rates and frontiers of four-state CV-QKD with a noiseless linear amplifier."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


# ── helpers ──────────────────────────────────────────────────────────────────────
def _config(command: str, config: Path | None, **flags: Any) -> RunConfig:
    try:
        return build_config(command, flags, config)
    except ConfigError as exc:
        raise typer.BadParameter(str(exc), param_hint=exc.flag) from exc


def _emit(cfg: RunConfig, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    if cfg.output is not None:
        cfg.output.write_text(buf.getvalue(), encoding="utf-8", newline="")
    else:
        typer.echo(buf.getvalue(), nl=False)


def _frontier_cell(res: FrontierResult) -> float | None:
    return None if res.outcome is FrontierOutcome.UNDEFINED_AT_START else res.value


def _breakdown(fn: Any, *args: Any) -> KeyRateBreakdown:
    try:
        return fn(*args)
    except UnphysicalCovarianceError:
        return KeyRateBreakdown.unphysical(RateStatus.UNPHYSICAL_COVARIANCE)


# ── commands ─────────────────────────────────────────────────────────────────────
@app.command("keyrate")
def cmd_keyrate(
    va: float = VA,
    alpha2: float = ALPHA2,
    beta: float = BETA,
    eps: float = EPS,
    loss_db: float = LOSS_DB,
    distance_km: float = DISTANCE,
    atten: float = ATTEN,
    gain: float = GAIN,
    psuccess: str = PSUCCESS,
    config: Path = CONFIG,
    output: Path = OUTPUT,
) -> None:
    """One key-rate evaluation, as a single CSV row."""
    cfg = _config(
        "keyrate",
        config,
        va=va,
        alpha2=alpha2,
        beta=beta,
        eps=eps,
        loss_db=loss_db,
        distance_km=distance_km,
        atten=atten,
        gain=gain,
        psuccess=psuccess,
        output=output,
    )
    p, ch, nla = cfg.protocol(), cfg.channel(), cfg.nla()
    header = ["mutual_information", "holevo_bound", "nu1", "nu2", "nu3", "rate", "status"]
    if nla is None:
        r = _breakdown(key_rate, p, ch)
    else:
        r = _breakdown(nla_key_rate, p, ch, nla)
    row: list[Any] = [r.mutual_information, r.holevo_bound, r.nu1, r.nu2, r.nu3, r.rate, r.status]
    if nla is not None:
        eq = equivalent_channel(ch, nla.gain, alpha=p.alpha)
        header += ["eta", "eps_g", "g_max", "p_success"]
        row += [eq.eta, eq.eps_g, eq.g_max, nla.success_probability()]
    _emit(cfg, header, [row])


@app.command("sweep")
def cmd_sweep(
    va: float = VA,
    alpha2: float = ALPHA2,
    beta: float = BETA,
    eps: float = EPS,
    atten: float = ATTEN,
    gain: float = GAIN,
    psuccess: str = PSUCCESS,
    grid: str = GRID,
    axis: str = typer.Option(None, "--axis", help="loss (dB) or distance (km)."),
    workers: int = WORKERS,
    config: Path = CONFIG,
    output: Path = OUTPUT,
) -> None:
    """Original and NLA key rates over a loss or distance grid."""
    cfg = _config(
        "sweep",
        config,
        va=va,
        alpha2=alpha2,
        beta=beta,
        eps=eps,
        atten=atten,
        gain=gain,
        psuccess=psuccess,
        grid=grid,
        axis=axis,
        workers=workers,
        output=output,
    )
    p, nla, fiber = cfg.protocol(), cfg.nla(), cfg.fiber()

    def row(x: float) -> list[Any]:
        loss = x if cfg.axis == "loss" else distance_to_loss(x, fiber)
        ch = cfg.channel(loss)
        original = applicable_rate(p, ch)
        if nla is None:
            return [x, original, None, None, None]
        eq = equivalent_channel(ch, nla.gain, alpha=p.alpha)
        return [x, original, applicable_rate(p, ch, nla), eq.eta, eq.eps_g]

    axis_column = "loss_db" if cfg.axis == "loss" else "distance_km"
    rows = evaluate_grid(row, cfg.grid_points(), workers=cfg.workers)
    _emit(cfg, [axis_column, "rate_original", "rate_nla", "eta", "eps_g"], rows)


@app.command("gmax")
def cmd_gmax(
    eps: float = EPS,
    grid: str = GRID,
    workers: int = WORKERS,
    config: Path = CONFIG,
    output: Path = OUTPUT,
) -> None:
    """Largest physical NLA gain over a loss grid."""
    cfg = _config("gmax", config, eps=eps, grid=grid, workers=workers, output=output)

    def row(loss: float) -> list[Any]:
        return [loss, g_max(ChannelParams.from_loss_db(loss, cfg.eps))]

    _emit(cfg, ["loss_db", "g_max"], evaluate_grid(row, cfg.grid_points(), workers=cfg.workers))


@app.command("frontier")
def cmd_frontier(
    va: float = VA,
    alpha2: float = ALPHA2,
    beta: float = BETA,
    gain: float = GAIN,
    psuccess: str = PSUCCESS,
    grid: str = GRID,
    tol: float = TOL,
    workers: int = WORKERS,
    config: Path = CONFIG,
    output: Path = OUTPUT,
) -> None:
    """Maximal tolerable excess noise over a loss grid, with and without the NLA."""
    cfg = _config(
        "frontier",
        config,
        va=va,
        alpha2=alpha2,
        beta=beta,
        gain=gain,
        psuccess=psuccess,
        grid=grid,
        tol=tol,
        workers=workers,
        output=output,
    )
    p, nla = cfg.protocol(), cfg.nla()
    step = cfg.tol if cfg.tol is not None else 1e-6

    def row(loss: float) -> list[Any]:
        original = _frontier_cell(max_excess_noise(p, loss, None, step))
        amplified = None if nla is None else _frontier_cell(max_excess_noise(p, loss, nla, step))
        return [loss, original, amplified]

    _emit(
        cfg,
        ["loss_db", "eps_max_original", "eps_max_nla"],
        evaluate_grid(row, cfg.grid_points(), workers=cfg.workers),
    )


@app.command("verify")
def cmd_verify(
    alpha2: float = ALPHA2,
    va: float = VA,
    cutoff: int = CUTOFF,
    gain: float = GAIN,
    lambda2: float = typer.Option(None, "--lambda2", help="λ² of the displaced thermal state."),
    displacement: float = typer.Option(None, "--displacement", help="Displacement β."),
    loss_db: float = LOSS_DB,
    eps: float = EPS,
    report: Path = typer.Option(None, "--report", help="Write the run record JSON here."),
    config: Path = CONFIG,
    output: Path = OUTPUT,
) -> None:
    """Closed forms against the truncated Fock-space oracle; exit 1 on any failure."""
    cfg = _config(
        "verify",
        config,
        alpha2=alpha2,
        va=va,
        cutoff=cutoff,
        gain=gain,
        lambda2=lambda2,
        displacement=displacement,
        loss_db=loss_db,
        eps=eps,
        report=report,
        output=output,
    )
    runner = build_verification_suite(
        VerificationRunner(record=RunRecord(report_path=cfg.report)),
        alpha2=cfg.protocol().alpha2,
        cutoff=cfg.cutoff,
        gain=cfg.gain if cfg.gain is not None else 1.0,
        lambda2=cfg.lambda2,
        displacement=cfg.displacement,
        loss_db=cfg.loss(),
        eps=cfg.eps,
    )
    checks = asyncio.run(runner.run())
    _emit(
        cfg,
        ["check", "status", "deviation", "tolerance", "detail"],
        [[c.id, c.status, c.deviation, c.tolerance, c.detail] for c in checks],
    )
    failed = [c.id for c in checks if c.status is not CheckStatus.PASSED]
    if failed:
        typer.echo(f"verification failed: {', '.join(failed)}", err=True)
        raise typer.Exit(code=1)
