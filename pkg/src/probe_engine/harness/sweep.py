"""Grid sweeps over flux phase, bias ratio and force scale."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

from .. import __version__
from ..errors import ProbeEngineError
from ..pipeline import analyse_point, onsager_chain
from .config import SweepConfig
from .datasets import Column, Dataset, build_timestamp

SWEEP_COLUMNS = [
    Column("phi", "rad", description="flux phase"),
    Column("delta", "1", description="X_L^T / X_P^T"),
    Column("x_lt", "1/T", description="X_L^T"),
    Column("regime", "-", "str"),
    Column("x_m", "1", description="asymmetry parameter"),
    Column("y_m", "1", description="figure of merit"),
    Column("d_m", "1", description="characteristic parameter"),
    Column("h_m", "1", description="bound function d_m x_m / (x_m - 1)^2"),
    Column("eta_pmax", "1", description="efficiency at maximum power, closed form"),
    Column("eta_pmax_direct", "1", description="efficiency at maximum power, from currents"),
    Column("eta_c_pmax", "1", description="Carnot efficiency at maximum power"),
    Column("bound_l11", "1/T", description="first Onsager-bound residual"),
    Column("bound_l22", "1/T", description="second Onsager-bound residual"),
    Column("bound_mixed", "1/T^2", description="third Onsager-bound residual"),
    Column("bound_pass", "-", "int"),
    Column("h_bound_pass", "-", "int", "y_m lies between 0 and H_m"),
    Column("flags", "-", "str"),
    Column("error", "-", "str"),
]


def parallel_map(fn, items, workers: int = 1) -> list:
    """``list(map(fn, items))``, optionally on a process pool; order is kept."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=1))


def _flags(gp) -> str:
    flags = []
    if gp.at_pole:
        flags.append("pole")
    if gp.probe_hotter:
        flags.append("probe-hotter")
    if gp.point is not None and gp.merit is None:
        flags.append("non-engine")
    return ";".join(flags)


def _opt(value):
    return None if value is None else float(value)


def _row(phi, gp) -> dict:
    row = dict(phi=float(phi), delta=float(gp.delta), x_lt=float(gp.x_lt), error=gp.error or "")
    row["flags"] = _flags(gp)
    if gp.point is not None:
        row["regime"] = gp.point.regime.value
        row["eta_c_pmax"] = _opt(gp.point.eta_c_at_pmax)
        row["eta_pmax_direct"] = _opt(gp.point.eta_at_pmax)
    if gp.bounds is not None:
        row.update(
            bound_l11=float(gp.bounds.residuals[0]),
            bound_l22=float(gp.bounds.residuals[1]),
            bound_mixed=float(gp.bounds.residuals[2]),
            bound_pass=int(gp.bounds.ok),
        )
    if gp.merit is not None:
        row.update(x_m=gp.merit.x, y_m=gp.merit.y, d_m=gp.merit.d, eta_pmax=_opt(gp.eta_formula))
    if gp.h is not None:
        row.update(h_m=gp.h.h_m, h_bound_pass=int(gp.bound_ok))
    return row


def _sweep_task(args) -> list[dict]:
    params, phi, deltas, scales, window, tol = args
    model = params.build(phi)
    try:
        chain = onsager_chain(model, window, tol)
        coeffs = chain.coefficients()
    except (ProbeEngineError, ArithmeticError, ValueError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return [
            dict(phi=float(phi), delta=float(d), x_lt=float(s), flags="", error=msg)
            for d in deltas
            for s in scales
        ]
    return [_row(phi, analyse_point(chain, coeffs, float(d), float(s))) for d in deltas for s in scales]


def sweep_metadata(config: SweepConfig, title: str) -> dict:
    return {
        "title": title,
        "parameters": config.numeric_dict(),
        "tolerances": {
            "quadrature_abs": config.quadrature.tol,
            "bound_residual": -1e-9,
            "pole": 1e-9,
            "zero_heat_band": 1e-12,
        },
        "provenance": f"probe_engine {__version__} config-sha256:{config.fingerprint()}",
        "timestamp": build_timestamp(),
    }


def run_sweep(config: SweepConfig, phis=None, deltas=None) -> Dataset:
    """Evaluate every (phi, delta, force scale) point of the configured grid.

    Rows are ordered by phi, then delta, then scale, independent of the
    worker count. Points whose regime is not in the configured filter are
    dropped; rows carrying an error are always kept.
    """
    g = config.grids
    phis = g.phi.values() if phis is None else phis
    deltas = g.delta.values() if deltas is None else deltas
    q = config.quadrature
    tasks = [(config.model, float(p), tuple(deltas), tuple(g.force_scales), q.window, q.tol) for p in phis]
    chunks = parallel_map(_sweep_task, tasks, config.workers)
    ds = Dataset(
        "SWEEP", SWEEP_COLUMNS, metadata=sweep_metadata(config, "engine sweep at maximum power")
    )
    keep = set(config.regimes)
    for chunk in chunks:
        for row in chunk:
            if row["error"] or row.get("regime") in keep:
                ds.add(**row)
    ds.metadata["row_count"] = len(ds.rows)
    ds.metadata["non_finite"] = sum(
        1 for row in ds.rows for v in row if isinstance(v, float) and not math.isfinite(v)
    )
    return ds
