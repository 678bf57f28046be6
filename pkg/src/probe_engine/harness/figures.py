"""Datasets behind the bound, efficiency and d_m figures.

FIG2 to FIG5 are closed-form curves. FIG6 runs the dot-ring pipeline over
the (phi, delta) grid. Poles are never sampled: samples where a
denominator vanishes, and sign changes of a denominator between adjacent
samples, become gap-marker rows (``gap = 1``, value left empty) and are
listed under ``excluded_intervals`` in the metadata.
"""

from __future__ import annotations

import numpy as np

from ..coefficients import characteristic_parameter
from ..errors import DomainError
from ..labels import ENGINE_REGIMES, Branch
from ..performance import (
    efficiency_bound,
    h_function,
    load_ratio,
    normalized_efficiency,
    normalized_efficiency_at_power_gain,
    normalized_efficiency_at_power_gain_buttiker,
    normalized_efficiency_buttiker,
    power_ratio,
)
from ..pipeline import onsager_chain
from .config import SweepConfig
from .datasets import Column, Dataset
from .sweep import parallel_map, sweep_metadata

FIGURES = ("FIG2", "FIG3", "FIG4", "FIG5", "FIG6")
CA_LEVEL = 0.5
POLE_TOL = 1e-9


def normalize_id(figure: str) -> str:
    fid = str(figure).upper()
    if fid not in FIGURES:
        raise DomainError(f"unknown figure {figure!r}; expected one of {', '.join(f.lower() for f in FIGURES)}")
    return fid


def _excluded(axis, den, near: float = 0.0):
    """Indices of excluded samples and of sign changes between samples.

    Returns ``(bad, crossings)``: ``bad`` is a boolean mask of samples with
    ``|den| <= near``; ``crossings`` maps an index i to the interpolated
    root between samples i and i+1.
    """
    den = np.asarray(den, dtype=float)
    bad = np.abs(den) <= near
    crossings = {}
    for i in range(len(axis) - 1):
        if bad[i] or bad[i + 1]:
            continue
        if den[i] * den[i + 1] < 0:
            root = axis[i] - den[i] * (axis[i + 1] - axis[i]) / (den[i + 1] - den[i])
            crossings[i] = float(root)
    return bad, crossings


def _emit(ds, axis_name, axis, den, evaluate, base, value_name, near=0.0, extra=None):
    """Append one series to ``ds`` with gap markers at poles.

    ``evaluate`` is called once on the retained samples; ``extra`` maps
    column names to per-sample arrays (same length as ``axis``).
    """
    axis = np.asarray(axis, dtype=float)
    bad, crossings = _excluded(axis, den, near)
    keep = ~bad
    values = np.empty_like(axis)
    if keep.any():
        values[keep] = evaluate(axis[keep])
    extra = extra or {}
    intervals = ds.metadata.setdefault("excluded_intervals", [])
    for i, a in enumerate(axis):
        cells = {k: float(v[i]) for k, v in extra.items()}
        if bad[i]:
            ds.add(**base, **{axis_name: float(a), value_name: None, "gap": 1}, **cells)
            lo = float(axis[max(i - 1, 0)])
            hi = float(axis[min(i + 1, len(axis) - 1)])
            intervals.append({**base, "axis": axis_name, "interval": [lo, hi], "kind": "pole"})
            continue
        ds.add(**base, **{axis_name: float(a), value_name: float(values[i]), "gap": 0}, **cells)
        if i in crossings:
            root = crossings[i]
            marker = {k: None for k in extra}
            ds.add(**base, **{axis_name: root, value_name: None, "gap": 1}, **marker)
            intervals.append(
                {**base, "axis": axis_name, "interval": [float(a), float(axis[i + 1])], "kind": "sign-change"}
            )


# --------------------------------------------------------------------------
# Closed-form figures
# --------------------------------------------------------------------------


def fig2(config: SweepConfig) -> Dataset:
    """H_m(x_m) for each configured d_m plus the d = 1 reference H(x)."""
    columns = [
        Column("series", "-", "str", "H_m or the reference H"),
        Column("d_m", "1"),
        Column("x_m", "1"),
        Column("h", "1", description="d_m x_m / (x_m - 1)^2"),
        Column("gap", "-", "int"),
    ]
    ds = Dataset("FIG2", columns, metadata=sweep_metadata(config, "bound function H_m versus x_m"))
    x = config.grids.x.values()
    pole = (x - 1) ** 2
    near = POLE_TOL**2
    for d in config.grids.h_d_values:
        _emit(ds, "x_m", x, pole, lambda xs, d=d: h_function(xs, d), {"series": "H_m", "d_m": d}, "h", near)
    _emit(ds, "x_m", x, pole, lambda xs: h_function(xs, 1.0), {"series": "H", "d_m": 1.0}, "h", near)
    return ds


def fig3(config: SweepConfig) -> Dataset:
    """eta_m / eta_m(P_max) against the load ratio, with P / P_max."""
    columns = [
        Column("series", "-", "str", "voltage_probe or buttiker"),
        Column("d_m", "1", description="1 for the buttiker series"),
        Column("y_m", "1"),
        Column("epsilon", "1", description="X_L^V / X_L^V*"),
        Column("eta_ratio", "1", description="eta_m / eta_m(P_max)"),
        Column("power_ratio", "1", description="P / P_max = eps (2 - eps)"),
        Column("gap", "-", "int"),
    ]
    ds = Dataset("FIG3", columns, metadata=sweep_metadata(config, "normalized efficiency versus load"))
    eps = config.grids.epsilon.values()
    pr = {"power_ratio": power_ratio(eps)}
    for y in config.grids.y_values:
        for d in config.grids.d_values:
            _emit(
                ds, "epsilon", eps, (y + 2 * d) + y * (1 - eps),
                lambda e, y=y, d=d: normalized_efficiency(e, y, d),
                {"series": "voltage_probe", "d_m": d, "y_m": y}, "eta_ratio", extra=pr,
            )
        _emit(
            ds, "epsilon", eps, (y + 2) + y * (1 - eps),
            lambda e, y=y: normalized_efficiency_buttiker(e, y),
            {"series": "buttiker", "d_m": 1.0, "y_m": y}, "eta_ratio", extra=pr,
        )
    return ds


def fig4(config: SweepConfig) -> Dataset:
    """eta_m / eta_m(P_max) against the power gain on one load branch."""
    branch = Branch.parse(config.branch)
    columns = [
        Column("series", "-", "str", "voltage_probe or buttiker"),
        Column("branch", "-", "str"),
        Column("d_m", "1", description="1 for the buttiker series"),
        Column("y_m", "1"),
        Column("power_gain", "1", description="(P - P_max) / P_max"),
        Column("epsilon", "1", description="load ratio on the branch"),
        Column("eta_ratio", "1", description="eta_m / eta_m(P_max)"),
        Column("gap", "-", "int"),
    ]
    ds = Dataset("FIG4", columns, metadata=sweep_metadata(config, "normalized efficiency versus power gain"))
    dp = config.grids.power_gain.values()
    eps = load_ratio(dp, branch)
    extra = {"epsilon": eps}
    for y in config.grids.y_values:
        for d in config.grids.d_values:
            _emit(
                ds, "power_gain", dp, (y + 2 * d) + y * (1 - eps),
                lambda p, y=y, d=d: normalized_efficiency_at_power_gain(p, branch, y, d),
                {"series": "voltage_probe", "branch": branch.value, "d_m": d, "y_m": y},
                "eta_ratio", extra=extra,
            )
        _emit(
            ds, "power_gain", dp, (y + 2) + y * (1 - eps),
            lambda p, y=y: normalized_efficiency_at_power_gain_buttiker(p, branch, y),
            {"series": "buttiker", "branch": branch.value, "d_m": 1.0, "y_m": y},
            "eta_ratio", extra=extra,
        )
    return ds


def _ca_crossings(x, ratio, level=CA_LEVEL):
    """x positions where the ratio crosses the CA level (linear interpolation)."""
    out = []
    r = ratio - level
    for i in range(len(x) - 1):
        if not (np.isfinite(r[i]) and np.isfinite(r[i + 1])):
            continue
        if r[i] == 0:
            out.append(float(x[i]))
        elif r[i] * r[i + 1] < 0:
            out.append(float(x[i] - r[i] * (x[i + 1] - x[i]) / (r[i + 1] - r[i])))
    return out


def fig5(config: SweepConfig) -> Dataset:
    """eta_bound / eta_c,m over (x_m, power gain) on both branches."""
    columns = [
        Column("branch", "-", "str"),
        Column("power_gain", "1"),
        Column("x_m", "1"),
        Column("eta_ratio", "1", description="eta_bound / eta_c,m"),
        Column("above_ca", "-", "int", "eta_ratio >= CA level"),
        Column("gap", "-", "int"),
    ]
    ds = Dataset("FIG5", columns, metadata=sweep_metadata(config, "efficiency bound over asymmetry and power gain"))
    ds.metadata["ca_level"] = CA_LEVEL
    contours = []
    x = config.grids.x.values()
    for branch in (Branch.PLUS, Branch.MINUS):
        for p in config.grids.power_gain.values():
            c = 1 + branch.sign * np.sqrt(-p)
            den = 2 * (x**2 - x + 1) - c * x
            start = len(ds.rows)
            _emit(
                ds, "x_m", x, den,
                lambda xs, p=p, b=branch: efficiency_bound(xs, p, b, 1.0),
                {"branch": branch.value, "power_gain": float(p)}, "eta_ratio",
                near=POLE_TOL**2,
            )
            i_ratio = ds.names.index("eta_ratio")
            i_above = ds.names.index("above_ca")
            ratios = []
            for k in range(start, len(ds.rows)):
                row = list(ds.rows[k])
                v = row[i_ratio]
                row[i_above] = 0 if v is None else int(v >= CA_LEVEL)
                ds.rows[k] = tuple(row)
                ratios.append(np.nan if v is None else v)
            xs = [ds.rows[k][ds.names.index("x_m")] for k in range(start, len(ds.rows))]
            for xc in _ca_crossings(np.asarray(xs), np.asarray(ratios)):
                contours.append([branch.value, float(p), xc])
    ds.metadata["ca_contour"] = contours
    return ds


# --------------------------------------------------------------------------
# Dot-ring figure
# --------------------------------------------------------------------------


def _fig6_task(args):
    params, phi, deltas, window, tol = args
    chain = onsager_chain(params.build(phi), window, tol)
    coeffs = chain.coefficients()
    out = []
    for delta in deltas:
        d = [characteristic_parameter(coeffs, delta, regime) for regime in ENGINE_REGIMES]
        out.append((float(phi), float(delta), *(float(v) for v in d)))
    return out


def fig6(config: SweepConfig) -> Dataset:
    """d_L, d_P and d_LP over the (phi, delta) grid of the dot-ring model."""
    columns = [
        Column("phi", "rad"),
        Column("delta", "1", description="X_L^T / X_P^T"),
        Column("d_l", "1"),
        Column("d_p", "1"),
        Column("d_lp", "1"),
        Column("sign_pattern", "-", "int", "1 when d_L > 0, d_P > 0, d_LP < 0"),
    ]
    ds = Dataset("FIG6", columns, metadata=sweep_metadata(config, "characteristic parameters of the dot ring"))
    g, q = config.grids, config.quadrature
    deltas = tuple(g.delta.values())
    tasks = [(config.model, float(p), deltas, q.window, q.tol) for p in g.phi.values()]
    for chunk in parallel_map(_fig6_task, tasks, config.workers):
        for phi, delta, d_l, d_p, d_lp in chunk:
            ds.add(phi=phi, delta=delta, d_l=d_l, d_p=d_p, d_lp=d_lp,
                   sign_pattern=int(d_l > 0 and d_p > 0 and d_lp < 0))
    ds.metadata["sign_pattern_holds"] = all(ds.column("sign_pattern"))
    return ds


BUILDERS = {"FIG2": fig2, "FIG3": fig3, "FIG4": fig4, "FIG5": fig5, "FIG6": fig6}


def run_figure(figure: str, config: SweepConfig) -> Dataset:
    ds = BUILDERS[normalize_id(figure)](config)
    ds.metadata.setdefault("excluded_intervals", [])
    ds.validate()
    return ds
