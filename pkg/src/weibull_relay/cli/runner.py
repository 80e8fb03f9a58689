"""Sweep a scenario and write one CSV per (case, metric)."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from ..allocation import allocate_ber_optimal, allocate_ee_optimal, w_to_dbm
from ..metrics import MetricResult, PowerInventory, capacity_e2e, dbm_to_w, evaluate
from ..simulate import McConfig
from ..specfun import SpecialFunctionError
from .config import CaseSpec, MetricEntry, Scenario

__all__ = ["RunError", "run_scenario", "csv_columns", "csv_name", "evaluate_point",
           "POINT_SEED_STRIDE"]

# sweep point k uses MC streams seeded seed + k * POINT_SEED_STRIDE + worker
POINT_SEED_STRIDE = 1000


class RunError(RuntimeError):
    """A sweep point could not be evaluated; ``exit_code`` is 4."""

    exit_code = 4


def csv_name(scenario: Scenario, case: CaseSpec, metric: MetricEntry):
    return f"{scenario.name}__{case.name}__{metric.label}.csv"


def csv_columns(scenario: Scenario, metric: MetricEntry, methods):
    cols = [scenario.sweep.column]
    cols += [m for m in ("exact", "asymptotic", "mc") if m in methods and m in metric.methods]
    if "mc" in cols:
        cols.append("mc_half_width")
    return cols


def _fmt(x):
    return "" if x is None else f"{x:.12g}"


def _reallocate(chain, entry: MetricEntry):
    mode = entry.param_dict().get("allocation", "uniform")
    if mode == "uniform":
        return chain
    p_max = math.fsum(dbm_to_w(h.tx_power_dbm) for h in chain.hops)
    if mode == "ee_optimal":
        inventory = PowerInventory.uniform(entry.param_dict().get("circuit_power", 0.5))
        res = allocate_ee_optimal(chain, inventory, p_max)
    else:
        params = entry.param_dict()
        res = allocate_ber_optimal(chain, params.get("M", 4), p_max,
                                   params.get("snr_convention", "per_bit"))
    return chain.with_tx_power([w_to_dbm(p) for p in res.powers])


def evaluate_point(scenario: Scenario, case: CaseSpec, entry: MetricEntry, index, value,
                   methods, mc: McConfig):
    """Return ``{column: value}`` for one sweep point."""
    chain = _reallocate(scenario.build_chain(case, value), entry)
    row = {scenario.sweep.column: value}
    if entry.kind == "capacity_ratio":
        params = entry.param_dict()
        c1 = replace(chain, budget=replace(chain.budget, frequency_ghz=params["f1"]))
        c2 = replace(chain, budget=replace(chain.budget, frequency_ghz=params["f2"]))
        for m in ("exact", "asymptotic"):
            if m in methods:
                row[m] = capacity_e2e(c1, m) / capacity_e2e(c2, m)
        return row
    spec = entry.spec()
    for m in ("exact", "asymptotic", "mc"):
        if m not in methods or m not in entry.methods:
            continue
        if m == "mc":
            point_mc = replace(mc, seed=mc.seed + index * POINT_SEED_STRIDE)
            res: MetricResult = evaluate(chain, spec, "mc", point_mc)
            row["mc"] = res.value
            row["mc_half_width"] = res.half_width
        else:
            row[m] = evaluate(chain, spec, m).value
    return row


def _point_job(args):
    scenario, case, entry, index, value, methods, mc = args
    try:
        return evaluate_point(scenario, case, entry, index, value, methods, mc)
    except SpecialFunctionError as exc:
        raise RunError(f"{scenario.name}/{case.name}/{entry.label}: no convergence at "
                       f"{scenario.sweep.column}={value:g}: {exc}") from None


def run_scenario(scenario: Scenario, out_dir, *, seed=None, methods=None, trials=None,
                 workers=1, log=None):
    """Evaluate every case and metric over the sweep; return the written CSV paths."""
    mc = scenario.mc
    if seed is not None:
        mc = replace(mc, seed=int(seed))
    if trials is not None:
        mc = replace(mc, trials=int(trials))
    methods = tuple(methods) if methods else scenario.methods
    os.makedirs(out_dir, exist_ok=True)
    values = scenario.sweep.values()
    paths = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for case in scenario.case_list():
            for entry in scenario.metrics:
                jobs = [(scenario, case, entry, k, v, methods, mc) for k, v in enumerate(values)]
                # map keeps sweep order whatever the completion order
                rows = list(pool.map(_point_job, jobs)) if pool else [_point_job(j) for j in jobs]
                cols = csv_columns(scenario, entry, methods)
                path = os.path.join(out_dir, csv_name(scenario, case, entry))
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    writer = csv.writer(fh, lineterminator="\n")
                    writer.writerow(cols)
                    for row in rows:
                        writer.writerow([_fmt(row.get(c)) for c in cols])
                paths.append(path)
                if log:
                    log(f"wrote {path}")
    finally:
        if pool:
            pool.shutdown()
    return paths
