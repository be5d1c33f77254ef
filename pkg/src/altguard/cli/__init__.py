"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 the solution failed verification.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import click

from .. import atc, batc, oracles
from ..stages import viewer_curves
from ..terrain import Q, Terrain, TerrainError, load_terrain, scalar_to_str
from ..visibility import views_of
from .generate import PROFILES, generate
from .render import render_svg
from .report import RunReport

EXIT_INPUT = 2
EXIT_VERIFY = 3


def _fail(msg: str) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(EXIT_INPUT)


def _load(path: str) -> Terrain:
    try:
        return load_terrain(path)
    except (OSError, TerrainError) as exc:
        _fail(f"{path}: {exc}")


def _scalar(text: str, what: str):
    try:
        return Q(text)
    except (ValueError, TypeError, ZeroDivisionError):
        _fail(f"bad {what} {text!r}")


def _argv() -> list:
    """Echo of the invoking command, rebuilt from the parsed options."""
    ctx = click.get_current_context()
    out = [ctx.info_name]
    for key, val in ctx.params.items():
        flag = "--" + ("terrain" if key == "terrains" else key).replace("_", "-")
        for v in val if isinstance(val, tuple) else (val,):
            out += [flag, str(v)]
    return out


def _emit(reports: list) -> None:
    data = [r.to_dict() for r in reports]
    click.echo(json.dumps(data[0] if len(data) == 1 else data, indent=2))
    if not all(r.ok for r in reports):
        sys.exit(EXIT_VERIFY)


def _run_many(fn: Callable, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


# ---------------------------------------------------------------- jobs (top level so they pickle)


def _atc_job(terrain: Terrain, k: int, mode: str, eps, argv: list) -> RunReport:
    rep = RunReport(argv, terrain, mode)
    with rep.phase("solve"):
        sol = atc.solve(terrain, k, mode=mode, eps=eps)
    rep.solution = sol.to_dict()
    with rep.phase("verify"):
        ok = oracles.oracle_cover_check(terrain, sol.h_star, sol.guards)
    rep.verification = {"method": "sampled-cover", "ok": ok}
    return rep


def _partition_ok(terrain: Terrain, sol: batc.BatcSolution, k=None) -> bool:
    cuts = [sol.pairs[0][1]] + [p[2] for p in sol.pairs]
    if cuts[0] != 0 or cuts[-1] != terrain.n - 1:
        return False
    if any(p[1] != q[2] for p, q in zip(sol.pairs[1:], sol.pairs)):
        return False
    if k is not None and len(sol.pairs) > k:
        return False
    h = sol.h_star
    for x, i, j in sol.pairs:
        if not terrain.xs[i] <= x <= terrain.xs[j]:
            return False
        for e in range(i, j):
            if terrain.edge_line(e).side((x, h)) < 0:
                return False
    return True


def _batc_count_job(terrain: Terrain, h, argv: list) -> RunReport:
    rep = RunReport(argv, terrain)
    with rep.phase("solve"):
        sol = batc.batc_count(terrain, h)
    rep.solution = {"height": scalar_to_str(h), "count": sol.count, **sol.to_dict()}
    del rep.solution["h_star"]
    with rep.phase("verify"):
        ok = _partition_ok(terrain, sol)
    rep.verification = {"method": "partition-certificate", "ok": ok}
    return rep


def _batc_altitude_job(terrain: Terrain, k: int, argv: list) -> RunReport:
    rep = RunReport(argv, terrain)
    with rep.phase("solve"):
        sol = batc.batc_altitude(terrain, k)
    rep.solution = sol.to_dict()
    with rep.phase("verify"):
        ok = _partition_ok(terrain, sol, k)
    rep.verification = {"method": "partition-certificate", "ok": ok}
    return rep


# ---------------------------------------------------------------- commands


@click.group()
def main():
    """Guard placement on an altitude line above a 1.5D terrain."""


_terrain_opt = click.option(
    "--terrain", "terrains", multiple=True, required=True, type=click.Path(dir_okay=False), help="JSON or CSV terrain."
)
_jobs_opt = click.option("--jobs", default=1, show_default=True, type=click.IntRange(min=1), help="Parallel instances.")


@main.command("atc")
@_terrain_opt
@click.option("--k", "k", required=True, type=click.IntRange(min=1))
@click.option("--mode", type=click.Choice(["exact", "bisect"]), default="exact", show_default=True)
@click.option("--eps", default="1e-9", show_default=True)
@_jobs_opt
def cmd_atc(terrains, k, mode, eps, jobs):
    """Lowest altitude line carrying k guards that see the whole terrain."""
    eps_q = _scalar(eps, "eps")
    if eps_q <= 0:
        _fail("eps must be positive")
    ts = [_load(p) for p in terrains]
    argv = _argv()
    _emit(_run_many(_atc_job, [(t, k, mode, eps_q, argv) for t in ts], jobs))


@main.command("batc-count")
@_terrain_opt
@click.option("--height", required=True)
@_jobs_opt
def cmd_batc_count(terrains, height, jobs):
    """Fewest subchain/guard pairs at a fixed altitude."""
    h = _scalar(height, "height")
    ts = [_load(p) for p in terrains]
    for t in ts:
        if h < t.y_max:
            _fail(f"height {height} is below the terrain maximum {scalar_to_str(t.y_max)}")
    argv = _argv()
    _emit(_run_many(_batc_count_job, [(t, h, argv) for t in ts], jobs))


@main.command("batc-altitude")
@_terrain_opt
@click.option("--k", "k", required=True, type=click.IntRange(min=1))
@_jobs_opt
def cmd_batc_altitude(terrains, k, jobs):
    """Lowest altitude for k subchain/guard pairs."""
    ts = [_load(p) for p in terrains]
    argv = _argv()
    _emit(_run_many(_batc_altitude_job, [(t, k, argv) for t in ts], jobs))


@main.command("gen")
@click.option("--n", "n", required=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--profile", type=click.Choice(PROFILES), default="random", show_default=True)
@click.option("--amplitude", default=100, show_default=True, type=int)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
def cmd_gen(n, seed, profile, amplitude, output):
    """Write a deterministic terrain as JSON."""
    if n < 2:
        _fail("--n must be at least 2")
    text = generate(n, seed, profile, amplitude).to_json() + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _read_json(path: str, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(f"{what} {path}: {exc}")


@main.command("curves")
@click.option("--terrain", required=True, type=click.Path(dir_okay=False))
def cmd_curves(terrain):
    """Dump the first-guard curves f(h) and g(h) as JSON."""
    f, g = viewer_curves(views_of(_load(terrain)))
    click.echo(json.dumps([{"name": "f", **f.to_dict()}, {"name": "g", **g.to_dict()}], indent=2))


@main.command("plot")
@click.option("--terrain", required=True, type=click.Path(dir_okay=False))
@click.option("--solution", type=click.Path(dir_okay=False), default=None)
@click.option("--curves", type=click.Path(dir_okay=False), default=None)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
def cmd_plot(terrain, solution, curves, output):
    """Render a terrain, optionally with a solution and curves, to SVG."""
    t = _load(terrain)
    sol = None
    if solution:
        sol = _read_json(solution, "solution")
        if isinstance(sol, dict) and "solution" in sol:
            sol = sol["solution"]
        if not isinstance(sol, dict) or "h_star" not in sol:
            _fail("solution JSON needs an 'h_star' field")
        try:
            Q(sol["h_star"])
            for g in sol.get("guards", []):
                Q(g)
            for p in sol.get("pairs", []):
                Q(p["guard_x"]), int(p["from"]), int(p["to"])
        except (KeyError, TypeError, ValueError, ZeroDivisionError):
            _fail("malformed solution JSON")
    cv = None
    if curves:
        cv = _read_json(curves, "curves")
        if isinstance(cv, dict):
            cv = [cv]
        if not isinstance(cv, list) or not all(isinstance(c, dict) and "pieces" in c for c in cv):
            _fail("curves JSON must be a curve object or a list of them")
    with open(output, "w") as fh:
        fh.write(render_svg(t, sol, cv))


# ---------------------------------------------------------------- oracles


@main.group("oracle")
def oracle_group():
    """Brute-force reference answers."""


def _oracle_out(name: str, terrain: Terrain, result) -> None:
    click.echo(json.dumps({"oracle": name, "n": terrain.n, "result": result}, indent=2))


@oracle_group.command("min-guards")
@click.option("--terrain", required=True, type=click.Path(dir_okay=False))
@click.option("--height", required=True)
@click.option("--grid", default=64, show_default=True, type=click.IntRange(min=2))
def cmd_oracle_min_guards(terrain, height, grid):
    t = _load(terrain)
    h = _scalar(height, "height")
    if h < t.y_max:
        _fail("height below the terrain")
    _oracle_out("min-guards", t, oracles.oracle_min_guards(t, h, oracles.SampleGrid(grid)))


@oracle_group.command("atc")
@click.option("--terrain", required=True, type=click.Path(dir_okay=False))
@click.option("--k", "k", required=True, type=click.IntRange(min=1))
@click.option("--grid", default=64, show_default=True, type=click.IntRange(min=2))
@click.option("--eps", default=1e-9, show_default=True, type=float)
def cmd_oracle_atc(terrain, k, grid, eps):
    """Bisection on the sampled guard count."""
    t = _load(terrain)
    g = oracles.SampleGrid(grid)
    lo = float(t.y_max)
    if oracles.oracle_min_guards(t, lo, g) <= k:
        _oracle_out("atc", t, {"h_star": lo})
        return
    step = 1.0
    while oracles.oracle_min_guards(t, lo + step, g) > k:
        step *= 2
    hi = lo + step
    lo = lo + step / 2 if step > 1 else lo
    while hi - lo > eps * (1 + abs(hi)):
        mid = (lo + hi) / 2
        if oracles.oracle_min_guards(t, mid, g) <= k:
            hi = mid
        else:
            lo = mid
    _oracle_out("atc", t, {"h_star": hi})


@oracle_group.command("batc")
@click.option("--terrain", required=True, type=click.Path(dir_okay=False))
@click.option("--k", "k", required=True, type=click.IntRange(min=1))
def cmd_oracle_batc(terrain, k):
    t = _load(terrain)
    try:
        h = oracles.oracle_batc(t, k)
    except ValueError as exc:
        _fail(str(exc))
    _oracle_out("batc", t, {"h_star": scalar_to_str(h)})


@oracle_group.command("cover")
@click.option("--terrain", required=True, type=click.Path(dir_okay=False))
@click.option("--height", required=True)
@click.option("--guards", required=True, help="Comma-separated guard abscissas.")
@click.option("--grid", default=64, show_default=True, type=click.IntRange(min=2))
def cmd_oracle_cover(terrain, height, guards, grid):
    t = _load(terrain)
    h = _scalar(height, "height")
    if h < t.y_max:
        _fail("height below the terrain")
    gs = [_scalar(g, "guard") for g in guards.split(",") if g.strip()]
    _oracle_out("cover", t, oracles.oracle_cover_check(t, h, gs, oracles.SampleGrid(grid)))
