"""Command-line front end: ``tractlab spectrum|complexity|tract|recover|replay``.

Every command that writes to ``--out`` also writes ``<out>.manifest.json``
holding the argument vector, the embedded input files, a config hash, the
seed, the library version and sha256 digests of the outputs.  ``tractlab
replay`` re-runs a manifest into a scratch directory and compares digests.

Exit codes: 0 success, 2 usage or input error, 3 numeric cap or failure
(partial output is still written).
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any

import click
import numpy as np

from . import __version__
from .complexity import DEFAULT_C1, DEFAULT_C2, DEFAULT_CAP, complexity_table
from .errors import (ParameterDomainError, RankDeficiencyError, SpectrumOverflowError,
                     SubsampleFailure, TruncationError)
from .model import KernelModel, load_model
from .sequences import SequenceFamily

try:
    import tomllib  # type: ignore[import-not-found]
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_USAGE = 2
EXIT_NUMERIC = 3
_NUMERIC_ERRORS = (ArithmeticError, RankDeficiencyError, TruncationError, SubsampleFailure,
                   SpectrumOverflowError, np.linalg.LinAlgError)


def fmt(x) -> str:
    """CSV cell text: blank for None, 17 significant digits for floats."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _usage_fail(msg: str):
    click.echo(f"error: {msg}", err=True)
    raise SystemExit(EXIT_USAGE)


class _Group(click.Group):
    # keep the raw argument vector so that manifests can replay the run
    def make_context(self, info_name, args, parent=None, **extra):
        raw = list(args)
        ctx = super().make_context(info_name, args, parent=parent, **extra)
        ctx.meta["tractlab.argv"] = raw
        return ctx


def _common(f):
    """Per-command copies of the global flags; a value given here wins."""
    f = click.option("--json", "as_json", is_flag=True, default=None,
                     help="Also write a JSON mirror of the table.")(f)
    f = click.option("--threads", type=click.IntRange(min=1), default=None,
                     help="Worker threads (overrides TRACTLAB_THREADS).")(f)
    f = click.option("--seed", type=int, default=None, help="Master seed.")(f)
    f = click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
                     help="Output CSV path (stdout if omitted).")(f)
    f = click.option("--model", "model_path", type=click.Path(dir_okay=False), default=None,
                     help="Model file (.toml or .json).")(f)
    return f


def _settings(ctx: click.Context, **local) -> dict:
    base = dict(ctx.obj or {})
    for key, val in local.items():
        if val is not None and val is not False:
            base[key] = val
    return base


def _threads(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("TRACTLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            _usage_fail(f"TRACTLAB_THREADS must be an integer, got {env!r}")
        if n < 1:
            _usage_fail("TRACTLAB_THREADS must be at least 1")
        return n
    return 1


def _load(path) -> KernelModel:
    if path is None:
        _usage_fail("a model is required (--model FILE)")
    p = Path(path)
    if not p.is_file():
        _usage_fail(f"model file {path} does not exist")
    try:
        return load_model(p)
    except ParameterDomainError as exc:
        _usage_fail(str(exc))


# ---------------------------------------------------------------------------
# table output and manifests


class _Table:
    """CSV writer that streams rows (flushing each) and can mirror them to JSON."""

    def __init__(self, out, columns, as_json=False):
        self.out = out
        self.columns = list(columns)
        self.as_json = as_json
        self.records: list[dict] = []
        if out is None:
            self._fh = sys.stdout
            self._own = False
        else:
            self._fh = open(out, "w", newline="")
            self._own = True
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(self.columns)
        self._fh.flush()

    def row(self, values: dict):
        self._w.writerow([fmt(values.get(c)) for c in self.columns])
        self._fh.flush()
        self.records.append({k: _jsonable(v) for k, v in values.items()})

    def close(self) -> list[Path]:
        if self._own:
            self._fh.close()
        written = []
        if self.out is not None:
            written.append(Path(self.out))
            if self.as_json:
                jpath = json_mirror_path(self.out)
                jpath.write_text(json.dumps({"columns": self.columns, "rows": self.records},
                                            indent=1, sort_keys=True) + "\n")
                written.append(jpath)
        elif self.as_json:
            click.echo(json.dumps({"columns": self.columns, "rows": self.records}, sort_keys=True))
        return written


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def json_mirror_path(out) -> Path:
    return Path(str(out) + ".json")


def manifest_path(out) -> Path:
    return Path(str(out) + ".manifest.json")


def _embed(path) -> dict | None:
    if path is None:
        return None
    p = Path(path)
    return {"path": str(path), "suffix": p.suffix, "sha256": _sha256(p), "text": p.read_text()}


def write_manifest(ctx: click.Context, command: str, settings: dict, outputs: list[Path],
                   started: str, status: str, model: KernelModel | None = None,
                   inputs: dict | None = None, params: dict | None = None,
                   threads: int | None = None) -> Path | None:
    out = settings.get("out")
    if out is None:
        return None
    params = dict(params or {})
    model_dict = model.to_dict() if model is not None else None
    hashed = json.dumps({"command": command, "params": params, "model": model_dict},
                        sort_keys=True, default=str)
    doc = {
        "tool": "tractlab",
        "version": __version__,
        "command": command,
        "argv": ctx.meta.get("tractlab.argv", []),
        "config_hash": hashlib.sha256(hashed.encode()).hexdigest(),
        "seed": settings.get("seed"),
        "threads": threads,  # not hashed: results do not depend on it
        "params": params,
        "model": model_dict,
        "inputs": {k: v for k, v in (inputs or {}).items() if v is not None},
        "started_at": started,
        "finished_at": _now(),
        "status": status,
        "outputs": [{"path": str(p), "name": p.name, "sha256": _sha256(p)} for p in outputs],
    }
    mpath = manifest_path(out)
    mpath.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return mpath


# ---------------------------------------------------------------------------
# commands


@click.group(cls=_Group)
@click.option("--model", "model_path", type=click.Path(dir_okay=False), default=None,
              help="Model file (.toml or .json).")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None, help="Output CSV path.")
@click.option("--seed", type=int, default=None, help="Master seed.")
@click.option("--threads", type=click.IntRange(min=1), default=None,
              help="Worker threads (overrides TRACTLAB_THREADS).")
@click.option("--json", "as_json", is_flag=True, default=None, help="Also write a JSON mirror.")
@click.version_option(__version__, prog_name="tractlab")
@click.pass_context
def main(ctx, model_path, out, seed, threads, as_json):
    """Spectra, complexity, tractability and sampling-recovery experiments for
    periodic tensor-product kernels."""
    ctx.obj = {k: v for k, v in dict(model_path=model_path, out=out, seed=seed, threads=threads,
                                     as_json=as_json).items() if v is not None}


@main.command("spectrum")
@click.option("--count", "-n", type=click.IntRange(min=1), required=True,
              help="Number of largest eigenvalues to list.")
@_common
@click.pass_context
def cmd_spectrum(ctx, count, **kw):
    """List the COUNT largest eigenvalues with their frequency multi-indices."""
    st = _settings(ctx, **kw)
    started = _now()
    model = _load(st.get("model_path"))
    from .spectrum import Spectrum
    cols = ["rank", "value"] + [f"h_{j}" for j in range(1, model.d + 1)]
    table = _Table(st.get("out"), cols, st.get("as_json", False))
    try:
        entries = Spectrum(model).entries(count)
    except _NUMERIC_ERRORS as exc:
        files = table.close()
        write_manifest(ctx, "spectrum", st, files, started, "failed", model,
                       {"model": _embed(st.get("model_path"))}, {"count": count})
        click.echo(f"numeric failure: {exc}", err=True)
        ctx.exit(EXIT_NUMERIC)
    for e in entries:
        row = {"rank": e.rank, "value": e.value}
        row.update({f"h_{j + 1}": h for j, h in enumerate(e.index)})
        table.row(row)
    files = table.close()
    write_manifest(ctx, "spectrum", st, files, started, "ok", model,
                   {"model": _embed(st.get("model_path"))}, {"count": count})


def parse_eps_grid(text: str) -> list[float]:
    """``start:end:log[:count]``, ``start:end:lin[:count]``, a comma list or one value.

    A log grid without a count uses 10 points per decade, endpoints included.
    """
    text = text.strip()
    try:
        if ":" not in text:
            vals = [float(s) for s in text.split(",") if s.strip()]
        else:
            parts = text.split(":")
            if len(parts) not in (3, 4):
                raise ValueError
            a, b, scale = float(parts[0]), float(parts[1]), parts[2].strip().lower()
            if scale == "log":
                if a <= 0 or b <= 0:
                    raise click.BadParameter("log grid endpoints must be positive")
                count = int(parts[3]) if len(parts) == 4 else int(round(abs(math.log10(b / a)) * 10)) + 1
                vals = np.geomspace(a, b, max(count, 1)).tolist()
            elif scale == "lin":
                count = int(parts[3]) if len(parts) == 4 else 10
                vals = np.linspace(a, b, max(count, 1)).tolist()
            else:
                raise click.BadParameter(f"grid scale must be log or lin, got {parts[2]!r}")
    except ValueError:
        raise click.BadParameter(f"cannot parse epsilon grid {text!r} (use start:end:log|lin[:count])") from None
    if not vals:
        raise click.BadParameter("empty epsilon grid")
    if any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise click.BadParameter("epsilon values must be positive and finite")
    return vals


COMPLEXITY_COLUMNS = ["epsilon", "n_all", "n_std_bound", "a_{n+1}", "status"]


@main.command("complexity")
@click.option("--eps-grid", required=True, help="start:end:log|lin[:count], a comma list, or one value.")
@click.option("--criterion", type=click.Choice(["abs", "nor"], case_sensitive=False), default="abs",
              show_default=True)
@click.option("--c1", type=float, default=DEFAULT_C1, show_default=True)
@click.option("--c2", type=float, default=DEFAULT_C2, show_default=True)
@click.option("--cap", type=click.IntRange(min=1), default=DEFAULT_CAP, show_default=True,
              help="Largest n searched before a row is flagged cap_exceeded.")
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False), default=None, help="Alias of --out.")
@_common
@click.pass_context
def cmd_complexity(ctx, eps_grid, criterion, c1, c2, cap, csv_out, **kw):
    """Information complexity n(eps; all) and the function-value bound per epsilon."""
    if csv_out is not None and kw.get("out") is None:
        kw["out"] = csv_out
    st = _settings(ctx, **kw)
    started = _now()
    try:
        eps = parse_eps_grid(eps_grid)
    except click.BadParameter as exc:
        exc.param_hint = "'--eps-grid'"
        raise
    if c1 < 1 or c2 < 1:
        raise click.BadParameter("c1 and c2 must be at least 1")
    model = _load(st.get("model_path"))
    params = {"eps_grid": eps_grid, "criterion": criterion.lower(), "c1": c1, "c2": c2, "cap": cap}
    table = _Table(st.get("out"), COMPLEXITY_COLUMNS, st.get("as_json", False))
    status = "ok"
    try:
        rows = complexity_table(model, eps, criterion.lower(), c1=c1, c2=c2, cap=cap)
    except _NUMERIC_ERRORS as exc:
        rows, status = [], "failed"
        click.echo(f"numeric failure: {exc}", err=True)
    for r in rows:
        table.row({"epsilon": r.epsilon, "n_all": r.n_all, "n_std_bound": r.n_std_bound,
                   "a_{n+1}": r.a_next, "status": r.status})
        if r.status != "ok":
            status = "partial"
    files = table.close()
    write_manifest(ctx, "complexity", st, files, started, status, model,
                   {"model": _embed(st.get("model_path"))}, params)
    if status != "ok":
        if status == "partial":
            click.echo(f"warning: some rows reached the cap n = {cap}", err=True)
        ctx.exit(EXIT_NUMERIC)


# --- tractability ------------------------------------------------------------


TRACT_COLUMNS = ["mode", "criterion", "notion", "s", "t", "holds", "condition", "certificate"]


def _seq_option(text):
    """Parse a sequence given on the command line (number, comma list or kind:k=v,...)."""
    if text is None:
        return None
    text = text.strip()
    if ":" not in text:
        try:
            vals = [float(s) for s in text.split(",")]
        except ValueError:
            raise click.BadParameter(f"cannot parse sequence {text!r}") from None
        return vals[0] if len(vals) == 1 else vals
    return text


def _family_options(f):
    f = click.option("--omega", type=float, default=None, help="Base omega in (0,1) (exp_korobov).")(f)
    f = click.option("--b", "b_seq", default=None, help="Sequence b (exp_korobov).")(f)
    f = click.option("--a", "a_seq", default=None, help="Sequence a (exp_korobov).")(f)
    f = click.option("--r", "r_seq", default=None, help="Smoothness sequence r (weighted_korobov).")(f)
    f = click.option("--g", "g_seq", default=None,
                     help="Weights g, e.g. 'power:beta=2' or '1,0.5,0.25' (weighted_korobov).")(f)
    f = click.option("--d", "dim", type=click.IntRange(min=1), default=4, show_default=True,
                     help="Dimension used to materialize a --family model.")(f)
    f = click.option("--family", default=None, help="weighted_korobov | exp_korobov (instead of --model).")(f)
    return f


def _tract_model(st, family, dim, g_seq, r_seq, a_seq, b_seq, omega) -> KernelModel:
    if family is None:
        return _load(st.get("model_path"))
    data: dict[str, Any] = {"family": family, "d": dim}
    if family.replace("-", "_").lower() in ("weighted_korobov", "wk", "weightedkorobov"):
        data["g"] = _seq_option(g_seq)
        data["r"] = _seq_option(r_seq) if r_seq is not None else 1.0
        if data["g"] is None:
            _usage_fail("--g is required for weighted_korobov")
    else:
        data.update(a=_seq_option(a_seq), b=_seq_option(b_seq) if b_seq is not None else 1.0, omega=omega)
        if data["a"] is None or omega is None:
            _usage_fail("--a and --omega are required for exp_korobov")
    try:
        return KernelModel.from_dict(data)
    except ParameterDomainError as exc:
        _usage_fail(str(exc))


def _verdict_row(v) -> dict:
    return {"mode": v.mode.value, "criterion": v.criterion.value, "notion": v.notion.label,
            "s": v.notion.s, "t": v.notion.t, "holds": v.holds.value, "condition": v.condition,
            "certificate": v.summary()}


@main.group("tract")
def tract():
    """Tractability verdicts for a kernel family."""


@tract.command("classify")
@click.option("--notion", required=True, help="spt, pt, qpt, uwt, wt or (s,t)-wt such as '(1,0.5)-wt'.")
@click.option("--mode", type=click.Choice(["alg", "exp"], case_sensitive=False), default="alg",
              show_default=True)
@click.option("--criterion", type=click.Choice(["abs", "nor"], case_sensitive=False), default="abs",
              show_default=True)
@click.option("--uwt-rule", type=click.Choice(["boundary", "ge", "gt"]), default="boundary",
              show_default=True, help="How the weighted Korobov UWT boundary is reported.")
@_family_options
@_common
@click.pass_context
def cmd_tract_classify(ctx, notion, mode, criterion, uwt_rule, family, dim, g_seq, r_seq, a_seq, b_seq,
                       omega, **kw):
    """Classify one notion under one mode and criterion."""
    from .tractability import Notion, classify
    st = _settings(ctx, **kw)
    started = _now()
    try:
        nt = Notion.parse(notion)
    except ParameterDomainError as exc:
        raise click.BadParameter(str(exc), param_hint="'--notion'") from None
    model = _tract_model(st, family, dim, g_seq, r_seq, a_seq, b_seq, omega)
    try:
        v = classify(model, nt, mode.lower(), criterion.lower(), uwt_rule=uwt_rule)
    except ParameterDomainError as exc:
        _usage_fail(str(exc))
    table = _Table(st.get("out"), TRACT_COLUMNS, st.get("as_json", False))
    table.row(_verdict_row(v))
    files = table.close()
    write_manifest(ctx, "tract classify", st, files, started, "ok", model,
                   {"model": _embed(st.get("model_path")) if family is None else None},
                   {"notion": notion, "mode": mode, "criterion": criterion, "uwt_rule": uwt_rule})


@tract.command("table")
@click.option("--modes", default="alg,exp", show_default=True)
@click.option("--criteria", default="abs,nor", show_default=True)
@click.option("--st-grid", default=None, help="Semicolon list of s,t pairs, e.g. '1,2;1,1;0.5,1'.")
@click.option("--uwt-rule", type=click.Choice(["boundary", "ge", "gt"]), default="boundary",
              show_default=True)
@_family_options
@_common
@click.pass_context
def cmd_tract_table(ctx, modes, criteria, st_grid, uwt_rule, family, dim, g_seq, r_seq, a_seq, b_seq,
                    omega, **kw):
    """Full verdict table: every notion for every mode and criterion."""
    from .tractability import DEFAULT_ST_GRID, verdict_table
    st = _settings(ctx, **kw)
    started = _now()
    modes_l = [m.strip().lower() for m in modes.split(",") if m.strip()]
    crit_l = [c.strip().lower() for c in criteria.split(",") if c.strip()]
    if not set(modes_l) <= {"alg", "exp"} or not modes_l:
        raise click.BadParameter("modes must be drawn from alg, exp", param_hint="'--modes'")
    if not set(crit_l) <= {"abs", "nor"} or not crit_l:
        raise click.BadParameter("criteria must be drawn from abs, nor", param_hint="'--criteria'")
    grid = DEFAULT_ST_GRID
    if st_grid:
        try:
            grid = tuple(tuple(float(x) for x in pair.split(",")) for pair in st_grid.split(";") if pair.strip())
            if any(len(p) != 2 for p in grid):
                raise ValueError
        except ValueError:
            raise click.BadParameter(f"cannot parse {st_grid!r}", param_hint="'--st-grid'") from None
    model = _tract_model(st, family, dim, g_seq, r_seq, a_seq, b_seq, omega)
    try:
        verdicts = verdict_table(model, modes_l, crit_l, grid, uwt_rule=uwt_rule)
    except ParameterDomainError as exc:
        _usage_fail(str(exc))
    table = _Table(st.get("out"), TRACT_COLUMNS, st.get("as_json", False))
    for v in verdicts:
        table.row(_verdict_row(v))
    files = table.close()
    write_manifest(ctx, "tract table", st, files, started, "ok", model,
                   {"model": _embed(st.get("model_path")) if family is None else None},
                   {"modes": modes_l, "criteria": crit_l, "st_grid": [list(p) for p in grid],
                    "uwt_rule": uwt_rule})


# --- recovery ------------------------------------------------------------------


RECOVER_COLUMNS = ["m", "n", "|J|", "error", "a_{m+1}", "ratio", "concentration", "wall_ms",
                   "trial", "d", "error_lower", "projection_error", "projection_bound", "bound_rhs",
                   "chain_constant", "sigma_min", "K", "remainder", "subsample_status"]

_CONFIG_KEYS = {"model", "m", "seeds", "beta", "subsample", "grid", "real", "threads", "seed",
                "master_seed", "timing", "target_size_factor", "lower_bound_target", "upper_ratio_target"}


def _read_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        _usage_fail(f"config file {path} does not exist")
    try:
        if p.suffix.lower() == ".json":
            data = json.loads(p.read_text())
        else:
            data = tomllib.loads(p.read_text())
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        _usage_fail(f"{path}: {exc}")
    if not isinstance(data, dict):
        _usage_fail(f"{path}: top level must be a table")
    data = dict(data.get("recover", data))
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        _usage_fail(f"{path}: unknown field {unknown[0]!r}")
    if isinstance(data.get("model"), str):
        mp = Path(data["model"])
        data["model"] = str(mp if mp.is_absolute() else p.parent / mp)
    return data


def _parse_m_list(value) -> tuple[int, ...]:
    if isinstance(value, int):
        value = [value]
    if isinstance(value, str):
        try:
            value = [int(s) for s in value.split(",") if s.strip()]
        except ValueError:
            raise click.BadParameter(f"cannot parse m list {value!r}", param_hint="'--m'") from None
    vals = tuple(int(v) for v in value)
    if not vals:
        raise click.BadParameter("empty m list", param_hint="'--m'")
    if any(v < 1 for v in vals):
        raise click.BadParameter("every m must be at least 1", param_hint="'--m'")
    return vals


@main.command("recover")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="TOML (or JSON) file with any of the options below; flags win.")
@click.option("--m", "m_list", default=None, help="Comma list of m values [8,16,32].")
@click.option("--seeds", type=click.IntRange(min=1), default=None, help="Trials per m [10].")
@click.option("--beta", type=float, default=None, help="Oversampling: n = ceil(beta m ln(m+1)) [10].")
@click.option("--subsample", type=click.Choice(["on", "off"]), default=None, help="Node subsampling [off].")
@click.option("--grid", type=click.IntRange(min=2), default=None, help="Points per axis of the error grid [64].")
@click.option("--real/--complex", "real", default=None, help="Real cos/sin basis instead of complex exponentials.")
@click.option("--timing/--no-timing", default=None, help="Fill the wall_ms column (not byte-reproducible).")
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False), default=None, help="Alias of --out.")
@_common
@click.pass_context
def cmd_recover(ctx, config_path, m_list, seeds, beta, subsample, grid, real, timing, csv_out, **kw):
    """Weighted least-squares recovery experiment against a_{m+1}."""
    from .recovery import ExperimentConfig, run_experiment
    if csv_out is not None and kw.get("out") is None:
        kw["out"] = csv_out
    st = _settings(ctx, **kw)
    started = _now()
    conf = _read_config(config_path) if config_path else {}

    def pick(flag, key, default):
        return flag if flag is not None else conf.get(key, default)

    model_src = st.get("model_path") or conf.get("model")
    if isinstance(model_src, dict):
        try:
            model = KernelModel.from_dict(model_src)
        except ParameterDomainError as exc:
            _usage_fail(f"{config_path}: model: {exc}")
        model_input = None
    else:
        model = _load(model_src)
        model_input = _embed(model_src)
    ms = _parse_m_list(pick(m_list, "m", (8, 16, 32)))
    seed = st.get("seed", conf.get("seed", conf.get("master_seed", 0)))
    sub = pick(subsample, "subsample", "off")
    sub = sub if isinstance(sub, bool) else str(sub).lower() in ("on", "true", "1", "yes")
    if st.get("threads") is None and not os.environ.get("TRACTLAB_THREADS") and "threads" in conf:
        threads = int(conf["threads"])
    else:
        threads = _threads(st.get("threads"))
    try:
        cfg = ExperimentConfig(
            model=model, m_list=ms, seeds=int(pick(seeds, "seeds", 10)), master_seed=int(seed),
            beta=float(pick(beta, "beta", 10.0)), subsample=sub,
            target_size_factor=float(conf.get("target_size_factor", 40.0)),
            lower_bound_target=float(conf.get("lower_bound_target", 0.5)),
            upper_ratio_target=float(conf.get("upper_ratio_target", 4.0)),
            grid=int(pick(grid, "grid", 64)), threads=threads, real=bool(pick(real, "real", False)))
    except (ValueError, TypeError) as exc:
        _usage_fail(str(exc))
    timing = bool(pick(timing, "timing", False))
    st["seed"] = cfg.master_seed
    params = {"m": list(cfg.m_list), "seeds": cfg.seeds, "master_seed": cfg.master_seed, "beta": cfg.beta,
              "subsample": cfg.subsample, "grid": cfg.grid, "real": cfg.real, "timing": timing,
              "target_size_factor": cfg.target_size_factor, "lower_bound_target": cfg.lower_bound_target,
              "upper_ratio_target": cfg.upper_ratio_target}
    table = _Table(st.get("out"), RECOVER_COLUMNS, st.get("as_json", False))

    def on_row(r):
        table.row({"m": r.m, "n": r.n, "|J|": r.J, "error": r.error, "a_{m+1}": r.a_next,
                   "ratio": r.ratio, "concentration": r.concentration,
                   "wall_ms": r.wall_ms if timing else None, "trial": r.trial, "d": r.d,
                   "error_lower": r.error_lower, "projection_error": r.projection_error,
                   "projection_bound": r.projection_bound, "bound_rhs": r.bound_rhs,
                   "chain_constant": r.chain_constant, "sigma_min": r.sigma_min, "K": r.K,
                   "remainder": r.remainder, "subsample_status": r.subsample_status})

    status = "ok"
    try:
        run_experiment(cfg, on_row=on_row)
    except _NUMERIC_ERRORS as exc:
        status = "failed"
        click.echo(f"numeric failure: {type(exc).__name__}: {exc}", err=True)
    files = table.close()
    write_manifest(ctx, "recover", st, files, started, status, model,
                   {"model": model_input, "config": _embed(config_path)}, params, threads=cfg.threads)
    if status != "ok":
        ctx.exit(EXIT_NUMERIC)


# --- replay --------------------------------------------------------------------


_PATH_FLAGS = {"--model": "model", "--config": "config"}
_OUT_FLAGS = ("--out", "-o", "--csv")


def replay_argv(doc: dict, workdir: Path) -> tuple[list[str], Path]:
    """Rewrite a manifest's argv so inputs come from the embedded copies and
    outputs land in ``workdir``."""
    argv = list(doc["argv"])
    inputs = doc.get("inputs", {})
    out_name = Path(doc["outputs"][0]["path"]).name if doc.get("outputs") else "out.csv"
    new_out = workdir / out_name
    res: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        flag, eq, inline = tok.partition("=")
        if flag in _OUT_FLAGS or flag in _PATH_FLAGS:
            val = inline if eq else (argv[i + 1] if i + 1 < len(argv) else "")
            step = 1 if eq else 2
            if flag in _OUT_FLAGS:
                val = str(new_out)
            else:
                emb = inputs.get(_PATH_FLAGS[flag])
                if emb is not None:
                    target = workdir / f"input_{_PATH_FLAGS[flag]}{emb.get('suffix', '')}"
                    target.write_text(emb["text"])
                    val = str(target)
            res += [flag, val]
            i += step
            continue
        res.append(tok)
        i += 1
    return res, new_out


@main.command("replay")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--keep", type=click.Path(file_okay=False), default=None,
              help="Directory for the replayed outputs (a temporary one by default).")
def cmd_replay(manifest, keep):
    """Re-run MANIFEST and check that every output is byte-identical."""
    doc = json.loads(Path(manifest).read_text())
    if doc.get("tool") != "tractlab" or "argv" not in doc:
        _usage_fail(f"{manifest} is not a tractlab manifest")
    if doc.get("version") != __version__:
        click.echo(f"warning: manifest from version {doc.get('version')}, running {__version__}", err=True)
    with tempfile.TemporaryDirectory(prefix="tractlab-replay-") as tmp:
        work = Path(keep) if keep else Path(tmp)
        work.mkdir(parents=True, exist_ok=True)
        argv, new_out = replay_argv(doc, work)
        try:
            code = main.main(args=argv, prog_name="tractlab", standalone_mode=False)
        except click.exceptions.Exit as exc:
            code = exc.exit_code
        except SystemExit as exc:
            code = exc.code
        code = code or 0
        mismatches = []
        for item in doc.get("outputs", []):
            name = Path(item["path"]).name
            if name == Path(doc["outputs"][0]["path"]).name:
                cand = new_out
            elif name.endswith(".json"):
                cand = json_mirror_path(new_out)
            else:
                cand = work / name
            got = _sha256(cand) if cand.exists() else None
            ok = got == item["sha256"]
            click.echo(f"{'match' if ok else 'DIFFER'}  {name}  {item['sha256'][:16]}  {(got or 'missing')[:16]}")
            if not ok:
                mismatches.append(name)
    if mismatches:
        click.echo(f"replay differs in {len(mismatches)} file(s)", err=True)
        sys.exit(EXIT_NUMERIC)
    if code != 0:
        sys.exit(code)
    click.echo("replay identical")


if __name__ == "__main__":  # pragma: no cover
    main()
