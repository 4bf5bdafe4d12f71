"""Experiment runner, CSV emission and JSON reports."""

import csv
import io
import json
import math
import os
from fractions import Fraction

import numpy as np

from .config import ExperimentConfig
from .covers import cover_entropy, uniform_cover, uniform_cover_entropy
from .entpoints import (check_forward_invariant, check_full_entropy_on_ent,
                        entropy_point_set)
from .errors import ConfigError, PreconditionError, PropertyViolation
from .expansivity import expansivity_search
from .formats import load_system
from .shadowing import RNG_ALGORITHM, CertificateError, entropy_certificate
from .spanning import _resolve_mode, net_entropy, uniform_entropy
from .systems import (default_grid, first_symbol_entourage, metric_entourage,
                      metric_entourage_family, parse_system_spec)
from .uniform import validate_uniformity_base

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_PROPERTY = 4
EXIT_DEGRADED = 5

#: Above this many points entropy runs use greedy nets on the metric only.
DENSE_MAX = 4096
#: Scales used for greedy nets when no grid is configured.
NET_SCALES = 4

COUNT_COLUMNS = ("system", "scale", "n", "kind", "cardinality", "exact", "bound_gap")
PROFILE_COLUMNS = ("scale", "all_gamma_singleton", "trivial", "generator_pass", "horizon")
ENTPOINT_COLUMNS = ("point", "scale", "rate", "exact", "is_entropy_point")
VALIDATE_COLUMNS = ("system", "axiom", "passed", "detail")
SHADOW_COLUMNS = ("word", "shadow", "label")


def _cell(v):
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def format_csv(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def emit_csv(results, path, columns=COUNT_COLUMNS):
    """Write rows (dicts keyed by ``columns``) to ``path``; refuses empty input."""
    rows = list(results)
    if not rows:
        raise PreconditionError(f"no rows to write to {path}")
    text = format_csv(rows, columns)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def count_table_from_csv(rows):
    """``{(kind, scale, n): (cardinality, exact, bound_gap)}`` from emitted rows."""
    return {(r["kind"], r["scale"], int(r["n"])):
            (int(r["cardinality"]), r["exact"] == "true", int(r["bound_gap"]))
            for r in rows}


def count_rows(system, estimate):
    rows = []
    for (n, scale), r in sorted(estimate.counts.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        rows.append(dict(system=system, scale=scale, n=n, kind=r.kind,
                         cardinality=r.cardinality, exact=r.exact, bound_gap=r.bound_gap))
    return rows


def _summary(est):
    return {"method": est.method, "fitted_rate": est.fitted_rate,
            "window": list(est.fit_window), "lower_bound": est.lower_bound,
            "upper_bound": est.upper_bound, "limsup": est.limsup,
            "scale": est.scale, "exact": est.exact,
            "per_scale": {k: v for k, v in est.per_scale.items()}}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def build_system(cfg):
    if cfg.system_file is not None:
        try:
            with open(cfg.system_file) as fh:
                return load_system(fh.read(), name=os.path.basename(cfg.system_file))
        except OSError as exc:
            raise ConfigError(f"cannot read system file: {exc}") from exc
    return parse_system_spec(cfg.system)


def build_base(sys, cfg):
    grid = cfg.grid if cfg.grid is not None else default_grid(sys, cfg.max_scales)
    return metric_entourage_family(sys, grid)


def _pick_scale(sys, cfg, base):
    if cfg.scale is None:
        return None
    if cfg.scale == "E0":
        return first_symbol_entourage(sys)
    if cfg.scale.startswith("eps="):
        return metric_entourage(sys, Fraction(cfg.scale[4:]))
    return base.by_name(cfg.scale)


# -- experiment kinds ------------------------------------------------------------

def _run_validate(sys, cfg, name):
    report = validate_uniformity_base(build_base(sys, cfg))
    rows = [dict(system=name, axiom=r.axiom, passed=r.passed, detail=r.detail or "")
            for r in report.results]
    code = EXIT_OK if report.passed else EXIT_PROPERTY
    return {"axioms": report.as_dict(), "passed": report.passed}, rows, VALIDATE_COLUMNS, code


def _run_entropy(sys, cfg, name):
    if sys.size > DENSE_MAX:
        if sys.metric is None:
            raise PreconditionError("large systems need a metric for greedy nets")
        grid = cfg.grid if cfg.grid is not None else tuple(default_grid(sys, cfg.max_scales))[:NET_SCALES]
        n_max = cfg.n_max or 6
        est = net_entropy(sys, grid, n_max)
        return ({"net": _summary(est), "rate": est.fitted_rate, "mode": "greedy-net"},
                count_rows(name, est), COUNT_COLUMNS, EXIT_OK)
    base = build_base(sys, cfg)
    ue = uniform_entropy(sys, base, n_max=cfg.n_max, mode=cfg.mode, budget=cfg.budget)
    rows = count_rows(name, ue.separated) + count_rows(name, ue.spanning)
    mode = _resolve_mode(cfg.mode, sys.size)
    code = EXIT_DEGRADED if mode == "exact" and not ue.exact else EXIT_OK
    summary = {"separated": _summary(ue.separated), "spanning": _summary(ue.spanning),
               "rate": ue.rate, "discrepancy": ue.discrepancy, "mode": mode}
    return summary, rows, COUNT_COLUMNS, code


def _run_cover(sys, cfg, name):
    base = build_base(sys, cfg)
    mode = _resolve_mode(cfg.mode, sys.size)
    summary = {"mode": mode}
    rows = []
    E = _pick_scale(sys, cfg, base)
    if E is not None:
        est = cover_entropy(sys, uniform_cover(E), n_max=cfg.n_max, mode=cfg.mode,
                            budget=cfg.budget)
        summary["cover"] = _summary(est)
        rows += count_rows(name, est)
    huc = uniform_cover_entropy(sys, base, n_max=cfg.n_max, mode=cfg.mode,
                                budget=cfg.budget)
    summary["uniform_cover"] = _summary(huc)
    summary["compact_set"] = huc.notes.get("compact_set")
    rows += count_rows(name, huc)
    exact = huc.exact and ("cover" not in summary or summary["cover"]["exact"])
    code = EXIT_DEGRADED if mode == "exact" and not exact else EXIT_OK
    return summary, rows, COUNT_COLUMNS, code


def _run_shadow(sys, cfg, name):
    base = build_base(sys, cfg)
    cert = entropy_certificate(sys, base, cfg.word_length, seed=cfg.seed)
    rows = [dict(word=w, shadow=p, label=sys.label(p)) for w, p in cert.shadows.items()]
    code = EXIT_OK if cert.verified else EXIT_DEGRADED
    return {"certificate": cert.to_dict(sys)}, rows, SHADOW_COLUMNS, code


def _run_expansivity(sys, cfg, name):
    base = build_base(sys, cfg)
    res = expansivity_search(sys, base, with_generators=True)
    rows = [dict(scale=p.scale, all_gamma_singleton=p.all_gamma_singleton,
                 trivial=p.trivial, generator_pass=p.generator_pass, horizon=p.horizon)
            for p in res.profile]
    summary = {"sided": res.sided,
               "largest_passing": None if res.scale is None else res.scale.tag,
               "nontrivial": res.nontrivial,
               "largest_nontrivial": res.largest_nontrivial()}
    return summary, rows, PROFILE_COLUMNS, EXIT_OK


def _run_entpoints(sys, cfg, name):
    base = build_base(sys, cfg)
    ent = entropy_point_set(sys, base, n_max=cfg.n_max, threshold=cfg.threshold,
                            mode=cfg.mode, membership=cfg.membership)
    rows = []
    for prof in ent.profiles:
        for scale, est in prof.per_scale.items():
            rows.append(dict(point=prof.point, scale=scale, rate=est.fitted_rate,
                             exact=est.exact, is_entropy_point=prof.is_entropy_point))
    ok, bad = check_forward_invariant(sys, ent)
    if not ok:
        raise PropertyViolation(f"entropy points not forward invariant at {bad}", bad)
    full = check_full_entropy_on_ent(sys, ent, base, n_max=cfg.n_max, mode=cfg.mode)
    summary = {"points": list(ent.points), "count": len(ent.points),
               "membership": ent.membership, "threshold": ent.threshold,
               "forward_invariant": ok, "restricted_rate": full.restricted,
               "global_rate": full.global_rate, "gap": full.gap, "notes": ent.notes}
    return summary, rows, ENTPOINT_COLUMNS, EXIT_OK


RUNNERS = {"validate": _run_validate, "entropy": _run_entropy, "cover": _run_cover,
           "shadow": _run_shadow, "expansivity": _run_expansivity,
           "entpoints": _run_entpoints}


def run_experiment(cfg: ExperimentConfig, write=True):
    """Run one experiment; returns ``(report, exit_code)``.

    Writes ``<out>/<kind>.csv`` and ``<out>/report.json`` when ``write``.
    """
    report = {"config": cfg.as_dict(),
              "rng": {"algorithm": RNG_ALGORITHM, "seed": cfg.seed},
              "notes": {"closure": "closures are identities on finite discrete carriers"}}
    rows, columns = [], None
    try:
        sys = build_system(cfg)
        report["system"] = sys.describe()
        summary, rows, columns, code = RUNNERS[cfg.kind](sys, cfg, sys.describe())
        report["results"] = summary
        report["status"] = "ok" if code == EXIT_OK else "budget-degraded"
    except CertificateError as exc:
        code = EXIT_HYPOTHESIS
        report["status"] = f"hypothesis-missing: {exc.stage}"
        report["error"] = str(exc)
    except PropertyViolation as exc:
        code = EXIT_PROPERTY
        report["status"] = "property-violation"
        report["error"] = str(exc)
    except (ConfigError, PreconditionError) as exc:
        code = EXIT_CONFIG
        report["status"] = "config-error"
        report["error"] = str(exc)
    report["exit_code"] = code
    report = _jsonable(report)
    if write:
        os.makedirs(cfg.out, exist_ok=True)
        if rows:
            emit_csv(rows, os.path.join(cfg.out, f"{cfg.kind}.csv"), columns)
        with open(os.path.join(cfg.out, "report.json"), "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report, code
