"""Batch harness: derived construction parameters, per-seed runs and table output.

Every run returns a list of row dicts.  Rows always carry a ``status`` of
``ok``, ``skipped(<reason>)`` or ``failed(<witness path or reason>)``.  CSV
output starts with a schema line and contains no timing columns, so a
(config, seed list) pair reproduces identical bytes; timings go to JSON.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from .canonical import (
    canonicalize,
    check_blocks_complete_bipartite,
    check_triangle_free,
    check_twins,
    check_weight_nondecreasing,
    collapse_to_configuration,
    random_triangle_free_subgraph,
)
from .config import CompoundGraph, exhaustive_oracle, probe_fairness, validate, weight_c
from .duality import lp_fractional, blowup_fractional_cover, tuza_report
from .eigen import symmetric_eigenvalues
from .errors import ConfigurationError, FeasibilityError, InstanceTooLargeError, TuzaLabError
from .extremal import chernoff_tail, max_crossing_triangle_free
from .generators import petersen_graph
from .gf2 import external_triangle_space, is_orthogonal
from .graph import (
    EXTERNAL,
    INTERNAL,
    Graph,
    blowup,
    complete_graph,
    cycle_graph,
    double,
    edge_uniforms,
    enumerate_triangles,
    random_graph,
    random_subgraph,
    write_graph,
)
from .spectral import (
    WeightedKMatrix,
    check_mixing,
    generate_triangle_free_expander,
    n_matrix_spectrum_closed_form,
)

__all__ = [
    "SCHEMA_LINE",
    "ExperimentConfig",
    "DerivedParameters",
    "read_config",
    "build_h",
    "derive_parameters",
    "block_pair_counts",
    "construction_record",
    "cover_bound_record",
    "run_construction",
    "run_cover_bound",
    "run_tuza_survey",
    "run_fairness_probe",
    "run_canonicalization_suite",
    "run_spectra",
    "run_mantel",
    "write_table",
]

SCHEMA_LINE = "# schema=1"
MATERIALIZE_EDGES = 200_000
PARAM_TOL = 1e-9


@dataclass
class ExperimentConfig:
    alpha: float = 0.3
    family: str = "petersen"
    family_params: dict = field(default_factory=dict)
    a: int = 10
    seed: int = 0
    n_seeds: int = 1
    cap_triangles: int = 100_000
    budget: int = 20_000
    c_grid: list[float] = field(default_factory=lambda: [round(0.1 * i, 1) for i in range(11)])
    probe_families: list[str] = field(default_factory=lambda: ["k2", "petersen"])
    trials: int = 1000
    cover_threshold: int = 20
    lp_vertex_limit: int = 40
    survey_sizes: list[int] = field(default_factory=lambda: [6, 8, 10, 12, 14, 16])
    survey_p: list[float] = field(default_factory=lambda: [0.3, 0.5, 0.7])
    mantel_max: int = 20
    out: str = "out"
    jobs: int = 1

    @property
    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.n_seeds)]


_LISTS = {"c_grid": float, "probe_families": str, "survey_sizes": int, "survey_p": float}
_FAMILY_KEYS = ("q", "n", "generators")


def read_config(path: str | Path) -> ExperimentConfig:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string("[experiment]\n" + Path(path).read_text())
    raw = dict(parser["experiment"])
    cfg = ExperimentConfig()
    known = {f for f in ExperimentConfig.__dataclass_fields__} - {"family_params"}
    for key, value in raw.items():
        if key in _FAMILY_KEYS:
            cfg.family_params[key] = value if key == "generators" else int(value)
        elif key in _LISTS:
            setattr(cfg, key, [_LISTS[key](x) for x in value.replace(",", " ").split()])
        elif key in known:
            kind = type(getattr(cfg, key))
            setattr(cfg, key, kind(value))
        else:
            raise ConfigurationError(f"unknown config key {key!r}")
    return cfg


def build_h(family: str, params: dict | None = None) -> Graph:
    """A registered triangle-free regular family member, or the edge ``k2``."""
    if family == "k2":
        return complete_graph(2)
    try:
        return generate_triangle_free_expander(family, **(params or {}))[0]
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


@dataclass(frozen=True)
class DerivedParameters:
    alpha: float
    c: float
    t: int
    d: int
    p: float
    q: float
    a: int
    n: int


def derive_parameters(alpha: float, h: Graph, a: int) -> DerivedParameters:
    """``c = alpha/6``, ``p = (1-c)/(2cd)``, ``q = (1-c)/(2ct)`` from the measured ``t``, ``d``.

    Rejects the configuration with every violated requirement named.
    """
    problems = []
    if not 0 < alpha < 1 / 3:
        raise ConfigurationError(f"requires 0 < alpha < 1/3, got alpha={alpha}")
    d = h.regular_degree()
    if d is None or d == 0:
        raise ConfigurationError("H must be regular with positive degree")
    if len(enumerate_triangles(h)):
        raise ConfigurationError("H must be triangle-free")
    if int(a) != a or a < 1:
        raise ConfigurationError("blowup size a must be a positive integer")
    t = h.n
    c = alpha / 6
    p = (1 - c) / (2 * c * d)
    q = (1 - c) / (2 * c * t)
    if d < 1 / (2 * c) - PARAM_TOL:
        problems.append(f"d >= (2c)^-1 fails: d={d} < {1 / (2 * c):.6g}")
    if not 0 < p < 1:
        problems.append(f"p = (1-c)/(2cd) in (0,1) fails: p={p:.6g}")
    if not 0 < q < 1:
        problems.append(f"q = (1-c)/(2ct) in (0,1) fails: q={q:.6g}")
    if problems:
        raise ConfigurationError("; ".join(problems))
    return DerivedParameters(alpha, c, t, d, p, q, int(a), 2 * t * int(a))


# -- construction ----------------------------------------------------------------

def block_pair_counts(h: Graph, a: int, p: float, q: float, seed: int, chunk: int = 256):
    """``|nabla(B_u, B_w)|`` in ``G_a`` for every edge ``uw`` of ``K``, without building ``G_a``.

    Uses the same per-edge draws as :func:`random_subgraph`, so the counts
    equal those of the materialized graph.  Returns ``(counts, types)``.
    """
    k = double(h)
    e = k.graph.edge_array()
    types = np.asarray(k.edge_type)
    probs = np.where(types == INTERNAL, p, q)
    ii, jj = np.divmod(np.arange(a * a), a)
    counts = np.empty(e.shape[0], dtype=np.int64)
    for s in range(0, e.shape[0], chunk):
        blk = e[s : s + chunk]
        us = blk[:, :1] * a + ii[None, :]
        vs = blk[:, 1:] * a + jj[None, :]
        u = edge_uniforms(seed, us.ravel(), vs.ravel()).reshape(us.shape)
        counts[s : s + chunk] = (u < probs[s : s + chunk, None]).sum(axis=1)
    return counts, types


def _band_stats(counts, mu, x):
    dev = np.abs(counts - mu)
    worst = float(dev.max()) if dev.size else 0.0
    inside = worst < x if x > 0 else worst == 0
    return worst, bool(inside)


def _two_sided(n, p, x):
    """Chernoff bound on ``P(|X - np| >= x)``, capped at 1."""
    return min(1.0, chernoff_tail(n, p, x, "upper") + chernoff_tail(n, p, x, "lower"))


def construction_record(h: Graph, a: int, p: float, q: float, seed: int,
                        c: float | None = None, materialize: bool | None = None) -> dict:
    """Edge counts of ``G_a`` against their targets, plus the Chernoff band check.

    The band is ``x = a log a`` applied to every block pair ``B_u, B_w``.
    """
    t, d = h.n, h.regular_degree()
    counts, types = block_pair_counts(h, a, p, q, seed)
    internal = int(counts[types == INTERNAL].sum())
    external = int(counts[types == EXTERNAL].sum())
    vertex = 2 * t * math.comb(a, 2)
    tgt_int, tgt_ext = t * d * a * a * p, t * t * a * a * q
    x = a * math.log(a)
    worst_int, band_int = _band_stats(counts[types == INTERNAL], a * a * p, x)
    worst_ext, band_ext = _band_stats(counts[types == EXTERNAL], a * a * q, x)
    m, n = internal + external + vertex, 2 * t * a
    rec = {
        "seed": int(seed), "t": t, "d": d, "a": a, "p": p, "q": q,
        "internal": internal, "external": external, "vertex": vertex, "m": m, "n": n,
        "target_internal": tgt_int, "target_external": tgt_ext, "target_vertex": vertex,
        "dev_internal": (internal - tgt_int) / tgt_int if tgt_int else 0.0,
        "dev_external": (external - tgt_ext) / tgt_ext if tgt_ext else 0.0,
        "dev_vertex": 0.0,
        "band_x": x,
        "worst_pair_internal": worst_int, "worst_pair_external": worst_ext,
        "within_band": band_int and band_ext,
        "chernoff_internal": _two_sided(a * a, p, x),
        "chernoff_external": _two_sided(a * a, q, x),
        "materialized": False,
    }
    if c is not None:
        m_target = n * n / (4 * t * c)
        rec.update(c=c, m_target=m_target, m_ratio=m / m_target)
    if materialize is None:
        materialize = m <= MATERIALIZE_EDGES
    if materialize:
        ga = random_subgraph(blowup(double(h), a), p, q, seed)
        tc = ga.type_counts()
        if (tc["internal"], tc["external"], tc["vertex"]) != (internal, external, vertex):
            raise FeasibilityError(f"streamed counts disagree with the materialized G_a: {tc}")
        rec["materialized"] = True
    return rec


def cover_bound_record(h: Graph, a: int, p: float, q: float, seed: int, alpha: float,
                       threshold: int = 20, lp_vertex_limit: int = 40,
                       cap_triangles: int = 100_000) -> dict:
    """Weight of the vertex-1 / external-1/2 cover against ``(1+alpha) m/4``.

    The weight follows from the edge counts; it is a valid cover because ``H``
    is triangle-free (checked).  Small instances also build ``G_a``, verify the
    cover on it and compare with the LP value ``tau3*``.
    """
    if len(enumerate_triangles(h)):
        raise FeasibilityError("H has a triangle; the constructed cover is not feasible")
    rec = construction_record(h, a, p, q, seed)
    weight = rec["vertex"] + rec["external"] / 2
    ratio = weight / (rec["m"] / 4)
    out = {
        "seed": int(seed), "a": a, "m": rec["m"], "weight": weight, "ratio": ratio,
        "target": 1 + alpha / 2, "ratio_minus_target": ratio - (1 + alpha / 2),
        "below_1_plus_alpha": bool(ratio < 1 + alpha), "asserted": a >= threshold,
        "tau3_star": "", "lp_le_weight": "", "status": "ok",
    }
    if out["asserted"] and not out["below_1_plus_alpha"]:
        out["status"] = f"failed(weight/(m/4)={ratio:.6g} >= 1+alpha)"
    if rec["n"] <= lp_vertex_limit:
        ga = random_subgraph(blowup(double(h), a), p, q, seed)
        cover = blowup_fractional_cover(ga)
        if abs(cover.value - weight) > 1e-9:
            raise FeasibilityError("counted and constructed cover weights differ")
        ts = enumerate_triangles(ga.graph)
        if len(ts) > cap_triangles:
            out["status"] = f"skipped(lp: {len(ts)} triangles > cap)"
        else:
            tau_star = lp_fractional(ts, "cover").value
            out["tau3_star"] = tau_star
            out["lp_le_weight"] = bool(tau_star <= weight + 1e-9)
            if not out["lp_le_weight"]:
                out["status"] = "failed(tau3* exceeds constructed cover)"
    return out


def _pmap(fn, items, jobs):
    """Ordered map; results come back in job-id order whatever the worker count."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _construction_job(seed, h, par):
    rec = construction_record(h, par.a, par.p, par.q, seed, c=par.c)
    rec["status"] = "ok"
    return rec


def run_construction(cfg: ExperimentConfig, h: Graph | None = None) -> list[dict]:
    h = h if h is not None else build_h(cfg.family, cfg.family_params)
    par = derive_parameters(cfg.alpha, h, cfg.a)
    rows = _pmap(partial(_construction_job, h=h, par=par), cfg.seeds, cfg.jobs)
    for r in rows:
        r["alpha"] = cfg.alpha
    return rows


def _cover_job(seed, h, par, cfg):
    return cover_bound_record(h, par.a, par.p, par.q, seed, par.alpha, cfg.cover_threshold,
                              cfg.lp_vertex_limit, cfg.cap_triangles)


def run_cover_bound(cfg: ExperimentConfig, h: Graph | None = None) -> list[dict]:
    h = h if h is not None else build_h(cfg.family, cfg.family_params)
    par = derive_parameters(cfg.alpha, h, cfg.a)
    return _pmap(partial(_cover_job, h=h, par=par, cfg=cfg), cfg.seeds, cfg.jobs)


# -- Tuza survey -----------------------------------------------------------------

def survey_instances(cfg: ExperimentConfig) -> list[tuple[str, Graph, int]]:
    fixed = [("K4", complete_graph(4)), ("K5", complete_graph(5)), ("C5", cycle_graph(5)),
             ("petersen", petersen_graph())]
    out = [(name, g, cfg.seed) for name, g in fixed]
    for n in cfg.survey_sizes:
        for p in cfg.survey_p:
            for s in cfg.seeds:
                out.append((f"G({n},{p})#{s}", random_graph(n, p, s), s))
    return out


def _survey_job(item, cap):
    name, g, seed = item
    row = {"instance": name, "n": g.n, "m": g.m, "seed": seed, "triangles": "", "tau3": "", "nu3": "",
           "tau3_star": "", "nu3_star": "", "ratio": "", "flag": False, "status": "ok"}
    try:
        rep = tuza_report(g, cap=cap, instance=name, seed=seed)
    except InstanceTooLargeError as exc:
        row["status"] = f"skipped({exc})"
        return row, None
    row.update({k: rep[k] for k in ("tau3", "nu3", "tau3_star", "nu3_star")})
    row["triangles"] = len(enumerate_triangles(g))
    if rep["nu3"] == 0:
        row["ratio"] = "no-triangles"
    else:
        row["ratio"] = rep["ratio"]
        row["flag"] = bool(rep["ratio"] > 2)
    return row, rep["runtime_ms"]


def run_tuza_survey(cfg: ExperimentConfig, instances=None) -> list[dict]:
    items = instances if instances is not None else survey_instances(cfg)
    results = _pmap(partial(_survey_job, cap=cfg.cap_triangles), items, cfg.jobs)
    rows = []
    for row, ms in results:
        row["_runtime_ms"] = ms
        rows.append(row)
    return rows


# -- fairness probe ----------------------------------------------------------------

def _probe_job(item, budget):
    family, params, c, seed, want_oracle = item
    kp = CompoundGraph.from_h(build_h(family, params))
    res = probe_fairness(kp, c, budget=budget, seed=seed)
    valid = validate(res.config) == []
    ortho = is_orthogonal(res.config.gamma_vector(), external_triangle_space(kp.base, res.config.g_mask()))
    check = weight_c(res.config, c).w_c
    row = {"family": family, "t": kp.t, "c": c, "seed": seed, "best": res.weight, "oracle": "",
           "fairness_disproved": bool(res.certificate and valid and check > 0.5 + 1e-9),
           "valid": valid, "gamma_orthogonal": ortho, "status": "ok"}
    if want_oracle:
        try:
            row["oracle"] = exhaustive_oracle(kp, c).value
        except InstanceTooLargeError as exc:
            row["oracle"] = f"skipped({exc})"
    if not valid or abs(check - res.weight) > 1e-12:
        row["status"] = "failed(reported optimum does not re-validate)"
    return row, res.config.to_json()


def _parse_family(entry: str) -> tuple[str, dict]:
    """``name`` or ``name:q`` (prime power for ``projective_incidence``)."""
    name, _, arg = entry.partition(":")
    return name, ({"q": int(arg)} if arg else {})


def run_fairness_probe(cfg: ExperimentConfig) -> list[dict]:
    items, labels = [], []
    for entry in cfg.probe_families:
        name, params = _parse_family(entry)
        for c in cfg.c_grid:
            for s in cfg.seeds:
                items.append((name, params, c, s, name == "k2"))
                labels.append(entry)
    results = _pmap(partial(_probe_job, budget=cfg.budget), items, cfg.jobs)
    rows = []
    for (row, cert), label in zip(results, labels):
        row["family"] = label
        row["_certificate"] = cert
        rows.append(row)
    return rows


# -- canonicalization suite -----------------------------------------------------------

CANON_BASES = (("double(K2)", complete_graph(2), 3), ("double(C4)", cycle_graph(4), 2),
               ("double(C5)", cycle_graph(5), 2), ("double(petersen)", None, 2))


def _canon_base(idx):
    name, h, eta = CANON_BASES[idx]
    return name, double(h if h is not None else petersen_graph()), eta


def run_canonicalization_suite(cfg: ExperimentConfig, out_dir: str | Path | None = None,
                               on_config=None) -> list[dict]:
    """Random trials; ``on_config`` (if given) receives every collapsed configuration."""
    rng = np.random.default_rng(cfg.seed)
    out_dir = Path(out_dir or cfg.out)
    rows = []
    for trial in range(cfg.trials):
        name, k, eta = _canon_base(int(rng.integers(len(CANON_BASES))))
        c = float(rng.uniform())
        f = random_triangle_free_subgraph(blowup(k, eta), rng, keep=float(rng.uniform(0.2, 1.0)))
        row = {"trial": trial, "base": name, "eta": eta, "c": c}
        try:
            cf = canonicalize(f, k, eta, c)
            checks = (check_weight_nondecreasing(cf, f), check_triangle_free(cf),
                      check_blocks_complete_bipartite(cf), check_twins(cf))
            valid = False
            if checks[2] and checks[3]:
                collapsed = collapse_to_configuration(cf)
                valid = validate(collapsed) == []
                if on_config is not None:
                    on_config(collapsed)
            row.update(weight_before=cf.weight_before, weight_after=cf.weight_after,
                       delta=cf.weight_after - cf.weight_before,
                       obs_i=checks[0], obs_ii=checks[1], obs_iii=checks[2], obs_iv=checks[3], valid=valid)
            ok = all(checks) and valid and row["delta"] >= -1e-12
        except TuzaLabError as exc:
            row["error"] = str(exc)
            ok = False
        if ok:
            row["status"] = "ok"
        else:
            out_dir.mkdir(parents=True, exist_ok=True)
            path = out_dir / f"canon_witness_{trial}.txt"
            write_graph(f, path)
            row["status"] = f"failed({path})"
        rows.append(row)
    return rows


def planted_fixed_point(k, eta: int, c: float) -> bool:
    """A canonical input (halves of each block, bs-style cross edges) is returned unchanged."""
    half = eta // 2
    S = [range(v * eta, v * eta + half) for v in range(k.n)]
    T = [range(v * eta + half, (v + 1) * eta) for v in range(k.n)]
    edges = [(x, y) for v in range(k.n) for x in S[v] for y in T[v]]
    for u, w in k.graph.edges():
        edges += [(x, y) for x in S[u] for y in T[w]] + [(x, y) for x in T[u] for y in S[w]]
    f = Graph(k.n * eta, edges)
    return write_graph(canonicalize(f, k, eta, c).graph) == write_graph(f)


# -- spectra and Mantel -------------------------------------------------------------

SPECTRA_FAMILIES = (("petersen", {}), ("projective_incidence", {"q": 3}), ("hoffman_singleton", {}))


def run_spectra(cfg: ExperimentConfig, families=SPECTRA_FAMILIES, c_values=(0.1, 0.5, 0.9)) -> list[dict]:
    rows = []
    for fam, params in families:
        h, spec = generate_triangle_free_expander(fam, **params)
        mix = check_mixing(h, spec, cfg.trials, cfg.seed)
        for c in c_values:
            wk = WeightedKMatrix.from_c(h, c)
            closed = np.array(n_matrix_spectrum_closed_form(wk, spec).eigenvalues)
            dense = np.array(symmetric_eigenvalues(wk.n_matrix()))
            d, t = spec.degree, h.n
            rows.append({
                "family": fam, "t": t, "d": d, "lambda": spec.lambda_max_nontrivial, "c": c,
                "closed_vs_dense": float(np.max(np.abs(closed - dense))),
                "identity_sum_err": abs(wk.p * d + wk.q * t - (1 - c) / t),
                "identity_diff_err": abs(wk.p * d - wk.q * t),
                "mixing_trials": mix.trials, "mixing_violations": mix.violations,
                "status": "ok",
            })
    return rows


def run_mantel(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> list[dict]:
    out_dir = Path(out_dir or cfg.out)
    rows = []
    for n in range(1, cfg.mantel_max + 1):
        try:
            res = max_crossing_triangle_free(n)
        except InstanceTooLargeError as exc:
            rows.append({"n": n, "size": "", "n_squared": n * n, "exact": "", "status": f"skipped({exc})"})
            continue
        out_dir.mkdir(parents=True, exist_ok=True)
        write_graph(res.witness, out_dir / f"mantel_witness_{n}.txt")
        rows.append({"n": n, "size": res.size, "n_squared": n * n, "exact": res.exact,
                     "status": "ok" if res.size <= n * n else "failed(exceeds n^2)"})
    return rows


# -- output ---------------------------------------------------------------------------

def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table(rows: list[dict], csv_path: str | Path | None = None, json_path: str | Path | None = None,
                meta: dict | None = None) -> str:
    """CSV (public columns only) and JSON (everything, including ``_``-prefixed extras)."""
    columns = []
    for r in rows:
        columns.extend(k for k in r if not k.startswith("_") and k not in columns)
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(k, "")) for k in columns])
    text = buf.getvalue()
    if csv_path is not None:
        Path(csv_path).write_text(text)
    if json_path is not None:
        payload = {"schema": 1, "meta": meta or {}, "rows": rows}
        Path(json_path).write_text(json.dumps(payload, indent=1, default=_json_default) + "\n")
    return text


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def config_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)
