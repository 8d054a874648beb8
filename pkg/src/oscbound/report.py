"""Problem documents, the verification pipeline and its report.

A problem document (schema ``oscbound/1``) names a phase F, a box, the chain
depth k, sampling settings and the free constants.  :func:`run_verify` runs
chain -> spectral -> coarea -> measure -> oracle -> bounds and returns a plain
dict that holds every intermediate value a verdict depends on.  Reports are
serialized with 17 significant digits so that bounds recomputed from the
echoed inputs match bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Any

import numpy as np

from . import bounds as B
from .chain import build_chain, gradient_seed
from .coarea import level_profile, monotone_split, oscillatory_from_profile
from .errors import BoundInputError, DimensionError, OscBoundError, StageError
from .measure import (SurfaceSystem, dyadic_shell_measures, gradient_norm_field, level_surface,
                      max_level_area, sublevel_measures, surface_measure)
from .oracle import oscillatory_integral
from .poly import (BoxDomain, Polynomial, format_polynomial, parse_polynomial,
                   polynomial_from_records)
from .sampling import stratified_sample
from .spectral import chain_extrema

SCHEMA = "oscbound/1"
REPORT_SCHEMA = "oscbound/1-report"
G_EPS = 1e-12
H_GRID_POINTS = 16
PI_LEVELS = 33
WP_CONVENTION = "wp_k = 3 r^2 log H~ with H~ the largest h-value among the bound inputs"


class DocumentError(OscBoundError, ValueError):
    pass


class MissingSectionError(OscBoundError, KeyError):
    pass


DEFAULT_SAMPLING = {
    "seed": 0,
    "samples": 200_000,
    "grid_points": 512,
    "resolution": 512,
    "extrema_resolution": None,
    "refine_rounds": 3,
    "target_error": 1e-10,
    "shells": 8,
}


@dataclass(frozen=True)
class ProblemDocument:
    n: int
    k: int
    phase: Polynomial
    domain: BoxDomain
    surface: SurfaceSystem | None = None
    H_grid: tuple[float, ...] | None = None
    t_grid: tuple[float, ...] | None = None
    constants: B.ConstantsConfig = field(default_factory=B.ConstantsConfig)
    sampling: dict = field(default_factory=lambda: dict(DEFAULT_SAMPLING))
    theorem4_cases: tuple[str, ...] | None = None
    source: dict = field(default_factory=dict)


def _poly(spec, n, where):
    try:
        if isinstance(spec, str):
            return parse_polynomial(spec, n)
        if isinstance(spec, list):
            return polynomial_from_records(spec, n)
    except (OscBoundError, ValueError, KeyError) as exc:
        raise DocumentError(f"{where}: {exc}") from exc
    raise DocumentError(f"{where}: expected a polynomial string or a list of term records")


def parse_document(data: dict) -> ProblemDocument:
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise DocumentError(f"schema must be {SCHEMA!r}, got {data.get('schema')!r}")
    try:
        n, k = int(data["n"]), int(data["k"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError("n and k are required integers") from exc
    if not 1 <= n <= 3:
        raise DocumentError("n must be 1, 2 or 3")
    if k < 0:
        raise DocumentError("k must be nonnegative")
    phase = _poly(data.get("phase"), n, "phase")
    dom = data.get("domain") or {}
    try:
        cons = tuple((_poly(c["poly"], n, "constraint"), c["relation"]) for c in dom.get("constraints", []))
        domain = BoxDomain(tuple(dom["lower"]), tuple(dom["upper"]), cons)
    except (KeyError, TypeError, ValueError, OscBoundError) as exc:
        raise DocumentError(f"domain: {exc}") from exc
    if domain.num_vars != n:
        raise DocumentError("domain dimension does not match n")
    surface = None
    if data.get("surface"):
        eqs = tuple(_poly(e, n, "surface") for e in data["surface"].get("equations", []))
        try:
            surface = SurfaceSystem(eqs, domain)
        except DimensionError as exc:
            raise DocumentError(f"surface: {exc}") from exc
    sampling = dict(DEFAULT_SAMPLING)
    unknown = set(data.get("sampling", {})) - set(DEFAULT_SAMPLING)
    if unknown:
        raise DocumentError(f"unknown sampling keys {sorted(unknown)}")
    sampling.update(data.get("sampling", {}))
    cases = data.get("theorem4_cases")
    if cases is not None:
        bad = [c for c in cases if c not in B.THEOREM4_CASES]
        if bad:
            raise DocumentError(f"unknown theorem4 cases {bad}")
        cases = tuple(cases)
    try:
        constants = B.ConstantsConfig.from_dict(data.get("constants"))
    except BoundInputError as exc:
        raise DocumentError(str(exc)) from exc

    def grid(name):
        g = data.get(name)
        return None if g is None else tuple(float(x) for x in g)

    return ProblemDocument(n, k, phase, domain, surface, grid("H_grid"), grid("t_grid"),
                           constants, sampling, cases, data)


def load_document(path) -> ProblemDocument:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON ({exc})") from exc
    return parse_document(data)


def sample_document_data() -> dict:
    return json.loads(resources.files("oscbound").joinpath("data/sample.json").read_text())


def sample_document() -> ProblemDocument:
    return parse_document(sample_document_data())


def with_sampling(doc: ProblemDocument, **overrides) -> ProblemDocument:
    s = dict(doc.sampling)
    s.update({k: v for k, v in overrides.items() if v is not None})
    return replace(doc, sampling=s)


# -- serialization ------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


def dumps_report(report: dict) -> str:
    return _encode(_plain(report), 1, 0) + "\n"


# -- verdicts -----------------------------------------------------------------

def _verdict(check, bound, measured, **extra):
    holds = measured <= bound
    return {"check": check, "status": "holds" if holds else "fails", "holds": holds,
            "bound": bound, "measured": measured, "margin": bound - measured, **extra}


def _vacuous(check, reason, **extra):
    return {"check": check, "status": "vacuous", "holds": True, "bound": None,
            "measured": None, "margin": None, "reason": reason, **extra}


# -- stages -------------------------------------------------------------------

def _stage(name, fn, report, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (OscBoundError, ValueError, ArithmeticError) as exc:
        report.setdefault("missing", []).append(name)
        report["error"] = {"stage": name, "message": str(exc)}
        raise StageError(name, exc, report) from exc


def echo_document(doc: ProblemDocument) -> dict:
    return {
        "schema": SCHEMA,
        "n": doc.n,
        "k": doc.k,
        "phase": format_polynomial(doc.phase),
        "domain": {"lower": list(doc.domain.lower), "upper": list(doc.domain.upper),
                   "constraints": [{"poly": format_polynomial(p), "relation": r}
                                   for p, r in doc.domain.constraints]},
        "surface": None if doc.surface is None else
        {"equations": [format_polynomial(e) for e in doc.surface.equations]},
        "H_grid": None if doc.H_grid is None else list(doc.H_grid),
        "t_grid": None if doc.t_grid is None else list(doc.t_grid),
        "constants": doc.constants.to_dict(),
        "sampling": {k: doc.sampling[k] for k in DEFAULT_SAMPLING},
        "theorem4_cases": None if doc.theorem4_cases is None else list(doc.theorem4_cases),
    }


def spectral_stage(doc: ProblemDocument) -> dict:
    s = doc.sampling
    depth = max(doc.k, doc.n - 1)
    chain = build_chain(gradient_seed(doc.phase), depth)
    ext4 = chain_extrema(chain, doc.domain, s["extrema_resolution"], s["refine_rounds"])
    out = {"chain": chain, "thm4": ext4,
           "H_tilde": ext4.l_levels[0], "H_1": ext4.g_min[0], "L": ext4.l_max}
    if doc.n >= 2:
        r_s = doc.n - 1
        out["surface_ext"] = chain_extrema(chain, doc.domain, s["extrema_resolution"],
                                           s["refine_rounds"], [r_s] * (depth + 1))
    return out


def default_H_grid(G0: float, L: float) -> list[float]:
    lo = 1.1 * G0
    if lo <= 0:
        lo = L / H_GRID_POINTS
    hi = max(L, lo)
    return np.linspace(lo, hi, H_GRID_POINTS).tolist()


def surface_k(ext, k: int) -> int | None:
    for j in range(1, k + 1):
        if ext.g_min[j] > G_EPS:
            return j
    return None


def surface_inputs(doc, spec, H, ks, vol) -> B.BoundInputs:
    ext = spec["surface_ext"]
    return B.BoundInputs(n=doc.n, r=doc.n - 1, k=ks, H=H,
                         G_levels=tuple(ext.g_min[1:ks + 1]),
                         G_paren=B.g_paren_chain(H, ext.g_min[ks], ks),
                         L=spec["L"], H_tilde=spec["H_tilde"], H_1=spec["H_1"], vol_omega=vol)


def measure_stage(doc, spec, profile, sample) -> dict:
    s = doc.sampling
    g0 = gradient_norm_field(doc.phase)
    Hs = list(doc.H_grid) if doc.H_grid is not None else default_H_grid(spec["H_1"], spec["L"])
    sub = sublevel_measures(g0, doc.domain, Hs, sample=sample)
    shells = dyadic_shell_measures(g0, doc.domain, Hs[-1], int(s["shells"]), sample=sample)
    out = {"H_grid": Hs,
           "sublevel": [{"H": H, "value": e.value, "std_error": e.std_error} for H, e in zip(Hs, sub)],
           "shells": {"H": Hs[-1], "values": [e.value for e in shells],
                      "std_errors": [e.std_error for e in shells]},
           "rows": [], "verdicts": []}
    if doc.n not in (2, 3):
        out["surface"] = None
        return out
    if doc.surface is not None and len(doc.surface.equations) == 1:
        surf = doc.surface
    else:
        surf = SurfaceSystem((level_surface(doc.phase, 0.5 * (profile.m + profile.M)),), doc.domain)
    out["surface"] = {"equations": [format_polynomial(e) for e in surf.equations]}
    ks = surface_k(spec["surface_ext"], doc.k)
    out["surface_k"] = ks
    cfg = doc.constants
    for H in Hs:
        est = surface_measure(surf, g0, H, int(s["resolution"]))
        row = {"H": H, "mu_est": est.value, "std_error": est.std_error, "skipped": est.skipped}
        if ks is None or not H > 0:
            reason = "no chain level 1..k has G_k > 0" if ks is None else "H = 0"
            row.update(thm1=None, thm2=None, thm3=None)
            out["verdicts"] += [_vacuous(f"theorem{t}_surface", reason, H=H) for t in (1, 2, 3)]
        else:
            inp = surface_inputs(doc, spec, H, ks, 1.0)
            vals = {"thm1": B.theorem1_bound(inp, cfg), "thm2": B.theorem2_bound(inp, cfg),
                    "thm3": B.theorem3_bound(inp, cfg)}
            row.update(vals)
            for t in (1, 2, 3):
                out["verdicts"].append(_verdict(f"theorem{t}_surface", vals[f"thm{t}"], est.value,
                                                H=H, k=ks, inputs=inp.to_dict()))
        out["rows"].append(row)
    return out


def theorem4_inputs(doc, spec, Pi_area, vol, scale=1.0) -> B.BoundInputs:
    """Inputs for the phase scale*F: each G_j scales by scale^r_j, norms by scale."""
    ext = spec["thm4"]
    k = doc.k
    G = tuple(ext.g_min[j] * scale ** ext.r_levels[j] for j in range(1, k + 1))
    G_det = ext.g_min[k - 1] * scale ** ext.r_levels[k - 1] if k >= 1 else 0.0
    return B.BoundInputs(n=doc.n, r=doc.n, k=k, G_levels=G, L=spec["L"] * scale,
                         H_tilde=spec["H_tilde"] * scale, H_1=spec["H_1"] * scale,
                         Pi_area=Pi_area, vol_omega=vol, G_det=G_det)


def theorem4_admissible(case, inp) -> str | None:
    """Reason the hypotheses fail, or None."""
    if inp.level(inp.k - 1) <= G_EPS:
        return f"G_{inp.k - 1} = 0 on the domain"
    if inp.H_1 <= G_EPS:
        return "grad F vanishes in the domain (H_1 = 0)"
    if case == "k_ge_r" and inp.G_det <= G_EPS:
        return "min sqrt(det(A_{k-1} A_{k-1}^t)) = 0"
    if case == "k_lt_r_b" and not inp.Pi_area > 0:
        return "no level surface meets the domain"
    return None


def level_area(doc, m, M) -> float:
    """Largest measure of a level set {F = u}, u over PI_LEVELS values in [m, M]; 0 for n = 1."""
    if doc.n not in (2, 3) or not M > m:
        return 0.0
    lv = np.linspace(m, M, PI_LEVELS)
    return max_level_area(doc.phase, doc.domain, lv, min(int(doc.sampling["resolution"]), 256))[0]


def bounds_stage(doc, spec, K0, I_abs, Pi_area, vol) -> dict:
    cfg = doc.constants
    r = doc.n
    out = {"r": r, "k": doc.k, "K0": K0, "Pi_area": Pi_area, "verdicts": [], "theorem4": []}
    requested = doc.theorem4_cases
    if requested is not None:
        for case in requested:
            if doc.k <= 1:
                raise BoundInputError("k-1 division undefined: theorem4_bound needs k >= 2")
            if case not in B.theorem4_cases(doc.k, r):
                raise BoundInputError(f"theorem4 case {case} does not apply to k={doc.k}, r={r}")
        cases = requested
    else:
        cases = B.theorem4_cases(doc.k, r) if doc.k >= 2 else ()
        if doc.k < 2:
            out["verdicts"].append(_vacuous("theorem4", "k-1 division undefined (k < 2)"))
    cfg_k0 = replace(cfg, K=float(K0))
    inp = theorem4_inputs(doc, spec, Pi_area, vol) if doc.k >= 2 else None
    for case in cases:
        why = theorem4_admissible(case, inp)
        if why:
            out["verdicts"].append(_vacuous(f"theorem4_{case}", why))
            continue
        b_cfg = B.theorem4_bound(case, inp, cfg)
        b_k0 = B.theorem4_bound(case, inp, cfg_k0)
        out["theorem4"].append({"case": case, "bound_cfgK": b_cfg, "bound_K0": b_k0,
                                "L0": B.theorem4_L0(inp)})
        out["verdicts"].append(_verdict(f"theorem4_{case}", b_k0, I_abs, case=case,
                                        inputs=inp.to_dict(), constants=cfg_k0.to_dict()))
    # consequence: λ from minimal singular values, r = n
    s = doc.sampling
    try:
        lam, cb = B.consequence_lambda(spec["chain"], doc.domain, max(doc.k, 1), r, cfg_k0,
                                       s["extrema_resolution"], s["refine_rounds"])
        out["consequence"] = {"lambda": lam, "bound": cb, "k": max(doc.k, 1)}
        out["verdicts"].append(_verdict("consequence", cb, I_abs, **{"lambda": lam}))
    except BoundInputError as exc:
        out["consequence"] = None
        out["verdicts"].append(_vacuous("consequence", str(exc)))
    return out


def decay_bounds(doc, spec, K0, Pi_area, vol, ts) -> list:
    if doc.k < 2:
        return [float("nan")] * len(ts)
    cfg = replace(doc.constants, K=float(K0))
    out = []
    for t in ts:
        inp = theorem4_inputs(doc, spec, Pi_area, vol, t)
        vals = [B.theorem4_bound(c, inp, cfg) for c in B.theorem4_cases(doc.k, doc.n)
                if theorem4_admissible(c, inp) is None]
        out.append(min(vals) if vals else float("nan"))
    return out


def default_t_grid() -> list[float]:
    return np.geomspace(1.0, 100.0, 9).tolist()


def run_verify(doc: ProblemDocument, workers: int = 1) -> dict:
    s = doc.sampling
    report: dict[str, Any] = {"schema": REPORT_SCHEMA, "inputs": echo_document(doc)}
    report["flags"] = {"heuristic_extrema": True, "corrected_recursion": True,
                       "wp_convention": WP_CONVENTION,
                       "theorem4_case_boundary": "k == r admits both case forms",
                       "not_converged": []}

    spec = _stage("spectral", spectral_stage, report, doc)
    ext4 = spec["thm4"]
    report["flags"]["extrema_resolution"] = ext4.sample_resolution
    report["computed"] = {
        "chain_depth": spec["chain"].depth,
        "G_levels": list(ext4.g_min), "G_argmin": [list(p) for p in ext4.g_argmin],
        "r_levels": list(ext4.r_levels), "L": spec["L"], "L_levels": list(ext4.l_levels),
        "H_tilde": spec["H_tilde"], "H_1": spec["H_1"],
    }
    if "surface_ext" in spec:
        report["computed"]["G_levels_surface"] = list(spec["surface_ext"].g_min)

    sample = _stage("sampling", stratified_sample, report, doc.domain, int(s["samples"]),
                    int(s["seed"]), workers)
    profile = _stage("coarea", level_profile, report, doc.phase, doc.domain, int(s["grid_points"]),
                     sample=sample, extrema_resolution=s["extrema_resolution"])
    pieces = monotone_split(profile)
    vol = profile.volume
    I_prof = oscillatory_from_profile(profile)
    report["computed"].update({"vol_omega": vol, "m": profile.m, "M": profile.M,
                               "K0": pieces.count})

    oracle = _stage("oracle", oscillatory_integral, report, doc.phase, doc.domain,
                    float(s["target_error"]), seed=int(s["seed"]))
    if not oracle.converged:
        report["flags"]["not_converged"].append("I")
    I_abs = abs(oracle.value)
    report["oracle"] = {"I": oracle.value, "abs_I": I_abs, "error": oracle.abs_error_estimate,
                        "rule_error": oracle.rule_error, "qmc": oracle.qmc_value,
                        "qmc_error": oracle.qmc_error, "evaluations": oracle.evaluations,
                        "converged": oracle.converged}

    tol_prof = 10.0 * profile.noise_scale + 1.0 / profile.grid_points
    report["coarea"] = {
        "I_profile": I_prof, "difference": abs(I_prof - oracle.value), "tolerance": tol_prof,
        "normalization": profile.normalization(), "noise_scale": profile.noise_scale,
        "step": profile.step, "grad_min": profile.grad_min,
        "pieces": {"breakpoints": list(pieces.breakpoints), "directions": list(pieces.directions),
                   "tolerance": pieces.tolerance},
        "profile": {"u": profile.u_grid, "V": profile.V, "phi": profile.phi,
                    "piece": pieces.piece_index(profile.grid_points)},
    }
    verdicts = [
        _verdict("coarea_reconstruction", tol_prof, abs(I_prof - oracle.value)),
        _verdict("coarea_normalization", 5.0 * profile.noise_scale, abs(profile.normalization() - vol)),
    ]

    meas = _stage("measure", measure_stage, report, doc, spec, profile, sample)
    report["measure"] = {k: v for k, v in meas.items() if k != "verdicts"}
    verdicts += meas["verdicts"]

    Pi_area = 0.0
    if doc.k >= 2:
        Pi_area = _stage("measure", level_area, report, doc,
                         profile.m + profile.step, profile.M - profile.step)
    report["computed"]["Pi_area"] = Pi_area

    bnd = _stage("bounds", bounds_stage, report, doc, spec, pieces.count, I_abs, Pi_area, vol)
    report["bounds"] = {k: v for k, v in bnd.items() if k != "verdicts"}
    verdicts += bnd["verdicts"]

    ts = list(doc.t_grid) if doc.t_grid is not None else default_t_grid()
    decay = {"t": ts, "abs_I": [], "error": [], "bound": []}
    for t in ts:
        r = _stage("oracle", oscillatory_integral, report, doc.phase, doc.domain,
                   float(s["target_error"]), scale=float(t), seed=int(s["seed"]))
        decay["abs_I"].append(abs(r.value))
        decay["error"].append(r.abs_error_estimate)
        if not r.converged:
            report["flags"]["not_converged"].append(f"I(t={t!r})")
    decay["bound"] = _stage("bounds", decay_bounds, report, doc, spec, pieces.count, Pi_area, vol, ts)
    pos = [t for t in ts if t > 0]
    decay["fit"] = None
    if len(pos) >= 5 and max(pos) / min(pos) >= 100:
        mags = np.array(decay["abs_I"])[[t > 0 for t in ts]]
        errs = np.array(decay["error"])[[t > 0 for t in ts]]
        used = mags > 10 * errs
        if used.sum() >= 2:
            x, y = np.log(np.array(pos)[used]), np.log(mags[used])
            coef = np.polyfit(x, y, 1)
            decay["fit"] = {"slope": float(coef[0]),
                            "residual": float(np.sqrt(np.mean((y - np.polyval(coef, x)) ** 2)))}
    report["decay"] = decay
    report["verdicts"] = verdicts
    report["summary"] = {"checks": len(verdicts),
                         "holds": sum(v["status"] == "holds" for v in verdicts),
                         "fails": sum(v["status"] == "fails" for v in verdicts),
                         "vacuous": sum(v["status"] == "vacuous" for v in verdicts)}
    return report


def all_hold(report: dict) -> bool:
    return all(v["status"] != "fails" for v in report.get("verdicts", []))


# -- plot data ----------------------------------------------------------------

CSV_COLUMNS = {
    "decay": ("t", "abs_I", "bound"),
    "profile": ("u", "V", "phi", "piece"),
    "measure": ("H", "mu_est", "thm1", "thm2", "thm3"),
}


def _cell(v):
    if v is None:
        return "nan"
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return _fmt_float(float(v)).lower().replace("infinity", "inf")


def plot_rows(report: dict, kind: str) -> list[tuple]:
    if kind not in CSV_COLUMNS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {sorted(CSV_COLUMNS)}")
    try:
        if kind == "decay":
            d = report["decay"]
            return list(zip(d["t"], d["abs_I"], d["bound"]))
        if kind == "profile":
            p = report["coarea"]["profile"]
            return list(zip(p["u"], p["V"], p["phi"], p["piece"]))
        rows = report["measure"]["rows"]
        return [(r["H"], r["mu_est"], r["thm1"], r["thm2"], r["thm3"]) for r in rows]
    except (KeyError, TypeError) as exc:
        raise MissingSectionError(f"report has no {kind} section") from exc


def emit_plot_data(report: dict, kind: str) -> str:
    """CSV text (header + one row per sample) for the requested report section."""
    rows = plot_rows(report, kind)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS[kind])
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()
