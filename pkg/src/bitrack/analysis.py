"""Theory report for a run configuration (shared by ``analyze`` and ``report.json``)."""

from __future__ import annotations

import json
import math

import numpy as np

from .control import BRS, PowerLawReference
from .engine import RunConfig
from .errors import ConfigurationError, NumericalError
from .spectral import reduce, solve_lyapunov
from .theory import brs_bound, compute_constants, crs_condition, crs_rate, l1_alt, l2_alt
from .topology import has_spanning_tree_rooted_at_leader, laplacian, max_degree

__all__ = ["theory_report", "dumps", "format_table"]


def _clean(obj):
    """Make floats JSON-safe: non-finite values become strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2)


def theory_report(c: RunConfig) -> dict:
    """Every constant, condition and rate class implied by ``c``."""
    t = c.topology
    lap = laplacian(t)
    report = {
        "topology": {
            "n_followers": t.n_followers,
            "edges": [list(p) for p in t.edges],
            "degrees": t.degrees.tolist(),
            "d_star": max_degree(t),
            "spanning_tree": has_spanning_tree_rooted_at_leader(t),
        },
    }
    try:
        sr = reduce(lap)
        lyap = solve_lyapunov(sr.L_tilde, c.kappa)
    except (NumericalError, ConfigurationError) as exc:
        report["error"] = str(exc)
        return _clean(report)

    report["spectral"] = {
        "pi": sr.pi,
        "eigenvalues": [[z.real, z.imag] for z in sr.eigenvalues],
        "L_tilde": sr.L_tilde,
        "H": lyap.H,
        "kappa": lyap.kappa,
        "lyapunov_residual": lyap.residual(sr.L_tilde),
    }
    B = float(np.abs(c.threshold_vector()).max(initial=0.0))
    N = c.controller.N if c.controller.variant == BRS else None
    tc = compute_constants(
        t, sr, lyap, W=c.W, noise=c.noise, B=B, N=N,
        epsilon_bound=c.reference.epsilon, f_B_override=c.f_B_override, c1=c.c1,
    )
    report["constants"] = tc.to_dict()
    report["l1"] = {
        "theorem": tc.l1,
        "alt": None if c.c1 is None else l1_alt(tc.h, tc.lambda_W, tc.lambda_L, tc.lambda_phi, tc.d_star, c.c1),
        "l2_alt": None if c.c1 is None else l2_alt(tc.h, tc.lambda_W, tc.lambda_L, tc.lambda_phi, tc.d_star, c.c1),
    }
    report["crs_condition"] = crs_condition(tc, c.beta)
    if isinstance(c.reference, PowerLawReference):
        report["crs_rate"] = crs_rate(tc, c.beta, c.reference.epsilon_rate).to_dict()
    else:
        report["crs_rate"] = None
    report["brs_bound"] = None
    if N is not None:
        try:
            report["brs_bound"] = brs_bound(tc, c.beta, N).to_dict()
        except ConfigurationError as exc:
            report["brs_bound"] = {"feasible": False, "reason": str(exc), "norm_Q": math.nan}
    return _clean(report)


def _fmt(v, spec=".6g"):
    return format(v, spec) if isinstance(v, (int, float)) and not isinstance(v, bool) else str(v)


def format_table(report: dict) -> str:
    """Human-readable summary of :func:`theory_report`."""
    lines = []
    topo = report["topology"]
    lines.append(f"followers           {topo['n_followers']}")
    lines.append(f"edges               {len(topo['edges'])}")
    lines.append(f"d*                  {topo['d_star']}")
    lines.append(f"spanning tree       {'yes' if topo['spanning_tree'] else 'NO'}")
    if "error" in report:
        lines.append(f"reduction failed    {report['error']}")
        return "\n".join(lines)
    for key in ("lambda_H", "h", "lambda_phi", "lambda_W", "lambda_L", "lambda_M", "f_B"):
        val = report["constants"][key]
        lines.append(f"{key:<20}{'-' if val is None else _fmt(val)}")
    l1 = report["l1"]
    lines.append(f"l1 (theorem)        {_fmt(l1['theorem'])}")
    if l1["alt"] is not None:
        lines.append(f"l1 (alt)            {_fmt(l1['alt'])}")
    cond = report["crs_condition"]
    lines.append(f"beta threshold      {cond['threshold']}  satisfied={cond['satisfied']}")
    if report["crs_rate"]:
        r = report["crs_rate"]
        lines.append(f"rate                {r['rate_class']} (exponent {_fmt(r['exponent'], '.4g')}, lambda_min(Q) {_fmt(r['lambda_min_Q'], '.4g')})")
    if report["brs_bound"]:
        b = report["brs_bound"]
        lines.append(f"brs |Q|             {_fmt(b['norm_Q'])}  feasible={b['feasible']}")
        if b["reason"]:
            lines.append(f"brs reason          {b['reason']}")
    return "\n".join(lines)
