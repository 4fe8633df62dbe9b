"""JSON run configurations, validation and the two reproduction presets."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .channel import GaussianNoise
from .control import (
    BRS,
    CRS,
    ConstantReference,
    GainPolicy,
    PowerLawReference,
    SinusoidReference,
    SummableReference,
    TableReference,
)
from .engine import RunConfig
from .errors import ConfigurationError, NumericalError
from .topology import Topology, has_spanning_tree_rooted_at_leader, laplacian

__all__ = [
    "parse_config",
    "config_from_dict",
    "config_to_dict",
    "config_hash",
    "validate_config",
    "PRESETS",
    "preset",
]

_TOP_KEYS = {
    "topology", "noise", "estimator", "controller", "reference", "initial_state",
    "horizon", "replicas", "seed", "log_stride", "analysis",
}
_REQUIRED = ("topology", "noise", "estimator", "controller", "reference", "initial_state")


def _strict(d, allowed, path):
    if not isinstance(d, dict):
        raise ConfigurationError("expected an object", path)
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigurationError(f"unknown field(s) {extra}", path)


def _num(v, path, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigurationError("expected a finite number", path)
    if positive and not v > 0:
        raise ConfigurationError("must be positive", path)
    return v


def _reference(d):
    _strict(d, {"type", "epsilon", "amplitude", "frequency", "values"}, "reference")
    kind = d.get("type")
    allowed = {
        "constant": set(),
        "summable": set(),
        "power_law": {"epsilon"},
        "sinusoid": {"amplitude", "frequency"},
        "table": {"values"},
    }
    if kind not in allowed:
        raise ConfigurationError(f"unknown reference type {kind!r}", "reference.type")
    _strict(d, {"type"} | allowed[kind], "reference")
    try:
        if kind == "constant":
            return ConstantReference()
        if kind == "summable":
            return SummableReference()
        if kind == "power_law":
            return PowerLawReference(_num(d.get("epsilon"), "reference.epsilon"))
        if kind == "sinusoid":
            return SinusoidReference(
                _num(d.get("amplitude"), "reference.amplitude"),
                _num(d.get("frequency"), "reference.frequency"),
            )
        return TableReference(tuple(d.get("values") or ()))
    except ConfigurationError as exc:
        if exc.path:
            raise
        raise ConfigurationError(str(exc), "reference") from None


def _reference_dict(ref):
    if isinstance(ref, PowerLawReference):
        return {"type": "power_law", "epsilon": ref.epsilon_rate}
    if isinstance(ref, SinusoidReference):
        return {"type": "sinusoid", "amplitude": ref.amplitude, "frequency": ref.frequency}
    if isinstance(ref, TableReference):
        return {"type": "table", "values": list(ref.values)}
    return {"type": ref.kind}


def config_from_dict(doc: dict) -> RunConfig:
    """Build a :class:`RunConfig` from a parsed JSON document (strict keys)."""
    if doc is None:
        doc = {}
    _strict(doc, _TOP_KEYS, "")
    for key in _REQUIRED:
        if key not in doc:
            raise ConfigurationError(f"missing {key}")

    topo = doc["topology"]
    _strict(topo, {"adjacency"}, "topology")
    if "adjacency" not in topo:
        raise ConfigurationError("missing adjacency", "topology")
    try:
        t = Topology(topo["adjacency"])
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), "topology.adjacency") from None

    nz = doc["noise"]
    _strict(nz, {"family", "variance", "sigma", "thresholds"}, "noise")
    if nz.get("family", "gaussian") != "gaussian":
        raise ConfigurationError("only the gaussian family is available", "noise.family")
    if ("variance" in nz) == ("sigma" in nz):
        raise ConfigurationError("give exactly one of variance or sigma", "noise")
    if "variance" in nz:
        noise = GaussianNoise.from_variance(_num(nz["variance"], "noise.variance"))
    else:
        noise = GaussianNoise(_num(nz["sigma"], "noise.sigma"))
    thr = nz.get("thresholds", 0.0)
    thresholds = tuple(thr) if isinstance(thr, list) else _num(thr, "noise.thresholds")

    est = doc["estimator"]
    _strict(est, {"W", "beta", "policy", "initial_estimates"}, "estimator")
    for key in ("W", "beta"):
        if key not in est:
            raise ConfigurationError(f"missing {key}", "estimator")
    init = est.get("initial_estimates")
    if isinstance(init, dict):
        _strict(init, {"by_source"}, "estimator.initial_estimates")
        init = ("by_source", tuple(init["by_source"]))
    elif isinstance(init, list):
        init = tuple(init)
    elif init is not None:
        raise ConfigurationError("expected null, a list or {by_source: [...]}", "estimator.initial_estimates")

    ctl = doc["controller"]
    _strict(ctl, {"type", "N"}, "controller")
    try:
        policy = GainPolicy(ctl.get("type"), ctl.get("N"))
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), "controller") from None

    analysis = doc.get("analysis", {}) or {}
    _strict(analysis, {"kappa", "f_B_override", "c1"}, "analysis")

    return RunConfig(
        topology=t,
        noise=noise,
        W=_num(est["W"], "estimator.W"),
        beta=_num(est["beta"], "estimator.beta"),
        controller=policy,
        reference=_reference(doc["reference"]),
        initial_state=tuple(doc["initial_state"]),
        thresholds=thresholds,
        estimator_policy=est.get("policy"),
        initial_estimates=init,
        horizon=doc.get("horizon", 1000),
        replicas=doc.get("replicas", 1),
        seed=doc.get("seed", 0),
        log_stride=doc.get("log_stride", "geometric"),
        kappa=analysis.get("kappa", 1.0),
        f_B_override=analysis.get("f_B_override"),
        c1=analysis.get("c1"),
    )


def config_to_dict(c: RunConfig) -> dict:
    est = c.initial_estimates
    if est is None:
        init = None
    elif est[0] == "by_source":
        init = {"by_source": list(est[1])}
    else:
        init = list(est)
    ctl = {"type": c.controller.variant}
    if c.controller.N is not None:
        ctl["N"] = c.controller.N
    return {
        "topology": {"adjacency": [list(r) for r in c.topology.adjacency]},
        "noise": {
            "family": "gaussian",
            "sigma": c.noise.sigma,
            "thresholds": list(c.thresholds) if isinstance(c.thresholds, tuple) else c.thresholds,
        },
        "estimator": {"W": c.W, "beta": c.beta, "policy": c.estimator_policy, "initial_estimates": init},
        "controller": ctl,
        "reference": _reference_dict(c.reference),
        "initial_state": list(c.initial_state),
        "horizon": c.horizon,
        "replicas": c.replicas,
        "seed": c.seed,
        "log_stride": c.log_stride,
        "analysis": {"kappa": c.kappa, "f_B_override": c.f_B_override, "c1": c.c1},
    }


def config_hash(c: RunConfig) -> str:
    blob = json.dumps(config_to_dict(c), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def validate_config(c: RunConfig) -> RunConfig:
    """Checks that need the spectral machinery (spanning tree, constant-gain N)."""
    from .spectral import reduce, solve_lyapunov

    t = c.topology
    if not has_spanning_tree_rooted_at_leader(t):
        raise ConfigurationError(
            "spanning-tree assumption violated: no spanning tree rooted at the leader", "topology"
        )
    if c.controller.variant == BRS:
        try:
            sr = reduce(laplacian(t))
            lyap = solve_lyapunov(sr.L_tilde, c.kappa)
        except NumericalError as exc:
            raise ConfigurationError(f"cannot check N: {exc}", "controller.N") from None
        lap = laplacian(t)
        lam_L = float(np.linalg.eigvalsh(lap @ lap.T)[-1])
        try:
            c.controller.validate(lyap.lambda_max, lam_L)
        except ConfigurationError as exc:
            raise ConfigurationError(str(exc), "controller.N") from None
    return c


def parse_config(path) -> RunConfig:
    """Read, parse and validate a JSON run configuration."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc}") from None
    return validate_config(config_from_dict(doc))


# --- presets ----------------------------------------------------------------

_PAPER_ADJ = [
    [0, 1, 0, 0, 1],
    [1, 0, 0, 1, 0],
    [1, 0, 0, 1, 0],
    [0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0],
]

_PRESET_DOCS = {
    "paper-crs": {
        "topology": {"adjacency": _PAPER_ADJ},
        "noise": {"family": "gaussian", "variance": 10.0, "thresholds": 0.0},
        "estimator": {"W": 50.0, "beta": 150.0, "policy": "decaying",
                      "initial_estimates": {"by_source": [-4.0, -5.0, 2.0, 0.0, 5.0]}},
        "controller": {"type": CRS},
        "reference": {"type": "summable"},
        "initial_state": [-30.0, -10.0, 20.0, 10.0, 15.0],
        "horizon": 100000,
        "replicas": 100,
        "seed": 20240101,
        "log_stride": "geometric:4",
        "analysis": {"kappa": 1.0, "f_B_override": None, "c1": 3.8},
    },
    "paper-brs": {
        "topology": {"adjacency": _PAPER_ADJ},
        "noise": {"family": "gaussian", "variance": 10.0, "thresholds": 0.0},
        "estimator": {"W": 50.0, "beta": 3.0, "policy": "constant",
                      "initial_estimates": {"by_source": [-4.0, -5.0, 2.0, 0.0, 5.0]}},
        "controller": {"type": BRS, "N": 80.0},
        "reference": {"type": "sinusoid", "amplitude": 10.0, "frequency": 0.02},
        "initial_state": [-30.0, -10.0, 20.0, 10.0, 15.0],
        "horizon": 100000,
        "replicas": 20,
        "seed": 20240102,
        "log_stride": 50,
        "analysis": {"kappa": 1.0, "f_B_override": None, "c1": 3.8},
    },
}

PRESETS = tuple(_PRESET_DOCS)


def preset(name: str) -> RunConfig:
    """Frozen reproduction configuration ``paper-crs`` or ``paper-brs``."""
    try:
        doc = _PRESET_DOCS[name]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {list(PRESETS)}") from None
    return validate_config(config_from_dict(json.loads(json.dumps(doc))))


def preset_document(name: str) -> dict:
    return json.loads(json.dumps(_PRESET_DOCS[name]))
