"""Named method presets and their expansion into component stacks."""
from __future__ import annotations

from .pipeline import MethodSpec
from .sampling import SamplerSpec

# (abbreviation, method) rows of the method table; "aci", "csbi" and "dm-"
# are families expanded by ``expand_row``.
METHOD_ROWS = (
    ("bg", "Bagging"), ("rf", "Random Forests"), ("rdf", "Random Decision Forests"),
    ("wbg", "weightedEnsemble - Bg"), ("wrf", "weightedEnsemble - RF"),
    ("wrdf", "weightedEnsemble - RDF"), ("ab", "AdaBoost"), ("ncsab", "Naive CS AdaBoost"),
    ("aci", "AdaC1/2/3"), ("acost", "AdaCost"), ("aub", "AdaUBoost"), ("csa", "CSAB"),
    ("csbi", "CSB0/1/2"), ("asb", "Asymmetric AdaBoost"), ("usb", "Under-SampleBoost"),
    ("cprb", "CPR-SampleBoost"), ("dab", "DMECC AdaBoost"), ("dm-", "DMECC-Ensemble"),
    ("upbg", "Under-preSampleEnsemble - Bg"), ("cprpbg", "CPR-preSampleEnsemble - Bg"),
    ("opbg", "Over-preSampleEnsemble - Bg"), ("uprf", "Under-preSampleEnsemble - RF"),
    ("cprprf", "CPR-preSampleEnsemble - RF"), ("oprf", "Over-preSampleEnsemble - RF"),
    ("uprdf", "Under-preSampleEnsemble - RDF"), ("cprprdf", "CPR-preSampleEnsemble - RDF"),
    ("oprdf", "Over-preSampleEnsemble - RDF"), ("ubg", "Under-SampleEnsemble - Bg"),
    ("cprbg", "CPR-SampleEnsemble - Bg"), ("obg", "Over-SampleEnsemble - Bg"),
    ("urf", "Under-SampleEnsemble - RF"), ("cprrf", "CPR-SampleEnsemble - RF"),
    ("orf", "Over-SampleEnsemble - RF"), ("urdf", "Under-SampleEnsemble - RDF"),
    ("cprrdf", "CPR-SampleEnsemble - RDF"), ("ordf", "Over-SampleEnsemble - RDF"),
)

_MODES = {"bg": "all", "rf": "per_split", "rdf": "per_tree"}
_SAMPLERS = {"u": "under", "cpr": "cpr", "o": "over_duplicate"}
_BOOST = {
    "ab": "adaboost", "ncsab": "ncsab", "ac1": "adac1", "ac2": "adac2", "ac3": "adac3",
    "acost": "adacost", "aub": "adaub", "csa": "csab", "csb0": "csb0", "csb1": "csb1",
    "csb2": "csb2", "asb": "asymab",
}


def _build_registry() -> dict[str, dict]:
    reg: dict[str, dict] = {}
    for base, mode in _MODES.items():
        reg[base] = dict(ensemble="bagging", attribute_mode=mode)
        reg["w" + base] = dict(ensemble="weighted", attribute_mode=mode)
        for prefix, kind in _SAMPLERS.items():
            reg[prefix + base] = dict(ensemble="sample", attribute_mode=mode, sampler=SamplerSpec(kind))
            reg[prefix + "p" + base] = dict(ensemble="presample", attribute_mode=mode, sampler=SamplerSpec(kind))
    for abbr, variant in _BOOST.items():
        reg[abbr] = dict(ensemble="boost", variant=variant)
    reg["usb"] = dict(ensemble="boost", variant="adaboost", sampler=SamplerSpec("under"))
    reg["cprb"] = dict(ensemble="boost", variant="adaboost", sampler=SamplerSpec("cpr"))
    reg["dab"] = dict(ensemble="boost", variant="adaboost", member_dmecc="tcs")
    # member-level DMECC for every bagging-style ensemble; Laplace leaves unless weighted
    for name in [k for k, v in reg.items() if v["ensemble"] != "boost"]:
        extra = {} if reg[name]["ensemble"] == "weighted" else {"leaf_estimator": "laplace"}
        reg["dm-" + name] = dict(reg[name], member_dmecc="tcs", **extra)
    return reg


PRESETS: dict[str, dict] = _build_registry()


def expand_row(abbr: str) -> list[str]:
    """Concrete preset names behind one method-table abbreviation."""
    if abbr == "aci":
        return ["ac1", "ac2", "ac3"]
    if abbr == "csbi":
        return ["csb0", "csb1", "csb2"]
    if abbr == "dm-":
        return sorted(k for k in PRESETS if k.startswith("dm-"))
    if abbr not in PRESETS:
        raise KeyError(abbr)
    return [abbr]


def preset(name: str, **overrides) -> MethodSpec:
    """Component stack of preset ``name`` with field ``overrides`` applied."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}")
    fields = dict(PRESETS[name], name=name)
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return MethodSpec(**fields)
