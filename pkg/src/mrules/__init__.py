"""Fritz John / KKT multiplier certificates under weak differentiability.

Typical use::

    from mrules import load_problem, analyze
    problem, candidate = load_problem("circle.toml")
    outcome = analyze(problem, candidate)
    outcome.verdict, outcome.document["lambda"]
"""
from .certificates import AscentCertificate, CertVerdict, MultiplierCertificate, NoMultipliers, render
from .cli import RunConfig, analyze
from .config import EngineConfig
from .differentiation import DiffConfig, Verdict, classify, gateaux_gradient
from .multipliers import fritz_john, normalize_kkt
from .ascent import certify_nonoptimal
from .problem import Candidate, DomainBox, load_problem, loads_problem, make_problem

__version__ = "0.1.0"


def catalog_dir():
    """Directory of the shipped problem catalog (``*.toml`` + ``*.expected``)."""
    from importlib import resources
    return resources.files(__name__) / "catalog"


__all__ = [
    "AscentCertificate", "CertVerdict", "MultiplierCertificate", "NoMultipliers", "render",
    "RunConfig", "analyze", "catalog_dir", "EngineConfig", "DiffConfig", "Verdict", "classify",
    "gateaux_gradient", "fritz_john", "normalize_kkt", "certify_nonoptimal",
    "Candidate", "DomainBox", "load_problem", "loads_problem", "make_problem",
]
