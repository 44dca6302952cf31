"""Default numerical tolerances.

``QSPFORGE_TOL`` overrides them, either as a comma separated list of
``name=value`` pairs (``tol_rank=1e-8,tol_norm=1e-7``) or as a single number,
which then replaces every tolerance at once.
"""

import os
from dataclasses import dataclass, fields, replace
from functools import lru_cache


@dataclass(frozen=True)
class Tolerances:
    tol_unitary: float = 1e-10
    tol_rank: float = 1e-9
    tol_norm: float = 1e-9
    tol_endpoint: float = 1e-9
    tol_prune: float = 1e-14


@lru_cache(maxsize=8)
def _parse(raw: str) -> Tolerances:
    base = Tolerances()
    raw = raw.strip()
    if not raw:
        return base
    names = {f.name for f in fields(Tolerances)}
    if "=" not in raw:
        value = float(raw)
        return replace(base, **{n: value for n in names if n != "tol_prune"})
    updates = {}
    for part in raw.split(","):
        if not part.strip():
            continue
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in names:
            raise ValueError(f"QSPFORGE_TOL: unknown tolerance {key!r}")
        updates[key] = float(value)
    return replace(base, **updates)


def tolerances() -> Tolerances:
    return _parse(os.environ.get("QSPFORGE_TOL", ""))


def tol(name: str, override=None) -> float:
    if override is not None:
        return float(override)
    return getattr(tolerances(), name)
