#!/usr/bin/env python3
"""Smoke test for the sector_fhc_py extension module.

Builds nothing itself: it expects `cargo build -p sector-fhc-py` to have
produced target/{debug,release}/libsector_fhc_py.so, stages the library
under its importable name, and exercises the bindings end to end.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    for profile in ("release", "debug"):
        built = ROOT / "target" / profile / "libsector_fhc_py.so"
        if built.exists():
            stage = Path(tempfile.mkdtemp(prefix="sector_fhc_py_"))
            shutil.copy2(built, stage / "sector_fhc_py.so")
            sys.path.insert(0, str(stage))
            return
    sys.exit("build the extension first: cargo build -p sector-fhc-py")


stage_module()
import sector_fhc_py as m  # noqa: E402

ALPHA = math.pi / 4

# sector geometry
sector = m.Sector(ALPHA)
assert sector.contains(1.0, 0.5)
assert not sector.contains(0.1, 0.5)
assert math.isclose(sector.truncated_area(2.0), ALPHA * 4.0)

# weight catalog and the sector integral
exp = m.Weight("exp", ALPHA)
value, error = exp.integrate()
assert math.isclose(value, 2.0 * ALPHA, rel_tol=1e-6), value
assert m.Weight("chaouchi", ALPHA).integrate() is None

# grid functions: weighted norm and the exact shift/translate identity
f = m.GridFn.indicator(ALPHA, "1/32", 1.0)
norm = f.norm(exp)
assert math.isclose(norm, 2.0 * ALPHA * (1.0 - 2.0 / math.e), rel_tol=0.05), norm
assert f.backshift(3.0, 2.0).translate(3.0, 2.0) == f
assert m.GridFn.from_json(f.to_json()) == f
assert f.scale(2.0).norm(exp) == 2.0 * norm

# densities: full sector is exactly 1, a ray exactly 0
horizons = [10.0, 100.0]
_, ratios, liminf = m.lower_density(json.dumps({"kind": "full"}), ALPHA, horizons)
assert ratios == [1.0, 1.0] and liminf == 1.0
_, ratios, _ = m.lower_density(json.dumps({"kind": "ray", "theta": 0.2}), ALPHA, horizons)
assert ratios == [0.0, 0.0]

# one criterion experiment at desk scale
result = m.criterion_experiment("exp", [(1.0, 1.0)], ALPHA, horizon=100.0)
assert result["terms"] > 0
assert 0.0 <= result["worst_return_error"] <= result["return_bound"]
assert len(result["plan_digest"]) == 16

print("smoke test passed")
