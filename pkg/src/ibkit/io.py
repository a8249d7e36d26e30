"""JSON and CSV readers/writers used by the command line.

Parse errors raise :class:`~ibkit.errors.IBKitError` subclasses whose
messages name the offending field, row or column (rows count from 0).
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .closedform import GaussianIBModel
from .coding import CranModel
from .curve import CurvePoint
from .dib import DistributedJoint, GaussianDIBModel
from .errors import CardinalityMismatch, IBKitError, NotNormalized
from .prob import Encoder, JointPMF, validate_joint
from .variational import VariationalComponents


class InputError(IBKitError):
    """Malformed input file."""


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object at the top level")
    return data


def _field(data: dict, name: str, where: str = ""):
    if name not in data:
        raise InputError(f"missing field '{name}'{where}")
    return data[name]


def _matrix(value, name: str) -> np.ndarray:
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"field '{name}' must be a numeric array") from None
    if a.dtype == object or not np.all(np.isfinite(a)):
        raise InputError(f"field '{name}' must hold finite numbers")
    return a


def joint_from_dict(data: dict, renormalize: bool = False) -> JointPMF:
    pmf = _field(data, "pmf")
    if not isinstance(pmf, list):
        raise InputError("field 'pmf' must be a list of rows")
    j = validate_joint(pmf, renormalize=renormalize, prune_zeros=False)
    for name, actual in (("x_card", j.x_card), ("y_card", j.y_card)):
        if name in data and data[name] != actual:
            raise CardinalityMismatch(f"field '{name}' says {data[name]} but 'pmf' has {actual}")
    return validate_joint(j.p, prune_zeros=True)


def read_joint(path, renormalize: bool = False) -> JointPMF:
    return joint_from_dict(load_json(path), renormalize)


def joint_to_dict(j: JointPMF) -> dict:
    return {"x_card": j.x_card, "y_card": j.y_card, "pmf": j.p.tolist()}


def read_encoder(path) -> Encoder:
    return Encoder(_matrix(_field(load_json(path), "rows"), "rows"))


def read_components(path) -> VariationalComponents:
    data = load_json(path)
    return VariationalComponents(_matrix(_field(data, "decoder"), "decoder"), _matrix(_field(data, "prior"), "prior"))


def read_gaussian_model(path) -> GaussianIBModel:
    data = load_json(path)
    if "sigma_x" in data:
        return GaussianIBModel(_matrix(data["sigma_x"], "sigma_x"),
                               _matrix(_field(data, "sigma_x_given_y"), "sigma_x_given_y"))
    if "H" in data:
        return GaussianIBModel.from_channel(_matrix(data["H"], "H"),
                                            _matrix(_field(data, "sigma_noise"), "sigma_noise"),
                                            _matrix(_field(data, "sigma_y"), "sigma_y"))
    raise InputError("Gaussian model needs either 'sigma_x' and 'sigma_x_given_y' or 'H', 'sigma_noise' and 'sigma_y'")


def read_distributed(path) -> DistributedJoint:
    data = load_json(path)
    p_y = _matrix(_field(data, "p_y"), "p_y")
    conds = _field(data, "conditionals")
    if not isinstance(conds, list) or not conds:
        raise InputError("field 'conditionals' must be a non-empty list of matrices")
    mats = [_matrix(c, f"conditionals[{k}]") for k, c in enumerate(conds)]
    if "y_card" in data and data["y_card"] != p_y.size:
        raise CardinalityMismatch(f"field 'y_card' says {data['y_card']} but 'p_y' has {p_y.size} entries")
    return DistributedJoint(p_y, tuple(mats))


def read_gaussian_dib(path) -> GaussianDIBModel:
    """{"sigma_y": .., "views": [{"H": .., "sigma": ..}, ..]}; the operating point starts at Omega = 0."""
    data = load_json(path)
    sy = _matrix(_field(data, "sigma_y"), "sigma_y")
    views = _field(data, "views")
    if not isinstance(views, list) or not views:
        raise InputError("field 'views' must be a non-empty list")
    hs, sig = [], []
    for k, v in enumerate(views):
        hs.append(np.atleast_2d(_matrix(_field(v, "H", f" in views[{k}]"), f"views[{k}].H")))
        sig.append(np.atleast_2d(_matrix(_field(v, "sigma", f" in views[{k}]"), f"views[{k}].sigma")))
    om = [np.zeros_like(s) for s in sig]
    return GaussianDIBModel(tuple(hs), tuple(sig), sy, tuple(om), tuple(0.0 for _ in hs))


def read_cran(path) -> CranModel:
    data = load_json(path)
    inputs = [_matrix(p, f"inputs[{l}]") for l, p in enumerate(_field(data, "inputs"))]
    mappings = [_matrix(m, f"mappings[{k}]") for k, m in enumerate(_field(data, "mappings"))]
    caps = _matrix(_field(data, "capacities"), "capacities")
    if "joint_channel" in data:
        return CranModel.from_joint_channel(inputs, _matrix(data["joint_channel"], "joint_channel"),
                                            tuple(int(c) for c in _field(data, "y_cards")), mappings, caps)
    chans = [_matrix(c, f"channels[{k}]") for k, c in enumerate(_field(data, "channels"))]
    return CranModel(tuple(inputs), tuple(chans), tuple(mappings), tuple(caps))


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.9g}"


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def parse_csv(text: str, required: Sequence[str]) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in required if c not in (reader.fieldnames or [])]
    if missing:
        raise InputError(f"CSV is missing column(s) {', '.join(missing)}")
    rows = []
    for i, row in enumerate(reader):
        parsed = {}
        for k, v in row.items():
            if k in required:
                try:
                    parsed[k] = float(v)
                except (TypeError, ValueError):
                    raise InputError(f"CSV row {i}, column '{k}': not a number ({v!r})") from None
            else:
                parsed[k] = v
        rows.append(parsed)
    return rows


def read_curve_csv(path, units: str = "bits") -> list[CurvePoint]:
    """Curve points from an ``ib-curve``/``oracle-frontier`` CSV, converted to nats."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    scale = math.log(2.0) if units == "bits" else 1.0
    out = []
    for row in parse_csv(text, ("complexity", "relevance")):
        g = row.get("gamma")
        out.append(CurvePoint(row["complexity"] * scale, row["relevance"] * scale,
                              float(g) if g not in (None, "") else math.nan))
    return out
