"""JSON encoding of complex matrices and operator pairs.

ComplexMatrix: ``{"rows": m, "cols": n, "re": [[...]], "im": [[...]]}``;
a missing ``"im"`` means a zero imaginary part.
"""

import json

import numpy as np

from .errors import ShapeMismatch


def matrix_to_json(m):
    m = np.asarray(m, dtype=np.complex128)
    rows, cols = m.shape
    out = {"rows": int(rows), "cols": int(cols), "re": m.real.tolist()}
    if np.any(m.imag != 0):
        out["im"] = m.imag.tolist()
    return out


def matrix_from_json(d):
    try:
        rows, cols = int(d["rows"]), int(d["cols"])
        re = np.asarray(d["re"], dtype=float).reshape(rows, cols)
        im = d.get("im")
        im = np.zeros((rows, cols)) if im is None else np.asarray(im, float).reshape(rows, cols)
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeMismatch(f"malformed ComplexMatrix JSON: {exc}") from exc
    m = re + 1j * im
    if not np.all(np.isfinite(m)):
        raise ValueError("ComplexMatrix JSON has non-finite entries")
    return m


def pair_to_json(pair):
    return {"S": matrix_to_json(pair.S), "P": matrix_to_json(pair.P)}


def pair_from_json(d, tol=None):
    from .gamma import OperatorPair

    if not isinstance(d, dict) or "S" not in d or "P" not in d:
        raise ShapeMismatch("OperatorPair JSON needs keys 'S' and 'P'")
    return OperatorPair(matrix_from_json(d["S"]), matrix_from_json(d["P"]), tol=tol)


def complex_to_json(z):
    return [float(np.real(z)), float(np.imag(z))]


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.ndarray):
            if np.iscomplexobj(o) and o.ndim == 2:
                return matrix_to_json(o)
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, complex):
            return complex_to_json(o)
        return super().default(o)


def dumps(obj):
    """Deterministic JSON text (sorted keys) for reports."""
    return json.dumps(obj, cls=_Encoder, indent=2, sort_keys=True)
