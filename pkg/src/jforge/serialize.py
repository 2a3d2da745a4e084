"""JSON structure files (schema ``jforge/1``) with canonical ordering."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Any, Dict, List

from .algebroid import AlgebroidData, AlgebroidForm, Multisection
from .correspond import TripleData
from .jacobi import FirstOrderOp, JacobiStructure
from .polyalg import Chart, Multivector, Polynomial

FORMAT = "jforge/1"
KINDS = ("jacobi", "algebroid", "triple", "multivector", "op")


class SchemaError(ValueError):
    """Input does not match the structure-file schema."""


def _need(obj: Dict, key: str, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing field {key!r}")
    v = obj[key]
    if kind is not None and not isinstance(v, kind):
        raise SchemaError(f"field {key!r} has the wrong type")
    return v


# -- charts and polynomials ---------------------------------------------------


def chart_to_dict(chart: Chart) -> Dict[str, Any]:
    out: Dict[str, Any] = {"names": list(chart.names),
                           "laurent": [n for n, f in zip(chart.names, chart.laurent) if f]}
    if chart.has_split:
        out["base"] = [chart.names[i] for i in chart.base]
        out["fiber"] = [chart.names[i] for i in chart.fiber]
    return out


def chart_from_dict(d: Dict[str, Any]) -> Chart:
    names = _need(d, "names", list)
    try:
        return Chart(names, d.get("laurent", []), d.get("base"), d.get("fiber"))
    except (ValueError, KeyError) as exc:
        raise SchemaError(f"bad chart: {exc}") from exc


def poly_to_list(p: Polynomial) -> List[Dict[str, Any]]:
    return [{"exponents": list(e), "numerator": c.numerator, "denominator": c.denominator}
            for e, c in p.sorted_terms()]


def poly_from_list(chart: Chart, terms) -> Polynomial:
    if not isinstance(terms, list):
        raise SchemaError("polynomial must be a list of terms")
    out = {}
    for t in terms:
        exps = _need(t, "exponents", list)
        num = _need(t, "numerator", int)
        den = t.get("denominator", 1)
        if not isinstance(den, int) or den == 0:
            raise SchemaError("denominator must be a nonzero integer")
        if len(exps) != chart.dim or not all(isinstance(e, int) for e in exps):
            raise SchemaError("exponent vector does not match chart dimension")
        key = tuple(exps)
        out[key] = out.get(key, 0) + Fraction(num, den)
    try:
        return Polynomial(chart, out)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def comps_to_list(x) -> List[Dict[str, Any]]:
    return [{"indices": list(idx), "polynomial": poly_to_list(p)}
            for idx, p in sorted(x.items())]


def comps_from_list(chart: Chart, items, degree: int, n_gen: int) -> Dict:
    if not isinstance(items, list):
        raise SchemaError("components must be a list")
    out = {}
    for it in items:
        idx = _need(it, "indices", list)
        if len(idx) != degree or not all(isinstance(i, int) and 0 <= i < n_gen for i in idx):
            raise SchemaError(f"bad index tuple {idx}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise SchemaError(f"indices must be strictly increasing: {idx}")
        key = tuple(idx)
        p = poly_from_list(chart, _need(it, "polynomial"))
        out[key] = out[key] + p if key in out else p
    return out


# -- structures ---------------------------------------------------------------


def _algebroid_payload(a: AlgebroidData) -> Dict[str, Any]:
    brackets = [{"pair": [al, be], "target": g, "polynomial": poly_to_list(p)}
                for al, be, g, p in sorted(a.structure_items(), key=lambda t: t[:3])]
    anchor = [{"section": al, "variable": l, "polynomial": poly_to_list(p)}
              for al, l, p in sorted(a.anchor_items(), key=lambda t: t[:2])]
    return {"rank": a.rank, "unit": a.unit, "brackets": brackets, "anchor": anchor}


def _algebroid_from_payload(chart: Chart, d: Dict[str, Any]) -> AlgebroidData:
    rank = _need(d, "rank", int)
    brackets: Dict = {}
    for it in d.get("brackets", []):
        al, be = _need(it, "pair", list)
        g = _need(it, "target", int)
        brackets.setdefault((al, be), {})[g] = poly_from_list(chart, _need(it, "polynomial"))
    anchor = {}
    for it in d.get("anchor", []):
        anchor[(_need(it, "section", int), _need(it, "variable", int))] = \
            poly_from_list(chart, _need(it, "polynomial"))
    try:
        return AlgebroidData(chart, rank, brackets, anchor, unit=bool(d.get("unit", False)))
    except (ValueError, KeyError, IndexError) as exc:
        raise SchemaError(f"bad algebroid data: {exc}") from exc


def to_document(obj, **extra) -> Dict[str, Any]:
    """Wrap a structure in a versioned document."""
    if isinstance(obj, JacobiStructure):
        kind, chart = "jacobi", obj.chart
        payload = {"lambda": comps_to_list(obj.lam), "e": comps_to_list(obj.e)}
    elif isinstance(obj, AlgebroidData):
        kind, chart = "algebroid", obj.chart
        payload = _algebroid_payload(obj)
    elif isinstance(obj, TripleData):
        kind, chart = "triple", obj.lie_star.chart
        payload = {"lie_star": _algebroid_payload(obj.lie_star),
                   "x0": comps_to_list(obj.x0), "p0": comps_to_list(obj.p0)}
    elif isinstance(obj, Multisection):
        kind, chart = "multivector", obj.chart
        payload = {"degree": obj.degree, "rank": obj.rank, "components": comps_to_list(obj)}
    elif isinstance(obj, Multivector):
        kind, chart = "multivector", obj.chart
        payload = {"degree": obj.degree, "components": comps_to_list(obj)}
    elif isinstance(obj, FirstOrderOp):
        kind, chart = "op", obj.chart
        payload = {"degree": obj.degree, "p": comps_to_list(obj.p),
                   "q": comps_to_list(obj.q) if obj.q is not None else None}
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    payload.update(extra)
    return {"format": FORMAT, "kind": kind, "chart": chart_to_dict(chart), "payload": payload}


def from_document(doc: Dict[str, Any]):
    if not isinstance(doc, dict):
        raise SchemaError("document must be an object")
    if doc.get("format") != FORMAT:
        raise SchemaError(f"unsupported format {doc.get('format')!r}")
    kind = _need(doc, "kind", str)
    if kind not in KINDS:
        raise SchemaError(f"unknown kind {kind!r}")
    chart = chart_from_dict(_need(doc, "chart", dict))
    d = _need(doc, "payload", dict)
    n = chart.dim
    if kind == "jacobi":
        lam = Multivector(chart, 2, comps_from_list(chart, _need(d, "lambda"), 2, n))
        e = Multivector(chart, 1, comps_from_list(chart, d.get("e", []), 1, n))
        return JacobiStructure(lam, e)
    if kind == "algebroid":
        return _algebroid_from_payload(chart, d)
    if kind == "triple":
        lie = _algebroid_from_payload(chart, _need(d, "lie_star", dict))
        r = lie.rank
        x0 = AlgebroidForm(chart, r, 1, comps_from_list(chart, d.get("x0", []), 1, r))
        p0 = AlgebroidForm(chart, r, 2, comps_from_list(chart, d.get("p0", []), 2, r))
        return TripleData(lie, x0, p0)
    if kind == "multivector":
        k = _need(d, "degree", int)
        if "rank" in d:
            r = _need(d, "rank", int)
            return Multisection(chart, r, k, comps_from_list(chart, _need(d, "components"), k, r))
        return Multivector(chart, k, comps_from_list(chart, _need(d, "components"), k, n))
    k = _need(d, "degree", int)
    p = Multivector(chart, k, comps_from_list(chart, _need(d, "p"), k, n))
    if k == 0:
        return FirstOrderOp(p)
    q = Multivector(chart, k - 1, comps_from_list(chart, d.get("q") or [], k - 1, n))
    return FirstOrderOp(p, q)


def dumps(doc: Dict[str, Any]) -> str:
    """Canonical JSON text (sorted keys, fixed indentation, trailing newline)."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> Dict[str, Any]:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc


def digest(texts: List[str]) -> str:
    h = hashlib.sha256()
    for t in texts:
        h.update(dumps(loads(t)).encode())
    return h.hexdigest()
