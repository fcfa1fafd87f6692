"""
JSON and DOT codecs.

Orders:        {"n": 4, "relations": [[1, 2], [3, 4]]}   generator edges, closed on load
Total orders:  {"n": 4, "seq": [2, 1, 3, 4]}
Certificates:  {"n": 4, "ground": [order, ...], "witnesses": {"<mask>": order, ...}}
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict

from .errors import CyclicInput, InvariantViolation, OrderVCError, OutOfRange, ParseError, SelfLoop
from .order_core import Order, TotalOrder, from_edge_list, transitive_closure
from .shattering import ShatterCertificate

logger = logging.getLogger(__name__)


def _loads(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _int_field(data, key, what):
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{what}: '{key}' must be an integer")
    return value


def order_to_dict(order: Order) -> Dict[str, Any]:
    if isinstance(order, TotalOrder):
        return {"n": order.n, "seq": list(order.seq)}
    return {"n": order.n, "relations": [list(p) for p in order.pairs]}


def order_from_dict(data) -> Order:
    if not isinstance(data, dict):
        raise ParseError("order: expected a JSON object")
    n = _int_field(data, "n", "order")
    if "seq" in data:
        seq = data["seq"]
        if not isinstance(seq, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in seq):
            raise ParseError("order: 'seq' must be a list of integers")
        if len(seq) != n:
            raise InvariantViolation(f"order: 'seq' has {len(seq)} entries, n = {n}")
        return TotalOrder(tuple(seq))
    relations = data.get("relations")
    if not isinstance(relations, list):
        raise ParseError("order: expected 'relations' or 'seq'")
    pairs = []
    for item in relations:
        if not isinstance(item, list) or len(item) != 2:
            raise ParseError(f"order: relation {item!r} is not a pair")
        pairs.append(tuple(item))
    try:
        return transitive_closure(from_edge_list(n, pairs))
    except (CyclicInput, SelfLoop, OutOfRange) as exc:
        raise InvariantViolation(f"order: {exc}") from exc


def dumps_order(order: Order) -> str:
    return json.dumps(order_to_dict(order))


def loads_order(text) -> Order:
    return order_from_dict(_loads(text, "order"))


def save_order(path, order: Order):
    Path(path).write_text(dumps_order(order) + "\n", encoding="utf-8")


def load_order(path) -> Order:
    return loads_order(_read(path))


def certificate_to_dict(cert: ShatterCertificate) -> Dict[str, Any]:
    return {
        "n": cert.n,
        "ground": [order_to_dict(g) for g in cert.ground],
        "witnesses": {str(mask): order_to_dict(w) for mask, w in sorted(cert.witnesses.items())},
    }


def certificate_from_dict(data) -> ShatterCertificate:
    if not isinstance(data, dict):
        raise ParseError("certificate: expected a JSON object")
    n = _int_field(data, "n", "certificate")
    ground = data.get("ground")
    witnesses = data.get("witnesses")
    if not isinstance(ground, list) or not isinstance(witnesses, dict):
        raise ParseError("certificate: expected 'ground' list and 'witnesses' object")
    ground = tuple(order_from_dict(g) for g in ground)
    parsed = {}
    for key, value in witnesses.items():
        try:
            mask = int(key)
        except ValueError as exc:
            raise ParseError(f"certificate: witness key {key!r} is not an integer mask") from exc
        parsed[mask] = order_from_dict(value)
    for order in (*ground, *parsed.values()):
        if order.n != n:
            raise InvariantViolation(f"certificate: {order} is on [{order.n}], certificate on [{n}]")
    if not parsed:
        raise InvariantViolation("certificate: no witnesses")
    return ShatterCertificate(ground, parsed)


def dumps_certificate(cert: ShatterCertificate) -> str:
    return json.dumps(certificate_to_dict(cert))


def loads_certificate(text) -> ShatterCertificate:
    return certificate_from_dict(_loads(text, "certificate"))


def save_certificate(path, cert: ShatterCertificate):
    Path(path).write_text(json.dumps(certificate_to_dict(cert), indent=2) + "\n", encoding="utf-8")
    logger.info("wrote certificate with %d witnesses to %s", len(cert.witnesses), path)


def load_certificate(path) -> ShatterCertificate:
    return loads_certificate(_read(path))


def load_order_list(path):
    """A JSON array of orders, or JSON-lines with one order per line."""
    text = _read(path)
    stripped = text.strip()
    if stripped.startswith("["):
        data = _loads(stripped, "order list")
        if not isinstance(data, list):
            raise ParseError("order list: expected a JSON array")
        return [order_from_dict(item) for item in data]
    return [loads_order(line) for line in stripped.splitlines() if line.strip()]


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


# -- constructions ----------------------------------------------------------

def construction_to_dict(fam, ground=None) -> Dict[str, Any]:
    """``ground`` defaults to the closed parts (the thm1 family passes its orders)."""
    if ground is None:
        ground = fam.closed_parts
    return {
        "kind": fam.kind.value,
        "n": fam.n,
        "k": fam.k,
        "vertex_map": dict(fam.vertex_map),
        "parts": [
            {"label": label, "role": role.kind, "edges": [list(e) for e in part.sorted_edges()]}
            for label, role, part in zip(fam.labels, fam.roles, fam.parts)
        ],
        "ground": [order_to_dict(g) for g in ground],
    }


def construction_to_dot(fam) -> str:
    lines = [f"digraph {fam.kind.value}_n{fam.n} {{", "  rankdir=LR;"]
    for v in range(1, fam.n + 1):
        lines.append(f'  {v} [label="{fam.vertex_name(v)}"];')
    for label, role, part in zip(fam.labels, fam.roles, fam.parts):
        lines.append(f"  // {label} ({role.kind})")
        for u, v in part.sorted_edges():
            lines.append(f'  {u} -> {v} [comment="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_text(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OrderVCError(f"cannot write {path}: {exc.strerror}") from exc
