"""Bit-exact JSON document formats for instances, allocations, and results.

Every rational is serialized as a lowest-terms string "num/den" (plain
"k" for integers) and every reader rejects anything else, so a value
survives any number of read/write cycles unchanged. Writers emit a
fixed field order with two-space indentation and a trailing newline;
parse-then-print is the identity on canonical documents.

Schema names are versioned ("ceub.instance/1" and friends). Readers
raise SchemaError naming the offending field path for any structural
or value problem, including domain validation of the payload, so
callers can treat SchemaError as "the file is bad" wholesale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import CeubError, SchemaError
from .market import Allocation, DemandReport, Instance, make_allocation, validate_instance
from .rationals import format_rational, parse_rational

INSTANCE_SCHEMA = "ceub.instance/1"
ALLOCATION_SCHEMA = "ceub.allocation/1"
EQUILIBRIUM_SCHEMA = "ceub.equilibrium/1"
MAXMIN_SCHEMA = "ceub.maxmin/1"


@dataclass(frozen=True)
class EquilibriumDoc:
    """Everything an equilibrium file carries.

    Prices and budgets are the scaled (final) vectors; alpha and the
    tree maps record how scaling partitioned the market; cycle_free is
    the transformed allocation the prices were derived from; reports
    re-check the allocation the user asked about, so consumers can
    audit the file without recomputing.
    """

    prices: tuple
    budgets: tuple
    alpha: tuple
    tree_of_agent: tuple
    tree_of_item: tuple
    cycle_free: tuple  # rows of Rational shares
    reports: tuple  # per-agent DemandReport
    items_fully_allocated: bool
    budgets_exhausted: bool


@dataclass(frozen=True)
class MaxminDoc:
    lam: object
    shares: tuple  # rows of Rational shares
    prices: tuple | None
    budgets: tuple | None


def _fmt(value) -> str:
    return format_rational(value)


def _parse(node, path: str):
    if not isinstance(node, str):
        raise SchemaError(f"expected a rational string, got {type(node).__name__}", path)
    try:
        return parse_rational(node)
    except ValueError as e:
        raise SchemaError(str(e), path) from None


def _parse_vector(node, path: str, length: int) -> tuple:
    if not isinstance(node, list) or len(node) != length:
        raise SchemaError(f"expected a list of {length} rationals", path)
    return tuple(_parse(v, f"{path}[{k}]") for k, v in enumerate(node))


def _parse_matrix(node, path: str, rows: int, cols: int) -> tuple:
    if not isinstance(node, list) or len(node) != rows:
        raise SchemaError(f"expected {rows} rows", path)
    return tuple(_parse_vector(r, f"{path}[{i}]", cols) for i, r in enumerate(node))


def _decode(text: str, schema: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    if doc.get("schema") != schema:
        raise SchemaError(f"expected {schema}, got {doc.get('schema')!r}", "schema")
    return doc


def _counts(doc: dict) -> tuple:
    for key in ("agents", "items"):
        if not isinstance(doc.get(key), int) or doc[key] < 1:
            raise SchemaError("expected a positive integer", key)
    return doc["agents"], doc["items"]


def _emit(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def dump_instance(inst: Instance) -> str:
    return _emit(
        {
            "schema": INSTANCE_SCHEMA,
            "agents": inst.agent_count,
            "items": inst.item_count,
            "values": [[_fmt(v) for v in row] for row in inst.values],
        }
    )


def load_instance(text: str) -> Instance:
    doc = _decode(text, INSTANCE_SCHEMA)
    n, m = _counts(doc)
    values = _parse_matrix(doc.get("values"), "values", n, m)
    try:
        return validate_instance(values)
    except CeubError as e:
        raise SchemaError(str(e), "values") from None


def dump_allocation(alloc: Allocation) -> str:
    return _emit(
        {
            "schema": ALLOCATION_SCHEMA,
            "agents": alloc.agent_count,
            "items": alloc.item_count,
            "shares": [[_fmt(z) for z in row] for row in alloc.x],
        }
    )


def load_allocation(text: str) -> Allocation:
    doc = _decode(text, ALLOCATION_SCHEMA)
    n, m = _counts(doc)
    shares = _parse_matrix(doc.get("shares"), "shares", n, m)
    try:
        return make_allocation(shares)
    except CeubError as e:
        raise SchemaError(str(e), "shares") from None


def dump_equilibrium(doc: EquilibriumDoc) -> str:
    return _emit(
        {
            "schema": EQUILIBRIUM_SCHEMA,
            "agents": len(doc.budgets),
            "items": len(doc.prices),
            "prices": [_fmt(p) for p in doc.prices],
            "budgets": [_fmt(b) for b in doc.budgets],
            "alpha": [_fmt(a) for a in doc.alpha],
            "trees": {
                "of_agent": list(doc.tree_of_agent),
                "of_item": list(doc.tree_of_item),
            },
            "cycle_free_allocation": [[_fmt(z) for z in row] for row in doc.cycle_free],
            "verification": {
                "agents": [
                    {
                        "agent": r.agent,
                        "spend": _fmt(r.spend),
                        "achieved_utility": _fmt(r.achieved_utility),
                        "optimal_utility": _fmt(r.optimal_utility),
                        "in_demand_set": r.in_demand_set,
                    }
                    for r in doc.reports
                ],
                "items_fully_allocated": doc.items_fully_allocated,
                "budgets_exhausted": doc.budgets_exhausted,
            },
        }
    )


def _parse_tree_map(node, path: str, length: int, tree_count: int) -> tuple:
    if not isinstance(node, list) or len(node) != length:
        raise SchemaError(f"expected a list of {length} tree ids", path)
    for k, t in enumerate(node):
        if not isinstance(t, int) or not 0 <= t < tree_count:
            raise SchemaError(f"tree id out of range 0..{tree_count - 1}", f"{path}[{k}]")
    return tuple(node)


def load_equilibrium(text: str) -> EquilibriumDoc:
    doc = _decode(text, EQUILIBRIUM_SCHEMA)
    n, m = _counts(doc)
    prices = _parse_vector(doc.get("prices"), "prices", m)
    budgets = _parse_vector(doc.get("budgets"), "budgets", n)
    alpha_node = doc.get("alpha")
    if not isinstance(alpha_node, list) or not alpha_node:
        raise SchemaError("expected a nonempty list of rationals", "alpha")
    alpha = tuple(_parse(a, f"alpha[{k}]") for k, a in enumerate(alpha_node))
    trees = doc.get("trees")
    if not isinstance(trees, dict):
        raise SchemaError("expected an object with of_agent/of_item", "trees")
    of_agent = _parse_tree_map(trees.get("of_agent"), "trees.of_agent", n, len(alpha))
    of_item = _parse_tree_map(trees.get("of_item"), "trees.of_item", m, len(alpha))
    cycle_free = _parse_matrix(doc.get("cycle_free_allocation"), "cycle_free_allocation", n, m)
    ver = doc.get("verification")
    if not isinstance(ver, dict) or not isinstance(ver.get("agents"), list):
        raise SchemaError("expected an object with an agents list", "verification")
    if len(ver["agents"]) != n:
        raise SchemaError(f"expected {n} agent reports", "verification.agents")
    reports = []
    for k, row in enumerate(ver["agents"]):
        path = f"verification.agents[{k}]"
        if not isinstance(row, dict) or row.get("agent") != k:
            raise SchemaError(f"expected report for agent {k}", path)
        if not isinstance(row.get("in_demand_set"), bool):
            raise SchemaError("expected a boolean", f"{path}.in_demand_set")
        reports.append(
            DemandReport(
                agent=k,
                achieved_utility=_parse(row.get("achieved_utility"), f"{path}.achieved_utility"),
                optimal_utility=_parse(row.get("optimal_utility"), f"{path}.optimal_utility"),
                spend=_parse(row.get("spend"), f"{path}.spend"),
                in_demand_set=row["in_demand_set"],
            )
        )
    for key in ("items_fully_allocated", "budgets_exhausted"):
        if not isinstance(ver.get(key), bool):
            raise SchemaError("expected a boolean", f"verification.{key}")
    return EquilibriumDoc(
        prices=prices,
        budgets=budgets,
        alpha=alpha,
        tree_of_agent=of_agent,
        tree_of_item=of_item,
        cycle_free=cycle_free,
        reports=tuple(reports),
        items_fully_allocated=ver["items_fully_allocated"],
        budgets_exhausted=ver["budgets_exhausted"],
    )


def dump_maxmin(doc: MaxminDoc) -> str:
    return _emit(
        {
            "schema": MAXMIN_SCHEMA,
            "agents": len(doc.shares),
            "items": len(doc.shares[0]),
            "lam": _fmt(doc.lam),
            "shares": [[_fmt(z) for z in row] for row in doc.shares],
            "prices": None if doc.prices is None else [_fmt(p) for p in doc.prices],
            "budgets": None if doc.budgets is None else [_fmt(b) for b in doc.budgets],
        }
    )


def load_maxmin(text: str) -> MaxminDoc:
    doc = _decode(text, MAXMIN_SCHEMA)
    n, m = _counts(doc)
    lam = _parse(doc.get("lam"), "lam")
    shares = _parse_matrix(doc.get("shares"), "shares", n, m)
    prices = None if doc.get("prices") is None else _parse_vector(doc["prices"], "prices", m)
    budgets = None if doc.get("budgets") is None else _parse_vector(doc["budgets"], "budgets", n)
    if (prices is None) != (budgets is None):
        raise SchemaError("prices and budgets must be present together", "budgets")
    return MaxminDoc(lam=lam, shares=shares, prices=prices, budgets=budgets)
