"""Finite groupoids: data type, JSON format, validation and generators.

Convention: p.q is defined when s(p) = t(q); a pair-groupoid arrow (i, j) has
target i and source j, so (i, j)(j, k) = (i, k).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .report import Check, VerificationReport


class GroupoidParseError(ValueError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    elements: tuple[str, ...]
    units: tuple[str, ...]
    source: dict
    target: dict
    mult: dict  # (p, q) -> pq for composable pairs
    inverse: dict

    @cached_property
    def index(self) -> dict[str, int]:
        return {g: i for i, g in enumerate(self.elements)}

    @cached_property
    def unit_index(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.units)}

    def __len__(self):
        return len(self.elements)

    def composable(self, p: str, q: str) -> bool:
        return self.source[p] == self.target[q]

    @cached_property
    def composable_pairs(self) -> list[tuple[str, str]]:
        return [(p, q) for p in self.elements for q in self.elements if self.composable(p, q)]

    def fiber_source(self, u: str) -> list[str]:
        return [g for g in self.elements if self.source[g] == u]

    def fiber_target(self, u: str) -> list[str]:
        return [g for g in self.elements if self.target[g] == u]

    @cached_property
    def components(self) -> list[list[str]]:
        """Units grouped into connected components, in order of first appearance."""
        parent = {u: u for u in self.units}

        def find(u):
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            return u

        for g in self.elements:
            a, b = find(self.source[g]), find(self.target[g])
            if a != b:
                parent[max(a, b, key=self.unit_index.get)] = min(a, b, key=self.unit_index.get)
        comps: dict[str, list[str]] = {}
        for u in self.units:
            comps.setdefault(find(u), []).append(u)
        return list(comps.values())

    def arrows(self, u: str, v: str) -> list[str]:
        """Arrows with source u and target v."""
        return [g for g in self.elements if self.source[g] == u and self.target[g] == v]

    def to_dict(self) -> dict:
        return {
            "elements": list(self.elements),
            "units": list(self.units),
            "source": {g: self.source[g] for g in self.elements},
            "target": {g: self.target[g] for g in self.elements},
            "mult": [[p, q, self.mult[(p, q)]] for p, q in self.composable_pairs if (p, q) in self.mult],
            "inverse": {g: self.inverse[g] for g in self.elements},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


# --------------------------------------------------------------------------
# parsing


def _line_of(text: str, needle: str) -> int | None:
    for n, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return n
    return None


def parse_groupoid(text: str) -> FiniteGroupoid:
    """Parse the groupoid JSON format, with line/field diagnostics."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GroupoidParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return groupoid_from_dict(data, text)


def load_groupoid(path) -> FiniteGroupoid:
    with open(path, encoding="utf-8") as fh:
        return parse_groupoid(fh.read())


def groupoid_from_dict(data, text: str = "") -> FiniteGroupoid:
    def fail(msg, field, needle=None):
        raise GroupoidParseError(msg, field, _line_of(text, needle or f'"{field}"') if text else None)

    if not isinstance(data, dict):
        raise GroupoidParseError("top level must be a JSON object", line=1 if text else None)
    for key in ("elements", "units", "source", "target", "mult", "inverse"):
        if key not in data:
            raise GroupoidParseError(f"missing required field '{key}'", key)
    extra = set(data) - {"elements", "units", "source", "target", "mult", "inverse"}
    if extra:
        fail(f"unknown field(s) {sorted(extra)}", sorted(extra)[0])

    elements = data["elements"]
    if not isinstance(elements, list) or not elements or not all(isinstance(g, str) for g in elements):
        fail("must be a non-empty list of string ids", "elements")
    seen = set()
    for g in elements:
        if g in seen:
            fail(f"duplicate element '{g}'", "elements")
        seen.add(g)
    units = data["units"]
    if not isinstance(units, list) or not units or not all(isinstance(u, str) for u in units):
        fail("must be a non-empty list of string ids", "units")
    if len(set(units)) != len(units):
        fail("duplicate unit", "units")
    for u in units:
        if u not in seen:
            fail(f"unit '{u}' is not an element", "units")

    maps = {}
    for key in ("source", "target", "inverse"):
        m = data[key]
        if not isinstance(m, dict):
            fail("must be an object mapping element ids", key)
        for g in elements:
            if g not in m:
                fail(f"no entry for element '{g}'", key)
        for g, v in m.items():
            if g not in seen:
                fail(f"entry for unknown element '{g}'", f"{key}.{g}", f'"{g}"')
            if not isinstance(v, str):
                fail(f"value for '{g}' must be a string id", f"{key}.{g}")
            allowed = seen if key == "inverse" else set(units)
            if v not in allowed:
                kind = "element" if key == "inverse" else "unit"
                fail(f"value '{v}' for '{g}' is not a {kind}", f"{key}.{g}")
        maps[key] = dict(m)

    src, tgt = maps["source"], maps["target"]
    mult = {}
    raw = data["mult"]
    if not isinstance(raw, list):
        fail("must be a list of [p, q, pq] triples", "mult")
    for i, entry in enumerate(raw):
        field = f"mult[{i}]"
        if not (isinstance(entry, list) and len(entry) == 3 and all(isinstance(x, str) for x in entry)):
            fail("entry must be a [p, q, pq] triple of ids", field, json.dumps(entry) if entry else None)
        p, q, r = entry
        for x in entry:
            if x not in seen:
                fail(f"unknown element '{x}'", field, f'"{x}"')
        if src[p] != tgt[q]:
            fail(f"pair ('{p}', '{q}') is not composable: s({p}) = {src[p]} but t({q}) = {tgt[q]}", field,
                 f'"{p}"')
        if (p, q) in mult:
            fail(f"duplicate product for ('{p}', '{q}')", field, f'"{p}"')
        mult[(p, q)] = r
    for p in elements:
        for q in elements:
            if src[p] == tgt[q] and (p, q) not in mult:
                fail(f"missing product for composable pair ('{p}', '{q}')", "mult")
    return FiniteGroupoid(tuple(elements), tuple(units), src, tgt, mult, maps["inverse"])


# --------------------------------------------------------------------------
# validation


def validate_groupoid(G: FiniteGroupoid) -> VerificationReport:
    """Exhaustive check of the groupoid axioms, one check per axiom with the first witness."""
    s, t, m, inv = G.source, G.target, G.mult, G.inverse
    problems: dict[str, list[str]] = {k: [] for k in
                                      ("units", "closure", "unit_laws", "associativity", "inverse")}

    for u in G.units:
        if s[u] != u or t[u] != u:
            problems["units"].append(f"unit {u}: s={s[u]}, t={t[u]}")
    for (p, q), r in m.items():
        if r not in G.index:
            problems["closure"].append(f"{p}*{q} = {r} is not an element")
        elif s[r] != s[q] or t[r] != t[p]:
            problems["closure"].append(f"{p}*{q} = {r}: s/t not ({s[q]}, {t[p]})")
    for p in G.elements:
        if m.get((t[p], p)) != p or m.get((p, s[p])) != p:
            problems["unit_laws"].append(f"{p}: t(p)p = {m.get((t[p], p))}, p s(p) = {m.get((p, s[p]))}")
    by_target: dict[str, list[str]] = {}
    for g in G.elements:
        by_target.setdefault(t[g], []).append(g)
    for (p, q), pq in m.items():
        for r in by_target.get(s[q], []):
            left = m.get((pq, r))
            qr = m.get((q, r))
            right = m.get((p, qr)) if qr is not None else None
            if left is None or left != right:
                problems["associativity"].append(f"({p}, {q}, {r}): (pq)r = {left}, p(qr) = {right}")
    for p in G.elements:
        pi = inv[p]
        if s[pi] != t[p] or t[pi] != s[p] or m.get((pi, p)) != s[p] or m.get((p, pi)) != t[p]:
            problems["inverse"].append(f"{p}: inverse {pi}, p^-1 p = {m.get((pi, p))}, p p^-1 = {m.get((p, pi))}")

    anchors = {
        "units": "s(u) = t(u) = u for units",
        "closure": "s(pq) = s(q), t(pq) = t(p)",
        "unit_laws": "t(p)p = p = p s(p)",
        "associativity": "(pq)r = p(qr) on composable triples",
        "inverse": "p^-1 p = s(p), p p^-1 = t(p), s(p^-1) = t(p)",
    }
    checks = []
    for key, bad in problems.items():
        detail = ""
        if bad:
            detail = f"{len(bad)} violation(s); witness {bad[0]}"
        checks.append(Check(f"groupoid.{key}", anchors[key], float(len(bad)), 0.5, detail))
    return VerificationReport(checks)


class InvalidGroupoid(ValueError):
    def __init__(self, report: VerificationReport):
        self.report = report
        super().__init__("; ".join(f"{c.id}: {c.detail}" for c in report.failed()))


def require_valid(G: FiniteGroupoid) -> None:
    rep = validate_groupoid(G)
    if not rep.verdict:
        raise InvalidGroupoid(rep)


# --------------------------------------------------------------------------
# builders


def _from_rule(ids: Sequence[Hashable], name: Callable, src: Callable, tgt: Callable,
               prod: Callable, inverse: Callable, units: Sequence[Hashable]) -> FiniteGroupoid:
    elements = tuple(name(x) for x in ids)
    s = {name(x): name(src(x)) for x in ids}
    t = {name(x): name(tgt(x)) for x in ids}
    m = {}
    for x in ids:
        for y in ids:
            if src(x) == tgt(y):
                m[(name(x), name(y))] = name(prod(x, y))
    inv = {name(x): name(inverse(x)) for x in ids}
    return FiniteGroupoid(elements, tuple(name(u) for u in units), s, t, m, inv)


def pair_groupoid(n: int, prefix: str = "") -> FiniteGroupoid:
    ids = [(i, j) for i in range(n) for j in range(n)]
    return _from_rule(ids, lambda x: f"{prefix}{x[0] + 1}{x[1] + 1}" if n < 10 else f"{prefix}{x[0] + 1}_{x[1] + 1}",
                      lambda x: (x[1], x[1]), lambda x: (x[0], x[0]),
                      lambda x, y: (x[0], y[1]), lambda x: (x[1], x[0]),
                      [(i, i) for i in range(n)])


def product_groupoid(n: int, m: int, prefix: str = "") -> FiniteGroupoid:
    """Pair groupoid on n objects times the cyclic group Z_m (one connected component)."""
    ids = [(i, j, h) for i in range(n) for j in range(n) for h in range(m)]
    return _from_rule(ids, lambda x: f"{prefix}{x[0]}_{x[1]}_{x[2]}",
                      lambda x: (x[1], x[1], 0), lambda x: (x[0], x[0], 0),
                      lambda x, y: (x[0], y[1], (x[2] + y[2]) % m), lambda x: (x[1], x[0], (-x[2]) % m),
                      [(i, i, 0) for i in range(n)])


def cyclic_group(m: int, prefix: str = "z") -> FiniteGroupoid:
    ids = list(range(m))
    return _from_rule(ids, lambda x: f"{prefix}{x}", lambda x: 0, lambda x: 0,
                      lambda x, y: (x + y) % m, lambda x: (-x) % m, [0])


def symmetric_group(n: int = 3, prefix: str = "s") -> FiniteGroupoid:
    """S_n as a one-unit groupoid (nonabelian for n >= 3)."""
    perms = list(itertools.permutations(range(n)))
    ident = tuple(range(n))

    def name(p):
        return prefix + "".join(str(i) for i in p)

    return _from_rule(perms, name, lambda x: ident, lambda x: ident,
                      lambda x, y: tuple(x[y[i]] for i in range(n)),
                      lambda x: tuple(np.argsort(x).tolist()), [ident])


def disjoint_union(*groupoids: FiniteGroupoid, prefixes: Sequence[str] | None = None) -> FiniteGroupoid:
    if prefixes is None:
        prefixes = [f"g{i}." for i in range(len(groupoids))]
    elements, units, s, t, m, inv = [], [], {}, {}, {}, {}
    for G, pre in zip(groupoids, prefixes):
        ren = {g: pre + g for g in G.elements}
        elements += [ren[g] for g in G.elements]
        units += [ren[u] for u in G.units]
        for g in G.elements:
            s[ren[g]] = ren[G.source[g]]
            t[ren[g]] = ren[G.target[g]]
            inv[ren[g]] = ren[G.inverse[g]]
        for (p, q), r in G.mult.items():
            m[(ren[p], ren[q])] = ren[r]
    if len(set(elements)) != len(elements):
        raise ValueError("prefixes do not separate the element ids")
    return FiniteGroupoid(tuple(elements), tuple(units), s, t, m, inv)


def random_groupoid(n_components: int, max_objects: int, abelian_isotropy_orders: Iterable[int],
                    seed: int = 0, max_size: int | None = None) -> FiniteGroupoid:
    """Disjoint union of pair groupoids times cyclic groups, deterministic in ``seed``.

    Component c with k objects and isotropy Z_m has arrows ``c{c}_{i}_{j}_{h}``.
    With ``max_size`` the components are shrunk until the total order fits.
    """
    orders = sorted(set(int(o) for o in abelian_isotropy_orders))
    if n_components < 1 or max_objects < 1 or not orders or orders[0] < 1:
        raise ValueError("bounds must be positive")
    rng = np.random.default_rng(seed)
    shapes = [(int(rng.integers(1, max_objects + 1)), int(rng.choice(orders))) for _ in range(n_components)]
    if max_size is not None:
        while sum(k * k * m for k, m in shapes) > max_size:
            i = int(np.argmax([k * k * m for k, m in shapes]))
            k, m = shapes[i]
            if k == 1 and m == orders[0]:
                raise ValueError("max_size too small for the requested number of components")
            shapes[i] = (k - 1, m) if k > 1 else (k, orders[0])
    parts = [product_groupoid(k, m) for k, m in shapes]
    return disjoint_union(*parts, prefixes=[f"c{c}_" for c in range(n_components)])


def groupoid_label(G: FiniteGroupoid) -> str:
    comps = G.components
    return f"|G|={len(G)}, {len(G.units)} units, {len(comps)} component(s)"

