"""Belief networks: variables, CPTs, permissible disjunctions and node indexing.

Value sets are int bitmasks over a variable's domain (bit ``i`` is the
``i``-th declared value). Variables are addressed by their dense 0-based
position in declaration order.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import (
    BadDistribution,
    CyclicGraph,
    DuplicateName,
    FormatError,
    NonLaminarConcepts,
    UnknownParent,
    UnknownValue,
    UnknownVariable,
)

ROW_SUM_TOL = 1e-9
BUNDLED = ("chain", "dep", "vee", "tracks")


def members(mask: int) -> list[int]:
    """Positions of the set bits of ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_key(mask: int) -> tuple[int, ...]:
    """Sort key placing value sets in domain (declaration) order."""
    return tuple(members(mask))


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    domain: tuple[str, ...]
    parents: tuple[int, ...]
    concepts: tuple[tuple[str, int], ...] = ()

    @property
    def full(self) -> int:
        return (1 << len(self.domain)) - 1

    def value_index(self, value: str) -> int:
        try:
            return self.domain.index(value)
        except ValueError:
            raise UnknownValue(f"{value!r} is not a value of {self.name}") from None

    def mask(self, values: str | Iterable[str]) -> int:
        """Bitmask for a value, a concept name, or an iterable of values."""
        if isinstance(values, str):
            for cname, cmask in self.concepts:
                if cname == values:
                    return cmask
            return 1 << self.value_index(values)
        m = 0
        for val in values:
            m |= 1 << self.value_index(val)
        if not m:
            raise UnknownValue(f"empty value set for {self.name}")
        return m

    def values_of(self, mask: int) -> tuple[str, ...]:
        return tuple(self.domain[i] for i in members(mask))

    def label(self, mask: int) -> str:
        """``val1|val2`` rendering, using a concept name when one matches exactly."""
        for cname, cmask in self.concepts:
            if cmask == mask:
                return cname
        return "|".join(self.values_of(mask))


@dataclass(frozen=True)
class Cpt:
    """Per-value conditional table for one variable.

    ``rows`` is indexed by the mixed-radix code of a complete parent
    assignment (first declared parent most significant).
    """

    owner: int
    radix: tuple[int, ...]
    rows: tuple[tuple[float, ...], ...]

    def row_index(self, parent_values: Sequence[int]) -> int:
        idx = 0
        for r, val in zip(self.radix, parent_values):
            idx = idx * r + val
        return idx

    def row(self, parent_values: Sequence[int]) -> tuple[float, ...]:
        return self.rows[self.row_index(parent_values)]


@dataclass(frozen=True, eq=False)
class Network:
    variables: tuple[Variable, ...]
    cpts: tuple[Cpt, ...]
    index: tuple[int, ...]  # 1-based; a child always precedes its ancestors
    positive: bool
    warnings: tuple[str, ...] = ()
    _by_name: dict = field(default_factory=dict, repr=False)
    _ancestors: tuple[frozenset, ...] = field(default=(), repr=False)
    _permissible: tuple[tuple[int, ...], ...] = field(default=(), repr=False)
    # scratch space for derived tables (joint distribution etc.)
    cache: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.variables)

    def var(self, key: int | str) -> Variable:
        if isinstance(key, str):
            try:
                return self.variables[self._by_name[key]]
            except KeyError:
                raise UnknownVariable(f"no variable named {key!r}") from None
        if not 0 <= key < len(self.variables):
            raise UnknownVariable(f"no variable with id {key}")
        return self.variables[key]

    def id_of(self, name: str) -> int:
        return self.var(name).id

    def parents(self, v: int) -> tuple[int, ...]:
        return self.var(v).parents

    def ancestors(self, v: int) -> frozenset:
        self.var(v)
        return self._ancestors[v]

    def permissible_sets(self, v: int) -> tuple[int, ...]:
        """M_v as bitmasks: singletons, declared concepts and the full domain."""
        self.var(v)
        return self._permissible[v]

    @property
    def order(self) -> list[int]:
        """Variable ids sorted by index (children before ancestors)."""
        return sorted(range(len(self.variables)), key=lambda v: self.index[v])

    @property
    def full(self) -> tuple[int, ...]:
        return tuple(v.full for v in self.variables)

    def to_dict(self) -> dict:
        out = []
        for var, cpt in zip(self.variables, self.cpts):
            pnames = [self.variables[p].name for p in var.parents]
            rows = []
            pdoms = [self.variables[p].domain for p in var.parents]
            for combo in product(*(range(len(d)) for d in pdoms)):
                given = {n: d[i] for n, d, i in zip(pnames, pdoms, combo)}
                rows.append({"given": given, "p": dict(zip(var.domain, cpt.row(combo)))})
            out.append({
                "name": var.name,
                "values": list(var.domain),
                "parents": pnames,
                "concepts": [{"name": n, "values": list(var.values_of(m))} for n, m in var.concepts],
                "cpt": rows,
            })
        return {"variables": out}


# ---------------------------------------------------------------------------
# parsing / validation


_VAR_KEYS = {"name", "values", "parents", "concepts", "cpt"}
_VAR_REQUIRED = {"name", "values", "cpt"}


def _expect(cond: bool, where: str, msg: str) -> None:
    if not cond:
        raise FormatError(f"{where}: {msg}")


def _check_keys(obj: Any, allowed: set, required: set, where: str) -> None:
    _expect(isinstance(obj, dict), where, "expected an object")
    unknown = set(obj) - allowed
    _expect(not unknown, where, f"unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    _expect(not missing, where, f"missing field(s) {sorted(missing)}")


def _is_str_list(x: Any) -> bool:
    return isinstance(x, list) and all(isinstance(s, str) for s in x)


def _laminar(sets: Sequence[int]) -> bool:
    for i, s in enumerate(sets):
        for t in sets[i + 1:]:
            inter = s & t
            if inter and inter != s and inter != t:
                return False
    return True


def _child_first_index(parents: Sequence[Sequence[int]], names: Sequence[str]) -> tuple[int, ...]:
    """Reverse topological numbering, ties broken by declaration order."""
    n = len(parents)
    children = [[] for _ in range(n)]
    for v, ps in enumerate(parents):
        for p in ps:
            children[p].append(v)
    pending = [len(c) for c in children]
    index = [0] * n
    ready = sorted(v for v in range(n) if pending[v] == 0)
    nxt = 1
    heapq.heapify(ready)
    while ready:
        v = heapq.heappop(ready)
        index[v] = nxt
        nxt += 1
        for p in parents[v]:
            pending[p] -= 1
            if pending[p] == 0:
                heapq.heappush(ready, p)
    if nxt <= n:
        stuck = [names[v] for v in range(n) if index[v] == 0]
        raise CyclicGraph(f"parent relation has a cycle through {', '.join(stuck)}")
    return tuple(index)


def validate_network(raw: Mapping[str, Any]) -> Network:
    """Check a parsed network description and build an immutable :class:`Network`."""
    _check_keys(raw, {"variables"}, {"variables"}, "network")
    rvars = raw["variables"]
    _expect(isinstance(rvars, list) and rvars, "network.variables", "expected a non-empty list")

    names: dict[str, int] = {}
    for i, rv in enumerate(rvars):
        where = f"variables[{i}]"
        _check_keys(rv, _VAR_KEYS, _VAR_REQUIRED, where)
        _expect(isinstance(rv["name"], str) and rv["name"], where, "name must be a non-empty string")
        if rv["name"] in names:
            raise DuplicateName(f"{where}: variable name {rv['name']!r} declared twice")
        names[rv["name"]] = i

    parents: list[tuple[int, ...]] = []
    domains: list[tuple[str, ...]] = []
    for i, rv in enumerate(rvars):
        where = f"variables[{i}] ({rv['name']})"
        vals = rv["values"]
        _expect(_is_str_list(vals), where, "values must be a list of strings")
        if len(set(vals)) != len(vals):
            raise DuplicateName(f"{where}: duplicate value label")
        _expect(len(vals) >= 2, where, "domain needs at least two values")
        domains.append(tuple(vals))
        pnames = rv.get("parents", [])
        _expect(_is_str_list(pnames), where, "parents must be a list of strings")
        if len(set(pnames)) != len(pnames):
            raise DuplicateName(f"{where}: parent listed twice")
        ps = []
        for pn in pnames:
            if pn not in names:
                raise UnknownParent(f"{where}: unknown parent {pn!r}")
            ps.append(names[pn])
        parents.append(tuple(ps))

    index = _child_first_index(parents, list(names))

    variables = []
    cpts = []
    warn = []
    positive = True
    for i, rv in enumerate(rvars):
        where = f"variables[{i}] ({rv['name']})"
        dom = domains[i]
        full = (1 << len(dom)) - 1
        concepts = []
        cnames = set()
        for j, rc in enumerate(rv.get("concepts", [])):
            cw = f"{where}.concepts[{j}]"
            _check_keys(rc, {"name", "values"}, {"name", "values"}, cw)
            _expect(isinstance(rc["name"], str) and rc["name"], cw, "name must be a non-empty string")
            _expect(_is_str_list(rc["values"]), cw, "values must be a list of strings")
            if rc["name"] in cnames or rc["name"] in dom:
                raise DuplicateName(f"{cw}: concept name {rc['name']!r} clashes")
            cnames.add(rc["name"])
            m = 0
            for val in rc["values"]:
                _expect(val in dom, cw, f"{val!r} is not a value of {rv['name']}")
                m |= 1 << dom.index(val)
            _expect(m != 0 and m != full, cw, "concept must be a non-empty strict subset of the domain")
            concepts.append((rc["name"], m))
        if not _laminar([m for _, m in concepts]):
            raise NonLaminarConcepts(f"{where}: concept sets overlap without nesting")

        radix = tuple(len(domains[p]) for p in parents[i])
        nrows = math.prod(radix)
        rrows = rv["cpt"]
        _expect(isinstance(rrows, list), where, "cpt must be a list")
        if len(rrows) != nrows:
            raise BadDistribution(f"{where}: expected {nrows} CPT rows, got {len(rrows)}")
        table: list = [None] * nrows
        pnames = [rvars[p]["name"] for p in parents[i]]
        for j, rr in enumerate(rrows):
            rw = f"{where}.cpt[{j}]"
            _check_keys(rr, {"given", "p"}, {"given", "p"}, rw)
            given, probs = rr["given"], rr["p"]
            _expect(isinstance(given, dict) and isinstance(probs, dict), rw, "given and p must be objects")
            if set(given) != set(pnames):
                raise BadDistribution(f"{rw}: 'given' must name exactly the parents {pnames}")
            combo = []
            for p, pn in zip(parents[i], pnames):
                if given[pn] not in domains[p]:
                    raise BadDistribution(f"{rw}: {given[pn]!r} is not a value of {pn}")
                combo.append(domains[p].index(given[pn]))
            code = 0
            for r, c in zip(radix, combo):
                code = code * r + c
            if table[code] is not None:
                raise BadDistribution(f"{rw}: duplicate row for {given}")
            if set(probs) != set(dom):
                raise BadDistribution(f"{rw}: 'p' must give every value of {rv['name']}")
            row = []
            for val in dom:
                x = probs[val]
                if isinstance(x, bool) or not isinstance(x, (int, float)) or not 0.0 <= x <= 1.0:
                    raise BadDistribution(f"{rw}: P({val}) = {x!r} outside [0, 1]")
                row.append(float(x))
            if abs(math.fsum(row) - 1.0) > ROW_SUM_TOL:
                raise BadDistribution(f"{rw}: row sums to {math.fsum(row)!r}")
            if any(x == 0.0 for x in row):
                positive = False
            table[code] = tuple(row)
        variables.append(Variable(i, rv["name"], dom, parents[i], tuple(concepts)))
        cpts.append(Cpt(i, radix, tuple(table)))

    if not positive:
        warn.append("network has zero probabilities; conditionals on zero-probability events are undefined")

    n = len(variables)
    anc: list = [None] * n
    for v in sorted(range(n), key=lambda v: -index[v]):  # ancestors before descendants
        s = set()
        for p in parents[v]:
            s.add(p)
            s |= anc[p]
        anc[v] = frozenset(s)

    permissible = []
    for var in variables:
        fam = {1 << k for k in range(len(var.domain))}
        fam.add(var.full)
        fam.update(m for _, m in var.concepts)
        permissible.append(tuple(sorted(fam, key=lambda m: (-popcount(m), mask_key(m)))))

    return Network(
        variables=tuple(variables),
        cpts=tuple(cpts),
        index=index,
        positive=positive,
        warnings=tuple(warn),
        _by_name=names,
        _ancestors=tuple(anc),
        _permissible=tuple(permissible),
    )


def parse_network(text: str, source: str = "<string>") -> Network:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from None
    return validate_network(raw)


def load_network(path: str | Path) -> Network:
    """Load a network file, or a bundled network by name (``chain``, ``dep``, ``vee``, ``tracks``)."""
    p = Path(path)
    if not p.exists():
        stem = p.name[:-5] if p.name.endswith(".json") else p.name
        if stem in BUNDLED and p.parent == Path("."):
            return parse_network(bundled_text(stem), f"{stem}.json")
    try:
        text = p.read_text()
    except OSError as e:
        raise FormatError(f"{path}: {e.strerror}") from None
    return parse_network(text, str(path))


def bundled_text(name: str) -> str:
    return resources.files("gibmap").joinpath("networks").joinpath(f"{name}.json").read_text()


def bundled(name: str) -> Network:
    return parse_network(bundled_text(name), f"{name}.json")


def strip_concepts(net: Network) -> Network:
    """Same network with every concept removed (M_v = singletons plus D_v)."""
    raw = net.to_dict()
    for rv in raw["variables"]:
        rv["concepts"] = []
    return validate_network(raw)
