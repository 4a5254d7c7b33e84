"""Problem suite: vertex cover, Horn-SAT, and synthetic cost-shape families.

Every problem comes with a canonical instance encoding (the raw bytes the
parametrisation and checker read), a stepped enumerator, and a declared
capped-incremental bound the enumerator is built to honour.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from penum.anothersol import EnumeratorBoundDecl
from penum.core import Instance, ProblemDescriptor, SteppedEnumerator, ipow, poly
from penum.errors import NotHorn, ParseError
from penum.regularize import formula

SOLUTION_WIDTH = 16


# -- vertex cover ------------------------------------------------------------


def vertex_name(index: int) -> str:
    """0 -> 'a', 25 -> 'z', 26 -> 'aa', ... (bijective base 26)."""
    name = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        name = chr(ord("a") + rem) + name
    return name


@dataclass(frozen=True)
class GraphInstance:
    vertices: int
    edges: tuple[tuple[int, int], ...]
    k: int

    def __post_init__(self):
        seen = set()
        normalised = []
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise ValueError(f"edge ({u}, {v}) references a missing vertex")
            e = (min(u, v), max(u, v))
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
            normalised.append(e)
        if not 0 <= self.k <= self.vertices:
            raise ValueError(f"k={self.k} outside [0, {self.vertices}]")
        object.__setattr__(self, "edges", tuple(normalised))

    def encode(self) -> bytes:
        names = " ".join(vertex_name(v) for v in range(self.vertices))
        lines = [f"vc {self.vertices} {len(self.edges)} {self.k}", names]
        lines += [f"{vertex_name(u)} {vertex_name(v)}" for u, v in self.edges]
        return ("\n".join(lines) + "\n").encode()


@lru_cache(maxsize=4096)
def decode_graph(raw: bytes) -> GraphInstance:
    lines = raw.decode().split("\n")
    tag, v, e, k = lines[0].split()
    if tag != "vc":
        raise ValueError("not a vertex-cover instance")
    index = {name: i for i, name in enumerate(lines[1].split())}
    edges = tuple(tuple(index[t] for t in line.split()) for line in lines[2 : 2 + int(e)])
    return GraphInstance(int(v), edges, int(k))


def cover_encoding(cover: Iterable[int]) -> bytes:
    return ",".join(vertex_name(v) for v in sorted(cover)).encode()


def _vc_check(raw: bytes, y: bytes) -> bool:
    g = decode_graph(raw)
    names = y.decode("ascii", "replace").split(",") if y else []
    index = {vertex_name(v): v for v in range(g.vertices)}
    try:
        cover = [index[name] for name in names]
    except KeyError:
        return False
    if cover != sorted(set(cover)) or len(cover) > g.k:
        return False
    chosen = set(cover)
    return all(u in chosen or v in chosen for u, v in g.edges)


def _vc_candidates(raw: bytes) -> Iterator[bytes]:
    g = decode_graph(raw)
    for size in range(g.vertices + 1):
        for subset in itertools.combinations(range(g.vertices), size):
            yield cover_encoding(subset)


VERTEX_COVER = ProblemDescriptor(
    name="vertex-cover",
    check=_vc_check,
    length_bound=(0, 1),
    parametrisation=lambda raw: decode_graph(raw).k,
    alphabet=b"abcdefghijklmnopqrstuvwxyz,",
    candidates=_vc_candidates,
)


def graph_instance(g: GraphInstance) -> Instance:
    return Instance.of(VERTEX_COVER, g.encode())


def _vertex_cover_process(g: GraphInstance):
    edges = g.edges
    emitted: set[bytes] = set()

    def expand(cover: frozenset[int]):
        yield 1
        uncovered = next(((u, v) for u, v in edges if u not in cover and v not in cover), None)
        if uncovered is None:
            rest = [v for v in range(g.vertices) if v not in cover]
            for extra in range(g.k - len(cover) + 1):
                for add in itertools.combinations(rest, extra):
                    yield 1
                    y = cover_encoding(cover.union(add))
                    if y not in emitted:
                        emitted.add(y)
                        yield y
            return
        if len(cover) == g.k:
            return
        u, v = uncovered
        yield from expand(cover | {u})
        yield from expand(cover | {v})

    yield from expand(frozenset())


def vertex_cover_enum(g: GraphInstance) -> SteppedEnumerator:
    """Bounded search tree over covers of size <= k.

    Branches on the first uncovered edge; every leaf cover is extended by
    all supersets that still fit in k, and an emitted-set filter drops
    repeats.  One tick per search node and per superset candidate.
    """
    return SteppedEnumerator(_vertex_cover_process(g), name="vertex-cover")


def vertex_cover_bound() -> EnumeratorBoundDecl:
    # nodes <= 2**(k+1) - 1, leaves <= 2**k, and before the i-th output each
    # leaf has looked at <= i candidates: 2**(k+1) + 2**k * i <= 2**(k+2) * i.
    return EnumeratorBoundDecl(formula("2**(k+2)"), (1,), 1)


# -- Horn-SAT ----------------------------------------------------------------


@dataclass(frozen=True)
class HornFormula:
    variable_count: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for idx, clause in enumerate(self.clauses):
            for lit in clause:
                if lit == 0 or abs(lit) > self.variable_count:
                    raise ValueError(f"clause {idx} references undeclared variable {abs(lit)}")
            if sum(1 for lit in clause if lit > 0) > 1:
                raise NotHorn(idx, clause)

    def encode(self) -> bytes:
        lines = [f"p cnf {self.variable_count} {len(self.clauses)}"]
        lines.append("c vars " + " ".join(f"x{v}" for v in range(1, self.variable_count + 1)))
        lines += [" ".join(map(str, (*c, 0))) for c in self.clauses]
        return ("\n".join(lines) + "\n").encode()

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.variable_count} {len(self.clauses)}"]
        lines += [" ".join(map(str, (*c, 0))) for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(data: bytes | str) -> HornFormula:
    """Parse DIMACS CNF and validate the Horn condition."""
    text = data.decode() if isinstance(data, bytes) else data
    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c") or stripped.startswith("%"):
            continue
        if stripped.startswith("p"):
            parts = stripped.split()
            if header is not None:
                raise ParseError("second problem line", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed problem line {stripped!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError("non-integer counts in problem line", lineno) from None
            continue
        if header is None:
            raise ParseError("clause before 'p cnf' header", lineno)
        column = line.find(stripped) + 1
        for token in stripped.split():
            try:
                lit = int(token)
            except ValueError:
                raise ParseError(f"bad literal {token!r}", lineno, column) from None
            if abs(lit) > header[0]:
                raise ParseError(f"literal {lit} exceeds declared {header[0]} variables", lineno, column)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
            column += len(token) + 1
    if header is None:
        raise ParseError("missing 'p cnf' header", 1)
    if current:
        raise ParseError("last clause is not terminated by 0", len(text.splitlines()))
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}", 1)
    return HornFormula(header[0], tuple(clauses))


@lru_cache(maxsize=4096)
def _horn_masks(raw: bytes) -> tuple[int, tuple[tuple[int, int], ...]]:
    f = parse_dimacs(raw)
    masks = []
    for clause in f.clauses:
        pos = neg = 0
        for lit in clause:
            bit = 1 << (abs(lit) - 1)
            if lit > 0:
                pos |= bit
            else:
                neg |= bit
        masks.append((pos, neg))
    return f.variable_count, tuple(masks)


def _horn_check(raw: bytes, y: bytes) -> bool:
    nvars, masks = _horn_masks(raw)
    if len(y) != nvars or y.strip(b"01"):
        return False
    value = int(y[::-1], 2) if y else 0
    full = (1 << nvars) - 1
    inverted = full ^ value
    return all((value & pos) or (inverted & neg) for pos, neg in masks)


def _horn_candidates(raw: bytes) -> Iterator[bytes]:
    nvars, _ = _horn_masks(raw)
    for bits in itertools.product(b"01", repeat=nvars):
        yield bytes(bits)


HORN_SAT = ProblemDescriptor(
    name="horn-sat",
    check=_horn_check,
    length_bound=(0, 1),
    parametrisation=lambda raw: 1,
    alphabet=b"01",
    candidates=_horn_candidates,
)


def horn_instance(f: HornFormula) -> Instance:
    return Instance.of(HORN_SAT, f.encode())


def _propagate(clauses, assign: dict[int, bool]):
    """Unit propagation; yields ticks, returns the extended assignment or None."""
    assign = dict(assign)
    changed = True
    while changed:
        changed = False
        yield max(1, len(clauses))
        for clause in clauses:
            open_lits = []
            satisfied = False
            for lit in clause:
                val = assign.get(abs(lit))
                if val is None:
                    open_lits.append(lit)
                elif val == (lit > 0):
                    satisfied = True
                    break
            if satisfied:
                continue
            if not open_lits:
                return None
            if len(open_lits) == 1:
                lit = open_lits[0]
                assign[abs(lit)] = lit > 0
                changed = True
    return assign


def _horn_process(f: HornFormula):
    nvars = f.variable_count

    def descend(assign):
        var = next((v for v in range(1, nvars + 1) if v not in assign), None)
        if var is None:
            yield b"".join(b"1" if assign[v] else b"0" for v in range(1, nvars + 1))
            return
        for value in (False, True):
            extended = yield from _propagate(f.clauses, {**assign, var: value})
            if extended is not None:
                yield from descend(extended)

    root = yield from _propagate(f.clauses, {})
    if root is not None:
        yield from descend(root)


def horn_sat_enum(f: HornFormula) -> SteppedEnumerator:
    """Flashlight search: branch on the lowest unassigned variable (0 first).

    Unit propagation is a complete satisfiability test for Horn formulas, so
    every branch that survives propagation reaches a model and the delay
    stays polynomial.  A propagation pass costs one tick per clause.
    """
    return SteppedEnumerator(_horn_process(f), name="horn-sat")


def horn_sat_bound() -> EnumeratorBoundDecl:
    # the canonical encoding has >= 3 bytes per variable and >= 2 per clause;
    # propagations before output i <= 3*(V+1)*i, each <= (V+1)*max(C,1) ticks.
    return EnumeratorBoundDecl(1, (4, 12, 12, 4), 1)


# -- synthetic families --------------------------------------------------------


def synthetic_solution(i: int) -> bytes:
    return f"sol_{i:012d}".encode()


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator realising the class-defining cost shapes exactly.

    ``structured`` spends t(k)*p(n)*i**a ticks before output i;
    ``front_loaded`` spends t(k)*p(n) ticks, then outputs one solution per tick.
    """

    n: int
    k: int
    a: int
    m: int
    profile: str = "structured"
    t: int | Mapping[int, int] = 1
    p_coeffs: tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.profile not in ("structured", "front_loaded"):
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.m < 0 or self.a < 0 or self.n < 0 or self.k < 0:
            raise ValueError("n, k, a, m must be natural numbers")
        if isinstance(self.t, Mapping):
            object.__setattr__(self, "t", {int(k): int(v) for k, v in self.t.items()})
        object.__setattr__(self, "p_coeffs", tuple(self.p_coeffs))
        if self.scale < 1:
            raise ValueError("t(k)*p(n) must be at least 1")

    def t_of_k(self, k: int) -> int:
        return self.t[k] if isinstance(self.t, Mapping) else self.t

    @property
    def scale(self) -> int:
        return self.t_of_k(self.k) * poly(self.p_coeffs, self.n)

    def to_json(self) -> dict:
        doc = {"n": self.n, "k": self.k, "a": self.a, "m": self.m, "profile": self.profile,
               "p_coeffs": list(self.p_coeffs)}
        if isinstance(self.t, Mapping):
            doc["t_table"] = {str(k): v for k, v in sorted(self.t.items())}
        else:
            doc["t_const"] = self.t
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "SyntheticSpec":
        if "t_table" in doc:
            t = {int(k): int(v) for k, v in doc["t_table"].items()}
        else:
            t = int(doc.get("t_const", 1))
        return cls(int(doc["n"]), int(doc["k"]), int(doc["a"]), int(doc["m"]),
                   doc.get("profile", "structured"), t, tuple(doc.get("p_coeffs", (1,))))

    def encode(self) -> bytes:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")).encode()


@lru_cache(maxsize=1024)
def decode_synthetic(raw: bytes) -> SyntheticSpec:
    return SyntheticSpec.from_json(json.loads(raw))


def _synthetic_check(raw: bytes, y: bytes) -> bool:
    spec = decode_synthetic(raw)
    if len(y) != SOLUTION_WIDTH or not y.startswith(b"sol_") or not y[4:].isdigit():
        return False
    return 1 <= int(y[4:]) <= spec.m


SYNTHETIC = ProblemDescriptor(
    name="synthetic",
    check=_synthetic_check,
    length_bound=(SOLUTION_WIDTH,),
    parametrisation=lambda raw: decode_synthetic(raw).k,
    alphabet=b"_0123456789los",
    candidates=lambda raw: (synthetic_solution(i) for i in range(decode_synthetic(raw).m + 2)),
)


def synthetic_instance(spec: SyntheticSpec) -> Instance:
    return Instance.of(SYNTHETIC, spec.encode())


def _synthetic_process(spec: SyntheticSpec):
    scale = spec.scale
    if spec.profile == "structured":
        for i in range(1, spec.m + 1):
            yield scale * ipow(i, spec.a)
            yield synthetic_solution(i)
    else:
        yield scale
        for i in range(1, spec.m + 1):
            yield 1
            yield synthetic_solution(i)


def synthetic_enum(spec: SyntheticSpec) -> SteppedEnumerator:
    return SteppedEnumerator(_synthetic_process(spec), name=f"synthetic-{spec.profile}")


def synthetic_bound(spec: SyntheticSpec) -> EnumeratorBoundDecl:
    """A capped bound the synthetic enumerator honours, in the instance's own (t, p)."""
    if spec.profile == "structured":
        # sum_{j<=i} j**a <= 2 * i**(a+1)
        return EnumeratorBoundDecl(_scaled_t(spec, lambda t: 2 * t), spec.p_coeffs, spec.a + 1)
    # t*p + i <= (t+1)*p*i for i >= 1, p >= 1
    return EnumeratorBoundDecl(_scaled_t(spec, lambda t: t + 1), spec.p_coeffs, 1)


def _scaled_t(spec: SyntheticSpec, fn: Callable[[int], int]):
    if isinstance(spec.t, Mapping):
        return {k: fn(v) for k, v in spec.t.items()}
    return fn(spec.t)


def _scripted_process(emit_costs: Sequence[int], finish_cost: int, solutions: Sequence[bytes]):
    cost = 0
    for c, y in zip(emit_costs, solutions):
        if c <= cost:
            raise ValueError(f"emission costs must strictly increase from 1, got {c} after {cost}")
        yield c - cost
        yield y
        cost = c
    if finish_cost > cost:
        yield finish_cost - cost


def scripted_enum(
    emit_costs: Sequence[int],
    finish_cost: int | None = None,
    solutions: Sequence[bytes] | None = None,
) -> SteppedEnumerator:
    """Enumerator emitting solution i at exactly ``emit_costs[i-1]`` ticks."""
    emit_costs = list(emit_costs)
    if solutions is None:
        solutions = [synthetic_solution(i) for i in range(1, len(emit_costs) + 1)]
    if len(solutions) != len(emit_costs):
        raise ValueError("one solution per emission cost")
    if finish_cost is None:
        finish_cost = emit_costs[-1] if emit_costs else 0
    if emit_costs and finish_cost < emit_costs[-1]:
        raise ValueError("finish cost precedes the last emission")
    return SteppedEnumerator(_scripted_process(emit_costs, finish_cost, solutions), name="scripted")


# -- parsing and instance generators -----------------------------------------


def parse_edge_list(data: bytes | str, k: int) -> GraphInstance:
    """First line ``V E``, then E lines ``u v`` with 0-based vertex ids."""
    text = data.decode() if isinstance(data, bytes) else data
    rows = [(no, line.split()) for no, line in enumerate(text.splitlines(), start=1)]
    rows = [(no, parts) for no, parts in rows if parts and not parts[0].startswith("#")]
    if not rows:
        raise ParseError("empty edge list", 1)
    no, head = rows[0]
    if len(head) != 2:
        raise ParseError("header must be 'V E'", no)
    try:
        nv, ne = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError("non-integer header", no) from None
    edges = []
    for no, parts in rows[1:]:
        if len(parts) != 2:
            raise ParseError("edge line must be 'u v'", no)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError("non-integer vertex id", no) from None
        if not (0 <= u < nv and 0 <= v < nv):
            raise ParseError(f"vertex id out of range [0, {nv})", no)
        edges.append((u, v))
    if len(edges) != ne:
        raise ParseError(f"header declares {ne} edges, found {len(edges)}", rows[0][0])
    try:
        return GraphInstance(nv, tuple(edges), k)
    except ValueError as exc:
        raise ParseError(str(exc), rows[0][0]) from None


def to_edge_list(g: GraphInstance) -> str:
    return "".join([f"{g.vertices} {len(g.edges)}\n"] + [f"{u} {v}\n" for u, v in g.edges])


def all_graphs(max_vertices: int) -> Iterator[GraphInstance]:
    """Every labelled graph on 0..max_vertices vertices, with every k <= V."""
    for nv in range(max_vertices + 1):
        pairs = list(itertools.combinations(range(nv), 2))
        for mask in range(1 << len(pairs)):
            edges = tuple(p for j, p in enumerate(pairs) if mask >> j & 1)
            for k in range(nv + 1):
                yield GraphInstance(nv, edges, k)


def random_graph(rng: random.Random, max_vertices: int = 6) -> GraphInstance:
    nv = rng.randint(0, max_vertices)
    density = rng.random()
    edges = tuple(p for p in itertools.combinations(range(nv), 2) if rng.random() < density)
    return GraphInstance(nv, edges, rng.randint(0, nv))


def random_horn(rng: random.Random, max_vars: int = 12, max_clauses: int = 20) -> HornFormula:
    nv = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(0, max_clauses)):
        width = rng.randint(1, min(3, nv))
        chosen = rng.sample(range(1, nv + 1), width)
        lits = [-v for v in chosen]
        if rng.random() < 0.5:
            lits[0] = -lits[0]
        clauses.append(tuple(sorted(lits, key=abs)))
    return HornFormula(nv, tuple(clauses))


def random_synthetic(rng: random.Random, max_m: int = 5000, profile: str | None = None) -> SyntheticSpec:
    return SyntheticSpec(
        n=rng.randint(1, 50),
        k=rng.randint(0, 6),
        a=rng.randint(0, 2),
        m=rng.randint(0, max_m),
        profile=profile or rng.choice(("structured", "front_loaded")),
        t=rng.randint(1, 20),
        p_coeffs=(rng.randint(1, 5),),
    )


# -- registry ------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteEntry:
    problem: ProblemDescriptor
    make_enum: Callable[[Instance], SteppedEnumerator]
    declared_bound: Callable[[Instance], EnumeratorBoundDecl]
    extra: dict = field(default_factory=dict)


SUITE: dict[str, SuiteEntry] = {
    "vertex-cover": SuiteEntry(
        VERTEX_COVER,
        lambda x: vertex_cover_enum(decode_graph(x.raw)),
        lambda x: vertex_cover_bound(),
    ),
    "horn-sat": SuiteEntry(
        HORN_SAT,
        lambda x: horn_sat_enum(parse_dimacs(x.raw)),
        lambda x: horn_sat_bound(),
    ),
    "synthetic": SuiteEntry(
        SYNTHETIC,
        lambda x: synthetic_enum(decode_synthetic(x.raw)),
        lambda x: synthetic_bound(decode_synthetic(x.raw)),
    ),
}
