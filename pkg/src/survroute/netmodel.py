"""Nested mobile-network route optimization: the concrete two-objective problem.

Mobile routers (MRs) each pick one candidate uplink, either to an access
router (AR, served by one base station) or beneath another MR, forming a
forest of bounded depth. Objective z1 aggregates every chosen link cost
along each MR's path to its access router (nested children burden the whole
upstream path); z2 is the expected number of MRs losing service under
independent link/base-station failures.

Includes the exhaustive-enumeration oracle used to verify engine output on
small instances.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ContractViolation, InstanceError, OracleScopeError, ParseError, ValidityError
from .moo import ObjectiveVector, Problem

_ID_RE = re.compile(r"^[A-Za-z0-9_]+$")

DEFAULT_MAX_DEPTH = 4


@dataclass(frozen=True)
class CandidateLink:
    child: str
    parent: str
    cost: float
    fail_prob: float


@dataclass(frozen=True)
class _Compiled:
    """Flat array view of an instance for the evaluation kernels."""

    mr_index: dict
    ar_index: dict
    radices: np.ndarray
    mr_link_offset: np.ndarray
    link_parent_code: np.ndarray
    link_cost: np.ndarray
    link_fail: np.ndarray
    ar_bs_fail: np.ndarray
    link_parent_ids: tuple[str, ...]
    search_space: int


@dataclass(frozen=True)
class NetworkInstance:
    """Parsed topology, canonicalized: all id lists sorted, links sorted by (child, parent)."""

    base_stations: tuple[tuple[str, float], ...]
    access_routers: tuple[tuple[str, str], ...]
    mobile_routers: tuple[str, ...]
    links: tuple[CandidateLink, ...]
    max_depth: int = DEFAULT_MAX_DEPTH

    @cached_property
    def compiled(self) -> _Compiled:
        mr_index = {mr: i for i, mr in enumerate(self.mobile_routers)}
        ar_index = {ar: i for i, (ar, _bs) in enumerate(self.access_routers)}
        bs_fail = {bs: p for bs, p in self.base_stations}
        n_ar = len(self.access_routers)

        counts = np.zeros(len(self.mobile_routers), dtype=np.int64)
        parent_code = np.empty(len(self.links), dtype=np.int64)
        cost = np.empty(len(self.links), dtype=np.float64)
        fail = np.empty(len(self.links), dtype=np.float64)
        parent_ids = []
        # links are sorted by (child, parent), so the flat order is already
        # grouped per MR in canonical order
        for i, link in enumerate(self.links):
            counts[mr_index[link.child]] += 1
            if link.parent in ar_index:
                parent_code[i] = ar_index[link.parent]
            else:
                parent_code[i] = n_ar + mr_index[link.parent]
            cost[i] = link.cost
            fail[i] = link.fail_prob
            parent_ids.append(link.parent)

        offsets = np.zeros(len(self.mobile_routers), dtype=np.int64)
        if len(counts) > 1:
            offsets[1:] = np.cumsum(counts)[:-1]

        space = 1
        for c in counts:
            space *= int(c)

        return _Compiled(
            mr_index=mr_index,
            ar_index=ar_index,
            radices=counts,
            mr_link_offset=offsets,
            link_parent_code=parent_code,
            link_cost=cost,
            link_fail=fail,
            ar_bs_fail=np.array([bs_fail[bs] for _ar, bs in self.access_routers], dtype=np.float64),
            link_parent_ids=tuple(parent_ids),
            search_space=space,
        )

    @property
    def n_mr(self) -> int:
        return len(self.mobile_routers)

    @property
    def n_ar(self) -> int:
        return len(self.access_routers)


@dataclass(frozen=True)
class RouteAssignment:
    """Genotype: per MR (in instance order), the index of its chosen candidate link."""

    choices: tuple[int, ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.choices, dtype=np.int64)


def parse_instance(text: str) -> NetworkInstance:
    """Parse the line-based instance format (BS/AR/MR/LINK/MAXDEPTH records, # comments)."""
    base_stations: list[tuple[str, float]] = []
    access_routers: list[tuple[str, str]] = []
    mobile_routers: list[str] = []
    links: list[CandidateLink] = []
    max_depth: int | None = None
    seen_ids: set[str] = set()
    seen_pairs: set[tuple[str, str]] = set()

    def check_id(token: str, line_no: int) -> str:
        if not _ID_RE.match(token):
            raise ParseError(f"malformed id {token!r}", line_no)
        return token

    def check_prob(token: str, line_no: int) -> float:
        try:
            p = float(token)
        except ValueError:
            raise ParseError(f"malformed probability {token!r}", line_no) from None
        if not 0.0 <= p <= 1.0:
            raise ParseError(f"failure probability {p} outside [0, 1]", line_no)
        return p

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kind, args = fields[0], fields[1:]
        if kind == "BS":
            if len(args) != 2:
                raise ParseError("BS expects: BS <id> <fail_prob>", line_no)
            bs_id = check_id(args[0], line_no)
            if bs_id in seen_ids:
                raise ParseError(f"duplicate id {bs_id!r}", line_no)
            seen_ids.add(bs_id)
            base_stations.append((bs_id, check_prob(args[1], line_no)))
        elif kind == "AR":
            if len(args) != 2:
                raise ParseError("AR expects: AR <id> <bs_id>", line_no)
            ar_id = check_id(args[0], line_no)
            if ar_id in seen_ids:
                raise ParseError(f"duplicate id {ar_id!r}", line_no)
            seen_ids.add(ar_id)
            access_routers.append((ar_id, check_id(args[1], line_no)))
        elif kind == "MR":
            if len(args) != 1:
                raise ParseError("MR expects: MR <id>", line_no)
            mr_id = check_id(args[0], line_no)
            if mr_id in seen_ids:
                raise ParseError(f"duplicate id {mr_id!r}", line_no)
            seen_ids.add(mr_id)
            mobile_routers.append(mr_id)
        elif kind == "LINK":
            if len(args) != 4:
                raise ParseError("LINK expects: LINK <child> <parent> <cost> <fail_prob>", line_no)
            child = check_id(args[0], line_no)
            parent = check_id(args[1], line_no)
            try:
                cost = float(args[2])
            except ValueError:
                raise ParseError(f"malformed cost {args[2]!r}", line_no) from None
            if cost < 0.0 or not math.isfinite(cost):
                raise ParseError(f"link cost {cost} must be finite and >= 0", line_no)
            if (child, parent) in seen_pairs:
                raise ParseError(f"duplicate link {child} -> {parent}", line_no)
            seen_pairs.add((child, parent))
            links.append(CandidateLink(child, parent, cost, check_prob(args[3], line_no)))
        elif kind == "MAXDEPTH":
            if len(args) != 1:
                raise ParseError("MAXDEPTH expects: MAXDEPTH <k>", line_no)
            if max_depth is not None:
                raise ParseError("duplicate MAXDEPTH", line_no)
            try:
                max_depth = int(args[0])
            except ValueError:
                raise ParseError(f"malformed depth {args[0]!r}", line_no) from None
            if max_depth < 1:
                raise ParseError(f"MAXDEPTH must be >= 1, got {max_depth}", line_no)
        else:
            raise ParseError(f"unknown record type {kind!r}", line_no)

    bs_ids = {bs for bs, _p in base_stations}
    mr_ids = set(mobile_routers)
    ar_ids = {ar for ar, _bs in access_routers}
    for ar_id, bs_id in access_routers:
        if bs_id not in bs_ids:
            raise InstanceError(f"access router {ar_id!r} references unknown base station {bs_id!r}")
    linked: set[str] = set()
    for link in links:
        if link.child not in mr_ids:
            raise InstanceError(f"link child {link.child!r} is not a mobile router")
        if link.parent == link.child:
            raise InstanceError(f"link makes {link.child!r} its own parent")
        if link.parent not in ar_ids and link.parent not in mr_ids:
            raise InstanceError(f"link parent {link.parent!r} is neither access nor mobile router")
        linked.add(link.child)
    for mr_id in mobile_routers:
        if mr_id not in linked:
            raise InstanceError(f"mobile router {mr_id!r} has no candidate link (infeasible)")

    return NetworkInstance(
        base_stations=tuple(sorted(base_stations)),
        access_routers=tuple(sorted(access_routers)),
        mobile_routers=tuple(sorted(mobile_routers)),
        links=tuple(sorted(links, key=lambda l: (l.child, l.parent))),
        max_depth=DEFAULT_MAX_DEPTH if max_depth is None else max_depth,
    )


def load_instance(path) -> NetworkInstance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def search_space_size(inst: NetworkInstance) -> int:
    return inst.compiled.search_space


def _check_choices(inst: NetworkInstance, a: RouteAssignment) -> None:
    c = inst.compiled
    if len(a.choices) != inst.n_mr:
        raise ContractViolation(f"assignment has {len(a.choices)} entries, instance has {inst.n_mr} MRs")
    for m, k in enumerate(a.choices):
        if not 0 <= k < c.radices[m]:
            raise ContractViolation(
                f"choice {k} out of range for {inst.mobile_routers[m]!r} (has {c.radices[m]} links)"
            )


def invalid_reason(inst: NetworkInstance, a: RouteAssignment) -> str | None:
    """None when the assignment is a valid forest, else 'cycle' or 'depth'."""
    _check_choices(inst, a)
    c = inst.compiled
    n_ar = inst.n_ar
    for m in range(inst.n_mr):
        cur = m
        steps = 0
        visited = {m}
        while True:
            li = int(c.mr_link_offset[cur]) + a.choices[cur]
            steps += 1
            parent = int(c.link_parent_code[li])
            if parent < n_ar:
                if steps > inst.max_depth:
                    return "depth"
                break
            cur = parent - n_ar
            if cur in visited:
                return "cycle"
            visited.add(cur)
    return None


def validate_assignment(inst: NetworkInstance, a: RouteAssignment) -> bool:
    return invalid_reason(inst, a) is None


def evaluate_assignment(inst: NetworkInstance, a: RouteAssignment) -> tuple[float, float]:
    """(z1, z2) of a valid assignment; raises ContractViolation otherwise."""
    _check_choices(inst, a)
    c = inst.compiled
    z1, z2, ok = kernels.eval_route(
        a.as_array(),
        c.mr_link_offset,
        c.link_parent_code,
        c.link_cost,
        c.link_fail,
        c.ar_bs_fail,
        inst.n_ar,
        inst.max_depth,
    )
    if not ok:
        raise ContractViolation(f"invalid assignment ({invalid_reason(inst, a)})")
    return float(z1), float(z2)


def cost_z1(inst: NetworkInstance, a: RouteAssignment) -> float:
    return evaluate_assignment(inst, a)[0]


def risk_z2(inst: NetworkInstance, a: RouteAssignment) -> float:
    return evaluate_assignment(inst, a)[1]


def parent_map(inst: NetworkInstance, a: RouteAssignment) -> dict[str, str]:
    _check_choices(inst, a)
    c = inst.compiled
    return {
        mr: c.link_parent_ids[int(c.mr_link_offset[m]) + a.choices[m]]
        for m, mr in enumerate(inst.mobile_routers)
    }


def assignment_string(inst: NetworkInstance, a: RouteAssignment) -> str:
    """Canonical 'mr=parent;...' serialization (MRs in sorted id order)."""
    pm = parent_map(inst, a)
    return ";".join(f"{mr}={pm[mr]}" for mr in inst.mobile_routers)


def assignment_from_parent_map(inst: NetworkInstance, mapping: dict[str, str]) -> RouteAssignment:
    if set(mapping) != set(inst.mobile_routers):
        raise ContractViolation("parent map must be keyed exactly by the instance's MR ids")
    c = inst.compiled
    choices = []
    for m, mr in enumerate(inst.mobile_routers):
        off = int(c.mr_link_offset[m])
        block = c.link_parent_ids[off : off + int(c.radices[m])]
        try:
            choices.append(block.index(mapping[mr]))
        except ValueError:
            raise ContractViolation(f"{mr!r} has no candidate link to {mapping[mr]!r}") from None
    return RouteAssignment(tuple(choices))


def assignment_from_string(inst: NetworkInstance, text: str) -> RouteAssignment:
    mapping = {}
    for part in text.split(";"):
        mr, sep, parent = part.partition("=")
        if not sep:
            raise ContractViolation(f"malformed assignment entry {part!r}")
        mapping[mr] = parent
    return assignment_from_parent_map(inst, mapping)


def random_assignment(inst: NetworkInstance, rng, max_attempts: int = 1000) -> RouteAssignment:
    """Random valid forest via randomized topological attachment.

    MRs are processed in a random order, each picking uniformly among
    candidate links whose parent is already rooted (an AR, or an MR attached
    earlier in this pass) without exceeding max_depth. Infeasible orders are
    retried with a fresh permutation.
    """
    c = inst.compiled
    n_ar = inst.n_ar
    if inst.n_mr == 0:
        return RouteAssignment(())
    for _attempt in range(max_attempts):
        order = rng.permutation(inst.n_mr)
        depth: dict[int, int] = {}
        choices = [0] * inst.n_mr
        ok = True
        for m in order:
            m = int(m)
            feasible = []
            for k in range(int(c.radices[m])):
                parent = int(c.link_parent_code[int(c.mr_link_offset[m]) + k])
                if parent < n_ar:
                    d = 1
                elif (parent - n_ar) in depth:
                    d = depth[parent - n_ar] + 1
                else:
                    continue
                if d <= inst.max_depth:
                    feasible.append((k, d))
            if not feasible:
                ok = False
                break
            k, d = feasible[int(rng.integers(len(feasible)))]
            choices[m] = k
            depth[m] = d
        if ok:
            return RouteAssignment(tuple(choices))
    raise InstanceError(f"no valid assignment found in {max_attempts} attempts (instance infeasible?)")


def _is_valid_array(inst: NetworkInstance, choices: np.ndarray) -> bool:
    c = inst.compiled
    _z1, _z2, ok = kernels.eval_route(
        choices, c.mr_link_offset, c.link_parent_code, c.link_cost, c.link_fail,
        c.ar_bs_fail, inst.n_ar, inst.max_depth,
    )
    return bool(ok)


def _feasible_alternatives(inst: NetworkInstance, work: np.ndarray, m: int) -> list[int]:
    c = inst.compiled
    current = int(work[m])
    feasible = []
    for k in range(int(c.radices[m])):
        if k == current:
            continue
        work[m] = k
        if _is_valid_array(inst, work):
            feasible.append(k)
    work[m] = current
    return feasible


def mutate_reattach(inst: NetworkInstance, a: RouteAssignment, rng) -> RouteAssignment:
    """Reassign one uniformly chosen MR to another feasible candidate link.

    Returns the input unchanged when the drawn MR has no feasible alternative.
    """
    if inst.n_mr == 0:
        return a
    work = a.as_array()
    m = int(rng.integers(inst.n_mr))
    feasible = _feasible_alternatives(inst, work, m)
    if not feasible:
        return a
    work[m] = feasible[int(rng.integers(len(feasible)))]
    return RouteAssignment(tuple(int(k) for k in work))


def heavy_reattach(inst: NetworkInstance, a: RouteAssignment, rng) -> RouteAssignment:
    """Heavy mutation: reattach ceil(|MR|/2) randomly chosen MRs in sequence."""
    if inst.n_mr == 0:
        return a
    count = (inst.n_mr + 1) // 2
    work = a.as_array()
    for m in rng.permutation(inst.n_mr)[:count]:
        feasible = _feasible_alternatives(inst, work, int(m))
        if feasible:
            work[int(m)] = feasible[int(rng.integers(len(feasible)))]
    return RouteAssignment(tuple(int(k) for k in work))


def _broken_mrs(inst: NetworkInstance, choices: np.ndarray) -> tuple[list[int], dict[int, int]]:
    """MR indices whose walk fails, plus depths of the intact ones."""
    c = inst.compiled
    n_ar = inst.n_ar
    broken = []
    depth: dict[int, int] = {}
    for m in range(inst.n_mr):
        cur = m
        steps = 0
        visited = {m}
        reached = False
        while True:
            li = int(c.mr_link_offset[cur]) + int(choices[cur])
            steps += 1
            parent = int(c.link_parent_code[li])
            if parent < n_ar:
                reached = steps <= inst.max_depth
                break
            cur = parent - n_ar
            if cur in visited:
                break
            visited.add(cur)
        if reached:
            depth[m] = steps
        else:
            broken.append(m)
    return broken, depth


def crossover_parentmix(inst: NetworkInstance, a: RouteAssignment, b: RouteAssignment, rng) -> RouteAssignment:
    """Uniform parent-link mix of two assignments, with topological repair.

    Each MR inherits its link from a or b with probability 1/2; MRs left on
    broken paths (cycles or excessive depth) are re-attached by randomized
    topological attachment, falling back to a full rebuild if repair stalls.
    """
    if inst.n_mr == 0:
        return a
    c = inst.compiled
    n_ar = inst.n_ar
    child = np.empty(inst.n_mr, dtype=np.int64)
    for m in range(inst.n_mr):
        child[m] = a.choices[m] if rng.random() < 0.5 else b.choices[m]
    broken, intact_depth = _broken_mrs(inst, child)
    if not broken:
        return RouteAssignment(tuple(int(k) for k in child))

    for _attempt in range(50):
        depth = dict(intact_depth)
        trial = child.copy()
        pending = [int(m) for m in rng.permutation(len(broken))]
        pending = [broken[i] for i in pending]
        while pending:
            progressed = False
            still = []
            for m in pending:
                feasible = []
                for k in range(int(c.radices[m])):
                    parent = int(c.link_parent_code[int(c.mr_link_offset[m]) + k])
                    if parent < n_ar:
                        d = 1
                    elif (parent - n_ar) in depth:
                        d = depth[parent - n_ar] + 1
                    else:
                        continue
                    if d <= inst.max_depth:
                        feasible.append((k, d))
                if feasible:
                    k, d = feasible[int(rng.integers(len(feasible)))]
                    trial[m] = k
                    depth[m] = d
                    progressed = True
                else:
                    still.append(m)
            pending = still
            if not progressed:
                break
        if not pending:
            return RouteAssignment(tuple(int(k) for k in trial))
    return random_assignment(inst, rng)


def neighborhood(inst: NetworkInstance, a: RouteAssignment) -> list[RouteAssignment]:
    """All valid single-MR reattachments, in (MR index, link index) order."""
    _check_choices(inst, a)
    c = inst.compiled
    work = a.as_array()
    out = []
    for m in range(inst.n_mr):
        current = int(work[m])
        for k in range(int(c.radices[m])):
            if k == current:
                continue
            work[m] = k
            if _is_valid_array(inst, work):
                out.append(RouteAssignment(tuple(int(x) for x in work)))
        work[m] = current
    return out


def brute_force_pareto(
    inst: NetworkInstance, guard: int = 1_000_000
) -> list[tuple[ObjectiveVector, RouteAssignment]]:
    """Exact Pareto front by exhaustive enumeration, one witness per objective vector.

    Witnesses are deterministic (smallest enumeration index). Refuses search
    spaces larger than ``guard``.
    """
    c = inst.compiled
    if c.search_space > guard:
        raise OracleScopeError(
            f"search space {c.search_space} exceeds oracle guard {guard}"
        )
    if inst.n_mr == 0:
        return [(ObjectiveVector((0.0, 0.0)), RouteAssignment(()))]
    valid, z1, z2 = kernels.enumerate_routes(
        c.radices,
        c.mr_link_offset,
        c.link_parent_code,
        c.link_cost,
        c.link_fail,
        c.ar_bs_fail,
        inst.n_ar,
        inst.max_depth,
    )
    idx = np.flatnonzero(valid)
    if idx.size == 0:
        return []
    z1v, z2v = z1[idx], z2[idx]
    order = np.lexsort((idx, z2v, z1v))
    shape = tuple(int(r) for r in c.radices)
    front = []
    best = math.inf
    for j in order:
        if z2v[j] < best:
            best = float(z2v[j])
            choices = tuple(int(x) for x in np.unravel_index(int(idx[j]), shape))
            front.append((ObjectiveVector((float(z1v[j]), best)), RouteAssignment(choices)))
    return front


class RouteProblem(Problem):
    """Adapter exposing a NetworkInstance through the generic problem interface."""

    objective_count = 2

    def __init__(self, instance: NetworkInstance):
        self.instance = instance

    def evaluate(self, genotype: RouteAssignment) -> ObjectiveVector:
        inst = self.instance
        _check_choices(inst, genotype)
        c = inst.compiled
        z1, z2, ok = kernels.eval_route(
            genotype.as_array(),
            c.mr_link_offset,
            c.link_parent_code,
            c.link_cost,
            c.link_fail,
            c.ar_bs_fail,
            inst.n_ar,
            inst.max_depth,
        )
        if not ok:
            raise ValidityError(f"invalid assignment ({invalid_reason(inst, genotype)})")
        return ObjectiveVector((float(z1), float(z2)))

    def random_genotype(self, rng) -> RouteAssignment:
        return random_assignment(self.instance, rng)

    def is_valid(self, genotype) -> bool:
        return validate_assignment(self.instance, genotype)

    def invalid_reason(self, genotype) -> str | None:
        return invalid_reason(self.instance, genotype)

    def genotype_key(self, genotype) -> str:
        return assignment_string(self.instance, genotype)

    def mutate(self, genotype, rng) -> RouteAssignment:
        return mutate_reattach(self.instance, genotype, rng)

    def crossover(self, a, b, rng) -> RouteAssignment:
        return crossover_parentmix(self.instance, a, b, rng)

    def heavy_mutate(self, genotype, rng) -> RouteAssignment:
        return heavy_reattach(self.instance, genotype, rng)

    def neighborhood(self, genotype) -> list[RouteAssignment]:
        return neighborhood(self.instance, genotype)
