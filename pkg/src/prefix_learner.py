"""
Prefix Learner Module
Type I-IV exclusion sets and one prefix-growing step, observational or interventional
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .ci_engine import CiCounter, CiOracle
from .errors import GraphArgumentError, PrefixStallError
from .graph_core import EMPTY, OBSERVATIONAL, Intervention, VertexSet

# Unique CI queries of one step stay within STEP_QUERY_CONSTANT * n^4
# plus INT_QUERY_CONSTANT * n^2 per intervention
STEP_QUERY_CONSTANT = 7
INT_QUERY_CONSTANT = 2

Witnesses = Dict[str, Dict[int, Tuple[Any, ...]]]


@dataclass
class PrefixStepTrace:
    """Record of one prefix step S -> S'"""

    input_prefix: VertexSet
    d_set: VertexSet
    e_set: VertexSet
    f_set: VertexSet
    j_sets: Dict[str, VertexSet]
    output_prefix: VertexSet
    queries_used: CiCounter
    witnesses: Witnesses = field(default_factory=dict)

    @property
    def excluded(self) -> VertexSet:
        """D ∪ E ∪ F ∪ every J"""
        result = set(self.d_set | self.e_set | self.f_set)
        for j_set in self.j_sets.values():
            result |= j_set
        return frozenset(result)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input_prefix": sorted(self.input_prefix),
            "d_set": sorted(self.d_set),
            "e_set": sorted(self.e_set),
            "f_set": sorted(self.f_set),
            "j_sets": {k: sorted(v) for k, v in sorted(self.j_sets.items())},
            "output_prefix": sorted(self.output_prefix),
            "queries": self.queries_used.to_dict(),
            "witnesses": {
                kind: {str(w): list(t) for w, t in sorted(found.items())}
                for kind, found in sorted(self.witnesses.items())
            },
        }


def _record(witnesses: Optional[Witnesses], kind: str, w: int, witness: Tuple[Any, ...]) -> None:
    if witnesses is not None:
        witnesses.setdefault(kind, {})[w] = witness


def type1_set(
    oracle: CiOracle,
    prefix: Iterable[int],
    witnesses: Optional[Witnesses] = None,
) -> VertexSet:
    """
    D_S: w ∈ S̄ with u ⫫ v | S but u ⫫̸ v | S ∪ {w}

    u ranges over V and v over S̄, all three distinct. Independent pairs
    are found first, then each w is matched against them until a witness
    turns up.
    """
    s = frozenset(prefix)
    rest = sorted(oracle.vertices - s)

    pairs: List[Tuple[int, int]] = []
    seen = set()
    for v in rest:
        for u in sorted(oracle.vertices):
            key = frozenset((u, v))
            if u == v or key in seen:
                continue
            seen.add(key)
            if oracle.independent(u, v, s):
                pairs.append((u, v))

    result = set()
    for w in rest:
        for u, v in pairs:
            if w != u and w != v and oracle.dependent(u, v, s | {w}):
                result.add(w)
                _record(witnesses, "D", w, (u, v))
                break
    return frozenset(result)


def type2_set(
    oracle: CiOracle,
    prefix: Iterable[int],
    d_set: Iterable[int],
    witnesses: Optional[Witnesses] = None,
) -> VertexSet:
    """
    E_S: w ∈ S̄ \\ D with u ⫫ v' | S ∪ {v} but u ⫫̸ v' | S ∪ {v, w}

    u ∈ S; v, v' ∈ S̄ \\ D; all distinct.
    """
    s = frozenset(prefix)
    remaining = sorted(oracle.vertices - s - frozenset(d_set))
    if not s or len(remaining) < 3:
        return EMPTY

    triples: List[Tuple[int, int, int]] = []
    for u in sorted(s):
        for v in remaining:
            for v2 in remaining:
                if v2 != v and oracle.independent(u, v2, s | {v}):
                    triples.append((u, v, v2))

    result = set()
    for w in remaining:
        for u, v, v2 in triples:
            if w != v and w != v2 and oracle.dependent(u, v2, s | {v, w}):
                result.add(w)
                _record(witnesses, "E", w, (u, v, v2))
                break
    return frozenset(result)


def type3_set(
    oracle: CiOracle,
    prefix: Iterable[int],
    d_set: Iterable[int],
    witnesses: Optional[Witnesses] = None,
) -> VertexSet:
    """
    F_S: w ∈ S̄ \\ D with u ⫫̸ v | S, u ⫫ w | S ∪ {v} and v ⫫̸ w | S

    u ∈ S; v ∈ S̄ \\ D; all distinct.
    """
    s = frozenset(prefix)
    remaining = sorted(oracle.vertices - s - frozenset(d_set))
    if not s or len(remaining) < 2:
        return EMPTY

    linked = [(u, v) for u in sorted(s) for v in remaining if oracle.dependent(u, v, s)]

    result = set()
    for w in remaining:
        for u, v in linked:
            if v == w:
                continue
            if oracle.independent(u, w, s | {v}) and oracle.dependent(v, w, s):
                result.add(w)
                _record(witnesses, "F", w, (u, v))
                break
    return frozenset(result)


def _check_prefix_arg(oracle: CiOracle, prefix: Iterable[int]) -> VertexSet:
    s = frozenset(prefix)
    if not s <= oracle.vertices:
        raise GraphArgumentError(f"prefix {sorted(s - oracle.vertices)} out of range for n={oracle.n}")
    if s == oracle.vertices:
        raise GraphArgumentError("prefix already covers every vertex")
    return s


def learn_prefix(oracle: CiOracle, prefix: Iterable[int]) -> PrefixStepTrace:
    """
    Grow a prefix vertex set by one step from observational CI tests

    Args:
        oracle: CI oracle over V
        prefix: Current prefix vertex set S, S != V

    Returns:
        PrefixStepTrace with S' = S ∪ (S̄ \\ (D ∪ E ∪ F))

    Raises:
        GraphArgumentError: S = V
        PrefixStallError: S' = S
    """
    return learn_prefix_int(oracle, prefix, ())


def reaching_targets(
    oracle: CiOracle,
    prefix: Iterable[int],
    intervention: Intervention,
    witnesses: Optional[Witnesses] = None,
) -> Dict[int, VertexSet]:
    """
    W(u) = {v ∈ I \\ S : u ⫫̸ v marginally in regime I} for u ∉ S ∪ I

    Targets lose their parents under I, so W(u) holds exactly the targets
    with a directed path to u through non-targets. Only vertices with a
    non-empty W(u) are returned; their keys make up Des(I \\ S) \\ I.
    """
    s = frozenset(prefix)
    fresh = sorted(intervention.targets - s)
    if not fresh:
        return {}

    reach: Dict[int, VertexSet] = {}
    for u in sorted(oracle.vertices - s - intervention.targets):
        found = frozenset(v for v in fresh if oracle.dependent(u, v, (), intervention.id))
        if found:
            reach[u] = found
            _record(witnesses, f"J:{intervention.id}", u, ("des", min(found)))
    return reach


def interventional_descendants(
    oracle: CiOracle,
    prefix: Iterable[int],
    intervention: Intervention,
    witnesses: Optional[Witnesses] = None,
) -> VertexSet:
    """Des(I \\ S) outside the targets"""
    return frozenset(reaching_targets(oracle, prefix, intervention, witnesses))


def targets_below(
    oracle: CiOracle,
    prefix: Iterable[int],
    intervention: Intervention,
    reach: Dict[int, VertexSet],
    witnesses: Optional[Witnesses] = None,
) -> VertexSet:
    """
    Targets of I \\ S that descend from a vertex of Des(I \\ S) \\ I

    For x with reaching targets W(x), a target t ∉ W(x) is tested against x
    given V \\ Des[I \\ S], W(x) and every u with W(u) ⊊ W(x). That set holds
    no descendant of x and cuts every path leaving x upward through a target.
    Some x depends on t exactly when t has an ancestor in Des(I \\ S) \\ I.

    Args:
        oracle: CI oracle
        prefix: Prefix vertex set S
        intervention: I
        reach: Output of reaching_targets for the same S and I
        witnesses: Optional witness map, filled under "J:<id>"

    Returns:
        Targets of I \\ S below Des(I \\ S) \\ I, never a source of S̄
    """
    s = frozenset(prefix)
    fresh = intervention.targets - s
    if not reach or not fresh:
        return EMPTY

    base = oracle.vertices - frozenset(reach) - fresh
    blankets = {
        x: base | w_x | {u for u, w_u in reach.items() if w_u < w_x}
        for x, w_x in reach.items()
    }

    result = set()
    for t in sorted(fresh):
        for x in sorted(reach):
            if t in reach[x]:
                continue
            if oracle.dependent(x, t, blankets[x], OBSERVATIONAL):
                result.add(t)
                _record(witnesses, f"J:{intervention.id}", t, ("below", x))
                break
    return frozenset(result)


def h_set(
    oracle: CiOracle,
    prefix: Iterable[int],
    intervention: Intervention,
    v: int,
    des_closed_targets: Iterable[int],
) -> VertexSet:
    """
    H(v) = {u ∉ S ∪ Des[I \\ S] : u ⫫̸ v | V \\ Des[I \\ S]}, observational

    Args:
        oracle: CI oracle
        prefix: Prefix vertex set S
        intervention: I
        v: Target in I \\ S
        des_closed_targets: Des[I \\ S] from interventional_descendants

    Returns:
        H(v), sandwiched between the parents and ancestors of v outside
        S ∪ Des[I \\ S]
    """
    s = frozenset(prefix)
    if v not in intervention.targets or v in s:
        raise GraphArgumentError(f"vertex {v} is not in I \\ S for regime {intervention.id!r}")
    des_i = frozenset(des_closed_targets)
    cond = oracle.vertices - des_i
    return frozenset(
        u for u in sorted(oracle.vertices - s - des_i) if oracle.dependent(u, v, cond, OBSERVATIONAL)
    )


def type4_set(
    oracle: CiOracle,
    prefix: Iterable[int],
    intervention: Intervention,
    witnesses: Optional[Witnesses] = None,
) -> VertexSet:
    """
    J_S^I = N ∪ Des(N) ∪ {v ∈ I \\ S : H(v) nonempty}, N = Des(I \\ S) \\ I

    Closed under descendants and disjoint from src(S̄). A target whose only
    ancestors in Des[I \\ S] are other targets stays out unless its H set
    is non-empty; a target-to-target edge cannot be oriented from CI tests.
    """
    s = frozenset(prefix)
    fresh = intervention.targets - s
    if not fresh:
        return EMPTY

    reach = reaching_targets(oracle, s, intervention, witnesses)
    des_i = frozenset(reach) | fresh
    result = set(reach) | targets_below(oracle, s, intervention, reach, witnesses)
    for v in sorted(fresh - result):
        helpers = h_set(oracle, s, intervention, v, des_i)
        if helpers:
            result.add(v)
            _record(witnesses, f"J:{intervention.id}", v, ("h", min(helpers)))
    return frozenset(result)


def learn_prefix_int(
    oracle: CiOracle,
    prefix: Iterable[int],
    interventions: Sequence[Intervention],
) -> PrefixStepTrace:
    """
    Grow a prefix vertex set by one step using every regime

    Args:
        oracle: CI oracle answering the observational and each I regime
        prefix: Current prefix vertex set S, S != V
        interventions: Known-target hard interventions

    Returns:
        PrefixStepTrace with S' = S ∪ (S̄ \\ (D ∪ E ∪ F ∪ ⋃J))

    Raises:
        GraphArgumentError: S = V
        PrefixStallError: S' = S
    """
    s = _check_prefix_arg(oracle, prefix)
    before = oracle.counter.snapshot()
    witnesses: Witnesses = {}

    j_sets = {I.id: type4_set(oracle, s, I, witnesses) for I in interventions}
    d_set = type1_set(oracle, s, witnesses)
    e_set = type2_set(oracle, s, d_set, witnesses)
    f_set = type3_set(oracle, s, d_set, witnesses)

    trace = PrefixStepTrace(
        input_prefix=s,
        d_set=d_set,
        e_set=e_set,
        f_set=f_set,
        j_sets=j_sets,
        output_prefix=EMPTY,
        queries_used=CiCounter(),
        witnesses=witnesses,
    )
    trace.output_prefix = s | (oracle.vertices - s - trace.excluded)
    trace.queries_used = oracle.counter.snapshot() - before

    if trace.output_prefix == s:
        raise PrefixStallError(s)
    return trace


def step_query_budget(n: int, num_interventions: int = 0) -> int:
    """Declared bound on unique CI queries of one step"""
    return STEP_QUERY_CONSTANT * n ** 4 + INT_QUERY_CONSTANT * num_interventions * n ** 2
