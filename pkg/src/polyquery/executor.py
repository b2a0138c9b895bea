"""Physical plans and partition-parallel execution.

Operators map over partitions with a thread pool; hash joins build before
any probe starts, and aggregation merges per-partition partial states in
partition order. Float SUM/AVG accumulate exactly (as rationals) so results
are bit-identical for every worker count and partition layout; Sort breaks
ties by whole-row order and LIMIT without an ORDER BY takes rows in
canonical row order, which keeps every operator deterministic.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .catalog import Catalog
from .errors import EngineError, ExecutionError, PlanError
from .expr import compile_expr
from .model import (
    INT64_MAX,
    INT64_MIN,
    ColumnType,
    PlanSchema,
    Relation,
    Row,
    Schema,
    canonical_order,
    canonical_row_key,
    repartition,
    sort_rows,
)
from .sql.ast import GroupMode
from .sql.logical import (
    AggregateNode,
    FilterNode,
    JoinNode,
    LimitNode,
    LogicalPlan,
    ProjectNode,
    ScanNode,
    SortNode,
    output_plan_schema,
)
from .stats import TableStats


def grouping_sets(group_cols: Sequence[str], mode: GroupMode) -> list[tuple[str, ...]]:
    """Expand GROUP BY columns into grouping sets.

    Plain keeps the full list; Rollup yields every prefix down to the empty
    set; Cube yields all subsets. Output order: decreasing set size, then
    lexicographic.
    """
    cols = tuple(group_cols)
    if len(set(cols)) != len(cols):
        raise PlanError("duplicate grouping column")
    if mode is GroupMode.PLAIN:
        return [cols]
    if mode is GroupMode.ROLLUP:
        return [cols[:k] for k in range(len(cols), -1, -1)]
    subsets = []
    for mask in range(1 << len(cols)):
        subsets.append(tuple(c for i, c in enumerate(cols) if mask & (1 << i)))
    subsets.sort(key=lambda s: (-len(s), s))
    return subsets


def _norm_key_value(v):
    # Collapse -0.0 and 0.0 so group keys are partition-order independent.
    if isinstance(v, float):
        return v + 0.0
    return v


# Aggregate kernels. State must merge associatively and commutatively so the
# per-partition partial -> merge pipeline gives one answer for any layout.

class _AggKernel:
    def __init__(self, func: str, arg: Optional[Callable[[Row], object]], out_type: ColumnType):
        self.func = func
        self.arg = arg
        self.out_type = out_type

    def init(self):
        if self.func == "COUNT":
            return 0
        if self.func == "AVG":
            return (None, 0)
        return None

    def update(self, state, row):
        if self.func == "COUNT":
            if self.arg is None:
                return state + 1
            return state + 1 if self.arg(row) is not None else state
        v = self.arg(row)
        if v is None:
            return state
        if self.func == "SUM":
            add = Fraction(v) if self.out_type is ColumnType.FLOAT64 else v
            return add if state is None else state + add
        if self.func == "AVG":
            total, count = state
            add = Fraction(v) if isinstance(v, float) else v
            return (add if total is None else total + add, count + 1)
        if self.func == "MIN":
            return v if state is None or v < state else state
        return v if state is None or v > state else state

    def merge(self, a, b):
        if self.func == "COUNT":
            return a + b
        if self.func == "AVG":
            total_a, count_a = a
            total_b, count_b = b
            if total_a is None:
                total = total_b
            elif total_b is None:
                total = total_a
            else:
                total = total_a + total_b
            return (total, count_a + count_b)
        if a is None:
            return b
        if b is None:
            return a
        if self.func == "SUM":
            return a + b
        if self.func == "MIN":
            return a if a < b else b
        return a if a > b else b

    def finalize(self, state):
        if self.func == "COUNT":
            return state
        if self.func == "SUM":
            if state is None:
                return None
            if isinstance(state, Fraction):
                return float(state)
            if state > INT64_MAX or state < INT64_MIN:
                raise ExecutionError("Int64 overflow in SUM")
            return state
        if self.func == "AVG":
            total, count = state
            if count == 0:
                return None
            if isinstance(total, Fraction):
                return float(total) / count
            return total / count
        return state


# Physical operators.

class PTableScan:
    def __init__(self, table: str, catalog: Catalog):
        self.table = table
        self.catalog = catalog

    def run(self, pool, workers: int) -> list[list[Row]]:
        relation = self.catalog.scan(self.table)
        return repartition(relation, workers).partitions


class PFilter:
    def __init__(self, input, predicate: Callable[[Row], object]):
        self.input = input
        self.predicate = predicate

    def run(self, pool, workers: int) -> list[list[Row]]:
        parts = self.input.run(pool, workers)
        pred = self.predicate

        def work(part: list[Row]) -> list[Row]:
            return [row for row in part if pred(row) is True]

        return _pmap(pool, "filter", work, parts)


class PProject:
    def __init__(self, input, funcs: list[Callable[[Row], object]]):
        self.input = input
        self.funcs = funcs

    def run(self, pool, workers: int) -> list[list[Row]]:
        parts = self.input.run(pool, workers)
        funcs = self.funcs

        def work(part: list[Row]) -> list[Row]:
            return [tuple(f(row) for f in funcs) for row in part]

        return _pmap(pool, "project", work, parts)


class PHashJoin:
    def __init__(self, left, right, left_keys: list[int], right_keys: list[int], build_left: bool):
        self.left = left
        self.right = right
        self.left_keys = left_keys
        self.right_keys = right_keys
        self.build_left = build_left

    def run(self, pool, workers: int) -> list[list[Row]]:
        left_parts = self.left.run(pool, workers)
        right_parts = self.right.run(pool, workers)
        if self.build_left:
            build_parts, probe_parts = left_parts, right_parts
            build_keys, probe_keys = self.left_keys, self.right_keys
        else:
            build_parts, probe_parts = right_parts, left_parts
            build_keys, probe_keys = self.right_keys, self.left_keys

        # Build completes before any probe starts.
        table: dict = {}
        for part in build_parts:
            for row in part:
                key = _join_key(row, build_keys)
                if key is None:
                    continue
                table.setdefault(key, []).append(row)

        build_left = self.build_left

        def work(part: list[Row]) -> list[Row]:
            out = []
            for row in part:
                key = _join_key(row, probe_keys)
                if key is None:
                    continue
                for match in table.get(key, ()):
                    out.append(match + row if build_left else row + match)
            return out

        return _pmap(pool, "hash-join", work, probe_parts)


def _join_key(row: Row, idxs: list[int]):
    key = []
    for i in idxs:
        v = row[i]
        if v is None:
            return None
        key.append(v)
    return tuple(key)


class PHashAggregate:
    def __init__(
        self,
        input,
        group_idx: list[int],
        sets: list[tuple[int, ...]],  # positions into group_idx per grouping set
        mode: GroupMode,
        kernels: list[_AggKernel],
    ):
        self.input = input
        self.group_idx = group_idx
        self.sets = sets
        self.mode = mode
        self.kernels = kernels
        self.grouping_ids = [
            sum(1 << i for i in range(len(group_idx)) if i not in positions)
            for positions in sets
        ]

    def run(self, pool, workers: int) -> list[list[Row]]:
        parts = self.input.run(pool, workers)
        kernels = self.kernels
        group_idx = self.group_idx
        sets = self.sets

        def partial(part: list[Row]) -> dict:
            states: dict = {}
            for row in part:
                for set_no, positions in enumerate(sets):
                    key = tuple(_norm_key_value(row[group_idx[p]]) for p in positions)
                    slot = states.get((set_no, key))
                    if slot is None:
                        slot = [k.init() for k in kernels]
                        states[(set_no, key)] = slot
                    for i, k in enumerate(kernels):
                        slot[i] = k.update(slot[i], row)
            return states

        partials = _pmap(pool, "aggregate", partial, parts)
        merged: dict = {}
        for states in partials:
            for group, slot in states.items():
                mine = merged.get(group)
                if mine is None:
                    merged[group] = slot
                else:
                    merged[group] = [k.merge(a, b) for k, a, b in zip(kernels, mine, slot)]

        # Grand-total sets exist even over empty input (COUNT(*) -> 0).
        for set_no, positions in enumerate(sets):
            if not positions and (set_no, ()) not in merged:
                merged[(set_no, ())] = [k.init() for k in kernels]

        d = len(group_idx)
        out = []
        for (set_no, key), slot in sorted(
            merged.items(), key=lambda item: (item[0][0], canonical_row_key(item[0][1]))
        ):
            positions = sets[set_no]
            by_pos = dict(zip(positions, key))
            row = [by_pos.get(i) for i in range(d)]
            try:
                row.extend(k.finalize(s) for k, s in zip(kernels, slot))
            except EngineError as exc:
                raise ExecutionError(f"aggregate: {exc.message}") from exc
            if self.mode is not GroupMode.PLAIN:
                row.append(self.grouping_ids[set_no])
            out.append(tuple(row))
        return [out]


class PSort:
    def __init__(self, input, keys: list[tuple[int, bool]]):
        self.input = input
        self.keys = keys

    def run(self, pool, workers: int) -> list[list[Row]]:
        parts = self.input.run(pool, workers)
        rows = [row for part in parts for row in part]
        return [sort_rows(rows, self.keys)]


class PLimit:
    def __init__(self, input, n: int, child_sorted: bool):
        self.input = input
        self.n = n
        self.child_sorted = child_sorted

    def run(self, pool, workers: int) -> list[list[Row]]:
        parts = self.input.run(pool, workers)
        rows = [row for part in parts for row in part]
        if not self.child_sorted:
            rows = canonical_order(rows)
        return [rows[: self.n]]


PhysicalPlan = PTableScan | PFilter | PProject | PHashJoin | PHashAggregate | PSort | PLimit


def _pmap(pool, op_name: str, fn, parts):
    try:
        return list(pool.map(fn, parts))
    except EngineError as exc:
        raise ExecutionError(f"{op_name}: {exc.message}") from exc


class CompiledQuery:
    """A physical operator tree plus its output schema."""

    def __init__(self, root, schema: Schema):
        self.root = root
        self.schema = schema


def compile_physical(
    plan: LogicalPlan,
    stats: dict[str, TableStats] | None,
    catalog: Catalog,
) -> CompiledQuery:
    """Lower a logical plan 1:1 to physical operators.

    The hash join build side is the input with the smaller estimated
    cardinality (left on ties or when statistics are unavailable).
    """
    stats = stats or {}
    root, plan_schema = _compile(plan, stats, catalog)
    return CompiledQuery(root, plan_schema.to_schema())


def _estimate_or_none(plan: LogicalPlan, stats, catalog) -> float | None:
    from .optimizer import estimate_cardinality

    try:
        return estimate_cardinality(plan, stats, catalog)
    except PlanError:
        return None


def _compile(plan: LogicalPlan, stats, catalog) -> tuple[object, PlanSchema]:
    if isinstance(plan, ScanNode):
        return PTableScan(plan.table, catalog), output_plan_schema(plan, catalog)
    if isinstance(plan, FilterNode):
        child, schema = _compile(plan.input, stats, catalog)
        return PFilter(child, compile_expr(plan.predicate, schema)), schema
    if isinstance(plan, ProjectNode):
        child, schema = _compile(plan.input, stats, catalog)
        funcs = [compile_expr(e, schema) for e in plan.exprs]
        return PProject(child, funcs), output_plan_schema(plan, catalog)
    if isinstance(plan, JoinNode):
        left, left_schema = _compile(plan.left, stats, catalog)
        right, right_schema = _compile(plan.right, stats, catalog)
        left_keys = [left_schema.resolve(l.qualifier, l.name) for l, _ in plan.pairs]
        right_keys = [right_schema.resolve(r.qualifier, r.name) for _, r in plan.pairs]
        left_card = _estimate_or_none(plan.left, stats, catalog)
        right_card = _estimate_or_none(plan.right, stats, catalog)
        build_left = True
        if left_card is not None and right_card is not None and right_card < left_card:
            build_left = False
        node = PHashJoin(left, right, left_keys, right_keys, build_left)
        return node, left_schema.concat(right_schema)
    if isinstance(plan, AggregateNode):
        child, schema = _compile(plan.input, stats, catalog)
        group_idx = [schema.resolve(ref.qualifier, ref.name) for ref in plan.group_refs]
        labels = tuple(ref.label() for ref in plan.group_refs)
        label_sets = grouping_sets(labels, plan.mode)
        pos_of = {label: i for i, label in enumerate(labels)}
        sets = [tuple(pos_of[label] for label in subset) for subset in label_sets]
        kernels = []
        for func, arg in plan.aggs:
            from .expr import Aggregate, aggregate_type

            out_type = aggregate_type(Aggregate(func, arg), schema)
            fn = compile_expr(arg, schema) if arg is not None else None
            kernels.append(_AggKernel(func, fn, out_type))
        node = PHashAggregate(child, group_idx, sets, plan.mode, kernels)
        return node, output_plan_schema(plan, catalog)
    if isinstance(plan, SortNode):
        child, schema = _compile(plan.input, stats, catalog)
        names = [c.name for c in schema.to_schema().columns]
        keys = []
        for name, ascending in plan.keys:
            if name not in names:
                raise PlanError(f"sort key {name!r} not found")
            keys.append((names.index(name), ascending))
        return PSort(child, keys), schema
    if isinstance(plan, LimitNode):
        child, schema = _compile(plan.input, stats, catalog)
        return PLimit(child, plan.n, isinstance(plan.input, SortNode)), schema
    raise PlanError(f"unknown plan node {plan!r}")


def execute(compiled: CompiledQuery, workers: int = 1) -> Relation:
    """Run a physical plan with the given worker count."""
    if workers < 1:
        raise ExecutionError("worker count must be >= 1")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        partitions = compiled.root.run(pool, workers)
    return Relation(compiled.schema, partitions)
