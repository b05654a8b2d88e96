"""Bounds on hidden choice frequencies.

Over all complete datasets that agree with the observed ones and are
generated by some ranking distribution, the frequency of a hidden pair
``(D, x)`` ranges over an interval.  Its endpoints solve a linear program in
the flows on unobservable lattice arcs: observable arcs are pinned to their
polynomial values, every node balances, and the objective is the superset sum
``sum_{E >= D} r(E \\ x, E)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from .bm import BMTable, bm_table
from .errors import MenuOutsideRemarkScope, MenusNotFull, NotRationalizable, PairObservable
from .flows import LatticeFlow, RankingDistribution, all_arcs
from .lp import LinearProgram, solve, verify
from .model import IncompleteDataset, bits, format_decimal, format_fraction, set_key, submasks, supersets
from .network import decompose_flow, node_deltas

METHODS = ("naive", "ru-monolithic", "ru-decomposed", "oracle")


@dataclass(frozen=True)
class IdentifiedInterval:
    """Interval of a hidden frequency.

    Attributes:
        pair: the hidden pair ``(D, x)``.
        lower, upper: exact endpoints.
        method: how the interval was computed.
        certificates: distributions attaining ``(lower, upper)``, when requested.
    """

    pair: tuple
    lower: Fraction
    upper: Fraction
    method: str
    certificates: tuple | None = None

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def contains(self, value) -> bool:
        return self.lower <= value <= self.upper

    def within(self, other: "IdentifiedInterval") -> bool:
        return other.lower <= self.lower and self.upper <= other.upper


def _hidden_pair(ds: IncompleteDataset, menu: int, x: int):
    inst = ds.instance
    if not menu >> x & 1:
        raise PairObservable(f"alternative {x} is not in menu {bits(menu)}")
    if inst.is_observable(menu, x):
        raise PairObservable(f"pair {inst.fmt_pair((menu, x))} is observable")


def naive_bounds(ds: IncompleteDataset, menu: int, x: int) -> IdentifiedInterval:
    """Residual mass bound from lumping hidden alternatives into one outside option.

    Only defined for offered menus containing every hidden alternative.
    """
    _hidden_pair(ds, menu, x)
    inst = ds.instance
    if not inst.has_menu(menu) or menu & inst.unobservable != inst.unobservable:
        raise MenuOutsideRemarkScope(
            f"naive bounds need an offered menu containing every hidden alternative, got {inst.fmt_set(menu)}"
        )
    rest = 1 - sum((ds.freq[(menu, y)] for y in bits(menu & inst.observable)), Fraction(0))
    return IdentifiedInterval((menu, x), Fraction(0), rest, "naive")


# ---------------------------------------------------------------------------
# the flow program

@dataclass
class _FlowProgram:
    lp: LinearProgram
    variables: dict  # arc -> variable index
    constant: Fraction  # observable part of the objective
    bm: BMTable


def _observable_nonnegative(ds: IncompleteDataset, bm: BMTable):
    neg = bm.negatives()
    if neg:
        pair, v = neg[0]
        raise NotRationalizable(f"polynomial at {ds.instance.fmt_pair(pair)} is negative ({v})")


def _flow_program(ds: IncompleteDataset, menu: int, x: int, maximize: bool, bm: BMTable, deltas: dict, nodes=None):
    """Balance program over unobservable arcs whose heads lie in ``nodes``."""
    inst = ds.instance
    n = inst.n
    nodes = range(inst.full + 1) if nodes is None else nodes
    node_set = set(nodes)
    lp = LinearProgram(maximize=maximize)
    var = {}
    for arc in all_arcs(n):
        if arc not in bm and arc[0] in node_set:
            var[arc] = lp.add_variable(0, lower=0)
    for node in nodes:
        coeffs = {}
        for y in range(n):
            bit = 1 << y
            if node & bit:
                j = var.get((node, y))
                if j is not None:
                    coeffs[j] = coeffs.get(j, 0) + 1
            else:
                j = var.get((node | bit, y))
                if j is not None:
                    coeffs[j] = coeffs.get(j, 0) - 1
        lp.add_row(coeffs, "==", deltas[node])
    constant = Fraction(0)
    for e in supersets(menu, inst.full):
        arc = (e, x)
        if arc in bm:
            constant += bm[arc]
        elif arc in var:
            lp.objective[var[arc]] += 1
    return _FlowProgram(lp, var, constant, bm)


def _optimum(prog: _FlowProgram):
    out = solve(prog.lp)
    assert verify(prog.lp, out)
    if out.status == "infeasible":
        raise NotRationalizable("no nonnegative flow balances the lattice")
    if out.status == "unbounded":
        raise RuntimeError("flow program reported unbounded; the balance system should bound it")
    return out


def _prepare(ds: IncompleteDataset):
    bm = bm_table(ds)
    _observable_nonnegative(ds, bm)
    return bm, node_deltas(ds, bm)


def ru_bounds(ds: IncompleteDataset, menu: int, x: int, certificates: bool = False) -> IdentifiedInterval:
    """Sharp interval for a hidden pair from the full lattice program."""
    _hidden_pair(ds, menu, x)
    bm, deltas = _prepare(ds)
    ends = []
    certs = []
    for maximize in (False, True):
        prog = _flow_program(ds, menu, x, maximize, bm, deltas)
        out = _optimum(prog)
        ends.append(prog.constant + out.value)
        if certificates:
            certs.append(_glue(ds, prog, out.x))
    return IdentifiedInterval((menu, x), ends[0], ends[1], "ru-monolithic", tuple(certs) if certificates else None)


def ru_bounds_decomposed(ds: IncompleteDataset, menu: int, x: int) -> IdentifiedInterval:
    """Same interval, solved block by block over the hidden sublattices.

    With every menu offered, unobservable arcs add hidden alternatives and
    stay inside a block ``{A' | E : E subset of hidden}``; the blocks are
    independent and only those with ``A' >= D \\ hidden`` touch the objective.
    """
    inst = ds.instance
    if not inst.all_menus:
        raise MenusNotFull("the block decomposition needs every nonempty menu to be offered")
    _hidden_pair(ds, menu, x)
    bm, deltas = _prepare(ds)
    hidden, obs = inst.unobservable, inst.observable
    base = menu & obs
    lower = upper = Fraction(0)
    for a in sorted(submasks(obs), key=set_key):
        block = [a | e for e in sorted(submasks(hidden))]
        if a & base == base:
            for maximize in (False, True):
                prog = _flow_program(ds, menu, x, maximize, bm, deltas, nodes=block)
                out = _optimum(prog)
                if maximize:
                    upper += out.value
                else:
                    lower += out.value
        else:
            # blocks off the objective must still balance
            prog = _flow_program(ds, menu, x, False, bm, deltas, nodes=block)
            prog.lp.objective = [Fraction(0)] * prog.lp.num_vars
            _optimum(prog)
    # observable arcs into supersets of the menu (none when x is hidden)
    constant = sum((bm[(e, x)] for e in supersets(menu, inst.full) if (e, x) in bm), Fraction(0))
    return IdentifiedInterval((menu, x), constant + lower, constant + upper, "ru-decomposed")


def block_count(ds: IncompleteDataset, menu: int) -> int:
    """Number of blocks whose optimum enters the decomposed bound."""
    obs = ds.instance.observable
    base = menu & obs
    return sum(1 for a in submasks(obs) if a & base == base)


def _glue(ds: IncompleteDataset, prog: _FlowProgram, point) -> RankingDistribution:
    vals = dict(prog.bm.values)
    for arc, j in prog.variables.items():
        vals[arc] = point[j]
    flow = LatticeFlow(ds.instance.n, {a: v for a, v in vals.items() if v != 0})
    return decompose_flow(flow, ds.instance.alternatives)


def bound_certificate(ds: IncompleteDataset, menu: int, x: int, endpoint: str) -> RankingDistribution:
    """Distribution matching the observables and attaining one endpoint."""
    if endpoint not in ("upper", "lower"):
        raise ValueError("endpoint must be 'upper' or 'lower'")
    _hidden_pair(ds, menu, x)
    bm, deltas = _prepare(ds)
    prog = _flow_program(ds, menu, x, endpoint == "upper", bm, deltas)
    out = _optimum(prog)
    return _glue(ds, prog, out.x)


# ---------------------------------------------------------------------------
# reporting

CSV_COLUMNS = ["menu", "alternative", "lower", "upper", "method", "naive_lower", "naive_upper"]


def interval_rows(ds: IncompleteDataset, intervals, naive: dict | None = None) -> list:
    """Rows for the CSV report; ``naive`` maps pairs to naive intervals when defined."""
    inst = ds.instance
    naive = naive or {}
    rows = []
    for iv in intervals:
        nv = naive.get(iv.pair)
        rows.append(
            {
                "menu": inst.fmt_set(iv.pair[0]),
                "alternative": inst.alternatives[iv.pair[1]],
                "lower": format_fraction(iv.lower),
                "upper": format_fraction(iv.upper),
                "method": iv.method,
                "naive_lower": "" if nv is None else format_fraction(nv.lower),
                "naive_upper": "" if nv is None else format_fraction(nv.upper),
            }
        )
    return rows


def intervals_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def intervals_table(ds: IncompleteDataset, intervals, naive: dict | None = None, digits: int = 6) -> str:
    """Aligned text table with decimal renderings."""
    inst = ds.instance
    naive = naive or {}
    head = ["menu", "alt", "lower", "upper", "method", "naive"]
    body = []
    for iv in intervals:
        nv = naive.get(iv.pair)
        body.append(
            [
                inst.fmt_set(iv.pair[0]),
                str(inst.alternatives[iv.pair[1]]),
                format_decimal(iv.lower, digits),
                format_decimal(iv.upper, digits),
                iv.method,
                "-" if nv is None else f"[{format_decimal(nv.lower, digits)}, {format_decimal(nv.upper, digits)}]",
            ]
        )
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [head] + body]
    return "\n".join(lines) + "\n"
