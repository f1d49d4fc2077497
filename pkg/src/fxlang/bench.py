"""Benchmark grids: counters crossed with predicates, metered in machine
transitions.

Ticks are semantic, so the emitted CSV is byte-identical across runs and
machines; wall-clock time never appears in it.  Rows whose counter does
not accept the predicate's class are marked SKIPPED rather than run.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional

from fxlang import countlib as cl
from fxlang.errors import FuelExhausted
from fxlang.machine import DEFAULT_FUEL

# Size caps keeping the default grid within desk-scale budgets.
IMPL_CAPS = {
    "naivecount": 12,
    "lazycount": 12,
    "bestshot": 12,
    "bergercount": 12,
    "effcount": 14,
    "effcount_rep": 14,
    "effcount_miss": 14,
    "effsearch": 14,
    "effsearch_cons": 14,
}
# The fail-fast queens predicate prunes, so n = 5 stays cheap; the eager
# variant always walks all 2^(n*n) board-reading paths and has to stop
# earlier.
PRED_CAPS = {"queens": 5, "queens_eager": 4}

CSV_HEADER = "impl,pred,variant,n,count,ticks,envOps,ticks_per_2n,ticks_per_n2n"


@dataclass(slots=True)
class BenchSpec:
    impls: list[str]
    preds: list[tuple[str, str]]  # (name, variant); variant '' for plain
    n_min: int = 2
    n_max: int = 8
    fuel: int = DEFAULT_FUEL
    reps: int = 1
    out: Optional[str] = None


def resolve_pred(name: str, variant: str) -> str:
    if variant in ("", "default"):
        return name
    combined = f"{name}_{variant}"
    if name == "queens" and variant == "failfast":
        return "queens"
    cl.get(combined)
    return combined


def parse_spec_file(text: str) -> BenchSpec:
    """Flat key=value format; '#' starts a comment.

    Keys: impls, preds (comma lists; a pred may be name:variant),
    nmin, nmax, fuel, reps, out.
    """

    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        k, v = line.split("=", 1)
        kv[k.strip()] = v.strip().strip('"')
    if "impls" not in kv or "preds" not in kv:
        raise ValueError("spec needs both `impls` and `preds`")
    impls = [s.strip() for s in kv["impls"].split(",") if s.strip()]
    preds = []
    for entry in kv["preds"].split(","):
        entry = entry.strip()
        if not entry:
            continue
        name, _, variant = entry.partition(":")
        preds.append((name, variant))
    return BenchSpec(
        impls=impls,
        preds=preds,
        n_min=int(kv.get("nmin", 2)),
        n_max=int(kv.get("nmax", 8)),
        fuel=int(kv.get("fuel", DEFAULT_FUEL)),
        reps=int(kv.get("reps", 1)),
        out=kv.get("out"),
    )


@dataclass(slots=True)
class GridRow:
    impl: str
    pred: str
    variant: str
    n: int
    status: str  # 'ok' | 'skipped:<reason>' | 'fuel'
    count: Optional[int] = None
    ticks: Optional[int] = None
    envops: Optional[int] = None
    bits: int = 0

    def csv(self) -> str:
        if self.status != "ok":
            return (
                f"{self.impl},{self.pred},{self.variant or '-'},{self.n},"
                f"{self.status.upper()},,,,"
            )
        denom = 2 ** self.bits
        per_2n = self.ticks / denom
        per_n2n = self.ticks / (self.bits * denom) if self.bits else float("inf")
        return (
            f"{self.impl},{self.pred},{self.variant or '-'},{self.n},"
            f"{self.count},{self.ticks},{self.envops},{per_2n:.6f},{per_n2n:.6f}"
        )


def _cap_for(impl: str, pred: str, default: int) -> int:
    cap = IMPL_CAPS.get(impl, default)
    if pred in PRED_CAPS:
        cap = min(cap, PRED_CAPS[pred])
    return cap


def run_grid(spec: BenchSpec) -> list[GridRow]:
    rows: list[GridRow] = []
    for impl_name in spec.impls:
        impl = cl.get(impl_name)
        for pred_name, variant in spec.preds:
            pred = cl.get(resolve_pred(pred_name, variant))
            cap = _cap_for(impl_name, pred.name, spec.n_max)
            for n in range(spec.n_min, spec.n_max + 1):
                if n > cap:
                    rows.append(
                        GridRow(impl_name, pred_name, variant, n, "skipped:over size cap")
                    )
                    continue
                pred_class = pred.class_at(n)
                if pred_class and impl.accepts and not cl.class_within(
                    pred_class, impl.accepts
                ):
                    rows.append(
                        GridRow(
                            impl_name, pred_name, variant, n,
                            f"skipped:{pred_class} outside {impl.accepts}",
                        )
                    )
                    continue
                bits = cl.predicate_bits(pred, n)
                try:
                    rep = cl.run_report(impl_name, pred.name, n, spec.fuel)
                except FuelExhausted:
                    rows.append(GridRow(impl_name, pred_name, variant, n, "fuel"))
                    continue
                for _ in range(spec.reps - 1):
                    again = cl.run_report(impl_name, pred.name, n, spec.fuel)
                    assert again.ticks == rep.ticks, "nondeterministic tick count"
                rows.append(
                    GridRow(
                        impl_name, pred_name, variant, n, "ok",
                        rep.result, rep.ticks, rep.envops, bits,
                    )
                )
    rows.sort(key=lambda r: (r.impl, r.pred, r.variant, r.n))
    return rows


def grid_csv(rows: list[GridRow]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for row in rows:
        buf.write(row.csv() + "\n")
    return buf.getvalue()
