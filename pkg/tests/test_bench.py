from fxlang import bench as bn


def small_spec(**kw):
    base = dict(
        impls=["effcount", "naivecount"],
        preds=[("odd", ""), ("I2", "")],
        n_min=2,
        n_max=4,
    )
    base.update(kw)
    return bn.BenchSpec(**base)


def test_csv_deterministic():
    a = bn.grid_csv(bn.run_grid(small_spec()))
    b = bn.grid_csv(bn.run_grid(small_spec()))
    assert a == b
    assert a.splitlines()[0] == bn.CSV_HEADER


def test_class_mismatch_rows_are_skipped():
    rows = bn.run_grid(small_spec())
    skipped = [r for r in rows if r.impl == "effcount" and r.pred == "I2"]
    assert skipped and all(r.status.startswith("skipped:") for r in skipped)
    assert "general" in skipped[0].status


def test_ticks_monotone_in_n():
    rows = bn.run_grid(small_spec(impls=["effcount"], preds=[("odd", "")], n_max=7))
    ticks = [r.ticks for r in rows if r.status == "ok"]
    assert ticks == sorted(ticks) and len(ticks) == 6


def test_embedded_standard_predicates_gate_correctly():
    # T0 is only 0-standard; at n >= 1 the plain effectful counter must skip it
    rows = bn.run_grid(small_spec(impls=["effcount", "effcount_miss"],
                                  preds=[("T0", "")], n_min=1, n_max=3))
    eff = [r for r in rows if r.impl == "effcount"]
    miss = [r for r in rows if r.impl == "effcount_miss"]
    assert all(r.status.startswith("skipped:") for r in eff)
    assert all(r.status == "ok" and r.count == 2 ** r.n for r in miss)


def test_queens_variant_resolution_and_cap():
    rows = bn.run_grid(
        small_spec(
            impls=["effcount_miss"],
            preds=[("queens", "failfast")],
            n_min=4,
            n_max=6,
        )
    )
    by_n = {r.n: r for r in rows}
    assert by_n[4].status == "ok" and by_n[4].count == 2
    assert by_n[5].status == "ok" and by_n[5].count == 10
    assert by_n[6].status.startswith("skipped:over size cap")

    # the eager variant reads the whole board: capped much earlier
    rows = bn.run_grid(
        small_spec(
            impls=["effcount"],
            preds=[("queens", "eager")],
            n_min=2,
            n_max=3,
        )
    )
    by_n = {r.n: r for r in rows}
    assert by_n[2].status == "ok" and by_n[2].count == 0
    assert by_n[3].status == "ok" and by_n[3].count == 0
    rows = bn.run_grid(
        small_spec(impls=["effcount"], preds=[("queens", "eager")], n_min=5, n_max=6)
    )
    assert all(r.status.startswith("skipped:over size cap") for r in rows)


def test_derived_columns_recomputed():
    rows = bn.run_grid(small_spec(impls=["effcount"], preds=[("odd", "")], n_max=5))
    line = [r for r in rows if r.n == 5][0].csv()
    parts = line.split(",")
    ticks, per2n = int(parts[5]), float(parts[7])
    assert abs(per2n - ticks / 32) < 1e-9


def test_spec_file_parsing():
    text = """
# comment
impls = effcount, naivecount
preds = odd, queens:eager
nmin = 2
nmax = 5
reps = 2
"""
    spec = bn.parse_spec_file(text)
    assert spec.impls == ["effcount", "naivecount"]
    assert spec.preds == [("odd", ""), ("queens", "eager")]
    assert spec.n_min == 2 and spec.n_max == 5 and spec.reps == 2


def test_repetitions_check_determinism():
    rows = bn.run_grid(small_spec(impls=["effcount"], preds=[("odd", "")],
                                  n_max=4, reps=3))
    assert all(r.status == "ok" for r in rows)
