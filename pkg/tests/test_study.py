import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bakhvalov_nipg.harness.study import (
    FLAG_THRESHOLD,
    SweepConfig,
    compute_cell,
    compute_rate,
    config_from_dict,
    emit_table,
    format_sci3,
    preset,
    run_study,
)

E = "exp(-2*(1-x)/eps)"
LAYER_AS_EXPR = {
    "b": "3 - x",
    "c": "1",
    "f": f"3 + {E} + 2*x*(x-1)*{E}/eps",
    "u": f"x - x*{E}",
    "uprime": f"1 - {E} - 2*x*{E}/eps",
}


def test_rate_examples():
    assert compute_rate(0.695e-1, 0.179e-1) == pytest.approx(1.96, abs=0.005)
    assert compute_rate(0.3, 0.3) == 0.0
    assert compute_rate(8.0, 1.0) == pytest.approx(3.0, abs=1e-15)
    for bad in [(0.0, 1.0), (1.0, -1.0)]:
        with pytest.raises(ValueError):
            compute_rate(*bad)


@pytest.mark.parametrize("value, text", [
    (0.0695, "0.695E-1"),
    (0.0179, "0.179E-1"),
    (4.53e-6, "0.453E-5"),
    (0.09996, "0.100E0"),
    (1.0, "0.100E1"),
    (123.4, "0.123E3"),
    (0.1, "0.100E0"),
])
def test_format_sci3(value, text):
    assert format_sci3(value) == text


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-300, 1e300))
def test_format_sci3_round_trip(value):
    text = format_sci3(value)
    mant = float(text.split("E")[0])
    assert 0.1 <= mant < 1.0
    assert float(text) == pytest.approx(value, rel=5e-3)


def small_config(**kw):
    base = dict(k=[1], eps=[1e-4, 1e-6], N=[8, 16, 32], alpha=2.0, roundoff_probes=1)
    base.update(kw)
    return SweepConfig(**base)


def test_rates_filled_columnwise():
    table = run_study(small_config())
    for eps in table.epsilons:
        cells = [table.cell(1, eps, N) for N in table.Ns]
        assert cells[-1].rate is None
        for a, b in zip(cells, cells[1:]):
            assert a.rate == pytest.approx(math.log(a.error / b.error) / math.log(2), abs=1e-12)


def test_single_N_has_no_rates():
    table = run_study(small_config(N=[16]))
    assert all(c.rate is None for c in table.cells.values())
    assert "--" in emit_table(table, "md")


def test_builtin_and_expression_problems_agree():
    a = run_study(small_config())
    b = run_study(small_config(problem="expr", expressions=LAYER_AS_EXPR))
    for key, cell in a.cells.items():
        assert b.cells[key].error == pytest.approx(cell.error, rel=1e-12)


@pytest.mark.parametrize("norm", ["energy", "interp"])
def test_other_norms(norm):
    table = run_study(small_config(norm=norm, eps=[1e-6]))
    errs = [table.cell(1, 1e-6, N).error for N in table.Ns]
    assert all(e > 0 for e in errs)
    assert errs[0] > errs[-1]


def test_constant_penalty_changes_result():
    a = run_study(small_config(eps=[1e-6], N=[16]))
    b = run_study(small_config(eps=[1e-6], N=[16], penalty="const:5"))
    assert a.cell(1, 1e-6, 16).error != b.cell(1, 1e-6, 16).error


@pytest.mark.parametrize("bad", [
    dict(N=[7]), dict(N=[6]), dict(N=[]), dict(eps=[0.0]), dict(eps=[1.5]),
    dict(sigma=-1.0), dict(alpha=0.0), dict(norm="max"), dict(penalty="weird"),
    dict(penalty="const:-1"), dict(k=[0]), dict(problem="other"),
    dict(sigma=4.0, eps=[0.3]),  # transition point below 1/2
    dict(problem="expr", expressions={"b": "3 - x", "c": "1"}),
    dict(problem="expr", expressions={**LAYER_AS_EXPR, "b": "1 - x"}),  # b >= alpha fails
])
def test_invalid_configs(bad):
    with pytest.raises(ValueError):
        small_config(**bad).validate()


def test_cell_failure_is_recorded():
    # c - b'/2 turns negative on (0, 1/2): the problem is rejected inside the cell
    cfg = small_config(problem="expr", expressions={**LAYER_AS_EXPR, "c": "1/(x - 0.5)"}, eps=[1e-4])
    cell = compute_cell(cfg, 1, 1e-4, 8)
    assert cell.failure and cell.error is None


def test_markdown_layout():
    table = run_study(small_config())
    md = emit_table(table, "md")
    header = [line for line in md.splitlines() if line.startswith("| N")][0]
    assert header.count("r_N") == 2 and header.count("e_N") == 2
    assert "eps=1e-4" in header and "eps=1e-6" in header
    assert format_sci3(table.cell(1, 1e-4, 8).error) in md


def test_empty_table_is_header_only():
    from bakhvalov_nipg.harness.study import ConvergenceTable
    empty = ConvergenceTable([], [], [], {})
    assert emit_table(empty, "csv").strip() == emit_table(empty, "csv").splitlines()[0]
    assert emit_table(empty, "md").strip() == ""


def test_csv_round_trip_and_rate_recomputation():
    table = run_study(small_config())
    rows = list(csv.DictReader(io.StringIO(emit_table(table, "csv"))))
    assert list(rows[0])[:6] == ["k", "eps", "N", "error", "rate", "cond_flag"]
    by_key = {(int(r["k"]), float(r["eps"]), int(r["N"])): r for r in rows}
    for key, cell in table.cells.items():
        row = by_key[key]
        assert float(row["error_full"]) == cell.error
        assert row["error"] == format_sci3(cell.error)
        assert int(row["cond_flag"]) == int(cell.flagged)
    for (k, eps, N), row in by_key.items():
        if row["rate"]:
            nxt = by_key[(k, eps, 2 * N)]
            again = compute_rate(float(row["error_full"]), float(nxt["error_full"]))
            assert abs(again - float(row["rate"])) <= 1e-12


def test_parallel_determinism():
    cfg = small_config(k=[1, 2])
    serial = emit_table(run_study(cfg), "csv")
    cfg.jobs = 8
    assert emit_table(run_study(cfg), "csv") == serial


def test_flag_in_both_formats():
    # k=3, eps=1e-9, N=512: deep inside the round-off dominated regime
    cfg = small_config(k=[3], eps=[1e-9], N=[256, 512], roundoff_probes=2)
    table = run_study(cfg)
    cell = table.cell(3, 1e-9, 512)
    assert cell.flagged and cell.condition > FLAG_THRESHOLD
    md = emit_table(table, "md")
    assert format_sci3(cell.error) + "*" in md
    row = [r for r in csv.DictReader(io.StringIO(emit_table(table, "csv"))) if r["N"] == "512"][0]
    assert row["cond_flag"] == "1"


def test_stable_cells_not_flagged():
    table = run_study(small_config(eps=[1e-5], N=[8, 64, 512]))
    assert not any(c.flagged for c in table.cells.values())


def test_roundoff_probe_is_deterministic():
    cfg = small_config(k=[2], eps=[1e-9], N=[128], roundoff_probes=2)
    a = compute_cell(cfg, 2, 1e-9, 128)
    b = compute_cell(cfg, 2, 1e-9, 128)
    assert a.roundoff_sensitivity == b.roundoff_sensitivity


def test_presets():
    cfg = preset("table3")
    assert cfg.k == [3] and cfg.eps == [1e-5, 1e-6, 1e-7, 1e-8, 1e-9]
    assert cfg.N == [8, 16, 32, 64, 128, 256, 512, 1024]
    assert preset("table4").eps == [1e-1, 1e-2, 1e-3, 1e-4]
    for name in ["table4", "table5", "table6"]:
        preset(name).validate()


def test_config_from_dict():
    cfg = config_from_dict({"k": [2], "eps": [1e-3], "N": [8]})
    assert cfg.k == [2]
    with pytest.raises(ValueError):
        config_from_dict({"bogus": 1})
