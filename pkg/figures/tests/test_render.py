"""Render every recipe from schema-conformant CSVs; check determinism and
diagnostics."""

import numpy as np
import pytest

from figrender import RECIPES, render
from figrender.recipes import RecipeError, read_table


def write_csv(path, columns, rows, provenance=()):
    lines = [f"# {k} = {v}" for k, v in provenance]
    lines.append(",".join(columns))
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def tables(tmp_path):
    t = np.linspace(0.0, 2.0, 41)
    lam = np.linspace(0.0, 3.9, 31)
    made = {}
    made["rho_phi"] = write_csv(
        tmp_path / "rho_phi.csv", ("t", "rho", "phi"),
        np.column_stack([t, 0.24 * np.exp(-t), 1.05 * np.exp(-0.01 * t)]))
    made["z_curve"] = write_csv(
        tmp_path / "z_curve.csv", ("t", "z"),
        np.column_stack([t, 0.33 - 0.37 * t]), provenance=[("lambda", 3.1)])
    m_col = np.minimum(0.16 + 0.02 * lam, 0.22 + 0.01 * lam)
    made["call_sweep"] = write_csv(
        tmp_path / "call_sweep.csv", ("lambda", "M", "rstar", "utility"),
        np.column_stack([lam, m_col, np.maximum(lam - 2.6, 0.0) / 3,
                         2.5 + 0.3 * lam - 0.05 * lam**2]))
    for i, lam_pick in enumerate((1.0, 3.1)):
        w = np.linspace(0.1, 0.5, 21)
        cdf = np.clip((w - 0.18) * (2.0 + lam_pick), 0.0, 1.0)
        cdf[0] = 0.0
        made[f"cdf{i}"] = write_csv(
            tmp_path / f"cdf_lambda_{lam_pick:g}.csv",
            ("wealth_level", "cdf"), np.column_stack([w, cdf]),
            provenance=[("lambda", lam_pick)])
    w0 = np.linspace(0.05, 1.0, 12)
    rows = []
    for code in (0, 1, 2):
        for x in w0:
            feasible = 0.0 if (code == 0 and x < 0.06) or \
                (code == 1 and x < 0.15) else 1.0
            util = (1.5 + 0.9 * np.sqrt(x) - 0.05 * code) * feasible
            ce = (x + 0.02 * (2 - code) / 2) * feasible
            rows.append((x, code, x * feasible, util, ce, feasible))
    made["onetouch_utility"] = write_csv(
        tmp_path / "onetouch_utility.csv",
        ("w0", "mode", "M", "utility", "ce", "feasible"), rows,
        provenance=[("mode_codes", "semi_static=0 dynamic_only=1 no_sale=2")])
    k = np.linspace(0.5, 1.8, 21)
    made["ce_k"] = write_csv(
        tmp_path / "onetouch_ce_k.csv", ("K", "ce"),
        np.column_stack([k, 0.11 - 0.05 * (k - 1.05) ** 2]),
        provenance=[("hobson_optimal_k", 0.989)])
    return made


FIG_INPUTS = {
    "fig1": ["rho_phi"],
    "fig2": ["z_curve"],
    "fig3": ["call_sweep"],
    "fig4": ["call_sweep"],
    "fig5": ["call_sweep"],
    "fig6": ["cdf0", "cdf1"],
    "fig7": ["onetouch_utility"],
    "fig8": ["onetouch_utility"],
    "fig9": ["ce_k"],
}


@pytest.mark.parametrize("fig_id", sorted(RECIPES))
def test_recipe_renders(fig_id, tables, tmp_path):
    inputs = [tables[name] for name in FIG_INPUTS[fig_id]]
    out = render(fig_id, inputs, tmp_path / f"{fig_id}.png")
    data = out.read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(data) > 5_000


@pytest.mark.parametrize("fig_id", ["fig3", "fig6", "fig7"])
def test_byte_stable_rerender(fig_id, tables, tmp_path):
    inputs = [tables[name] for name in FIG_INPUTS[fig_id]]
    a = render(fig_id, inputs, tmp_path / "a.png").read_bytes()
    b = render(fig_id, inputs, tmp_path / "b.png").read_bytes()
    assert a == b


def test_missing_column_diagnostic(tables, tmp_path):
    bad = write_csv(tmp_path / "bad.csv", ("lambda", "M"),
                    [[0.0, 0.1], [1.0, 0.2]])
    with pytest.raises(RecipeError, match="missing column 'utility'"):
        render("fig5", [bad], tmp_path / "x.png")
    assert not (tmp_path / "x.png").exists()


def test_empty_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("lambda,M,rstar,utility\n")
    with pytest.raises(RecipeError, match="no data rows"):
        render("fig3", [empty], tmp_path / "y.png")
    assert not (tmp_path / "y.png").exists()


def test_unknown_figure_id(tables, tmp_path):
    with pytest.raises(RecipeError, match="unknown figure id"):
        render("fig10", [tables["call_sweep"]], tmp_path / "z.png")


def test_wrong_input_count(tables, tmp_path):
    with pytest.raises(RecipeError, match="exactly one"):
        render("fig3", [tables["call_sweep"], tables["z_curve"]],
               tmp_path / "w.png")


def test_cli_roundtrip(tables, tmp_path, capsys):
    from figrender.cli import main
    out = tmp_path / "fig9.png"
    code = main(["render", "--fig", "fig9", "--in", str(tables["ce_k"]),
                 "--out", str(out)])
    assert code == 0 and out.exists()
    assert main(["render", "--fig", "nope", "--in", str(tables["ce_k"]),
                 "--out", str(out)]) == 2


def test_provenance_parsed(tables):
    header, rows, prov = read_table(tables["ce_k"])
    assert prov["hobson_optimal_k"] == "0.989"
    assert header == ["K", "ce"]
