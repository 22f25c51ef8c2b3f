"""Figure recipes: which CSV columns each figure needs and how it draws."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

_MODE_NAMES = {0: "with static hedge", 1: "dynamic only", 2: "no sale"}
_MODE_STYLE = {0: ("tab:blue", "-"), 1: ("tab:green", "-"),
               2: ("tab:orange", "--")}


class RecipeError(ValueError):
    """Input table unusable for the requested figure."""


def read_table(path):
    """Parse one engine CSV: '#' provenance comments, header, float rows."""
    provenance = {}
    header = None
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            provenance[key.strip()] = value.strip()
        elif header is None:
            header = [tok.strip() for tok in line.split(",")]
        else:
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise RecipeError(f"{path}:{lineno}: {exc}") from exc
    if header is None or not rows:
        raise RecipeError(f"{path}: no data rows")
    return header, np.asarray(rows), provenance


def column(path, header, rows, name):
    if name not in header:
        raise RecipeError(f"{path}: missing column {name!r} "
                          f"(has {', '.join(header)})")
    return rows[:, header.index(name)]


def _single_input(paths):
    if len(paths) != 1:
        raise RecipeError(f"recipe needs exactly one input CSV, got "
                          f"{len(paths)}")
    return paths[0]


# --------------------------------------------------------------------- #
# draw functions: (axes, input paths) -> None
# --------------------------------------------------------------------- #

def _draw_rho_phi(ax, paths):
    path = _single_input(paths)
    header, rows, _ = read_table(path)
    t = column(path, header, rows, "t")
    ax.plot(t, column(path, header, rows, "rho"), label="rho")
    ax.plot(t, column(path, header, rows, "phi"), label="phi")
    ax.set_xlabel("t")
    ax.legend()


def _draw_z(ax, paths):
    path = _single_input(paths)
    header, rows, prov = read_table(path)
    ax.plot(column(path, header, rows, "t"), column(path, header, rows, "z"))
    ax.axhline(0.0, lw=0.6, color="0.5")
    ax.set_xlabel("t")
    label = prov.get("lambda")
    ax.set_ylabel("z" + (f" (quantity {label})" if label else ""))


def _sweep_panel(y_col):
    def draw(ax, paths):
        path = _single_input(paths)
        header, rows, _ = read_table(path)
        ax.plot(column(path, header, rows, "lambda"),
                column(path, header, rows, y_col))
        ax.set_xlabel("lambda")
        ax.set_ylabel(y_col)
    return draw


def _draw_cdfs(ax, paths):
    if not paths:
        raise RecipeError("recipe needs at least one input CSV")
    for path in paths:
        header, rows, prov = read_table(path)
        w = column(path, header, rows, "wealth_level")
        c = column(path, header, rows, "cdf")
        label = prov.get("lambda", Path(path).stem)
        ax.plot(w, c, drawstyle="steps-post", label=f"quantity {label}")
    ax.set_xlabel("terminal wealth")
    ax.set_ylabel("cdf")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()


def _feasible_mode_rows(path, header, rows, code):
    mode = column(path, header, rows, "mode")
    feas = column(path, header, rows, "feasible")
    mask = (mode == code) & (feas > 0)
    return (column(path, header, rows, "w0")[mask],
            column(path, header, rows, "utility")[mask],
            column(path, header, rows, "ce")[mask])


def _draw_onetouch_utility(ax, paths):
    path = _single_input(paths)
    header, rows, _ = read_table(path)
    drew = False
    for code, name in _MODE_NAMES.items():
        w0, util, _ = _feasible_mode_rows(path, header, rows, code)
        if len(w0):
            color, style = _MODE_STYLE[code]
            ax.plot(w0, util, style, color=color, label=name)
            drew = True
    if not drew:
        raise RecipeError(f"{path}: no feasible rows to plot")
    ax.set_xlabel("initial wealth w0")
    ax.set_ylabel("expected utility")
    ax.legend()


def _draw_ce_difference(ax, paths):
    if not paths:
        raise RecipeError("recipe needs at least one input CSV")
    for path in paths:
        header, rows, prov = read_table(path)
        w_semi, _, ce_semi = _feasible_mode_rows(path, header, rows, 0)
        w_dyn, _, ce_dyn = _feasible_mode_rows(path, header, rows, 1)
        both = np.intersect1d(w_semi, w_dyn)
        if len(both) == 0:
            raise RecipeError(f"{path}: no wealth level feasible for both "
                              "hedge modes")
        diff = (ce_semi[np.isin(w_semi, both)]
                - ce_dyn[np.isin(w_dyn, both)])
        ax.plot(both, diff, label=Path(path).stem)
    ax.axhline(0.0, lw=0.6, color="0.5")
    ax.set_xlabel("initial wealth w0")
    ax.set_ylabel("certainty-equivalent gain of the static hedge")
    if len(paths) > 1:
        ax.legend()


def _draw_ce_vs_strike(ax, paths):
    path = _single_input(paths)
    header, rows, prov = read_table(path)
    ax.plot(column(path, header, rows, "K"), column(path, header, rows, "ce"))
    k_star = prov.get("hobson_optimal_k")
    if k_star is not None:
        ax.axvline(float(k_star), color="0.4", ls=":",
                   label="cost-minimal strike")
        ax.legend()
    ax.set_xlabel("hedge strike K")
    ax.set_ylabel("certainty equivalent")


@dataclass(frozen=True)
class FigureRecipe:
    fig_id: str
    title: str
    draw: callable
    multi_input: bool = False


RECIPES = {
    "fig1": FigureRecipe("fig1", "extra hedging cost and tilt weight on the "
                         "strike line", _draw_rho_phi),
    "fig2": FigureRecipe("fig2", "constraint index z along the strike line",
                         _draw_z),
    "fig3": FigureRecipe("fig3", "wealth floor M against position size",
                         _sweep_panel("M")),
    "fig4": FigureRecipe("fig4", "binding horizon against position size",
                         _sweep_panel("rstar")),
    "fig5": FigureRecipe("fig5", "expected utility against position size",
                         _sweep_panel("utility")),
    "fig6": FigureRecipe("fig6", "terminal wealth distribution",
                         _draw_cdfs, multi_input=True),
    "fig7": FigureRecipe("fig7", "one-touch sale: utility by hedge mode",
                         _draw_onetouch_utility),
    "fig8": FigureRecipe("fig8", "certainty-equivalent gain of the static "
                         "hedge", _draw_ce_difference, multi_input=True),
    "fig9": FigureRecipe("fig9", "certainty equivalent against hedge strike",
                         _draw_ce_vs_strike),
}


def render(fig_id, inputs, out_path):
    """Render one figure from its input CSVs; deterministic bytes."""
    if fig_id not in RECIPES:
        raise RecipeError(f"unknown figure id {fig_id!r}; expected one of "
                          f"{', '.join(sorted(RECIPES))}")
    recipe = RECIPES[fig_id]
    fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=150)
    try:
        recipe.draw(ax, [str(p) for p in inputs])
        ax.set_title(recipe.title)
        fig.tight_layout()
        fig.savefig(out_path, format="png",
                    metadata={"Software": "figrender"})
    finally:
        plt.close(fig)
    return Path(out_path)
