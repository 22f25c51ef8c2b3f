"""End-to-end pipeline: CLI runs produce every CSV, then the figures
package renders fig1 through fig9 from them.

Requires both packages installed (``pip install -e . -e figures/``).
"""

import pathlib
import subprocess
import sys

out = pathlib.Path(__file__).parent / "out" / "figures"
out.mkdir(parents=True, exist_ok=True)


def cli(*args):
    cmd = [sys.executable, "-m", "intrinsicopt.cli", *map(str, args)]
    print("$", " ".join(cmd[2:]))
    subprocess.run(cmd, check=True)


cli("call-sweep", "--out", out, "--set", "call.lambda_points=40")
cli("call-cdf", "--out", out)
cli("onetouch-utility", "--out", out, "--set", "onetouch.w0_points=24",
    "--set", "onetouch.lattice_steps=200")
cli("onetouch-ce-k", "--out", out, "--set", "onetouch.K_points=23",
    "--set", "onetouch.K_min=0.6", "--set", "onetouch.K_max=1.7")

recipes = [
    ("fig1", ["rho_phi.csv"]),
    ("fig2", ["z_curve.csv"]),
    ("fig3", ["call_sweep.csv"]),
    ("fig4", ["call_sweep.csv"]),
    ("fig5", ["call_sweep.csv"]),
    ("fig6", ["cdf_lambda_1.csv", "cdf_lambda_2.csv", "cdf_lambda_3.1.csv",
              "cdf_lambda_3.8.csv"]),
    ("fig7", ["onetouch_utility.csv"]),
    ("fig8", ["onetouch_utility.csv"]),
    ("fig9", ["onetouch_ce_k.csv"]),
]
for fig, inputs in recipes:
    args = [sys.executable, "-m", "figrender", "render", "--fig", fig,
            "--out", str(out / f"{fig}.png")]
    for name in inputs:
        args += ["--in", str(out / name)]
    print("$", " ".join(args[2:]))
    subprocess.run(args, check=True)

print(f"figures written to {out}")
