"""Choosing the convergence-control parameters hbar and n.

The truncated solution depends on hbar and n only through hbar/n, and the
hbar-curve at a probe point is flat around hbar/n = -1, where the truncated
series reproduces the exact kink.

Run with ``python3 demos/convergence_control.py``.
"""

from qhatm import QhatmParams, convergence_report, default_grid, get_model, hcurve, qhatm_solve


def main():
    model = get_model("alw")
    params = QhatmParams(alpha=1.0, hbar=-1.0, n=1, order=3, grid=default_grid(model, 3))

    x, t = 1.0, 0.3
    print(f"hbar-curve of u at x={x}, t={t} (exact {model.exact_u(x, t):.12f})")
    for hbar, u, _ in hcurve(model, params, (-2.0, 0.5, 11), probe=(x, t)):
        print(f"  hbar={hbar:+.2f}  u={u:.12f}")

    for hbar, n in [(-1.0, 1), (-2.0, 2), (-0.5, 1)]:
        report = convergence_report(qhatm_solve(model, params.replace(hbar=hbar, n=n)))
        rho = "n/a" if report.rho is None else f"{report.rho:.2e}"
        print(f"\nhbar={hbar}, n={n}: rho={rho}, converging={report.converging}")
        for check in report.bound_check:
            bound = "n/a" if check.bound is None else f"{check.bound:.2e}"
            print(f"  i={check.i}: tail={check.tail:.2e} bound={bound}")


if __name__ == "__main__":
    main()
