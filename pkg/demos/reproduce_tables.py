"""Solve the four reference configurations and compare with the exact kink.

Run with ``python3 demos/reproduce_tables.py``.
"""

import time

from qhatm.analysis import TABLE_PRESETS, run_preset, table_preset


def main():
    for name in TABLE_PRESETS:
        start = time.perf_counter()
        preset, table = run_preset(name)
        elapsed = time.perf_counter() - start
        print(f"{name}: model={preset.model} unknown={preset.unknown} ({elapsed * 1e3:.1f} ms)")
        print(f"  {'t':>5} {'x':>5} {'|u - exact|':>12} {'|v - exact|':>12}  reference q-HATM")
        ref = table_preset(name).reference["qHATM"]
        for row, r in zip(table.rows, ref):
            print(f"  {row.t:5.2f} {row.x:5.2f} {row.abs_err_u:12.3e} {row.abs_err_v:12.3e}  {r:.3e}")


if __name__ == "__main__":
    main()
