#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write `NAME VALUE` lines.

Usage: solve_mps.py MODEL.mps SOLUTION.txt

The first line of the output is a comment with the model status and the
objective value excluding any constant offset. Exit status is 0 only when
HiGHS reports an optimal solution.
"""

import sys

import highspy


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 64
    mps_path, out_path = sys.argv[1], sys.argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    h.setOptionValue("dual_feasibility_tolerance", 1e-9)
    if h.readModel(mps_path) != highspy.HighsStatus.kOk:
        print(f"could not read {mps_path}", file=sys.stderr)
        return 65
    h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    lp = h.getLp()
    values = h.getSolution().col_value
    with open(out_path, "w") as f:
        f.write(f"# status {h.modelStatusToString(status)} objective {info.objective_function_value!r}\n")
        for name, value in zip(lp.col_names_, values):
            f.write(f"{name} {value!r}\n")
    return 0 if status == highspy.HighsModelStatus.kOptimal else 1


if __name__ == "__main__":
    sys.exit(main())
