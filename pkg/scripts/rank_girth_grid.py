"""Write the (rho, gamma, bound) grid used for the rank/girth plot and check its shape."""
import argparse
import sys

from corrgap.cli import main as cli_main
from corrgap.verify import bound_grid, grid_shape


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--rho-max", type=int, default=30)
    p.add_argument("--out", default="rank_girth_grid.csv")
    return p.parse_args()


if __name__ == "__main__":
    args = parse_args()
    code = cli_main(["figure1", "--rho-max", str(args.rho_max), "--out", args.out])
    rise, drop, drift = grid_shape(bound_grid(args.rho_max))
    print(f"wrote {args.out}; max rise along rho {rise:.3g}, max drop along gamma {drop:.3g}, gamma=2 drift {drift:.3g}")
    sys.exit(code)
