"""Print lower and upper bounds side by side for small ranks."""
import argparse

from corrgap.bounds import bound_monster, upper_bound_girth_uniform, upper_bound_union


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--rho-max", type=int, default=10)
    args = p.parse_args()
    print(f"{'rho':>4} {'gamma':>5} {'lower':>12} {'uniform-pad':>12} {'union':>12} {'union(gamma)':>12}")
    for rho in range(1, args.rho_max + 1):
        for gamma in range(2, rho + 2):
            up = upper_bound_union(rho, gamma)
            print(
                f"{rho:4d} {gamma:5d} {bound_monster(rho, gamma):12.10f} "
                f"{upper_bound_girth_uniform(rho, gamma):12.10f} {up.ell_form:12.10f} {up.gamma_form:12.10f}"
            )


if __name__ == "__main__":
    main()
