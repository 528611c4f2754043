"""Quasienergy and operator-norm differences between split and combined weak drives."""

import argparse

import numpy as np

from flab.states import derive_rng
from flab.verification import quasienergy_perturbation_scaling


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = derive_rng(args.seed, 2)
    g = rng.uniform(-1, 1, size=(args.n, 2))
    K = rng.uniform(-1, 1, size=args.n - 1)
    rep = quasienergy_perturbation_scaling(g, K, np.logspace(-1, -3, 9))
    d = rep.details
    print(f"{'eps':>10s} {'max|dE|':>12s} {'||dU||':>12s}")
    for e, q, u in zip(d["eps"], d["max_quasienergy_difference"], d["operator_norm_difference"]):
        print(f"{e:10.3e} {q:12.4e} {u:12.4e}")
    print(f"quasienergy slope {rep.measured:.3f}, operator-norm slope {d['operator_norm_slope']:.3f}")


if __name__ == "__main__":
    main()
