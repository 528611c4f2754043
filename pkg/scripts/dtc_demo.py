"""Period doubling at exact pi kicks, its decay under detuning, and the J = 0 control.

Prints the stroboscopic <sigma^z_1> for the first periods and the period-1 /
period-2 epsilon_hat of each run.
"""

import argparse

from flab.experiments import dtc_runs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--delta", type=float, default=0.03 * 3.141592653589793,
                    help="detuning of the kick away from pi")
    args = ap.parse_args()
    for rep in dtc_runs(args.n, args.m, args.seed, (-20.0, 20.0), args.delta):
        d = rep.details
        head = " ".join(f"{z:+.3f}" for z in d["z"][:8])
        print(f"{rep.check:20s} eps1={d['epsilon_hat_period1']:.3e} eps2={d['epsilon_hat_period2']:.3e} "
              f"D2={d['D2']} class={d['classification']:9s} z: {head} ...")


if __name__ == "__main__":
    main()
