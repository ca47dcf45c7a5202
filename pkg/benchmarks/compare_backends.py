"""Benchmark the numba kernels against the pure-Python fallback.

Runs a fixed workload (interval simulation, particle filtering, MCMC path
sampling) under the active backend and reports wall times. Invoke once per
backend; results land in a small JSON so the two runs can be diffed:

    python benchmarks/compare_backends.py --out bench_numba.json
    PERCOHMM_NUMBA=0 python benchmarks/compare_backends.py --scale 0.02 \
        --out bench_python.json

The fallback is interpreted Python over the same source, so scale it down
unless you enjoy waiting. Outputs include a result digest; it must agree
between backends at equal scale.
"""

import argparse
import hashlib
import json
import time


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scale", type=float, default=1.0,
                    help="workload multiplier (use ~0.02 for the fallback)")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    import percohmm as ph
    from percohmm import (DynGraph, EmConfig, LatentState, ModelParams, NoiseParams,
                          ProcessParams, Regime, Rng, em_fit, forward_loglik,
                          mcmc_path_sampler, simulate_series)

    truth = ModelParams(ProcessParams(0.7, 0.3, 2.0), NoiseParams(0.03, 0.01))
    results = {"backend": "numba" if ph.NUMBA_ENABLED else "python", "scale": args.scale}
    digest = hashlib.sha256()

    # one-time compile cost (or no-op for the fallback)
    t0 = time.perf_counter()
    simulate_series(Regime.ER, truth, 5, 3, 1.0, Rng(0))
    results["warmup_s"] = time.perf_counter() - t0

    n_sim = max(1, int(200 * args.scale))
    t0 = time.perf_counter()
    state = LatentState(1, DynGraph(50))
    rng = Rng(1)
    total_r = 0
    for _ in range(n_sim):
        from percohmm import simulate_interval

        out, r, _ = simulate_interval(state, 10.0, Regime.PR, truth.process, rng)
        total_r += r
    results["simulate_interval"] = {"reps": n_sim, "seconds": time.perf_counter() - t0}
    digest.update(str(total_r).encode())

    series = simulate_series(Regime.ER, truth, 15, 20, 0.6, Rng(2))
    b = max(10, int(20_000 * args.scale))
    t0 = time.perf_counter()
    ll = forward_loglik(series, truth, Regime.ER, b, Rng(3))
    results["particle_filter"] = {"particles": b, "observations": 20,
                                  "seconds": time.perf_counter() - t0}
    digest.update(repr(ll).encode())

    start = LatentState(1, DynGraph(15, [(0, 1), (2, 3)]))
    end = LatentState(1, DynGraph(15, [(0, 1), (3, 4), (5, 6)]))
    n_paths = max(10, int(20_000 * args.scale))
    t0 = time.perf_counter()
    paths = mcmc_path_sampler(start, end, 1.0, truth.process, Regime.ER,
                              n_paths, Rng(4), check=False)
    results["mcmc_paths"] = {"samples": n_paths, "seconds": time.perf_counter() - t0}
    digest.update(str(sum(p.r for p in paths)).encode())

    em_b = max(20, int(2000 * args.scale))
    t0 = time.perf_counter()
    fit, diag = em_fit(series, Regime.ER,
                       EmConfig(n_particles=em_b, psi_lines=em_b, max_iters=2, min_iters=1),
                       Rng(5))
    results["em_iteration"] = {"particles": em_b, "iterations": diag.n_iters,
                               "seconds": time.perf_counter() - t0}
    digest.update(json.dumps([repr(float(v)) for v in fit.as_vector()]).encode())

    results["digest"] = digest.hexdigest()[:16]
    print(json.dumps(results, indent=2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
