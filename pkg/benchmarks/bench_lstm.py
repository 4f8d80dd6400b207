"""Benchmark the compiled LSTM kernels against the numpy fallback.

Runs the raw per-timestep loops (forward and backward) and a small
end-to-end training job on both backends and prints a comparison table.
Backend selection is forced per run via subprocess so each interpreter
imports exactly one backend.

Usage:
    python benchmarks/bench_lstm.py            # compare both backends
    python benchmarks/bench_lstm.py --inner    # (internal) one backend
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def bench_kernels(iters, T, B, H):
    from fxsignal._backend import backend_name, lstm_backward_loop, lstm_forward_loop

    rng = np.random.default_rng(0)
    wh = rng.normal(size=(H, 4 * H))
    wh_t = np.ascontiguousarray(wh.T)
    pre0 = rng.normal(size=(T, B, 4 * H))
    dh_up = rng.normal(size=(T, B, H))

    gates = pre0.copy()
    h = np.empty((T, B, H))
    c = np.empty((T, B, H))
    lstm_forward_loop(gates, wh, h, c)

    t0 = time.perf_counter()
    for _ in range(iters):
        pre = pre0.copy()
        lstm_forward_loop(pre, wh, np.empty((T, B, H)), np.empty((T, B, H)))
    fwd = time.perf_counter() - t0

    t0 = time.perf_counter()
    for _ in range(iters):
        da = np.empty((T, B, 4 * H))
        lstm_backward_loop(gates, c, wh_t, dh_up, da)
    bwd = time.perf_counter() - t0
    return backend_name(), fwd, bwd


def bench_training(epochs, n, back, dim, hidden, layers):
    from fxsignal import net as nets
    from fxsignal.dataset import WindowedDataset

    rng = np.random.default_rng(1)
    x = rng.normal(size=(n, back, dim))
    y = (x[:, -1, :].mean(axis=1) > 0).astype(float)
    data = WindowedDataset(split="train", x=x, y=y)
    cfg = nets.LstmConfig(layers=layers, hidden_size=hidden, back_days=back,
                          epochs=epochs, seed=0)
    net = nets.LstmNetwork(dim, hidden, layers, seed=0)
    t0 = time.perf_counter()
    nets.train(net, data, cfg)
    return time.perf_counter() - t0


def run_inner(args):
    backend, fwd, bwd = bench_kernels(args.iters, args.timesteps, args.batch, args.hidden)
    train = bench_training(args.epochs, args.samples, args.timesteps,
                           args.features, args.hidden, args.layers)
    print(json.dumps({"backend": backend, "forward_s": fwd,
                      "backward_s": bwd, "train_s": train}))


def run_outer(args):
    rows = []
    for backend in ("python", "c"):
        env = dict(os.environ, FXSIGNAL_BACKEND=backend)
        cmd = [sys.executable, os.path.abspath(__file__), "--inner"] + sys.argv[1:]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True)
        if out.returncode != 0:
            print(f"{backend}: benchmark failed\n{out.stderr}", file=sys.stderr)
            continue
        rows.append(json.loads(out.stdout.strip().splitlines()[-1]))
    if not rows:
        sys.exit(1)
    shape = f"T={args.timesteps} B={args.batch} H={args.hidden} x{args.iters} iters"
    print(f"kernel loops ({shape}); training ({args.samples} samples, "
          f"{args.layers} layer(s), {args.epochs} epochs)")
    print(f"{'backend':<10}{'forward':>10}{'backward':>10}{'training':>10}")
    for r in rows:
        print(f"{r['backend']:<10}{r['forward_s']:>9.2f}s{r['backward_s']:>9.2f}s"
              f"{r['train_s']:>9.2f}s")
    if len(rows) == 2:
        base = {r["backend"]: r for r in rows}
        if "c" in base and "python" in base:
            for key, label in (("forward_s", "forward"), ("backward_s", "backward"),
                               ("train_s", "training")):
                ratio = base["python"][key] / base["c"][key]
                print(f"compiled speedup, {label}: {ratio:.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    parser.add_argument("--iters", type=int, default=2000)
    parser.add_argument("--timesteps", type=int, default=25)
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--hidden", type=int, default=16)
    parser.add_argument("--features", type=int, default=20)
    parser.add_argument("--samples", type=int, default=512)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--epochs", type=int, default=5)
    args = parser.parse_args()
    if args.inner:
        run_inner(args)
    else:
        run_outer(args)


if __name__ == "__main__":
    main()
