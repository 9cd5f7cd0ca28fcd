#!/usr/bin/env python3
"""Throughput comparison of the jitted kernels against the numpy fallback.

Runs each kernel on training-shaped inputs and prints per-call timings plus
an end-to-end training comparison on the toy benchmark. The jitted side pays
its compile cost before timing starts.
"""

import argparse
import time

import numpy as np

from nilink.model.kernels import numba_backend, numpy_backend


def time_call(fn, *args, repeat=2000):
    fn(*args)  # warmup / jit compile
    start = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - start) / repeat


def bench_kernels(dim, vocab, tokens, n_t):
    rng = np.random.default_rng(0)
    table = rng.normal(size=(vocab, dim))
    grad_table = np.zeros_like(table)
    ids = rng.integers(0, vocab, size=tokens)
    vec = rng.normal(size=dim)
    t = rng.uniform(0.01, 0.99, 2 * n_t)
    y = rng.integers(0, 2, 2 * n_t).astype(float)
    param = rng.normal(size=(vocab, dim))
    grad = rng.normal(size=(vocab, dim))
    m, v = np.zeros_like(param), np.zeros_like(param)

    cases = [
        ("mean_pool", lambda b: b.mean_pool(table, ids)),
        ("scatter_add_rows", lambda b: b.scatter_add_rows(grad_table, ids, vec)),
        ("focal_loss_value", lambda b: b.focal_loss_value(t, y, 2.0)),
        ("focal_grad_logits", lambda b: b.focal_grad_logits(t, y, 2.0)),
        ("adam_step", lambda b: b.adam_step(param, grad, m, v, 1, 0.01, 0.9, 0.999, 1e-8)),
    ]
    print(f"{'kernel':<20}{'numpy':>12}{'numba':>12}{'speedup':>9}")
    for name, call in cases:
        repeat = 200 if name == "adam_step" else 2000
        t_np = time_call(lambda: call(numpy_backend), repeat=repeat)
        t_nb = time_call(lambda: call(numba_backend), repeat=repeat)
        print(f"{name:<20}{t_np * 1e6:>10.1f}us{t_nb * 1e6:>10.1f}us{t_np / t_nb:>8.1f}x")


def bench_training(seed=5, n_entries=300):
    from nilink.dataset import split_dataset
    from nilink.model import kernels as K
    from nilink.model import linker as L
    from nilink.toybench import make_toy_benchmark

    bench = make_toy_benchmark(rng_seed=seed, n_entries=n_entries)
    splits = split_dataset(bench.entries, (0.8, 0.1, 0.1), rng_seed=seed)
    cfg = L.LinkerConfig(mode=L.CROSS, embed_dim=32, hash_vocab=2048,
                         learning_rate=0.05, epochs=1, batch_size=1, rng_seed=seed)

    names = ("mean_pool", "scatter_add_rows", "sigmoid", "focal_loss_value",
             "focal_grad_logits", "bce_value", "adam_step")
    results = {}
    for label, backend in (("numpy", numpy_backend), ("numba", numba_backend)):
        for name in names:
            setattr(K, name, getattr(backend, name))
        L.train(splits["train"][:10], bench.system, bench.assignment, bench.kb, cfg)  # warmup
        start = time.perf_counter()
        L.train(splits["train"], bench.system, bench.assignment, bench.kb, cfg)
        results[label] = time.perf_counter() - start
        print(f"one training epoch ({label:<5}): {results[label]:.2f}s")
    print(f"training speedup: {results['numpy'] / results['numba']:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--vocab", type=int, default=2048)
    parser.add_argument("--tokens", type=int, default=160)
    parser.add_argument("--types", type=int, default=16)
    parser.add_argument("--skip-training", action="store_true")
    args = parser.parse_args()
    bench_kernels(args.dim, args.vocab, args.tokens, args.types)
    if not args.skip_training:
        print()
        bench_training()


if __name__ == "__main__":
    main()
