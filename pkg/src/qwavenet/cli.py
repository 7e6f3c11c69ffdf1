"""Command-line front end.

Subcommands:

* ``generate`` — run the autoregressive generator and write a WAV file, with
  an optional JSON run report (timings, throughput, config/weight digests);
* ``verify``   — self-check on a reduced version of the given config: queue
  semantics against a shifting FIFO, the engine against a plain matvec, and
  the queue-based generator against the naive full-history reference;
* ``compare``  — MSE and log-spectral distance between two WAV files;
* ``explore``  — sweep engine parallelism parameters over the model's layers
  and emit the cost model's estimates as CSV.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass
from itertools import product

import numpy as np

from .engine import ParallelismParams, estimate_cycles, matvec
from .inference import generate, generate_naive
from .metrics import SpectrogramParams, metric_report
from .model import ModelConfig, config_digest, load_config, validate_config
from .numerics import parse_mode
from .queues import CyclicQueue
from .weights import load_weights, random_weights
from .wavio import read_wav, write_wav


@dataclass(frozen=True)
class RunReport:
    samples_generated: int
    wall_time: float
    throughput_hz: float
    number_mode: str
    layer_params: list
    config_digest: str
    weights_sha256: str


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _parse_int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise ValueError(f"expected comma-separated integers, got {text!r}")
    return values


def _cmd_generate(args) -> int:
    cfg = load_config(args.config)
    ws = load_weights(args.weights, cfg)
    mode = parse_mode(args.mode)
    n = int(round(args.seconds * cfg.sample_rate))
    if n < 1:
        raise ValueError(f"--seconds {args.seconds} yields no samples at {cfg.sample_rate} Hz")

    t0 = time.perf_counter()
    wf = generate(cfg, ws, n=n, mode=mode)
    wall = time.perf_counter() - t0
    write_wav(args.out, wf.samples, wf.sample_rate)

    from .inference import default_layer_params

    layer_params = [
        [p.num_parallel_out, p.num_parallel_in]
        for p in default_layer_params(validate_config(cfg))
    ]
    report = RunReport(
        samples_generated=n,
        wall_time=wall,
        throughput_hz=n / wall,
        number_mode=str(mode),
        layer_params=layer_params,
        config_digest=config_digest(cfg),
        weights_sha256=_sha256_file(args.weights),
    )
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(asdict(report), fh, indent=2)
            fh.write("\n")
    print(
        f"wrote {args.out}: {n} samples at {cfg.sample_rate} Hz "
        f"in {wall:.2f}s ({report.throughput_hz:.1f} samples/s, mode {mode})"
    )
    return 0


def _reduced_config(cfg: ModelConfig) -> ModelConfig:
    """Shrink a config so the quadratic-cost reference generator stays fast."""
    return ModelConfig(
        num_blocks=min(cfg.num_blocks, 2),
        layers_per_block=min(cfg.layers_per_block, 4),
        filter_width=cfg.filter_width,
        channels=min(cfg.channels, 8),
        quant_levels=min(cfg.quant_levels, 64),
        sample_rate=cfg.sample_rate,
    )


def _check_queue_fifo(rng) -> str:
    for length in (1, 2, 3, 5, 8):
        q = CyclicQueue(length, 3)
        fifo = [np.zeros(3)] * length
        for _ in range(4 * length + 3):
            v = rng.uniform(-1, 1, 3)
            got = q.front()
            want = fifo[0]
            if not np.array_equal(got, want):
                return f"front mismatch at queue length {length}"
            q.push(v)
            fifo = fifo[1:] + [v]
    return ""


def _check_matvec(rng) -> str:
    combos = [
        ParallelismParams(po, pi) for po, pi in product((1, 2, 4, 8), repeat=2)
    ]
    W_int = rng.integers(-9, 10, size=(16, 16)).astype(np.float64)
    x_int = rng.integers(-9, 10, size=16).astype(np.float64)
    for p in combos:
        if not np.array_equal(matvec(W_int, x_int, p=p), W_int @ x_int):
            return f"integer matvec mismatch at {p}"
    W = rng.uniform(-1, 1, size=(13, 7))
    x = rng.uniform(-1, 1, size=7)
    ref = W @ x
    for p in combos:
        got = matvec(W, x, p=p)
        if np.max(np.abs(got - ref)) > 1e-6 * max(1.0, np.max(np.abs(ref))):
            return f"real matvec deviation at {p}"
    return ""


def _check_generator_parity(cfg: ModelConfig, seed: int) -> str:
    ws = random_weights(cfg, seed=seed)
    sink_fast, sink_naive = [], []
    wf_fast = generate(cfg, ws, n=200, logit_sink=sink_fast)
    wf_naive = generate_naive(cfg, ws, n=200, logit_sink=sink_naive)
    if not np.array_equal(wf_fast.bins, wf_naive.bins):
        return "bin sequences differ"
    dev = max(
        float(np.max(np.abs(a - b))) for a, b in zip(sink_fast, sink_naive)
    )
    if dev > 1e-5:
        return f"logit deviation {dev:.3g} exceeds 1e-5"
    return ""


def _cmd_verify(args) -> int:
    cfg = _reduced_config(load_config(args.config))
    rng = np.random.default_rng(args.seed)
    checks = [
        ("cyclic queue vs shifting FIFO", lambda: _check_queue_fifo(rng)),
        ("matvec vs plain matrix product", lambda: _check_matvec(rng)),
        ("queue generator vs naive reference", lambda: _check_generator_parity(cfg, args.seed)),
    ]
    failed = False
    for name, check in checks:
        detail = check()
        if detail:
            failed = True
            print(f"FAIL {name}: {detail}")
        else:
            print(f"ok   {name}")
    return 1 if failed else 0


def _cmd_compare(args) -> int:
    a, rate_a = read_wav(args.a)
    b, rate_b = read_wav(args.b)
    if rate_a != rate_b:
        raise ValueError(f"sample rates differ: {rate_a} vs {rate_b}")
    params = SpectrogramParams(window_size=args.window, hop=args.hop, epsilon=args.epsilon)
    report = metric_report(a, b, params)
    print(f"n_samples={report.n_samples} mse={report.mse:.6g} lsd={report.lsd:.6g}")
    return 0


def _cmd_explore(args) -> int:
    cfg = load_config(args.config)
    specs = validate_config(cfg)
    pouts = _parse_int_list(args.pout_list)
    pins = _parse_int_list(args.pin_list)

    rows = []
    for spec in specs:
        for po, pi in product(pouts, pins):
            p = ParallelismParams(po, pi)
            est = estimate_cycles(spec.out_channels, spec.in_channels, p)
            rows.append(
                [
                    spec.block_index,
                    spec.layer_index,
                    spec.out_channels,
                    spec.in_channels,
                    po,
                    pi,
                    est.mac_count,
                    est.estimated_cycles,
                    est.weight_buffer_elems,
                ]
            )

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(
            [
                "block",
                "layer",
                "rows",
                "cols",
                "p_out",
                "p_in",
                "mac_count",
                "estimated_cycles",
                "weight_buffer_elems",
            ]
        )
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwavenet",
        description="Queue-cached autoregressive WaveNet inference tool",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate audio and write a WAV file")
    g.add_argument("--config", required=True, help="model config JSON")
    g.add_argument("--weights", required=True, help="weight file")
    g.add_argument("--seconds", type=float, required=True, help="audio length to generate")
    g.add_argument("--mode", default="real", help="numeric mode: real, fixed, or fixed<T,I>")
    g.add_argument("--out", required=True, help="output WAV path")
    g.add_argument("--report", help="optional JSON run report path")
    g.set_defaults(func=_cmd_generate)

    v = sub.add_parser("verify", help="run self-checks on a reduced config")
    v.add_argument("--config", required=True, help="model config JSON")
    v.add_argument("--seed", type=int, default=0, help="random seed for the checks")
    v.set_defaults(func=_cmd_verify)

    c = sub.add_parser("compare", help="MSE / LSD between two WAV files")
    c.add_argument("--a", required=True, help="first WAV file")
    c.add_argument("--b", required=True, help="second WAV file")
    c.add_argument("--window", type=int, default=512, help="STFT window size")
    c.add_argument("--hop", type=int, default=128, help="STFT hop size")
    c.add_argument("--epsilon", type=float, default=1e-10, help="log floor")
    c.set_defaults(func=_cmd_compare)

    e = sub.add_parser("explore", help="cost-model sweep over parallelism parameters")
    e.add_argument("--config", required=True, help="model config JSON")
    e.add_argument("--pout-list", required=True, help="comma-separated num_parallel_out values")
    e.add_argument("--pin-list", required=True, help="comma-separated num_parallel_in values")
    e.add_argument("--out", help="CSV output path (default stdout)")
    e.set_defaults(func=_cmd_explore)

    return parser


def run_cli(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # CLI boundary: report, don't traceback
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
