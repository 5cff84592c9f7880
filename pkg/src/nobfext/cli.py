"""Batch command-line front end.

Four subcommands, all driven by a JSON config file and a master seed:

  gen-source   build a source spec file, optionally with a sample batch
  extract      run the pipeline over inputs, emit per-sample traces
  analyze      bias / influence / spectrum / vazirani / fixedness /
               compare-zeroed reports
  build-code   preset or searched generator matrices

Every output document embeds the config and effective seed, is formatted
canonically (sorted keys, two-space indent, trailing newline), and
validates against the schemas in `schemas`.  Outputs are byte-identical
for a fixed seed regardless of --workers: all sampling is addressed by
(seed, stream, counter), so splitting a counter range across threads
cannot change what is drawn.

Exit codes: 0 success, 2 validation error, 3 work-cap exceeded,
4 search budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bfext import (BfextParams, compare_zeroed, extract, fixedness_probability,
                    undetermined_block_count, zeroed_pair_counts)
from .codes import build_good_code, preset_code
from .errors import (NobfError, SearchBudgetExceeded, ValidationError,
                     WorkCapExceeded)
from .gf2 import BitVector
from .resilient import (function_from_descriptor, influence_exact,
                        influence_max_exact, undetermined_count, bias_under)
from .schemas import validate_document
from .sources import (Distribution, NobfSourceSpec, UniformBits,
                      good_dist_from_descriptor, read_sample_batch,
                      sample_nobf_batch, write_sample_batch)
from .stats import binomial_estimate, linear_test_bias, vazirani_check

DEFAULT_SEED = 0


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_document(path: str, obj: dict) -> None:
    validate_document(obj)
    with open(path, "w") as fh:
        fh.write(canonical_json(obj))


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ValidationError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: {exc}") from exc


def _cfg(config: dict, key: str, default=None, required: bool = False):
    if key in config:
        return config[key]
    if required:
        raise ValidationError(f"config is missing required key {key!r}")
    return default


def chunk_ranges(total: int, workers: int) -> list[tuple[int, int]]:
    """Split [0, total) into one (start, count) per worker, in order."""
    workers = max(1, min(workers, total)) if total else 1
    base, extra = divmod(total, workers)
    out = []
    start = 0
    for i in range(workers):
        count = base + (1 if i < extra else 0)
        out.append((start, count))
        start += count
    return out


def run_chunked(fn, total: int, workers: int) -> list:
    """Apply fn(start, count) over a worker-split counter range.

    Results come back in range order, so any associative combination is
    independent of the worker count.
    """
    chunks = chunk_ranges(total, workers)
    if workers <= 1 or len(chunks) <= 1:
        return [fn(s, c) for s, c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sc: fn(*sc), chunks))


def _run_block(command: str, seed: int, config: dict,
               samples: int | None = None) -> dict:
    block = {"command": command, "seed": int(seed), "config": config}
    if samples is not None:
        block["samples"] = int(samples)
    return block


def _spec_from_config(config: dict) -> NobfSourceSpec:
    desc = {
        "n": _cfg(config, "n", required=True),
        "bad_positions": _cfg(config, "bad_positions", default=[]),
        "good_dist": _cfg(config, "good_dist", required=True),
    }
    if "adversary" in config:
        desc["adversary"] = config["adversary"]
    if "t" in config:
        desc["t"] = config["t"]
    if "gamma" in config:
        desc["gamma"] = config["gamma"]
    return NobfSourceSpec.from_descriptor(desc)


def _load_spec(path: str) -> NobfSourceSpec:
    obj = load_json(path)
    validate_document(obj)
    return NobfSourceSpec.from_descriptor(obj)


def _load_params(path: str) -> BfextParams:
    obj = load_json(path)
    validate_document(obj)
    return BfextParams.from_json(obj)


def _distribution_from_config(d: dict, default_m: int | None = None) -> Distribution:
    kind = d.get("kind", "uniform")
    if kind == "uniform":
        m = d.get("m", default_m)
        if m is None:
            raise ValidationError("uniform distribution needs a width m")
        return Distribution.uniform(int(m))
    if kind == "table":
        probs = np.asarray(d["probs"], dtype=np.float64)
        m = max(0, int(probs.size).bit_length() - 1)
        if probs.size != 1 << m:
            raise ValidationError("table length must be a power of two")
        return Distribution.exact(m, probs)
    raise ValidationError(f"unknown distribution kind {kind!r}")


def cmd_gen_source(config: dict, out: str, seed: int, samples: int | None,
                   workers: int) -> int:
    spec = _spec_from_config(config)
    n_samples = samples if samples is not None else int(_cfg(config, "samples", 0))
    doc = spec.to_descriptor()
    doc["run"] = _run_block("gen-source", seed, config, n_samples)
    write_document(out, doc)
    if n_samples > 0:
        if spec.n > 64:
            raise WorkCapExceeded("packed sampling width", spec.n, 64)
        parts = run_chunked(
            lambda s, c: sample_nobf_batch(spec, seed, c, stream=0, start=s),
            n_samples, workers)
        drawn = np.concatenate([p for p in parts if p.size]) if parts else \
            np.zeros(0, dtype=np.uint64)
        write_sample_batch(_cfg(config, "samples_out", out + ".samples"),
                           spec, drawn, seed, stream=0)
    return 0


def cmd_extract(config: dict, out: str, seed: int, samples: int | None,
                workers: int) -> int:
    params = _load_params(_cfg(config, "params", required=True))
    inputs: list[BitVector] = []
    if "samples" in config and isinstance(config["samples"], str):
        header, xs = read_sample_batch(config["samples"])
        if int(header["n"]) != params.n:
            raise ValidationError(
                f"sample width {header['n']} does not match params n={params.n}")
        inputs = [BitVector(params.n, int(x)) for x in xs]
    elif "inputs" in config:
        inputs = [BitVector.from_hex(params.n, h) for h in config["inputs"]]
    elif "spec" in config:
        spec = _load_spec(config["spec"])
        if spec.n != params.n:
            raise ValidationError("spec and params disagree on n")
        count = samples if samples is not None else int(_cfg(config, "count", 1))
        if spec.n > 64:
            raise WorkCapExceeded("packed sampling width", spec.n, 64)
        parts = run_chunked(
            lambda s, c: sample_nobf_batch(spec, seed, c, stream=0, start=s),
            count, workers)
        xs = np.concatenate([p for p in parts if p.size]) if parts else []
        inputs = [BitVector(params.n, int(x)) for x in xs]
    else:
        raise ValidationError(
            "config needs one of: samples (path), inputs (hex list), spec (path)")
    traces = [extract(x, params).to_json() for x in inputs]
    doc = {
        "format": "extraction-report",
        "version": 1,
        "n": params.n,
        "count": len(traces),
        "traces": traces,
        "run": _run_block("extract", seed, config, len(traces)),
    }
    write_document(out, doc)
    return 0


def _analysis_bias(config: dict, seed: int, samples: int | None,
                   workers: int) -> dict:
    f = function_from_descriptor(_cfg(config, "f", required=True))
    dist = _distribution_from_config(_cfg(config, "distribution",
                                          default={"kind": "uniform"}),
                                     default_m=f.arity)
    b = bias_under(f, dist)
    if isinstance(b, float):
        return {"bias": b, "exact": True}
    return {"bias": b.to_json(), "exact": False}


def _analysis_influence(config: dict, seed: int, samples: int | None,
                        workers: int) -> dict:
    f = function_from_descriptor(_cfg(config, "f", required=True))
    if "max_size" in config:
        q = int(config["max_size"])
        fixing = (good_dist_from_descriptor(config["fixing"])
                  if "fixing" in config else UniformBits(f.arity - q))
        value, witness = influence_max_exact(f, q, fixing)
        return {"influence": value, "witness": list(witness), "exact": True}
    coalition = [int(i) for i in _cfg(config, "coalition", required=True)]
    fixing = (good_dist_from_descriptor(config["fixing"])
              if "fixing" in config
              else UniformBits(f.arity - len(set(coalition))))
    mode = _cfg(config, "mode", "exact")
    if mode == "exact":
        return {"influence": influence_exact(f, coalition, fixing),
                "exact": True}
    if mode != "mc":
        raise ValidationError("influence mode must be 'exact' or 'mc'")
    n_samples = samples if samples is not None else int(_cfg(config, "samples", 0))
    if n_samples < 1:
        raise ValidationError("mc influence needs a positive sample count")
    counts = run_chunked(
        lambda s, c: undetermined_count(f, coalition, fixing, seed, s, c),
        n_samples, workers)
    est = binomial_estimate(sum(counts), n_samples, confidence=0.99)
    return {"influence": est.to_json(), "exact": False}


def _analysis_spectrum(config: dict, seed: int, samples: int | None,
                       workers: int) -> dict:
    dist = _distribution_from_config(_cfg(config, "distribution", required=True))
    return linear_test_bias(dist).to_json()


def _analysis_vazirani(config: dict, seed: int, samples: int | None,
                       workers: int) -> dict:
    dist = _distribution_from_config(_cfg(config, "distribution", required=True))
    return vazirani_check(dist).to_json()


def _analysis_fixedness(config: dict, seed: int, samples: int | None,
                        workers: int) -> dict:
    spec = _load_spec(_cfg(config, "spec", required=True))
    params = _load_params(_cfg(config, "params", required=True))
    force_mc = bool(_cfg(config, "force_mc", False))
    n_samples = samples if samples is not None else _cfg(config, "samples")
    if force_mc:
        if not n_samples:
            raise ValidationError("force_mc needs a sample count")
        undet = run_chunked(
            lambda s, c: undetermined_block_count(spec, params, seed, s, c),
            int(n_samples), workers)
        est = binomial_estimate(int(n_samples) - sum(undet), int(n_samples),
                                confidence=0.99)
        return {"probability": est.to_json(), "exact": False}
    est = fixedness_probability(spec, params, seed=seed,
                                samples=int(n_samples) if n_samples else None)
    return {"probability": est.to_json(), "exact": est.is_exact}


def _analysis_compare_zeroed(config: dict, seed: int, samples: int | None,
                             workers: int) -> dict:
    spec = _load_spec(_cfg(config, "spec", required=True))
    params = _load_params(_cfg(config, "params", required=True))
    force_mc = bool(_cfg(config, "force_mc", False))
    n_samples = samples if samples is not None else _cfg(config, "samples")
    if force_mc:
        if not n_samples:
            raise ValidationError("force_mc needs a sample count")
        n_samples = int(n_samples)
        parts = run_chunked(
            lambda s, c: zeroed_pair_counts(spec, params, seed, s, c),
            n_samples, workers)
        ca = sum(p[0] for p in parts)
        cb = sum(p[1] for p in parts)
        mismatches = sum(p[2] for p in parts)
        est_val = 0.5 * float(np.abs(ca / n_samples - cb / n_samples).sum())
        bound = (2 * math.sqrt(math.log(2.0 / 0.01) / (2.0 * n_samples))
                 + math.sqrt((1 << params.m) / n_samples))
        return {
            "sd": {"value": est_val, "lo": max(0.0, est_val - bound),
                   "hi": min(1.0, est_val + bound), "samples": n_samples,
                   "confidence": 0.99, "method": "plug-in"},
            "exact": False,
            "m": params.m,
            "mismatch_rate": mismatches / n_samples,
        }
    rep = compare_zeroed(spec, params, seed=seed,
                         samples=int(n_samples) if n_samples else None)
    return rep.to_json()


_ANALYSES = {
    "bias": _analysis_bias,
    "influence": _analysis_influence,
    "spectrum": _analysis_spectrum,
    "vazirani": _analysis_vazirani,
    "fixedness": _analysis_fixedness,
    "compare-zeroed": _analysis_compare_zeroed,
}


def cmd_analyze(config: dict, out: str, seed: int, samples: int | None,
                workers: int) -> int:
    name = _cfg(config, "analysis", required=True)
    handler = _ANALYSES.get(name)
    if handler is None:
        raise ValidationError(
            f"unknown analysis {name!r}; choose from {sorted(_ANALYSES)}")
    result = handler(config, seed, samples, workers)
    doc = {
        "format": "analysis-report",
        "version": 1,
        "analysis": name,
        "result": result,
        "run": _run_block("analyze", seed, config, samples),
    }
    write_document(out, doc)
    return 0


def cmd_build_code(config: dict, out: str, seed: int, samples: int | None,
                   workers: int) -> int:
    if "preset" in config:
        code = preset_code(config["preset"])
        doc = code.to_json()
        doc["run"] = _run_block("build-code", seed, config)
        write_document(out, doc)
        return 0
    m = int(_cfg(config, "m", required=True))
    r = int(_cfg(config, "r", required=True))
    target_d = int(_cfg(config, "target_d", required=True))
    attempts = int(_cfg(config, "attempts", 4096))
    try:
        code = build_good_code(m, r, target_d, seed=seed, attempts=attempts)
    except SearchBudgetExceeded as exc:
        doc = {
            "format": "code-search-failure",
            "version": 1,
            "m": m,
            "r": r,
            "target_d": target_d,
            "attempts": attempts,
            "best_distance": int(exc.best_distance or 0),
            "best": exc.best.to_json() if exc.best is not None else None,
            "run": _run_block("build-code", seed, config),
        }
        write_document(out, doc)
        print(f"search exhausted: best distance {exc.best_distance}",
              file=sys.stderr)
        return 4
    doc = code.to_json()
    doc["run"] = _run_block("build-code", seed, config)
    write_document(out, doc)
    return 0


_COMMANDS = {
    "gen-source": cmd_gen_source,
    "extract": cmd_extract,
    "analyze": cmd_analyze,
    "build-code": cmd_build_code,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nobfext",
        description="Bit-fixing source extractor toolbox (batch front end).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", required=True, help="output path")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (overrides config)")
        p.add_argument("--samples", type=int, default=None,
                       help="sample count (overrides config)")
        p.add_argument("--workers", type=int, default=1,
                       help="worker threads; outputs do not depend on this")
        p.add_argument("--max-enum", type=int, default=None, metavar="BITS",
                       help="override the work cap to 2^BITS units")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return 2
    saved_cap = os.environ.get("NOBF_WORK_CAP")
    try:
        if args.max_enum is not None:
            if not 0 < args.max_enum <= 63:
                raise ValidationError("--max-enum must be in 1..63")
            os.environ["NOBF_WORK_CAP"] = str(1 << args.max_enum)
        config = load_json(args.config)
        seed = args.seed if args.seed is not None else int(_cfg(config, "seed",
                                                                DEFAULT_SEED))
        return _COMMANDS[args.command](config, args.out, seed, args.samples,
                                       args.workers)
    except WorkCapExceeded as exc:
        print(f"work cap exceeded: {exc}", file=sys.stderr)
        return 3
    except SearchBudgetExceeded as exc:
        print(f"search budget exhausted: {exc}", file=sys.stderr)
        return 4
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except NobfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        if args.max_enum is not None:
            if saved_cap is None:
                os.environ.pop("NOBF_WORK_CAP", None)
            else:
                os.environ["NOBF_WORK_CAP"] = saved_cap


if __name__ == "__main__":
    sys.exit(main())
