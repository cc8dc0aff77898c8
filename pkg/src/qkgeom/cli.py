"""Command-line entry point.

Subcommands cover the individual pipeline stages (gen-data, kernel,
spectrum, gd, svm, tune-gamma, min-gd) plus declarative experiment runs.
Exit codes: 0 success, 1 validation error, 2 numerical failure. With
--json-errors, failures are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data import Dataset, GenNormSpec, load_csv, sample_dataset, save_csv
from .experiments import ValidationError, apply_overrides, load_config, run_experiment
from .feature_maps import BOUNDARIES, FAMILIES, FeatureMapSpec
from .kernel import build_kernel, cross_kernel, load_kernel, normalized_spectrum, save_kernel
from .rng import RNG_SCHEME
from .spectral import PsdFunctionConfig, geometric_difference
from .svm import test_score as svm_test_score
from .svm import train as svm_train
from .tuning import lambda_for_target_gamma, load_curve, min_gd_over_classical, save_gd_results
from . import svm as svm_mod


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; route through the
    # validation-error path (exit 1) instead.
    def error(self, message):
        raise ValidationError(message)


def _sha256(path) -> str:
    import hashlib

    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _family(name: str) -> str:
    """Canonical family name; tolerates spellings like 'productz'."""
    squashed = name.lower().replace("-", "").replace("_", "")
    for canonical in FAMILIES:
        if squashed == canonical.replace("_", ""):
            return canonical
    raise ValidationError(f"unknown feature map family {name!r}; expected one of {FAMILIES}")


def _map_spec(args) -> FeatureMapSpec:
    return FeatureMapSpec(
        family=_family(args.map),
        lam=args.lam,
        alpha=args.alpha,
        n_layers=args.layers,
        boundary=args.boundary,
    )


def _add_map_flags(p: _Parser) -> None:
    p.add_argument("--map", required=True, help="feature map family")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="bandwidth scaling factor")
    p.add_argument("--alpha", type=float, default=2.0, help="pair-term exponent (iqp families)")
    p.add_argument("--layers", type=int, default=4, help="heisenberg layer count")
    p.add_argument("--boundary", choices=BOUNDARIES, default="open", help="heisenberg chain boundary")


def _cmd_gen_data(args) -> int:
    spec = GenNormSpec(beta=args.beta, r=args.r)
    data = sample_dataset(spec, args.n, args.dim, args.seed)
    save_csv(data, args.out, spec=spec)
    print(args.out)
    return 0


def _cmd_kernel(args) -> int:
    data = load_csv(args.data, has_labels=args.labels)
    kernel = build_kernel(_map_spec(args), data)
    save_kernel(
        kernel,
        args.out,
        metadata={"data_file": str(args.data), "data_sha256": _sha256(args.data), "rng": RNG_SCHEME},
    )
    print(args.out)
    return 0


def _cmd_spectrum(args) -> int:
    spectrum = normalized_spectrum(load_kernel(args.kernel))
    if args.out:
        Path(args.out).write_text(
            "\n".join(repr(float(v)) for v in spectrum.values) + "\n", encoding="utf-8"
        )
    print(repr(spectrum.gamma_max))
    return 0


def _cmd_gd(args) -> int:
    cfg = PsdFunctionConfig(eps_rel=args.eps_rel)
    value = geometric_difference(load_kernel(args.k1), load_kernel(args.k2), cfg)
    print(repr(value))
    return 0


def _cmd_svm(args) -> int:
    train_set = load_csv(args.train_data, has_labels=True)
    spec = _map_spec(args)
    k_train = build_kernel(spec, train_set)
    model = svm_train(k_train, train_set.labels, args.C)
    train_acc = svm_test_score(model, k_train.entries, train_set.labels)
    print(f"train_accuracy={train_acc!r}")
    if args.test_data:
        test_set = load_csv(args.test_data, has_labels=True)
        k_cross = cross_kernel(spec, train_set, test_set)
        print(f"test_accuracy={svm_test_score(model, k_cross, test_set.labels)!r}")
    if args.model_out:
        model.save(args.model_out)
    return 0


def _cmd_tune_gamma(args) -> int:
    curve = load_curve(args.curve)
    lam = lambda_for_target_gamma(curve, args.n, args.target)
    print(repr(lam))
    return 0


def _cmd_min_gd(args) -> int:
    k_quantum = load_kernel(args.quantum_kernel)
    data = load_csv(args.data)
    grid = np.logspace(args.grid_log_start, args.grid_log_stop, args.grid_num)
    result = min_gd_over_classical(
        k_quantum,
        _family(args.family),
        grid,
        data,
        cfg=PsdFunctionConfig(eps_rel=args.eps_rel),
        alpha=args.alpha,
        n_layers=args.layers,
        boundary=args.boundary,
    )
    if args.out:
        save_gd_results([result], args.out)
    print(
        f"gd_min={result.gd_min!r} classical_lambda={result.classical_lambda_star!r} "
        f"sqrt_N={result.sqrt_n!r}"
    )
    return 0


def _parse_override(text: str):
    if "=" not in text:
        raise ValidationError(f"override must look like key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings allowed, e.g. --set family=iqp
    return key, value


def _cmd_experiment(args) -> int:
    config = load_config(args.config)
    overrides = dict(_parse_override(item) for item in args.set or [])
    if args.out:
        overrides["output_dir"] = args.out
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.seed is not None:
        overrides["seed"] = args.seed
    config = apply_overrides(config, overrides)
    config.validate()
    manifest = run_experiment(config)
    print(json.dumps({"run_id": manifest["run_id"], "outputs": [o["name"] for o in manifest["outputs"]]}))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="qkgeom", description=__doc__)
    parser.add_argument(
        "--json-errors", action="store_true", help="report failures as JSON on stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="sample a synthetic dataset to CSV")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_data)

    p = sub.add_parser("kernel", help="build a fidelity kernel from a dataset CSV")
    _add_map_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--labels", action="store_true", help="dataset CSV carries a label column")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_kernel)

    p = sub.add_parser("spectrum", help="normalized eigenvalues of a kernel CSV")
    p.add_argument("--kernel", required=True)
    p.add_argument("--out", help="write the full descending spectrum here")
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("gd", help="geometric difference g_d(K1||K2)")
    p.add_argument("--k1", required=True, help="kernel being inverted (classical slot)")
    p.add_argument("--k2", required=True)
    p.add_argument("--eps-rel", type=float, default=1e-10)
    p.set_defaults(fn=_cmd_gd)

    p = sub.add_parser("svm", help="train/score an SVM on a feature-map kernel")
    _add_map_flags(p)
    p.add_argument("--train-data", required=True, help="labeled dataset CSV")
    p.add_argument("--test-data")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--model-out")
    p.set_defaults(fn=_cmd_svm)

    p = sub.add_parser("tune-gamma", help="invert a gamma_max curve at a target")
    p.add_argument("--curve", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--target", type=float, required=True)
    p.set_defaults(fn=_cmd_tune_gamma)

    p = sub.add_parser("min-gd", help="classical-bandwidth grid search minimizing g_d")
    p.add_argument("--quantum-kernel", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--family", default="classical_iqp")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--boundary", choices=BOUNDARIES, default="open")
    p.add_argument("--grid-log-start", type=float, default=-1.5)
    p.add_argument("--grid-log-stop", type=float, default=0.5)
    p.add_argument("--grid-num", type=int, default=17)
    p.add_argument("--eps-rel", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_min_gd)

    p = sub.add_parser("experiment", help="run a declarative experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the output directory")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config field")
    p.set_defaults(fn=_cmd_experiment)

    return parser


def _report_error(kind: str, exc: Exception, json_errors: bool) -> None:
    if json_errors:
        payload = {"error": kind, "message": str(exc), "type": type(exc).__name__}
        print(json.dumps(payload), file=sys.stderr)
    else:
        print(f"qkgeom: {kind} error: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    json_errors = "--json-errors" in argv
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    # LinAlgError subclasses ValueError, so the numerical branch goes first.
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        _report_error("numerical", exc, json_errors)
        return 2
    except (ValidationError, ValueError, FileNotFoundError) as exc:
        _report_error("validation", exc, json_errors)
        return 1


if __name__ == "__main__":
    sys.exit(main())
