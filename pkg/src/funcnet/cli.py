"""Command-line surface: CSV in, CSV out.

Commands: fit, predict, cv, tune, weights, curves, synth. Progress and
info go to stderr/stdout; data only ever goes to files. Exit codes:
0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import datafiles, model as fnn, selection, synth
from .errors import NumericalError, ValidationError
from .network import TrainConfig


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _progress_bar(done: int, total: int, quiet: bool) -> None:
    if quiet:
        return
    width = 50
    filled = int(width * done / total)
    pct = int(100 * done / total)
    end = "\n" if done == total else "\r"
    print(f"  |{'+' * filled}{' ' * (width - filled)}| {pct}",
          file=sys.stderr, end=end, flush=True)


def _add_shared(parser, need_resp=True):
    parser.add_argument("--func-cov", action="append", default=[],
                        help="curve or tensor file, one per covariate")
    parser.add_argument("--scalar-cov", help="N x J scalar covariate file")
    if need_resp:
        parser.add_argument("--resp", help="response file")
    parser.add_argument("--domain", action="append", default=[],
                        metavar="A:B", help="domain per covariate")
    parser.add_argument("--raw-data", action="store_true",
                        help="treat --func-cov files as raw curves")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quiet", action="store_true",
                        help="suppress all non-error output")
    parser.add_argument("--out", help="output file path")


def _add_fit_flags(parser):
    parser.add_argument("--basis", action="append", default=[],
                        choices=["fourier", "bspline"])
    parser.add_argument("--num-basis", action="append", type=int, default=[])
    parser.add_argument("--hidden-layers", type=int, default=2)
    parser.add_argument("--neurons", action="append", type=int, default=[])
    parser.add_argument("--activations", action="append", default=[])
    parser.add_argument("--epochs", type=int, default=100)
    parser.add_argument("--learn-rate", type=float, default=0.001)
    parser.add_argument("--decay-rate", type=float, default=0.0)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--val-split", type=float, default=0.2)
    parser.add_argument("--early-stopping", action="store_true")
    parser.add_argument("--patience", type=int, default=15)
    parser.add_argument("--dropout", type=float, default=0.0)
    parser.add_argument("--response-mode", default=None,
                        choices=list(fnn.RESPONSE_MODES),
                        help="override response-mode inference")


def _parse_domains(args) -> list[tuple[float, float]]:
    domains = []
    for spec in args.domain:
        try:
            a, b = spec.split(":")
            domains.append((float(a), float(b)))
        except ValueError:
            raise ValidationError(f"bad --domain value {spec!r}; expected A:B")
    if not domains:
        raise ValidationError("at least one --domain A:B is required")
    return domains


def _load_func_cov(args):
    if not args.func_cov:
        raise ValidationError("at least one --func-cov file is required")
    if args.raw_data:
        return [datafiles.load_curves(path) for path in args.func_cov]
    covariates = []
    for path in args.func_cov:
        covariates.extend(datafiles.load_tensor(path).covariates)
    from .basis import FunctionalDataSet

    return FunctionalDataSet(covariates)


def _load_scalars(args):
    return datafiles.load_table(args.scalar_cov) if args.scalar_cov else None


def _load_response(args):
    """Infer the response mode from file shape unless overridden.

    Multiple columns mean a functional response (basis coefficients); a
    single non-numeric column means classification; otherwise regression.
    """
    if not args.resp:
        raise ValidationError("--resp is required")
    override = getattr(args, "response_mode", None)
    try:
        table = datafiles.load_table(args.resp)
        numeric = True
    except ValidationError:
        numeric = False
    if not numeric:
        return datafiles.load_labels(args.resp), "classification"
    if override == "classification":
        return datafiles.load_labels(args.resp), "classification"
    if table.shape[1] > 1:
        return table, override or "functional"
    return table[:, 0], override or "regression"


def _build_config(args, domains, mode) -> fnn.FnnConfig:
    train = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learn_rate=args.learn_rate,
        decay_rate=args.decay_rate,
        validation_split=args.val_split,
        early_stopping=args.early_stopping,
        patience=args.patience,
        seed=args.seed,
    )
    return fnn.FnnConfig.build(
        domain_ranges=domains,
        basis_kinds=args.basis or ["fourier"] * len(domains),
        num_basis=args.num_basis
        or [fnn.DEFAULT_WEIGHT_BASIS_SIZE] * len(domains),
        hidden_layers=args.hidden_layers,
        neurons=args.neurons or [64] * args.hidden_layers,
        activations=args.activations or ["relu"] * args.hidden_layers,
        dropout=args.dropout,
        response_mode=mode,
        train=train,
        raw_data=args.raw_data,
    )


def _integral_progress(quiet):
    if quiet:
        return None
    print("Evaluating Integrals:", file=sys.stderr)
    # one full bar per covariate, matching the per-covariate granularity
    return lambda done, total: _progress_bar(1, 1, quiet)


def _cmd_fit(args) -> int:
    domains = _parse_domains(args)
    resp, mode = _load_response(args)
    config = _build_config(args, domains, mode)
    model = fnn.fit(
        resp,
        _load_func_cov(args),
        config,
        scalar_cov=_load_scalars(args),
        print_info=not args.quiet,
        progress=_integral_progress(args.quiet),
    )
    if not args.out:
        raise ValidationError("fit needs --out for the model file")
    datafiles.save_model(model, args.out)
    return 0


def _cmd_predict(args) -> int:
    model = datafiles.load_model(args.model)
    pred = fnn.predict(model, _load_func_cov(args), scalar_cov=_load_scalars(args))
    if not args.out:
        raise ValidationError("predict needs --out for the prediction table")
    datafiles.save_table(np.atleast_2d(pred), args.out)
    return 0


def _cmd_cv(args) -> int:
    domains = _parse_domains(args)
    resp, mode = _load_response(args)
    config = _build_config(args, domains, mode)
    progress = None
    if not args.quiet:
        progress = lambda k, total: print(f"Folds Done: {k}", file=sys.stderr)
    result = selection.cross_validate(
        config,
        resp,
        _load_func_cov(args),
        scalar_cov=_load_scalars(args),
        nfolds=args.nfolds,
        progress=progress,
    )
    if not args.quiet:
        for k, mspe in enumerate(result.per_fold_mspe, start=1):
            print(f"Fold {k} MSPE: {mspe!r}")
        print(f"Overall MSPE: {result.overall_mspe!r}")
    if args.out:
        datafiles.save_table(
            np.array([[result.overall_mspe] + result.per_fold_mspe]),
            args.out,
            header=["overall"] + [
                f"fold_{k + 1}" for k in range(len(result.per_fold_mspe))
            ],
        )
    return 0


def _load_grid(path) -> dict:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ValidationError(f"{path}: cannot read grid file ({exc})") from exc
    return {
        key: value if isinstance(value, list) else [value]
        for key, value in doc.items()
    }


def _cmd_tune(args) -> int:
    domains = _parse_domains(args)
    resp, mode = _load_response(args)
    grid = _load_grid(args.grid)
    progress = None
    if not args.quiet:
        progress = lambda done, total: _progress_bar(done, total, args.quiet)
    result = selection.tune(
        grid,
        resp,
        _load_func_cov(args),
        basis_choice=args.basis or ["fourier"],
        domain_ranges=domains,
        scalar_cov=_load_scalars(args),
        response_mode=mode,
        batch_size=args.batch_size,
        decay_rate=args.decay_rate,
        nfolds=args.nfolds,
        workers=args.workers,
        raw_data=args.raw_data,
        base_seed=args.seed,
    )
    if not args.quiet:
        print("Best candidate parameters:")
        for key, value in result.parameters.items():
            print(f"  {key}: {value}")
    if args.out:
        _write_tune_table(result, args.out)
    return 0


def _write_tune_table(result, path) -> None:
    # activations are strings, so this table is written cell by cell
    header = None
    lines = []
    for cand, mspe in zip(result.candidates, result.mspe):
        row = cand.as_row()
        if header is None:
            header = list(row) + ["MSPE"]
        cells = [str(v) for v in row.values()] + [repr(float(mspe))]
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        fh.write("\n".join(lines) + "\n")


def _cmd_weights(args) -> int:
    model = datafiles.load_model(args.model)
    if not args.out:
        raise ValidationError("weights needs --out for the table")
    datafiles.write_weights(model, args.out)
    return 0


def _cmd_curves(args) -> int:
    pred = datafiles.load_table(args.pred)
    domains = _parse_domains(args)
    grid, curves = fnn.curve_predictions(
        pred, domains[0], args.step_size, basis_kind=args.basis_kind
    )
    if not args.out:
        raise ValidationError("curves needs --out for the table")
    datafiles.write_curves(grid, curves, args.out)
    return 0


def _cmd_history(args) -> int:
    model = datafiles.load_model(args.model)
    if not args.out:
        raise ValidationError("history needs --out for the table")
    datafiles.write_history(model.history, args.out)
    return 0


def _cmd_synth(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    if args.mode == "classification":
        data = synth.make_classification(n=args.n, seed=args.seed)
    else:
        data = synth.make_regression(n=args.n, seed=args.seed)
    datafiles.save_curves(data.raw, os.path.join(args.out_dir, "func.csv"))
    resp_path = os.path.join(args.out_dir, "resp.csv")
    if args.mode == "classification":
        with open(resp_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(str(v) for v in data.response) + "\n")
    else:
        datafiles.save_table(np.asarray(data.response)[:, None], resp_path)
    datafiles.save_table(
        np.asarray(data.beta_coefs)[None, :],
        os.path.join(args.out_dir, "beta.csv"),
    )
    if not args.quiet:
        print(f"wrote func.csv, resp.csv, beta.csv to {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="funcnet",
                     description="functional neural networks on CSV data")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="train a model")
    _add_shared(p_fit)
    _add_fit_flags(p_fit)

    p_pred = sub.add_parser("predict", help="predict with a saved model")
    _add_shared(p_pred, need_resp=False)
    p_pred.add_argument("--model", required=True)

    p_cv = sub.add_parser("cv", help="k-fold cross-validation")
    _add_shared(p_cv)
    _add_fit_flags(p_cv)
    p_cv.add_argument("--nfolds", type=int, default=5)

    p_tune = sub.add_parser("tune", help="grid-search hyperparameters")
    _add_shared(p_tune)
    p_tune.add_argument("--grid", required=True, help="TOML grid file")
    p_tune.add_argument("--workers", type=int, default=4)
    p_tune.add_argument("--nfolds", type=int, default=5)
    p_tune.add_argument("--basis", action="append", default=[],
                        choices=["fourier", "bspline"])
    p_tune.add_argument("--batch-size", type=int, default=32)
    p_tune.add_argument("--decay-rate", type=float, default=0.0)
    p_tune.add_argument("--response-mode", default=None,
                        choices=list(fnn.RESPONSE_MODES))

    p_w = sub.add_parser("weights", help="emit functional-weight table")
    _add_shared(p_w, need_resp=False)
    p_w.add_argument("--model", required=True)

    p_c = sub.add_parser("curves", help="evaluate predicted response curves")
    _add_shared(p_c, need_resp=False)
    p_c.add_argument("--pred", required=True,
                     help="predicted coefficient table")
    p_c.add_argument("--step-size", type=float, required=True)
    p_c.add_argument("--basis-kind", default="fourier",
                     choices=["fourier", "bspline"])

    p_h = sub.add_parser("history", help="emit training-history table")
    _add_shared(p_h, need_resp=False)
    p_h.add_argument("--model", required=True)

    p_s = sub.add_parser("synth", help="generate seeded synthetic data")
    p_s.add_argument("--mode", default="regression",
                     choices=["regression", "classification"])
    p_s.add_argument("--n", type=int, default=150)
    p_s.add_argument("--seed", type=int, default=0)
    p_s.add_argument("--quiet", action="store_true")
    p_s.add_argument("--out-dir", required=True)

    return parser


_COMMANDS = {
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "cv": _cmd_cv,
    "tune": _cmd_tune,
    "weights": _cmd_weights,
    "curves": _cmd_curves,
    "history": _cmd_history,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
