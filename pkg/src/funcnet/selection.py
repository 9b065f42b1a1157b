"""Cross-validation and grid-search tuning.

The tuner enumerates the full Cartesian product of the grid axes, with
neurons and activations replicated per hidden layer and basis sizes
replicated per covariate, then scores every candidate by k-fold MSPE.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import model as fnn
from .basis import FunctionalDataSet, smooth_raw_covariates
from .errors import FuncnetError, NumericalError, ValidationError
from .network import TrainConfig

GRID_AXES = (
    "num_hidden_layers",
    "neurons",
    "epochs",
    "val_split",
    "patience",
    "learn_rate",
    "num_basis",
    "activation_choice",
)


@dataclass(frozen=True)
class FoldPlan:
    nfolds: int
    assignments: tuple  # tuple of index arrays, disjoint, covering 0..n-1
    seed: int


def make_folds(n: int, nfolds: int, seed: int = 0) -> FoldPlan:
    """Seeded shuffle followed by round-robin assignment."""
    if nfolds < 2 or nfolds > n:
        raise ValidationError(
            f"nfolds must lie in [2, n]; got nfolds={nfolds}, n={n}"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return FoldPlan(
        nfolds, tuple(perm[k::nfolds] for k in range(nfolds)), seed
    )


@dataclass
class CvResult:
    overall_mspe: float
    per_fold_mspe: list
    folds: FoldPlan
    fold_predictions: list  # per fold, prediction matrix for its rows


def _squared_errors(pred: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-observation squared prediction error (averaged across outputs)."""
    return np.mean((pred - y) ** 2, axis=1)


def cross_validate(
    config: fnn.FnnConfig,
    resp,
    func_cov,
    scalar_cov=None,
    nfolds: int = 5,
    progress=None,
) -> CvResult:
    """k-fold MSPE: train on each fold's complement, score the fold.

    The overall value follows the pooled formula
    sum_k sum_{l in S_k} (yhat_l - y_l)^2 / (|S_k| * K).
    """
    if config.raw_data:
        fd = fnn._resolve_data(config, func_cov)
        config = replace(config, raw_data=False)
    else:
        fd = func_cov
    if not isinstance(fd, FunctionalDataSet):
        raise ValidationError("cross_validate needs functional covariates")
    y, _, _ = fnn._encode_response(resp, config.response_mode)
    scalars = None if scalar_cov is None else np.atleast_2d(
        np.asarray(scalar_cov, dtype=float)
    )
    n = fd.n_obs
    plan = make_folds(n, nfolds, config.train.seed)
    per_fold = []
    fold_preds = []
    pooled = 0.0
    for k, hold in enumerate(plan.assignments):
        rest = np.setdiff1d(np.arange(n), hold)
        try:
            fitted = fnn.fit(
                _take_response(resp, config.response_mode, rest),
                fd.subset(rest),
                config,
                scalar_cov=None if scalars is None else scalars[rest],
                print_info=False,
            )
            pred = fnn.predict(
                fitted,
                fd.subset(hold),
                scalar_cov=None if scalars is None else scalars[hold],
            )
        except FuncnetError as exc:
            raise type(exc)(f"fold {k + 1} failed: {exc}") from exc
        errs = _squared_errors(np.atleast_2d(pred), y[hold])
        per_fold.append(float(errs.mean()))
        pooled += float(errs.sum()) / (hold.size * nfolds)
        fold_preds.append(np.atleast_2d(pred))
        if progress is not None:
            progress(k + 1, nfolds)
    return CvResult(pooled, per_fold, plan, fold_preds)


def _take_response(resp, mode, idx):
    arr = np.asarray(resp)
    return arr[idx]


@dataclass(frozen=True)
class TuneCandidate:
    index: int
    num_hidden_layers: int
    neurons: tuple
    activations: tuple
    num_basis: tuple  # one entry per functional covariate
    epochs: int
    val_split: float
    patience: int
    learn_rate: float

    def as_row(self) -> dict:
        row = {f"L{i + 1}_Act": a for i, a in enumerate(self.activations)}
        row.update({f"FW_{k + 1}": m for k, m in enumerate(self.num_basis)})
        row.update({f"L{i + 1}_N": u for i, u in enumerate(self.neurons)})
        row.update(
            Epochs=self.epochs,
            ValSplit=self.val_split,
            Patience=self.patience,
            LearnRate=self.learn_rate,
        )
        return row


@dataclass
class TuneResult:
    candidates: list
    mspe: list
    best_index: int
    best_per_layer_count: dict  # num_hidden_layers -> candidate index
    parameters: dict = field(default_factory=dict)


def expand_grid(tune_list: dict, n_covariates: int) -> list[TuneCandidate]:
    """Full Cartesian product of the grid axes.

    Neurons and activations are replicated per hidden layer, basis sizes
    per covariate; the whole grid is reproduced for each hidden-layer
    count. Order is lexicographic in axis declaration order.
    """
    unknown = set(tune_list) - set(GRID_AXES)
    if unknown:
        raise ValidationError(f"unknown grid axes: {sorted(unknown)}")
    axes = {name: list(tune_list.get(name, [])) for name in GRID_AXES}
    for name, values in axes.items():
        if not values:
            raise ValidationError(f"grid axis {name!r} is empty or missing")
    candidates = []
    for depth in axes["num_hidden_layers"]:
        depth = int(depth)
        if depth < 1:
            raise ValidationError("num_hidden_layers entries must be >= 1")
        pools = (
            [axes["neurons"]] * depth
            + [axes["epochs"], axes["val_split"], axes["patience"],
               axes["learn_rate"]]
            + [axes["num_basis"]] * n_covariates
            + [axes["activation_choice"]] * depth
        )
        for combo in itertools.product(*pools):
            neurons = tuple(int(u) for u in combo[:depth])
            epochs, val_split, patience, learn_rate = combo[depth:depth + 4]
            nb = tuple(int(m) for m in combo[depth + 4:depth + 4 + n_covariates])
            acts = tuple(combo[depth + 4 + n_covariates:])
            candidates.append(
                TuneCandidate(
                    index=len(candidates),
                    num_hidden_layers=depth,
                    neurons=neurons,
                    activations=acts,
                    num_basis=nb,
                    epochs=int(epochs),
                    val_split=float(val_split),
                    patience=int(patience),
                    learn_rate=float(learn_rate),
                )
            )
    return candidates


def candidate_config(
    candidate: TuneCandidate,
    basis_kinds,
    domain_ranges,
    response_mode: str = "regression",
    batch_size: int = 32,
    decay_rate: float = 0.0,
    seed: int = 0,
) -> fnn.FnnConfig:
    train = TrainConfig(
        epochs=candidate.epochs,
        batch_size=batch_size,
        learn_rate=candidate.learn_rate,
        decay_rate=decay_rate,
        validation_split=candidate.val_split,
        early_stopping=candidate.val_split > 0,
        patience=candidate.patience,
        seed=seed,
    )
    return fnn.FnnConfig.build(
        domain_ranges=domain_ranges,
        basis_kinds=basis_kinds,
        num_basis=candidate.num_basis,
        hidden_layers=candidate.num_hidden_layers,
        neurons=candidate.neurons,
        activations=candidate.activations,
        response_mode=response_mode,
        train=train,
    )


def tune(
    tune_list: dict,
    resp,
    func_cov,
    basis_choice,
    domain_ranges,
    scalar_cov=None,
    response_mode: str = "regression",
    batch_size: int = 32,
    decay_rate: float = 0.0,
    nfolds: int = 5,
    workers: int = 4,
    raw_data: bool = False,
    base_seed: int = 0,
    progress=None,
) -> TuneResult:
    """Score every grid candidate by k-fold MSPE and return the argmin.

    Candidate i trains with seed base_seed + i, so results do not depend
    on execution order or worker count. Failed candidates score +inf and
    are excluded from the argmin. Ties go to the lowest grid index.
    """
    if raw_data:
        # smoothing happens once up front, not per candidate
        raw_list = func_cov if isinstance(func_cov, (list, tuple)) else [func_cov]
        func_cov = smooth_raw_covariates(list(raw_list), domain_ranges)
    if not isinstance(func_cov, FunctionalDataSet):
        raise ValidationError(
            "tune needs pre-processed covariates (or set raw_data)"
        )
    candidates = expand_grid(tune_list, func_cov.n_covariates)
    done = 0

    def evaluate(candidate: TuneCandidate) -> float:
        config = candidate_config(
            candidate,
            basis_choice,
            domain_ranges,
            response_mode=response_mode,
            batch_size=batch_size,
            decay_rate=decay_rate,
            seed=base_seed + candidate.index,
        )
        try:
            return cross_validate(
                config, resp, func_cov, scalar_cov=scalar_cov, nfolds=nfolds
            ).overall_mspe
        except FuncnetError:
            return float("inf")

    scores = [float("inf")] * len(candidates)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for idx, score in zip(
                range(len(candidates)), pool.map(evaluate, candidates)
            ):
                scores[idx] = score
                done += 1
                if progress is not None:
                    progress(done, len(candidates))
    else:
        for candidate in candidates:
            scores[candidate.index] = evaluate(candidate)
            done += 1
            if progress is not None:
                progress(done, len(candidates))

    finite = [i for i, s in enumerate(scores) if np.isfinite(s)]
    if not finite:
        raise NumericalError("every tuning candidate failed")
    best = min(finite, key=lambda i: scores[i])
    best_per_layer = {}
    for i in finite:
        depth = candidates[i].num_hidden_layers
        if depth not in best_per_layer or scores[i] < scores[best_per_layer[depth]]:
            best_per_layer[depth] = i
    winner = candidates[best]
    parameters = {
        "MSPE": scores[best],
        "num_basis": list(winner.num_basis),
        "hidden_layers": winner.num_hidden_layers,
        "neurons_per_layer": list(winner.neurons),
        "activations_in_layers": list(winner.activations),
        "epochs": winner.epochs,
        "val_split": winner.val_split,
        "patience_param": winner.patience,
        "learn_rate": winner.learn_rate,
    }
    return TuneResult(candidates, scores, best, best_per_layer, parameters)
