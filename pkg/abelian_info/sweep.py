"""Grid sweeps over the AEP and block-coding experiments.

A sweep file uses the same layout as a wandb sweep: `program`, `method`
(only `grid`), and `parameters` mapping each name to a fixed `value` or a
list of `values`. `kind` picks the experiment. Grid points run in order and
the report holds one record per point.
"""

import itertools
import logging

from .channel import Channel, coding_experiment, zk_diagnostic
from .errors import ValidationError
from .files import SweepConfig, load_model, report_meta
from .information import typical_summary
from .states import State

logger = logging.getLogger(__name__)

AEP_PARAMETERS = {"probs", "p", "n", "eps", "mode", "method"}
CODING_PARAMETERS = {
    "channel", "bsc", "probs", "rate", "k", "trials", "policy", "codebook",
    "input_distribution", "decoder_scale", "mode", "samples", "zk_eps",
}


def load_sweep(path):
    return load_model(SweepConfig, path)


def grid_points(config):
    """Cartesian product of the parameter grids, in declaration order."""
    names = list(config.parameters)
    if not names:
        return []
    grids = [config.parameters[name].grid() for name in names]
    return [dict(zip(names, combo)) for combo in itertools.product(*grids)]


def _probs(value):
    if isinstance(value, str):
        try:
            return [float(v) for v in value.split(",")]
        except ValueError:
            raise ValidationError(f"Invalid probability list {value!r}") from None
    return [float(v) for v in value]


def _source(params, default_dim=None):
    if "probs" in params:
        return State.from_probs(_probs(params["probs"]))
    if "p" in params:
        p = float(params["p"])
        return State.from_probs([1 - p, p])
    if default_dim is None:
        raise ValidationError("A source needs 'probs' or 'p'")
    return State.from_probs([1.0 / default_dim] * default_dim)


def _check_names(params, allowed, kind):
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise ValidationError(f"Unknown {kind} sweep parameters: {', '.join(unknown)}")


def run_aep_point(params, budget=None):
    _check_names(params, AEP_PARAMETERS, "aep")
    if "n" not in params or "eps" not in params:
        raise ValidationError("An aep grid point needs 'n' and 'eps'")
    summary = typical_summary(
        _source(params),
        int(params["n"]),
        float(params["eps"]),
        mode=params.get("mode", "strict"),
        method=params.get("method", "type-class"),
        budget=budget,
    )
    return summary.model_dump()


def run_coding_point(params, seed, budget=None):
    _check_names(params, CODING_PARAMETERS, "coding")
    if "channel" in params:
        channel = Channel.from_file(params["channel"])
    elif "bsc" in params:
        channel = Channel.bsc(float(params["bsc"]))
    else:
        raise ValidationError("A coding grid point needs 'channel' (file) or 'bsc'")
    if "rate" not in params or "k" not in params:
        raise ValidationError("A coding grid point needs 'rate' and 'k'")
    omega = _source(params, channel.in_dim)
    k, rate = int(params["k"]), float(params["rate"])
    run = coding_experiment(
        channel,
        omega,
        rate,
        k,
        trials=int(params.get("trials", 1)),
        policy=params.get("policy", "uniform"),
        seed=seed,
        codebook=params.get("codebook"),
        input_distribution=params.get("input_distribution", "uniform"),
        decoder_scale=params.get("decoder_scale", "transition"),
        mode=params.get("mode", "exact"),
        samples=int(params.get("samples", 1000)),
        budget=budget,
    )
    record = run.summaries[0].model_dump()
    if params.get("zk_eps") is not None:
        eps = float(params["zk_eps"])
        zk = [
            zk_diagnostic(channel, omega, rate, eps, k, seed=seed, trial=t, budget=budget,
                          policy=params.get("policy", "uniform"), codebook=params.get("codebook"),
                          decoder_scale=params.get("decoder_scale", "transition"))
            for t in range(int(params.get("trials", 1)))
        ]
        record["zk_eps"] = eps
        record["zk_max_mass"] = max(z.mass for z in zk)
        record["zk_bound"] = zk[0].bound
        record["zk_holds"] = all(z.holds for z in zk)
    return record


def run_sweep(config, budget=None):
    """{"meta": ..., "records": [...]}; identical config and seed give identical records."""
    points = grid_points(config)
    tracker = _tracker(config)
    records = []
    for index, params in enumerate(points):
        logger.info("grid point %d/%d: %s", index + 1, len(points), params)
        if config.kind == "aep":
            result = run_aep_point(params, budget)
        else:
            result = run_coding_point(params, config.seed, budget)
        record = {"point": index, "params": params, **result}
        records.append(record)
        if tracker is not None:
            tracker.log({k: v for k, v in record.items() if isinstance(v, (int, float, bool))})
    if tracker is not None:
        tracker.finish()
    meta = report_meta("sweep", config.seed, config.model_dump(mode="json"))
    return {"meta": meta, "records": records}


def _tracker(config):
    options = config.tracking or {}
    if not options.get("wandb"):
        return None
    try:
        import wandb
    except ImportError as e:
        raise ValidationError("tracking.wandb is set but wandb is not installed") from e
    return wandb.init(
        project=options.get("project", "abelian-info"),
        config={"kind": config.kind, "seed": config.seed, "parameters": config.model_dump()["parameters"]},
        mode=options.get("mode", "offline"),
        reinit=True,
    )
