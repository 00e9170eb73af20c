import logging
from dataclasses import replace

import numpy as np
import pandas as pd

from app.core.utils import ConfigurationError, FreqFedError, SweepFailedError
from app.federation.reports import SWEEP_COLUMNS
from app.federation.server import run_federation
from app.federation.types import FederationConfig, SweepAxis

logger = logging.getLogger(__name__)

HONEST_MAJORITY_LIMIT = 0.5


def parse_axis(raw):
    try:
        return SweepAxis(raw).value
    except ValueError:
        raise ConfigurationError(
            f"Unknown sweep axis {raw!r}; expected one of {SweepAxis.values}"
        )


def parse_values(raw):
    """``"0.1,0.3"`` -> ``[0.1, 0.3]``."""
    try:
        values = [float(v) for v in str(raw).split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"Sweep values must be numbers, got {raw!r}")
    if not values:
        raise ConfigurationError("A sweep needs at least one value.")
    return values


def config_for(cfg: FederationConfig, axis, value) -> FederationConfig:
    """``cfg`` with ``axis`` set to ``value``."""
    axis = SweepAxis(axis)
    if axis == SweepAxis.IID_RATE:
        if not 0.0 <= value <= 1.0:
            raise ConfigurationError(f"iid_rate must lie in [0, 1], got {value}")
        return cfg.evolve(iid_rate=value)
    if cfg.attack is None:
        raise ConfigurationError(f"Sweeping {axis.value} needs an attack.")
    try:
        return cfg.evolve(attack=replace(cfg.attack, **{axis.value: value}))
    except FreqFedError as exc:
        raise ConfigurationError(str(exc))


def _mean_defined(values):
    defined = [v for v in values if v >= 0]
    return float(np.mean(defined)) if defined else -1.0


def _is_informational(cfg: FederationConfig):
    return cfg.attack is not None and cfg.attack.pmr >= HONEST_MAJORITY_LIMIT


def sweep(cfg: FederationConfig, axis, values) -> pd.DataFrame:
    """One full federation per value, summarised by its final round."""
    axis = SweepAxis(axis)
    configs = [(value, config_for(cfg, axis, value)) for value in values]

    rows = []
    for value, run_cfg in configs:
        informational = _is_informational(run_cfg)
        if informational:
            logger.warning(
                f"{axis.value}={value} runs without an honest majority; "
                "the row is informational"
            )
        try:
            reports = run_federation(run_cfg)
        except Exception as exc:
            raise SweepFailedError(axis.value, value, exc) from exc
        final = reports[-1]
        rows.append(
            {
                "axis": axis.value,
                "value": value,
                "final_ma": final.ma,
                "final_ba": final.ba,
                "mean_tpr": _mean_defined([r.tpr for r in reports]),
                "mean_tnr": _mean_defined([r.tnr for r in reports]),
                "informational": informational,
            }
        )
        logger.info(
            f"sweep {axis.value}={value}: final ma={final.ma:.4f} "
            f"ba={final.ba:.4f}"
        )
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
