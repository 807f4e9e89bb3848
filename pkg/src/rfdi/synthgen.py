# numpydoc ignore=EX01,GL06,GL07
"""Synthetic two-class data.

Generates tables with correlated factors, linear, non-linear and pure-noise
predictors under a logistic link, then downsamples one class to a requested
imbalance ratio.

Classes
-------
SimConfig
    Sizes, factor correlation, target ratio and seed of a simulation.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging

from dataclasses_json import DataClassJsonMixin
import numpy as np
from scipy.special import expit

from .const import SIM_MAJORITY_TOKEN, SIM_MINORITY_TOKEN, SIM_TARGET
from .dataset import Dataset, FeatureSchema, downsample_to_ir
from .exception_classes import ConfigError

_LOGGER = logging.getLogger(__name__)

FACTOR_COEFFICIENTS = (2.0, -2.0)


@dataclass(frozen=True)
class SimConfig(DataClassJsonMixin):  # numpydoc ignore=ES01,EX01
    """Simulation settings.

    Attributes
    ----------
    n_raw : int
        Rows drawn before downsampling.
    n_factors : int
        Correlated bivariate-normal factors; only 2 is supported.
    n_linear : int
        Standard normal predictors with a linear effect.
    n_nonlinear : int
        Uniform predictors entering the non-linear term; only 3 is supported.
    n_noise : int
        Standard normal predictors without effect.
    factor_correlation : float
        Correlation of the two factors.
    target_ir : float
        Imbalance ratio after downsampling.
    seed : int
        Random seed.
    """

    n_raw: int = 25_000
    n_factors: int = 2
    n_linear: int = 20
    n_nonlinear: int = 3
    n_noise: int = 20
    factor_correlation: float = 0.65
    target_ir: float = 6.0
    seed: int = 0

    @property
    def p(self) -> int:  # numpydoc ignore=ES01,EX01
        """Total number of predictors."""
        return self.n_factors + self.n_linear + self.n_nonlinear + self.n_noise

    def validate(self) -> None:
        """Check the settings.

        Raises
        ------
        ConfigError
            If a setting is out of range.
        """
        if self.n_factors != 2:
            raise ConfigError("The simulator uses exactly 2 factors")
        if self.n_nonlinear != 3:
            raise ConfigError("The simulator uses exactly 3 non-linear predictors")
        if self.n_linear < 1 or self.n_noise < 0:
            raise ConfigError("n_linear must be >= 1 and n_noise >= 0")
        if not -1 < self.factor_correlation < 1:
            raise ConfigError(f"factor_correlation must be in (-1, 1), got {self.factor_correlation}")
        if self.n_raw < 10 * self.p:
            raise ConfigError(f"n_raw must be at least 10 * p = {10 * self.p}, got {self.n_raw}")
        if not self.target_ir >= 1:
            raise ConfigError(f"target_ir must be >= 1, got {self.target_ir}")


def linear_coefficients(n_linear: int) -> np.ndarray:
    """Return the alternating, linearly decaying linear-effect coefficients.

    Coefficient ``k`` (1-based) is ``(-1)**(k+1) * (2.5 - 2.25 * (k-1) / (n_linear-1))``,
    decaying in magnitude from 2.5 to 0.25.

    Parameters
    ----------
    n_linear : int
        Number of linear predictors.

    Returns
    -------
    np.ndarray
        The coefficients.

    Examples
    --------
    >>> linear_coefficients(20)[[0, 1, 19]]
    array([ 2.5       , -2.38157895, -0.25      ])
    """
    k = np.arange(1, n_linear + 1)
    span = max(n_linear - 1, 1)
    return np.where(k % 2 == 1, 1.0, -1.0) * (2.5 - 2.25 * (k - 1) / span)


def feature_names(cfg: SimConfig) -> list[str]:  # numpydoc ignore=ES01,EX01
    """Return the column names ``F*``, ``L*``, ``N*``, ``Z*`` of a simulation.

    Parameters
    ----------
    cfg : SimConfig
        Simulation settings.

    Returns
    -------
    list[str]
        Predictor names in column order.
    """
    return (
        [f"F{i}" for i in range(1, cfg.n_factors + 1)]
        + [f"L{i}" for i in range(1, cfg.n_linear + 1)]
        + [f"N{i}" for i in range(1, cfg.n_nonlinear + 1)]
        + [f"Z{i}" for i in range(1, cfg.n_noise + 1)]
    )


def signal_ranking(cfg: SimConfig) -> list[str]:
    """Return the signal predictors ordered by decreasing coefficient magnitude.

    Factors carry magnitude 2, linear predictors follow their coefficient ramp;
    the non-linear predictors are left out since they have no single coefficient.

    Parameters
    ----------
    cfg : SimConfig
        Simulation settings.

    Returns
    -------
    list[str]
        Names, strongest first.
    """
    names = feature_names(cfg)
    weights = dict(zip(names[: cfg.n_factors], np.abs(FACTOR_COEFFICIENTS), strict=True))
    linear = names[cfg.n_factors : cfg.n_factors + cfg.n_linear]
    weights |= dict(zip(linear, np.abs(linear_coefficients(cfg.n_linear)), strict=True))
    return sorted(weights, key=lambda name: (-weights[name], names.index(name)))


def noise_names(cfg: SimConfig) -> list[str]:  # numpydoc ignore=ES01,EX01
    """Return the names of the pure-noise predictors.

    Parameters
    ----------
    cfg : SimConfig
        Simulation settings.

    Returns
    -------
    list[str]
        ``Z1`` to ``Z{n_noise}``.
    """
    return [f"Z{i}" for i in range(1, cfg.n_noise + 1)]


def simulate_raw(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Draw predictors and outcomes before downsampling.

    Parameters
    ----------
    cfg : SimConfig
        Simulation settings.

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        ``n_raw x p`` predictors and 0/1 outcomes, where 1 marks the class drawn
        less often (ties go to the event class).
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_raw
    rho = cfg.factor_correlation
    factors = rng.multivariate_normal(np.zeros(2), np.array([[1.0, rho], [rho, 1.0]]), size=n)
    linear = rng.standard_normal((n, cfg.n_linear))
    nonlinear = rng.uniform(0.0, 1.0, (n, cfg.n_nonlinear))
    noise = rng.standard_normal((n, cfg.n_noise))

    eta = factors @ np.asarray(FACTOR_COEFFICIENTS) + linear @ linear_coefficients(cfg.n_linear)
    eta += 2.0 * np.sin(np.pi * nonlinear[:, 0] * nonlinear[:, 1]) + 4.0 * (nonlinear[:, 2] - 0.5) ** 2
    eta -= eta.mean()
    event = rng.uniform(0.0, 1.0, n) < expit(eta)

    # the rarer raw class becomes the minority (label 1)
    y = event if np.count_nonzero(event) * 2 <= n else ~event
    x = np.column_stack([factors, linear, nonlinear, noise])
    _LOGGER.debug("Simulated n=%s p=%s raw prevalence %.4f", n, x.shape[1], np.count_nonzero(event) / n)
    return x, y.astype(np.int8)


def simulate_two_class(cfg: SimConfig) -> Dataset:
    """Simulate a two-class table and downsample it to ``cfg.target_ir``.

    The log-odds are ``b0 + 2*F1 - 2*F2 + sum_k b_k*L_k + g(N1, N2, N3)`` with
    ``g = 2*sin(pi*N1*N2) + 4*(N3 - 0.5)**2`` and ``b0`` centring the log-odds at
    zero. The rarer class after sampling is downsampled and becomes label 1
    (token ``class2``).

    Parameters
    ----------
    cfg : SimConfig
        Simulation settings.

    Returns
    -------
    Dataset
        The simulated dataset; identical for identical settings.

    Raises
    ------
    ConfigError
        If the settings are invalid.
    InfeasibleRatio
        If downsampling would leave the minority empty.

    Examples
    --------
    >>> data = simulate_two_class(SimConfig(seed=7))
    >>> data.p
    45
    """
    x, y = simulate_raw(cfg)
    schema = FeatureSchema.numeric(feature_names(cfg), SIM_TARGET, SIM_MINORITY_TOKEN, SIM_MAJORITY_TOKEN)
    data = downsample_to_ir(Dataset.from_arrays(x, y, schema), cfg.target_ir, cfg.seed)
    _LOGGER.info("Simulated dataset n=%s p=%s ir=%.3f", data.n, data.p, data.stats.ir)
    return data
