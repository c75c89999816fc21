"""Panel-data generating process with a parallel never-treated track.

Binary covariates evolve with latent confounding and optional treatment
feedback, treatment adoption is staggered via a falling threshold, and
outcomes carry an additively separable confounder plus a heterogeneous
treatment effect. A second track re-runs every unit with treatment forced
to zero on identical noise draws, so each unit carries both potential
outcomes and group-level effects can be computed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import SimulationError

# Substream namespaces for the counter-based generator; a stream is keyed by
# (seed, namespace + period) and unit i always reads position i, so results
# do not depend on evaluation order or parallelism.
_NS_LATENT = 0
_NS_X = 1_000
_NS_D = 2_000
_NS_Y = 3_000

_X_NOISE_SD = 1.5
_D_NOISE_SD = 1.5
_Y_NOISE_SD = 0.1


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters; defaults replicate the reference setup
    (six periods, latent correlation 0.9, no treatment-covariate feedback).
    """

    n: int
    T: int = 6
    rho: float = 0.9
    beta_xd: float = 0.0
    seed: int = 0
    zero_effect: bool = False
    xy_effect: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise SimulationError("need at least one unit")
        if self.T < 2:
            raise SimulationError("need at least two periods")
        if not -0.5 < self.rho < 1.0:
            raise SimulationError("latent correlation must lie in (-0.5, 1) for a positive definite covariance")

    def sigma(self) -> np.ndarray:
        r = self.rho
        return np.array([[1.0, r, r], [r, 1.0, r], [r, r, 1.0]])


@dataclass
class Panel:
    """Simulated unit-by-period data, both treatment tracks included.

    ``group`` is the first treatment period; never-treated units carry the
    sentinel value ``T``. ``x0`` and ``y0`` are the covariate and outcome
    paths of the all-zero-treatment track, sharing every noise draw with
    the factual track.
    """

    config: SimConfig
    x: np.ndarray      # (n, T) int8, factual covariates
    x0: np.ndarray     # (n, T) int8, never-treated covariates
    d: np.ndarray      # (n, T) int8
    y: np.ndarray      # (n, T) float64
    y0: np.ndarray     # (n, T) float64
    u: np.ndarray      # (n, 3) latents: u_dy, u_xd, u_xy
    group: np.ndarray  # (n,) int64

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def T(self) -> int:
        return self.x.shape[1]

    @property
    def never_treated_code(self) -> int:
        return self.T

    def to_dataframe(self, include_latents: bool = False) -> pd.DataFrame:
        n, T = self.x.shape
        ids = np.repeat(np.arange(n), T)
        ts = np.tile(np.arange(T), n)
        data = {
            "id": ids,
            "t": ts,
            "x": self.x.ravel(),
            "d": self.d.ravel(),
            "y": self.y.ravel(),
            "y0": self.y0.ravel(),
            "group": np.repeat(self.group, T),
        }
        if include_latents:
            data["x0"] = self.x0.ravel()
            data["u_dy"] = np.repeat(self.u[:, 0], T)
            data["u_xd"] = np.repeat(self.u[:, 1], T)
            data["u_xy"] = np.repeat(self.u[:, 2], T)
        return pd.DataFrame(data)

    def to_csv(self, path_or_buf, include_latents: bool = False) -> None:
        self.to_dataframe(include_latents).to_csv(path_or_buf, index=False, float_format="%.12g")

    @staticmethod
    def from_dataframe(df: pd.DataFrame) -> "Panel":
        required = {"id", "t", "x", "d", "y", "group"}
        missing = required - set(df.columns)
        if missing:
            raise SimulationError(f"panel is missing columns: {sorted(missing)}")
        df = df.sort_values(["id", "t"], kind="stable")
        ids = df["id"].to_numpy()
        n = len(np.unique(ids))
        T = int(df["t"].max()) + 1
        if len(df) != n * T:
            raise SimulationError("panel is not balanced (need one row per unit and period)")

        def grid(col, dtype):
            return df[col].to_numpy().reshape(n, T).astype(dtype)

        y0 = grid("y0", np.float64) if "y0" in df.columns else np.full((n, T), np.nan)
        x0 = grid("x0", np.int8) if "x0" in df.columns else grid("x", np.int8)
        u = (
            np.stack([grid(c, np.float64)[:, 0] for c in ("u_dy", "u_xd", "u_xy")], axis=1)
            if {"u_dy", "u_xd", "u_xy"} <= set(df.columns)
            else np.full((n, 3), np.nan)
        )
        return Panel(
            config=SimConfig(n=n, T=T),
            x=grid("x", np.int8),
            x0=x0,
            d=grid("d", np.int8),
            y=grid("y", np.float64),
            y0=y0,
            u=u,
            group=grid("group", np.int64)[:, 0],
        )

    @staticmethod
    def read_csv(path_or_buf) -> "Panel":
        return Panel.from_dataframe(pd.read_csv(path_or_buf))

    def has_oracle(self) -> bool:
        return bool(np.isfinite(self.y0).all())


def _stream(seed: int, namespace: int, n: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, namespace]))
    return gen.standard_normal(n)


def simulate_panel(cfg: SimConfig) -> Panel:
    """Generate the panel, bit-identical for a given configuration."""
    n, T = cfg.n, cfg.T
    sigma = cfg.sigma()
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:  # pragma: no cover - config validation rejects these
        raise SimulationError("latent covariance is not positive definite") from None

    z = np.stack([_stream(cfg.seed, _NS_LATENT + k, n) for k in range(3)], axis=1)
    u = z @ chol.T
    u_dy, u_xd, u_xy = u[:, 0], u[:, 1], u[:, 2]

    x = np.zeros((n, T), dtype=np.int8)
    x0 = np.zeros((n, T), dtype=np.int8)
    d = np.zeros((n, T), dtype=np.int8)
    y = np.zeros((n, T))
    y0 = np.zeros((n, T))

    eps = _X_NOISE_SD * _stream(cfg.seed, _NS_X + 0, n)
    x[:, 0] = (0.3 * u_xd + 0.3 * u_xy + eps > 0).astype(np.int8)
    x0[:, 0] = x[:, 0]

    for t in range(1, T):
        eps = _X_NOISE_SD * _stream(cfg.seed, _NS_X + t, n)
        drift = 0.3 * u_xd + 0.3 * u_xy + eps
        x[:, t] = (drift + 0.1 * (x[:, t - 1] - 0.6) + cfg.beta_xd * d[:, t - 1] > 0).astype(np.int8)
        x0[:, t] = (drift + 0.1 * (x0[:, t - 1] - 0.6) > 0).astype(np.int8)

        eps_d = _D_NOISE_SD * _stream(cfg.seed, _NS_D + t, n)
        index = (
            u_dy
            + u_xd
            + 0.15 * t * (x[:, t - 1] - 0.6)
            + 0.35 * t * (x[:, t] - 0.6)
            + eps_d
        )
        adopt = index > 0.7 - 0.3 * t
        d[:, t] = d[:, t - 1] | adopt.astype(np.int8)

    for t in range(T):
        eps_y = _Y_NOISE_SD * _stream(cfg.seed, _NS_Y + t, n)
        base = 0.6 * np.sqrt(t) + u_dy + 0.8 * u_xy + eps_y
        if cfg.xy_effect:
            factual = base + (0.5 + 0.1 * t) * x[:, t]
            counter = base + (0.5 + 0.1 * t) * x0[:, t]
            effect = 0.2 + 0.2 * t * u_dy + 0.05 * u_xy * x[:, t]
        else:
            factual = base
            counter = base
            effect = 0.2 + 0.2 * t * u_dy
        if cfg.zero_effect:
            effect = 0.0
        y0[:, t] = counter
        y[:, t] = factual + d[:, t] * effect

    treated_any = d.any(axis=1)
    group = np.where(treated_any, d.argmax(axis=1), T).astype(np.int64)
    return Panel(config=cfg, x=x, x0=x0, d=d, y=y, y0=y0, u=u, group=group)


def oracle_att_from_panel(panel: Panel, g: int, t: int) -> float:
    """Ground-truth group-time effect from the dual-track panel."""
    if not 1 <= g <= panel.T - 1:
        raise SimulationError(f"g={g} outside 1..{panel.T - 1}")
    if not 0 <= t <= panel.T - 1:
        raise SimulationError(f"t={t} outside 0..{panel.T - 1}")
    mask = panel.group == g
    if not mask.any():
        raise SimulationError(f"no units first treated in period {g}")
    return float((panel.y[mask, t] - panel.y0[mask, t]).mean())


def oracle_att(cfg: SimConfig, g: int, t: int) -> float:
    """Simulate under ``cfg`` and return the Monte-Carlo ATT(g, t)."""
    return oracle_att_from_panel(simulate_panel(cfg), g, t)
