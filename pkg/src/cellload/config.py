"""Flat ``key = value`` run configuration.

Densities are given per km^2 at this boundary and converted to SI here.
Lines starting with ``#`` are comments. Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

from .analytic import ConstantMode, LoadModel
from .errors import ConfigError
from .linkbudget import DEFAULT_CARRIER_GHZ, KM2, NetworkParams, TrafficParams, free_space_intercept_db
from .specfun import ApproxMode

SWEEP_VARIABLES = ("lambda_bs", "lambda_u", "sigma_bits", "g0_db")
SEED_ENV = "CELLLOAD_SEED"


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


@dataclass
class RunConfig:
    # network
    lambda_bs_km2: float = 10.0
    pt_dbm: float = 30.0
    g0_db: float = 20.0
    bandwidth_hz: float = 1e9
    noise_density_dbm_hz: float = -174.0
    carrier_ghz: float = DEFAULT_CARRIER_GHZ
    k_pathloss_db: float | None = None
    alpha: float = 2.0
    # traffic
    lambda_u_km2: float = 100.0
    sigma_bits: float = 1e8
    # model
    constant_mode: str = "rederived"
    approx_mode: str = "reference"
    quad_rtol: float = 1e-8
    quad_rtol_nested: float = 1e-6
    # sweep
    sweep_variable: str = "lambda_bs"
    sweep_values: tuple = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
    # Monte Carlo
    seed: int | None = None
    realizations: int = 1000
    n_integration_points: int = 100_000
    inner_cells: float = 100.0
    guard_factor: float = 3.0
    # dynamic simulation
    sim_duration_s: float = 300.0
    sim_warmup_s: float | None = None
    max_users_cap: int = 5000
    sim_inner_cells: float = 25.0
    static_draws: int = 400
    # selftest tolerance overrides, name -> value
    tolerances: dict = field(default_factory=dict)

    @property
    def k_db(self) -> float:
        if self.k_pathloss_db is not None:
            return self.k_pathloss_db
        return free_space_intercept_db(self.carrier_ghz)

    def resolved_seed(self) -> int:
        if self.seed is not None:
            return int(self.seed)
        env = os.environ.get(SEED_ENV)
        if env:
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        return 0

    def network(self, **over) -> NetworkParams:
        vals = dict(
            lambda_bs=self.lambda_bs_km2 / KM2,
            pt_dbm=self.pt_dbm,
            g0_db=self.g0_db,
            bandwidth_hz=self.bandwidth_hz,
            noise_density_dbm_hz=self.noise_density_dbm_hz,
            k_pathloss_db=self.k_db,
            alpha=self.alpha,
        )
        vals.update(over)
        return NetworkParams(**vals)

    def traffic(self, **over) -> TrafficParams:
        vals = dict(lambda_u=self.lambda_u_km2 / KM2, sigma_bits=self.sigma_bits)
        vals.update(over)
        return TrafficParams(**vals)

    def model(self, **over) -> LoadModel:
        """Load model, with one sweep variable optionally overridden.

        ``over`` accepts the sweep names in config units.
        """
        net_over, tr_over = {}, {}
        for k, v in over.items():
            if k == "lambda_bs":
                net_over["lambda_bs"] = v / KM2
            elif k == "g0_db":
                net_over["g0_db"] = v
            elif k == "lambda_u":
                tr_over["lambda_u"] = v / KM2
            elif k == "sigma_bits":
                tr_over["sigma_bits"] = v
            else:
                raise ConfigError(f"cannot override {k!r}")
        return LoadModel(
            self.network(**net_over),
            self.traffic(**tr_over),
            ConstantMode(self.constant_mode),
            self.quad_rtol,
            self.quad_rtol_nested,
        )

    @property
    def approx(self) -> ApproxMode:
        return ApproxMode(self.approx_mode)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sweep_values"] = list(self.sweep_values)
        d["k_pathloss_db_resolved"] = self.k_db
        d["seed_resolved"] = self.resolved_seed()
        return d

    def validate(self):
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep_variable must be one of {SWEEP_VARIABLES}")
        vals = self.sweep_values
        if len(vals) == 0:
            raise ConfigError("sweep_values is empty")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep_values must be strictly increasing")
        try:
            ConstantMode(self.constant_mode)
            ApproxMode(self.approx_mode)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.n_integration_points < 1:
            raise ConfigError("n_integration_points must be >= 1")
        try:
            self.network()
            self.traffic()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig) if f.name != "tolerances"}
_INT_KEYS = {"seed", "realizations", "n_integration_points", "max_users_cap", "static_draws"}
_STR_KEYS = {"constant_mode", "approx_mode", "sweep_variable"}
_OPTIONAL_FLOAT = {"k_pathloss_db", "sim_warmup_s"}


def _convert(key, raw):
    raw = raw.strip()
    if key == "sweep_values":
        return _floats(raw)
    if key in _STR_KEYS:
        return raw
    if key in _OPTIONAL_FLOAT and raw.lower() in ("", "none", "auto"):
        return None
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def apply_setting(cfg: RunConfig, key: str, raw: str, where: str = "") -> None:
    key = key.strip().replace("-", "_")
    loc = f"{where}: " if where else ""
    if key.startswith("tol_"):
        try:
            cfg.tolerances[key[4:]] = float(raw)
        except ValueError:
            raise ConfigError(f"{loc}{key}: not a number: {raw!r}") from None
        return
    if key not in _FIELDS:
        raise ConfigError(f"{loc}unknown key {key!r}")
    try:
        setattr(cfg, key, _convert(key, raw))
    except ValueError:
        raise ConfigError(f"{loc}{key}: cannot parse {raw.strip()!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    cfg = RunConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, raw = line.split("=", 1)
        apply_setting(cfg, key, raw, f"{source}:{lineno}")
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))
