"""Scenario configuration, sampling, and the key=value config codec.

All internal quantities are SI (meters, Hz, watts, bits, seconds, radians).
dB, dBm, KB and GHz exist only at the config-file boundary. A config file is
flat `key = value` lines with `#` comments; unknown or repeated keys are
parse errors so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from . import channels, latency
from .channels import PlanarPosition, UserChannelSpec
from .errors import ParseError, ValidationError
from .latency import ServerProfile, UserProfile

BITS_PER_KB = 8192.0

# Substream tags so sampling never shares draws with the optimizer streams.
_SAMPLE_DOMAIN = 11


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_watts: float) -> float:
    return 10.0 * math.log10(value_watts) + 30.0


@dataclass
class ScenarioConfig:
    """Physical constants, sampling ranges and solver hyperparameters.

    Defaults reproduce the reference simulation setup: a 4-antenna receiver
    serving 3 users over 3 paths each at 0.1 m wavelength, with the movable
    region spanning 1.5 wavelengths and antennas kept at least one wavelength
    apart. Derived defaults (region_half_width, min_spacing, velocity_clamp)
    resolve from the wavelength when not given explicitly.
    """

    antenna_count: int = 4
    user_count: int = 3
    paths_per_user: int = 3
    wavelength: float = 0.1
    region_half_width: float | None = None
    min_spacing: float | None = None
    data_size_range: tuple[float, float] = (0.5 * BITS_PER_KB, 2.0 * BITS_PER_KB)
    local_cpu_range: tuple[float, float] = (0.8e9, 1.0e9)
    aoa_range: tuple[float, float] = (-math.pi / 2, math.pi / 2)
    user_distance_range: tuple[float, float] = (20.0, 100.0)
    reference_gain: float = 1e-4
    path_loss_exponent: float = 2.8
    server_max_frequency: float = 1e10
    transmit_power_dbm: float = 30.0
    noise_psd_dbm_per_hz: float = -174.0
    bandwidth: float = 1e6
    model_size_factor: float = 0.1
    cycles_per_bit: float = 1000.0
    server_cycles_per_bit: float = 1000.0
    minibatch_ratio: float = 0.5
    training_iterations: float = 10.0
    particle_count: int = 50
    swarm_iterations: int = 50
    cognitive_factor: float = 2.0
    social_factor: float = 2.0
    inertia_max: float = 0.9
    inertia_min: float = 0.4
    penalty_latency: float = 1e3
    penalty_distance: float = 1e3
    velocity_clamp: float | None = None
    outer_iterations: int = 3
    allocation_tolerance: float = 1e-6
    rounding_mode: str = "continuous"
    rounding_threshold: float = 0.5
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.region_half_width is None:
            self.region_half_width = 1.5 * self.wavelength
        if self.min_spacing is None:
            self.min_spacing = self.wavelength
        if self.velocity_clamp is None:
            self.velocity_clamp = self.region_half_width / 2.0
        self.validate()

    def validate(self) -> None:
        def require(ok: bool, invariant: str) -> None:
            if not ok:
                raise ValidationError(invariant)

        require(self.antenna_count >= 1, "antenna_count must be at least 1")
        require(self.user_count >= 1, "user_count must be at least 1")
        require(
            self.user_count <= self.antenna_count,
            "user_count must not exceed antenna_count",
        )
        require(self.paths_per_user >= 1, "paths_per_user must be at least 1")
        require(self.wavelength > 0, "wavelength must be positive")
        require(self.region_half_width > 0, "region_half_width must be positive")
        require(self.min_spacing > 0, "min_spacing must be positive")
        require(
            self.min_spacing <= 2.0 * self.region_half_width,
            "min_spacing must fit in the region (at most twice region_half_width)",
        )
        for name in ("data_size_range", "local_cpu_range", "user_distance_range"):
            lo, hi = getattr(self, name)
            require(lo > 0 and hi >= lo, f"{name} must be a positive, ordered range")
        lo, hi = self.aoa_range
        require(hi >= lo, "aoa_range must be ordered")
        require(self.reference_gain > 0, "reference_gain must be positive")
        require(self.path_loss_exponent > 0, "path_loss_exponent must be positive")
        require(self.server_max_frequency > 0, "server_max_frequency must be positive")
        require(self.bandwidth > 0, "bandwidth must be positive")
        require(self.model_size_factor > 0, "model_size_factor must be positive")
        require(self.cycles_per_bit > 0, "cycles_per_bit must be positive")
        require(self.server_cycles_per_bit > 0, "server_cycles_per_bit must be positive")
        require(
            0 < self.minibatch_ratio <= 1, "minibatch_ratio must be in (0, 1]"
        )
        require(self.training_iterations > 0, "training_iterations must be positive")
        require(self.particle_count >= 2, "particle_count must be at least 2")
        require(self.swarm_iterations >= 0, "swarm_iterations must be nonnegative")
        require(
            self.inertia_max >= self.inertia_min > 0,
            "inertia weights must satisfy inertia_max >= inertia_min > 0",
        )
        require(self.penalty_latency > 0, "penalty_latency must be positive")
        require(self.penalty_distance > 0, "penalty_distance must be positive")
        require(self.velocity_clamp > 0, "velocity_clamp must be positive")
        require(self.outer_iterations >= 1, "outer_iterations must be at least 1")
        require(self.allocation_tolerance > 0, "allocation_tolerance must be positive")
        require(
            self.rounding_mode in ("continuous", "threshold"),
            "rounding_mode must be 'continuous' or 'threshold'",
        )
        require(
            0 < self.rounding_threshold < 1, "rounding_threshold must be in (0, 1)"
        )

    @property
    def noise_power(self) -> float:
        """sigma^2 = N0 * bandwidth in watts."""
        return dbm_to_watts(self.noise_psd_dbm_per_hz) * self.bandwidth

    @property
    def transmit_power(self) -> float:
        return dbm_to_watts(self.transmit_power_dbm)


@dataclass
class ScenarioInstance:
    """One sampled realization: users, channels, server, and latency caps."""

    config: ScenarioConfig
    seed: int
    users: list[UserProfile]
    channel_specs: list[UserChannelSpec]
    server: ServerProfile
    noise_power: float
    latency_caps: np.ndarray
    reference_positions: list[PlanarPosition]


def path_gain_standard_deviation(
    reference_gain: float, path_loss_exponent: float, distance: float, path_count: int
) -> float:
    """Per-component (real or imaginary) standard deviation of one path gain.

    The complex gain variance is reference_gain * distance^-exponent / paths,
    split evenly between the real and imaginary parts.
    """
    variance = reference_gain * distance ** (-path_loss_exponent) / path_count
    return math.sqrt(variance / 2.0)


def sample_scenario(config: ScenarioConfig, seed: int) -> ScenarioInstance:
    """Draw one scenario realization, deterministically under the seed.

    Per-user draw order is fixed: elevation AoAs, azimuth AoAs, distance,
    real gain parts, imaginary gain parts, data size, local CPU frequency.
    Latency caps are the local-plus-upload latencies each user would see at
    the fixed reference antenna grid, so purely local operation is always an
    admissible fallback.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_SAMPLE_DOMAIN,)))
    users = []
    specs = []
    paths = config.paths_per_user
    power = config.transmit_power
    for _ in range(config.user_count):
        elevation = rng.uniform(config.aoa_range[0], config.aoa_range[1], paths)
        azimuth = rng.uniform(config.aoa_range[0], config.aoa_range[1], paths)
        distance = float(
            rng.uniform(config.user_distance_range[0], config.user_distance_range[1])
        )
        std = path_gain_standard_deviation(
            config.reference_gain, config.path_loss_exponent, distance, paths
        )
        gains = rng.normal(0.0, std, paths) + 1j * rng.normal(0.0, std, paths)
        data_size = float(
            rng.uniform(config.data_size_range[0], config.data_size_range[1])
        )
        local_freq = float(
            rng.uniform(config.local_cpu_range[0], config.local_cpu_range[1])
        )
        specs.append(
            UserChannelSpec(
                elevation_aoas=elevation,
                azimuth_aoas=azimuth,
                path_gains=gains,
                transmit_power=power,
                distance_to_bs=distance,
            )
        )
        users.append(
            UserProfile(
                data_size=data_size,
                cycles_per_bit=config.cycles_per_bit,
                minibatch_ratio=config.minibatch_ratio,
                local_iterations=config.training_iterations,
                local_cpu_frequency=local_freq,
                model_size_factor=config.model_size_factor,
            )
        )
    server = ServerProfile(
        cycles_per_bit=config.server_cycles_per_bit,
        minibatch_ratio=config.minibatch_ratio,
        server_iterations=config.training_iterations,
        max_total_frequency=config.server_max_frequency,
    )
    reference = channels.reference_grid(config.antenna_count, config.min_spacing)
    noise = config.noise_power
    rates = channels.rates_for_positions(
        reference, specs, config.wavelength, noise, config.bandwidth
    )
    caps = np.array(
        [
            latency.local_latency(user) + latency.upload_latency(user, rate)
            for user, rate in zip(users, rates)
        ]
    )
    return ScenarioInstance(
        config=config,
        seed=seed,
        users=users,
        channel_specs=specs,
        server=server,
        noise_power=noise,
        latency_caps=caps,
        reference_positions=reference,
    )


# --- config file codec ----------------------------------------------------

# field name -> (config attribute, converter); "canonical" keys are what
# dumps_config emits, alternates are accepted on load with unit conversion.
_INT_FIELDS = {
    "antenna_count",
    "user_count",
    "paths_per_user",
    "particle_count",
    "swarm_iterations",
    "outer_iterations",
    "rng_seed",
}

_RANGE_KEYS = {
    "data_size_min_bits": ("data_size_range", 0, 1.0),
    "data_size_max_bits": ("data_size_range", 1, 1.0),
    "data_size_min_kb": ("data_size_range", 0, BITS_PER_KB),
    "data_size_max_kb": ("data_size_range", 1, BITS_PER_KB),
    "local_frequency_min_hz": ("local_cpu_range", 0, 1.0),
    "local_frequency_max_hz": ("local_cpu_range", 1, 1.0),
    "local_frequency_min_ghz": ("local_cpu_range", 0, 1e9),
    "local_frequency_max_ghz": ("local_cpu_range", 1, 1e9),
    "aoa_min_rad": ("aoa_range", 0, 1.0),
    "aoa_max_rad": ("aoa_range", 1, 1.0),
    "distance_min_m": ("user_distance_range", 0, 1.0),
    "distance_max_m": ("user_distance_range", 1, 1.0),
}

_SCALAR_KEYS = {
    "antenna_count": ("antenna_count", 1.0),
    "user_count": ("user_count", 1.0),
    "paths_per_user": ("paths_per_user", 1.0),
    "wavelength_m": ("wavelength", 1.0),
    "region_half_width_m": ("region_half_width", 1.0),
    "min_spacing_m": ("min_spacing", 1.0),
    "reference_gain": ("reference_gain", 1.0),
    "path_loss_exponent": ("path_loss_exponent", 1.0),
    "server_max_frequency_hz": ("server_max_frequency", 1.0),
    "server_max_frequency_ghz": ("server_max_frequency", 1e9),
    "transmit_power_dbm": ("transmit_power_dbm", 1.0),
    "noise_psd_dbm_per_hz": ("noise_psd_dbm_per_hz", 1.0),
    "bandwidth_hz": ("bandwidth", 1.0),
    "bandwidth_mhz": ("bandwidth", 1e6),
    "model_size_factor": ("model_size_factor", 1.0),
    "cycles_per_bit": ("cycles_per_bit", 1.0),
    "server_cycles_per_bit": ("server_cycles_per_bit", 1.0),
    "minibatch_ratio": ("minibatch_ratio", 1.0),
    "training_iterations": ("training_iterations", 1.0),
    "particle_count": ("particle_count", 1.0),
    "swarm_iterations": ("swarm_iterations", 1.0),
    "cognitive_factor": ("cognitive_factor", 1.0),
    "social_factor": ("social_factor", 1.0),
    "inertia_max": ("inertia_max", 1.0),
    "inertia_min": ("inertia_min", 1.0),
    "penalty_latency": ("penalty_latency", 1.0),
    "penalty_distance": ("penalty_distance", 1.0),
    "velocity_clamp_m": ("velocity_clamp", 1.0),
    "outer_iterations": ("outer_iterations", 1.0),
    "allocation_tolerance": ("allocation_tolerance", 1.0),
    "rounding_threshold": ("rounding_threshold", 1.0),
    "rng_seed": ("rng_seed", 1.0),
}

# dB-valued alternate for the linear reference gain
_DB_KEYS = {"reference_gain_db": "reference_gain"}

_STRING_KEYS = {"rounding_mode": "rounding_mode"}


def _parse_lines(text: str) -> dict[str, tuple[str, int]]:
    seen: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in seen:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        seen[key] = (value, lineno)
    return seen


def loads_config(text: str) -> ScenarioConfig:
    """Parse config text; unknown keys, duplicates and bad numbers all raise."""
    entries = _parse_lines(text)
    assigned: dict[str, object] = {}
    ranges: dict[str, dict[int, float]] = {}
    sources: dict[str, str] = {}

    def claim(attr: str, key: str, lineno: int) -> None:
        if attr in sources:
            raise ParseError(
                f"line {lineno}: key {key!r} conflicts with earlier key {sources[attr]!r}"
            )
        sources[attr] = key

    for key, (value, lineno) in entries.items():
        if key in _STRING_KEYS:
            claim(_STRING_KEYS[key], key, lineno)
            assigned[_STRING_KEYS[key]] = value
            continue
        if key in _DB_KEYS:
            attr = _DB_KEYS[key]
            claim(attr, key, lineno)
            try:
                assigned[attr] = 10.0 ** (float(value) / 10.0)
            except ValueError:
                raise ParseError(f"line {lineno}: bad number for {key!r}: {value!r}")
            continue
        if key in _RANGE_KEYS:
            attr, index, scale = _RANGE_KEYS[key]
            claim(f"{attr}[{index}]", key, lineno)
            try:
                ranges.setdefault(attr, {})[index] = float(value) * scale
            except ValueError:
                raise ParseError(f"line {lineno}: bad number for {key!r}: {value!r}")
            continue
        if key in _SCALAR_KEYS:
            attr, scale = _SCALAR_KEYS[key]
            claim(attr, key, lineno)
            try:
                if attr in _INT_FIELDS:
                    assigned[attr] = int(value)
                else:
                    assigned[attr] = float(value) * scale
            except ValueError:
                raise ParseError(f"line {lineno}: bad number for {key!r}: {value!r}")
            continue
        raise ParseError(f"line {lineno}: unknown key {key!r}")

    # merge partially-given ranges with the class defaults; unset derived
    # fields stay None so they resolve from whatever wavelength was given
    field_defaults = {f.name: f.default for f in fields(ScenarioConfig)}
    for attr, parts in ranges.items():
        default_range = field_defaults[attr]
        lo = parts.get(0, default_range[0])
        hi = parts.get(1, default_range[1])
        assigned[attr] = (lo, hi)
    return ScenarioConfig(**assigned)


def load_config(path: str) -> ScenarioConfig:
    """Read and validate a config file; an empty file yields all defaults."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read config {path!r}: {exc}")
    return loads_config(text)


def dumps_config(config: ScenarioConfig) -> str:
    """Serialize with exact-SI keys so load(dumps(c)) == c bit for bit."""
    lines = ["# scenario configuration (SI units)"]

    def emit(key: str, value) -> None:
        if isinstance(value, str):
            lines.append(f"{key} = {value}")
        elif isinstance(value, int):
            lines.append(f"{key} = {value}")
        else:
            lines.append(f"{key} = {repr(float(value))}")

    emit("antenna_count", config.antenna_count)
    emit("user_count", config.user_count)
    emit("paths_per_user", config.paths_per_user)
    emit("wavelength_m", config.wavelength)
    emit("region_half_width_m", config.region_half_width)
    emit("min_spacing_m", config.min_spacing)
    emit("data_size_min_bits", config.data_size_range[0])
    emit("data_size_max_bits", config.data_size_range[1])
    emit("local_frequency_min_hz", config.local_cpu_range[0])
    emit("local_frequency_max_hz", config.local_cpu_range[1])
    emit("aoa_min_rad", config.aoa_range[0])
    emit("aoa_max_rad", config.aoa_range[1])
    emit("distance_min_m", config.user_distance_range[0])
    emit("distance_max_m", config.user_distance_range[1])
    emit("reference_gain", config.reference_gain)
    emit("path_loss_exponent", config.path_loss_exponent)
    emit("server_max_frequency_hz", config.server_max_frequency)
    emit("transmit_power_dbm", config.transmit_power_dbm)
    emit("noise_psd_dbm_per_hz", config.noise_psd_dbm_per_hz)
    emit("bandwidth_hz", config.bandwidth)
    emit("model_size_factor", config.model_size_factor)
    emit("cycles_per_bit", config.cycles_per_bit)
    emit("server_cycles_per_bit", config.server_cycles_per_bit)
    emit("minibatch_ratio", config.minibatch_ratio)
    emit("training_iterations", config.training_iterations)
    emit("particle_count", config.particle_count)
    emit("swarm_iterations", config.swarm_iterations)
    emit("cognitive_factor", config.cognitive_factor)
    emit("social_factor", config.social_factor)
    emit("inertia_max", config.inertia_max)
    emit("inertia_min", config.inertia_min)
    emit("penalty_latency", config.penalty_latency)
    emit("penalty_distance", config.penalty_distance)
    emit("velocity_clamp_m", config.velocity_clamp)
    emit("outer_iterations", config.outer_iterations)
    emit("allocation_tolerance", config.allocation_tolerance)
    emit("rounding_mode", config.rounding_mode)
    emit("rounding_threshold", config.rounding_threshold)
    emit("rng_seed", config.rng_seed)
    return "\n".join(lines) + "\n"


def save_config(config: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps_config(config))
