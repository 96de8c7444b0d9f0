"""
Flat ``key = value`` experiment config files.

Keys are the ExperimentConfig field names, the generator keys and the suite
keys ``tests``, ``n_values`` and ``feature_kinds``. Lists are comma separated,
``#`` starts a comment. ``profile`` picks the corpus size before explicit keys
are applied.
"""

import logging
from dataclasses import fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple, Union

from bearing_spectra.constants import PROFILES
from bearing_spectra.enums import DataSource, FaultType, FeatureKind, LoadCondition
from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.experiment import ExperimentConfig, SuiteConfig
from bearing_spectra.structs import SynthParams
from bearing_spectra.utils import DEFAULT_ENCODING, parse_list

LOGGER = logging.getLogger(__name__)

TRUE_WORDS = ("true", "yes", "on", "1")
FALSE_WORDS = ("false", "no", "off", "0")

ORDER_KEYS = {
    "order_if": FaultType.IF,
    "order_bf": FaultType.BF,
    "order_of": FaultType.OF,
}

RESONANCE_KEYS = {
    "resonance_if": FaultType.IF,
    "resonance_bf": FaultType.BF,
    "resonance_of": FaultType.OF,
}

# per-fault-type generator fields and their config keys
PER_FAULT_KEYS = {
    "orders": ORDER_KEYS,
    "resonances": RESONANCE_KEYS,
}


def _boolean(value: str) -> bool:
    word = value.lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _ints(value: str) -> Tuple[int, ...]:
    return tuple(int(item) for item in parse_list(value))


def _floats(value: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in parse_list(value))


def _loads(value: str) -> Tuple[LoadCondition, ...]:
    return tuple(LoadCondition(index) for index in _ints(value))


EXPERIMENT_KEYS: Dict[str, Callable[[str], Any]] = {
    "source": DataSource,
    "manifest": str,
    "seed": int,
    "test_id": int,
    "fault_size": float,
    "training_load": lambda value: LoadCondition(int(value)),
    "testing_loads": _loads,
    "classes": lambda value: tuple(FaultType(item.upper()) for item in parse_list(value)),
    "n_per_class": int,
    "repetitions": int,
    "feature_kind": FeatureKind,
    "d": int,
    "contribution": float,
    "images_per_class": int,
    "image_rows": int,
    "image_cols": int,
    "workers": int,
    "record_timing": _boolean,
}

SYNTH_KEYS: Dict[str, Callable[[str], Any]] = {
    "sample_rate": float,
    "decay": float,
    "impulse_amplitude": float,
    "noise_std": float,
    "jitter": float,
    "modulation_depth": float,
    "shaft_harmonics": _floats,
    **{key: float for key in ORDER_KEYS},
    **{key: float for key in RESONANCE_KEYS},
}

SUITE_KEYS: Dict[str, Callable[[str], Any]] = {
    "tests": _ints,
    "n_values": _ints,
    "feature_kinds": lambda value: tuple(FeatureKind(item) for item in parse_list(value)),
}

KNOWN_KEYS = {"profile", *EXPERIMENT_KEYS, *SYNTH_KEYS, *SUITE_KEYS}


def _read_pairs(text: str, source: str) -> List[Tuple[int, str, str]]:
    pairs, seen = [], set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UserInputValidationError(f"{source}:{number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise UserInputValidationError(f"{source}:{number}: unknown key {key!r}")
        if key in seen:
            raise UserInputValidationError(f"{source}:{number}: duplicate key {key!r}")
        seen.add(key)
        pairs.append((number, key, value))
    return pairs


def parse_config(text: str, source: str = "<config>", base_dir: Union[str, Path, None] = None) -> SuiteConfig:
    """
    Build a suite from config text. A relative ``manifest`` is resolved
    against ``base_dir``.
    """
    experiment: Dict[str, Any] = {}
    synth: Dict[str, Any] = {}
    suite: Dict[str, Any] = {}
    for number, key, value in _read_pairs(text, source):
        if key == "profile":
            if value not in PROFILES:
                raise UserInputValidationError(f"{source}:{number}: profile must be one of {sorted(PROFILES)}")
            experiment.setdefault("images_per_class", PROFILES[value])
            continue
        for table, target in ((EXPERIMENT_KEYS, experiment), (SYNTH_KEYS, synth), (SUITE_KEYS, suite)):
            if key in table:
                try:
                    target[key] = table[key](value)
                except ValueError as error:
                    raise UserInputValidationError(f"{source}:{number}: bad value for {key}: {value!r}") from error

    if base_dir is not None and experiment.get("manifest") and not Path(experiment["manifest"]).is_absolute():
        experiment["manifest"] = str(Path(base_dir) / experiment["manifest"])
    defaults = SynthParams()
    for name, keys in PER_FAULT_KEYS.items():
        given = {fault_type: synth.pop(key) for key, fault_type in keys.items() if key in synth}
        if given:
            synth[name] = {**getattr(defaults, name), **given}
    if "n_per_class" not in experiment:
        smallest = min(suite.get("n_values") or (ExperimentConfig.n_per_class,))
        images = experiment.get("images_per_class", ExperimentConfig.images_per_class)
        experiment["n_per_class"] = max(1, min(smallest, images))
    config = ExperimentConfig(synth=SynthParams(**synth), **experiment)
    return SuiteConfig(base=config, **suite)


def load_config(path: Union[str, Path]) -> SuiteConfig:
    """Read a config file."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Config file not found: {path}")
    suite = parse_config(path.read_text(encoding=DEFAULT_ENCODING), str(path), path.parent)
    LOGGER.info("Loaded config %s (seed %d)", path, suite.base.seed)
    return suite


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if hasattr(value, "value"):
        return str(value.value)
    if isinstance(value, tuple):
        return ", ".join(_format(item) for item in value)
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def dump_config(suite: SuiteConfig) -> str:
    """
    Config text that :func:`parse_config` reads back into an equal suite.
    """
    config = suite.base
    lines = ["# experiment"]
    for item in fields(ExperimentConfig):
        if item.name == "synth" or (item.name == "manifest" and config.manifest is None):
            continue
        lines.append(f"{item.name} = {_format(getattr(config, item.name))}")
    lines.append("# generator")
    for item in fields(SynthParams):
        if item.name not in PER_FAULT_KEYS:
            lines.append(f"{item.name} = {_format(getattr(config.synth, item.name))}")
    for name, keys in PER_FAULT_KEYS.items():
        for key, fault_type in keys.items():
            lines.append(f"{key} = {_format(getattr(config.synth, name)[fault_type])}")
    lines.append("# suite")
    for key in SUITE_KEYS:
        lines.append(f"{key} = {_format(getattr(suite, key))}")
    return "\n".join(lines) + "\n"


def with_overrides(suite: SuiteConfig, **changes) -> SuiteConfig:
    """Suite with some base config fields replaced."""
    return replace(suite, base=replace(suite.base, **changes))
