"""
Scenario files: the network model (and optional fading kernel) as INI or YAML.

INI layout, one section per model ingredient:

    [window]      shape = disk, r = 1
    [pathloss]    kind = truncated_power, cap = 5, exponent = 4
    [fading]      kind = uniform, low = 1, high = 2
    [qos]         kind = truncated_identity, cap = auto
    [intensity]   kind = uniform, mass = 1
    [base]        kind = fixed, value = 1.5      (random: law.kind, law.low, ...)
    [kernel]      kind = areas, breaks = 0.5     (laws in [kernel.law0], [kernel.law1], ...)
    [experiment]  lambda = 50, c = 1.1, b_fraction = 0.9875, mode = up-dir, seed = 0

Lists are comma separated. YAML files carry the same structure as nested
mappings with native lists. Every failure surfaces as ScenarioError.
"""
import configparser
import logging
from pathlib import Path
from typing import Any, NamedTuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from core.errors import FrustrationError, ScenarioError
from core.landscape import qos_cap_auto, scenario_hash
from core.sir import Mode
from models.kernel import FadingKernel
from models.network import NetworkModel, TruncatedIdentityQos

logger = logging.getLogger("utils.scenario_file")

_REQUIRED = ("window", "pathloss", "fading", "qos", "intensity")
_LIST_KEYS = {"values", "weights", "s", "u", "f", "q", "x", "y", "breaks"}
_KERNEL_ADAPTER = TypeAdapter(FadingKernel)


class ExperimentDefaults(BaseModel):
    """Optional run parameters stored next to the model."""
    lam: float | None = Field(None, alias="lambda", gt=0)
    c: float | None = None
    b_fraction: float | None = None
    mode: Mode = "up-dir"
    seed: int = 0

    model_config = ConfigDict(populate_by_name=True, extra="forbid")


class Scenario(NamedTuple):
    model: NetworkModel
    kernel: FadingKernel | None
    experiment: ExperimentDefaults
    hash: str
    source: str


# --------------------------------------------------------------------------- #
# INI -> nested mapping                                                        #
# --------------------------------------------------------------------------- #

def _scalar(value: str) -> Any:
    value = value.strip()
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def _ini_value(key: str, value: str) -> Any:
    if key in _LIST_KEYS or (key.startswith("f") and key[1:].isdigit()):
        return [_scalar(v) for v in value.split(",") if v.strip()]
    return _scalar(value)


def _ini_section(section: configparser.SectionProxy) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, raw in section.items():
        head, _, tail = key.partition(".")
        if tail:
            out.setdefault(head, {})[tail] = _ini_value(tail, raw)
        else:
            out[key] = _ini_value(key, raw)
    return out


def _from_ini(text: str) -> dict[str, Any]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"INI-Datei nicht lesbar: {exc}") from exc
    data = {name: _ini_section(parser[name]) for name in parser.sections() if "." not in name}
    kernel = data.get("kernel")
    if kernel is not None:
        law_sections = sorted(
            (n for n in parser.sections() if n.startswith("kernel.law")),
            key=lambda n: int(n.removeprefix("kernel.law")),
        )
        if law_sections:
            kernel["laws"] = [_ini_section(parser[n]) for n in law_sections]
        rows = sorted((k for k in kernel if k.startswith("f") and k[1:].isdigit()), key=lambda k: int(k[1:]))
        if rows:
            kernel["f"] = [kernel.pop(k) for k in rows]
    return data


# --------------------------------------------------------------------------- #
# Mapping -> validated model                                                   #
# --------------------------------------------------------------------------- #

def _build(data: dict[str, Any], source: str) -> Scenario:
    missing = [s for s in _REQUIRED if s not in data]
    if missing:
        raise ScenarioError(f"Szenario {source}: Abschnitte fehlen: {', '.join(missing)}")
    qos = dict(data["qos"])
    auto_cap = qos.get("kind", "truncated_identity") == "truncated_identity" and str(qos.get("cap")).lower() == "auto"
    if auto_cap:
        qos["cap"] = 1.0
    payload = {
        "window": data["window"],
        "path_loss": data["pathloss"],
        "fading": data["fading"],
        "qos": qos,
        "intensity": data["intensity"],
    }
    if "base" in data:
        payload["base"] = data["base"]
    try:
        model = NetworkModel.model_validate(payload)
        kernel = _KERNEL_ADAPTER.validate_python(data["kernel"]) if "kernel" in data else None
        experiment = ExperimentDefaults.model_validate(data.get("experiment", {}))
    except ValidationError as exc:
        raise ScenarioError(f"Szenario {source} ungueltig: {exc.errors()[0]['msg']}") from exc
    if auto_cap:
        try:
            cap = qos_cap_auto(model, kernel)
        except FrustrationError as exc:
            raise ScenarioError(f"Szenario {source}: cap=auto nicht bestimmbar ({exc})") from exc
        model = model.model_copy(update={"qos": TruncatedIdentityQos(cap=cap)})
        logger.info("QoS-Plateau automatisch auf %.6g gesetzt", cap)
    return Scenario(model, kernel, experiment, scenario_hash(model, kernel), source)


def parse_scenario(text: str, fmt: str = "ini", source: str = "<text>") -> Scenario:
    """Parse scenario text in ``fmt`` ('ini' or 'yaml')."""
    if fmt == "ini":
        data = _from_ini(text)
    elif fmt in ("yaml", "yml"):
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ScenarioError(f"YAML-Datei nicht lesbar: {exc}") from exc
        if not isinstance(data, dict):
            raise ScenarioError("YAML-Szenario muss eine Zuordnung sein.")
    else:
        raise ScenarioError(f"Unbekanntes Szenario-Format: {fmt}")
    return _build(data, source)


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario file; the format follows the suffix (.ini, .yaml, .yml)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"Szenario-Datei nicht lesbar: {path}") from exc
    fmt = "yaml" if path.suffix.lower() in (".yaml", ".yml") else "ini"
    scenario = parse_scenario(text, fmt, str(path))
    logger.info("Szenario %s geladen (Hash %s)", path.name, scenario.hash[:12])
    return scenario
