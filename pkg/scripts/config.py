"""Run configuration: defaults from workflow_schema.json, CLI overrides, config echo."""

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

from jsonschema import ValidationError, validate

from scripts.errors import ConfigError
from scripts.harmonic_measure import WosConfig

SCHEMA_PATH = Path(__file__).resolve().parent.parent / 'workflow_schema.json'
REQUIRED_KEYS = {'config', 'required_folders', 'expected_files', 'workflow_steps',
                 'config_schema', 'report_schema'}
WOS_KEYS = {f.name for f in fields(WosConfig)}


def load_schema(schema_path: Union[str, Path] = SCHEMA_PATH) -> Dict:
    """Load and validate the workflow schema"""
    schema_path = Path(schema_path)
    if not schema_path.exists():
        raise ConfigError(f"Workflow schema not found: {schema_path}")
    with open(schema_path, 'r') as f:
        schema = json.load(f)

    # Validate schema structure
    missing = REQUIRED_KEYS - set(schema)
    if missing:
        raise ConfigError(f"Schema missing required keys: {sorted(missing)}")
    return schema


@dataclass
class RunConfig:
    h: str = 'sqrt'  # majorant name or JSON file
    c: str = 'one_over_log'  # sequence rule or JSON file
    depth: int = 6  # Cantor construction stages
    measure: float = 3.141592653589793  # target |E| in radians
    max_gap: Optional[float] = 0.1  # gaps are split below this before building domains
    wos: WosConfig = field(default_factory=WosConfig)
    horizon: int = 10_000  # largest n of Legendre and moment tables
    tol: float = 1e-6  # relative quadrature tolerance
    L: float = 0.1  # half-disk radius of Omega_L
    t: float = 0.7853981633974483  # arc A_{L,t} angle
    out: str = 'out'  # output directory
    set_file: Optional[str] = None  # set.json to verify instead of a fresh build

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        data = copy.deepcopy(data)
        wos = data.pop('wos', {})
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {sorted(unknown)}")
        try:
            return cls(wos=WosConfig(**wos), **data)
        except TypeError as e:
            raise ConfigError(f"Invalid configuration: {str(e)}")

    def with_overrides(self, **overrides) -> 'RunConfig':
        """Copy with the non-None overrides applied; WosConfig keys go to ``wos``."""
        data = self.to_dict()
        _apply_overrides(data, overrides)
        return RunConfig.from_dict(data)


def _apply_overrides(data: Dict[str, Any], overrides: Dict[str, Any]) -> None:
    for key, value in overrides.items():
        if value is None:
            continue
        if key in WOS_KEYS:
            data['wos'][key] = value
        else:
            data[key] = value


def load_run_config(overrides: Optional[Dict[str, Any]] = None,
                    schema_path: Union[str, Path] = SCHEMA_PATH) -> RunConfig:
    """
    Build the run configuration from the schema defaults and CLI overrides.

    Args:
        overrides (Dict): flag values; None means "not given"
        schema_path (Union[str, Path]): path of workflow_schema.json

    Returns:
        RunConfig: validated configuration
    """
    schema = load_schema(schema_path)
    data = copy.deepcopy(schema['config'])
    _apply_overrides(data, overrides or {})
    try:
        validate(instance=data, schema=schema['config_schema'])
    except ValidationError as e:
        path = '.'.join(str(p) for p in e.absolute_path) or '<root>'
        raise ConfigError(f"Invalid configuration at {path}: {e.message}")
    return RunConfig.from_dict(data)
