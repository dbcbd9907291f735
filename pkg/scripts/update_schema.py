import json
import math
from pathlib import Path

from scripts.reporting import REPORT_SCHEMA_VERSION

SUITES = [
    "lemma-arc",
    "arc-montecarlo",
    "joukowski",
    "distortion",
    "legendre",
    "regularization",
    "moments",
    "cantor-audit",
    "carleson",
    "proposition",
    "subordination",
    "subharmonic",
]


def update_workflow_schema(schema_path: Path = Path('workflow_schema.json')):
    """Regenerate the workflow schema: run defaults, suites, artifacts and JSON Schemas"""

    schema = {
        "config": {
            "h": "sqrt",
            "c": "one_over_log",
            "depth": 6,
            "measure": math.pi,
            "max_gap": 0.1,
            "wos": {
                "eps_shell": 1e-6,
                "max_steps": 100000,
                "seed": 0,
                "samples": 100000,
                "workers": 1,
                "block_size": 4096
            },
            "horizon": 10000,
            "tol": 1e-6,
            "L": 0.1,
            "t": math.pi / 4,
            "out": "out",
            "set_file": None
        },
        "workflow_steps": SUITES,
        "required_folders": [
            "logs"
        ],
        "expected_files": {
            "construct-set": ["set.json", "gaps.csv", "domain.svg"],
            "verify": ["report.json", "report.csv"],
            "render": ["domain.svg", "mapping.svg"]
        },
        "config_schema": {
            "type": "object",
            "required": ["h", "c", "depth", "measure", "max_gap", "wos",
                         "horizon", "tol", "L", "t", "out", "set_file"],
            "additionalProperties": False,
            "properties": {
                "h": {"type": "string", "minLength": 1},
                "c": {"type": "string", "minLength": 1},
                "depth": {"type": "integer", "minimum": 0, "maximum": 24},
                "measure": {"type": "number", "exclusiveMinimum": 0,
                            "exclusiveMaximum": 2 * math.pi},
                "max_gap": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "wos": {
                    "type": "object",
                    "required": ["eps_shell", "max_steps", "seed", "samples",
                                 "workers", "block_size"],
                    "additionalProperties": False,
                    "properties": {
                        "eps_shell": {"type": "number", "exclusiveMinimum": 0},
                        "max_steps": {"type": "integer", "minimum": 1},
                        "seed": {"type": "integer", "minimum": 0,
                                 "maximum": 2 ** 64 - 1},
                        "samples": {"type": "integer", "minimum": 1},
                        "workers": {"type": "integer", "minimum": 1},
                        "block_size": {"type": "integer", "minimum": 1}
                    }
                },
                "horizon": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "L": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
                "t": {"type": "number", "exclusiveMinimum": 0,
                      "maximum": math.pi / 2},
                "out": {"type": "string"},
                "set_file": {"type": ["string", "null"]}
            }
        },
        "report_schema": {
            "type": "object",
            "required": ["schema_version", "suite", "passed", "n_rows",
                         "first_failure", "summary", "config"],
            "properties": {
                "schema_version": {"const": REPORT_SCHEMA_VERSION},
                "suite": {"type": "string"},
                "passed": {"type": "boolean"},
                "n_rows": {"type": "integer", "minimum": 0},
                "first_failure": {"type": ["object", "null"]},
                "summary": {"type": "object"},
                "config": {"type": "object"}
            }
        }
    }

    # Save schema
    with open(schema_path, 'w') as f:
        json.dump(schema, f, indent=4)

    print(f"Created {schema_path} with all required keys")
    return schema


if __name__ == "__main__":
    updated_schema = update_workflow_schema()
    print("\nUpdated Schema Contents:")
    print(json.dumps(updated_schema, indent=2))
