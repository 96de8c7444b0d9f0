"""
Utils module for bearing_spectra package.
"""

import hashlib
import json
import os
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

INSTALL_DIR = os.path.dirname(os.path.abspath(__file__))
DEFAULT_ENCODING = "utf-8"


def get_table(table_name: str) -> List[Dict[str, Any]]:
    """Get a packaged experiment table."""
    with open(Path(INSTALL_DIR) / "tables" / f"{table_name}.json", "r", encoding=DEFAULT_ENCODING) as f:
        return json.load(f)


def derive_seed(master_seed: int, *keys: int) -> int:
    """Derive an independent integer seed from the master seed and a key path."""
    return int(np.random.SeedSequence([int(master_seed), *[int(k) for k in keys]]).generate_state(1)[0])


def array_digest(array: np.ndarray) -> str:
    """SHA-256 of an array's shape, dtype and bytes."""
    digest = hashlib.sha256()
    digest.update(f"{array.shape}{array.dtype.str}".encode(DEFAULT_ENCODING))
    digest.update(np.ascontiguousarray(array).tobytes())
    return digest.hexdigest()


def parse_list(value: str) -> List[str]:
    """Split a comma-separated config value."""
    return [item.strip() for item in value.split(",") if item.strip()]
