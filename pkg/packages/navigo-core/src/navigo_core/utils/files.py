"""File naming helpers for run outputs."""

import hashlib
import re
from pathlib import Path


def sanitize_filename(filename: str) -> str:
    """
    Sanitize a name to be safe as a file or directory name.

    Args:
        filename: Original name, e.g. a scenario name

    Returns:
        Name with path separators, Windows-illegal characters and whitespace runs
        replaced by "_"
    """
    # Windows illegal characters: \ / : * ? " < > |
    clean_name = re.sub(r'[\\/:*?"<>|]', "_", filename.strip())
    clean_name = re.sub(r"\s+", "_", clean_name)
    return clean_name or "unnamed"


def run_dir_name(scenario: str, strategy: str, seed: int) -> str:
    """Directory name of one run, e.g. "grid5x5_navigo_seed1"."""
    return f"{sanitize_filename(scenario)}_{sanitize_filename(strategy)}_seed{seed}"


def file_digest(path: Path) -> str:
    """SHA-256 of a file's bytes, used to compare run outputs."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()
