"""Utility helpers."""

from navigo_core.utils.files import file_digest, run_dir_name, sanitize_filename

__all__ = ["file_digest", "run_dir_name", "sanitize_filename"]
