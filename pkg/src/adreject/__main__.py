"""Module entry point: ``python -m adreject``."""

from .cli import console_entry

console_entry()
