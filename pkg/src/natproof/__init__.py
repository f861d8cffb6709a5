"""Desk-scale workbench: NW designs, natural-property learners, tt encodings, WF proof checking."""

__version__ = "0.1.0"
