"""Workbench for triangle packing/cover gaps in blowups of doubled expanders."""

__version__ = "0.1.0"
