"""Exact simulator and verification lab for group surface codes."""

from gsclab.groups import GroupSpec, GroupTable, build_group

__all__ = ["GroupSpec", "GroupTable", "build_group"]
__version__ = "0.1.0"
