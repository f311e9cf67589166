"""
Setup shim for tools that still call setup.py directly.
Package metadata lives in pyproject.toml.
"""

from setuptools import setup

setup()
