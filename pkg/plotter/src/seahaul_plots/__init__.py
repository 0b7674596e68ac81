"""Deterministic figure rendering for seahaul CSV bundles.

This package consumes the simulator only through its published CSV formats
(``campaign.csv`` manifests, per-run ``summary.csv``/``links.csv`` bundles and
``curves.csv`` exports); it never imports the simulator itself.
"""

__version__ = "0.1.0"
