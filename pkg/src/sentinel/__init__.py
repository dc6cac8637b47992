"""Satellite wildfire monitoring toolkit.

Pipeline: imagery ingestion -> pluggable object detection -> coverage and
detection-quality metrics -> LLM risk assessment -> LLM-as-judge scoring,
persisted through a history store and exposed via an async HTTP service.
"""

__version__ = "0.1.0"
