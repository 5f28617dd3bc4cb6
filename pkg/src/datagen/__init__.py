"""Synthetic datasets and game weight profiles."""

from src.datagen.generators import (
    GenSpec,
    PlantedMetadata,
    game_weights,
    generate,
    heavy_element,
    parse_weight_source,
)

__all__ = [
    "GenSpec",
    "PlantedMetadata",
    "game_weights",
    "generate",
    "heavy_element",
    "parse_weight_source",
]
