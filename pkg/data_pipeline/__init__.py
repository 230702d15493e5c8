"""Synthetic data generation and dataset file I/O."""

from data_pipeline.generators import (
    STREAM_PURPOSES,
    DataGenerator,
    Gauss1D,
    MixtureHighD,
    Regression1D,
    build_generator,
    rng_stream,
)
from data_pipeline.loaders import load_dataset, save_dataset
from data_pipeline.schema import OUTPUT_COLUMN, Dataset, DatasetFormatError, dataset_from_frame, frame_from_dataset

__all__ = [
    "OUTPUT_COLUMN",
    "STREAM_PURPOSES",
    "DataGenerator",
    "Dataset",
    "DatasetFormatError",
    "Gauss1D",
    "MixtureHighD",
    "Regression1D",
    "build_generator",
    "dataset_from_frame",
    "frame_from_dataset",
    "load_dataset",
    "rng_stream",
    "save_dataset",
]
