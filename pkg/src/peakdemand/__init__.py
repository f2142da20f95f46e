"""Peak electricity demand versus apparent temperature: ingestion, block
maxima, GEV modelling and fixed-effects regression."""

__version__ = "0.1.0"
