"""Embedding bridge: load pretrained encoders and expose their embeddings
through the EMBX file format and the /v1/embed wire protocol."""

__version__ = "0.1.0"
