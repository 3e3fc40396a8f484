from .encoders import EncoderLoadFailure, get_encoder
from .extract import ExtractionJob, ExtractionResult, MissingLabelRecord, extract

__all__ = [
    "EncoderLoadFailure",
    "get_encoder",
    "ExtractionJob",
    "ExtractionResult",
    "MissingLabelRecord",
    "extract",
]
