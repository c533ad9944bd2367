"""Link talk-video segments to paper passages.

Pipeline: parse a paper layout and a talk transcript (:mod:`papeo.ingest`),
propose video segment boundaries (:mod:`papeo.segmentation`), rank candidate
passage links with a combined lexical/embedding score refined by an
order-aware chain decoder (:mod:`papeo.linking`), interchange the result as
``papeo.json`` (:mod:`papeo.model`), and score suggestion quality
(:mod:`papeo.evaluation`). :mod:`papeo.store` and :mod:`papeo.service`
persist and serve documents for the authoring/reading UI; :mod:`papeo.cli`
wraps everything for batch use.
"""

from .errors import (Conflict, EmbedError, InputError, Invalid, NotFound,
                     PapeoError, ParseError, SchemaError, VersionError)
from .model import (BBox, PapeoDoc, PaperDocument, Passage, PassageLink,
                    SyncHighlight, TranscriptLine, VideoMeta, VideoSegment,
                    Violation, deserialize, papeo_stats, serialize, validate)

__version__ = "0.1.0"

__all__ = [
    "BBox", "PapeoDoc", "PaperDocument", "Passage", "PassageLink",
    "SyncHighlight", "TranscriptLine", "VideoMeta", "VideoSegment",
    "Violation", "deserialize", "papeo_stats", "serialize", "validate",
    "PapeoError", "ParseError", "VersionError", "SchemaError", "InputError",
    "EmbedError", "NotFound", "Conflict", "Invalid",
    "__version__",
]
