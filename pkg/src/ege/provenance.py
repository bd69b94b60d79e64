"""Resolve provenance records against the source corpus.

Text provenance is a character-offset span (Unicode scalar values, not
bytes) in a document; image provenance is a pixel bounding box in one of a
document's images. The index is read-only once built and rebuilt atomically
if a session's corpus changes.
"""

from __future__ import annotations

from .formats import CorpusFile, Document, ImageRecord
from .model import (
    Diagnostic,
    EngineError,
    InstantiatedGraph,
    ProvenanceRecord,
    TextProvenance,
    error,
    sort_diagnostics,
)


def paragraph_bounds(text: str, start: int, end: int) -> tuple[int, int]:
    """Absolute offsets of the blank-line-delimited paragraph containing [start, end).

    A separator is any run of two or more newlines; the paragraph excludes
    separator newlines on both sides. Spans that straddle a separator get the
    smallest segment union that still contains them.
    """
    n = len(text)
    lo = min(max(start, 0), n)
    while lo > 0 and not (lo >= 2 and text[lo - 1] == "\n" and text[lo - 2] == "\n"):
        lo -= 1
    # Skip separator newlines unless the span itself starts inside them:
    # containment of [start, end) always wins.
    while lo < start and lo < n and text[lo] == "\n":
        lo += 1
    hi = max(min(end, n), lo)
    while hi < n and not (text[hi] == "\n" and hi + 1 < n and text[hi + 1] == "\n"):
        hi += 1
    return lo, hi


def check_record(
    rec: ProvenanceRecord,
    documents: dict[str, Document],
    images: dict[str, tuple[ImageRecord, Document]],
) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    if isinstance(rec, TextProvenance):
        doc = documents.get(rec.doc_id)
        if doc is None:
            diags.append(error("PROV_DOC_MISSING", rec.id, f"document {rec.doc_id!r} not in corpus"))
            return diags
        if rec.start < 0 or rec.start >= rec.end:
            diags.append(error("OFFSET_ORDER", rec.id, f"span must satisfy 0 <= start < end, got [{rec.start}, {rec.end})"))
        elif rec.end > len(doc.text):
            diags.append(error("OFFSET_OUT_OF_RANGE", rec.id, f"span end {rec.end} beyond document length {len(doc.text)}"))
        elif doc.text[rec.start:rec.end] != rec.text:
            diags.append(error("STALE_SPAN", rec.id, "cached span text disagrees with the document"))
    else:
        entry = images.get(rec.image_id)
        if entry is None:
            diags.append(error("PROV_IMAGE_MISSING", rec.id, f"image {rec.image_id!r} not in corpus"))
            return diags
        img, _ = entry
        x, y, w, h = rec.bbox
        if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > img.width or y + h > img.height:
            diags.append(error(
                "BBOX_OUT_OF_RANGE", rec.id,
                f"bbox {list(rec.bbox)} outside {img.width}x{img.height} image {rec.image_id!r}",
            ))
    return diags


def check_corpus(g: InstantiatedGraph, corpus: CorpusFile) -> list[Diagnostic]:
    """Corpus-wide agreement pass run at load time."""
    documents = corpus.document_index()
    images = corpus.image_index()
    diags: list[Diagnostic] = []
    for rec in g.provenance.values():
        diags.extend(check_record(rec, documents, images))
    return sort_diagnostics(diags)


def check_instance(instance, corpus: CorpusFile) -> list[Diagnostic]:
    """Deferred offset validation of an instance file once a corpus exists:
    provenance records plus event trigger spans."""
    documents = corpus.document_index()
    images = corpus.image_index()
    diags: list[Diagnostic] = []
    for rec in instance.provenance:
        diags.extend(check_record(rec, documents, images))
    for ev in instance.events:
        trigger = ev.trigger
        if trigger is None:
            continue
        doc = documents.get(trigger.doc_id)
        if doc is None:
            diags.append(error("PROV_DOC_MISSING", ev.id, f"trigger document {trigger.doc_id!r} not in corpus"))
        elif trigger.end > len(doc.text):
            diags.append(error("OFFSET_OUT_OF_RANGE", ev.id, f"trigger end {trigger.end} beyond document length {len(doc.text)}"))
        elif trigger.text and doc.text[trigger.start:trigger.end] != trigger.text:
            diags.append(error("STALE_SPAN", ev.id, "trigger text disagrees with the document"))
    return sort_diagnostics(diags)


class ProvenanceIndex:
    """Lookup layer the service and editor use to render and validate provenance."""

    def __init__(self, records: dict[str, ProvenanceRecord], corpus: CorpusFile | None = None):
        self.records = records
        self.documents: dict[str, Document] = corpus.document_index() if corpus else {}
        self.images: dict[str, tuple[ImageRecord, Document]] = corpus.image_index() if corpus else {}

    def check(self) -> list[Diagnostic]:
        diags: list[Diagnostic] = []
        for rec in self.records.values():
            diags.extend(check_record(rec, self.documents, self.images))
        return sort_diagnostics(diags)

    def _get(self, prov_id: str) -> ProvenanceRecord:
        rec = self.records.get(prov_id)
        if rec is None:
            raise EngineError("REF_MISSING", prov_id, f"provenance {prov_id!r} does not exist")
        return rec

    def resolve(self, prov_id: str) -> dict:
        """Payload sufficient to highlight the span or draw the box."""
        rec = self._get(prov_id)
        if isinstance(rec, TextProvenance):
            doc = self.documents.get(rec.doc_id)
            if doc is None:
                raise EngineError("REF_MISSING", prov_id, f"document {rec.doc_id!r} not in corpus")
            if doc.text[rec.start:rec.end] != rec.text:
                raise EngineError("STALE_SPAN", prov_id, "cached span text disagrees with the document")
            return {
                "kind": "text",
                "id": rec.id,
                "doc_id": rec.doc_id,
                "title": doc.title,
                "start": rec.start,
                "end": rec.end,
                "text": rec.text,
            }
        entry = self.images.get(rec.image_id)
        if entry is None:
            raise EngineError("REF_MISSING", prov_id, f"image {rec.image_id!r} not in corpus")
        img, doc = entry
        return {
            "kind": "image",
            "id": rec.id,
            "image_id": rec.image_id,
            "media": img.media,
            "bbox": list(rec.bbox),
            "width": img.width,
            "height": img.height,
            "doc_id": doc.doc_id,
            "title": doc.title,
        }

    def expand_context(self, prov_id: str) -> dict:
        """The whole paragraph around a text span, with absolute offsets."""
        rec = self._get(prov_id)
        if not isinstance(rec, TextProvenance):
            raise EngineError("NOT_TEXT", prov_id, "context expansion applies to text provenance only")
        doc = self.documents.get(rec.doc_id)
        if doc is None:
            raise EngineError("REF_MISSING", prov_id, f"document {rec.doc_id!r} not in corpus")
        lo, hi = paragraph_bounds(doc.text, rec.start, rec.end)
        return {"doc_id": rec.doc_id, "start": lo, "end": hi, "text": doc.text[lo:hi]}

    def locate_source(self, prov_id: str) -> dict:
        """Enough to open the original document or image at the cited spot."""
        rec = self._get(prov_id)
        if isinstance(rec, TextProvenance):
            doc = self.documents.get(rec.doc_id)
            return {
                "kind": "text",
                "doc_id": rec.doc_id,
                "title": doc.title if doc else "",
                "start": rec.start,
                "end": rec.end,
            }
        entry = self.images.get(rec.image_id)
        doc = entry[1] if entry else None
        return {
            "kind": "image",
            "image_id": rec.image_id,
            "doc_id": doc.doc_id if doc else "",
            "title": doc.title if doc else "",
            "bbox": list(rec.bbox),
        }
