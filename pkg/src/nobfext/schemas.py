"""JSON schemas for every file format the command line reads or writes.

Each document carries a `format` tag; `validate_document` dispatches on
it.  The schemas pin structure, not semantics: loaded objects are still
re-validated by the constructors they feed.
"""

from __future__ import annotations

import jsonschema

from .errors import ValidationError

_HEX = {"type": "string", "pattern": "^[0-9a-fA-F]+$"}
_NONNEG = {"type": "integer", "minimum": 0}
_POS = {"type": "integer", "minimum": 1}

_RUN_BLOCK = {
    "type": "object",
    "properties": {
        "command": {"type": "string"},
        "seed": {"type": "integer"},
        "config": {"type": "object"},
        "samples": _NONNEG,
    },
    "required": ["command", "seed", "config"],
}

_GOOD_DIST = {
    "type": "object",
    "properties": {"kind": {"type": "string"}},
    "required": ["kind"],
}

_ADVERSARY = {
    "type": "object",
    "properties": {"kind": {"type": "string"}},
    "required": ["kind"],
}

SOURCE_SPEC_SCHEMA = {
    "type": "object",
    "properties": {
        "format": {"const": "nobf-source-spec"},
        "version": _POS,
        "n": _POS,
        "bad_positions": {"type": "array", "items": _NONNEG},
        "good_dist": _GOOD_DIST,
        "adversary": _ADVERSARY,
        "t": _NONNEG,
        "gamma": {"type": "number", "minimum": 0},
        "run": _RUN_BLOCK,
    },
    "required": ["format", "version", "n", "bad_positions", "good_dist",
                 "adversary", "t", "gamma"],
}

LINEAR_CODE_SCHEMA = {
    "type": "object",
    "properties": {
        "format": {"const": "linear-code"},
        "version": _POS,
        "m": _POS,
        "r": _POS,
        "rows": {"type": "array", "items": _HEX, "minItems": 1},
        "verified_d": _NONNEG,
        "construction": {"type": "object"},
        "run": _RUN_BLOCK,
    },
    "required": ["format", "version", "m", "r", "rows", "verified_d"],
}

CODE_SEARCH_FAILURE_SCHEMA = {
    "type": "object",
    "properties": {
        "format": {"const": "code-search-failure"},
        "version": _POS,
        "m": _POS,
        "r": _POS,
        "target_d": _POS,
        "attempts": _POS,
        "best_distance": _NONNEG,
        "best": {"type": ["object", "null"]},
        "run": _RUN_BLOCK,
    },
    "required": ["format", "version", "m", "r", "target_d", "attempts",
                 "best_distance"],
}

BFEXT_PARAMS_SCHEMA = {
    "type": "object",
    "properties": {
        "format": {"const": "bfext-params"},
        "version": _POS,
        "mode": {"enum": ["derived", "explicit"]},
        "n": _POS,
        "ell": _POS,
        "block_len": _POS,
        "delta": {"type": ["number", "null"]},
        "alpha": {"type": ["number", "null"]},
        "beta": {"type": ["number", "null"]},
        "t": {"type": ["integer", "null"]},
        "code": LINEAR_CODE_SCHEMA,
        "f": {"type": "object", "properties": {"kind": {"type": "string"}},
              "required": ["kind"]},
        "run": _RUN_BLOCK,
    },
    "required": ["format", "version", "mode", "n", "ell", "block_len",
                 "code", "f"],
}

EXTRACTION_TRACE_SCHEMA = {
    "type": "object",
    "properties": {
        "format": {"const": "extraction-trace"},
        "version": _POS,
        "block_len": _NONNEG,
        "ell": _POS,
        "r": _POS,
        "m": _POS,
        "blocks": {"type": "array", "items": _HEX},
        "y": _HEX,
        "y_used": _HEX,
        "z": _HEX,
    },
    "required": ["format", "version", "block_len", "ell", "r", "m",
                 "blocks", "y", "y_used", "z"],
}

EXTRACTION_REPORT_SCHEMA = {
    "type": "object",
    "properties": {
        "format": {"const": "extraction-report"},
        "version": _POS,
        "n": _POS,
        "count": _NONNEG,
        "traces": {"type": "array", "items": EXTRACTION_TRACE_SCHEMA},
        "run": _RUN_BLOCK,
    },
    "required": ["format", "version", "n", "count", "traces"],
}

_ESTIMATE = {
    "type": "object",
    "properties": {
        "value": {"type": "number"},
        "lo": {"type": "number"},
        "hi": {"type": "number"},
        "samples": _NONNEG,
        "confidence": {"type": "number"},
        "method": {"type": "string"},
    },
    "required": ["value", "lo", "hi", "method"],
}

ANALYSIS_REPORT_SCHEMA = {
    "type": "object",
    "properties": {
        "format": {"const": "analysis-report"},
        "version": _POS,
        "analysis": {"enum": ["bias", "influence", "spectrum", "vazirani",
                              "fixedness", "compare-zeroed"]},
        "result": {"type": "object"},
        "run": _RUN_BLOCK,
    },
    "required": ["format", "version", "analysis", "result", "run"],
}

SAMPLE_HEADER_SCHEMA = {
    "type": "object",
    "properties": {
        "format": {"const": "nobf-samples"},
        "count": _NONNEG,
        "n": _POS,
        "seed": {"type": "integer"},
        "stream": _NONNEG,
    },
    "required": ["format", "count", "n", "seed", "stream"],
}

SCHEMAS_BY_FORMAT = {
    "nobf-source-spec": SOURCE_SPEC_SCHEMA,
    "linear-code": LINEAR_CODE_SCHEMA,
    "code-search-failure": CODE_SEARCH_FAILURE_SCHEMA,
    "bfext-params": BFEXT_PARAMS_SCHEMA,
    "extraction-trace": EXTRACTION_TRACE_SCHEMA,
    "extraction-report": EXTRACTION_REPORT_SCHEMA,
    "analysis-report": ANALYSIS_REPORT_SCHEMA,
    "nobf-samples": SAMPLE_HEADER_SCHEMA,
}


def validate_document(obj: dict) -> None:
    """Schema-check a document by its `format` tag."""
    if not isinstance(obj, dict):
        raise ValidationError("document must be a JSON object")
    fmt = obj.get("format")
    schema = SCHEMAS_BY_FORMAT.get(fmt)
    if schema is None:
        raise ValidationError(f"unknown document format {fmt!r}")
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.exceptions.ValidationError as exc:
        raise ValidationError(f"document failed schema check: {exc.message}") from exc
