"""Published JSON schemas for explanation documents, plus the internal
schemas the generation backends must satisfy.

The dicts here are the single source of truth; the files under /schema in
the repository are generated from them (see write_published_schemas) and a
test keeps the two in sync.
"""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

DOCUMENT_VERSION = 1

_ANCHOR_SCHEMA = {
    "type": "object",
    "required": ["artifact_id", "start", "end", "label"],
    "additionalProperties": False,
    "properties": {
        "artifact_id": {"type": "string", "minLength": 1},
        "start": {"type": "integer", "minimum": 1},
        "end": {"type": "integer", "minimum": 1},
        "label": {"type": "string"},
    },
}

LEVEL1_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "urn:agentlens:schema:level1:v1",
    "title": "Level1Explanation",
    "type": "object",
    "required": ["version", "session_id", "snapshot_id", "cards"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": DOCUMENT_VERSION},
        "session_id": {"type": "string", "minLength": 1},
        "snapshot_id": {"type": "string", "minLength": 1},
        "cards": {"type": "array", "items": {"$ref": "#/$defs/summary_card"}},
    },
    "$defs": {
        "anchor": _ANCHOR_SCHEMA,
        "summary_card": {
            "type": "object",
            "required": [
                "order_index",
                "path",
                "kind",
                "title",
                "significance",
                "summary",
                "anchors",
            ],
            "additionalProperties": False,
            "properties": {
                "order_index": {"type": "integer", "minimum": 0},
                "path": {"type": "string", "minLength": 1},
                "kind": {"enum": ["created", "modified", "deleted"]},
                "title": {"type": "string", "minLength": 1},
                "significance": {"enum": ["low", "medium", "high"]},
                "summary": {"type": "string", "minLength": 1},
                "anchors": {"type": "array", "items": {"$ref": "#/$defs/anchor"}},
            },
        },
    },
}

LEVEL2_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "urn:agentlens:schema:level2:v1",
    "title": "Level2Explanation",
    "type": "object",
    "required": [
        "version",
        "session_id",
        "order_index",
        "path",
        "influences",
        "conventions",
        "reasoning",
        "alternatives",
    ],
    "additionalProperties": False,
    "properties": {
        "version": {"const": DOCUMENT_VERSION},
        "session_id": {"type": "string", "minLength": 1},
        "order_index": {"type": "integer", "minimum": 0},
        "path": {"type": "string", "minLength": 1},
        "influences": {"type": "array", "items": {"$ref": "#/$defs/influence"}},
        "conventions": {"type": "array", "items": {"$ref": "#/$defs/convention_finding"}},
        "reasoning": {
            "type": "array",
            "minItems": 1,
            "items": {"$ref": "#/$defs/reasoning_paragraph"},
        },
        "alternatives": {"type": "array", "items": {"$ref": "#/$defs/alternative"}},
    },
    "$defs": {
        "anchor": _ANCHOR_SCHEMA,
        "influence": {
            "type": "object",
            "required": [
                "artifact_id",
                "path",
                "matched_symbols",
                "score",
                "score_parts",
                "evidence",
            ],
            "additionalProperties": False,
            "properties": {
                "artifact_id": {"type": "string", "minLength": 1},
                "path": {"type": "string", "minLength": 1},
                "matched_symbols": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["name", "symbol_kind", "artifact_id", "span", "signature_text"],
                        "additionalProperties": False,
                        "properties": {
                            "name": {"type": "string", "minLength": 1},
                            "symbol_kind": {"enum": ["function", "type", "constant", "other"]},
                            "artifact_id": {"type": "string", "minLength": 1},
                            "span": {
                                "type": "object",
                                "required": ["start", "end"],
                                "additionalProperties": False,
                                "properties": {
                                    "start": {"type": "integer", "minimum": 1},
                                    "end": {"type": "integer", "minimum": 1},
                                },
                            },
                            "signature_text": {"type": "string"},
                        },
                    },
                },
                "score": {"type": "number", "minimum": 0, "maximum": 1},
                "score_parts": {
                    "type": "object",
                    "required": [
                        "identifier_overlap",
                        "reference_link",
                        "path_proximity",
                        "doc_mention",
                    ],
                    "additionalProperties": False,
                    "properties": {
                        "identifier_overlap": {"type": "number", "minimum": 0, "maximum": 1},
                        "reference_link": {"type": "number", "minimum": 0, "maximum": 1},
                        "path_proximity": {"type": "number", "minimum": 0, "maximum": 1},
                        "doc_mention": {"type": "number", "minimum": 0, "maximum": 1},
                    },
                },
                "evidence": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"$ref": "#/$defs/anchor"},
                },
            },
        },
        "convention_finding": {
            "type": "object",
            "required": ["convention", "rationale", "adherence", "example_span"],
            "additionalProperties": False,
            "properties": {
                "convention": {"type": "string", "minLength": 1},
                "rationale": {"type": "string", "minLength": 1},
                "adherence": {"enum": ["followed", "violated", "not_applicable"]},
                "example_span": {
                    "oneOf": [{"type": "null"}, {"$ref": "#/$defs/anchor"}]
                },
            },
        },
        "reasoning_paragraph": {
            "type": "object",
            "required": ["text", "anchor"],
            "additionalProperties": False,
            "properties": {
                "text": {"type": "string", "minLength": 1},
                "anchor": {"oneOf": [{"type": "null"}, {"$ref": "#/$defs/anchor"}]},
            },
        },
        "alternative": {
            "type": "object",
            "required": ["title", "description", "tradeoffs"],
            "additionalProperties": False,
            "properties": {
                "title": {"type": "string", "minLength": 1},
                "description": {"type": "string", "minLength": 1},
                "tradeoffs": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["aspect", "comparison"],
                        "additionalProperties": False,
                        "properties": {
                            "aspect": {"type": "string", "minLength": 1},
                            "comparison": {"type": "string", "minLength": 1},
                        },
                    },
                },
            },
        },
    },
}

# Schemas the generation backend's raw output must satisfy (engine-internal).
CARD_TEXT_SCHEMA = {
    "type": "object",
    "required": ["title", "significance", "summary"],
    "additionalProperties": False,
    "properties": {
        "title": {"type": "string", "minLength": 1},
        "significance": {"enum": ["low", "medium", "high"]},
        "summary": {"type": "string", "minLength": 1},
    },
}

LEVEL2_TEXT_SCHEMA = {
    "type": "object",
    "required": ["reasoning", "alternatives"],
    "additionalProperties": False,
    "properties": {
        "reasoning": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["text"],
                "additionalProperties": False,
                "properties": {
                    "text": {"type": "string", "minLength": 1},
                    "hunk": {"oneOf": [{"type": "null"}, {"type": "integer", "minimum": 0}]},
                },
            },
        },
        "alternatives": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["title", "description", "tradeoffs"],
                "additionalProperties": False,
                "properties": {
                    "title": {"type": "string", "minLength": 1},
                    "description": {"type": "string", "minLength": 1},
                    "tradeoffs": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["aspect", "comparison"],
                            "additionalProperties": False,
                            "properties": {
                                "aspect": {"type": "string", "minLength": 1},
                                "comparison": {"type": "string", "minLength": 1},
                            },
                        },
                    },
                },
            },
        },
    },
}

PUBLISHED_SCHEMAS = {
    "level1.schema.json": LEVEL1_SCHEMA,
    "level2.schema.json": LEVEL2_SCHEMA,
}


def canonical_json(obj) -> bytes:
    """Compact, key-sorted UTF-8 encoding; the byte-determinism contract."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode(
        "utf-8"
    )


def validation_errors(document, schema: dict) -> list[str]:
    """Human-readable validation errors, deterministically ordered."""
    validator = jsonschema.Draft202012Validator(schema)
    errors = []
    for error in validator.iter_errors(document):
        location = "/".join(str(part) for part in error.absolute_path) or "<root>"
        errors.append(f"{location}: {error.message}")
    return sorted(errors)


def is_valid(document, schema: dict) -> bool:
    return not validation_errors(document, schema)


def published_schema_bytes(schema: dict) -> bytes:
    return (json.dumps(schema, indent=2, sort_keys=True) + "\n").encode("utf-8")


def write_published_schemas(directory: str | Path) -> list[Path]:
    """Emit the /schema documents; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, schema in PUBLISHED_SCHEMAS.items():
        target = directory / name
        target.write_bytes(published_schema_bytes(schema))
        written.append(target)
    return written
