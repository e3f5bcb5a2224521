from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import pytest

from agentlens.schemas import (
    CARD_TEXT_SCHEMA,
    LEVEL1_SCHEMA,
    LEVEL2_SCHEMA,
    LEVEL2_TEXT_SCHEMA,
    PUBLISHED_SCHEMAS,
    canonical_json,
    is_valid,
    published_schema_bytes,
    validation_errors,
)

REPO_ROOT = Path(__file__).resolve().parent.parent


class TestPublishedFiles:
    @pytest.mark.parametrize("name", sorted(PUBLISHED_SCHEMAS))
    def test_published_file_matches_source(self, name):
        published = REPO_ROOT / "schema" / name
        assert published.is_file(), f"missing published schema {name}"
        assert published.read_bytes() == published_schema_bytes(PUBLISHED_SCHEMAS[name])

    @pytest.mark.parametrize("name", sorted(PUBLISHED_SCHEMAS))
    def test_schemas_are_valid_draft_2020_12(self, name):
        jsonschema.Draft202012Validator.check_schema(PUBLISHED_SCHEMAS[name])

    def test_internal_schemas_are_valid(self):
        jsonschema.Draft202012Validator.check_schema(CARD_TEXT_SCHEMA)
        jsonschema.Draft202012Validator.check_schema(LEVEL2_TEXT_SCHEMA)


class TestValidationHelpers:
    def test_error_listing_is_deterministic(self):
        doc = {"version": 2, "cards": "nope"}
        first = validation_errors(doc, LEVEL1_SCHEMA)
        second = validation_errors(doc, LEVEL1_SCHEMA)
        assert first == second
        assert first, "expected validation errors"

    def test_minimal_valid_level1(self):
        doc = {"version": 1, "session_id": "s", "snapshot_id": "x", "cards": []}
        assert is_valid(doc, LEVEL1_SCHEMA)

    def test_extra_fields_rejected(self):
        doc = {
            "version": 1,
            "session_id": "s",
            "snapshot_id": "x",
            "cards": [],
            "surprise": True,
        }
        assert not is_valid(doc, LEVEL1_SCHEMA)

    def test_level2_requires_reasoning(self):
        doc = {
            "version": 1,
            "session_id": "s",
            "order_index": 0,
            "path": "a.py",
            "influences": [],
            "conventions": [],
            "reasoning": [],
            "alternatives": [],
        }
        assert not is_valid(doc, LEVEL2_SCHEMA)

    def test_canonical_json_is_stable(self):
        obj = {"b": [1, 2], "a": {"y": 0.5, "x": "ü"}}
        assert canonical_json(obj) == canonical_json(json.loads(canonical_json(obj)))
