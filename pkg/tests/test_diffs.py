from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agentlens.diffs import (
    LineRange,
    apply_hunks,
    hunks_to_text,
    make_unified_diff,
    parse_unified_diff,
    split_lines,
)
from agentlens.errors import ApplyError, ParseError

from corpus import mutate_text, random_text


def test_line_range_validation():
    assert len(LineRange(1, 3)) == 3
    with pytest.raises(ValueError):
        LineRange(0, 1)
    with pytest.raises(ValueError):
        LineRange(3, 2)


def test_split_lines_edges():
    assert split_lines("") == []
    assert split_lines("a") == ["a"]
    assert split_lines("a\n") == ["a\n"]
    assert split_lines("a\nb") == ["a\n", "b"]
    assert split_lines("\n") == ["\n"]
    assert split_lines("a\r\nb") == ["a\r\n", "b"]  # \r stays line content


def test_empty_diff_gives_no_hunks():
    assert parse_unified_diff("") == []
    assert parse_unified_diff("   \n") == []


def test_single_insertion_hunk():
    # One line inserted into a 2-line file; checked by applying the hunk and
    # comparing line-by-line against the expected post-image.
    diff = "@@ -1,2 +1,3 @@\n a\n+b\n c\n"
    hunks = parse_unified_diff(diff)
    assert len(hunks) == 1
    hunk = hunks[0]
    assert hunk.added_lines == ["b"]
    assert hunk.removed_lines == []
    assert len(hunk.post_range) == 3
    assert len(hunk.pre_range) == 2
    applied = apply_hunks("a\nc\n", hunks)
    expected_lines = ["a", "b", "c"]
    assert applied.split("\n")[:-1] == expected_lines


def test_malformed_header_raises():
    with pytest.raises(ParseError):
        parse_unified_diff("@@ garbage @@\n x\n")


def test_header_without_counts():
    hunks = parse_unified_diff("@@ -2 +2 @@\n-x\n+y\n")
    assert hunks[0].pre_len == 1 and hunks[0].post_len == 1
    assert apply_hunks("a\nx\nc\n", hunks) == "a\ny\nc\n"


def test_body_header_count_mismatch_raises():
    with pytest.raises(ParseError):
        parse_unified_diff("@@ -1,2 +1,3 @@\n a\n+b\n")


def test_context_mismatch_raises_apply_error():
    hunks = parse_unified_diff("@@ -1,2 +1,3 @@\n a\n+b\n c\n")
    with pytest.raises(ApplyError) as excinfo:
        apply_hunks("a\nDIFFERENT\n", hunks)
    assert excinfo.value.hunk_index == 0


def test_hunk_beyond_pre_image_raises():
    hunks = parse_unified_diff("@@ -10,1 +10,1 @@\n-x\n+y\n")
    with pytest.raises(ApplyError):
        apply_hunks("a\n", hunks)


def test_creation_and_deletion_diffs():
    creation = make_unified_diff("", "x\ny\n")
    hunks = parse_unified_diff(creation)
    assert all(h.pre_len == 0 for h in hunks)
    assert apply_hunks("", hunks) == "x\ny\n"

    deletion = make_unified_diff("x\ny\n", "")
    hunks = parse_unified_diff(deletion)
    assert all(h.post_len == 0 for h in hunks)
    assert hunks[0].pre_range == LineRange(1, 2)
    assert apply_hunks("x\ny\n", hunks) == ""


def test_missing_trailing_newline_round_trips():
    cases = [
        ("a\nb", "a\nb\n"),
        ("a\nb\n", "a\nb"),
        ("a", "b"),
        ("", "x"),
        ("x", ""),
        ("a\nb", "a\nc"),
    ]
    for pre, post in cases:
        diff = make_unified_diff(pre, post)
        assert apply_hunks(pre, parse_unified_diff(diff)) == post


def test_multiple_hunks_apply_in_order():
    pre = "".join(f"line{i}\n" for i in range(1, 21))
    post_lines = [f"line{i}" for i in range(1, 21)]
    post_lines[2] = "changed3"
    post_lines[15] = "changed16"
    post = "\n".join(post_lines) + "\n"
    diff = make_unified_diff(pre, post)
    hunks = parse_unified_diff(diff)
    assert len(hunks) == 2
    assert apply_hunks(pre, hunks) == post


def test_hunks_to_text_round_trips():
    pre = "a\nb\nc\n"
    post = "a\nB\nc\nd"
    hunks = parse_unified_diff(make_unified_diff(pre, post))
    reparsed = parse_unified_diff(hunks_to_text(hunks))
    assert reparsed == hunks
    assert apply_hunks(pre, reparsed) == post


def test_ignores_file_header_lines():
    diff = "--- a/x\n+++ b/x\n@@ -1,1 +1,1 @@\n-a\n+b\n"
    assert apply_hunks("a\n", parse_unified_diff(diff)) == "b\n"


def test_change_hunk_invariant_counts():
    hunk = parse_unified_diff("@@ -1,3 +1,2 @@\n a\n-b\n-c\n+d\n")[0]
    context = sum(1 for tag, _ in hunk.ops if tag == " ")
    assert context + len(hunk.added_lines) == hunk.post_len
    assert context + len(hunk.removed_lines) == hunk.pre_len


def test_seeded_random_round_trips():
    rng = random.Random(90125)
    for _ in range(60):
        pre = random_text(rng, max_lines=120)
        post = mutate_text(rng, pre, max_lines=120)
        diff = make_unified_diff(pre, post)
        assert apply_hunks(pre, parse_unified_diff(diff)) == post


@settings(max_examples=120, deadline=None)
@given(
    pre=st.lists(st.text(alphabet=st.characters(blacklist_characters="\n"), max_size=12), max_size=40),
    post=st.lists(st.text(alphabet=st.characters(blacklist_characters="\n"), max_size=12), max_size=40),
    pre_trailing=st.booleans(),
    post_trailing=st.booleans(),
)
def test_property_round_trip(pre, post, pre_trailing, post_trailing):
    pre_text = "\n".join(pre) + ("\n" if pre and pre_trailing else "")
    post_text = "\n".join(post) + ("\n" if post and post_trailing else "")
    diff = make_unified_diff(pre_text, post_text)
    assert apply_hunks(pre_text, parse_unified_diff(diff)) == post_text
