"""Tests for SHA256 file hashing."""

from __future__ import annotations

import hashlib
from typing import TYPE_CHECKING

from mslesion.core.hasher import hash_content, hash_file, hash_outputs

if TYPE_CHECKING:
    from pathlib import Path


class TestHashFile:
    def test_hash_file(self, tmp_path: Path):
        f = tmp_path / "metrics.tsv"
        f.write_text("case_id\tdsc\n")
        assert hash_file(f) == hashlib.sha256(b"case_id\tdsc\n").hexdigest()

    def test_hash_empty_file(self, tmp_path: Path):
        f = tmp_path / "empty.bin"
        f.write_bytes(b"")
        assert hash_file(f) == hashlib.sha256(b"").hexdigest()

    def test_hash_large_binary_file(self, tmp_path: Path):
        f = tmp_path / "payload.bin"
        data = bytes(range(256)) * 1000
        f.write_bytes(data)
        assert hash_file(f) == hashlib.sha256(data).hexdigest()


class TestHashOutputs:
    def test_keys_are_relative_posix_paths(self, tmp_path: Path):
        (tmp_path / "reports").mkdir()
        a = tmp_path / "reports" / "a.tsv"
        b = tmp_path / "reports" / "b.json"
        a.write_text("a")
        b.write_text("b")
        digests = hash_outputs(tmp_path, [b, a])
        assert list(digests) == ["reports/a.tsv", "reports/b.json"]
        assert digests["reports/a.tsv"] == hashlib.sha256(b"a").hexdigest()

    def test_skips_directories_and_missing_files(self, tmp_path: Path):
        (tmp_path / "sub").mkdir()
        assert hash_outputs(tmp_path, [tmp_path / "sub", tmp_path / "gone.txt"]) == {}


class TestHashContent:
    def test_matches_file_digest_of_same_text(self, tmp_path: Path):
        f = tmp_path / "recipe.json"
        f.write_bytes('{"stem_width": 4}'.encode())
        assert hash_content('{"stem_width": 4}') == hash_file(f)

    def test_differs_for_different_text(self):
        assert hash_content('{"seed": 1}') != hash_content('{"seed": 2}')
