"""MediaWiki XML export parsing and per-wiki metadata sidecars."""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Optional, Union

log = logging.getLogger(__name__)

_ID_SANITIZE_RE = re.compile(r"[\s/]+")


def sanitize_wiki_id(raw: str) -> str:
    """Wiki ids appear in file names and plan lines, so whitespace and
    slashes are squashed to underscores."""
    cleaned = _ID_SANITIZE_RE.sub("_", raw.strip())
    if not cleaned:
        raise ValueError(f"unusable wiki id: {raw!r}")
    return cleaned


@dataclass(frozen=True)
class WikiPage:
    title: str
    text: str
    is_redirect: bool = False


@dataclass(frozen=True)
class WikiDump:
    wiki_id: str
    pages: tuple[WikiPage, ...]


class DumpParseError(ValueError):
    def __init__(self, message: str, byte_offset: Optional[int] = None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


def _local(tag: str) -> str:
    return tag.rpartition("}")[2]


def _byte_offset(path: Optional[Path], line: int, column: int) -> Optional[int]:
    if path is None:
        return None
    try:
        data = path.read_bytes()
    except OSError:
        return None
    lines = data.splitlines(keepends=True)
    return sum(len(l) for l in lines[: line - 1]) + column


def parse_wiki_dump(
    source: Union[str, Path, IO[bytes]], wiki_id: Optional[str] = None
) -> WikiDump:
    """Stream a MediaWiki XML export into a WikiDump.

    Reads mediawiki/page/{title,redirect,revision/text}; duplicate titles
    keep their first occurrence. Malformed XML is fatal.
    """
    path: Optional[Path] = None
    if isinstance(source, (str, Path)):
        path = Path(source)
        if wiki_id is None:
            wiki_id = sanitize_wiki_id(path.stem)
        stream: Union[Path, IO[bytes]] = path
    else:
        stream = source
    if wiki_id is None:
        raise ValueError("wiki_id is required when parsing from a stream")

    pages: list[WikiPage] = []
    seen_titles: set[str] = set()
    title: Optional[str] = None
    text = ""
    redirect = False
    try:
        for _, elem in ET.iterparse(stream, events=("end",)):
            tag = _local(elem.tag)
            if tag == "title":
                title = elem.text or ""
            elif tag == "redirect":
                redirect = True
            elif tag == "text":
                text = elem.text or ""
            elif tag == "page":
                if title is None:
                    raise DumpParseError(f"{wiki_id}: page without title")
                if title in seen_titles:
                    log.warning("%s: duplicate page title %r skipped", wiki_id, title)
                else:
                    seen_titles.add(title)
                    pages.append(WikiPage(title, text, redirect))
                title, text, redirect = None, "", False
                elem.clear()
    except ET.ParseError as exc:
        line, column = exc.position
        raise DumpParseError(
            f"{wiki_id}: malformed XML: {exc}", _byte_offset(path, line, column)
        ) from exc
    return WikiDump(wiki_id, tuple(pages))


# --- metadata sidecar: line-oriented key=value --------------------------------

@dataclass(frozen=True)
class WikiMetadata:
    wiki_id: str
    pages: Optional[int] = None
    articles: Optional[int] = None
    users: Optional[int] = None
    active_users: Optional[int] = None
    wam_score: Optional[float] = None


class MetadataError(ValueError):
    pass


_COUNT_KEYS = {"pages": "pages", "articles": "articles", "users": "users",
               "activeusers": "active_users"}


def load_wiki_metadata(path: Union[str, Path], wiki_id: Optional[str] = None) -> WikiMetadata:
    path = Path(path)
    if wiki_id is None:
        wiki_id = sanitize_wiki_id(path.stem)
    fields: dict[str, Union[int, float]] = {}
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise MetadataError(f"{path}:{number}: expected key=value, got {stripped!r}")
        key = key.strip().lower()
        value = value.strip()
        if key in _COUNT_KEYS:
            try:
                count = int(value)
            except ValueError:
                raise MetadataError(f"{path}:{number}: {key} is not an integer: {value!r}") from None
            if count < 0:
                raise MetadataError(f"{path}:{number}: {key} must be >= 0, got {count}")
            fields[_COUNT_KEYS[key]] = count
        elif key == "wam":
            try:
                wam = float(value)
            except ValueError:
                raise MetadataError(f"{path}:{number}: wam is not a number: {value!r}") from None
            if not 0.0 <= wam <= 100.0:
                raise MetadataError(f"{path}:{number}: wam must be within [0,100], got {wam}")
            fields["wam_score"] = wam
        else:
            log.warning("%s:%d: unknown metadata key %r ignored", path, number, key)
    return WikiMetadata(wiki_id, **fields)
