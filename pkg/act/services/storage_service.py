import io
import json
import logging
import os
import struct
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Any, Dict, Iterable, Iterator, List, Tuple, Union

from pydantic import BaseModel

from act.exceptions import ACTException, IndexFormatError, InputNotFoundError
from act.models.corpus import CanonicalOrder, PositionalIndex, Posting, Verse, VerseId
from act.models.text import NormalizationConfig, RawText
from act.services.index_service import corpus_fingerprint
from act.services.normalize_service import NormalizeService

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@contextmanager
def atomic_write(path: PathLike, binary: bool = False) -> Iterator[IO]:
    """Write to a temporary sibling and rename it over ``path`` on success.

    On any exception the temporary file is removed and ``path`` is untouched.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        mode="wb" if binary else "w",
        encoding=None if binary else "utf-8",
        newline=None if binary else "\n",
        dir=target.parent,
        prefix=f".{target.name}.",
        suffix=".tmp",
        delete=False,
    )
    try:
        with handle:
            yield handle
        os.replace(handle.name, target)
    except BaseException:
        Path(handle.name).unlink(missing_ok=True)
        raise


def _write_varint(buffer: IO[bytes], value: int) -> None:
    if value < 0:
        raise ValueError(f"varint must be non-negative, got {value}")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            buffer.write(bytes((byte | 0x80,)))
        else:
            buffer.write(bytes((byte,)))
            return


def _read_varint(buffer: IO[bytes]) -> int:
    shift = 0
    value = 0
    while True:
        chunk = buffer.read(1)
        if not chunk:
            raise IndexFormatError("Index file is truncated")
        byte = chunk[0]
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value
        shift += 7
        if shift > 63:
            raise IndexFormatError("Index file contains an oversized integer")


def _write_string(buffer: IO[bytes], value: str) -> None:
    encoded = value.encode("utf-8")
    _write_varint(buffer, len(encoded))
    buffer.write(encoded)


def _read_exact(buffer: IO[bytes], size: int) -> bytes:
    data = buffer.read(size)
    if len(data) != size:
        raise IndexFormatError("Index file is truncated")
    return data


def _read_string(buffer: IO[bytes]) -> str:
    size = _read_varint(buffer)
    try:
        return _read_exact(buffer, size).decode("utf-8")
    except UnicodeDecodeError as e:
        raise IndexFormatError(f"Index file contains invalid text: {str(e)}")


class StorageService:
    """Reads and writes everything the pipeline keeps on disk.

    Index file layout (all integers unsigned; varints are LEB128):

        magic           8 bytes  b"ACTINDX\\x00"
        version         uint16, little endian
        config digest   32 bytes, sha256 of the normalization rules
        fingerprint     32 bytes, sha256 of rules + normalized corpus
        settings        varint length + UTF-8 JSON {normalization, book_order}
        verses          varint count, then per verse: book, chapter, verse, raw text
        postings        varint term count, then per term: surface, varint count,
                        then (verse ordinal delta, word position) varint pairs
    """

    MAGIC = b"ACTINDX\x00"
    FORMAT_VERSION = 1

    def save_index(self, index: PositionalIndex, path: PathLike) -> Path:
        buffer = io.BytesIO()
        buffer.write(self.MAGIC)
        buffer.write(struct.pack("<H", self.FORMAT_VERSION))
        buffer.write(bytes.fromhex(index.config_digest))
        buffer.write(bytes.fromhex(index.corpus_fingerprint))

        settings = {
            "normalization": index.normalization.model_dump(mode="json"),
            "book_order": index.order.book_order,
        }
        _write_string(buffer, json.dumps(settings, ensure_ascii=False, sort_keys=True))

        ordinals: Dict[VerseId, int] = {}
        _write_varint(buffer, len(index.verses))
        for ordinal, verse in enumerate(index.verses):
            ordinals[verse.id] = ordinal
            _write_string(buffer, verse.id.book)
            _write_varint(buffer, verse.id.chapter)
            _write_varint(buffer, verse.id.verse)
            _write_string(buffer, verse.raw)

        _write_varint(buffer, len(index.postings))
        for surface in sorted(index.postings):
            entries = index.postings[surface]
            _write_string(buffer, surface)
            _write_varint(buffer, len(entries))
            previous = 0
            for posting in entries:
                ordinal = ordinals[posting.verse]
                _write_varint(buffer, ordinal - previous)
                _write_varint(buffer, posting.word_position)
                previous = ordinal

        target = Path(path)
        with atomic_write(target, binary=True) as handle:
            handle.write(buffer.getvalue())
        logger.info("Wrote index %s (%d bytes)", target, buffer.tell())
        return target

    def load_index(self, path: PathLike) -> PositionalIndex:
        """
        Load an index written by ``save_index`` and re-verify it.

        Args:
            path: Location of the index file

        Returns:
            The index, with verses re-normalized from their stored raw text

        Raises:
            InputNotFoundError: If the file does not exist
            IndexFormatError: On bad magic, unknown version, truncation or a
                fingerprint that does not match the stored corpus
        """
        source = Path(path)
        if not source.is_file():
            raise InputNotFoundError(source)
        try:
            buffer = io.BytesIO(source.read_bytes())
        except OSError as e:
            raise IndexFormatError(f"Error reading index {source}: {str(e)}")

        try:
            return self._decode_index(buffer, source)
        except ACTException:
            raise
        except (ValueError, KeyError, IndexError) as e:
            raise IndexFormatError(f"Corrupt index {source}: {str(e)}")

    def _decode_index(self, buffer: IO[bytes], source: Path) -> PositionalIndex:
        if _read_exact(buffer, len(self.MAGIC)) != self.MAGIC:
            raise IndexFormatError(f"{source} is not an index file")
        (version,) = struct.unpack("<H", _read_exact(buffer, 2))
        if version != self.FORMAT_VERSION:
            raise IndexFormatError(
                f"Unsupported index format version {version} (expected {self.FORMAT_VERSION})"
            )
        config_digest = _read_exact(buffer, 32).hex()
        fingerprint = _read_exact(buffer, 32).hex()

        settings = json.loads(_read_string(buffer))
        normalization = NormalizationConfig(**settings["normalization"])
        order = CanonicalOrder(settings["book_order"])
        if normalization.digest() != config_digest:
            raise IndexFormatError(f"Normalization settings in {source} do not match its digest")

        normalizer = NormalizeService(normalization)
        verses: List[Verse] = []
        for _ in range(_read_varint(buffer)):
            verse_id = VerseId(
                book=_read_string(buffer),
                chapter=_read_varint(buffer),
                verse=_read_varint(buffer),
            )
            raw = _read_string(buffer)
            tokens = normalizer.normalize(RawText(content=raw, source_id=str(verse_id)))
            verses.append(Verse(id=verse_id, tokens=tokens, raw=raw))

        postings: Dict[str, List[Posting]] = {}
        for _ in range(_read_varint(buffer)):
            surface = _read_string(buffer)
            entries: List[Posting] = []
            ordinal = 0
            for _ in range(_read_varint(buffer)):
                ordinal += _read_varint(buffer)
                position = _read_varint(buffer)
                verse = verses[ordinal]
                if verse.tokens[position].surface != surface:
                    raise IndexFormatError(f"Posting for {surface!r} does not match verse {verse.id}")
                entries.append(Posting(verse.id, position))
            postings[surface] = entries

        if buffer.read(1):
            raise IndexFormatError(f"Trailing bytes after postings in {source}")
        if corpus_fingerprint(verses, normalization) != fingerprint:
            raise IndexFormatError(f"Fingerprint mismatch: {source} does not match its stored corpus")

        index = PositionalIndex(
            verses=verses,
            postings=postings,
            normalization=normalization,
            order=order,
            corpus_fingerprint=fingerprint,
        )
        logger.info("Loaded index %s: %d verses, %d tokens", source, len(index), index.total_tokens)
        return index

    def read_text(self, path: PathLike) -> str:
        """Read a UTF-8 target text, failing with InputNotFoundError when absent."""
        source = Path(path)
        if not source.is_file():
            raise InputNotFoundError(source)
        return source.read_text(encoding="utf-8")

    def read_jsonl(self, path: PathLike) -> List[Tuple[int, Dict[str, Any]]]:
        """(line number, decoded object) for every non-blank line."""
        source = Path(path)
        if not source.is_file():
            raise InputNotFoundError(source)
        records = []
        with source.open("r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    records.append((line_number, json.loads(line)))
                except json.JSONDecodeError as e:
                    raise ACTException(f"{source}: line {line_number}: invalid JSON: {e.msg}", exit_code=3)
        return records

    def write_jsonl(self, path: PathLike, records: Iterable[Union[BaseModel, Dict[str, Any]]]) -> Path:
        """Write one JSON object per line, replacing the file atomically."""
        with atomic_write(path) as handle:
            for record in records:
                if isinstance(record, BaseModel):
                    record = record.model_dump(mode="json")
                handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
                handle.write("\n")
        return Path(path)

    def write_json(self, path: PathLike, payload: Any) -> Path:
        with atomic_write(path) as handle:
            json.dump(payload, handle, ensure_ascii=False, indent=2, sort_keys=True)
            handle.write("\n")
        return Path(path)
