"""
Physical Ledger

Stands in for the physical world: every holon's physical part is an opaque
descriptor held here under a ledger id. Holons only keep a reference plus the
64-bit digest of the descriptor they last saw, so synchronization is a
checksum comparison.

Digest: BLAKE2b with an 8-byte digest, rendered as 16 lowercase hex digits.
"""

import hashlib
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from core.errors import DuplicateId, NotFound

DIGEST_SIZE = 8
MERGE_SEPARATOR = b"\x1e"


def digest(descriptor: bytes) -> str:
    return hashlib.blake2b(descriptor, digest_size=DIGEST_SIZE).hexdigest()


def chain_descriptor(old: bytes, process_id: str, occurrence: int) -> bytes:
    """Simulated physical transformation: digest-chain the old descriptor."""
    payload = b"\x00".join([old, process_id.encode("utf-8"), str(occurrence).encode("ascii")])
    return hashlib.blake2b(payload, digest_size=32).digest()


def ledger_id_for(holon_id: str) -> str:
    return f"ledger:{holon_id}"


@dataclass(frozen=True)
class LedgerEntry:
    descriptor: bytes
    checksum: str

    @classmethod
    def of(cls, descriptor: bytes) -> "LedgerEntry":
        return cls(descriptor=bytes(descriptor), checksum=digest(descriptor))


@dataclass(frozen=True)
class LedgerMutation:
    seq: int
    op: str                       # create, rewrite, merge, split, tamper
    entry_ids: Tuple[str, ...]
    checksums: Tuple[str, ...]


@dataclass
class PhysicalLedger:
    """
    Append-only store of physical descriptors.

    Entries are never removed. `history` is the runtime audit trail of
    committed mutations; it is not part of structural equality and is not
    serialized.
    """
    entries: Dict[str, LedgerEntry] = field(default_factory=dict)
    history: List[LedgerMutation] = field(default_factory=list, compare=False)

    def __contains__(self, entry_id: str) -> bool:
        return entry_id in self.entries

    def get(self, entry_id: str) -> LedgerEntry:
        try:
            return self.entries[entry_id]
        except KeyError:
            raise NotFound("ledger entry", entry_id) from None

    def checksum(self, entry_id: str) -> str:
        return self.get(entry_id).checksum

    def _record(self, op: str, entry_ids: Sequence[str]):
        self.history.append(LedgerMutation(
            seq=len(self.history) + 1,
            op=op,
            entry_ids=tuple(entry_ids),
            checksums=tuple(self.entries[e].checksum for e in entry_ids),
        ))

    def create(self, entry_id: str, descriptor: bytes) -> LedgerEntry:
        if entry_id in self.entries:
            raise DuplicateId("ledger entry", entry_id)
        self.entries[entry_id] = LedgerEntry.of(descriptor)
        self._record("create", [entry_id])
        return self.entries[entry_id]

    def rewrite(self, entry_id: str, descriptor: bytes) -> LedgerEntry:
        self.get(entry_id)
        self.entries[entry_id] = LedgerEntry.of(descriptor)
        self._record("rewrite", [entry_id])
        return self.entries[entry_id]

    def merge(self, source_ids: Iterable[str], new_id: str) -> LedgerEntry:
        sources = [self.get(s) for s in source_ids]
        if new_id in self.entries:
            raise DuplicateId("ledger entry", new_id)
        self.entries[new_id] = LedgerEntry.of(MERGE_SEPARATOR.join(s.descriptor for s in sources))
        self._record("merge", [new_id])
        return self.entries[new_id]

    def split(self, source_id: str, parts: Sequence[Tuple[str, bytes]]) -> List[LedgerEntry]:
        self.get(source_id)
        for new_id, _ in parts:
            if new_id in self.entries:
                raise DuplicateId("ledger entry", new_id)
        for new_id, descriptor in parts:
            self.entries[new_id] = LedgerEntry.of(descriptor)
        self._record("split", [new_id for new_id, _ in parts])
        return [self.entries[new_id] for new_id, _ in parts]

    def tamper(self, entry_id: str, descriptor: bytes) -> LedgerEntry:
        """Out-of-band mutation that bypasses the holon (test hook)."""
        self.get(entry_id)
        self.entries[entry_id] = LedgerEntry.of(descriptor)
        self._record("tamper", [entry_id])
        return self.entries[entry_id]
