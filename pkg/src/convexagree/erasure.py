"""Reed-Solomon erasure coding over GF(2^16) and SHA-256 Merkle trees."""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional, Sequence

import numpy as np

FIELD_BITS = 16
FIELD_ORDER = 1 << FIELD_BITS
_POLY = 0x1100B  # x^16 + x^12 + x^3 + x + 1
LENGTH_PREFIX_BITS = 64
DIGEST_BYTES = 32
KAPPA = 8 * DIGEST_BYTES


def _tables():
    exp = np.zeros(2 * FIELD_ORDER, dtype=np.int64)
    log = np.zeros(FIELD_ORDER, dtype=np.int64)
    x = 1
    for i in range(FIELD_ORDER - 1):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & FIELD_ORDER:
            x ^= _POLY
    exp[FIELD_ORDER - 1:2 * (FIELD_ORDER - 1)] = exp[:FIELD_ORDER - 1]
    return exp, log


_EXP, _LOG = _tables()


def gf_mul(a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = _EXP[_LOG[a] + _LOG[b]]
    return np.where((a == 0) | (b == 0), 0, out)


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse in GF(2^16)")
    return int(_EXP[(FIELD_ORDER - 1 - _LOG[a]) % (FIELD_ORDER - 1)])


def gf_pow(a: int, e: int) -> int:
    if e == 0:
        return 1
    if a == 0:
        return 0
    return int(_EXP[(_LOG[a] * e) % (FIELD_ORDER - 1)])


@dataclass(frozen=True)
class RSConfig:
    n_shares: int

    def __post_init__(self):
        if not 1 <= self.n_shares <= FIELD_ORDER - 1:
            raise ValueError(f"n_shares must be in 1..{FIELD_ORDER - 1}")

    @property
    def threshold(self) -> int:
        return self.n_shares - self.n_shares // 2

    @property
    def field_bits(self) -> int:
        return FIELD_BITS

    def columns(self, message_bits: int) -> int:
        total = LENGTH_PREFIX_BITS + message_bits
        return max(1, math.ceil(total / (FIELD_BITS * self.threshold)))

    def share_bytes(self, length_cap: int) -> int:
        return 2 * self.columns(length_cap)


def _frame(m: str) -> np.ndarray:
    if set(m) - {"0", "1"}:
        raise ValueError("message must be a bitstring")
    framed = format(len(m), f"0{LENGTH_PREFIX_BITS}b") + m
    return framed


def _bits_to_symbols(bits: str, count: int) -> np.ndarray:
    bits = bits + "0" * (count * FIELD_BITS - len(bits))
    nbytes = len(bits) // 8
    raw = int(bits, 2).to_bytes(nbytes, "big") if bits else b""
    return np.frombuffer(raw, dtype=">u2").astype(np.int64)


def _symbols_to_bits(symbols: np.ndarray) -> str:
    raw = symbols.astype(">u2").tobytes()
    return format(int.from_bytes(raw, "big"), f"0{8 * len(raw)}b")


@lru_cache(maxsize=1024)
def _vandermonde_rows(rows: tuple, k: int) -> np.ndarray:
    V = np.zeros((len(rows), k), dtype=np.int64)
    for r, x in enumerate(rows):
        V[r] = [gf_pow(x, j) for j in range(k)]
    V.setflags(write=False)
    return V


def _vandermonde(rows: Sequence[int], k: int) -> np.ndarray:
    return _vandermonde_rows(tuple(rows), k)


@lru_cache(maxsize=256)
def _encode_cached(m: str, n_shares: int) -> tuple[bytes, ...]:
    cfg = RSConfig(n_shares)
    k = cfg.threshold
    framed = _frame(m)
    cols = cfg.columns(len(m))
    coeffs = _bits_to_symbols(framed, k * cols).reshape(cols, k).T  # k x cols
    V = _vandermonde(range(1, n_shares + 1), k)
    shares = np.zeros((n_shares, cols), dtype=np.int64)
    for j in range(k):
        shares ^= gf_mul(V[:, j:j + 1], coeffs[j:j + 1, :])
    return tuple(row.astype(">u2").tobytes() for row in shares)


def rs_encode(m: str, cfg: RSConfig) -> list[bytes]:
    """Split bitstring ``m`` into ``cfg.n_shares`` byte shares."""
    if len(m) < 1:
        raise ValueError("message must be nonempty")
    return list(_encode_cached(m, cfg.n_shares))


@lru_cache(maxsize=1024)
def _inverse(indices: tuple[int, ...], k: int) -> np.ndarray:
    A = _vandermonde(indices, k).copy()
    inv = np.zeros((k, k), dtype=np.int64)
    inv[np.arange(k), np.arange(k)] = 1
    for col in range(k):
        piv = next(r for r in range(col, k) if A[r, col] != 0)
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            inv[[col, piv]] = inv[[piv, col]]
        s = gf_inv(int(A[col, col]))
        A[col] = gf_mul(A[col], s)
        inv[col] = gf_mul(inv[col], s)
        for r in range(k):
            if r != col and A[r, col] != 0:
                f = int(A[r, col])
                A[r] ^= gf_mul(A[col], f)
                inv[r] ^= gf_mul(inv[col], f)
    return inv


def rs_decode(shares: Mapping[int, bytes], cfg: RSConfig, length_cap: int) -> Optional[str]:
    """Recover the message from at least ``threshold`` shares (indices are 1-based).

    Returns ``None`` when too few shares are given, shares are malformed, or the
    decoded length exceeds ``length_cap``.
    """
    k = cfg.threshold
    idx = sorted(i for i in shares if 1 <= i <= cfg.n_shares)
    if len(idx) < k:
        return None
    idx = tuple(idx[:k])
    lengths = {len(shares[i]) for i in idx}
    if len(lengths) != 1:
        return None
    nbytes = lengths.pop()
    if nbytes == 0 or nbytes % 2 or nbytes > cfg.share_bytes(length_cap):
        return None
    rows = np.stack([np.frombuffer(shares[i], dtype=">u2").astype(np.int64) for i in idx])
    inv = _inverse(idx, k)
    coeffs = np.zeros_like(rows)
    for j in range(k):
        coeffs ^= gf_mul(inv[:, j:j + 1], rows[j:j + 1, :])
    bits = _symbols_to_bits(coeffs.T.reshape(-1))
    length = int(bits[:LENGTH_PREFIX_BITS], 2)
    if length < 1 or length > length_cap or LENGTH_PREFIX_BITS + length > len(bits):
        return None
    if cfg.columns(length) != nbytes // 2:
        return None
    body = bits[LENGTH_PREFIX_BITS:LENGTH_PREFIX_BITS + length]
    if bits[LENGTH_PREFIX_BITS + length:].strip("0"):
        return None
    return body


# -- Merkle trees -------------------------------------------------------------

def leaf_hash(data: bytes) -> bytes:
    return hashlib.sha256(b"\x00" + data).digest()


def node_hash(left: bytes, right: bytes = b"") -> bytes:
    return hashlib.sha256(b"\x01" + left + right).digest()


def mt_build(leaves: Sequence[bytes]) -> tuple[bytes, list[list[bytes]]]:
    """Return the root and one authentication path per leaf."""
    if not leaves:
        raise ValueError("Merkle tree needs at least one leaf")
    level = [leaf_hash(x) for x in leaves]
    if len(level) == 1:
        return node_hash(level[0]), [[]]
    paths: list[list[bytes]] = [[] for _ in leaves]
    pos = list(range(len(leaves)))
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level), 2):
            nxt.append(node_hash(level[i], level[i + 1]) if i + 1 < len(level) else level[i])
        for leaf, p in enumerate(pos):
            sib = p ^ 1
            if sib < len(level):
                paths[leaf].append(level[sib])
            pos[leaf] = p // 2
        level = nxt
    return level[0], paths


def mt_verify(root: bytes, index: int, leaf: bytes, witness: Sequence[bytes], n_leaves: int) -> bool:
    """Check that ``leaf`` sits at 0-based ``index`` of an ``n_leaves`` tree with ``root``.

    The leaf count fixes which levels promote an unpaired node.
    """
    if not 0 <= index < n_leaves:
        return False
    h = leaf_hash(leaf)
    if n_leaves == 1:
        return not witness and node_hash(h) == root
    it = iter(witness)
    p, width = index, n_leaves
    try:
        while width > 1:
            sib = p ^ 1
            if sib < width:
                s = next(it)
                h = node_hash(s, h) if p & 1 else node_hash(h, s)
            p, width = p // 2, (width + 1) // 2
    except StopIteration:
        return False
    if next(it, None) is not None:
        return False
    return h == root


@lru_cache(maxsize=None)
def path_length(n_leaves: int) -> int:
    return 0 if n_leaves <= 1 else math.ceil(math.log2(n_leaves))


# -- share bundles --------------------------------------------------------------

ZERO_ROOT = bytes(DIGEST_BYTES)


@dataclass(frozen=True)
class ShareBundle:
    root: bytes
    index: int  # 1-based
    share: bytes
    witness: tuple[bytes, ...]

    def to_bytes(self) -> bytes:
        head = self.root + struct.pack(">HI", self.index, len(self.share))
        return head + self.share + struct.pack(">B", len(self.witness)) + b"".join(self.witness)

    @property
    def bits(self) -> int:
        return 8 * (len(self.root) + 2 + 4 + len(self.share) + 1 + DIGEST_BYTES * len(self.witness))

    @classmethod
    def from_bytes(cls, raw: bytes) -> "ShareBundle":
        if len(raw) < DIGEST_BYTES + 7:
            raise ValueError("bundle too short")
        root = raw[:DIGEST_BYTES]
        index, slen = struct.unpack(">HI", raw[DIGEST_BYTES:DIGEST_BYTES + 6])
        pos = DIGEST_BYTES + 6
        share = raw[pos:pos + slen]
        pos += slen
        if len(share) != slen or pos >= len(raw):
            raise ValueError("truncated share")
        count = raw[pos]
        pos += 1
        wit = tuple(raw[pos + DIGEST_BYTES * i:pos + DIGEST_BYTES * (i + 1)] for i in range(count))
        if pos + DIGEST_BYTES * count != len(raw):
            raise ValueError("bundle length mismatch")
        return cls(root, index, share, wit)


@lru_cache(maxsize=4096)
def bundle_cap_bits(length_cap: int, n_shares: int) -> int:
    """Largest bundle (in bits) an honest sender can produce for ``length_cap``-bit messages."""
    cfg = RSConfig(n_shares)
    return 8 * (DIGEST_BYTES + 7 + cfg.share_bytes(length_cap) + DIGEST_BYTES * path_length(n_shares))


# Verification results keyed by (root, bundle); pure, so memoizing is safe.
_VERIFY_MEMO: dict = {}


def _remember(key, ok: bool) -> bool:
    if len(_VERIFY_MEMO) > 400_000:
        _VERIFY_MEMO.clear()
    _VERIFY_MEMO[key] = ok
    return ok


def make_bundles(m: str, n_shares: int) -> list[ShareBundle]:
    return list(_bundles_cached(m, n_shares))


@lru_cache(maxsize=512)
def _bundles_cached(m: str, n_shares: int) -> tuple[ShareBundle, ...]:
    shares = rs_encode(m, RSConfig(n_shares))
    root, paths = mt_build(shares)
    out = [ShareBundle(root, i + 1, s, tuple(w)) for i, (s, w) in enumerate(zip(shares, paths))]
    for b in out:
        _remember((root, b, n_shares), True)
    return tuple(out)


def share_verifies(root: bytes, b: ShareBundle, n_shares: int) -> bool:
    """Merkle check of ``b``'s share and witness against ``root`` (``b.root`` is ignored)."""
    key = (root, b, n_shares)
    hit = _VERIFY_MEMO.get(key)
    if hit is None:
        hit = _remember(key, mt_verify(root, b.index - 1, b.share, b.witness, n_shares))
    return hit


def bundle_valid(b: ShareBundle, n_shares: int, length_cap: int) -> bool:
    if not isinstance(b, ShareBundle) or not 1 <= b.index <= n_shares:
        return False
    if b.bits > bundle_cap_bits(length_cap, n_shares) or len(b.witness) > path_length(n_shares):
        return False
    return share_verifies(b.root, b, n_shares)


@lru_cache(maxsize=1024)
def _decode_committed(root: bytes, items: tuple, n_shares: int, length_cap: int) -> Optional[str]:
    cfg = RSConfig(n_shares)
    m = rs_decode(dict(items), cfg, length_cap)
    if m is None:
        return None
    # Re-encode so that a commitment to a non-codeword cannot yield
    # different messages for different share subsets.
    if mt_build(rs_encode(m, cfg))[0] != root:
        return None
    return m


def decode_committed(root: bytes, shares: Mapping[int, bytes], n_shares: int, length_cap: int) -> Optional[str]:
    """Decode shares verified under ``root`` and confirm they form that exact encoding."""
    cfg = RSConfig(n_shares)
    idx = sorted(shares)
    if len(idx) < cfg.threshold:
        return None
    items = tuple((i, shares[i]) for i in idx[:cfg.threshold])
    return _decode_committed(root, items, n_shares, length_cap)
