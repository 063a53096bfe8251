"""Byte-level tokenizer: ids 0..255 are raw bytes, plus PAD/EOS/SEP specials.

Reversible by construction; no external vocabulary.
"""

from __future__ import annotations

from ..errors import ValidationError

PAD_ID = 256
EOS_ID = 257
SEP_ID = 258
VOCAB_SIZE = 259
SPECIAL_IDS = frozenset({PAD_ID, EOS_ID, SEP_ID})


class ByteTokenizer:
    pad_id = PAD_ID
    eos_id = EOS_ID
    sep_id = SEP_ID
    vocab_size = VOCAB_SIZE

    def encode_bytes(self, data: bytes) -> list[int]:
        return list(data)

    def encode(self, text: str) -> list[int]:
        return self.encode_bytes(text.encode("utf-8"))

    def decode_bytes(self, ids, strip_special: bool = False) -> bytes:
        out = bytearray()
        for i, token in enumerate(ids):
            token = int(token)
            if token in SPECIAL_IDS:
                if strip_special:
                    continue
                raise ValidationError(f"special id {token} at position {i} in byte decode")
            if not 0 <= token <= 255:
                raise ValidationError(f"id {token} at position {i} is not a byte")
            out.append(token)
        return bytes(out)

    def decode(self, ids, strip_special: bool = False) -> str:
        return self.decode_bytes(ids, strip_special=strip_special).decode("utf-8")
