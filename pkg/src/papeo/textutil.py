"""Text normalization and tokenization shared by the linker and the data model.

Two tokenizers exist on purpose:

* :func:`ws_tokens` — NFC + whitespace split. Defines the token positions
  that sync-highlight spans refer to, so it must never drop tokens.
* :func:`norm_tokens` — NFC + lowercase + punctuation stripped + whitespace
  split. Feeds the lexical/embedding similarity scores.
"""

import unicodedata

__all__ = ["nfc", "ws_tokens", "norm_tokens"]


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def ws_tokens(text: str) -> list[str]:
    """Whitespace tokens of the NFC-normalized text."""
    return nfc(text).split()


def _strip_punct(token: str) -> str:
    return "".join(c for c in token if not unicodedata.category(c).startswith("P"))


def norm_tokens(text: str) -> list[str]:
    """Lowercased, punctuation-free tokens; empty tokens are dropped.

    Deterministic function of the input text.
    """
    out = []
    for tok in nfc(text).lower().split():
        tok = _strip_punct(tok)
        if tok:
            out.append(tok)
    return out
