"""Minimal tokenizer shared by the classifier and the tag analytics.

Lowercase, split on whitespace and punctuation, with trailing "n't"
detached as its own token so negated contractions ("don't", "isn't")
surface a negation marker.
"""

from __future__ import annotations

import re

_WORD_RE = re.compile(r"[a-z0-9']+")
_NT_RE = re.compile(r"^([a-z]+)n't$")


def tokenize(text: str) -> list[str]:
    """Split lowercased text into word tokens.

    Contractions ending in "n't" yield the stem plus the token "n't";
    other apostrophes are kept inside the token ("o'clock").
    """
    tokens: list[str] = []
    for raw in _WORD_RE.findall(text.lower()):
        m = _NT_RE.match(raw)
        if m:
            tokens.append(m.group(1))
            tokens.append("n't")
        else:
            tokens.append(raw.strip("'"))
    return [t for t in tokens if t]
