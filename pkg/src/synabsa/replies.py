"""Decode model replies of the form "Sentiment: ... Explanation: ...".

Markers are matched case-insensitively and tolerate surrounding whitespace;
leading chatter before the first "Sentiment:" is ignored, and everything
after "Explanation:" belongs to the explanation. Anything else is rejected
with a specific error so format violations can be counted, not guessed at.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

LABELS = ("negative", "neutral", "positive")

_SENTIMENT_MARKER = re.compile(r"sentiment\s*:", re.IGNORECASE)
_EXPLANATION_MARKER = re.compile(r"explanation\s*:", re.IGNORECASE)


class ReplyFormatError(Exception):
    """Base class for reply parsing failures."""


class MissingSentimentMarker(ReplyFormatError):
    pass


class MissingExplanationMarker(ReplyFormatError):
    pass


class MarkerOrderViolation(ReplyFormatError):
    """An Explanation marker appears, but only before the Sentiment marker."""


class UnknownLabel(ReplyFormatError):
    """The sentiment is not one of negative/neutral/positive."""


class EmptyExplanation(ReplyFormatError):
    pass


@dataclass(frozen=True)
class ParsedReply:
    sentiment: str
    explanation: str


def render_reply(sentiment: str, explanation: str) -> str:
    """The inverse of parse_reply, used for fine-tuning targets and round-trips."""
    return f"Sentiment: {sentiment} Explanation: {explanation}"


def parse_reply(text: str) -> ParsedReply:
    """Extract (sentiment, explanation) from a raw model reply.

    The label may carry one trailing punctuation mark; it is lowercased and
    must be one of the three classes.
    """
    sent = _SENTIMENT_MARKER.search(text)
    if sent is None:
        raise MissingSentimentMarker("no 'Sentiment:' marker in reply")
    expl = _EXPLANATION_MARKER.search(text, sent.end())
    if expl is None:
        if _EXPLANATION_MARKER.search(text, 0, sent.start()):
            raise MarkerOrderViolation("'Explanation:' precedes 'Sentiment:'")
        raise MissingExplanationMarker("no 'Explanation:' marker after the sentiment")
    label = text[sent.end() : expl.start()].strip().rstrip(".,;!").strip().lower()
    if label not in LABELS:
        raise UnknownLabel(f"sentiment {label!r} is not one of {LABELS}")
    explanation = text[expl.end() :].strip()
    if not explanation:
        raise EmptyExplanation("explanation text is empty")
    return ParsedReply(sentiment=label, explanation=explanation)
