"""Prompt assembly for the chat gateway.

Templates live as plain-text assets under ``templates/``; the builders
interpolate sample fields into them and produce role-tagged message
sequences. Placeholders are replaced in a single pass, so payload text is
inserted verbatim and never rescanned.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from ..corpus import Sample

TEMPLATE_EXPLAIN_GEN = "explain-gen"
TEMPLATE_BASELINE = "baseline"
TEMPLATE_SYNTAX = "syntax"
TEMPLATE_JUDGE = "judge"

PART_TEXT = "text"
PART_IMAGE = "image"

_PLACEHOLDER = re.compile(r"<(text|aspect|sentiment|syntax info|candidates)>")

MAX_JUDGE_CANDIDATES = 9


class PromptError(Exception):
    pass


class MissingGoldLabel(PromptError):
    """The sample has no gold sentiment to condition on."""


class MissingImage(PromptError):
    """The sample has no image reference."""


class TooFewCandidates(PromptError):
    """Judging needs at least two candidate explanations."""


@dataclass(frozen=True)
class MessagePart:
    kind: str  # PART_TEXT or PART_IMAGE
    content: str


@dataclass(frozen=True)
class Message:
    role: str  # system | user | assistant
    parts: tuple[MessagePart, ...]

    def text(self) -> str:
        """Text content with image slots elided."""
        return "".join(p.content for p in self.parts if p.kind == PART_TEXT)


@dataclass(frozen=True)
class MessageSequence:
    messages: tuple[Message, ...]
    template_id: str

    def image_paths(self) -> list[str]:
        return [
            p.content
            for m in self.messages
            for p in m.parts
            if p.kind == PART_IMAGE
        ]


def load_template(name: str) -> str:
    """Read a template asset, without its trailing newline."""
    text = resources.files(__package__).joinpath("templates", name).read_text(encoding="utf-8")
    return text.rstrip("\n")


def _fill(template: str, values: dict[str, str]) -> str:
    def sub(match: re.Match) -> str:
        return values[match.group(1)]

    return _PLACEHOLDER.sub(sub, template)


def _user_message(template: str, image_ref: str, values: dict[str, str]) -> Message:
    """Split the user template at <image> and interpolate the text segments."""
    before, _, after = template.partition("<image>")
    parts = [
        MessagePart(PART_TEXT, _fill(before, values)),
        MessagePart(PART_IMAGE, image_ref),
        MessagePart(PART_TEXT, _fill(after, values)),
    ]
    return Message(role="user", parts=tuple(parts))


def build_explain_gen_prompt(sample: "Sample") -> MessageSequence:
    """Prompt that asks for an explanation of the gold sentiment."""
    if not sample.gold_sentiment:
        raise MissingGoldLabel(f"sample {sample.id} has no gold sentiment")
    if not sample.image_ref:
        raise MissingImage(f"sample {sample.id} has no image reference")
    system = Message(role="system", parts=(MessagePart(PART_TEXT, load_template("explain_gen.system.txt")),))
    user = _user_message(
        load_template("explain_gen.user.txt"),
        sample.image_ref,
        {"text": sample.text, "aspect": sample.aspect, "sentiment": sample.gold_sentiment},
    )
    return MessageSequence(messages=(system, user), template_id=TEMPLATE_EXPLAIN_GEN)


def build_inference_prompt(sample: "Sample", deptext=None) -> MessageSequence:
    """Sentiment+explanation prompt; with deptext the syntax variant is used."""
    if not sample.image_ref:
        raise MissingImage(f"sample {sample.id} has no image reference")
    system = Message(role="system", parts=(MessagePart(PART_TEXT, load_template("inference.system.txt")),))
    if deptext is None:
        user = _user_message(
            load_template("inference_baseline.user.txt"),
            sample.image_ref,
            {"text": sample.text, "aspect": sample.aspect},
        )
        template_id = TEMPLATE_BASELINE
    else:
        body = deptext if isinstance(deptext, str) else deptext.body
        user = _user_message(
            load_template("inference_syntax.user.txt"),
            sample.image_ref,
            {"text": sample.text, "aspect": sample.aspect, "syntax info": body},
        )
        template_id = TEMPLATE_SYNTAX
    return MessageSequence(messages=(system, user), template_id=template_id)


def build_judge_prompt(sample: "Sample", candidates: list[str]) -> MessageSequence:
    """Prompt that asks for the number of the best candidate explanation.

    Candidates must already be shuffled by the caller (with the permutation
    recorded) so position bias can be audited downstream.
    """
    if len(candidates) < 2:
        raise TooFewCandidates(f"need at least 2 candidates, got {len(candidates)}")
    if len(candidates) > MAX_JUDGE_CANDIDATES:
        raise PromptError(f"at most {MAX_JUDGE_CANDIDATES} candidates supported, got {len(candidates)}")
    if not sample.image_ref:
        raise MissingImage(f"sample {sample.id} has no image reference")
    numbered = "\n".join(f"{i}. {cand}" for i, cand in enumerate(candidates, start=1))
    system = Message(role="system", parts=(MessagePart(PART_TEXT, load_template("judge.system.txt")),))
    user = _user_message(
        load_template("judge.user.txt"),
        sample.image_ref,
        {"text": sample.text, "aspect": sample.aspect, "candidates": numbered},
    )
    return MessageSequence(messages=(system, user), template_id=TEMPLATE_JUDGE)


def sequence_to_wire(sequence: MessageSequence) -> list[dict]:
    """Serialize to the gateway/export wire layout.

    Text-only messages collapse to a plain string content; messages with an
    image become a list of typed content parts.
    """
    wire = []
    for message in sequence.messages:
        if all(p.kind == PART_TEXT for p in message.parts):
            wire.append({"role": message.role, "content": message.text()})
        else:
            content = []
            for part in message.parts:
                if part.kind == PART_TEXT:
                    if part.content:
                        content.append({"type": "text", "text": part.content})
                else:
                    content.append({"type": "image", "path": part.content})
            wire.append({"role": message.role, "content": content})
    return wire
