"""Class prompts and seeded random-sentence generation.

Three templates:

  plain         "a photo of a <class>"
  waffle_words  "a photo of a <class>, which has <noise>"   (noise = one word)
  waffle_chars  "a photo of a <class>, <noise>"             (noise = random chars)

For waffle_chars the noise has exactly as many characters as the class name,
drawn uniformly from a fixed alphabet (ASCII letters, digits, and a small set
of punctuation). Word mode needs a caller-supplied wordlist; none is bundled.
All randomness flows through per-class splitmix64 substreams, so a prompt set
is a pure function of (class_names, template, k, seed, wordlist).
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from .errors import (
    DuplicateClassNames,
    EmptyClassName,
    MissingWordlist,
    TooFewClasses,
    ZeroK,
)
from .rng import RngStream, class_stream

NOISE_ALPHABET = string.ascii_letters + string.digits + "!#$%&*+?@"

PLAIN = "plain"
WAFFLE_WORDS = "waffle_words"
WAFFLE_CHARS = "waffle_chars"


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    pattern: str


TEMPLATES = {
    PLAIN: PromptTemplate(PLAIN, "a photo of a {cls}"),
    WAFFLE_WORDS: PromptTemplate(WAFFLE_WORDS, "a photo of a {cls}, which has {noise}"),
    WAFFLE_CHARS: PromptTemplate(WAFFLE_CHARS, "a photo of a {cls}, {noise}"),
}


def get_template(template_id: str) -> PromptTemplate:
    try:
        return TEMPLATES[template_id]
    except KeyError:
        raise ValueError(f"unknown template id {template_id!r}") from None


@dataclass(frozen=True)
class PromptSet:
    """Originals plus k random sentences per class, class-major order."""

    class_names: tuple[str, ...]
    template: PromptTemplate
    k: int
    seed: int
    originals: tuple[str, ...]
    randoms: tuple[str, ...]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def randoms_for_class(self, class_index: int) -> tuple[str, ...]:
        start = class_index * self.k
        return self.randoms[start : start + self.k]


def make_original_prompt(class_name: str) -> str:
    name = class_name.strip()
    if not name:
        raise EmptyClassName("class name is empty after trimming")
    return f"a photo of a {name}"


def make_random_sentences(
    class_name: str,
    template: PromptTemplate,
    k: int,
    rng: RngStream,
    wordlist: Sequence[str] | None = None,
) -> list[str]:
    """Generate k noisy variants of a class prompt, consuming rng in place.

    Char mode draws len(class_name) characters per sentence; word mode draws
    one word per sentence.
    """
    if k < 1:
        raise ZeroK("k must be >= 1")
    name = class_name.strip()
    if not name:
        raise EmptyClassName("class name is empty after trimming")

    if template.id == PLAIN:
        return [make_original_prompt(name)] * k

    out = []
    if template.id == WAFFLE_CHARS:
        noise_len = len(name)
        for _ in range(k):
            noise = "".join(
                NOISE_ALPHABET[rng.next_below(len(NOISE_ALPHABET))] for _ in range(noise_len)
            )
            out.append(template.pattern.format(cls=name, noise=noise))
    elif template.id == WAFFLE_WORDS:
        if not wordlist:
            raise MissingWordlist("waffle_words needs a non-empty wordlist")
        for _ in range(k):
            out.append(template.pattern.format(cls=name, noise=wordlist[rng.next_below(len(wordlist))]))
    else:
        raise ValueError(f"unknown template id {template.id!r}")
    return out


def build_prompt_set(
    class_names: Sequence[str],
    template: PromptTemplate,
    k: int,
    seed: int,
    wordlist: Sequence[str] | None = None,
) -> PromptSet:
    names = tuple(n.strip() for n in class_names)
    if len(names) < 2:
        raise TooFewClasses(f"need at least 2 classes, got {len(names)}")
    if len(set(names)) != len(names):
        raise DuplicateClassNames("class names must be distinct")
    if k < 1:
        raise ZeroK("k must be >= 1")

    originals = tuple(make_original_prompt(n) for n in names)
    randoms: list[str] = []
    for i, name in enumerate(names):
        randoms.extend(make_random_sentences(name, template, k, class_stream(seed, i), wordlist))
    return PromptSet(
        class_names=names,
        template=template,
        k=k,
        seed=seed,
        originals=originals,
        randoms=tuple(randoms),
    )


# -- JSONL serialization -------------------------------------------------------
# One record per sentence: {class_index, class_name, kind, sentence_index, text}.
# Originals come first (one per class), then randoms in class-major order.

def iter_records(ps: PromptSet) -> Iterator[dict]:
    for i, text in enumerate(ps.originals):
        yield {
            "class_index": i,
            "class_name": ps.class_names[i],
            "kind": "original",
            "sentence_index": 0,
            "text": text,
        }
    for i in range(ps.n_classes):
        for j, text in enumerate(ps.randoms_for_class(i)):
            yield {
                "class_index": i,
                "class_name": ps.class_names[i],
                "kind": "random",
                "sentence_index": j,
                "text": text,
            }


def prompt_set_bytes(ps: PromptSet) -> bytes:
    lines = [json.dumps(rec, ensure_ascii=False, sort_keys=True) for rec in iter_records(ps)]
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_prompt_jsonl(ps: PromptSet, path: str | Path) -> None:
    Path(path).write_bytes(prompt_set_bytes(ps))


@dataclass(frozen=True)
class PromptFile:
    """A prompt set read back from JSONL; seed and template are not encoded
    in the record schema, so only counts and texts are recoverable."""

    class_names: tuple[str, ...]
    originals: tuple[str, ...]
    randoms: tuple[str, ...]
    k: int

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


def read_prompt_jsonl(path: str | Path) -> PromptFile:
    by_class: dict[int, str] = {}
    originals: dict[int, str] = {}
    randoms: dict[tuple[int, int], str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        idx = int(rec["class_index"])
        by_class[idx] = rec["class_name"]
        if rec["kind"] == "original":
            originals[idx] = rec["text"]
        else:
            randoms[(idx, int(rec["sentence_index"]))] = rec["text"]

    n = len(by_class)
    if n == 0 or set(by_class) != set(range(n)):
        raise ValueError(f"prompt file {path} has non-contiguous class indices")
    k = len(randoms) // n if n else 0
    if len(randoms) != k * n or set(randoms) != {(i, j) for i in range(n) for j in range(k)}:
        raise ValueError(f"prompt file {path} is missing random-sentence records")
    return PromptFile(
        class_names=tuple(by_class[i] for i in range(n)),
        originals=tuple(originals[i] for i in range(n)),
        randoms=tuple(randoms[(i, j)] for i in range(n) for j in range(k)),
        k=k,
    )
