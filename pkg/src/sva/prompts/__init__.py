"""Prompt templates, rendering, personalization, and parsing of model replies.

Templates live as versioned text files under templates/ with <Placeholder>
markers; templates/manifest.json maps template kind to file and carries the
few-shot example strings. Rendering binds every input placeholder or fails;
nothing placeholder-shaped may survive into a rendered prompt.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources

from sva.errors import (
    EmptyDescriptionError,
    EmptyExamplesError,
    EmptyFieldError,
    EmptyKeywordsError,
    EmptyUserInputError,
    MissingKeyError,
    NoJsonFoundError,
    NoKeywordsError,
    UnboundPlaceholderError,
    WrongSfxCountError,
)

TEMPLATE_KINDS = (
    "content-understanding",
    "scheme-generation",
    "keyword-extraction",
    "example-generation",
)

# The stock idea-style wording that personalization swaps for user keywords.
IDEA_STYLE_PHRASE = "creative, wild and imaginative, blue-sky thinking and out of this world"

FORBIDDEN_KEYWORD_TERMS = ("sfx", "bgm", "short video")
MAX_KEYWORDS = 8

_PLACEHOLDER_RE = re.compile(r"<(Description|Examples|User Input|Key Words|Scheme)>")


@dataclass(frozen=True)
class PromptTemplate:
    """A template body with named placeholders plus its few-shot examples."""

    kind: str
    body: str
    examples: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in TEMPLATE_KINDS:
            raise ValueError(f"unknown template kind {self.kind!r}")


@dataclass(frozen=True)
class Scheme:
    """One audio plan: an idea label, exactly two SFX descriptions, one BGM description."""

    idea: str
    sfx: tuple[str, str]
    bgm: str

    def __post_init__(self):
        if len(self.sfx) != 2:
            raise ValueError("a scheme carries exactly 2 SFX descriptions")
        if not self.idea.strip() or not self.bgm.strip() or not all(s.strip() for s in self.sfx):
            raise ValueError("scheme fields must be non-empty")


@dataclass(frozen=True)
class Personalization:
    """User requirement plus what the model extracted from it."""

    user_input: str
    keywords: tuple[str, ...]
    examples: tuple[str, ...]


@lru_cache(maxsize=None)
def _manifest() -> dict:
    root = resources.files("sva.prompts") / "templates"
    return json.loads((root / "manifest.json").read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def load_template(kind: str) -> PromptTemplate:
    entry = _manifest().get(kind)
    if entry is None:
        raise ValueError(f"unknown template kind {kind!r}")
    root = resources.files("sva.prompts") / "templates"
    body = (root / entry["file"]).read_text(encoding="utf-8")
    examples = tuple(entry.get("examples", ()))
    if kind == "scheme-generation" and len(examples) < 2:
        raise ValueError("the stock scheme-generation template needs >= 2 few-shot examples")
    return PromptTemplate(kind=kind, body=body, examples=examples)


def _serialize_examples(examples: tuple[str, ...]) -> str:
    return "\n".join(f"- {ex};" for ex in examples)


def _render(body: str, bindings: dict[str, str]) -> str:
    rendered = body
    for name, value in bindings.items():
        token = f"<{name}>"
        if token not in rendered:
            raise UnboundPlaceholderError(f"template has no {token} placeholder")
        rendered = rendered.replace(token, value)
    leftover = _PLACEHOLDER_RE.search(rendered)
    if leftover:
        raise UnboundPlaceholderError(f"placeholder {leftover.group(0)} left unbound")
    return rendered


def render_description_prompt(template: PromptTemplate | None = None) -> str:
    """The verbatim content-understanding prompt; carries no placeholders."""
    template = template or load_template("content-understanding")
    return _render(template.body, {})


def render_scheme_prompt(description: str, template: PromptTemplate | None = None) -> str:
    """Bind the video description and the few-shot examples into the scheme prompt."""
    if not description.strip():
        raise EmptyDescriptionError("description must be non-empty")
    template = template or load_template("scheme-generation")
    if template.kind != "scheme-generation":
        raise ValueError(f"need a scheme-generation template, got {template.kind!r}")
    return _render(template.body, {
        "Description": description.strip(),
        "Examples": _serialize_examples(template.examples),
    })


def render_keyword_prompt(user_input: str) -> str:
    if not user_input.strip():
        raise EmptyUserInputError("user input must be non-empty")
    template = load_template("keyword-extraction")
    return _render(template.body, {"User Input": user_input.strip()})


def render_examples_prompt(user_input: str) -> str:
    if not user_input.strip():
        raise EmptyUserInputError("user input must be non-empty")
    template = load_template("example-generation")
    return _render(template.body, {
        "User Input": user_input.strip(),
        "Examples": _serialize_examples(template.examples),
    })


def personalize_template(base: PromptTemplate, p: Personalization) -> PromptTemplate:
    """Swap the stock idea-style phrase for the user's keywords and replace the examples."""
    if base.kind != "scheme-generation":
        raise ValueError(f"can only personalize scheme-generation templates, got {base.kind!r}")
    if not p.keywords:
        raise EmptyKeywordsError("personalization needs at least one keyword")
    if not p.examples:
        raise EmptyExamplesError("personalization needs at least one substitute example")
    joined = ", ".join(p.keywords[:MAX_KEYWORDS])
    pattern = re.compile(re.escape(IDEA_STYLE_PHRASE), re.IGNORECASE)
    if not pattern.search(base.body):
        raise UnboundPlaceholderError("template body has no idea-style phrase to personalize")
    body = pattern.sub(lambda _: joined, base.body)
    return replace(base, body=body, examples=tuple(p.examples))


# --- reply parsing -----------------------------------------------------------

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*")


def _strip_noise(text: str) -> str:
    return _FENCE_RE.sub("", text)


def _sanitize_field(value: str) -> str:
    cleaned = value.replace("```", "").replace("{", "").replace("}", "")
    return cleaned.strip().strip(";,").strip()


def _balanced_objects(text: str) -> list[str]:
    """All top-level {...} regions, brace-matched outside of string literals."""
    objects = []
    depth = 0
    start = None
    in_string = False
    escaped = False
    for i, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0:
                objects.append(text[start:i + 1])
    return objects


def _scan_loose_pairs(region: str) -> dict[str, list[str]]:
    """Tolerant key/value scan for almost-JSON objects.

    A string followed by ':' is a key; any other string attaches to the most
    recent key. This absorbs missing commas and bare list items (the shape of
    the stock template's second few-shot example).
    """
    tokens: list[tuple[str, bool]] = []  # (string value, is_key)
    i = 0
    n = len(region)
    while i < n:
        if region[i] == '"':
            j = i + 1
            buf = []
            while j < n:
                ch = region[j]
                if ch == "\\" and j + 1 < n:
                    buf.append(region[j + 1])
                    j += 2
                    continue
                if ch == '"':
                    break
                buf.append(ch)
                j += 1
            k = j + 1
            while k < n and region[k].isspace():
                k += 1
            tokens.append(("".join(buf), k < n and region[k] == ":"))
            i = j + 1
        else:
            i += 1

    pairs: dict[str, list[str]] = {}
    current = None
    for value, is_key in tokens:
        if is_key:
            current = value.strip().lower()
            pairs.setdefault(current, [])
        elif current is not None:
            pairs[current].append(value)
    return pairs


def _coerce_sfx(value) -> tuple[str, str]:
    if isinstance(value, str):
        items = [p for p in (s.strip() for s in value.split(",")) if p]
        if len(items) == 1:
            raise WrongSfxCountError(1)
    elif isinstance(value, list):
        items = [str(v).strip() for v in value if str(v).strip()]
    else:
        raise WrongSfxCountError(0)
    items = [_sanitize_field(v) for v in items if _sanitize_field(v)]
    if len(items) != 2:
        raise WrongSfxCountError(len(items))
    return (items[0], items[1])


def parse_scheme(raw: str) -> Scheme:
    """Extract the first balanced JSON-ish object from a model reply and validate it.

    Accepts clean JSON as well as the loose shape of the stock template's
    second example (missing commas, SFX as bare comma-separated strings).
    Keys match case-insensitively; field values are stripped of code-fence
    markers and braces.
    """
    text = _strip_noise(raw)
    regions = _balanced_objects(text)
    if not regions:
        raise NoJsonFoundError("no JSON object found in reply")
    region = regions[0]

    try:
        parsed = json.loads(region)
        fields = {str(k).strip().lower(): v for k, v in parsed.items()}
    except (json.JSONDecodeError, AttributeError):
        loose = _scan_loose_pairs(region)
        fields = {}
        for key, values in loose.items():
            fields[key] = values if len(values) > 1 else (values[0] if values else "")

    for required in ("idea", "sfx", "bgm"):
        if required not in fields:
            raise MissingKeyError(required.upper() if required != "idea" else "idea")

    idea = _sanitize_field(fields["idea"] if isinstance(fields["idea"], str)
                           else str(fields["idea"][0]) if fields["idea"] else "")
    if not idea:
        raise EmptyFieldError("idea is empty")

    sfx = _coerce_sfx(fields["sfx"])

    bgm_value = fields["bgm"]
    if isinstance(bgm_value, list):
        bgm_value = bgm_value[0] if bgm_value else ""
    bgm = _sanitize_field(str(bgm_value))
    if not bgm:
        raise EmptyFieldError("BGM is empty")

    return Scheme(idea=idea, sfx=sfx, bgm=bgm)


def serialize_scheme(scheme: Scheme) -> str:
    """The canonical wire form: keys idea / SFX (2-array) / BGM."""
    return json.dumps(
        {"idea": scheme.idea, "SFX": list(scheme.sfx), "BGM": scheme.bgm},
        ensure_ascii=False,
    )


def parse_keywords(raw: str) -> list[str]:
    """Split a keyword reply on commas/newlines, dropping empties and forbidden terms."""
    keywords = []
    for part in re.split(r"[,\n]", raw):
        part = part.strip().lstrip("-*").strip().strip(";.").strip()
        if not part:
            continue
        lowered = part.lower()
        if any(term in lowered for term in FORBIDDEN_KEYWORD_TERMS):
            continue
        keywords.append(part)
    if not keywords:
        raise NoKeywordsError("no usable keywords in reply")
    return keywords


def extract_example_objects(raw: str) -> tuple[str, ...]:
    """All parseable scheme objects in a reply, kept as raw text for re-embedding."""
    found = []
    for region in _balanced_objects(_strip_noise(raw)):
        try:
            parse_scheme(region)
        except Exception:
            continue
        found.append(region)
    return tuple(found)
