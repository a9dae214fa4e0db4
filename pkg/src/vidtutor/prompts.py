"""Load and render the versioned prompt template.

Prompt wording lives in a template file, not in code, so it can be iterated
and audited without touching the pipeline. A template file is a sequence of
sections, each introduced by a ``[[section_name]]`` line; section bodies may
contain ``{{placeholder}}`` markers that are substituted at render time.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from .errors import PromptTemplateError

DEFAULT_TEMPLATE_RESOURCE = "feedback_v1.md"

# Sections every usable template must define. run1_* drive the concept
# extraction call; the rest are the ordered building blocks of the final
# feedback prompt (lecture-specific ones are omitted in the fast mode).
REQUIRED_SECTIONS = (
    "run1_system",
    "run1_user",
    "role",
    "rules",
    "chunk_format",
    "citation_examples",
    "student_context",
    "chunks",
)

_SECTION_RE = re.compile(r"^\[\[([a-z0-9_]+)\]\]\s*$")
_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")


class PromptTemplates:
    def __init__(self, sections: dict[str, str]):
        missing = [name for name in REQUIRED_SECTIONS if name not in sections]
        if missing:
            raise PromptTemplateError(f"template is missing sections: {', '.join(missing)}")
        self._sections = dict(sections)

    @classmethod
    def from_text(cls, text: str) -> "PromptTemplates":
        sections: dict[str, str] = {}
        current: str | None = None
        buffer: list[str] = []
        for line in text.splitlines():
            m = _SECTION_RE.match(line)
            if m:
                if current is not None:
                    sections[current] = "\n".join(buffer).strip()
                current = m.group(1)
                buffer = []
            elif current is not None:
                buffer.append(line)
        if current is not None:
            sections[current] = "\n".join(buffer).strip()
        return cls(sections)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "PromptTemplates":
        """Read a template file; with no path, the packaged default."""
        if path is not None:
            text = Path(path).read_text(encoding="utf-8")
        else:
            text = (
                resources.files("vidtutor")
                .joinpath("prompts", DEFAULT_TEMPLATE_RESOURCE)
                .read_text(encoding="utf-8")
            )
        return cls.from_text(text)

    def render(self, section: str, **values: str) -> str:
        body = self._sections.get(section)
        if body is None:
            raise PromptTemplateError(f"unknown template section {section!r}")

        def substitute(m: re.Match) -> str:
            name = m.group(1)
            if name not in values:
                raise PromptTemplateError(
                    f"section {section!r} references unknown placeholder {name!r}"
                )
            return values[name]

        return _PLACEHOLDER_RE.sub(substitute, body)
