"""Service configuration: one flat JSON document.

String values may reference environment variables as ``${NAME}``; unset
variables interpolate to the empty string. Provider credentials follow the
conventional variables EMBED_API_URL / EMBED_API_KEY / EMBED_MODEL and
LLM_API_URL / LLM_API_KEY / LLM_MODEL, which apply whenever the
corresponding config field is absent.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .exercises import DEFAULT_RESULT_PATTERN, LanguageCommands

_ENV_RE = re.compile(r"\$\{(\w+)\}")

DEFAULT_PYTHON_COMMANDS = LanguageCommands(
    language="python",
    source_filename="solution.py",
    test_filename="test_solution.py",
    compile_cmd=("python3", "-m", "py_compile", "{{source_file}}"),
    test_cmd=("python3", "{{test_file}}"),
    result_pattern=DEFAULT_RESULT_PATTERN,
)


def _interpolate(value, env) -> object:
    if isinstance(value, str):
        return _ENV_RE.sub(lambda m: env.get(m.group(1), ""), value)
    if isinstance(value, list):
        return [_interpolate(v, env) for v in value]
    if isinstance(value, dict):
        return {k: _interpolate(v, env) for k, v in value.items()}
    return value


@dataclass
class ProviderConfig:
    provider: str = ""  # local | remote (embedding), remote | scripted (llm)
    api_url: str = ""
    api_key: str = ""
    model: str = ""
    dim: int = 256
    script_path: str = ""


@dataclass
class ServiceConfig:
    task_dir: str = ""
    video_dir: str = ""
    store_dir: str = ""
    usage_log: str = "usage.jsonl"
    static_dir: str = ""
    host: str = "127.0.0.1"
    port: int = 8000
    prompt_template: str = ""
    embedding: ProviderConfig = field(default_factory=ProviderConfig)
    llm: ProviderConfig = field(default_factory=ProviderConfig)
    compile_timeout_s: float = 10.0
    test_timeout_s: float = 10.0
    max_concurrent_evaluations: int = 4
    runners: dict[str, LanguageCommands] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if "python" not in self.runners:
            self.runners["python"] = DEFAULT_PYTHON_COMMANDS


def _provider_config(raw: dict, prefix: str, env) -> ProviderConfig:
    cfg = ProviderConfig(
        provider=raw.get("provider", ""),
        api_url=raw.get("api_url", env.get(f"{prefix}_API_URL", "")),
        api_key=raw.get("api_key", env.get(f"{prefix}_API_KEY", "")),
        model=raw.get("model", env.get(f"{prefix}_MODEL", "")),
        dim=int(raw.get("dim", 256)),
        script_path=raw.get("script_path", ""),
    )
    if not cfg.provider:
        if prefix == "EMBED":
            cfg.provider = "remote" if cfg.api_url else "local"
        else:
            cfg.provider = "scripted" if cfg.script_path else "remote"
    return cfg


def load_config(path: str | Path, env: dict | None = None) -> ServiceConfig:
    environ = env if env is not None else dict(os.environ)
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    raw = _interpolate(raw, environ)

    timeouts = raw.get("timeouts", {})
    limits = raw.get("limits", {})
    runners: dict[str, LanguageCommands] = {}
    for language, spec in raw.get("runners", {}).items():
        runners[language] = LanguageCommands(
            language=language,
            source_filename=spec["source_filename"],
            test_filename=spec["test_filename"],
            compile_cmd=tuple(spec["compile_cmd"]),
            test_cmd=tuple(spec["test_cmd"]),
            result_pattern=spec.get("result_pattern", DEFAULT_RESULT_PATTERN),
        )

    return ServiceConfig(
        task_dir=raw.get("task_dir", ""),
        video_dir=raw.get("video_dir", ""),
        store_dir=raw.get("store_dir", ""),
        usage_log=raw.get("usage_log", "usage.jsonl"),
        static_dir=raw.get("static_dir", ""),
        host=raw.get("host", "127.0.0.1"),
        port=int(raw.get("port", 8000)),
        prompt_template=raw.get("prompt_template", ""),
        embedding=_provider_config(raw.get("embedding", {}), "EMBED", environ),
        llm=_provider_config(raw.get("llm", {}), "LLM", environ),
        compile_timeout_s=float(timeouts.get("compile_s", 10.0)),
        test_timeout_s=float(timeouts.get("test_s", 10.0)),
        max_concurrent_evaluations=int(limits.get("max_concurrent_evaluations", 4)),
        runners=runners,
    )
