"""Programming tasks and submission evaluation.

A task lives in its own directory:

    <task_id>/task.json        {"title": ..., "language": ..., "starter_code"?: ...}
    <task_id>/description.md   shown to the student and fed to the model
    <task_id>/tests/*          unit-test sources, concatenated in name order

Evaluating a submission compiles the code and, only if that succeeds, runs
the unit tests; both phases happen in a fresh temporary directory under a
wall-clock timeout, and their outputs are capped at 64 KiB. Two runner
implementations are provided: a scripted fake for tests and demos, and a
subprocess runner driven by per-language command templates. OS-level
sandboxing (namespaces, resource limits beyond the timeout) is a deployment
concern, not handled here.
"""

from __future__ import annotations

import re
import shutil
import subprocess
import tempfile
import uuid
from abc import ABC, abstractmethod
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import InvalidTaskDefinition, RunnerUnavailable

OUTPUT_CAP_BYTES = 64 * 1024
DEFAULT_TIMEOUT_S = 10.0

# Default test-summary shape: "<passed>/<total>" somewhere in the output.
DEFAULT_RESULT_PATTERN = r"(?P<passed>\d+)\s*/\s*(?P<total>\d+)"


@dataclass(frozen=True)
class Task:
    task_id: str
    title: str
    description_md: str
    programming_language: str
    unit_test_source: str
    starter_code: str | None = None

    def __post_init__(self) -> None:
        if not self.task_id or not self.description_md:
            raise ValueError("task_id and description_md must be non-empty")


@dataclass(frozen=True)
class CompileOutcome:
    success: bool
    output: str
    duration_ms: int


@dataclass(frozen=True)
class TestOutcome:
    passed: int
    total: int
    output: str
    duration_ms: int

    def __post_init__(self) -> None:
        if self.total < 1 or not 0 <= self.passed <= self.total:
            raise ValueError(f"bad test counts: {self.passed}/{self.total}")


@dataclass(frozen=True)
class Submission:
    submission_id: str
    task_id: str
    code: str
    received_at: datetime
    compile: CompileOutcome
    tests: TestOutcome | None  # populated only if compile.success


@dataclass(frozen=True)
class PhaseResult:
    """What a runner reports for one phase (compile or test)."""

    success: bool
    output: str
    duration_ms: int
    timed_out: bool = False
    passed: int | None = None
    total: int | None = None


class Runner(ABC):
    """Executes the two evaluation phases for some set of languages."""

    @abstractmethod
    def supports(self, language: str) -> bool:
        ...

    @abstractmethod
    def compile(self, workdir: Path, task: Task, code: str, timeout_s: float) -> PhaseResult:
        ...

    @abstractmethod
    def run_tests(self, workdir: Path, task: Task, code: str, timeout_s: float) -> PhaseResult:
        ...


@dataclass
class ScriptedPhase:
    """Canned behavior for one phase of the scripted runner."""

    success: bool = True
    output: str = ""
    duration_s: float = 0.01
    passed: int | None = None
    total: int | None = None


class ScriptedRunner(Runner):
    """Deterministic fake: no processes, no sleeping.

    A phase whose scripted duration exceeds the timeout is reported as timed
    out at exactly the timeout, mirroring what the subprocess runner would
    observe without actually waiting.
    """

    def __init__(
        self,
        compile_phase: ScriptedPhase | None = None,
        test_phase: ScriptedPhase | None = None,
        languages: tuple[str, ...] = ("python",),
    ):
        self.compile_phase = compile_phase or ScriptedPhase()
        self.test_phase = test_phase or ScriptedPhase(passed=1, total=1)
        self.languages = languages
        self.seen_workdirs: list[Path] = []

    def supports(self, language: str) -> bool:
        return language in self.languages

    def _result(self, phase: ScriptedPhase, timeout_s: float, is_test: bool) -> PhaseResult:
        if phase.duration_s > timeout_s:
            return PhaseResult(
                success=False,
                output=phase.output,
                duration_ms=int(timeout_s * 1000),
                timed_out=True,
            )
        return PhaseResult(
            success=phase.success,
            output=phase.output,
            duration_ms=int(phase.duration_s * 1000),
            passed=phase.passed if is_test else None,
            total=phase.total if is_test else None,
        )

    def compile(self, workdir: Path, task: Task, code: str, timeout_s: float) -> PhaseResult:
        self.seen_workdirs.append(workdir)
        return self._result(self.compile_phase, timeout_s, is_test=False)

    def run_tests(self, workdir: Path, task: Task, code: str, timeout_s: float) -> PhaseResult:
        return self._result(self.test_phase, timeout_s, is_test=True)


@dataclass(frozen=True)
class LanguageCommands:
    """Subprocess command templates for one language.

    Placeholders ``{{workdir}}``, ``{{source_file}}`` and ``{{test_file}}``
    are substituted into each argument. The test command's output is matched
    against ``result_pattern`` (named groups ``passed`` and ``total``, or
    ``passed`` and ``failed``); without a match, exit code 0 counts as 1/1
    and anything else as 0/1.
    """

    language: str
    source_filename: str
    test_filename: str
    compile_cmd: tuple[str, ...]
    test_cmd: tuple[str, ...]
    result_pattern: str = DEFAULT_RESULT_PATTERN


class SubprocessRunner(Runner):
    def __init__(self, commands: dict[str, LanguageCommands]):
        self._commands = commands

    def supports(self, language: str) -> bool:
        return language in self._commands

    def _render(self, cmd: tuple[str, ...], workdir: Path, spec: LanguageCommands) -> list[str]:
        mapping = {
            "{{workdir}}": str(workdir),
            "{{source_file}}": spec.source_filename,
            "{{test_file}}": spec.test_filename,
        }
        rendered = []
        for arg in cmd:
            for marker, value in mapping.items():
                arg = arg.replace(marker, value)
            rendered.append(arg)
        return rendered

    def _run(self, cmd: list[str], workdir: Path, timeout_s: float) -> tuple[PhaseResult, str]:
        start = datetime.now(timezone.utc)
        try:
            proc = subprocess.run(
                cmd,
                cwd=workdir,
                capture_output=True,
                text=True,
                errors="replace",
                timeout=timeout_s,
            )
        except subprocess.TimeoutExpired as exc:
            output = _merge_streams(exc.stdout, exc.stderr)
            return (
                PhaseResult(
                    success=False,
                    output=output,
                    duration_ms=int(timeout_s * 1000),
                    timed_out=True,
                ),
                output,
            )
        except OSError as exc:
            return (
                PhaseResult(success=False, output=f"failed to launch {cmd[0]!r}: {exc}", duration_ms=0),
                "",
            )
        duration_ms = int((datetime.now(timezone.utc) - start).total_seconds() * 1000)
        output = _merge_streams(proc.stdout, proc.stderr)
        return (
            PhaseResult(success=proc.returncode == 0, output=output, duration_ms=duration_ms),
            output,
        )

    def compile(self, workdir: Path, task: Task, code: str, timeout_s: float) -> PhaseResult:
        spec = self._commands[task.programming_language]
        (workdir / spec.source_filename).write_text(code, encoding="utf-8")
        (workdir / spec.test_filename).write_text(task.unit_test_source, encoding="utf-8")
        result, _ = self._run(self._render(spec.compile_cmd, workdir, spec), workdir, timeout_s)
        return result

    def run_tests(self, workdir: Path, task: Task, code: str, timeout_s: float) -> PhaseResult:
        spec = self._commands[task.programming_language]
        result, output = self._run(self._render(spec.test_cmd, workdir, spec), workdir, timeout_s)
        if result.timed_out:
            return result
        passed, total = _parse_test_counts(output, spec.result_pattern, result.success)
        return PhaseResult(
            success=result.success,
            output=result.output,
            duration_ms=result.duration_ms,
            passed=passed,
            total=total,
        )


def _merge_streams(stdout, stderr) -> str:
    parts = []
    for stream in (stdout, stderr):
        if stream is None:
            continue
        if isinstance(stream, bytes):
            stream = stream.decode("utf-8", errors="replace")
        if stream:
            parts.append(stream)
    return "".join(parts)


def _parse_test_counts(output: str, pattern: str, success: bool) -> tuple[int, int]:
    m = re.search(pattern, output)
    if m:
        groups = m.groupdict()
        raw_passed = groups.get("passed")
        if raw_passed is not None:
            passed = int(raw_passed)
            if groups.get("total") is not None:
                total = max(int(groups["total"]), 1)
                return min(passed, total), total
            if groups.get("failed") is not None:
                total = passed + int(groups["failed"])
                return passed, max(total, 1)
            return passed, max(passed, 1)
    return (1, 1) if success else (0, 1)


def _cap(output: str) -> str:
    encoded = output.encode("utf-8")
    if len(encoded) <= OUTPUT_CAP_BYTES:
        return output
    return encoded[:OUTPUT_CAP_BYTES].decode("utf-8", errors="ignore")


def evaluate(
    task: Task,
    code: str,
    runner: Runner,
    compile_timeout_s: float = DEFAULT_TIMEOUT_S,
    test_timeout_s: float = DEFAULT_TIMEOUT_S,
) -> Submission:
    """Compile, then (on success) test, in a fresh working directory.

    Raises:
        RunnerUnavailable: no runner for the task's language. A *failing*
            compile is not an error; it is a result.
    """
    if not runner.supports(task.programming_language):
        raise RunnerUnavailable(f"no runner for language {task.programming_language!r}")

    workdir = Path(tempfile.mkdtemp(prefix="vidtutor-eval-"))
    try:
        compile_result = runner.compile(workdir, task, code, compile_timeout_s)
        compile_outcome = CompileOutcome(
            success=compile_result.success and not compile_result.timed_out,
            output=_cap(_note_timeout(compile_result, compile_timeout_s)),
            duration_ms=compile_result.duration_ms,
        )

        tests: TestOutcome | None = None
        if compile_outcome.success:
            test_result = runner.run_tests(workdir, task, code, test_timeout_s)
            if test_result.timed_out:
                tests = TestOutcome(
                    passed=0,
                    total=1,
                    output=_cap(_note_timeout(test_result, test_timeout_s)),
                    duration_ms=test_result.duration_ms,
                )
            else:
                tests = TestOutcome(
                    passed=test_result.passed if test_result.passed is not None else 0,
                    total=test_result.total if test_result.total is not None else 1,
                    output=_cap(test_result.output),
                    duration_ms=test_result.duration_ms,
                )
    finally:
        shutil.rmtree(workdir, ignore_errors=True)

    return Submission(
        submission_id=uuid.uuid4().hex,
        task_id=task.task_id,
        code=code,
        received_at=datetime.now(timezone.utc),
        compile=compile_outcome,
        tests=tests,
    )


def _note_timeout(result: PhaseResult, timeout_s: float) -> str:
    if result.timed_out and "timeout" not in result.output.lower():
        suffix = f"\n[timeout after {timeout_s:g} s]" if result.output else f"[timeout after {timeout_s:g} s]"
        return result.output + suffix
    return result.output


def load_tasks(directory: str | Path) -> list[Task]:
    """Read every task subdirectory; returns tasks sorted by task_id.

    Raises:
        InvalidTaskDefinition: missing/invalid files or a duplicate task_id.
    """
    import json

    base = Path(directory)
    tasks: dict[str, Task] = {}
    if not base.is_dir():
        return []
    for entry in sorted(base.iterdir()):
        if not entry.is_dir():
            continue
        meta_path = entry / "task.json"
        description_path = entry / "description.md"
        tests_dir = entry / "tests"
        if not meta_path.is_file():
            raise InvalidTaskDefinition(f"{entry.name}: missing task.json")
        if not description_path.is_file():
            raise InvalidTaskDefinition(f"{entry.name}: missing description.md")
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            title = meta["title"]
            language = meta["language"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise InvalidTaskDefinition(f"{entry.name}: bad task.json: {exc}") from exc
        # task.json may override the id; the directory name is the default.
        task_id = meta.get("task_id", entry.name)

        test_files = sorted(tests_dir.glob("*")) if tests_dir.is_dir() else []
        test_files = [p for p in test_files if p.is_file()]
        if not test_files:
            raise InvalidTaskDefinition(f"{task_id}: no test files under tests/")
        unit_test_source = "\n".join(p.read_text(encoding="utf-8") for p in test_files)

        if task_id in tasks:
            raise InvalidTaskDefinition(f"duplicate task_id {task_id!r}")
        tasks[task_id] = Task(
            task_id=task_id,
            title=title,
            description_md=description_path.read_text(encoding="utf-8"),
            programming_language=language,
            unit_test_source=unit_test_source,
            starter_code=meta.get("starter_code"),
        )
    return [tasks[k] for k in sorted(tasks)]
