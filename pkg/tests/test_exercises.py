import json

import pytest

from conftest import make_task_dir
from vidtutor.errors import InvalidTaskDefinition, RunnerUnavailable
from vidtutor.exercises import (
    DEFAULT_RESULT_PATTERN,
    LanguageCommands,
    OUTPUT_CAP_BYTES,
    ScriptedPhase,
    ScriptedRunner,
    SubprocessRunner,
    Task,
    evaluate,
    load_tasks,
)

TASK = Task(
    task_id="sum01",
    title="Sum of numbers",
    description_md="Write `total(ns)` returning the sum of a list.",
    programming_language="python",
    unit_test_source="from solution import total\nprint('1/1' if total([1,2]) == 3 else '0/1')\n",
)


class TestLoadTasks:
    def test_loads_and_sorts(self, tmp_path):
        make_task_dir(tmp_path, "b-task", title="B")
        make_task_dir(tmp_path, "a-task", title="A")
        tasks = load_tasks(tmp_path)
        assert [t.task_id for t in tasks] == ["a-task", "b-task"]
        assert tasks[0].title == "A"
        assert "total" in tasks[0].unit_test_source
        assert tasks[0].description_md

    def test_duplicate_task_id_rejected(self, tmp_path):
        make_task_dir(tmp_path, "dir-one", meta_extra={"task_id": "same"})
        make_task_dir(tmp_path, "dir-two", meta_extra={"task_id": "same"})
        with pytest.raises(InvalidTaskDefinition):
            load_tasks(tmp_path)

    def test_empty_directory(self, tmp_path):
        assert load_tasks(tmp_path) == []

    def test_missing_metadata_rejected(self, tmp_path):
        task_dir = make_task_dir(tmp_path, "broken")
        (task_dir / "task.json").write_text(json.dumps({"title": "no language"}))
        with pytest.raises(InvalidTaskDefinition):
            load_tasks(tmp_path)

    def test_missing_tests_rejected(self, tmp_path):
        task_dir = make_task_dir(tmp_path, "no-tests")
        (task_dir / "tests" / "test_solution.py").unlink()
        with pytest.raises(InvalidTaskDefinition):
            load_tasks(tmp_path)

    def test_starter_code_optional(self, tmp_path):
        make_task_dir(tmp_path, "with-starter", starter_code="def total(ns):\n    ...\n")
        tasks = load_tasks(tmp_path)
        assert tasks[0].starter_code.startswith("def total")


class TestEvaluateWithScriptedRunner:
    def test_pass_through_counts(self):
        runner = ScriptedRunner(
            compile_phase=ScriptedPhase(success=True, output="ok"),
            test_phase=ScriptedPhase(success=False, output="2 failures", passed=3, total=5),
        )
        submission = evaluate(TASK, "code", runner)
        assert submission.compile.success is True
        assert submission.tests.passed == 3
        assert submission.tests.total == 5
        assert submission.task_id == "sum01"
        assert submission.submission_id

    def test_compile_failure_gates_tests(self):
        runner = ScriptedRunner(
            compile_phase=ScriptedPhase(success=False, output="error: missing ;")
        )
        submission = evaluate(TASK, "code", runner)
        assert submission.compile.success is False
        assert submission.tests is None
        assert "missing ;" in submission.compile.output

    def test_timeout_reported_without_sleeping(self):
        runner = ScriptedRunner(compile_phase=ScriptedPhase(duration_s=20.0))
        submission = evaluate(TASK, "code", runner, compile_timeout_s=10.0)
        assert submission.compile.success is False
        assert "timeout" in submission.compile.output.lower()
        assert submission.tests is None
        assert submission.compile.duration_ms == 10_000

    def test_output_capped_at_64k(self):
        runner = ScriptedRunner(
            compile_phase=ScriptedPhase(success=True, output="x" * (OUTPUT_CAP_BYTES * 2)),
            test_phase=ScriptedPhase(passed=1, total=1, output="y" * (OUTPUT_CAP_BYTES * 2)),
        )
        submission = evaluate(TASK, "code", runner)
        assert len(submission.compile.output.encode()) <= OUTPUT_CAP_BYTES
        assert len(submission.tests.output.encode()) <= OUTPUT_CAP_BYTES

    def test_unknown_language_is_runner_unavailable(self):
        runner = ScriptedRunner(languages=("haskell",))
        with pytest.raises(RunnerUnavailable):
            evaluate(TASK, "code", runner)

    def test_fresh_workdir_per_evaluation(self):
        runner = ScriptedRunner()
        evaluate(TASK, "code", runner)
        evaluate(TASK, "code", runner)
        assert len(set(runner.seen_workdirs)) == 2


PYTHON_COMMANDS = LanguageCommands(
    language="python",
    source_filename="solution.py",
    test_filename="test_solution.py",
    compile_cmd=("python3", "-m", "py_compile", "{{source_file}}"),
    test_cmd=("python3", "{{test_file}}"),
    result_pattern=DEFAULT_RESULT_PATTERN,
)


class TestSubprocessRunner:
    def _runner(self) -> SubprocessRunner:
        return SubprocessRunner({"python": PYTHON_COMMANDS})

    def test_full_pass(self):
        submission = evaluate(TASK, "def total(ns):\n    return sum(ns)\n", self._runner())
        assert submission.compile.success is True
        assert submission.tests.passed == 1
        assert submission.tests.total == 1

    def test_failing_tests_parsed(self):
        submission = evaluate(TASK, "def total(ns):\n    return 0\n", self._runner())
        assert submission.compile.success is True
        assert submission.tests.passed == 0
        assert submission.tests.total == 1

    def test_syntax_error_fails_compile(self):
        submission = evaluate(TASK, "def total(ns:\n", self._runner())
        assert submission.compile.success is False
        assert submission.tests is None
        assert "SyntaxError" in submission.compile.output

    def test_timeout_enforced(self):
        code = "import time\ntime.sleep(5)\ndef total(ns):\n    return sum(ns)\n"
        task = Task(
            task_id="slow",
            title="slow",
            description_md="d",
            programming_language="python",
            unit_test_source="import solution\nprint('1/1')\n",
        )
        submission = evaluate(task, code, self._runner(), compile_timeout_s=10.0, test_timeout_s=0.5)
        # compile (py_compile) does not execute the sleep; the test run does
        assert submission.compile.success is True
        assert submission.tests.passed == 0
        assert "timeout" in submission.tests.output.lower()

    def test_supports(self):
        assert self._runner().supports("python") is True
        assert self._runner().supports("cobol") is False


class TestResultPatternParsing:
    def test_passed_failed_style(self):
        from vidtutor.exercises import _parse_test_counts

        pattern = r"(?P<passed>\d+) passed(?:, (?P<failed>\d+) failed)?"
        assert _parse_test_counts("3 passed, 2 failed", pattern, success=False) == (3, 5)
        assert _parse_test_counts("4 passed", pattern, success=True) == (4, 4)

    def test_no_match_falls_back_to_exit_code(self):
        from vidtutor.exercises import _parse_test_counts

        assert _parse_test_counts("odd output", DEFAULT_RESULT_PATTERN, success=True) == (1, 1)
        assert _parse_test_counts("odd output", DEFAULT_RESULT_PATTERN, success=False) == (0, 1)
