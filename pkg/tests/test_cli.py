import json

from vidtutor.cli import main
from vidtutor.config import DEFAULT_PYTHON_COMMANDS, load_config
from vidtutor.store import VectorStore


def write_srt(path, n_chars: int = 1000) -> None:
    text = "a" * n_chars
    path.write_text(f"1\n00:00:01,000 --> 00:00:09,000\n{text}\n", encoding="utf-8")


class TestIndexCommand:
    def test_index_prints_chunk_count(self, tmp_path, capsys):
        srt = tmp_path / "lecture.srt"
        write_srt(srt, 1000)
        code = main(
            ["index", "--srt", str(srt), "--video", "lecture_01.mp4", "--store", str(tmp_path / "store")]
        )
        assert code == 0
        assert capsys.readouterr().out.strip() == "3 chunks indexed"
        store = VectorStore.load(tmp_path / "store")
        assert len(store) == 3
        assert store.embedder_id == "local-hash-v1"

    def test_reindex_duplicate_fails_without_replace(self, tmp_path, capsys):
        srt = tmp_path / "lecture.srt"
        write_srt(srt)
        args = ["index", "--srt", str(srt), "--video", "v.mp4", "--store", str(tmp_path / "store")]
        assert main(args) == 0
        assert main(args) == 1
        assert "chunk_id" in capsys.readouterr().err

    def test_replace_flag_reindexes(self, tmp_path, capsys):
        srt = tmp_path / "lecture.srt"
        write_srt(srt)
        args = ["index", "--srt", str(srt), "--video", "v.mp4", "--store", str(tmp_path / "store")]
        assert main(args) == 0
        assert main(args + ["--replace"]) == 0
        assert VectorStore.load(tmp_path / "store").manifest.record_count == 3

    def test_replace_keeps_other_videos(self, tmp_path):
        srt = tmp_path / "lecture.srt"
        write_srt(srt, 400)
        store = str(tmp_path / "store")
        assert main(["index", "--srt", str(srt), "--video", "a.mp4", "--store", store]) == 0
        assert main(["index", "--srt", str(srt), "--video", "b.mp4", "--store", store]) == 0
        assert main(["index", "--srt", str(srt), "--video", "a.mp4", "--store", store, "--replace"]) == 0
        loaded = VectorStore.load(store)
        assert sorted({r.video_file for r in loaded.records}) == ["a.mp4", "b.mp4"]

    def test_missing_file_nonzero_exit(self, tmp_path, capsys):
        code = main(
            ["index", "--srt", str(tmp_path / "nope.srt"), "--video", "v", "--store", str(tmp_path / "s")]
        )
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestSearchCommand:
    def test_search_empty_store_exits_zero(self, tmp_path, capsys):
        store = VectorStore("local-hash-v1", dim=256)
        store.save(tmp_path / "store")
        code = main(["search", "--store", str(tmp_path / "store"), "--query", "loops", "--k", "3"])
        assert code == 0
        assert capsys.readouterr().out == ""

    def test_search_output_format(self, tmp_path, capsys):
        srt = tmp_path / "lecture.srt"
        srt.write_text(
            "1\n00:14:32,000 --> 00:14:40,000\nrecursion explained with a base case\n",
            encoding="utf-8",
        )
        main(["index", "--srt", str(srt), "--video", "lec.mp4", "--store", str(tmp_path / "store")])
        capsys.readouterr()
        code = main(["search", "--store", str(tmp_path / "store"), "--query", "recursion", "--k", "2"])
        assert code == 0
        line = capsys.readouterr().out.strip()
        chunk_id, score, display, prefix = line.split("\t")
        assert chunk_id == "lec.mp4#0000"
        float(score)
        assert len(score.split(".")[1]) == 6
        assert display == "00:14:32"
        assert prefix.startswith("recursion explained")


class TestStatsCommand:
    def test_stats_prints_json(self, tmp_path, capsys):
        log = tmp_path / "usage.jsonl"
        from datetime import datetime, timezone

        from vidtutor.usage import UsageEvent, UsageLog

        ulog = UsageLog(log)
        ulog.append(UsageEvent.submission("t1", at=datetime(2026, 1, 1, tzinfo=timezone.utc)))
        assert main(["stats", "--log", str(log)]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["submissions"] == 1
        assert body["feedback_total"] == 0


class TestConfig:
    def test_env_interpolation_and_defaults(self, tmp_path, monkeypatch):
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps(
                {
                    "task_dir": "tasks",
                    "video_dir": "videos",
                    "store_dir": "store",
                    "usage_log": "usage.jsonl",
                    "embedding": {"provider": "local", "dim": 128},
                    "llm": {"api_url": "${LLM_API_URL}", "api_key": "${LLM_API_KEY}", "model": "gpt-x"},
                    "timeouts": {"compile_s": 5, "test_s": 7},
                    "limits": {"max_concurrent_evaluations": 2},
                }
            )
        )
        env = {"LLM_API_URL": "https://llm.example/v1", "LLM_API_KEY": "sk-123"}
        config = load_config(config_path, env=env)
        assert config.embedding.provider == "local"
        assert config.embedding.dim == 128
        assert config.llm.api_url == "https://llm.example/v1"
        assert config.llm.api_key == "sk-123"
        assert config.llm.provider == "remote"
        assert config.compile_timeout_s == 5
        assert config.test_timeout_s == 7
        assert config.max_concurrent_evaluations == 2
        assert config.runners["python"] == DEFAULT_PYTHON_COMMANDS

    def test_env_fallback_without_config_fields(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"llm": {}, "embedding": {}}))
        env = {
            "LLM_API_URL": "https://llm/v1",
            "LLM_MODEL": "m1",
            "EMBED_API_URL": "https://emb/v1",
            "EMBED_MODEL": "e1",
        }
        config = load_config(config_path, env=env)
        assert config.llm.api_url == "https://llm/v1"
        assert config.llm.model == "m1"
        assert config.embedding.provider == "remote"
        assert config.embedding.api_url == "https://emb/v1"

    def test_scripted_llm_provider_inferred(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"llm": {"script_path": "script.json"}}))
        config = load_config(config_path, env={})
        assert config.llm.provider == "scripted"

    def test_unset_env_interpolates_to_empty(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"llm": {"api_key": "${MISSING_VAR}"}}))
        config = load_config(config_path, env={})
        assert config.llm.api_key == ""


class TestServeWiring:
    def test_app_builds_from_config(self, tmp_path, monkeypatch):
        from conftest import make_task_dir
        from fastapi.testclient import TestClient

        from vidtutor.service import create_app_from_config

        tasks_dir = tmp_path / "tasks"
        tasks_dir.mkdir()
        make_task_dir(tasks_dir, "sum01")
        (tmp_path / "videos").mkdir()
        script = tmp_path / "script.json"
        script.write_text(json.dumps([{"text": "scripted feedback"}]))
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps(
                {
                    "task_dir": str(tasks_dir),
                    "video_dir": str(tmp_path / "videos"),
                    "usage_log": str(tmp_path / "usage.jsonl"),
                    "embedding": {"provider": "local", "dim": 256},
                    "llm": {"provider": "scripted", "script_path": str(script)},
                }
            )
        )
        app = create_app_from_config(load_config(config_path, env={}))
        client = TestClient(app)
        assert client.get("/api/tasks").json()[0]["task_id"] == "sum01"
        assert client.get("/api/stats").json()["submissions"] == 0
