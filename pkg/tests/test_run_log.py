import json

from run_log.run import RunLogger


def _settings(tmp_path, run_dir="runs", results_log="runs/results.jsonl"):
    return {"logging": {
        "run_dir": str(tmp_path / run_dir) if run_dir else "",
        "results_log": str(tmp_path / results_log) if results_log else "",
    }}


def _events(path):
    with open(path) as f:
        return [json.loads(line) for line in f]


def test_run_events_written(tmp_path):
    logger = RunLogger(_settings(tmp_path))
    run_id = logger.start_run("geometry", "g_mhz = 3.4\n", seed=7)
    assert logger.path.endswith(f"{run_id}_geometry.jsonl")
    logger.log_result(rows=1, columns=["fsr[GHz]"], scalars={"fsr_ghz": 651.7})
    path = logger.path
    logger.end_run(0)

    events = _events(path)
    assert [e["event"] for e in events] == ["run_start", "result", "run_end"]
    assert events[0]["seed"] == 7
    assert events[0]["config"] == "g_mhz = 3.4\n"
    assert events[1]["fsr_ghz"] == 651.7
    assert events[2]["exit_code"] == 0
    assert {e["run_id"] for e in events} == {run_id}
    assert logger.path is None


def test_summary_appended_per_run(tmp_path):
    logger = RunLogger(_settings(tmp_path))
    logger.start_run("rates")
    logger.log_result(1, ["cooperativity"], {"cooperativity": 0.018})
    logger.end_run(0)
    logger.start_run("fit-tau")
    logger.log_error("FitError", "did not converge", 3)
    logger.end_run(3)

    summaries = _events(tmp_path / "runs" / "results.jsonl")
    assert [s["command"] for s in summaries] == ["rates", "fit-tau"]
    assert summaries[0]["results"] == {"cooperativity": 0.018}
    assert summaries[1]["exit_code"] == 3
    assert all(s["type"] == "run_summary" for s in summaries)


def test_empty_run_dir_disables_event_files(tmp_path):
    logger = RunLogger(_settings(tmp_path, run_dir="", results_log=""))
    assert not logger.enabled
    logger.start_run("geometry")
    assert logger.path is None
    logger.log_result(1, ["fsr[GHz]"])
    logger.end_run(0)
    assert list(tmp_path.iterdir()) == []


def test_write_failures_are_swallowed(tmp_path):
    settings = _settings(tmp_path)
    # a directory where the summary file should be
    (tmp_path / "runs" / "results.jsonl").mkdir(parents=True)
    logger = RunLogger(settings)
    logger.start_run("geometry")
    logger.end_run(0)


def test_end_without_start_is_noop(tmp_path):
    RunLogger(_settings(tmp_path)).end_run(0)


def test_uncreatable_directories_are_tolerated(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    logger = RunLogger({"logging": {"run_dir": str(blocker / "runs"),
                                    "results_log": str(blocker / "results.jsonl")}})
    logger.start_run("geometry")
    logger.log_result(1, ["fsr[GHz]"])
    logger.end_run(0)
    assert blocker.read_text() == ""
