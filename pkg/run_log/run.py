import datetime
import json
import os
import threading
import uuid


class RunLogger:
    """Appends JSONL run records: one event file per command run plus a results summary log.

    Writing is best effort; a failed write never aborts a run. An empty run_dir disables
    the event files and an empty results_log disables the summary.
    """

    def __init__(self, settings: dict):
        log_cfg = settings.get("logging", {})
        self.run_dir = log_cfg.get("run_dir", "runs") or ""
        self.results_log = log_cfg.get("results_log", "") or ""
        self._lock = threading.Lock()
        self._run = None
        for directory in (self.run_dir, os.path.dirname(self.results_log)):
            if directory:
                try:
                    os.makedirs(directory, exist_ok=True)
                except OSError:
                    pass

    @property
    def enabled(self):
        return bool(self.run_dir)

    @property
    def path(self):
        return self._run["path"] if self._run else None

    def _ts(self):
        return datetime.datetime.now(datetime.timezone.utc).isoformat().replace("+00:00", "Z")

    def start_run(self, command, config_text="", seed=None):
        run_id = str(uuid.uuid4())[:8]
        path = os.path.join(self.run_dir, f"{run_id}_{command}.jsonl") if self.run_dir else None
        with self._lock:
            self._run = {
                "id": run_id,
                "command": command,
                "path": path,
                "start": self._ts(),
                "results": {},
            }
        self._write_event("run_start", {"command": command, "seed": seed, "config": config_text})
        return run_id

    def log_result(self, rows, columns, scalars=None):
        scalars = dict(scalars or {})
        if self._run:
            self._run["results"].update(scalars)
        self._write_event("result", {"rows": rows, "columns": list(columns), **scalars})

    def log_error(self, kind, message, code):
        self._write_event("error", {"kind": kind, "message": message, "code": code})

    def end_run(self, exit_code=0):
        if not self._run:
            return
        self._write_event("run_end", {"exit_code": exit_code})
        self._flush_summary(exit_code)
        with self._lock:
            self._run = None

    def _write_event(self, event_type, data):
        run = self._run
        if not run or not run["path"]:
            return
        entry = {
            "ts": self._ts(),
            "event": event_type,
            "run_id": run["id"],
            **data,
        }
        try:
            with self._lock, open(run["path"], "a") as f:
                f.write(json.dumps(entry, default=str) + "\n")
        except Exception:
            pass

    def _flush_summary(self, exit_code):
        if not self.results_log:
            return
        entry = {
            "ts": self._ts(),
            "type": "run_summary",
            "run_id": self._run["id"],
            "command": self._run["command"],
            "started": self._run["start"],
            "exit_code": exit_code,
            "results": self._run["results"],
        }
        try:
            with self._lock, open(self.results_log, "a") as f:
                f.write(json.dumps(entry, default=str) + "\n")
        except Exception:
            pass
