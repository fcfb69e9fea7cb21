import logging
import threading

log = logging.getLogger(__name__)


class SweepManager:
    """Fans independent, pure evaluations out to worker threads and keeps input order."""

    def __init__(self, settings=None):
        sweep_cfg = (settings or {}).get("sweep", {})
        self.workers = max(1, int(sweep_cfg.get("workers", 2)))

    def map(self, func, items):
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [func(item) for item in items]

        results = [None] * len(items)
        errors = []
        lock = threading.Lock()
        cursor = iter(range(len(items)))

        def run():
            while True:
                with lock:
                    idx = next(cursor, None)
                if idx is None:
                    return
                try:
                    results[idx] = func(items[idx])
                except Exception as e:
                    log.error(f"[sweep-{idx}] Evaluation failed: {e}")
                    with lock:
                        errors.append((idx, e))

        threads = [threading.Thread(target=run, daemon=True, name=f"sweep-{i}")
                   for i in range(min(self.workers, len(items)))]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        if errors:
            raise min(errors, key=lambda e: e[0])[1]
        log.debug(f"Sweep: {len(items)} evaluation(s) on {len(threads)} thread(s)")
        return results
