"""Throttled progress events for long computations."""

import time

from tqdm import tqdm


class SweepProgress:
    """Count completed points and forward throttled progress events.

    ``callback(event, data)`` receives ``'realtime_progress'`` with
    done/total/rate/elapsed/eta at most every ``update_interval`` seconds,
    and ``'complete'`` once all points are in.
    """

    def __init__(self, total, callback, update_interval=0.1):
        self.total = total
        self.callback = callback
        self.done = 0
        self.failed = 0
        self.start_time = time.time()
        self.last_update = 0.0
        self.update_interval = update_interval

    def advance(self, ok=True):
        """Record one finished point."""
        self.done += 1
        if not ok:
            self.failed += 1

        now = time.time()
        if now - self.last_update < self.update_interval and self.done < self.total:
            return
        self.last_update = now

        elapsed = now - self.start_time
        rate = self.done / elapsed if elapsed > 0 else 0.0
        remaining = self.total - self.done
        eta = remaining / rate if rate > 0 else 0.0
        self.callback('realtime_progress', {
            'done': self.done,
            'total': self.total,
            'rate': rate,
            'elapsed': elapsed,
            'eta': eta,
        })

    def finish(self):
        self.callback('complete', {
            'done': self.done,
            'total': self.total,
            'failed': self.failed,
            'elapsed': time.time() - self.start_time,
        })


class TqdmReporter:
    """Progress callback that drives a tqdm bar on stderr."""

    def __init__(self, total, desc="sweep", disable=False):
        self.bar = tqdm(total=total, desc=desc, unit="pt", disable=disable, leave=False)

    def __call__(self, event, data):
        if event == 'realtime_progress':
            self.bar.n = data['done']
            self.bar.refresh()
        elif event == 'complete':
            self.bar.n = data['done']
            self.bar.close()
