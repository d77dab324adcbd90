from dataclasses import dataclass
from time import time
from typing import Dict, List, Optional


@dataclass
class PhaseStats:
    start_time: float = 0.0
    end_time: float = 0.0
    items_processed: int = 0

    @property
    def elapsed(self) -> float:
        end = self.end_time if self.end_time else time()
        return end - self.start_time


class StatisticsTracker:
    """Wall clock per named phase, in the order the phases were started."""

    def __init__(self, report_interval: int = 100):
        self.phases: Dict[str, PhaseStats] = {}
        self.order: List[str] = []
        self.report_interval = report_interval

    def start_phase(self, name: str) -> None:
        if name not in self.phases:
            self.order.append(name)
        self.phases[name] = PhaseStats(start_time=time())

    def stop_phase(self, name: str) -> float:
        phase = self.phases[name]
        phase.end_time = time()
        return phase.elapsed

    def update_count(self, name: str, items: int, logger=None) -> None:
        phase = self.phases[name]
        phase.items_processed = items
        if logger is not None and items % self.report_interval == 0 and phase.elapsed > 0:
            logger.info(f"{name}: {items / phase.elapsed:.2f} items/second")

    def elapsed(self, name: str) -> Optional[float]:
        phase = self.phases.get(name)
        return phase.elapsed if phase else None

    def get_final_stats(self) -> dict:
        stats = {}
        for name in self.order:
            phase = self.phases[name]
            seconds = phase.elapsed
            entry = {"total_time_seconds": round(seconds, 2), "items": phase.items_processed}
            if phase.items_processed and seconds > 0:
                entry["average_rate"] = round(phase.items_processed / seconds, 2)
            stats[name] = entry
        return stats
