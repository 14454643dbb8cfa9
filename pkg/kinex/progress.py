import logging
import sys
from abc import ABC, abstractmethod
from typing import Optional

from tqdm import tqdm

logger = logging.getLogger(__name__)


class IProgressReporter(ABC):
    """Interface for run progress and user-facing messages."""

    @abstractmethod
    def start(self, total: int, desc: str) -> None:
        pass

    @abstractmethod
    def update(self, count: int) -> None:
        pass

    @abstractmethod
    def close(self) -> None:
        pass

    def log_info(self, message: str) -> None:
        logger.info(message)

    def log_error(self, message: str) -> None:
        logger.error(message)


class SilentProgress(IProgressReporter):
    def start(self, total: int, desc: str) -> None:
        pass

    def update(self, count: int) -> None:
        pass

    def close(self) -> None:
        pass


class TerminalProgress(IProgressReporter):
    """
    tqdm bar on stderr. Messages are routed through the bar so they do not
    tear it apart mid-line.
    """

    def __init__(self, unit: str = " enc"):
        self.unit = unit
        self.pbar: Optional[tqdm] = None

    def start(self, total: int, desc: str) -> None:
        self.close()
        # disable=None turns the bar off when stderr is not a terminal
        self.pbar = tqdm(total=total, desc=desc, unit=self.unit, unit_scale=True, disable=None)

    def update(self, count: int) -> None:
        if self.pbar is not None:
            self.pbar.update(count)

    def close(self) -> None:
        if self.pbar is not None:
            self.pbar.close()
            self.pbar = None

    def log_info(self, message: str) -> None:
        if self.pbar is not None and not self.pbar.disable:
            tqdm.write(f"[INFO] {message}", file=sys.stderr)
        else:
            logger.info(message)

    def log_error(self, message: str) -> None:
        if self.pbar is not None and not self.pbar.disable:
            tqdm.write(f"[ERROR] {message}", file=sys.stderr)
        else:
            logger.error(message)
