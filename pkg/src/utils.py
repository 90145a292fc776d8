import logging
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

T = TypeVar('T')
R = TypeVar('R')

logger = logging.getLogger(__name__)


def configure_logging(level: str = 'INFO') -> None:
    # stderr only; stdout is reserved for reports
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
    root.addHandler(handler)
    root.setLevel(level.upper())


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Apply fn to every item on a thread pool and return results in input order."""
    items = list(items)
    if not items:
        return []
    if threads is None or threads <= 1 or len(items) == 1:
        return [fn(item) for item in items]

    results: List[Optional[R]] = [None] * len(items)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        future_to_index = {executor.submit(fn, item): idx for idx, item in enumerate(items)}
        for future in as_completed(future_to_index):
            results[future_to_index[future]] = future.result()
    return results  # type: ignore[return-value]


def ordered_sum(values) -> float:
    # numpy reduces contiguous float arrays pairwise; order is fixed by the caller
    return float(np.sum(np.ascontiguousarray(values, dtype=float)))

