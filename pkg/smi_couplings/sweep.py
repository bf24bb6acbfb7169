"""
Runs verification work over chunks of items, optionally on worker threads
"""
import logging
import queue
import threading
import typing

from .stats import SweepStats


logger = logging.getLogger(__name__)

T = typing.TypeVar("T")
R = typing.TypeVar("R")

DEFAULT_CHUNK_SIZE = 64


class SweepWorker:
    """
    Takes (chunk index, chunk) work off a queue and puts (chunk index, result) on another
    """

    def __init__(
        self,
        to_do: queue.Queue,
        done: queue.Queue,
        work: typing.Callable[[typing.Sequence[T]], R],
        stats: typing.Optional[SweepStats] = None,
    ) -> None:
        self.to_do = to_do
        self.done = done
        self.work = work
        self.stats = stats

    def run(self) -> None:
        while True:
            try:
                index, chunk = self.to_do.get_nowait()
            except queue.Empty:
                return
            try:
                result = self.work(chunk)
            except Exception as e:
                # the caller re-raises it in chunk order
                logger.debug("chunk %d failed: %s", index, e)
                result = e
            if self.stats is not None:
                self.stats.increment_chunks_done()
            self.done.put((index, result))


def chunked(items: typing.Sequence[T], chunk_size: int = DEFAULT_CHUNK_SIZE) -> typing.List[typing.Sequence[T]]:
    return [items[i : i + chunk_size] for i in range(0, len(items), chunk_size)]


def run_chunks(
    work: typing.Callable[[typing.Sequence[T]], R],
    items: typing.Sequence[T],
    jobs: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    stats: typing.Optional[SweepStats] = None,
) -> typing.List[R]:
    """
    Apply work to consecutive chunks of items and return the results in chunk order.

    With jobs > 1 the chunks are shared out to worker threads through a
    queue; the merged result list is the same as for the serial run.
    """
    chunks = chunked(list(items), chunk_size)
    if jobs <= 1 or len(chunks) <= 1:
        results = []
        for chunk in chunks:
            results.append(work(chunk))
            if stats is not None:
                stats.increment_chunks_done()
        return results
    to_do: queue.Queue = queue.Queue()
    done: queue.Queue = queue.Queue()
    for index, chunk in enumerate(chunks):
        to_do.put((index, chunk))
    threads = []
    for _ in range(min(jobs, len(chunks))):
        worker = SweepWorker(to_do, done, work, stats)
        thread = threading.Thread(target=worker.run, daemon=True)
        thread.start()
        threads.append(thread)
    collected = {}
    for _ in chunks:
        index, result = done.get()
        collected[index] = result
    for thread in threads:
        thread.join()
    logger.debug("merged %d chunks from %d workers", len(chunks), len(threads))
    ordered = [collected[i] for i in range(len(chunks))]
    for result in ordered:
        if isinstance(result, Exception):
            raise result
    return ordered
