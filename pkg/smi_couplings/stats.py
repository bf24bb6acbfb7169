"""
Thread-safe stat tracker for verification sweeps
"""
import collections
import threading
import typing


class SweepStats:
    def __init__(self) -> None:
        self.lock = threading.Lock()
        self._checks: int = 0
        self._violations: int = 0
        self._chunks_done: int = 0
        self._cases: typing.Counter[str] = collections.Counter()

    @property
    def checks(self) -> int:
        """
        The number of (group element, point) pairs checked so far
        """
        with self.lock:
            return self._checks

    def add_checks(self, count: int = 1) -> None:
        with self.lock:
            self._checks += count

    @property
    def violations(self) -> int:
        """
        The number of checks that failed
        """
        with self.lock:
            return self._violations

    def increment_violations(self) -> None:
        with self.lock:
            self._violations += 1

    @property
    def chunks_done(self) -> int:
        with self.lock:
            return self._chunks_done

    def increment_chunks_done(self) -> None:
        with self.lock:
            self._chunks_done += 1

    def tally_case(self, case: str, count: int = 1) -> None:
        with self.lock:
            self._cases[case] += count

    @property
    def cases(self) -> typing.Dict[str, int]:
        """
        Checks per proof case, in case-name order
        """
        with self.lock:
            return {case: self._cases[case] for case in sorted(self._cases)}

    @property
    def summary(self) -> typing.Dict:
        with self.lock:
            return dict(
                checks=self._checks,
                violations=self._violations,
                chunks_done=self._chunks_done,
                cases={case: self._cases[case] for case in sorted(self._cases)},
            )
