"""Counted, seeded reward oracle and the request protocol algorithms speak.

Algorithms are written as generator functions ("processes") that yield
sample requests and receive rewards back. :func:`execute` serves whole
requests in one vectorised batch; :class:`SteppableRun` serves them one draw
at a time. Both consume the oracle's uniform stream in the same order, so a
process produces the same output and ledger under either driver.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Any, Generator, Sequence

import numpy as np

from .instances import BanditInstance

DEFAULT_BUDGET = 10**9
_CHUNK = 4096


class BudgetExceeded(RuntimeError):
    """The oracle's total-draw cap was hit (a runaway configuration, not a wrong answer)."""


def parse_seed(text: str | int) -> int:
    """Accept a decimal or 0x-prefixed hex 64-bit seed."""
    if isinstance(text, int):
        value = text
    else:
        value = int(text, 0)
    if not 0 <= value < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {text}")
    return value


def derive_seed(seed: int, index: int) -> int:
    """Independent 64-bit sub-seed for sub-run ``index`` of a master seed."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class Draw:
    """Request ``count`` consecutive rewards from ``arm``."""

    arm: int
    count: int
    tag: str = "draw"


@dataclass(frozen=True)
class RoundRobin:
    """Request ``rounds`` passes over ``arms``; the reply has shape (rounds, len(arms)).

    With ``peek=True`` the rewards are shown but not consumed or charged, which
    lets an elimination rule find its stopping round before committing.
    """

    arms: tuple[int, ...]
    rounds: int
    tag: str = "round_robin"
    peek: bool = False


Request = Draw | RoundRobin
Process = Generator[Request, Any, Any]


@dataclass
class SampleLedger:
    per_arm: list[int]
    total: int

    def to_dict(self) -> dict[str, Any]:
        return {"per_arm": list(self.per_arm), "total": self.total}


class SamplingOracle:
    """The only path by which algorithms observe rewards.

    Uniforms come from a single PCG64 stream; the k-th draw (in draw order,
    whichever arm it is for) uses the k-th uniform.
    """

    def __init__(
        self,
        instance: BanditInstance,
        seed: int = 0,
        budget: int | None = DEFAULT_BUDGET,
        record: bool = False,
    ) -> None:
        self.instance = instance
        self.seed = parse_seed(seed)
        self.budget = budget
        self._rng = np.random.Generator(np.random.PCG64(self.seed))
        self._buf = np.empty(0)
        self._pos = 0
        self.per_arm_counts = np.zeros(instance.n, dtype=np.int64)
        self.total_count = 0
        self.by_tag: dict[str, int] = {}
        self.log: list[tuple[Any, int]] | None = [] if record else None
        self._scalar = [(list(a.values), list(a._cdf)) for a in instance.arms]

    # uniform stream

    def _ensure(self, k: int) -> None:
        have = len(self._buf) - self._pos
        if have < k:
            fresh = self._rng.random(max(k - have, _CHUNK))
            self._buf = np.concatenate([self._buf[self._pos:], fresh])
            self._pos = 0

    def _take(self, k: int) -> np.ndarray:
        self._ensure(k)
        out = self._buf[self._pos:self._pos + k]
        self._pos += k
        return out

    def _peek(self, k: int) -> np.ndarray:
        self._ensure(k)
        return self._buf[self._pos:self._pos + k]

    # accounting

    def _check_arm(self, arm: int) -> None:
        if not 0 <= arm < self.instance.n:
            raise IndexError(f"arm index {arm} out of range for {self.instance.n} arms")

    def _charge(self, k: int) -> None:
        if self.budget is not None and self.total_count + k > self.budget:
            raise BudgetExceeded(
                f"drawing {k} more would exceed the budget of {self.budget} draws"
            )

    def _book(self, arm: Any, k: int, tag: str) -> None:
        """Record ``k`` draws of ``arm``, or ``k`` passes when ``arm`` is a tuple."""
        draws = k * len(arm) if isinstance(arm, tuple) else k
        self.total_count += draws
        self.by_tag[tag] = self.by_tag.get(tag, 0) + draws
        if self.log is not None:
            if self.log and self.log[-1][0] == arm and not isinstance(arm, tuple):
                self.log[-1] = (arm, self.log[-1][1] + k)
            else:
                self.log.append((arm, k))

    # public draws

    def draw(self, arm: int, tag: str = "draw") -> float:
        self._check_arm(arm)
        self._charge(1)
        self._ensure(1)
        u = self._buf[self._pos]
        self._pos += 1
        values, cdf = self._scalar[arm]
        idx = min(bisect.bisect_right(cdf, u), len(values) - 1)
        self.per_arm_counts[arm] += 1
        self._book(arm, 1, tag)
        return values[idx]

    def draw_batch(self, arm: int, k: int, tag: str = "draw") -> np.ndarray:
        self._check_arm(arm)
        if k <= 0:
            raise ValueError(f"batch size must be positive, got {k}")
        self._charge(k)
        rewards = self.instance.arms[arm].sample_from_uniforms(self._take(k))
        self.per_arm_counts[arm] += k
        self._book(arm, k, tag)
        return rewards

    def _round_robin(self, arms: Sequence[int], rounds: int, u: np.ndarray) -> np.ndarray:
        m = len(arms)
        grid = u.reshape(rounds, m)
        out = np.empty((rounds, m))
        for col, arm in enumerate(arms):
            out[:, col] = self.instance.arms[arm].sample_from_uniforms(grid[:, col])
        return out

    def peek_round_robin(self, arms: Sequence[int], rounds: int) -> np.ndarray:
        for arm in arms:
            self._check_arm(arm)
        return self._round_robin(arms, rounds, self._peek(rounds * len(arms)))

    def draw_round_robin(self, arms: Sequence[int], rounds: int, tag: str = "round_robin") -> np.ndarray:
        for arm in arms:
            self._check_arm(arm)
        if rounds <= 0 or not arms:
            raise ValueError("round robin needs at least one arm and one round")
        k = rounds * len(arms)
        self._charge(k)
        out = self._round_robin(arms, rounds, self._take(k))
        for arm in arms:
            self.per_arm_counts[arm] += rounds
        self._book(tuple(arms), rounds, tag)
        return out

    def ledger(self) -> SampleLedger:
        return SampleLedger([int(c) for c in self.per_arm_counts], int(self.total_count))


def prefix_ledger(log: Sequence[tuple[Any, int]], n: int, m: int) -> SampleLedger:
    """Per-arm counts of the first ``m`` draws recorded in an oracle log."""
    counts = [0] * n
    left = m
    for who, k in log:
        if left <= 0:
            break
        if isinstance(who, tuple):
            size = len(who)
            take = min(left, k * size)
            full, extra = divmod(take, size)
            for j, arm in enumerate(who):
                counts[arm] += full + (1 if j < extra else 0)
        else:
            take = min(left, k)
            counts[who] += take
        left -= take
    if left > 0:
        raise ValueError("log holds fewer draws than requested")
    return SampleLedger(counts, m)


def serve(request: Request, oracle: SamplingOracle) -> Any:
    if isinstance(request, Draw):
        return oracle.draw_batch(request.arm, request.count, request.tag)
    if request.peek:
        return oracle.peek_round_robin(request.arms, request.rounds)
    return oracle.draw_round_robin(request.arms, request.rounds, request.tag)


def execute(process: Process, oracle: SamplingOracle) -> Any:
    """Drive a process to completion, serving each request as one batch."""
    try:
        request = next(process)
        while True:
            request = process.send(serve(request, oracle))
    except StopIteration as stop:
        return stop.value


@dataclass(frozen=True)
class Status:
    finished: bool
    arm: Any = None


NEEDS_SAMPLE = Status(False)


@dataclass
class SteppableRun:
    """A suspended process advanced exactly one oracle draw per :meth:`step`.

    Peek requests are answered without drawing, so they never end a step. The
    step that observes the process returning draws nothing. A step refused by
    the budget is not counted.
    """

    process: Process
    oracle: SamplingOracle
    steps: int = 0
    status: Status = NEEDS_SAMPLE
    _started: bool = field(default=False, repr=False)
    _pending: Request | None = field(default=None, repr=False)
    _filled: int = field(default=0, repr=False)
    _reply: Any = field(default=None, repr=False)

    @property
    def finished(self) -> bool:
        return self.status.finished

    def _advance(self, reply: Any) -> None:
        """Resume the process until it asks for a real draw or returns."""
        try:
            request = self.process.send(reply) if self._started else next(self.process)
            self._started = True
            while isinstance(request, RoundRobin) and request.peek:
                request = self.process.send(serve(request, self.oracle))
        except StopIteration as stop:
            self.status = Status(True, stop.value)
            self._pending = None
            return
        self._pending = request
        self._filled = 0
        if isinstance(request, Draw):
            self._reply = np.empty(request.count)
        else:
            self._reply = np.empty((request.rounds, len(request.arms)))

    def _size(self) -> int:
        req = self._pending
        return req.count if isinstance(req, Draw) else req.rounds * len(req.arms)

    def step(self) -> Status:
        if self.finished:
            raise RuntimeError("cannot step a finished run")
        if self._pending is None or self._filled == self._size():
            self._advance(self._reply if self._pending is not None else None)
            if self.finished:
                self.steps += 1
                return self.status
        req = self._pending
        if isinstance(req, Draw):
            self._reply[self._filled] = self.oracle.draw(req.arm, req.tag)
        else:
            row, col = divmod(self._filled, len(req.arms))
            self._reply[row, col] = self.oracle.draw(req.arms[col], req.tag)
        self._filled += 1
        self.steps += 1
        return NEEDS_SAMPLE

    def settle(self) -> None:
        """If the pending request is fully served, resume the process without drawing.

        Afterwards the process state reflects every reward it has received,
        exactly as a batch driver that stopped at the next request would see it.
        Counts as no step.
        """
        if not self.finished and self._pending is not None and self._filled == self._size():
            self._advance(self._reply)

    def run(self) -> Any:
        """Step until finished and return the output."""
        while not self.finished:
            self.step()
        return self.status.arm
