"""Cycle-level simulation of a partially reconfigurable AES coprocessor.

The device has a static region that admits and runs encryption jobs and one
reconfigurable slot holding a single AES partial module. Swapping the module
is either *dynamic* (in-flight work keeps running during the swap) or
*static* (in-flight work is held frozen until the swap finishes).

Time is an integer cycle counter. :meth:`ReconfigurableFabric.step` jumps
straight from one event to the next, so long idle stretches cost nothing.
"""

from __future__ import annotations

import dataclasses
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

from dprcrypt.aes_core import BLOCK_SIZE, VARIANTS, CipherVariant, decrypt_block, encrypt_block, key_expansion
from dprcrypt.errors import FabricBusyError, KeyLengthError, MissingBitstreamError
from dprcrypt.reference_data import ReferenceData, default_constants


class ReconfigMode(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class Direction(str, Enum):
    ENCRYPT = "encrypt"
    DECRYPT = "decrypt"


@dataclass(frozen=True)
class PartialModule:
    """A stored partial bitstream for one cipher variant."""

    variant: CipherVariant
    slices: int
    cycles_per_block: int
    bitstream_size: Optional[int] = None

    def __post_init__(self):
        if self.slices <= 0:
            raise ValueError(f"slices must be positive, got {self.slices}")
        if self.cycles_per_block <= 0:
            raise ValueError(f"cycles_per_block must be positive, got {self.cycles_per_block}")
        if self.bitstream_size is None:
            object.__setattr__(self, "bitstream_size", self.slices)
        elif self.bitstream_size < 0:
            raise ValueError(f"bitstream_size must be >= 0, got {self.bitstream_size}")


def default_modules(constants: Optional[ReferenceData] = None) -> dict[int, PartialModule]:
    """Partial modules sized from the coprocessor slice counts of the system build."""
    from dprcrypt.perf_model import cycles_per_block

    data = constants or default_constants()
    modules = {}
    for bits, v in VARIANTS.items():
        slices = int(data.require(4, v.name, "XC2VP", "slices"))
        modules[bits] = PartialModule(v, slices, cycles_per_block(v, data))
    return modules


@dataclass
class EncryptionJob:
    key: bytes
    key_bits: int
    blocks: tuple[bytes, ...]
    direction: Direction = Direction.ENCRYPT
    id: Optional[int] = None
    submitted_at: Optional[int] = None
    started_at: Optional[int] = None
    completed_at: Optional[int] = None
    # cycles of useful work done so far, and cycles spent frozen by static swaps
    progress_cycles: int = 0
    frozen_cycles: int = 0
    executed_on: Optional[int] = None
    cycles_per_block: Optional[int] = None
    output: Optional[tuple[bytes, ...]] = None

    def __post_init__(self):
        self.key = bytes(self.key)
        self.blocks = tuple(bytes(b) for b in self.blocks)
        self.direction = Direction(self.direction)

    @property
    def work_cycles(self) -> int:
        return len(self.blocks) * (self.cycles_per_block or 0)

    @property
    def remaining_cycles(self) -> int:
        return self.work_cycles - self.progress_cycles

    @property
    def blocks_done(self) -> int:
        if not self.cycles_per_block:
            return 0
        return self.progress_cycles // self.cycles_per_block


@dataclass(frozen=True)
class ReconfigEvent:
    from_variant: Optional[CipherVariant]
    to_variant: CipherVariant
    mode: ReconfigMode
    started_at: int
    finished_at: int
    latency: int

    @property
    def cycle(self) -> int:
        return self.finished_at


@dataclass(frozen=True)
class JobStarted:
    job_id: int
    key_bits: int
    cycle: int


@dataclass(frozen=True)
class JobCompletion:
    job_id: int
    key_bits: int
    executed_on: int
    blocks: int
    started_at: int
    completed_at: int
    frozen_cycles: int
    output: tuple[bytes, ...]

    @property
    def cycle(self) -> int:
        return self.completed_at


FabricEvent = Union[ReconfigEvent, JobStarted, JobCompletion]


@dataclass(frozen=True)
class FabricStatus:
    clock: int
    loaded: Optional[PartialModule]
    mode: ReconfigMode
    reconfig_remaining: int
    reconfig_target: Optional[CipherVariant]
    job_queue: tuple[EncryptionJob, ...]
    in_flight: tuple[EncryptionJob, ...]
    history: tuple[Union[ReconfigEvent, JobCompletion], ...] = field(repr=False)


class ReconfigurableFabric:
    def __init__(self, modules: Optional[dict[int, PartialModule]] = None, cycles_per_unit: int = 1):
        if cycles_per_unit < 0 or int(cycles_per_unit) != cycles_per_unit:
            raise ValueError(f"cycles_per_unit must be a non-negative integer, got {cycles_per_unit}")
        self.modules = dict(default_modules() if modules is None else modules)
        self.cycles_per_unit = int(cycles_per_unit)
        self.reset()

    def reset(self) -> None:
        self.clock = 0
        self.loaded: Optional[PartialModule] = None
        self.mode = ReconfigMode.DYNAMIC
        self.reconfig_remaining = 0
        self._pending: Optional[ReconfigEvent] = None
        self.job_queue: deque[EncryptionJob] = deque()
        self.in_flight: list[EncryptionJob] = []
        self.history: list[Union[ReconfigEvent, JobCompletion]] = []
        self._next_id = 1

    # -- configuration -----------------------------------------------------

    def module_for(self, variant: CipherVariant) -> PartialModule:
        try:
            return self.modules[variant.key_bits]
        except KeyError:
            raise MissingBitstreamError(f"no partial module stored for {variant}") from None

    def latency_model(self, to: CipherVariant) -> int:
        """Cycles to load the module for ``to``: bitstream size times cycles per unit."""
        return self.module_for(to).bitstream_size * self.cycles_per_unit

    @property
    def busy(self) -> bool:
        return self.reconfig_remaining > 0

    def load_full_configuration(self, variant: CipherVariant) -> FabricStatus:
        """Reset the device and configure it with ``variant`` before time starts."""
        module = self.module_for(variant)
        self.reset()
        self.loaded = module
        self.mode = ReconfigMode.STATIC
        self.history.append(ReconfigEvent(None, variant, ReconfigMode.STATIC, 0, 0, 0))
        return self.query_status()

    def begin_partial_reconfig(self, to: CipherVariant, mode: ReconfigMode = ReconfigMode.DYNAMIC) -> ReconfigEvent:
        """Start loading ``to`` into the reconfigurable slot.

        Returns the event describing the swap; it is also emitted by
        :meth:`step` when the swap finishes. Swaps to the loaded variant, and
        swaps under a zero latency model, complete immediately.
        """
        mode = ReconfigMode(mode)
        if self.busy:
            raise FabricBusyError(
                f"reconfiguration to {self._pending.to_variant} in progress, {self.reconfig_remaining} cycles left"
            )
        module = self.module_for(to)
        current = self.loaded.variant if self.loaded else None
        latency = 0 if current == to else self.latency_model(to)
        event = ReconfigEvent(current, to, mode, self.clock, self.clock + latency, latency)
        self.mode = mode
        if latency == 0:
            self.loaded = module
            self.history.append(event)
        else:
            self._pending = event
            self.reconfig_remaining = latency
        return event

    # -- jobs --------------------------------------------------------------

    def submit_job(self, job: EncryptionJob) -> int:
        """Queue a job and return its id. Malformed jobs raise; nothing is dropped."""
        if job.key_bits not in VARIANTS:
            raise ValueError(f"unsupported key size: {job.key_bits}")
        if len(job.key) * 8 != job.key_bits:
            raise KeyLengthError(f"AES-{job.key_bits} job needs a {job.key_bits // 8}-byte key, got {len(job.key)} bytes")
        if not job.blocks:
            raise ValueError("job has no blocks")
        for i, b in enumerate(job.blocks):
            if len(b) != BLOCK_SIZE:
                raise ValueError(f"block {i} is {len(b)} bytes, expected 16")
        if job.id is None:
            job.id = self._next_id
        self._next_id = max(self._next_id, job.id) + 1
        job.submitted_at = self.clock
        self.job_queue.append(job)
        return job.id

    def _start_ready(self, events: list) -> None:
        if self.busy or self.in_flight or not self.job_queue or self.loaded is None:
            return
        head = self.job_queue[0]
        # FIFO: a mismatched head blocks the queue until the slot is swapped
        if head.key_bits != self.loaded.variant.key_bits:
            return
        self.job_queue.popleft()
        head.started_at = self.clock
        head.executed_on = self.loaded.variant.key_bits
        head.cycles_per_block = self.loaded.cycles_per_block
        self.in_flight.append(head)
        events.append(JobStarted(head.id, head.key_bits, self.clock))

    def _finish_job(self, job: EncryptionJob) -> JobCompletion:
        job.completed_at = self.clock
        ks = key_expansion(job.key, VARIANTS[job.executed_on])
        fn = encrypt_block if job.direction is Direction.ENCRYPT else decrypt_block
        job.output = tuple(fn(b, ks) for b in job.blocks)
        return JobCompletion(job.id, job.key_bits, job.executed_on, len(job.blocks),
                             job.started_at, job.completed_at, job.frozen_cycles, job.output)

    # -- time --------------------------------------------------------------

    def step(self, n: int) -> list[FabricEvent]:
        """Advance the clock by ``n`` cycles and return the events that fired."""
        if n < 0:
            raise ValueError(f"cannot step a negative number of cycles: {n}")
        target = self.clock + n
        events: list[FabricEvent] = []
        while self.clock < target:
            self._start_ready(events)
            frozen = self.busy and self.mode is ReconfigMode.STATIC
            dt = target - self.clock
            if self.busy:
                dt = min(dt, self.reconfig_remaining)
            if not frozen:
                for job in self.in_flight:
                    dt = min(dt, job.remaining_cycles)

            self.clock += dt
            if self.busy:
                self.reconfig_remaining -= dt
            for job in self.in_flight:
                if frozen:
                    job.frozen_cycles += dt
                else:
                    job.progress_cycles += dt

            for job in [j for j in self.in_flight if j.remaining_cycles == 0]:
                self.in_flight.remove(job)
                done = self._finish_job(job)
                self.history.append(done)
                events.append(done)
            if self._pending is not None and self.reconfig_remaining == 0:
                event, self._pending = self._pending, None
                self.loaded = self.module_for(event.to_variant)
                self.history.append(event)
                events.append(event)
        return events

    def run_until_idle(self, limit: int = 10**9) -> list[FabricEvent]:
        """Step until nothing is running, reconfiguring, or startable."""
        events: list[FabricEvent] = []
        while self.busy or self.in_flight or self._startable():
            if self.clock >= limit:
                break
            gaps = [self.reconfig_remaining] if self.busy else []
            if self._startable():
                gaps.append(1)
            if self.in_flight and not (self.busy and self.mode is ReconfigMode.STATIC):
                gaps.extend(j.remaining_cycles for j in self.in_flight)
            events.extend(self.step(min(g for g in gaps if g > 0)))
        return events

    def _startable(self) -> bool:
        return (not self.busy and not self.in_flight and bool(self.job_queue)
                and self.loaded is not None
                and self.job_queue[0].key_bits == self.loaded.variant.key_bits)

    def query_status(self) -> FabricStatus:
        return FabricStatus(
            clock=self.clock,
            loaded=self.loaded,
            mode=self.mode,
            reconfig_remaining=self.reconfig_remaining,
            reconfig_target=self._pending.to_variant if self._pending else None,
            job_queue=tuple(dataclasses.replace(j) for j in self.job_queue),
            in_flight=tuple(dataclasses.replace(j) for j in self.in_flight),
            history=tuple(self.history),
        )

    @property
    def completions(self) -> list[JobCompletion]:
        return [e for e in self.history if isinstance(e, JobCompletion)]

    @property
    def reconfigurations(self) -> list[ReconfigEvent]:
        return [e for e in self.history if isinstance(e, ReconfigEvent)]


def make_job(key: bytes, blocks: Sequence[bytes], key_bits: Optional[int] = None,
             direction: Direction = Direction.ENCRYPT) -> EncryptionJob:
    key = bytes(key)
    return EncryptionJob(key, key_bits or len(key) * 8, tuple(blocks), Direction(direction))
