"""Configuration controller for the self-reconfiguring AES coprocessor.

Three pieces:

* :func:`fsm_step`, the four-state controller machine (Start,
  DetectKeyLength, Reconfigure, Operational) as a pure transition function;
* :func:`plan_parameters` and :func:`optimize_parameters`, the two planning
  stages that turn a key-length request into a configuration register;
* :class:`SelfReconfiguringSystem`, the loop that steps controller and
  fabric together and records a cycle-stamped event log.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Optional

from dprcrypt.aes_core import CipherVariant
from dprcrypt.errors import (
    ConstraintInfeasibleError,
    InvalidRegisterError,
    MissingBitstreamError,
)
from dprcrypt.reconfig_fabric import (
    EncryptionJob,
    FabricEvent,
    JobCompletion,
    JobStarted,
    PartialModule,
    ReconfigEvent,
    ReconfigMode,
    ReconfigurableFabric,
)

KEY_SIZES = (128, 192, 256)


class FsmState(str, Enum):
    START = "Start"
    DETECT_KEY_LENGTH = "DetectKeyLength"
    RECONFIGURE = "Reconfigure"
    OPERATIONAL = "Operational"


@dataclass(frozen=True)
class ControllerInput:
    key_length_signal: Optional[int] = None
    reconfig_done: bool = False
    reset: bool = False
    # key size of the module currently in the slot, reported back by the fabric
    loaded_key_bits: Optional[int] = None

    def __post_init__(self):
        for name in ("key_length_signal", "loaded_key_bits"):
            value = getattr(self, name)
            if value is not None and value not in KEY_SIZES:
                raise ValueError(f"{name} must be one of {KEY_SIZES} or None, got {value!r}")


class ActionKind(str, Enum):
    SELECT_PR = "select-pr"
    RAISE_RECONFIG = "raise-reconfig"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    key_bits: int


def _reconfigure(bits: int):
    return FsmState.RECONFIGURE, (Action(ActionKind.SELECT_PR, bits), Action(ActionKind.RAISE_RECONFIG, bits))


def fsm_step(state: FsmState, inp: ControllerInput) -> tuple[FsmState, tuple[Action, ...]]:
    """Return the successor state and the actions emitted on the transition."""
    if inp.reset:
        return FsmState.START, ()
    signal = inp.key_length_signal
    if state is FsmState.START:
        return FsmState.DETECT_KEY_LENGTH, ()
    if state is FsmState.DETECT_KEY_LENGTH:
        if signal is None:
            return state, ()
        if signal == inp.loaded_key_bits:
            return FsmState.OPERATIONAL, ()
        return _reconfigure(signal)
    if state is FsmState.RECONFIGURE:
        return (FsmState.OPERATIONAL, ()) if inp.reconfig_done else (state, ())
    if state is FsmState.OPERATIONAL:
        if signal is not None and signal != inp.loaded_key_bits:
            return _reconfigure(signal)
        return state, ()
    raise ValueError(f"unknown controller state {state!r}")


# -- planning ---------------------------------------------------------------

@dataclass(frozen=True)
class WorkloadHint:
    """What the planner knows about the pending workload besides the key size."""

    requested_mode: ReconfigMode = ReconfigMode.DYNAMIC
    pending_jobs: int = 0


@dataclass(frozen=True)
class ReconfigParams:
    target_variant: CipherVariant
    pr_memory_id: str
    mode: ReconfigMode = ReconfigMode.DYNAMIC


@dataclass(frozen=True)
class Constraints:
    max_latency_cycles: Optional[int] = None
    allow_static_mode: bool = False


@dataclass(frozen=True)
class ConfigRegister:
    params: ReconfigParams
    valid: bool
    written_at: int


def pr_memory_id(key_bits: int) -> str:
    return f"PR{key_bits}"


def _resolve(params: ReconfigParams, store: Mapping[int, PartialModule]) -> PartialModule:
    bits = params.target_variant.key_bits
    module = store.get(bits)
    if module is None or params.pr_memory_id != pr_memory_id(bits) or module.variant != params.target_variant:
        raise MissingBitstreamError(f"{params.pr_memory_id} does not hold a module for {params.target_variant}")
    return module


def plan_parameters(key_bits: int, available_signal: Optional[WorkloadHint],
                    store: Mapping[int, PartialModule]) -> ReconfigParams:
    """First stage: map a key-length request onto a stored partial module."""
    variant = CipherVariant.from_bits(key_bits)
    if key_bits not in store:
        raise MissingBitstreamError(f"no partial bitstream stored for {variant}")
    hint = available_signal or WorkloadHint()
    params = ReconfigParams(variant, pr_memory_id(key_bits), ReconfigMode(hint.requested_mode))
    _resolve(params, store)
    return params


def optimize_parameters(candidate: ReconfigParams, constraints: Constraints,
                        latency_model: Callable[[CipherVariant], int], now: int,
                        store: Mapping[int, PartialModule]) -> ConfigRegister:
    """Second stage: settle the mode, check the latency bound, write the register.

    Dynamic mode is always chosen unless the candidate asks for static mode
    and the constraints allow it. The target variant is never changed.
    """
    _resolve(candidate, store)
    latency = latency_model(candidate.target_variant)
    bound = constraints.max_latency_cycles
    if bound is not None and latency > bound:
        raise ConstraintInfeasibleError(
            f"{candidate.target_variant} needs {latency} reconfiguration cycles, bound is {bound}",
            bound=bound, value=latency,
        )
    mode = ReconfigMode.DYNAMIC
    if candidate.mode is ReconfigMode.STATIC and constraints.allow_static_mode:
        mode = ReconfigMode.STATIC
    params = ReconfigParams(candidate.target_variant, candidate.pr_memory_id, mode)
    return ConfigRegister(params, True, now)


def dispatch(register: ConfigRegister, fabric: ReconfigurableFabric) -> ReconfigEvent:
    """Hand a valid register to the fabric; busy errors propagate."""
    if not register.valid:
        raise InvalidRegisterError("configuration register is not valid")
    try:
        _resolve(register.params, fabric.modules)
    except MissingBitstreamError as exc:
        raise InvalidRegisterError(str(exc)) from None
    return fabric.begin_partial_reconfig(register.params.target_variant, register.params.mode)


class ConfigController:
    """Planning stages bound to one fabric, with register bookkeeping."""

    def __init__(self, fabric: ReconfigurableFabric, constraints: Constraints = Constraints()):
        self.fabric = fabric
        self.constraints = constraints
        self.register: Optional[ConfigRegister] = None
        self._last_dispatched_at: Optional[int] = None

    def plan_parameters(self, key_bits: int, available_signal: Optional[WorkloadHint] = None) -> ReconfigParams:
        return plan_parameters(key_bits, available_signal, self.fabric.modules)

    def optimize_parameters(self, candidate: ReconfigParams,
                            constraints: Optional[Constraints] = None) -> ConfigRegister:
        register = optimize_parameters(candidate, constraints or self.constraints,
                                       self.fabric.latency_model, self.fabric.clock, self.fabric.modules)
        self.register = register
        return register

    def dispatch(self, register: Optional[ConfigRegister] = None) -> ReconfigEvent:
        register = register or self.register
        if register is None:
            raise InvalidRegisterError("no configuration register has been written")
        if self._last_dispatched_at is not None and register.written_at < self._last_dispatched_at:
            raise InvalidRegisterError(
                f"register written at {register.written_at} is older than the last dispatched one"
            )
        event = dispatch(register, self.fabric)
        self._last_dispatched_at = register.written_at
        return event


# -- the driving loop -------------------------------------------------------

@dataclass(frozen=True)
class LogEntry:
    cycle: int
    kind: str
    fields: tuple[tuple[str, str], ...] = ()

    def get(self, key: str, default=None):
        return dict(self.fields).get(key, default)

    def render(self) -> str:
        parts = [f"@{self.cycle:>9}", self.kind]
        parts.extend(f"{k}={v}" for k, v in self.fields)
        return " ".join(parts)


def log_entry(cycle: int, kind: str, **fields) -> LogEntry:
    return LogEntry(cycle, kind, tuple((k, _text(v)) for k, v in fields.items()))


def _text(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, CipherVariant):
        return str(value.key_bits)
    text = str(value)
    return json.dumps(text) if any(ch.isspace() for ch in text) else text


class SelfReconfiguringSystem:
    """Controller FSM and fabric stepped by one loop.

    Controller transitions take no fabric time; after every input change the
    FSM is stepped until it settles. Every transition, register write, swap
    and job event is appended to :attr:`log`.
    """

    MAX_SETTLE_STEPS = 8

    def __init__(self, fabric: Optional[ReconfigurableFabric] = None,
                 constraints: Constraints = Constraints()):
        self.fabric = fabric if fabric is not None else ReconfigurableFabric()
        self.controller = ConfigController(self.fabric, constraints)
        self.state = FsmState.START
        self.signal: Optional[int] = None
        self.log: list[LogEntry] = []
        self.controller_steps = 0
        self._registers: dict[int, ConfigRegister] = {}
        self._settle()

    @property
    def clock(self) -> int:
        return self.fabric.clock

    @property
    def constraints(self) -> Constraints:
        return self.controller.constraints

    def set_constraints(self, constraints: Constraints) -> None:
        self.controller.constraints = constraints
        self.log.append(log_entry(self.clock, "constraints",
                               max_latency=constraints.max_latency_cycles,
                               allow_static=str(constraints.allow_static_mode).lower()))

    def _expected_bits(self) -> Optional[int]:
        status = self.fabric.query_status()
        if status.reconfig_target is not None:
            return status.reconfig_target.key_bits
        return status.loaded.variant.key_bits if status.loaded else None

    def request_key_length(self, key_bits: int, mode: ReconfigMode = ReconfigMode.DYNAMIC) -> bool:
        """Raise the key-length signal. Returns False if planning rejected it."""
        mode = ReconfigMode(mode)
        self.log.append(log_entry(self.clock, "signal", bits=key_bits, mode=mode))
        if key_bits != self._expected_bits():
            hint = WorkloadHint(mode, len(self.fabric.job_queue))
            try:
                candidate = self.controller.plan_parameters(key_bits, hint)
                register = self.controller.optimize_parameters(candidate)
            except (MissingBitstreamError, ConstraintInfeasibleError, ValueError) as exc:
                self.log.append(log_entry(self.clock, "signal-rejected", bits=key_bits, reason=str(exc)))
                return False
            self._registers[key_bits] = register
            self.log.append(log_entry(self.clock, "register", bits=key_bits,
                                   pr=register.params.pr_memory_id, mode=register.params.mode))
        self.signal = key_bits
        self._settle()
        return True

    def reset_controller(self) -> None:
        self._apply(ControllerInput(reset=True))
        self._settle()

    def submit(self, job: EncryptionJob) -> int:
        job_id = self.fabric.submit_job(job)
        self.log.append(log_entry(self.clock, "submit", job=job_id, bits=job.key_bits,
                               blocks=len(job.blocks), direction=job.direction))
        return job_id

    def advance(self, n: int) -> None:
        if n < 0:
            raise ValueError(f"cannot advance a negative number of cycles: {n}")
        target = self.clock + n
        while self.clock < target:
            span = target - self.clock
            if self.fabric.busy:
                # stop at the swap boundary so the controller reacts on that cycle
                span = min(span, self.fabric.reconfig_remaining)
            self._record(self.fabric.step(span))
            self._settle()

    def _inputs(self) -> ControllerInput:
        loaded = self.fabric.loaded
        return ControllerInput(
            key_length_signal=self.signal,
            reconfig_done=not self.fabric.busy,
            loaded_key_bits=loaded.variant.key_bits if loaded else None,
        )

    def _apply(self, inp: ControllerInput) -> bool:
        new, actions = fsm_step(self.state, inp)
        if new is self.state and not actions:
            return False
        self.controller_steps += 1
        self.log.append(log_entry(self.clock, "fsm", src=self.state, dst=new))
        self.state = new
        for action in actions:
            self._perform(action)
        return True

    def _settle(self) -> None:
        for _ in range(self.MAX_SETTLE_STEPS):
            if not self._apply(self._inputs()):
                return
        raise RuntimeError(f"controller did not settle within {self.MAX_SETTLE_STEPS} steps")

    def _perform(self, action: Action) -> None:
        if action.kind is ActionKind.SELECT_PR:
            self.log.append(log_entry(self.clock, "select-pr", pr=pr_memory_id(action.key_bits)))
            return
        register = self._registers[action.key_bits]
        event = self.controller.dispatch(register)
        self.log.append(log_entry(self.clock, "dispatch", to=event.to_variant, mode=event.mode,
                               latency=event.latency, written_at=register.written_at))
        if event.latency == 0:
            self._record([event])

    def _record(self, events: list[FabricEvent]) -> None:
        for e in events:
            if isinstance(e, ReconfigEvent):
                self.log.append(log_entry(e.finished_at, "reconfig", src=e.from_variant, to=e.to_variant,
                                       mode=e.mode, started=e.started_at, latency=e.latency))
            elif isinstance(e, JobStarted):
                self.log.append(log_entry(e.cycle, "job-start", job=e.job_id, bits=e.key_bits))
            elif isinstance(e, JobCompletion):
                self.log.append(log_entry(e.completed_at, "job-done", job=e.job_id, bits=e.key_bits,
                                       module=e.executed_on, started=e.started_at,
                                       blocks=e.blocks, frozen=e.frozen_cycles))

    def render_log(self) -> str:
        return "\n".join(entry.render() for entry in self.log)
