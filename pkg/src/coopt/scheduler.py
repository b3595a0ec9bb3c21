"""Central scheduler: priority-promotion queueing and evaluator dispatch.

The scheduler is the only agent allowed to end a run.  It consumes its inbox
message by message, files evaluation requests into a vector of priority
queues, hands work to idle evaluators, relays improved solutions to every
solver (when sharing is on), and on budget exhaustion drives the shutdown
protocol that unblocks all other agents.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from coopt.messaging import Mailbox, MailboxClosed, Message, MessageKind, reply_mailbox

P_MAX = 10


@dataclass(frozen=True)
class EvaluationRequest:
    """A point awaiting dispatch, with the reply channel of the asking solver."""

    point: Any
    reply: Mailbox
    solver_id: str
    priority_at_enqueue: int = 1


class PriorityQueues:
    """Vector of FIFO queues over priority levels 1..p_max.

    Dispatch removes the head of the highest non-empty level, then promotes
    the head of every other level up one (sweeping from the top down so a
    request climbs at most one level per dispatch).  A request entering at
    the bottom therefore reaches the top level after p_max - 1 promotions,
    which rules out starvation; with every producer on one priority level
    the dispatch order degenerates to plain FIFO.
    """

    def __init__(self, p_max: int = P_MAX):
        if p_max < 1:
            raise ValueError("p_max must be >= 1")
        self.p_max = p_max
        self._levels: list[deque] = [deque() for _ in range(p_max + 1)]

    def __len__(self) -> int:
        return sum(len(level) for level in self._levels)

    def level(self, priority: int) -> tuple:
        """Requests currently queued at one level, head first."""
        return tuple(self._levels[priority])

    def level_of(self, request: EvaluationRequest) -> int:
        for p in range(self.p_max, 0, -1):
            if request in self._levels[p]:
                return p
        raise LookupError("request not queued")

    def enqueue(self, request: EvaluationRequest) -> None:
        if not 1 <= request.priority_at_enqueue <= self.p_max:
            raise ValueError(f"priority outside [1, {self.p_max}]")
        self._levels[request.priority_at_enqueue].append(request)

    def promote(self) -> None:
        """Lift the head of each level below the top up one level."""
        for p in range(self.p_max - 1, 0, -1):
            if self._levels[p]:
                self._levels[p + 1].append(self._levels[p].popleft())

    def next_request(self) -> Optional[EvaluationRequest]:
        """Pop the head of the highest non-empty level, then promote."""
        for p in range(self.p_max, 0, -1):
            if self._levels[p]:
                request = self._levels[p].popleft()
                self.promote()
                return request
        return None

    def drain(self):
        """Remove and yield every queued request (teardown)."""
        for level in self._levels:
            while level:
                yield level.popleft()


@dataclass(frozen=True)
class Budget:
    """Termination rule: a cap on scheduler messages or on dispatched evaluations."""

    kind: str
    limit: int

    def __post_init__(self):
        if self.kind not in ("messages", "evaluations"):
            raise ValueError(f"unknown budget kind {self.kind!r}")
        if self.limit < 0:
            raise ValueError("budget limit must be >= 0")

    @classmethod
    def messages(cls, limit: int) -> "Budget":
        return cls("messages", limit)

    @classmethod
    def evaluations(cls, limit: int) -> "Budget":
        return cls("evaluations", limit)


@dataclass
class SchedulerState:
    """Wiring and private counters of one scheduler task."""

    inbox: Mailbox
    evaluator_mailboxes: dict[str, Mailbox]
    share_mailboxes: dict[str, Mailbox]
    analysis_inbox: Mailbox
    budget: Budget
    sharing: bool = False
    events: Optional[Callable[[dict], None]] = None
    queues: PriorityQueues = field(default_factory=PriorityQueues)
    idle: deque = field(default_factory=deque)
    busy: set = field(default_factory=set)
    msg_count: int = 0
    dispatches: int = 0
    broadcasts: int = 0
    refusals: int = 0
    improvements: int = 0


async def scheduler_loop(state: SchedulerState) -> Any:
    """Run the dispatch loop to budget exhaustion; return the final archive.

    Every received message counts toward a message-typed budget; every
    EVALUATEPOINT handed to an evaluator counts toward an evaluation-typed
    budget (that cap is exact: dispatch stops at the limit and queued
    requests are refused during shutdown).
    """
    emit = state.events or (lambda record: None)
    while not _exhausted(state):
        message = await state.inbox.take()
        state.msg_count += 1
        _handle(state, message, emit, broadcasting=True)
        _dispatch_idle(state, emit)
    return await _shutdown(state, emit)


def _exhausted(state: SchedulerState) -> bool:
    if state.budget.kind == "messages":
        return state.msg_count >= state.budget.limit
    return state.dispatches >= state.budget.limit


def _handle(state: SchedulerState, message: Message,
            emit: Callable[[dict], None], broadcasting: bool) -> None:
    if message.kind is MessageKind.EVALUATEPOINT:
        state.queues.enqueue(message.content)
    elif message.kind is MessageKind.REQUESTPOINT:
        evaluator_id = message.content
        state.busy.discard(evaluator_id)
        state.idle.append(evaluator_id)
    elif message.kind is MessageKind.ANALYSESOLUTION:
        evaluation = message.content
        state.improvements += 1
        emit({
            "event": "improvement",
            "seq": evaluation.seq,
            "solver": evaluation.solver_id,
            "z": list(evaluation.objectives),
            "g": evaluation.constraint,
            "messages": state.msg_count,
            "dispatches": state.dispatches,
        })
        if state.sharing and broadcasting:
            _broadcast(state, evaluation, emit)
    else:
        raise RuntimeError(f"scheduler cannot handle {message.kind}")


def _broadcast(state: SchedulerState, evaluation,
               emit: Callable[[dict], None]) -> None:
    delivered = 0
    for solver_id, share_mb in state.share_mailboxes.items():
        try:
            share_mb.put_drop_oldest(
                Message(MessageKind.SHAREBEST, "scheduler", evaluation))
            delivered += 1
        except MailboxClosed:
            continue
    state.broadcasts += delivered
    emit({"event": "broadcast", "seq": evaluation.seq, "delivered": delivered})


def _dispatch_idle(state: SchedulerState, emit: Callable[[dict], None]) -> None:
    while state.idle and len(state.queues):
        if state.budget.kind == "evaluations" \
                and state.dispatches >= state.budget.limit:
            return
        request = state.queues.next_request()
        evaluator_id = state.idle.popleft()
        # The evaluator announced idleness, so its mailbox is empty.
        state.evaluator_mailboxes[evaluator_id].put_nowait(
            Message(MessageKind.EVALUATEPOINT, "scheduler", request))
        state.busy.add(evaluator_id)
        state.dispatches += 1
        emit({
            "event": "dispatch",
            "evaluator": evaluator_id,
            "solver": request.solver_id,
            "messages": state.msg_count,
            "dispatches": state.dispatches,
        })


def _refuse(state: SchedulerState, request: EvaluationRequest,
            emit: Callable[[dict], None]) -> None:
    request.reply.close()
    state.refusals += 1
    emit({"event": "refusal", "solver": request.solver_id})


async def _shutdown(state: SchedulerState, emit: Callable[[dict], None]) -> Any:
    """Wind the system down and collect the final archive.

    Order matters: first wait out busy evaluators so every dispatched result
    reaches the analysis agent (an evaluator re-announces itself only after
    delivering both result messages, and the analysis mailbox is FIFO, so
    the later RETRIEVEBEST cannot overtake any result).  Only then refuse
    pending requests, close the solver/evaluator channels, and query the
    archive.
    """
    while state.busy:
        message = await state.inbox.take()
        state.msg_count += 1
        if message.kind is MessageKind.EVALUATEPOINT:
            _refuse(state, message.content, emit)
        else:
            _handle(state, message, emit, broadcasting=False)

    for request in state.queues.drain():
        _refuse(state, request, emit)

    for share_mb in state.share_mailboxes.values():
        share_mb.close()
    for evaluator_mb in state.evaluator_mailboxes.values():
        evaluator_mb.close()
    state.inbox.close()

    # Anything that raced in before the close still gets an answer.
    while (message := state.inbox.take_nowait()) is not None:
        state.msg_count += 1
        if message.kind is MessageKind.EVALUATEPOINT:
            _refuse(state, message.content, emit)
        elif message.kind is MessageKind.ANALYSESOLUTION:
            _handle(state, message, emit, broadcasting=False)

    reply = reply_mailbox("scheduler")
    await state.analysis_inbox.put(
        Message(MessageKind.RETRIEVEBEST, "scheduler", reply))
    snapshot = (await reply.take()).content
    state.analysis_inbox.close()
    emit({
        "event": "terminated",
        "messages": state.msg_count,
        "dispatches": state.dispatches,
        "broadcasts": state.broadcasts,
        "refusals": state.refusals,
        "improvements": state.improvements,
    })
    return snapshot
