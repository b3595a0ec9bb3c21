"""Priority-promotion queue semantics and budget rules."""

from collections import deque

import numpy as np
import pytest

from coopt.messaging import Mailbox
from coopt.scheduler import P_MAX, Budget, EvaluationRequest, PriorityQueues


def req(solver="s", priority=1):
    return EvaluationRequest(point=None, reply=Mailbox(1),
                             solver_id=solver, priority_at_enqueue=priority)


def test_enqueue_files_at_own_priority():
    q = PriorityQueues()
    r = req(priority=3)
    q.enqueue(r)
    assert q.level(3) == (r,)
    assert len(q) == 1


def test_enqueue_same_level_is_fifo():
    q = PriorityQueues()
    r1, r2 = req("a"), req("b")
    q.enqueue(r1)
    q.enqueue(r2)
    assert q.level(1) == (r1, r2)


def test_enqueue_top_level():
    q = PriorityQueues()
    r = req(priority=P_MAX)
    q.enqueue(r)
    assert q.level(P_MAX)[0] is r


def test_enqueue_rejects_out_of_range_priority():
    q = PriorityQueues()
    with pytest.raises(ValueError):
        q.enqueue(req(priority=0))
    with pytest.raises(ValueError):
        q.enqueue(req(priority=P_MAX + 1))


def test_next_request_prefers_highest_level():
    q = PriorityQueues()
    a, b = req("a", priority=10), req("b", priority=4)
    q.enqueue(a)
    q.enqueue(b)
    assert q.next_request() is a


def test_next_request_promotes_remaining_heads():
    q = PriorityQueues()
    b, c = req("b", priority=4), req("c", priority=4)
    q.enqueue(b)
    q.enqueue(c)
    assert q.next_request() is b
    # c was the remaining head at level 4 and moved up one.
    assert q.level(4) == ()
    assert q.level(5) == (c,)


def test_next_request_on_empty_returns_none():
    assert PriorityQueues().next_request() is None


def test_promotion_sweep_is_high_to_low():
    q = PriorityQueues()
    r1, r2 = req("r1"), req("r2")
    r3 = req("r3", priority=2)
    for r in (r1, r2, r3):
        q.enqueue(r)
    q.promote()
    assert q.level(1) == (r2,)
    assert q.level(2) == (r1,)
    assert q.level(3) == (r3,)


def test_promotion_leaves_top_level_alone():
    q = PriorityQueues()
    r = req(priority=P_MAX)
    q.enqueue(r)
    q.promote()
    assert q.level(P_MAX) == (r,)


def test_bottom_request_reaches_top_after_nine_promotions():
    q = PriorityQueues()
    r = req(priority=1)
    q.enqueue(r)
    for step in range(P_MAX - 1):
        assert q.level_of(r) == step + 1
        q.promote()
    assert q.level_of(r) == P_MAX


def test_no_starvation_under_mixed_priorities():
    # Six producers on priorities spread over [1, 10], a thousand requests,
    # two dispatches between arrival bursts: everything must come out.
    rng = np.random.default_rng(5)
    priorities = [1, 2, 4, 6, 9, 10]
    q = PriorityQueues()
    pending = 0
    served = 0
    issued = 0
    while issued < 1000 or pending:
        if issued < 1000:
            for _ in range(rng.integers(1, 4)):
                if issued >= 1000:
                    break
                p = priorities[issued % len(priorities)]
                q.enqueue(req(f"solver-{p}", priority=p))
                issued += 1
                pending += 1
        for _ in range(2):
            if q.next_request() is not None:
                served += 1
                pending -= 1
    assert served == 1000
    assert len(q) == 0


def test_uniform_priority_dispatch_matches_fifo_oracle():
    rng = np.random.default_rng(17)
    q = PriorityQueues()
    oracle = deque()
    dispatched, expected = [], []
    arrivals = 0
    while arrivals < 400 or len(q):
        if arrivals < 400 and rng.random() < 0.6:
            r = req(f"s{arrivals}", priority=5)
            q.enqueue(r)
            oracle.append(r)
            arrivals += 1
        else:
            r = q.next_request()
            if r is not None:
                dispatched.append(r.solver_id)
                expected.append(oracle.popleft().solver_id)
    assert dispatched == expected


def test_budget_validation():
    assert Budget.messages(10).kind == "messages"
    assert Budget.evaluations(5).limit == 5
    with pytest.raises(ValueError):
        Budget("steps", 1)
    with pytest.raises(ValueError):
        Budget.messages(-1)
