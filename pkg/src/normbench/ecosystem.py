"""Producer-consumer ecosystem generator and its norm automata.

Producers each make one kind of good with a per-round capacity; consumers
repeatedly collect a required multiset of goods.  Interaction alternates
between two rounds.  In round 1 every consumer without a current demand picks
one (replenishing its requirement multiset when exhausted) and requests a
producer of that good, while producers idle.  In round 2 every producer
serves a maximal capacity-bounded subset of its requesters, consumers idle,
and (optionally) a designated "new" consumer may cancel its pending request
instead.  States record the round number plus each consumer's remaining
multiset, current demand, and requested producer; only states reachable from
the fresh start are generated, and every state's atomic propositions spell
out those components as ``var=val`` atoms.

Norm automata built on top of the generated system:

* :func:`norm_round_robin` - each producer tracks a designated consumer that
  must be served whenever it is among the requesters; the designation cycles
  by one every full interaction.
* :func:`norm_skip2` - same restriction, but the designation advances by two
  (modulo the roster), so some consumers may never be designated.
* :func:`norm_fifo` - each producer keeps a first-in-first-out queue of its
  requesters (deduplicated, enqueued in ascending consumer order) and must
  always serve the queue head; consumers leave the queue as soon as they stop
  requesting, so cancelling and re-requesting moves one to the tail.
* :func:`static_norms_simple` - the three single-state norms that exist for
  the one-producer/two-consumer instance, differing only at its contended
  round-2 state.

The two service objectives are built by :func:`objectives`: "every pending
request can possibly be served" and "every pending request is inevitably
served".

When the new consumer is generated it observes, besides the round number,
exactly the set of consumers currently requesting the same producer as
itself; all other agents observe the full state.  The round number is
included so that the new consumer's observation always determines its
available actions; note that with multi-good requirements for the new
consumer that observation can still be too coarse, which the model validator
reports.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

from . import ctl
from .model import MAS, JointAction, NormativeSystem

BOT = "bot"
IDLE = "idle"
CANCEL = "cancel"


@dataclass(frozen=True)
class EcoConfig:
    """Parameters of one ecosystem instance.

    ``goods[j]`` is the kind of good produced by producer j (several
    producers may share a kind), ``capacities[j]`` how many requests it can
    serve per round, and ``requirements[i]`` the multiset of goods consumer i
    needs per job, as a sorted tuple.  ``include_new_agent`` adds one extra
    consumer (the arriving observer) to the roster; ``cancel_rule`` gives that
    consumer the extra round-2 ability to cancel its pending request.
    """

    goods: tuple[str, ...]
    capacities: tuple[int, ...]
    requirements: tuple[tuple[str, ...], ...]
    include_new_agent: bool = False
    cancel_rule: bool = False

    @property
    def n(self) -> int:
        return len(self.goods)

    @property
    def m(self) -> int:
        return len(self.requirements)

    @property
    def producers(self) -> tuple[str, ...]:
        return tuple(f"p{j + 1}" for j in range(self.n))

    @property
    def new_agent(self) -> str | None:
        return f"c{self.m + 1}" if self.include_new_agent else None

    @property
    def consumers(self) -> tuple[str, ...]:
        roster = tuple(f"c{i + 1}" for i in range(self.m))
        if self.include_new_agent:
            roster += (f"c{self.m + 1}",)
        return roster


def validate_config(cfg: EcoConfig) -> None:
    if cfg.n < 1:
        raise ValueError("need at least one producer")
    if cfg.m < 1:
        raise ValueError("need at least one consumer")
    if len(cfg.capacities) != cfg.n:
        raise ValueError("one capacity per producer")
    if any(b < 1 for b in cfg.capacities):
        raise ValueError("capacities must be at least 1")
    produced = set(cfg.goods)
    for i, req in enumerate(cfg.requirements):
        if not req:
            raise ValueError(f"consumer c{i + 1} requires no goods")
        for good in req:
            if good not in produced:
                raise ValueError(f"required good {good!r} is produced by nobody")
    if cfg.cancel_rule and not cfg.include_new_agent:
        raise ValueError("cancel_rule needs the new agent")


# Consumer local state: (remaining multiset as a sorted tuple, demand, target).
_Local = tuple[tuple[str, ...], str, str]
_State = tuple[int, tuple[_Local, ...]]


def state_id(state: _State) -> str:
    k, locs = state
    chunks = ["+".join(rr) if rr else "-" for rr, _, _ in locs]
    return f"{k}|" + "|".join(
        f"{chunk},{d},{t}" for chunk, (_, d, t) in zip(chunks, locs)
    )


def eco_state_id(k: int, locs) -> str:
    """Build a state id from (remaining goods, demand, target) per consumer."""
    return state_id((k, tuple((tuple(sorted(rr)), d, t) for rr, d, t in locs)))


def _serve_token(served) -> str:
    return "serve-" + ("+".join(sorted(served)) if served else "none")


def served_consumers(action: str) -> frozenset[str]:
    """Consumers named by a producer's round-2 service action."""
    if not action.startswith("serve-"):
        return frozenset()
    body = action[len("serve-") :]
    return frozenset() if body == "none" else frozenset(body.split("+"))


@dataclass
class _Eco:
    cfg: EcoConfig
    mas: MAS
    decoded: dict[str, _State]
    joint: dict[str, tuple[JointAction, ...]]
    requesters: dict[str, dict[str, tuple[str, ...]]]


def _requirement_of(cfg: EcoConfig, i: int) -> tuple[str, ...]:
    # The configuration lists requirements for the base roster only; the
    # arriving consumer gets the same requirement as consumer 1.
    if i < cfg.m:
        return tuple(sorted(cfg.requirements[i]))
    return tuple(sorted(cfg.requirements[0]))


def _consumer_round1_actions(cfg: EcoConfig, i: int, local: _Local) -> list[str]:
    rr, d, _ = local
    if d != BOT:
        return [IDLE]
    effective = rr if rr else _requirement_of(cfg, i)
    wanted = set(effective)
    return sorted(
        f"req-{producer}"
        for producer, good in zip(cfg.producers, cfg.goods)
        if good in wanted
    )


def _producer_round2_actions(cfg: EcoConfig, j: int, requesters: tuple[str, ...]) -> list[str]:
    cap = cfg.capacities[j]
    if len(requesters) <= cap:
        return [_serve_token(requesters)]
    return sorted(_serve_token(combo) for combo in itertools.combinations(requesters, cap))


@lru_cache(maxsize=None)
def _ecosystem(cfg: EcoConfig) -> _Eco:
    validate_config(cfg)
    producers = cfg.producers
    consumers = cfg.consumers
    agents = producers + consumers
    good_of = dict(zip(producers, cfg.goods))

    initial: _State = (1, tuple(((), BOT, BOT) for _ in consumers))
    decoded: dict[str, _State] = {state_id(initial): initial}
    availability: dict[str, dict[str, frozenset[str]]] = {a: {} for a in agents}
    joint: dict[str, tuple[JointAction, ...]] = {}
    requesters_map: dict[str, dict[str, tuple[str, ...]]] = {}
    transitions: set[tuple[str, JointAction, str]] = set()

    queue = deque([state_id(initial)])
    while queue:
        sid = queue.popleft()
        k, locs = decoded[sid]
        requesters = {
            producer: tuple(c for c, (_, _, t) in zip(consumers, locs) if t == producer)
            for producer in producers
        }
        requesters_map[sid] = requesters

        per_agent: list[list[str]] = []
        if k == 1:
            for _ in producers:
                per_agent.append([IDLE])
            for i, local in enumerate(locs):
                per_agent.append(_consumer_round1_actions(cfg, i, local))
        else:
            for j, producer in enumerate(producers):
                per_agent.append(_producer_round2_actions(cfg, j, requesters[producer]))
            for i, (consumer, local) in enumerate(zip(consumers, locs)):
                if (
                    cfg.cancel_rule
                    and consumer == cfg.new_agent
                    and local[1] != BOT
                ):
                    per_agent.append([CANCEL, IDLE])
                else:
                    per_agent.append([IDLE])

        for agent, acts in zip(agents, per_agent):
            availability[agent][sid] = frozenset(acts)

        actions = tuple(itertools.product(*per_agent))
        joint[sid] = actions
        for action in actions:
            dest = _step(cfg, good_of, (k, locs), action)
            dest_id = state_id(dest)
            transitions.add((sid, action, dest_id))
            if dest_id not in decoded:
                decoded[dest_id] = dest
                queue.append(dest_id)

    labels = {sid: _labels(cfg, state) for sid, state in decoded.items()}
    observations: dict[str, dict[str, str]] = {}
    for agent in agents:
        if agent == cfg.new_agent:
            observations[agent] = {
                sid: _new_agent_observation(cfg, state) for sid, state in decoded.items()
            }
        else:
            observations[agent] = {sid: sid for sid in decoded}

    all_actions: dict[str, frozenset[str]] = {}
    for j, producer in enumerate(producers):
        serves = {
            _serve_token(combo)
            for size in range(0, cfg.capacities[j] + 1)
            for combo in itertools.combinations(consumers, size)
        }
        all_actions[producer] = frozenset({IDLE}) | serves
    for consumer in consumers:
        acts = {IDLE} | {f"req-{p}" for p in producers}
        if cfg.cancel_rule and consumer == cfg.new_agent:
            acts.add(CANCEL)
        all_actions[consumer] = frozenset(acts)

    mas = MAS(
        agents=agents,
        states=frozenset(decoded),
        actions=all_actions,
        availability=availability,
        initial=frozenset({state_id(initial)}),
        transitions=frozenset(transitions),
        observations=observations,
        labels=labels,
    )
    return _Eco(cfg, mas, decoded, joint, requesters_map)


def _step(cfg: EcoConfig, good_of: dict[str, str], state: _State, action: JointAction) -> _State:
    k, locs = state
    producers = cfg.producers
    consumers = cfg.consumers
    new_locs = list(locs)
    if k == 1:
        for i, act in enumerate(action[len(producers) :]):
            if act == IDLE:
                continue
            producer = act[len("req-") :]
            rr, _, _ = locs[i]
            effective = rr if rr else _requirement_of(cfg, i)
            new_locs[i] = (effective, good_of[producer], producer)
        return (2, tuple(new_locs))

    served: dict[str, str] = {}
    for producer, act in zip(producers, action[: len(producers)]):
        for consumer in served_consumers(act):
            served[consumer] = producer
    for i, consumer in enumerate(consumers):
        if consumer in served:
            rr, _, _ = new_locs[i]
            remaining = list(rr)
            remaining.remove(good_of[served[consumer]])
            new_locs[i] = (tuple(remaining), BOT, BOT)
    if cfg.cancel_rule and cfg.new_agent is not None:
        vi = consumers.index(cfg.new_agent)
        if action[len(producers) + vi] == CANCEL and cfg.new_agent not in served:
            rr, _, _ = new_locs[vi]
            new_locs[vi] = (rr, BOT, BOT)
    return (1, tuple(new_locs))


def _labels(cfg: EcoConfig, state: _State) -> frozenset[str]:
    k, locs = state
    atoms = {f"k={k}"}
    for i, (rr, d, t) in enumerate(locs, start=1):
        atoms.add(f"rr_{i}={'+'.join(rr) if rr else 'none'}")
        atoms.add(f"d_{i}={d}")
        atoms.add(f"t_{i}={t}")
    return frozenset(atoms)


def _new_agent_observation(cfg: EcoConfig, state: _State) -> str:
    k, locs = state
    consumers = cfg.consumers
    target = locs[-1][2]
    if target == BOT:
        mates = ()
    else:
        mates = tuple(c for c, (_, _, t) in zip(consumers, locs) if t == target)
    return f"r{k}:" + ("+".join(mates) if mates else "none")


def gen_ecosystem(cfg: EcoConfig) -> MAS:
    """Generate the reachable ecosystem for a configuration (validated)."""
    return _ecosystem(cfg).mas


def new_agent_observation_map(cfg: EcoConfig) -> dict[str, str]:
    """The arriving consumer's observation per state (for norm families)."""
    eco = _ecosystem(cfg)
    return {sid: _new_agent_observation(cfg, state) for sid, state in eco.decoded.items()}


# ---------------------------------------------------------------------------
# Norm automata


def _pointer_tokens(pointer: tuple[int, ...]) -> str:
    return ",".join(str(y) for y in pointer)


def _pointer_norm(cfg: EcoConfig, advance) -> NormativeSystem:
    """Shared builder for the designated-consumer norms.

    A normative state holds one roster index per producer; a producer's
    round-2 action is forbidden when its designated consumer is among its
    requesters but not among the served.  ``advance`` maps (index, roster
    size) to the next designated index, applied on every round-1 destination.
    """
    eco = _ecosystem(cfg)
    consumers = cfg.consumers
    roster_size = len(consumers)
    pointers = list(itertools.product(range(1, roster_size + 1), repeat=cfg.n))
    initial = tuple((j % roster_size) + 1 for j in range(cfg.n))

    forbids: dict[tuple[str, str], frozenset[JointAction]] = {}
    for sid, (k, _) in eco.decoded.items():
        if k != 2:
            continue
        requesters = eco.requesters[sid]
        actions = eco.joint[sid]
        for pointer in pointers:
            bad = []
            for action in actions:
                for j, producer in enumerate(cfg.producers):
                    designated = consumers[pointer[j] - 1]
                    if designated in requesters[producer] and designated not in served_consumers(
                        action[j]
                    ):
                        bad.append(action)
                        break
            if bad:
                forbids[(sid, _pointer_tokens(pointer))] = frozenset(bad)

    update: dict[tuple[str, str], str] = {}
    for pointer in pointers:
        bumped = tuple(advance(y, roster_size) for y in pointer)
        if bumped == pointer:
            continue
        token = _pointer_tokens(pointer)
        target = _pointer_tokens(bumped)
        for sid, (k, _) in eco.decoded.items():
            if k == 1:
                update[(token, sid)] = target

    return NormativeSystem(
        frozenset(_pointer_tokens(p) for p in pointers),
        _pointer_tokens(initial),
        forbids,
        update,
    )


def norm_round_robin(cfg: EcoConfig) -> NormativeSystem:
    """Designations advance by one each interaction, looping over the roster."""
    return _pointer_norm(cfg, lambda y, size: (y % size) + 1)


def norm_skip2(cfg: EcoConfig) -> NormativeSystem:
    """Designations advance by two each interaction (modulo the roster)."""
    return _pointer_norm(cfg, lambda y, size: ((y + 1) % size) + 1)


def _queue_token(queues: tuple[tuple[str, ...], ...]) -> str:
    return ",".join(".".join(queue) if queue else "-" for queue in queues)


def norm_fifo(cfg: EcoConfig) -> NormativeSystem:
    """Each producer must serve the head of its first-in-first-out queue.

    Queues hold distinct consumers.  On every destination state a queue keeps
    (in order) the members still requesting that producer and then appends,
    in ascending consumer order, the requesters not yet queued; consumers
    that stop requesting (served, or cancelled) drop out immediately, so a
    cancel-and-re-request rejoins at the tail.
    """
    eco = _ecosystem(cfg)
    consumers = cfg.consumers

    per_producer: list[tuple[str, ...]] = []
    for size in range(len(consumers) + 1):
        per_producer.extend(itertools.permutations(consumers, size))
    all_queues = list(itertools.product(per_producer, repeat=cfg.n))

    def follow(queues, sid) -> tuple[tuple[str, ...], ...]:
        requesters = eco.requesters[sid]
        out = []
        for producer, queue in zip(cfg.producers, queues):
            current = requesters[producer]
            kept = tuple(c for c in queue if c in current)
            fresh = tuple(c for c in consumers if c in current and c not in kept)
            out.append(kept + fresh)
        return tuple(out)

    update: dict[tuple[str, str], str] = {}
    for queues in all_queues:
        token = _queue_token(queues)
        for sid in eco.decoded:
            target = follow(queues, sid)
            if target != queues:
                update[(token, sid)] = _queue_token(target)

    forbids: dict[tuple[str, str], frozenset[JointAction]] = {}
    for sid, (k, _) in eco.decoded.items():
        if k != 2:
            continue
        requesters = eco.requesters[sid]
        actions = eco.joint[sid]
        for queues in all_queues:
            bad = []
            for action in actions:
                for j, producer in enumerate(cfg.producers):
                    queue = queues[j]
                    if not queue:
                        continue
                    head = queue[0]
                    if head in requesters[producer] and head not in served_consumers(action[j]):
                        bad.append(action)
                        break
            if bad:
                forbids[(sid, _queue_token(queues))] = frozenset(bad)

    return NormativeSystem(
        frozenset(_queue_token(q) for q in all_queues),
        _queue_token(tuple(() for _ in range(cfg.n))),
        forbids,
        update,
    )


def static_norms_simple(cfg: EcoConfig) -> list[NormativeSystem]:
    """The three single-state norms of the one-producer/two-consumer case.

    They differ only at the contended round-2 state where both consumers
    request the producer: forbid serving the first consumer, forbid serving
    the second, or forbid nothing.
    """
    good = cfg.goods[0]
    expected = (
        cfg.n == 1
        and cfg.m == 2
        and cfg.capacities == (1,)
        and not cfg.include_new_agent
        and all(tuple(sorted(req)) == (good,) for req in cfg.requirements)
    )
    if not expected:
        raise ValueError("expects one producer (capacity 1) and two consumers wanting its good")
    eco = _ecosystem(cfg)
    contended = eco_state_id(
        2, [((good,), good, "p1"), ((good,), good, "p1")]
    )
    if contended not in eco.decoded:
        raise ValueError("contended state not reachable; config mismatch")
    exclude_c1 = (_serve_token(("c1",)), IDLE, IDLE)
    exclude_c2 = (_serve_token(("c2",)), IDLE, IDLE)
    norms = []
    for banned in ({exclude_c1}, {exclude_c2}, set()):
        forbids = {(contended, "q0"): frozenset(banned)} if banned else {}
        norms.append(NormativeSystem(frozenset({"q0"}), "q0", forbids, {}))
    return norms


def objectives(cfg: EcoConfig) -> tuple[ctl.Formula, ctl.Formula]:
    """The two service objectives over all (consumer, producer) pairs.

    The first says a pending request can always possibly be served; the
    second that it is inevitably served.  Atoms follow the generated labels.
    """
    validate_config(cfg)
    possible = []
    inevitable = []
    for i in range(1, len(cfg.consumers) + 1):
        for j in range(1, cfg.n + 1):
            pending = ctl.Atom(f"t_{i}=p{j}")
            satisfied = ctl.Atom(f"d_{i}={BOT}")
            possible.append(ctl.AG(ctl.Implies(pending, ctl.EF(satisfied))))
            inevitable.append(ctl.AG(ctl.Implies(pending, ctl.AF(satisfied))))
    return ctl.conjoin(possible), ctl.conjoin(inevitable)


# ---------------------------------------------------------------------------
# Configuration files (key = value lines)


def parse_eco_config(text: str) -> EcoConfig:
    """Read a configuration from ``key = value`` lines.

    Keys: ``producers``, ``consumers``, ``good <producer>``,
    ``capacity <producer>``, ``require <consumer>`` (one or more goods),
    ``new_agent`` and ``cancel_rule`` (yes/no).
    """
    entries: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        entries[" ".join(key.split())] = value.split()

    def take(key: str, default=None):
        if key in entries:
            return entries.pop(key)
        if default is not None:
            return default
        raise ValueError(f"missing config key {key!r}")

    def flag(key: str) -> bool:
        value = take(key, ["no"])
        if value in (["yes"], ["true"]):
            return True
        if value in (["no"], ["false"]):
            return False
        raise ValueError(f"{key} must be yes or no")

    n = int(take("producers")[0])
    m = int(take("consumers")[0])
    goods = tuple(take(f"good p{j + 1}")[0] for j in range(n))
    capacities = tuple(int(take(f"capacity p{j + 1}")[0]) for j in range(n))
    requirements = tuple(
        tuple(sorted(take(f"require c{i + 1}"))) for i in range(m)
    )
    cfg = EcoConfig(
        goods=goods,
        capacities=capacities,
        requirements=requirements,
        include_new_agent=flag("new_agent"),
        cancel_rule=flag("cancel_rule"),
    )
    if entries:
        raise ValueError(f"unknown config keys: {sorted(entries)}")
    validate_config(cfg)
    return cfg


def serialize_eco_config(cfg: EcoConfig) -> str:
    out = [f"producers = {cfg.n}", f"consumers = {cfg.m}"]
    for j, (good, cap) in enumerate(zip(cfg.goods, cfg.capacities)):
        out.append(f"good p{j + 1} = {good}")
        out.append(f"capacity p{j + 1} = {cap}")
    for i, req in enumerate(cfg.requirements):
        out.append(f"require c{i + 1} = " + " ".join(req))
    out.append(f"new_agent = {'yes' if cfg.include_new_agent else 'no'}")
    out.append(f"cancel_rule = {'yes' if cfg.cancel_rule else 'no'}")
    return "\n".join(out) + "\n"
