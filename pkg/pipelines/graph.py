"""
Per-pair flows as LangGraph state graphs.

The graphs hold only routing; the work is done by a runtime object passed in
config["configurable"]["runtime"], so one compiled graph serves every run.

Benchmark gate, one invocation per (model, concept):

    define_gate -> decision_maker -> use_tasks -> end
                                  \\-> end            (definition not Correct)

Automatic lower bound, one invocation per (model, seed question):

    answer_seed -> decision_maker -> expand_and_judge -> end
                                  \\-> end            (seed not answered correctly)
"""

from typing import Any, Protocol

import structlog
from langchain_core.runnables import RunnableConfig
from langgraph.graph import END, START, StateGraph
from typing_extensions import TypedDict

from benchmark.models import Outcome, OutcomeRecord

logger = structlog.get_logger(__name__)

PASS = "pass"
GATED = "gated"
EXPAND = "expand"
SKIP = "skip"


class GateRuntime(Protocol):
    def define_outcomes(self, model_id: str, concept_id: str) -> list[OutcomeRecord]: ...

    def use_outcomes(self, model_id: str, concept_id: str) -> list[OutcomeRecord]: ...


class SeedRuntime(Protocol):
    def answer_seed(self, model_id: str, seed: Any) -> tuple[bool, str]: ...

    def expand_and_judge(self, model_id: str, seed: Any) -> list: ...


class GateState(TypedDict, total=False):
    model_id: str
    concept_id: str
    define_outcomes: list[OutcomeRecord]
    gate: str
    use_outcomes: list[OutcomeRecord]


class SeedState(TypedDict, total=False):
    model_id: str
    seed: Any
    seed_correct: bool
    seed_digest: str
    route: str
    judgements: list


def _runtime(config: RunnableConfig):
    return config["configurable"]["runtime"]


def define_gate(state: GateState, config: RunnableConfig):
    runtime: GateRuntime = _runtime(config)
    return {"define_outcomes": runtime.define_outcomes(state["model_id"], state["concept_id"])}


def gate_decision(state: GateState):
    outcomes = state.get("define_outcomes", [])
    passed = bool(outcomes) and all(o.verdict == Outcome.CORRECT for o in outcomes)
    if not passed:
        logger.info("🚫 Definition gate failed", model_id=state["model_id"], concept_id=state["concept_id"])
    return {"gate": PASS if passed else GATED, "use_outcomes": []}


def use_tasks(state: GateState, config: RunnableConfig):
    runtime: GateRuntime = _runtime(config)
    return {"use_outcomes": runtime.use_outcomes(state["model_id"], state["concept_id"])}


def answer_seed(state: SeedState, config: RunnableConfig):
    runtime: SeedRuntime = _runtime(config)
    correct, digest = runtime.answer_seed(state["model_id"], state["seed"])
    return {"seed_correct": correct, "seed_digest": digest}


def seed_decision(state: SeedState):
    if not state.get("seed_correct"):
        logger.info("⏭️ Seed answered incorrectly, no subquestions", model_id=state["model_id"])
    return {"route": EXPAND if state.get("seed_correct") else SKIP, "judgements": []}


def expand_and_judge(state: SeedState, config: RunnableConfig):
    runtime: SeedRuntime = _runtime(config)
    return {"judgements": runtime.expand_and_judge(state["model_id"], state["seed"])}


def end(state):
    return {}


def _build_gate_graph():
    builder = StateGraph(GateState)
    builder.add_node("define_gate", define_gate)
    builder.add_node("decision_maker", gate_decision)
    builder.add_node("use_tasks", use_tasks)
    builder.add_node("end", end)

    builder.add_edge(START, "define_gate")
    builder.add_edge("define_gate", "decision_maker")
    builder.add_conditional_edges(
        "decision_maker",
        lambda state: state["gate"],
        {PASS: "use_tasks", GATED: "end"},
    )
    builder.add_edge("use_tasks", "end")
    builder.add_edge("end", END)
    return builder.compile()


def _build_seed_graph():
    builder = StateGraph(SeedState)
    builder.add_node("answer_seed", answer_seed)
    builder.add_node("decision_maker", seed_decision)
    builder.add_node("expand_and_judge", expand_and_judge)
    builder.add_node("end", end)

    builder.add_edge(START, "answer_seed")
    builder.add_edge("answer_seed", "decision_maker")
    builder.add_conditional_edges(
        "decision_maker",
        lambda state: state["route"],
        {EXPAND: "expand_and_judge", SKIP: "end"},
    )
    builder.add_edge("expand_and_judge", "end")
    builder.add_edge("end", END)
    return builder.compile()


gate_graph = _build_gate_graph()
seed_graph = _build_seed_graph()


def run_gate(runtime: GateRuntime, model_id: str, concept_id: str) -> GateState:
    return gate_graph.invoke(
        {"model_id": model_id, "concept_id": concept_id},
        config={"configurable": {"runtime": runtime}},
    )


def run_seed(runtime: SeedRuntime, model_id: str, seed: Any) -> SeedState:
    return seed_graph.invoke(
        {"model_id": model_id, "seed": seed},
        config={"configurable": {"runtime": runtime}},
    )
