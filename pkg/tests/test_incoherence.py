import re

import pytest

from benchmark.models import Outcome
from conftest import coin, make_dataset, run_config
from oracle.backends import ScriptedBackend
from oracle.oracle import ModelOracle
from pipelines.incoherence import (
    INCOHERENCE_TASK,
    MALFORMED_CLASSIFICATION,
    MALFORMED_GENERATION,
    label_of,
    run_incoherence,
    split_examples,
)
from pipelines.report_model import ALL, CellStatus

_EXAMPLE = re.compile(r"^Example: (.*)$", re.MULTILINE)
_REQUEST = re.compile(r"request #(\d+)")
_COUNT = re.compile(r"^Write (\d+) different examples")


def polarity_tag(prompt):
    if "a true instance" in prompt:
        return "POS"
    assert "not an instance" in prompt
    return "NEG"


def incoherence_oracle(classify, batch_shortfall=0):
    """Generations are marked POS/NEG; `classify(model_id, example)` returns the reclassification text."""

    def respond(request):
        prompt = request.prompt
        if prompt.startswith("Write one example that is"):
            index = _REQUEST.search(prompt).group(1)
            return f"Here is one.\nFINAL ANSWER: {polarity_tag(prompt)} example {index} from {request.model_id}"
        if prompt.startswith("Write ") and _COUNT.match(prompt):
            count = int(_COUNT.match(prompt).group(1)) - batch_shortfall
            tag = polarity_tag(prompt)
            lines = "\n".join(f"{n}. {tag} example {n} from {request.model_id}" for n in range(1, count + 1))
            return f"FINAL ANSWER:\n{lines}"
        if prompt.startswith("Is the following example a true instance"):
            example = _EXAMPLE.search(prompt).group(1)
            return f"Thinking it over.\nFINAL ANSWER: {classify(request.model_id, example)}"
        raise AssertionError(f"unexpected prompt: {prompt[:40]}")

    return ModelOracle(ScriptedBackend(responder=respond))


def coherent(model_id, example):
    return "Yes" if example.startswith("POS") else "No."


def inverted(model_id, example):
    return "no" if example.startswith("POS") else "yes"


def test_split_examples():
    assert split_examples("1. alpha\n2) beta\n\n- gamma\n* delta", 3) == ["alpha", "beta", "gamma"]


@pytest.mark.parametrize(
    "parsed, label",
    [("Yes", 1), ("yes, it is", 1), ("No.", 0), ("false", 0), ("unsure", None), (None, None)],
)
def test_label_of(parsed, label):
    assert label_of(parsed) == label


def test_coherent_model_scores_zero():
    dataset = make_dataset(n_concepts=2)
    report = run_incoherence(run_config(model_ids=["m1", "m2"]), oracle=incoherence_oracle(coherent), dataset=dataset)

    for model_id in ("m1", "m2", ALL):
        row = report.row(model_id, INCOHERENCE_TASK)
        assert row.rate.scaled_rate == 0.0
        assert row.attempts == (40 if model_id == ALL else 20)
    assert all(o.verdict == Outcome.CORRECT for o in report.outcomes)


def test_inverting_model_scores_two():
    dataset = make_dataset(n_concepts=1)
    report = run_incoherence(run_config(), oracle=incoherence_oracle(inverted), dataset=dataset)
    assert report.row("m1", INCOHERENCE_TASK).rate.scaled_rate == 2.0


def test_random_reclassification_scores_one():
    dataset = make_dataset(n_concepts=1)

    def random_label(model_id, example):
        return "yes" if coin(model_id, example) < 0.5 else "no"

    config = run_config(incoherence_true=500, incoherence_false=500, parallelism=1)
    report = run_incoherence(config, oracle=incoherence_oracle(random_label), dataset=dataset)
    rate = report.row("m1", INCOHERENCE_TASK).rate

    assert rate.n == 1000
    assert abs(rate.scaled_rate - 1.0) <= 0.095


def test_batch_generation_pads_missing_examples():
    dataset = make_dataset(n_concepts=1)
    config = run_config(batch_incoherence=True, incoherence_true=4, incoherence_false=3)
    report = run_incoherence(config, oracle=incoherence_oracle(coherent, batch_shortfall=1), dataset=dataset)

    row = report.row("m1", INCOHERENCE_TASK)
    assert row.attempts == 7
    assert row.exclusions == 2
    assert row.rate.n == 5
    assert row.rate.scaled_rate == 0.0
    excluded = [o for o in report.outcomes if o.verdict == Outcome.EXCLUDED]
    assert {o.item_id for o in excluded} == {"c1/instance/4", "c1/non_instance/3"}
    assert all(o.exclusion_reason == MALFORMED_GENERATION for o in excluded)


def test_unreadable_reclassification_is_excluded():
    dataset = make_dataset(n_concepts=1)

    def hedging(model_id, example):
        return "it depends" if example.endswith("example 1 from m1") else coherent(model_id, example)

    report = run_incoherence(run_config(), oracle=incoherence_oracle(hedging), dataset=dataset)
    row = report.row("m1", INCOHERENCE_TASK)

    assert row.exclusions == 2
    assert row.rate.n == row.attempts - 2
    assert {o.exclusion_reason for o in report.outcomes if o.verdict == Outcome.EXCLUDED} == {MALFORMED_CLASSIFICATION}


def test_domain_rows():
    dataset = make_dataset(n_concepts=2, domains=("literary", "psych_bias"))

    def half_wrong(model_id, example):
        return "yes" if model_id == "m1" else "no"

    report = run_incoherence(run_config(model_ids=["m1"]), oracle=incoherence_oracle(half_wrong), dataset=dataset)

    assert report.domains == ["literary", "psych_bias"]
    for domain in report.domains:
        cell = report.row("m1", INCOHERENCE_TASK, domain=domain)
        assert cell.status == CellStatus.OK
        assert cell.rate.scaled_rate == 1.0
        assert cell.attempts == 10
