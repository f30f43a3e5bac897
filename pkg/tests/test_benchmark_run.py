import threading

import pytest

from benchmark.models import Outcome, TaskKind
from conftest import coin, item_oracle, make_dataset, run_config
from pipelines.benchmark_run import require_define_items, run_benchmark
from pipelines.errors import InsufficientItemsError
from pipelines.report_model import ALL, CellStatus
from report.render import EMPTY, render_report

USE = ("Classify", "Generate", "Edit")


def always(model_id, item):
    return True


def test_perfect_oracle_has_no_potemkins():
    dataset = make_dataset(n_concepts=3)
    report = run_benchmark(run_config(model_ids=["m1", "m2"]), oracle=item_oracle(dataset, always), dataset=dataset)

    for model_id in ("m1", "m2", ALL):
        for task in USE:
            row = report.row(model_id, task)
            assert row.status == CellStatus.OK
            assert row.rate.scaled_rate == 0.0
        assert report.row(model_id, "Define").rate.raw_accuracy == 1.0
    assert all(cell.status == CellStatus.OK for cell in report.cells)


def test_coin_flip_classifier_scores_one():
    dataset = make_dataset(n_concepts=1, n_classify=1000, n_generate=0, n_edit=0)

    def policy(model_id, item):
        return True if item.kind == TaskKind.DEFINE else coin(model_id, item.item_id) < 0.5

    report = run_benchmark(run_config(), oracle=item_oracle(dataset, policy), dataset=dataset)
    rate = report.row("m1", "Classify").rate

    assert rate.n == 1000
    assert abs(rate.scaled_rate - 1.0) <= 0.095
    assert rate.se == pytest.approx(2 * (rate.raw_accuracy * (1 - rate.raw_accuracy) / 1000) ** 0.5)
    assert report.row("m1", "Generate").status == CellStatus.NO_DATA


def test_failed_definitions_gate_every_use_task():
    dataset = make_dataset(n_concepts=2)
    asked = []
    lock = threading.Lock()

    def policy(model_id, item):
        with lock:
            asked.append(item.kind)
        return False

    report = run_benchmark(run_config(), oracle=item_oracle(dataset, policy), dataset=dataset)

    assert set(asked) == {TaskKind.DEFINE}
    use_cells = [cell for cell in report.cells if cell.task in USE]
    assert use_cells and all(cell.status == CellStatus.GATED for cell in use_cells)
    assert all(cell.attempts == 0 for cell in use_cells)
    for task in USE:
        assert report.row("m1", task).status == CellStatus.NO_DATA
        assert report.row(ALL, task).status == CellStatus.NO_DATA
    define = report.row("m1", "Define")
    assert define.status == CellStatus.OK
    assert define.rate.raw_accuracy == 0.0
    assert EMPTY in render_report(report)


def test_gate_is_per_model_and_concept():
    dataset = make_dataset(n_concepts=2, n_classify=4)
    asked = set()
    lock = threading.Lock()

    def policy(model_id, item):
        with lock:
            asked.add((model_id, item.item_id))
        if item.kind == TaskKind.DEFINE:
            return not (model_id == "m1" and item.concept_id == "c2")
        return True

    report = run_benchmark(run_config(model_ids=["m1", "m2"]), oracle=item_oracle(dataset, policy), dataset=dataset)

    assert ("m1", "c2-classify-1") not in asked
    assert ("m2", "c2-classify-1") in asked
    gated = {(c.model_id, c.concept_id) for c in report.cells if c.status == CellStatus.GATED}
    assert gated == {("m1", "c2")}
    assert report.row("m1", "Classify").attempts == 4
    assert report.row("m2", "Classify").attempts == 8
    assert report.row(ALL, "Classify").attempts == 12
    assert not [o for o in report.outcomes if o.model_id == "m1" and o.concept_id == "c2" and o.kind != TaskKind.DEFINE]


def test_exclusions_stay_out_of_denominators():
    dataset = make_dataset(n_concepts=4, n_classify=25, n_generate=5, n_edit=5)

    def policy(model_id, item):
        if item.kind == TaskKind.DEFINE:
            return True
        draw = coin("malformed", model_id, item.item_id)
        if draw < 0.1:
            return None
        return draw < 0.7

    report = run_benchmark(run_config(model_ids=["m1", "m2"]), oracle=item_oracle(dataset, policy), dataset=dataset)

    assert any(cell.exclusions for cell in report.model_rows)
    for row in report.model_rows + report.overall_rows + report.cells:
        assert row.attempts == row.successes + row.failures + row.exclusions
        if row.rate is not None:
            assert row.rate.n == row.attempts - row.exclusions
            assert row.rate.exclusions == row.exclusions
    for model_id in ("m1", "m2"):
        for task in USE:
            records = [o for o in report.outcomes if o.model_id == model_id and o.kind.value == task]
            row = report.row(model_id, task)
            assert row.attempts == len(records)
            assert row.exclusions == sum(1 for o in records if o.verdict == Outcome.EXCLUDED)
            assert all(o.exclusion_reason == "missing_tag" for o in records if o.verdict == Outcome.EXCLUDED)


def test_domain_rows_pool_every_use_task():
    dataset = make_dataset(n_concepts=4, domains=("literary", "literary", "game_theory", "psych_bias"))

    def policy(model_id, item):
        return item.concept_id != "c2" or item.kind == TaskKind.DEFINE

    report = run_benchmark(run_config(), oracle=item_oracle(dataset, policy), dataset=dataset)

    literary = report.row("m1", "Classify", domain="literary")
    assert literary.attempts == 8
    assert literary.rate.raw_accuracy == 0.5
    assert report.row("m1", "Classify", domain="game_theory").rate.scaled_rate == 0.0
    assert report.row(ALL, "Classify", domain="literary").attempts == 8
    for task in ("Generate", "Edit"):
        assert report.row("m1", task, domain="literary").rate.scaled_rate == 0.5
        assert report.row("m1", task, domain="game_theory").rate.scaled_rate == 0.0
        assert report.row(ALL, task, domain="psych_bias").attempts == 1
    assert report.row("m1", "Define", domain="literary") is None
    assert report.domains == ["literary", "game_theory", "psych_bias"]


def test_runs_are_deterministic():
    dataset = make_dataset(n_concepts=3)

    def policy(model_id, item):
        return coin(model_id, item.item_id) < 0.8

    config = run_config(model_ids=["m1", "m2"], parallelism=3)
    first = run_benchmark(config, oracle=item_oracle(dataset, policy), dataset=dataset)
    second = run_benchmark(config, oracle=item_oracle(dataset, policy), dataset=dataset)

    assert first.to_json() == second.to_json()
    assert first.digest() == second.digest()
    assert first.provenance.transcript_digests == sorted(set(first.provenance.transcript_digests))


def test_concepts_need_a_define_item():
    dataset = make_dataset(n_concepts=1)
    without_define = dataset.model_copy(
        update={"items": tuple(item for item in dataset.items if item.kind != TaskKind.DEFINE)}
    )
    with pytest.raises(InsufficientItemsError):
        require_define_items(without_define)
