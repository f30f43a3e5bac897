import pytest

from benchmark.models import Outcome, OutcomeRecord, TaskKind
from conftest import coin, item_oracle, make_dataset, run_config
from pipelines.errors import InsufficientItemsError, RunConfigError
from pipelines.expansion import keystone_triple, ordered_classify_items, run_keystone_expansion
from pipelines.report_model import ALL
from report.render import render_report


def values(report, model_id):
    return [p.value for p in sorted((p for p in report.curves if p.model_id == model_id), key=lambda p: p.k)]


def contributing(report, model_id):
    return [p.contributing for p in sorted((p for p in report.curves if p.model_id == model_id), key=lambda p: p.k)]


def record(verdict):
    return OutcomeRecord(model_id="m1", item_id="i", concept_id="c1", kind=TaskKind.CLASSIFY, verdict=verdict)


def test_keystone_triple():
    ok, bad = record(Outcome.CORRECT), record(Outcome.INCORRECT)
    ordered = [ok, bad, ok, ok]
    assert keystone_triple([ok], ordered, 0, 2) == (True, 1, 2)
    assert keystone_triple([ok], ordered, 2, 2) == (False, 2, 2)
    assert keystone_triple([bad], ordered, 0, 2) == (False, 1, 2)
    assert keystone_triple([], ordered, 0, 2) == (False, 1, 2)


def test_order_is_a_seeded_permutation():
    dataset = make_dataset(n_concepts=2, n_classify=8)
    first = ordered_classify_items(dataset, "c1", seed=3)
    assert first == ordered_classify_items(dataset, "c1", seed=3)
    assert sorted(i.item_id for i in first) == sorted(i.item_id for i in dataset.items_for("c1", TaskKind.CLASSIFY))


def test_perfect_oracle_understands_everything():
    dataset = make_dataset(n_concepts=3, n_classify=6)
    report = run_keystone_expansion(
        run_config(model_ids=["m1", "m2"], followup_m=3),
        k_values=[0, 1, 2, 3],
        oracle=item_oracle(dataset, lambda model_id, item: True),
        dataset=dataset,
    )
    for model_id in ("m1", "m2"):
        assert values(report, model_id) == [1.0, 1.0, 1.0, 1.0]
        assert contributing(report, model_id) == [3, 3, 3, 3]
    assert contributing(report, ALL) == [6, 6, 6, 6]


def test_one_wrong_item_moves_from_followups_into_the_keystone():
    dataset = make_dataset(n_concepts=2, n_classify=6)
    config = run_config(followup_m=3, seed=11)
    wrong = ordered_classify_items(dataset, "c2", config.seed)[2].item_id

    report = run_keystone_expansion(
        config,
        k_values=[0, 1, 2, 3],
        oracle=item_oracle(dataset, lambda model_id, item: item.item_id != wrong),
        dataset=dataset,
    )

    assert values(report, "m1") == [0.5, 0.5, 0.5, 1.0]
    assert contributing(report, "m1") == [2, 2, 2, 1]
    assert "k=3" in render_report(report)


def test_contributing_concepts_never_grow_with_k():
    dataset = make_dataset(n_concepts=6, n_classify=8)

    def policy(model_id, item):
        return item.kind == TaskKind.DEFINE or coin(model_id, item.item_id) < 0.85

    report = run_keystone_expansion(
        run_config(model_ids=["m1", "m2"], followup_m=3),
        k_values=[0, 1, 2, 3, 4, 5],
        oracle=item_oracle(dataset, policy),
        dataset=dataset,
    )
    for model_id in ("m1", "m2", ALL):
        counts = contributing(report, model_id)
        assert counts == sorted(counts, reverse=True)


def test_no_passing_concept_has_no_value():
    dataset = make_dataset(n_concepts=2, n_classify=3)
    report = run_keystone_expansion(
        run_config(followup_m=2),
        k_values=[0, 1],
        oracle=item_oracle(dataset, lambda model_id, item: item.kind != TaskKind.DEFINE),
        dataset=dataset,
    )
    assert values(report, "m1") == [None, None]
    assert "—" in render_report(report)


def test_too_few_classify_items():
    dataset = make_dataset(n_concepts=2, n_classify=4)
    with pytest.raises(InsufficientItemsError) as excinfo:
        run_keystone_expansion(
            run_config(followup_m=3),
            k_values=[0, 1, 2],
            oracle=item_oracle(dataset, lambda model_id, item: True),
            dataset=dataset,
        )
    assert excinfo.value.needed == 5
    assert excinfo.value.available == 4


@pytest.mark.parametrize("k_values", [[-1, 2], []])
def test_keystone_sizes_must_be_non_negative(k_values):
    dataset = make_dataset(n_concepts=1, n_classify=12)
    with pytest.raises(RunConfigError) as excinfo:
        run_keystone_expansion(
            run_config(followup_m=3),
            k_values=k_values,
            oracle=item_oracle(dataset, lambda model_id, item: True),
            dataset=dataset,
        )
    assert excinfo.value.exit_code == 1
