import json
import math

import pytest

from rieszmorrey.errors import ConfigError
from rieszmorrey.harness import (
    BoundednessReport,
    Row,
    emit_report,
    from_tree,
    load,
    preset_names,
    render,
    run_adams,
    run_conditions,
    run_experiment,
    run_hardy,
    run_lemma_local,
    run_spanne,
    run_spanne_weak,
)
from rieszmorrey.harness.config import SCHEMA
from rieszmorrey.harness.report import CSV_COLUMNS
from rieszmorrey.reports import ConditionReport

COARSE = {"grid": {"r": [1e-2, 1e2, 9]}}
IND = {"kind": "indicator", "id": "ind-1", "radius": 1.0}
GAUSS = {"kind": "gaussian", "id": "gauss", "width": 1.0}
ZERO = {"kind": "zero", "id": "zero"}
POISON = {"kind": "poisoned", "id": "poison", "radius": 1.0}


def small(preset, functions, **extra):
    return load(preset=preset, overrides={**COARSE, "functions": functions, **extra})


@pytest.fixture(scope="module")
def weak_pair():
    clean = run_experiment(small("spanne-weak", [IND, GAUSS]))
    poisoned = run_experiment(small("spanne-weak", [IND, POISON, GAUSS]))
    return clean, poisoned


class TestConfig:
    def test_presets_load(self):
        names = preset_names()
        assert {"spanne-classical", "spanne-endpoint", "adams-q83", "hardy"} <= set(names)
        for name in names:
            cfg = load(preset=name)
            assert cfg.name == name

    def test_unknown_top_key(self):
        with pytest.raises(ConfigError, match="colour"):
            load(preset="spanne-classical", overrides={"colour": "red"})

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError, match="alhpa"):
            load(preset="spanne-classical", overrides={"kernel": {"alhpa": 0.3}})

    def test_schema_checked(self):
        with pytest.raises(ConfigError, match="schema"):
            from_tree({"schema": "other/9", "kind": "spanne"})

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            load(preset="no-such-preset")

    def test_invalid_parameter_becomes_config_error(self):
        with pytest.raises(ConfigError):
            load(preset="spanne-classical", overrides={"exponents": {"p": 4.0, "q": 2.0}})

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "exp.toml"
        path.write_text(f'schema = "{SCHEMA}"\npreset = "spanne-weak"\nseed = 11\n')
        cfg = load(path)
        assert cfg.seed == 11 and cfg.kind == "weak-type"

    def test_overrides(self):
        cfg = load(preset="spanne-classical").with_overrides(refine=3, seed=5)
        assert cfg.refine == 3 and cfg.seed == 5


class TestRows:
    def test_vacuous(self):
        rep = run_spanne_weak(small("spanne-weak", [ZERO]))
        assert rep.verdict == "vacuous"
        assert rep.rows[0].degenerate and math.isnan(rep.rows[0].ratio)

    def test_adams_vacuous(self):
        rep = run_adams(small("adams-q83", [ZERO], grid={"r": [1e-2, 1e2, 9], "centers": [0.0]}))
        assert rep.verdict == "vacuous"

    def test_lemma_zero_degenerate(self):
        rep = run_lemma_local(small("lemma-weak", [ZERO]))
        assert all(r.degenerate for r in rep.rows)

    def test_poisoned_row_isolated(self, weak_pair):
        clean, poisoned = weak_pair
        bad = [r for r in poisoned.rows if r.function_id == "poison"][0]
        assert bad.error and "EvaluationError" in bad.error
        by_id = {r.function_id: r for r in poisoned.rows}
        for row in clean.rows:
            assert by_id[row.function_id].to_dict() == row.to_dict()
        assert poisoned.verdict == "inconclusive"

    def test_bounded_evidence(self, weak_pair):
        clean, _ = weak_pair
        assert clean.verdict == "bounded-evidence"
        assert clean.conditions_hold and clean.sup_stable and math.isfinite(clean.empirical_constant)

    def test_kind_checked(self):
        with pytest.raises(ConfigError):
            run_spanne(small("spanne-weak", [IND]))

    def test_report_invariant(self):
        bad = ConditionReport("x", holds=False, empirical_C=math.inf)
        with pytest.raises(ValueError):
            BoundednessReport("n", "spanne", {}, (), (Row("f"),), (bad,), 1.0, 1.0, True, "bounded-evidence")


class TestConditionsAndKinds:
    def test_endpoint_fails(self):
        reps = {r.condition: r for r in run_conditions(load(preset="spanne-endpoint"))}
        assert reps["spanne-integral"].divergent

    def test_classical_conditions_hold(self):
        assert all(r.holds for r in run_conditions(load(preset="spanne-classical")))

    def test_conditions_only_kind(self):
        cfg = load(preset="spanne-classical", overrides={"kind": "conditions-only", "functions": []})
        rep = run_experiment(cfg)
        assert rep.verdict == "conditions-hold" and rep.rows == ()

    def test_hardy(self):
        rep = run_hardy(load(preset="hardy"))
        assert rep.verdict == "bounded-evidence"
        assert rep.condition("hardy-best-constant").empirical_C == pytest.approx(1.0, abs=1e-6)
        assert rep.sup_ratio <= 1 + 1e-6
        assert rep.extra["identity_embedding"]["divergent"]


class TestEmit:
    def test_csv_header(self, weak_pair, tmp_path):
        clean, _ = weak_pair
        path = tmp_path / "r.csv"
        emit_report(clean, "csv", path)
        lines = path.read_text().splitlines()
        assert lines[0] == "function_id,source_norm,target_norm,ratio,stable"
        assert lines[0].split(",") == list(CSV_COLUMNS)
        assert lines[1].startswith("ind-1,") and lines[1].endswith(",true")

    def test_json_schema(self, weak_pair):
        doc = json.loads(render(weak_pair[0], "json"))
        assert doc["schema"] == "rieszmorrey.report/1"
        assert doc["verdict"] == "bounded-evidence"
        assert "runtime" not in json.dumps(doc)

    def test_unwritable_path(self, weak_pair, tmp_path):
        target = tmp_path / "missing-dir" / "r.json"
        with pytest.raises(OSError, match="missing-dir"):
            emit_report(weak_pair[0], "json", target)

    def test_unknown_format(self, weak_pair):
        with pytest.raises(ValueError):
            render(weak_pair[0], "xml")


class TestDeterminism:
    def test_bytes_across_runs_and_jobs(self, weak_pair):
        cfg = small("spanne-weak", [IND, POISON, GAUSS])
        first = render(weak_pair[1], "json")
        assert render(run_experiment(cfg, jobs=1), "json") == first
        assert render(run_experiment(cfg, jobs=2), "json") == first

    def test_hedberg_seeded(self):
        cfg = small("adams-q83", [IND], grid={"r": [1e-2, 1e2, 9], "centers": [0.0]}, hedberg={"samples": 4})
        a = render(run_experiment(cfg), "json")
        b = render(run_experiment(cfg, jobs=2), "json")
        c = render(run_experiment(cfg.with_overrides(seed=1)), "json")
        assert a == b and a != c
