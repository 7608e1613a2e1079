"""
Unit tests for command parsing and validation
"""
import pytest
from pydantic import ValidationError

from wrightlevy.app.core.exceptions import ConfigError
from wrightlevy.app.cli.validators import load_config_section, validate_model_input
from wrightlevy.app.schemas.command import (
    Command,
    Target,
    Verb,
    parameter_table,
    parse_flag,
    parse_pairs,
)


class TestParsers:
    def test_pairs_from_string(self):
        assert parse_pairs("1,0.5; 2,1") == ((1.0, 0.5), (2.0, 1.0))

    def test_pairs_from_sequence(self):
        assert parse_pairs([(1, 2)]) == ((1.0, 2.0),)
        assert parse_pairs("") == ()

    @pytest.mark.edge_cases
    def test_malformed_pair(self):
        with pytest.raises(ValueError):
            parse_pairs("1,2,3")

    @pytest.mark.parametrize("raw, expected", [("yes", True), ("", True), ("Off", False), (0, False)])
    def test_flags(self, raw, expected):
        assert parse_flag(raw) is expected

    @pytest.mark.edge_cases
    def test_bad_flag(self):
        with pytest.raises(ValueError):
            parse_flag("maybe")


class TestParameterTable:
    def test_point_evaluation(self):
        required, optional = parameter_table(Verb.EVAL, Target.DENSITY)
        assert required == {"alpha", "delta", "y"}
        assert optional == {"tol"}

    def test_table_replaces_point_by_range(self):
        required, optional = parameter_table(Verb.TABLE, Target.PSI_GAMMA)
        assert required == {"alpha", "gamma", "lambdamin", "lambdamax", "n"}
        assert "log" in optional

    def test_invert_accepts_nodes(self):
        required, optional = parameter_table(Verb.INVERT, Target.ENTRANCE)
        assert {"ymin", "ymax", "n"} <= required
        assert "nodes" in optional

    def test_verify_identity_needs_nothing(self):
        assert parameter_table(Verb.VERIFY, Target.IDENTITY) == (frozenset(), frozenset({"seed"}))


class TestCommand:
    def test_values_are_typed(self):
        cmd = Command(
            verb=Verb.TABLE,
            target=Target.PSI_GAMMA,
            params={"alpha": "1.5", "gamma": "0", "lambdamin": "0.1", "lambdamax": "2", "n": "5", "log": "yes"},
        )
        assert cmd.get("alpha") == 1.5
        assert cmd.get("n") == 5
        assert cmd.get("log") is True
        assert cmd.get("tol", 1e-10) == 1e-10

    def test_wright_pairs(self):
        cmd = Command(verb=Verb.EVAL, target=Target.WRIGHT, params={"x": "-1", "upper": "1,1", "lower": "1,1"})
        assert cmd.get("upper") == ((1.0, 1.0),)

    def test_none_values_are_dropped(self):
        cmd = Command(verb=Verb.EVAL, target=Target.PSI_GAMMA, params={"alpha": 1.5, "gamma": 0, "lambda": 1, "tol": None})
        assert "tol" not in cmd.params

    @pytest.mark.edge_cases
    @pytest.mark.parametrize(
        "verb, target, params, message",
        [
            (Verb.EVAL, Target.PSI_GAMMA, {"alpha": 1.5, "gamma": 0}, "missing parameters"),
            (Verb.EVAL, Target.PSI_GAMMA, {"alpha": 1.5, "gamma": 0, "lambda": 1, "beta": 2}, "unknown parameters"),
            (Verb.EVAL, Target.PSI_GAMMA, {"alpha": "one", "gamma": 0, "lambda": 1}, "alpha: cannot read"),
            (Verb.SIMULATE, Target.DENSITY, {"alpha": 1.5, "delta": 0.8, "y": 1}, "not available"),
            (
                Verb.TABLE,
                Target.PSI_GAMMA,
                {"alpha": 1.5, "gamma": 0, "lambdamin": 0.1, "lambdamax": 1, "n": 1},
                "at least 2",
            ),
        ],
    )
    def test_rejected(self, verb, target, params, message):
        with pytest.raises(ValidationError, match=message):
            Command(verb=verb, target=target, params=params)

    def test_frozen(self):
        cmd = Command(verb=Verb.VERIFY, target=Target.ALL)
        with pytest.raises(ValidationError):
            cmd.verb = Verb.EVAL


class TestValidators:
    def test_validate_model_input_collects_errors(self):
        with pytest.raises(ConfigError) as info:
            validate_model_input(Command, {"verb": "eval", "target": "psi_gamma", "params": {"alpha": 1.5}})
        assert any("missing parameters" in e for e in info.value.errors)

    def test_validate_model_input_passes_valid_data(self):
        cmd = validate_model_input(Command, {"verb": "verify", "target": "all", "params": {"seed": "3"}})
        assert cmd.get("seed") == 3

    def test_config_section_lookup(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text(
            "[DEFAULT]\nalpha = 1.5\n\n[eval psi_gamma]\ngamma = 0\n\n[density]\ndelta = 0.8\n",
            encoding="utf-8",
        )
        assert load_config_section(str(path), "eval", "psi_gamma") == {"alpha": "1.5", "gamma": "0"}
        assert load_config_section(str(path), "table", "density") == {"alpha": "1.5", "delta": "0.8"}
        assert load_config_section(str(path), "eval", "wright") == {"alpha": "1.5"}
        assert load_config_section(None, "eval", "wright") == {}

    @pytest.mark.edge_cases
    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config_section(str(tmp_path / "absent.ini"), "eval", "wright")
