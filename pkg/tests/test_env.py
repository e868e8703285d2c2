from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from lolisa.env import (
    STATEMENT_KINDS, Env, GasTable, env_check, init_env, parse_gas_config, set_env, set_gas,
)
from lolisa.parser import parse
from lolisa.types import LabelAddress

C = LabelAddress(0x20)


def test_default_table_charges_one_per_step():
    t = GasTable()
    assert t.of("Snil") == 0 and t.of("Seq") == 0
    assert all(t.of(k) == 1 for k in STATEMENT_KINDS if k not in ("Snil", "Seq"))


def test_snil_must_be_free():
    with pytest.raises(ValueError):
        GasTable({"Snil": 1})
    with pytest.raises(ValueError):
        GasTable({"If": -1})


@given(st.integers(min_value=0, max_value=100), st.integers(min_value=0, max_value=5))
def test_set_gas_charges_or_fails(gas, cost):
    r = set_gas("If", Env(gas=gas), GasTable({"If": cost}))
    if cost > gas:
        assert r.is_none
    else:
        assert r.value.gas == gas - cost


def test_zero_budget_fails_the_first_costed_step():
    assert set_gas("Assignv", Env(gas=0), GasTable()).is_none
    assert set_gas("Snil", Env(gas=0), GasTable()).value.gas == 0


def test_env_check_needs_gas_above_the_limit():
    fenv = Env(gas=10)
    assert not env_check(Env(gas=10), fenv)
    assert env_check(Env(gas=11), fenv)


def test_env_check_rejects_a_level_change_in_the_same_domain():
    fenv = Env(dom_current=C, dom_level=1, gas=0)
    assert not env_check(Env(dom_current=C, dom_level=0, gas=5), fenv)
    assert env_check(Env(dom_current=C, dom_level=1, gas=5), fenv)


def test_set_env_records_the_previous_domain():
    e = set_env(Env(gas=3), 1, C)
    assert (e.dom_level, e.dom_current, e.dom_super, e.gas) == (1, C, None, 3)
    assert set_env(e, 1, C) is e


def test_init_env_splits_budget_and_limit():
    env, fenv = init_env(parse("Snil").parsed, 10, 100)
    assert env.gas == 100 and fenv.gas == 10


def test_init_env_collects_inheritance():
    src = parse("(Contract A () Snil) ;; (Contract B (A) Snil)")
    env, _ = init_env(src.parsed, 0, 1)
    assert env.inhers == (src.names.by_name["A"],)


def test_gas_config_file():
    cfg = parse_gas_config("# costs\ngas.LoopWhile=2\ngas.budget=50\ngas.limit=0\n")
    assert cfg.table.of("LoopWhile") == 2 and cfg.budget == 50 and cfg.limit == 0


@pytest.mark.parametrize("text", ["gas.Nope=1", "LoopWhile=1", "gas.If=x"])
def test_gas_config_rejects_bad_lines(text):
    with pytest.raises(ValueError):
        parse_gas_config(text)


def test_env_rejects_bad_fields():
    with pytest.raises(ValueError):
        Env(dom_level=3)
    with pytest.raises(ValueError):
        Env(gas=-1)
