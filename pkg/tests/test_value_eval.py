from __future__ import annotations

import random

from hypothesis import given, settings, strategies as st

from lolisa.env import Env
from lolisa.outcome import Error, Some
from lolisa.parser import parse_value
from lolisa.types import TINT
from lolisa.value_eval import eval_value, map_length
from lolisa.values import MInt

from containers import Shape, random_script, random_shapes, run_script
from helpers import addr, run

PROGRAM = """
(Var public (Evar m (Tmap Iint Tint))) ;;
(Var public (Evar arr (Tarray (Aconst_id 3) Tint))) ;;
(Assignv (Econst (Vmap m (Mconst_id (Vint 5)) Iint Tint None)) (Econst (Vint 7))) ;;
(Assignv (Econst (Vmap m (Mconst_id (Vint 2)) Iint Tint None)) (Econst (Vint 1))) ;;
(Assignv (Econst (Vmap m (Mconst_id (Vint 5)) Iint Tint None)) (Econst (Vint 8))) ;;
(Assignv (Econst (Varray (Aconst_id 2) Tint arr)) (Econst (Vint 9)))
"""


def _eval(text):
    r, _, loaded = run(PROGRAM)
    return eval_value(r.sigma, Env(gas=1), parse_value(text, loaded.program.names))


def test_mapping_lookup():
    assert _eval("(Vmap m (Mconst_id (Vint 5)) Iint Tint None)") == Some(MInt(8, TINT))


def test_missing_key_is_an_error():
    r = _eval("(Vmap m (Mconst_id (Vint 3)) Iint Tint None)")
    assert isinstance(r, Error)


def test_overwrite_keeps_one_bucket_per_key():
    r, _, loaded = run(PROGRAM)
    assert map_length(r.sigma, addr(loaded, "m")) == 2


def test_array_element_and_range():
    assert _eval("(Varray (Aconst_id 2) Tint arr)") == Some(MInt(9, TINT))
    assert _eval("(Varray (Aconst_id 0) Tint arr)") == Some(MInt(None, TINT))
    r = _eval("(Varray (Aconst_id 3) Tint arr)")
    assert isinstance(r, Error) and r.tag == "out-of-range"


def test_nested_mapping_write_creates_inner_levels():
    shape = Shape("t", "map", (0, 0, 0))
    ops = [("w", shape, (1, 2, 3), 8), ("r", shape, (1, 2, 3), None), ("r", shape, (1, 2, 4), None),
           ("r", shape, (1, 3, 3), None)]
    assert run_script([shape], ops) == []


def test_two_dimensional_array():
    shape = Shape("b", "array", (2, 3))
    ops = [("w", shape, (1, 2), 4), ("r", shape, (1, 2), None), ("r", shape, (0, 2), None),
           ("w", shape, (2, 0), 1), ("r", shape, (1, 3), None)]
    assert run_script([shape], ops) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_random_scripts_agree_with_the_oracle(seed):
    rng = random.Random(seed)
    shapes = random_shapes(rng)
    assert run_script(shapes, random_script(rng, shapes, 10)) == []
