import json
import math
import random

import pytest

from fpqa_sat.device import (
    AodInit,
    AodTrap,
    Bind,
    DeviceError,
    DeviceSpec,
    FpqaState,
    RamanGlobal,
    RamanLocal,
    Rydberg,
    Shuttle,
    SlmInit,
    SlmTrap,
    Transfer,
    apply,
    check_invariants,
    default_config_text,
    instruction_time,
    load_device,
    replay,
    rydberg_components,
)

SPEC = DeviceSpec()


def base(slm=((0, 0), (20, 0), (40, 0)), xs=(0.0, 20.0), ys=(0.0,)):
    return replay([SlmInit(slm), AodInit(xs, ys)], SPEC)


def test_default_config_matches_dataclass():
    data = json.loads(default_config_text())
    data.pop("_comment", None)
    assert load_device() == DeviceSpec.from_dict(data)
    assert load_device() == DeviceSpec()


def test_overrides_and_unknown_keys():
    s = SPEC.with_overrides(**{"fidelities.f_cz": 0.99, "rydberg_distance": 12.0})
    assert s.fidelities.f_cz == 0.99 and s.rydberg_distance == 12.0
    assert s.fingerprint() != SPEC.fingerprint()
    with pytest.raises(ValueError):
        SPEC.with_overrides(bogus=1)
    with pytest.raises(ValueError):
        DeviceSpec.from_dict({"nope": 1})
    with pytest.raises(ValueError):
        SPEC.with_overrides(**{"fidelities.f_cz": 1.5})


def test_bind_and_transfer():
    s = base()
    s = apply(s, Bind(0, SlmTrap(0)), SPEC)
    s = apply(s, Transfer(0, 0, 0), SPEC)
    assert s.bindings[0] == AodTrap(0, 0)
    s = apply(s, Shuttle("row", 0, 10.0), SPEC)
    assert s.qubit_position(0) == (0.0, 10.0)
    check_invariants(s, SPEC)


@pytest.mark.parametrize(
    "instrs, constraint",
    [
        ([Bind(0, SlmTrap(9))], "unknown trap"),
        ([Bind(0, SlmTrap(0)), Bind(0, SlmTrap(1))], "qubit already bound"),
        ([Bind(0, SlmTrap(0)), Bind(1, SlmTrap(0))], "destination occupied"),
        ([Transfer(0, 0, 0)], "source empty"),
        ([Bind(0, SlmTrap(1)), Transfer(1, 0, 0)], "transfer distance"),
        ([Bind(0, SlmTrap(0)), Bind(1, AodTrap(0, 0))], "min distance"),
        ([Shuttle("column", 0, 30.0)], "column crossover"),
        ([Shuttle("column", 0, 17.0)], "min distance"),
        ([Shuttle("row", 3, 1.0)], "unknown row"),
        ([RamanLocal(4, 0, 0, 0)], "unknown qubit"),
        ([SlmInit(((0, 0),))], "already initialized"),
    ],
)
def test_precondition_violations(instrs, constraint):
    s = base()
    with pytest.raises(DeviceError) as exc:
        replay(instrs, SPEC, s)
    assert exc.value.constraint == constraint


def test_trap_spacing_and_capacity():
    with pytest.raises(DeviceError):
        replay([SlmInit(((0, 0), (1, 0)))], SPEC)
    tiny = SPEC.with_overrides(max_slm_traps=1)
    with pytest.raises(DeviceError) as exc:
        replay([SlmInit(((0, 0), (10, 0)))], tiny)
    assert exc.value.constraint == "device capacity"


def test_moving_row_drags_atoms_into_collision():
    s = base(slm=((0, 0), (0, 30)), xs=(0.0,), ys=(0.0,))
    s = replay([Bind(0, SlmTrap(0)), Transfer(0, 0, 0), Shuttle("row", 0, 12.0), Bind(1, SlmTrap(1))], SPEC, s)
    with pytest.raises(DeviceError) as exc:
        apply(s, Shuttle("row", 0, 15.0), SPEC)
    assert exc.value.constraint == "min distance"


def test_pulses_do_not_change_state():
    s = replay([Bind(0, SlmTrap(0))], SPEC, base())
    for instr in (RamanGlobal(1, 2, 3), Rydberg(), RamanLocal(0, 1, 2, 3)):
        assert apply(s, instr, SPEC) == s


def test_interaction_components():
    # atoms 1, 7, 8 form a triangle; 2 and 9 a pair; the rest are isolated
    slm = [(0, 0), (100, 0), (200, 0), (300, 0), (400, 0), (500, 0), (600, 0), (9, 0), (4.5, 7.8), (108, 0)]
    s = replay([SlmInit(slm)] + [Bind(q, SlmTrap(t)) for q, t in [(1, 0), (7, 7), (8, 8), (2, 1), (9, 9), (3, 2), (4, 3)]], SPEC)
    assert rydberg_components(s, SPEC) == [frozenset({1, 7, 8}), frozenset({2, 9})]


def test_instruction_times():
    spec = SPEC.with_overrides(move_speed=5.0)
    assert instruction_time(Shuttle("row", 0, -10.0), spec) == pytest.approx(2.0)
    assert instruction_time(Transfer(0, 0, 0), spec) == spec.durations.transfer
    assert instruction_time(Rydberg(), spec) == spec.durations.rydberg
    assert instruction_time(Bind(0, SlmTrap(0)), spec) == 0.0


def test_state_is_immutable():
    s = base()
    s2 = apply(s, Bind(0, SlmTrap(0)), SPEC)
    assert s.bindings == {} and s2.bindings == {0: SlmTrap(0)}


def test_random_instruction_fuzz_keeps_invariants():
    rng = random.Random(3)
    slm = [(x * 10.0, y * 10.0) for x in range(6) for y in range(3)]
    errors = ok = 0
    for _ in range(300):
        s = replay([SlmInit(slm), AodInit((0.0, 10.0, 20.0), (0.0, 10.0))], SPEC)
        for _ in range(25):
            k = rng.randrange(5)
            if k == 0:
                instr = Bind(rng.randrange(8), SlmTrap(rng.randrange(len(slm))))
            elif k == 1:
                instr = Bind(rng.randrange(8), AodTrap(rng.randrange(2), rng.randrange(3)))
            elif k == 2:
                instr = Transfer(rng.randrange(len(slm)), rng.randrange(2), rng.randrange(3))
            elif k == 3:
                instr = Shuttle(rng.choice(["row", "column"]), rng.randrange(3), rng.choice([-10.0, -5.0, 5.0, 10.0, 1.5]))
            else:
                instr = RamanLocal(rng.randrange(8), 0.1, 0.2, 0.3)
            try:
                s = apply(s, instr, SPEC)
                ok += 1
            except DeviceError:
                errors += 1
            check_invariants(s, SPEC)
    assert ok > 0 and errors > 0


def test_empty_state():
    assert rydberg_components(FpqaState(), SPEC) == []
    check_invariants(FpqaState(), SPEC)
    assert math.isfinite(SPEC.triangle_side)
