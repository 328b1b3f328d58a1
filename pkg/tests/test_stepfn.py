"""Step function cell tables: operators, inner products, serialization."""

import cmath
import io
import math

import numpy as np
import pytest

from walshframes.algebra import FieldConfig, SystemConfig, chi, uindex
from walshframes.errors import InputDataError, ResolutionError
from walshframes.stepfn import (
    PeriodicStepFunction,
    StepFunction,
    dilate,
    dump_csv,
    indicator,
    inner,
    load_csv,
    modulate,
    prune,
    refine,
    translate,
    unit_ball,
)

F2 = FieldConfig(2)
F3 = FieldConfig(3)
F4 = FieldConfig(2, 2)


def random_step(cfg, resolution, rng, ball=0):
    """Dense random complex step function on B^ball at a given resolution."""
    f = refine(indicator(cfg, ball, cfg.zero()), resolution)
    cells = {}
    for rep, _ in f.items_sorted():
        cells[rep] = complex(rng.standard_normal(), rng.standard_normal())
    return StepFunction(cfg, resolution, cells)


# ----------------------------------------------------------- construction --

def test_indicator_and_unit_ball():
    one = unit_ball(F2)
    assert one.resolution == 0
    assert one.norm2() == 1.0
    cell = indicator(F2, 2, F2.element({0: 1, 3: 1}))  # t^3 lies above res 2
    assert list(cell.cells) == [F2.element({0: 1})]


def test_constructor_rejects_non_canonical_rep():
    with pytest.raises(ValueError):
        StepFunction(F2, 1, {F2.element({1: 1}): 1.0})


def test_zero_amplitudes_dropped():
    f = StepFunction(F2, 0, {F2.zero(): 0.0})
    assert f.is_zero
    assert f.norm2() == 0.0


# -------------------------------------------------------------- operators --

def test_translate_moves_cells():
    f = translate(unit_ball(F2), uindex(F2, 1))
    assert list(f.cells) == [uindex(F2, 1)]
    back = translate(f, -uindex(F2, 1))
    assert back == unit_ball(F2)


def test_translate_preserves_norm_exactly():
    rng = np.random.Generator(np.random.PCG64(7))
    f = random_step(F3, 3, rng)
    assert translate(f, uindex(F3, 4)).norm2() == f.norm2()


def test_modulate_haar_character():
    g = modulate(unit_ball(F2), uindex(F2, 1))
    assert g.resolution == 1
    assert g.cells[F2.zero()] == pytest.approx(1.0)
    assert g.cells[F2.one()] == pytest.approx(-1.0)


def test_modulate_by_integral_element_is_identity():
    f = unit_ball(F2)
    assert modulate(f, F2.zero()) == f
    assert modulate(f, F2.one()) == f  # chi trivial on D


def test_modulate_preserves_norm():
    rng = np.random.Generator(np.random.PCG64(8))
    f = random_step(F3, 2, rng)
    g = modulate(f, uindex(F3, 5))
    assert g.norm2() == pytest.approx(f.norm2(), abs=1e-12)


def test_dilate_fine_haar():
    sys = SystemConfig(F2, N=1, r=1)
    g = dilate(unit_ball(F2), sys, "fine")
    assert g.resolution == 1
    assert list(g.cells) == [F2.zero()]
    assert g.cells[F2.zero()] == pytest.approx(math.sqrt(2))


def test_dilate_with_nontrivial_unit():
    sys = SystemConfig(F3, N=2, r=1)  # nu = 2
    f = indicator(F3, 0, uindex(F3, 1))
    g = dilate(f, sys, "fine")
    assert g.resolution == 1
    assert list(g.cells) == [F3.element({0: 2})]
    assert g.cells[F3.element({0: 2})] == pytest.approx(math.sqrt(3))


def test_dilate_round_trip_and_isometry():
    rng = np.random.Generator(np.random.PCG64(9))
    for cfg, N in ((F2, 1), (F2, 3), (F3, 2)):
        sys = SystemConfig(cfg, N=N, r=1)
        f = random_step(cfg, 2, rng)
        g = dilate(f, sys, "fine")
        assert g.norm2() == pytest.approx(f.norm2(), rel=1e-12)  # unitary mode
        assert dilate(g, sys, "coarse").allclose(f, 1e-12)


def test_dilate_qn_mode_amplitude():
    sys = SystemConfig(F2, N=3, r=1, normalization="qn")
    g = dilate(unit_ball(F2), sys, "fine")
    assert g.cells[F2.zero()] == pytest.approx(math.sqrt(6))


def test_refine_preserves_norm_and_splits():
    rng = np.random.Generator(np.random.PCG64(10))
    f = random_step(F2, 1, rng)
    g = refine(f, 4)
    assert g.resolution == 4
    assert len(g.cells) == len(f.cells) * 2 ** 3
    assert g.norm2() == pytest.approx(f.norm2(), rel=1e-14)
    with pytest.raises(ResolutionError):
        refine(f, 0)


def test_inner_basic_values():
    assert inner(unit_ball(F2), unit_ball(F2)) == 1.0
    ball = indicator(F2, 1, F2.zero())  # 1_B
    assert inner(unit_ball(F2), ball) == pytest.approx(0.5)
    a = indicator(F2, 0, uindex(F2, 1))
    b = indicator(F2, 0, uindex(F2, 2))
    assert inner(a, b) == 0.0  # disjoint supports: exactly zero


def test_inner_matches_norm2():
    rng = np.random.Generator(np.random.PCG64(11))
    f = random_step(F4, 2, rng)
    assert inner(f, f) == pytest.approx(f.norm2(), rel=1e-14)
    assert f.norm2() == pytest.approx(
        sum(abs(v) ** 2 for v in f.cells.values()) * F4.q ** -2.0)


def test_inner_conjugate_symmetry_and_linearity():
    rng = np.random.Generator(np.random.PCG64(12))
    f = random_step(F3, 2, rng)
    g = random_step(F3, 3, rng)
    assert inner(f, g) == pytest.approx(inner(g, f).conjugate(), rel=1e-12)
    h = f + g.scale(2 - 1j)
    hh = inner(h, h)
    assert hh.real >= 0 and abs(hh.imag) < 1e-14
    assert inner(h, g) == pytest.approx(inner(f, g) + (2 - 1j) * inner(g, g), rel=1e-12)


def test_commutation_translate_modulate():
    # T_a E_b = conj(chi(b a)) E_b T_a
    rng = np.random.Generator(np.random.PCG64(13))
    for cfg in (F2, F3):
        f = random_step(cfg, 2, rng)
        for a, b in [(uindex(cfg, 1), uindex(cfg, 2)),
                     (cfg.one(), uindex(cfg, 3)),
                     (uindex(cfg, 2), uindex(cfg, 1) + cfg.one())]:
            lhs = translate(modulate(f, b), a)
            rhs = modulate(translate(f, a), b).scale(chi(b * a).conjugate())
            assert lhs.allclose(rhs, 1e-12)


def test_support_ball():
    assert unit_ball(F2).support_ball() == 0
    assert indicator(F2, 1, F2.zero()).support_ball() == 1
    f = StepFunction(F2, 0, {uindex(F2, 2): 1.0, F2.zero(): 2.0})
    assert f.support_ball() == -2
    assert StepFunction(F2, 3, {}).support_ball() == 3


def test_add_refines_to_common_resolution():
    f = unit_ball(F2)
    g = indicator(F2, 1, F2.one()).scale(3.0)
    h = f + g
    assert h.resolution == 1
    assert h.cells[F2.one()] == pytest.approx(4.0)
    assert h.cells[F2.zero()] == pytest.approx(1.0)


# ------------------------------------------------------------ serialization --

def test_csv_round_trip():
    rng = np.random.Generator(np.random.PCG64(14))
    for cfg in (F2, F4):
        f = random_step(cfg, 3, rng)
        buf = io.StringIO()
        dump_csv(f, buf)
        buf.seek(0)
        g = load_csv(buf)
        assert g == f  # exact: repr round-trip of doubles
        assert g.cfg == cfg


def test_csv_negative_exponent_reps():
    f = StepFunction(F2, 1, {uindex(F2, 3): 1.5 - 2.5j})
    buf = io.StringIO()
    dump_csv(f, buf)
    buf.seek(0)
    assert load_csv(buf) == f


def test_csv_rejects_malformed_rows():
    buf = io.StringIO("# walshframes-stepfn v1 p=2 c=1 modulus=- resolution=1\n"
                      "lo,digits,re,im\n"
                      "0,1,notafloat,0\n")
    with pytest.raises(InputDataError) as err:
        load_csv(buf)
    assert "line 3" in str(err.value)


def test_csv_rejects_bad_header():
    buf = io.StringIO("lo,digits,re,im\n")
    with pytest.raises(InputDataError):
        load_csv(buf)


# ------------------------------------------------------------- periodic type --

def test_periodic_from_complete_table():
    vals = np.array([1.0, 2.0, 3.0, 4.0], dtype=complex)
    f = PeriodicStepFunction(F2, 2, vals)
    assert f.norm2() == pytest.approx((1 + 4 + 9 + 16) / 4)
    # index order: digit at exponent 0 is most significant
    assert f.rep_of_index(0b10) == F2.one()  # digits (1, 0) -> 1*t^0


def test_periodic_index_rep_round_trip():
    f = PeriodicStepFunction(F3, 3, np.zeros(27, dtype=complex))
    for idx in range(27):
        assert f.index_of_rep(f.rep_of_index(idx)) == idx


def test_periodic_refine_repeats():
    f = PeriodicStepFunction(F2, 1, np.array([1.0, 2.0], dtype=complex))
    g = f.refine(3)
    assert g.resolution == 3
    assert list(g.values.real.astype(int)) == [1, 1, 1, 1, 2, 2, 2, 2]
    assert g.norm2() == pytest.approx(f.norm2())


def test_periodic_inner_mixed_resolution():
    rng = np.random.Generator(np.random.PCG64(15))
    a = PeriodicStepFunction(F2, 2, rng.standard_normal(4) + 1j * rng.standard_normal(4))
    b = PeriodicStepFunction(F2, 4, rng.standard_normal(16) + 1j * rng.standard_normal(16))
    direct = a.refine(4).inner(b)
    assert a.inner(b) == pytest.approx(direct, rel=1e-14)


def test_periodic_step_conversion():
    rng = np.random.Generator(np.random.PCG64(16))
    vals = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    f = PeriodicStepFunction(F2, 3, vals)
    g = f.to_step()
    assert g.norm2() == pytest.approx(f.norm2(), rel=1e-14)
    assert PeriodicStepFunction.from_step(g).allclose(f, 0)
    with pytest.raises(ValueError):
        PeriodicStepFunction.from_step(
            StepFunction(F2, 0, {uindex(F2, 1): 1.0}))  # support leaves D


def test_prune_drops_small_amplitudes():
    f = StepFunction(F2, 1, {F2.zero(): 1.0, F2.one(): 1e-15})
    g = prune(f, 1e-14)
    assert g.cells == {F2.zero(): 1.0}
    assert prune(f) == f
    with pytest.raises(ValueError):
        prune(f, -1.0)
