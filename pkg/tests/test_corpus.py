"""The example corpus: every positive file checks, every negative file fails
with its declared code, and closed definitions have known normal forms."""

import pytest

from parcub.conversion import normalize
from parcub.frontend.elaborate import Session
from parcub.interval import Context, PVar
from parcub.opsem import Machine
from parcub.syntax import Def

from . import criteria
from .conftest import NEGATIVE, POSITIVE, expected_code, loaded, param_dims


@pytest.mark.parametrize("path", POSITIVE, ids=lambda p: p.stem)
def test_positive_file_checks(path):
    _, results = loaded(path)
    assert results
    assert [r.error for r in results if r.error] == []


@pytest.mark.parametrize("path", NEGATIVE, ids=lambda p: p.stem)
def test_negative_file_fails_with_expected_code(path):
    results = Session().load(path.read_text())
    errors = [r.error for r in results if r.error]
    assert len(errors) == 1
    assert errors[0].code.value == expected_code(path)
    assert errors[0].span is not None


FROZEN = [
    ("church_bool", "roundtrip_tt", "tt"),
    ("church_bool", "roundtrip_ff", "ff"),
    ("church_bool", "roundtrip_church_tt", "tt"),
    ("bridge_funext", "not_related_end", "ff"),
    ("gel_beta_eta", "gel_closed", "tt"),
    ("gel_beta_eta", "gel_left_val", "tt"),
    ("gel_beta_eta", "gel_roundtrip", "ff"),
    ("lem_refutation", "const_closed", "tt"),
    ("loosen_tighten_bool", "tighten_refl_tt", "tt"),
    # open bridge or path dimensions leave formal composites with undecided tubes
    ("loosen_tighten_bool", "loosen_tt", "hcom bool 0 1 tt [x = 0 -> _. tt | x = 1 -> _. tt]"),
    ("loosen_tighten_bool", "bfe_tt", "hcom bool 0 1 tt [x = 0 -> _. tt | x = 1 -> _. tt]"),
    ("loosen_tighten_bool", "join_corner",
     "hcom bool 1 0 tt [i = 0 -> k. hcom bool 1 j tt [k = 0 -> _. tt | k = 1 -> _. tt] | i = 1 -> _. tt"
     " | j = 0 -> k. hcom bool 1 i tt [k = 0 -> _. tt | k = 1 -> _. tt] | j = 1 -> _. tt]"),
    ("v_boundary", "vin_left", "tt"),
    ("v_boundary", "vin_right", "ff"),
    ("v_boundary", "vproj_left", "ff"),
    ("v_boundary", "vproj_right", "ff"),
    ("v_boundary", "v_proj", "ff"),
    ("z2_elim", "z2_closed", "tt"),
    ("z2_elim", "z2_const_loop", "tt"),
    ("z2_elim", "z2_loop_closed", "zin 7"),
    ("z2_elim", "z2_shift_closed", "zin 3"),
    ("z2_elim", "z2_on_loop", "zmod 3 i"),
    ("z2_elim", "z2_fhcom", "hcom z2 0 1 (zin 0) []"),
    ("z2_elim", "z2_fhcom_elim", "hcom z2 0 1 (zin 0) []"),
]


def _session(stem):
    return criteria._session(stem)


@pytest.mark.parametrize("stem,name,want", FROZEN, ids=[f"{a}.{b}" for a, b, _ in FROZEN])
def test_frozen_normal_forms(stem, name, want):
    s = _session(stem)
    d = s.defs[name]
    dims, ctx = param_dims(d)
    got = normalize(ctx, Def(name, dims), s.defs)
    # parameter names are printed by their base name
    assert s.printer(got) == want


@pytest.mark.parametrize("stem,name,dims,want", [
    ("loosen_tighten_bool", "lt_tt_square", "0,#0", "tt"),
    ("z2_elim", "z2_fhcom_square", "1", "zin 2"),
    ("z2_elim", "z2_fhcom_square", "0", "zin 0"),
    ("loosen_tighten_bool", "join_corner", "0,1", "tt"),
    ("loosen_tighten_bool", "bfe_tt", "#1", "tt"),
])
def test_cli_eval_values(stem, name, dims, want):
    code, out, _ = criteria._cli("eval", str(criteria._corpus()[0] / f"{stem}.ptt"), "--def", name, "--dims", dims)
    assert (code, out.strip()) == (0, want)


def test_fhcom_square_stays_formal_on_open_dimension():
    s = _session("z2_elim")
    v = Machine(s.defs).eval(Def("z2_fhcom_square", (PVar("i"),)))
    assert s.printer(v).startswith("hcom z2 0 1 (zmod 0 i) [i = 0 ->")


def test_bridge_eta_is_only_propositional():
    from parcub.conversion import conv
    from parcub.syntax import PathT

    s = _session("bridge_funext")
    ctx, cod = criteria._open_pis(s, Context(), s.defs["bfunext_eta"].type)
    assert isinstance(cod, PathT)
    assert not conv(ctx, cod.line, cod.lhs, cod.rhs, s.defs)


def test_church_bool():
    criteria.church_bool()


def test_loosen_tighten():
    criteria.loosen_tighten()


def test_wlem_refutation():
    criteria.wlem()


def test_bridge_funext():
    criteria.bridge_funext()


def test_coherence():
    criteria.coherence(samples=30, seed=1)


def test_canonicity():
    criteria.canonicity()


def test_negative_codes_through_cli():
    criteria.negatives()


def test_subject_reduction_and_determinism():
    criteria.subject_reduction()
