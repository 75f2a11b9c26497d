import pytest
from hypothesis import HealthCheck, given, settings

from parcub.errors import Code, Diagnostic, Span
from parcub.frontend.elaborate import Session
from parcub.frontend.lexer import tokenize
from parcub.frontend.parser import SApp, SDimApp, SKw, SName, parse_file, parse_term
from parcub.frontend.printer import Printer
from parcub.interval import B0, BVar, BridgeEq, P0, PVar, PathEq
from parcub.syntax import (
    Ann, App, BApp, Bool, Def, HCom, Lam, PApp, Pi, Sigma, TT, U, Var, lam, pi,
)

from .strategies import open_scope, terms


# -- lexer -----------------------------------------------------------------

def test_lexer_tokens_and_positions():
    toks = tokenize("def f : U =\n  p @@ #0 -- note\n")
    kinds = [(t.kind, t.text) for t in toks]
    assert kinds == [("kw", "def"), ("ident", "f"), ("sym", ":"), ("kw", "U"), ("sym", "="),
                     ("ident", "p"), ("sym", "@@"), ("sym", "#0"), ("eof", "")]
    assert toks[5].span == Span(2, 3)


def test_lexer_rejects_stray_characters():
    with pytest.raises(Diagnostic) as e:
        tokenize("a $ b")
    assert e.value.code is Code.LexError and e.value.span == Span(1, 3)


# -- parser ----------------------------------------------------------------

def test_application_and_dimension_postfix():
    t = parse_term("f a @ i b")
    assert isinstance(t, SApp) and isinstance(t.fn, SDimApp) and not t.fn.bridge


def test_keyword_arity():
    t = parse_term("coe (i. A) 0 1 M")
    assert isinstance(t, SKw) and t.kw == "coe" and len(t.args) == 4


def test_arrow_is_right_associative():
    t = Session().term("bool -> bool -> bool")
    assert isinstance(t, Pi) and isinstance(t.cod, Pi)


def test_product_binds_tighter_than_arrow():
    t = Session().term("bool * bool -> bool")
    assert isinstance(t, Pi) and isinstance(t.dom, Sigma)


def test_parse_error_lists_expectations():
    with pytest.raises(Diagnostic) as e:
        parse_term("lam . a")
    assert e.value.code is Code.ParseError
    assert "identifier" in e.value.message and e.value.span == Span(1, 5)


def test_declarations():
    (d,) = parse_file("def f (i : I) (x : #I) (A : U) : A -> A = lam a. a")
    assert [p.sort for p in d.params] == ["p", "b", "t"]


# -- elaboration -----------------------------------------------------------

def test_definition_references_take_dims_first():
    s = Session()
    s.load("def k (i : I) (A : U) : A -> A = lam a. a")
    t = s.term("k 0 bool tt")
    assert t == App(App(Def("k", (P0,)), Bool()), TT())


def test_locals_shadow_definitions():
    s = Session()
    s.load("def f : bool = tt")
    t = s.term("lam f. f")
    assert isinstance(t, Lam) and t.body != Def("f")


def test_unbound_and_sort_errors():
    s = Session()
    with pytest.raises(Diagnostic) as e:
        s.term("nope")
    assert e.value.code is Code.UnboundVariable
    with pytest.raises(Diagnostic) as e:
        s.term("plam i. i")
    assert e.value.code is Code.TypeMismatch


def test_bridge_constraints_accept_either_side():
    s = Session()
    t = s.term("hcom bool 0 1 tt [x = 0 -> _. tt | #1 = y -> _. tt]", [("x", "b"), ("y", "b")])
    assert [tb.cond for tb in t.sys] == [BridgeEq(BVar("x"), 0), BridgeEq(BVar("y"), 1)]


def test_plain_atom_is_a_constant_family():
    s = Session()
    assert s.term("Path bool tt tt") == s.term("Path (_. bool) tt tt")


def test_dimension_params_must_come_first():
    results = Session().load("def f (A : U) (i : I) : U = A")
    assert results[0].error.code is Code.ParseError


def test_term_params_need_a_type():
    results = Session().load("def f (A : U) = A")
    assert results[0].error.code is Code.CannotInfer


def test_duplicate_definitions():
    results = Session().load("def f : bool = tt\ndef f : bool = ff")
    assert results[0].error is None and results[1].error.code is Code.DuplicateDefinition


def test_failed_definition_is_not_added():
    s = Session()
    results = s.load("def f : bool = star\ndef g : bool = f")
    assert results[0].error.code is Code.TypeMismatch
    assert results[1].error.code is Code.UnboundVariable
    assert results[1].error.span == Span(2, 16)


def test_untyped_large_alias():
    s = Session()
    s.load("def T = Pi (A : U) A -> A\ndef id : T = lam A a. a")
    assert s.defs["T"].type is None and "id" in s.defs


# -- printer ---------------------------------------------------------------

def test_printer_examples():
    s = Session()
    show = Printer()
    assert show(s.term("lam (a : bool). a")) == "lam (a : bool). a"
    assert show(s.term("bool -> bool * bool")) == "bool -> bool * bool"
    assert show(s.term("(bool -> bool) * bool")) == "(bool -> bool) * bool"
    assert show(s.term("Pi (A : U) A -> A")) == "Pi (A : U) A -> A"
    assert show(s.term("plam i. hcom bool i 1 tt [i = 0 -> _. tt]")) == \
        "plam i. hcom bool i 1 tt [i = 0 -> _. tt]"


def test_printer_avoids_capture():
    # the inner binder's hint would capture the outer variable
    t = lam("a", lam("a#9", App(Var("a"), Var("a#9"))))
    out = Printer().show(t)
    assert out == "lam a. lam a1. a a1"
    assert Session().term(out) == t


def test_printer_avoids_definition_names():
    s = Session()
    s.load("def x : bool = tt")
    t = lam("x", App(Def("x"), Var("x")))
    out = s.printer.show(t)
    assert out == "lam x1. x x1"
    assert s.term(out) == t


def test_printer_marks_unused_binders():
    assert Printer().show(lam("a", TT())) == "lam _. tt"


@given(terms(open_scope(), depth=4))
@settings(max_examples=400, suppress_health_check=[HealthCheck.too_slow])
def test_print_parse_roundtrip(t):
    text = Printer().show(t)
    back = Session().term(text, open_scope())
    assert back == t, text
