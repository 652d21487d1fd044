"""Acceptance criteria 1-8, one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines go straight to the
terminal so they are visible without ``-s``.
"""

import time

import pytest

from crcalc import catalog
from crcalc.calculus.frame import FrameCalculus
from crcalc.calculus.limit import divisibility, limit_n, to_frame
from crcalc.calculus.operators import expand_definition, parse_ph
from crcalc.calculus.ph import REGISTRY, PHCalculus, assume
from crcalc.models import moment_gate, verify_model_identity
from crcalc.models.identities import COVARIANCE_SIGMAS
from crcalc.tensor.expr import TensorExpr
from crcalc.tractor import extract_paneitz, paneitz_tractor, verify_tractor

PLURIHARMONIC_SIGMAS = ("0", "Re(z1)", "Re(z1*z2)")
NON_PLURIHARMONIC_SIGMAS = ("z1*z1b",)


@pytest.fixture
def line(capsys):
    def emit(k, ok, text):
        with capsys.disabled():
            print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'} {text}")
        assert ok, text
    return emit


def _failures(reps):
    return [r.line() for r in reps if not r.as_expected]


def test_criterion_1_symbolic_catalog(line):
    symbolic = ["lemma21_hh", "lemma21_mixed", "lemma21_reeb", "lemma21_form", "subplacian_R",
                "subplacian_squared", "grahamlee", "divtrfreep", "cr_prod", "u_pluriharmonic",
                "v_second_form", "v_third_form", "v_pseudo_einstein"]
    conformal = ["Walpha", "D_covariant", "q_operator_covariant", "bochner", "general_q4prime"]
    t = time.time()
    reps = [catalog.verify_identity(i, suite="identities") for i in symbolic]
    reps += [catalog.verify_identity(i, suite="covariance") for i in conformal]
    elapsed = time.time() - t
    bad = [r.line() for r in reps if not r.verified]
    line(1, not bad and elapsed < 60,
         f"{len(reps) - len(bad)}/{len(reps)} identities with zero residual in {elapsed:.1f} s"
         + (f"; failing: {bad}" if bad else ""))


def test_criterion_2_limits(line):
    p4 = assume(parse_ph("P4(f)"), "pluriharmonic(f)")
    d1 = divisibility(p4)
    d2 = divisibility(assume(parse_ph("P4(1)"), "pseudo-einstein"))
    limits = [catalog.verify_identity(i) for i in ("q_crit", "q4prime_crit")]
    ok = d1 >= 1 and d2 >= 2 and all(r.verified for r in limits)
    # the limit of the general critical operator is the critical display
    gen = limit_n(PHCalculus(("pluriharmonic(f)",)).nf(parse_ph("P4prime(f)")), 1)
    crit = parse_ph("P4prime_crit(f)")
    ok = ok and FrameCalculus(("pluriharmonic(f)",)).nf(to_frame(gen) - to_frame(crit)).is_zero()
    line(2, ok, f"(n-1)-adic orders {d1} and {d2}; limits "
         + ", ".join(f"{r.id}={r.status}" for r in limits))


def test_criterion_3_tractor(line):
    f = TensorExpr.factor("f", registry=REGISTRY)
    calc = PHCalculus()
    t = paneitz_tractor().normal_form(calc)
    upper = t.sigma.is_empty() and t.tau.is_empty()
    residual = calc.nf(extract_paneitz() - expand_definition("P4", f))
    n1 = verify_tractor("tractor_paneitz_n1")
    assembly = verify_tractor("fefferman_assembly")
    corrected = verify_tractor("fefferman_assembly_corrected")
    emitted = assembly.verified or bool(assembly.residual)
    ok = upper and residual.is_empty() and n1.verified and emitted and corrected.verified
    line(3, ok, f"upper slots vanish={upper}, extraction residual zero={residual.is_empty()}, "
         f"n=1 equals C={n1.verified}; assembly residual emitted verbatim ({len(assembly.residual or '')}"
         f" chars), corrected assembly {corrected.status}")


def test_criterion_4_sphere_operator(line):
    reps = [verify_model_identity("sphere_p4prime", {"max_degree": 6}),
            verify_model_identity("q4prime_models")]
    bad = _failures(reps)
    line(4, not bad, "P4' = 4 Delta_b^2 + 2 Delta_b on pluriharmonics of degree <= 6; "
         "Q' = 1 on the sphere and 0 on the Heisenberg group" + (f"; {bad}" if bad else ""))


def test_criterion_5_covariance(line):
    reps = []
    for s in COVARIANCE_SIGMAS:
        cfg = {"sigma": s}
        reps += [verify_model_identity("general_q4prime", cfg),
                 verify_model_identity("p4prime_genl_transformation", cfg)]
    for s in PLURIHARMONIC_SIGMAS:
        reps.append(verify_model_identity("qprime_operator_covariant", {"sigma": s}))
        if s != "0":
            reps.append(verify_model_identity("qprime_total_invariance", {"sigma": s}))
    for s in NON_PLURIHARMONIC_SIGMAS:
        reps.append(verify_model_identity("general_integral_q4prime", {"sigma": s}))
    printed = verify_model_identity("p4prime_genl_transformation_literal")
    bad = [r.line() for r in reps if not r.verified]
    ok = not bad and not printed.verified
    line(5, ok, f"{len(reps) - len(bad)}/{len(reps)} checks over sigma in {list(COVARIANCE_SIGMAS)} "
         "with the -16 Re coefficient; the printed -8 Re form fails as expected"
         f" ({printed.status})" + (f"; failing: {bad}" if bad else ""))


def test_criterion_6_self_adjoint_positive(line):
    reps = [verify_model_identity("self_adjoint", {"degree": 4}),
            verify_model_identity("prop49_energy"),
            verify_model_identity("positivity_kernel", {"degree": 4})]
    printed = verify_model_identity("prop49_energy_literal")
    bad = [r.line() for r in reps if not r.verified]
    ok = not bad and not printed.verified
    line(6, ok, f"self-adjoint on {reps[0].details['pairs']} pairs; energy identity with R|grad u|^2 "
         f"coefficient 4 (value {reps[1].exact_value}); form >= 0, kernel = constants on "
         f"{reps[2].details['size']} functions; printed 2R form fails as expected ({printed.status})"
         + (f"; failing: {bad}" if bad else ""))


def test_criterion_7_structures(line):
    reps = [verify_model_identity(i)
            for i in ("structure_residuals", "lemma33_closed", "pluriharmonic_factor")]
    bad = _failures(reps)
    line(7, not bad and all(r.verified for r in reps),
         "structure residuals zero; closed form on pluriharmonic factors, not closed for z1*z1b"
         + (f"; {bad}" if bad else ""))


def test_criterion_8_moments(line):
    t = time.time()
    ok, worst, bad = moment_gate(max_degree=8, samples=10**6, seed=0, tol=0.01)
    line(8, ok, f"all moments of degree <= 8 within 1% (worst {worst:.2e}) from 10^6 samples "
         f"in {time.time() - t:.1f} s" + (f"; failing: {bad[:3]}" if bad else ""))
