#include <catch2/catch_amalgamated.hpp>

#include "rezk/kan.hpp"
#include "support/problems.hpp"

using namespace rezk;
using namespace rezk::testgen;

namespace {

/// Recompute every stored certificate equation from scratch; a certificate
/// must never disagree with recomputation.
void recheck(const CompletionHandle& h, const Certificate& cert) {
  for (const auto& e : cert.entries) {
    REQUIRE(h.eq(e.left, e.right) == e.pass);
    REQUIRE(term_eq(h.norm(e.left), e.left));
    REQUIRE(term_eq(h.norm(e.right), e.right));
  }
}

}  // namespace

TEST_CASE("wcom on the false cofibration extends the empty partial element") {
  CompletionHandle h = complete(set_ab());
  Term a = ob_term(h.pres(), intern("a"), DimCtx());
  FillingProblem p;
  p.fillDim = intern("z");
  p.r = IntervalExpr::end0();
  p.s = IntervalExpr::end1();
  p.cof = cof_bot(DimCtx());
  p.base = a;
  KanResult res = wcom_from_ext(h, p);
  CHECK(res.cert.pass());
  Term expect = h.norm(t_ext(a, make_partial<Term>(h.pres(), cof_bot(DimCtx()), {})));
  CHECK(term_eq(res.filler, expect));
  REQUIRE(res.path.has_value());
  recheck(h, res.cert);
}

TEST_CASE("wcom on the true cofibration collapses to the tube") {
  CompletionHandle h = complete(set_ab());
  Rng rng(41);
  TermGen gen(h, rng);
  // Tube: the canonical path from a to b, re-indexed along z.
  Term a = ob_term(h.pres(), intern("a"), DimCtx());
  Term b = ob_term(h.pres(), intern("b"), DimCtx());
  PathResult pr = center_and_path(h, a, b);
  DimCtx cz = DimCtx().extend(intern("z"));
  Term line = restrict_term(pr.path, Substitution::rename(cz, DimCtx().extend(pr.pathDim)));

  FillingProblem p;
  p.fillDim = intern("z");
  p.r = IntervalExpr::end0();
  p.s = std::nullopt;  // fill to a generic level
  p.cof = cof_top(DimCtx());
  p.tube = {line};
  p.base = h.norm(restrict_term(line, Substitution(DimCtx(), cz, {IntervalExpr::end0()})));
  CHECK(term_eq(p.base, a));

  KanResult res = wcom_from_ext(h, p);
  CHECK(res.cert.pass());
  REQUIRE(res.sVar.has_value());
  // Collapse: the filler is the tube at the generic target level.
  Term expect = h.norm(restrict_term(
      line, Substitution(res.fillerCtx, cz, {IntervalExpr::mk_var(*res.sVar)})));
  CHECK(term_eq(res.filler, expect));
  recheck(h, res.cert);
}

TEST_CASE("tube-base disagreement fails the certificate and skips the path") {
  CompletionHandle h = complete(set_ab());
  Term a = ob_term(h.pres(), intern("a"), DimCtx());
  Term b = ob_term(h.pres(), intern("b"), DimCtx());
  DimCtx ci = DimCtx().extend(intern("i"));
  DimCtx cz = DimCtx().extend(intern("z"));
  FillingProblem p;
  p.ctx = ci;
  p.fillDim = intern("z");
  p.r = IntervalExpr::end0();
  p.s = IntervalExpr::end1();
  p.cof = cof_eq(ci, IntervalExpr::mk_var(intern("i")), IntervalExpr::end0());
  p.tube = {restrict_term(a, Substitution::terminal(cz))};
  p.base = restrict_term(b, Substitution::terminal(ci));
  KanResult res = wcom_from_ext(h, p);
  CHECK_FALSE(res.cert.pass());
  CHECK_FALSE(res.path.has_value());
  bool sawAgreement = false;
  for (const auto& e : res.cert.entries)
    if (e.desc == "tube-base agreement" && !e.pass) sawAgreement = true;
  CHECK(sawAgreement);
}

TEST_CASE("random filling problems certify and match the trivial graph instance") {
  CompletionHandle h = complete(set_ab());
  Rng rng(20260823);
  TermGen gen(h, rng);
  PRGInstance inst = make_set_prg_instance(h);
  for (int n = 0; n < 50; ++n) {
    FillingProblem p = random_problem(h, gen, rng);
    KanResult direct = wcom_from_ext(h, p);
    INFO("sample " << n << " filler " << term_str(direct.filler));
    REQUIRE(direct.cert.pass());
    REQUIRE(direct.path.has_value());
    recheck(h, direct.cert);

    KanResult derived = fibrancy_from_prg(h, inst, p);
    REQUIRE(derived.cert.pass());
    REQUIRE(derived.path.has_value());
    CHECK(term_key(derived.filler) == term_key(direct.filler));
    CHECK(term_key(*derived.path) == term_key(*direct.path));
    recheck(h, derived.cert);

    // Path endpoint property, re-stated independently of the certificate.
    DimCtx ctxP = direct.fillerCtx.extend(direct.pathDim);
    Term at1 = h.norm(restrict_term(*direct.path,
                                    Substitution::face(ctxP, direct.pathDim,
                                                       IntervalExpr::end1())));
    CHECK(term_eq(at1, h.norm(restrict_term(p.base, Substitution::projection(
                                                        direct.fillerCtx, p.ctx)))));
  }
}

TEST_CASE("center and path join any two elements") {
  CompletionHandle h = complete(set_ab());
  Term a = ob_term(h.pres(), intern("a"), DimCtx());
  Term b = ob_term(h.pres(), intern("b"), DimCtx());

  SECTION("equal endpoints degenerate") {
    PathResult pr = center_and_path(h, a, a);
    CHECK(pr.cert.pass());
    DimCtx cp = DimCtx().extend(pr.pathDim);
    for (const auto& end : {IntervalExpr::end0(), IntervalExpr::end1()})
      CHECK(term_eq(h.norm(restrict_term(pr.path, Substitution::face(cp, pr.pathDim, end))),
                    a));
  }

  SECTION("the two generators are path-connected") {
    PathResult pr = center_and_path(h, a, b);
    CHECK(pr.cert.pass());
    recheck(h, pr.cert);
    CHECK(pr.center->kind == TermKind::ExtSet);
    DimCtx cp = DimCtx().extend(pr.pathDim);
    CHECK(term_eq(
        h.norm(restrict_term(pr.path, Substitution::face(cp, pr.pathDim, IntervalExpr::end0()))),
        a));
    CHECK(term_eq(
        h.norm(restrict_term(pr.path, Substitution::face(cp, pr.pathDim, IntervalExpr::end1()))),
        b));
  }
}

TEST_CASE("iso-extension form of center and path") {
  CompletionHandle h = complete(walking_iso());
  Term x = ob_term(h.pres(), intern("x"), DimCtx());
  GluePiece e1 = ext_ob(h, x, cof_bot(DimCtx()), {});
  GluePiece e2{h.norm(x), t_id(h.norm(x)), t_id(h.norm(x))};
  CatPathResult pr = center_and_path(h, x, e1, e2);
  CHECK(pr.cert.pass());
  CHECK(pr.center.ob->kind == TermKind::GlueOb);
  DimCtx cp = DimCtx().extend(pr.pathDim);
  Substitution f0 = Substitution::face(cp, pr.pathDim, IntervalExpr::end0());
  Substitution f1 = Substitution::face(cp, pr.pathDim, IntervalExpr::end1());
  CHECK(term_eq(h.norm(restrict_term(pr.path.ob, f0)), e1.ob));
  CHECK(term_eq(h.norm(restrict_term(pr.path.ob, f1)), e2.ob));
  CHECK(term_eq(h.norm(restrict_term(pr.path.fwd, f0)), e1.fwd));
}

TEST_CASE("certificates carry the formula-reading notes") {
  CompletionHandle h = complete(set_ab());
  Term a = ob_term(h.pres(), intern("a"), DimCtx());
  FillingProblem p;
  p.fillDim = intern("z");
  p.r = IntervalExpr::end0();
  p.s = IntervalExpr::end1();
  p.cof = cof_bot(DimCtx());
  p.base = a;
  KanResult res = wcom_from_ext(h, p);
  REQUIRE_FALSE(res.cert.notes.empty());
  KanResult derived = fibrancy_from_prg(h, make_set_prg_instance(h), p);
  REQUIRE_FALSE(derived.cert.notes.empty());
}
