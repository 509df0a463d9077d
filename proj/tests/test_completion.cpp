#include <catch2/catch_amalgamated.hpp>

#include "rezk/verify.hpp"
#include "support/fragcheck.hpp"
#include "support/termgen.hpp"

using namespace rezk;
using namespace rezk::testgen;

TEST_CASE("completion handles") {
  SECTION("the empty category has no objects at any depth") {
    Presentation p;
    p.theory = Theory::CAT;
    p.validate();
    CompletionHandle h = complete(p);
    for (int d = 0; d <= 3; ++d) CHECK(enumerate(h, SortKind::Ob, DimCtx(), d).empty());
    Fragment f = externalize(h, 3);
    CHECK(f.objects.empty());
    CHECK(f.homs.empty());
  }

  SECTION("the element completion truncates: bounded elements are connected") {
    CompletionHandle h = complete(set_ab());
    auto elts = enumerate(h, SortKind::Elt, DimCtx(), 1);
    REQUIRE(elts.size() == 4);
    for (const auto& x : elts)
      for (const auto& y : elts) {
        PathResult pr = center_and_path(h, x, y);
        REQUIRE(pr.cert.pass());
      }
  }
}

TEST_CASE("ext_ob returns the collapse, the free glue, or a boundary extension") {
  CompletionHandle h = complete(walking_iso());
  Term x = ob_term(h.pres(), intern("x"), DimCtx());
  Term y = ob_term(h.pres(), intern("y"), DimCtx());
  Term f = hom_term(h.pres(), intern("f"), DimCtx());
  Term g = hom_term(h.pres(), intern("g"), DimCtx());

  SECTION("decided-true cofibration returns the piece exactly") {
    GluePiece res = ext_ob(h, x, cof_top(DimCtx()), {{y, f, g}});
    CHECK(term_eq(res.ob, y));
    CHECK(term_eq(res.fwd, f));
    CHECK(term_eq(res.inv, g));
  }

  SECTION("false cofibration adjoins a fresh object") {
    GluePiece res = ext_ob(h, x, cof_bot(DimCtx()), {});
    CHECK(res.ob->kind == TermKind::GlueOb);
    CHECK(res.fwd->kind == TermKind::GlueIsoFwd);
    CHECK(iso_laws_hold(h, IsoTerm{res.fwd, res.inv}));
  }

  SECTION("one-face extension restricts to its piece") {
    Sym i = intern("i");
    DimCtx ci = DimCtx().extend(i);
    Cofibration i0 = cof_eq(ci, IntervalExpr::mk_var(i), IntervalExpr::end0());
    Term xi = ob_term(h.pres(), intern("x"), ci);
    Term yq = ob_term(h.pres(), intern("y"), DimCtx());
    GluePiece res = ext_ob(h, xi, i0, {{yq, f, g}});
    Substitution face0 = Substitution::face(ci, i, IntervalExpr::end0());
    CHECK(term_eq(h.norm(restrict_term(res.ob, face0)), h.norm(yq)));
    CHECK(term_eq(h.norm(restrict_term(res.fwd, face0)), h.norm(f)));
  }
}

TEST_CASE("ext_hom is the identity procedure on propositional pieces") {
  CompletionHandle h = complete(walking_iso());
  Term x = ob_term(h.pres(), intern("x"), DimCtx());
  Term f = hom_term(h.pres(), intern("f"), DimCtx());

  CHECK(term_eq(ext_hom(h, f, cof_bot(DimCtx()), {}), h.norm(f)));
  CHECK(term_eq(ext_hom(h, f, cof_top(DimCtx()), {t_comp(f, t_id(x))}), h.norm(f)));
  CHECK_THROWS_AS(ext_hom(h, f, cof_top(DimCtx()), {t_id(x)}), NonPropositionalPiece);
}

TEST_CASE("essential surjectivity witnesses") {
  CompletionHandle h = complete(walking_iso());
  Term x = h.norm(ob_term(h.pres(), intern("x"), DimCtx()));

  SECTION("a generator witnesses itself") {
    SurjWitness w = ess_surj_witness(h, x);
    CHECK(term_eq(w.base, x));
    CHECK(w.fwd->kind == TermKind::IdHom);
  }

  SECTION("glue objects unwind to their generator") {
    GluePiece g1 = ext_ob(h, x, cof_bot(DimCtx()), {});
    GluePiece g2 = ext_ob(h, g1.ob, cof_bot(DimCtx()), {});
    SurjWitness w1 = ess_surj_witness(h, g1.ob);
    CHECK(term_eq(w1.base, x));
    CHECK(term_eq(h.norm(w1.fwd), h.norm(g1.fwd)));
    SurjWitness w2 = ess_surj_witness(h, g2.ob);
    CHECK(term_eq(w2.base, x));
    CHECK(h.eq(t_comp(w2.inv, w2.fwd), t_id(x)));
    CHECK(h.eq(t_comp(w2.fwd, w2.inv), t_id(g2.ob)));
  }

  SECTION("witness laws hold for every enumerated object") {
    for (const auto& ob : enumerate(h, SortKind::Ob, DimCtx(), 3)) {
      SurjWitness w = ess_surj_witness(h, ob);
      REQUIRE(w.base->kind == TermKind::Gen);
      REQUIRE(h.eq(t_comp(w.inv, w.fwd), t_id(w.base)));
      REQUIRE(h.eq(t_comp(w.fwd, w.inv), t_id(ob)));
    }
  }
}

TEST_CASE("externalization matches the independent tower oracle") {
  CompletionHandle h = complete(discrete2());
  Fragment f = externalize(h, 3);
  CHECK(f.objects.size() == 8);
  Tower t = build_tower({"x", "y"}, 3);
  for (int d = 0; d <= 3; ++d)
    CHECK(externalize(h, d).objects.size() == t.totals[static_cast<std::size_t>(d)]);
  std::string why;
  CHECK(fragment_matches_tower(f, t, &why));
  INFO(why);

  // Closed-form growth: each stage adds the objects of maximal depth.
  for (int d = 1; d <= 3; ++d) {
    std::size_t exact = 0;
    for (int dep : f.depths)
      if (dep == d - 1) ++exact;
    CHECK(t.totals[static_cast<std::size_t>(d)] ==
          t.totals[static_cast<std::size_t>(d - 1)] + exact);
  }
}

TEST_CASE("walking iso externalization is pairwise isomorphic at depth 1") {
  CompletionHandle h = complete(walking_iso());
  Fragment f = externalize(h, 1);
  REQUIRE(f.objects.size() == 4);
  for (const auto& a : f.objects)
    for (const auto& b : f.objects) {
      SurjWitness wa = ess_surj_witness(h, a);
      SurjWitness wb = ess_surj_witness(h, b);
      Term bridge, bridgeInv;
      if (term_eq(wa.base, wb.base)) {
        bridge = t_id(wa.base);
        bridgeInv = bridge;
      } else if (wa.base->name == intern("x")) {
        bridge = hom_term(h.pres(), intern("f"), DimCtx());
        bridgeInv = hom_term(h.pres(), intern("g"), DimCtx());
      } else {
        bridge = hom_term(h.pres(), intern("g"), DimCtx());
        bridgeInv = hom_term(h.pres(), intern("f"), DimCtx());
      }
      Term iso = h.norm(t_comp(wb.fwd, t_comp(bridge, wa.inv)));
      Term back = h.norm(t_comp(wa.fwd, t_comp(bridgeInv, wb.inv)));
      REQUIRE(h.eq(t_comp(back, iso), t_id(a)));
      REQUIRE(h.eq(t_comp(iso, back), t_id(b)));
    }
}

TEST_CASE("composition table closes or marks overflow") {
  CompletionHandle h = complete(walking_iso());
  Fragment f = externalize(h, 1);
  bool sawComposite = false, sawOverflow = false;
  for (std::size_t g = 0; g < f.homs.size(); ++g)
    for (std::size_t k = 0; k < f.homs.size(); ++k) {
      long c = f.compose[g][k];
      if (c >= 0) {
        sawComposite = true;
        const FragmentHom& got = f.homs[static_cast<std::size_t>(c)];
        CHECK(got.src == f.homs[k].src);
        CHECK(got.dst == f.homs[g].dst);
        CHECK(term_eq(got.term, h.norm(t_comp(f.homs[g].term, f.homs[k].term))));
      }
      if (c == Fragment::kOverflow) sawOverflow = true;
    }
  CHECK(sawComposite);
  CHECK(sawOverflow);
}

TEST_CASE("dimension-0 weak equivalence verification") {
  SECTION("walking iso at depth 3") {
    CompletionHandle h = complete(walking_iso());
    Report r = verify_weq_dim0(h, 3);
    CHECK(r.all_pass());
    CHECK(r.count("pass") > 0);
  }
  SECTION("walking arrow at depth 3: conjugation words cancel") {
    CompletionHandle h = complete(walking_arrow());
    Report r = verify_weq_dim0(h, 3);
    CHECK(r.all_pass());
  }
  SECTION("discrete category: faithfulness vacuous, still passes") {
    CompletionHandle h = complete(discrete2());
    Report r = verify_weq_dim0(h, 3);
    CHECK(r.all_pass());
  }
}

TEST_CASE("completeness sampling certifies") {
  SECTION("category samples") {
    CompletionHandle h = complete(walking_iso());
    std::vector<Term> created;
    Report r = verify_completeness(h, 20, 20260823, &created);
    for (const auto& o : r.obligations) {
      INFO(o.id << ": " << o.status << " " << o.witness);
      CHECK(o.status == "pass");
    }
    BoundaryScan scan = scan_boundaries(h, created);
    CHECK(scan.failed == 0);
    CHECK(scan.checked > 0);
  }
  SECTION("element samples") {
    CompletionHandle h = complete(set_ab());
    std::vector<Term> created;
    Report r = verify_completeness(h, 20, 7, &created);
    for (const auto& o : r.obligations) {
      INFO(o.id << ": " << o.status << " " << o.witness);
      CHECK(o.status == "pass");
    }
    BoundaryScan scan = scan_boundaries(h, created);
    CHECK(scan.failed == 0);
    CHECK(scan.checked > 0);
  }
}
