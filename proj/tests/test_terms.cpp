#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "rezk/completion.hpp"
#include "rezk/tower.hpp"
#include "support/termgen.hpp"

using namespace rezk;
using namespace rezk::testgen;

namespace {

DimCtx ctx_of(std::initializer_list<const char*> names) {
  DimCtx c;
  for (const char* n : names) c = c.extend(intern(n));
  return c;
}

/// Walks a term asserting the normal-form invariants: no Restrict or Inv
/// nodes, right-associated Comp, no node whose cofibration has a decided
/// conjunct.
void check_nf_invariants(const Term& t) {
  REQUIRE(t->kind != TermKind::Restrict);
  REQUIRE(t->kind != TermKind::Inv);
  if (t->kind == TermKind::Comp) REQUIRE(t->a->kind != TermKind::Comp);
  auto check_cof = [](const Cofibration& c) {
    REQUIRE_FALSE(cof_is_top(c));
    for (const auto& conj : dnf(c)) REQUIRE_FALSE(conj.eqs.empty());
  };
  if (t->glue) {
    check_cof(t->glue->cof);
    for (const auto& [c, p] : t->glue->pieces) {
      check_nf_invariants(p.ob);
      check_nf_invariants(p.fwd);
      check_nf_invariants(p.inv);
    }
  }
  if (t->ext) {
    check_cof(t->ext->cof);
    for (const auto& [c, p] : t->ext->pieces) check_nf_invariants(p);
  }
  if (t->a) check_nf_invariants(t->a);
  if (t->b) check_nf_invariants(t->b);
  if (t->base) check_nf_invariants(t->base);
}

}  // namespace

TEST_CASE("restriction pushes substitutions to the leaves") {
  SECTION("generator substitutions compose") {
    Sym i = intern("i"), j = intern("j"), x = intern("x");
    DimCtx ci = ctx_of({"i"}), cj = ctx_of({"j"});
    Term g = t_gen(x, cj, Sort::ob(), Substitution(cj, ci, {IntervalExpr::mk_var(j)}));
    Substitution j0(DimCtx(), cj, {IntervalExpr::end0()});
    Term expect = t_gen(x, DimCtx(), Sort::ob(), Substitution(DimCtx(), ci, {IntervalExpr::end0()}));
    CHECK(term_eq(restrict_term(g, j0), expect));
  }

  Presentation wi = walking_iso();
  CompletionHandle h = complete(wi);
  Sym i = intern("i");
  DimCtx ci = ctx_of({"i"});
  Term xI = ob_term(wi, intern("x"), ci);
  Term y0 = ob_term(wi, intern("y"), DimCtx());
  Term f0 = hom_term(wi, intern("f"), DimCtx());
  Term g0 = hom_term(wi, intern("g"), DimCtx());
  Cofibration i0 = cof_eq(ci, IntervalExpr::mk_var(i), IntervalExpr::end0());
  Term glued = t_glue_ob(xI, make_partial<GluePiece>(wi, i0, {{y0, f0, g0}}));

  SECTION("restriction to an unsatisfied face leaves a free glue") {
    Term got = restrict_term(glued, Substitution::face(ci, i, IntervalExpr::end1()));
    Term expect = t_glue_ob(ob_term(wi, intern("x"), DimCtx()),
                            make_partial<GluePiece>(wi, cof_bot(DimCtx()), {}));
    CHECK(term_eq(got, expect));
  }

  SECTION("restriction to a satisfied face collapses to the piece") {
    Substitution face0 = Substitution::face(ci, i, IntervalExpr::end0());
    // Cross-check against the decision procedure: the substituted
    // cofibration really is decided.
    CHECK(decided(canonical_cof(subst_cof(i0, face0))));
    CHECK(term_eq(restrict_term(glued, face0), y0));
  }
}

TEST_CASE("normalize: category laws, inverses, collapse") {
  Presentation wi = walking_iso();
  CompletionHandle h = complete(wi);
  Term x = ob_term(wi, intern("x"), DimCtx());
  Term y = ob_term(wi, intern("y"), DimCtx());
  Term f = hom_term(wi, intern("f"), DimCtx());
  Term g = hom_term(wi, intern("g"), DimCtx());

  SECTION("unit laws") {
    CHECK(term_eq(h.norm(t_comp(t_id(y), f)), f));
    CHECK(term_eq(h.norm(t_comp(f, t_id(x))), f));
  }

  SECTION("glue iso cancellation") {
    PartialGlue empty = make_partial<GluePiece>(wi, cof_bot(DimCtx()), {});
    Term fwd = t_glue_fwd(x, empty);
    CHECK(term_eq(h.norm(t_comp(t_inv(fwd), fwd)), t_id(x)));
    CHECK(term_eq(h.norm(t_comp(fwd, t_inv(fwd))), t_id(t_glue_ob(x, empty))));
  }

  SECTION("inverse calculus") {
    PartialGlue empty = make_partial<GluePiece>(wi, cof_bot(DimCtx()), {});
    Term fwd = t_glue_fwd(x, empty);
    CHECK(term_eq(h.norm(t_inv(t_inv(fwd))), h.norm(fwd)));
    CHECK(term_eq(h.norm(t_inv(t_id(x))), t_id(x)));
    GluePiece up = ext_ob(h, t_glue_ob(x, empty), cof_bot(DimCtx()), {});
    Term two = t_comp(up.fwd, fwd);
    CHECK(term_eq(h.norm(t_comp(t_inv(two), two)), t_id(x)));
  }

  SECTION("collapse after restriction picks the decided payload") {
    Sym i = intern("i");
    DimCtx ci = ctx_of({"i"});
    IntervalExpr vi = IntervalExpr::mk_var(i);
    Cofibration ends = cof_or(cof_eq(ci, vi, IntervalExpr::end0()),
                              cof_eq(ci, vi, IntervalExpr::end1()));
    Term xI = ob_term(wi, intern("x"), ci);
    Term y0 = ob_term(wi, intern("y"), DimCtx());
    Term f0 = hom_term(wi, intern("f"), DimCtx());
    Term g0 = hom_term(wi, intern("g"), DimCtx());
    GluePiece pc{y0, f0, g0};
    Term node = t_glue_ob(xI, make_partial<GluePiece>(wi, ends, {pc, pc}));
    Term got = h.norm(restrict_term(node, Substitution::face(ci, i, IntervalExpr::end0())));
    CHECK(term_eq(got, y0));
  }

  SECTION("user rules rewrite to the identity") {
    CHECK(term_eq(h.norm(t_comp(g, f)), t_id(x)));
    CHECK(h.eq(t_comp(g, f), t_id(x)));
    CHECK(h.eq(t_comp(f, t_comp(g, f)), f));
  }

  SECTION("looping rule set hits the step budget") {
    Presentation loop;
    loop.theory = Theory::CAT;
    loop.obGens = {intern("x")};
    loop.homGens = {{intern("u"), intern("x"), intern("x")}};
    Sym u = intern("u");
    loop.rules = {{{u}, {u, u}, intern("x"), intern("x")}};
    loop.validate();
    NormalizeOptions opts;
    opts.budget = 50;
    CHECK_THROWS_AS(normalize(loop, hom_term(loop, u, DimCtx()), opts), BudgetExceeded);
  }
}

TEST_CASE("mk_partial validates shape and compatibility") {
  Presentation sp = set_ab();
  DimCtx cij = ctx_of({"i", "j"});
  Sym i = intern("i"), j = intern("j");
  IntervalExpr vi = IntervalExpr::mk_var(i), vj = IntervalExpr::mk_var(j);
  Term a = ob_term(sp, intern("a"), DimCtx());

  SECTION("false cofibration takes the empty list") {
    PartialTerms p = make_partial<Term>(sp, cof_bot(cij), {});
    CHECK(p.pieces.empty());
    CHECK_THROWS_AS(make_partial<Term>(sp, cof_bot(cij), {a}), SortError);
  }

  SECTION("endpoint disjunction with no overlap is valid") {
    Cofibration ends = cof_or(cof_eq(cij, vi, IntervalExpr::end0()),
                              cof_eq(cij, vi, IntervalExpr::end1()));
    DimCtx cj = ctx_of({"j"});
    Term aj = ob_term(sp, intern("a"), cj);
    Term bj = ob_term(sp, intern("b"), cj);
    CHECK_NOTHROW(make_partial<Term>(sp, ends, {aj, bj}));
  }

  SECTION("overlapping disagreement is rejected with a witness") {
    Cofibration cof = cof_or(cof_eq(cij, vi, IntervalExpr::end0()), cof_eq(cij, vi, vj));
    DimCtx cj = ctx_of({"j"});
    DimCtx cionly = ctx_of({"i"});
    Term aj = ob_term(sp, intern("a"), cj);
    Term bi = ob_term(sp, intern("b"), cionly);
    try {
      make_partial<Term>(sp, cof, {aj, bi});
      FAIL("expected IncompatiblePieces");
    } catch (const IncompatiblePieces& e) {
      CHECK(e.nf1 != e.nf2);
      CHECK(std::string(e.what()).find("incompatible") != std::string::npos);
    }
  }
}

TEST_CASE("enumerate lists bounded normal forms deterministically") {
  SECTION("element theory at the empty context") {
    CompletionHandle h = complete(set_ab());
    auto d0 = enumerate(h, SortKind::Elt, DimCtx(), 0);
    REQUIRE(d0.size() == 2);
    CHECK(term_eq(d0[0], ob_term(h.pres(), intern("a"), DimCtx())));
    CHECK(term_eq(d0[1], ob_term(h.pres(), intern("b"), DimCtx())));
    auto d1 = enumerate(h, SortKind::Elt, DimCtx(), 1);
    REQUIRE(d1.size() == 4);
    int freeExts = 0;
    for (const auto& t : d1)
      if (t->kind == TermKind::ExtSet) {
        CHECK(cof_is_bot(t->ext->cof));
        ++freeExts;
      }
    CHECK(freeExts == 2);
  }

  SECTION("walking arrow objects match the replacement tower") {
    CompletionHandle h = complete(walking_arrow());
    Term x = ob_term(h.pres(), intern("x"), DimCtx());
    Term y = ob_term(h.pres(), intern("y"), DimCtx());
    auto freeGlue = [&](const Term& base) {
      return t_glue_ob(base, make_partial<GluePiece>(h.pres(), cof_bot(DimCtx()), {}));
    };
    auto d2 = enumerate(h, SortKind::Ob, DimCtx(), 2);
    std::set<std::string> keys;
    for (const auto& t : d2) keys.insert(term_key(t));
    std::set<std::string> expect = {
        term_key(x),
        term_key(y),
        term_key(freeGlue(x)),
        term_key(freeGlue(y)),
        term_key(freeGlue(freeGlue(x))),
        term_key(freeGlue(freeGlue(y))),
    };
    CHECK(keys == expect);

    Tower tower = build_tower({"x", "y"}, 3);
    for (int d = 0; d <= 3; ++d)
      CHECK(enumerate(h, SortKind::Ob, DimCtx(), d).size() == tower.totals[d]);
  }

  SECTION("repeated calls reuse the memo and agree") {
    CompletionHandle h = complete(walking_arrow());
    auto first = enumerate(h, SortKind::Ob, DimCtx(), 2);
    auto second = enumerate(h, SortKind::Ob, DimCtx(), 2);
    REQUIRE(first.size() == second.size());
    for (std::size_t k = 0; k < first.size(); ++k) CHECK(term_eq(first[k], second[k]));
  }
}

TEST_CASE("eq_terms decides normal-form equality") {
  Presentation wi = walking_iso();
  CompletionHandle h = complete(wi);
  Term x = ob_term(wi, intern("x"), DimCtx());
  Term f = hom_term(wi, intern("f"), DimCtx());
  Term g = hom_term(wi, intern("g"), DimCtx());
  Term fgf = t_comp(f, t_comp(g, f));

  CHECK(h.eq(t_comp(t_comp(f, g), f), fgf));
  CHECK(h.eq(t_comp(g, f), t_id(x)));

  Presentation sp = set_ab();
  CompletionHandle hs = complete(sp);
  DimCtx ci = DimCtx().extend(intern("i"));
  CHECK_FALSE(hs.eq(ob_term(sp, intern("a"), ci), ob_term(sp, intern("b"), ci)));
}

TEST_CASE("restriction functoriality on random terms") {
  CompletionHandle hs = complete(set_ab());
  CompletionHandle hc = complete(walking_iso());
  Rng rng(20260823);
  TermGen gs(hs, rng), gc(hc, rng);
  for (int n = 0; n < 150; ++n) {
    DimCtx ctx = random_ctx(rng, 2);
    Term t;
    switch (rng.below(3)) {
      case 0: t = gs.elt(ctx, 2); break;
      case 1: t = gc.ob(ctx, 2); break;
      default: t = gc.hom(ctx, 1); break;
    }
    const CompletionHandle& h = t->sort.kind == SortKind::Elt ? hs : hc;
    Substitution f = random_sub_into(rng, ctx);
    Substitution g = random_sub_into(rng, f.dom());
    Term lhs = h.norm(restrict_term(restrict_term(t, f), g));
    Term rhs = h.norm(restrict_term(t, compose(f, g)));
    REQUIRE(term_key(lhs) == term_key(rhs));
  }
}

TEST_CASE("boundary law holds for every created node") {
  CompletionHandle hs = complete(set_ab());
  CompletionHandle hc = complete(walking_iso());
  Rng rng(7);
  TermGen gs(hs, rng), gc(hc, rng);
  for (int n = 0; n < 60; ++n) {
    gs.elt(random_ctx(rng, 2), 2);
    gc.ob(random_ctx(rng, 2), 2);
  }
  int checked = 0;
  for (const auto& node : gs.created)
    for (const auto& [c, payload] : node->ext->pieces) {
      Substitution q = quotient(c);
      REQUIRE(hs.eq(restrict_term(node, q), payload));
      ++checked;
    }
  for (const auto& node : gc.created)
    for (const auto& [c, payload] : node->glue->pieces) {
      Substitution q = quotient(c);
      REQUIRE(hc.eq(restrict_term(node, q), payload.ob));
      Term fwdLine = t_glue_fwd(node->base, *node->glue);
      REQUIRE(hc.eq(restrict_term(fwdLine, q), payload.fwd));
      ++checked;
    }
  CHECK(checked > 0);
}

TEST_CASE("normalizer is deterministic across strategies") {
  CompletionHandle hc = complete(walking_iso());
  Rng rng(99);
  TermGen gc(hc, rng);
  std::vector<Term> samples;
  for (int n = 0; n < 120; ++n) samples.push_back(gc.hom(random_ctx(rng, 2), 1));
  for (const auto& t : samples) {
    Term ref = hc.norm(t);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng strat(seed);
      NormalizeOptions opts = hc.options();
      opts.rng = &strat;
      Term alt = normalize(hc.pres(), t, opts);
      REQUIRE(term_key(alt) == term_key(ref));
    }
  }
}

TEST_CASE("eq_terms is an equivalence and a congruence") {
  Presentation wi = walking_iso();
  CompletionHandle h = complete(wi);
  Rng rng(5);
  TermGen g(h, rng);
  for (int n = 0; n < 40; ++n) {
    DimCtx ctx = random_ctx(rng, 2);
    Term a = g.hom(ctx, 1);
    Term aObf = t_comp(a, t_id(a->sort.src));  // same class, different syntax
    CHECK(h.eq(a, a));
    CHECK(h.eq(a, aObf));
    CHECK(h.eq(aObf, a));
    // Congruence under composition.
    Term b = t_id(a->sort.dst);
    Term bObf = t_comp(b, b);
    CHECK(h.eq(t_comp(b, a), t_comp(bObf, aObf)));
  }
  // Congruence under node formation: payloads equal up to normalization
  // give equal nodes.
  CompletionHandle hs = complete(set_ab());
  DimCtx ci = ctx_of({"i"});
  Cofibration i0 = cof_eq(ci, IntervalExpr::mk_var(intern("i")), IntervalExpr::end0());
  Term a0 = ob_term(hs.pres(), intern("a"), DimCtx());
  Term b0 = ob_term(hs.pres(), intern("b"), DimCtx());
  Term bObf = t_ext(b0, make_partial<Term>(hs.pres(), cof_top(DimCtx()), {b0}));
  Term aI = ob_term(hs.pres(), intern("a"), ci);
  Term n1 = t_ext(aI, make_partial<Term>(hs.pres(), i0, {b0}));
  Term n2 = t_ext(aI, make_partial<Term>(hs.pres(), i0, {bObf}));
  CHECK(hs.eq(n1, n2));
  CHECK(term_eq(hs.norm(n1), hs.norm(n2)));
}

TEST_CASE("normal forms satisfy the structural invariants") {
  CompletionHandle hs = complete(set_ab());
  CompletionHandle hc = complete(walking_iso());
  Rng rng(13);
  TermGen gs(hs, rng), gc(hc, rng);
  for (int n = 0; n < 80; ++n) {
    DimCtx ctx = random_ctx(rng, 2);
    check_nf_invariants(hs.norm(gs.elt(ctx, 2)));
    check_nf_invariants(hc.norm(gc.ob(ctx, 2)));
    check_nf_invariants(hc.norm(gc.hom(ctx, 1)));
  }
  // At the empty context every stored cofibration is decided to false
  // (true ones collapse away).
  for (const auto& t : enumerate(hc, SortKind::Ob, DimCtx(), 3)) {
    check_nf_invariants(t);
    if (t->glue) CHECK(cof_is_bot(t->glue->cof));
  }
}
