#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "rezk/term.hpp"

namespace rezk {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Theory : std::uint8_t { SET, CAT };

struct HomGen {
  Sym name, src, dst;
};

/// Oriented rewrite rule between parallel hom words.  Words are stored in
/// composition order (leftmost applied last); an empty rhs is the identity.
struct RewriteRule {
  std::vector<Sym> lhs, rhs;
  Sym srcOb, dstOb;
};

/// A finitely presented theory: elements of a set, or a category given by
/// object/hom generators and oriented relations.  Generators live at the
/// empty dimension context.
struct Presentation {
  Theory theory = Theory::CAT;
  std::vector<Sym> obGens;
  std::vector<HomGen> homGens;
  std::vector<RewriteRule> rules;

  bool has_ob(Sym n) const {
    return std::find(obGens.begin(), obGens.end(), n) != obGens.end();
  }

  const HomGen* find_hom(Sym n) const {
    for (const auto& h : homGens)
      if (h.name == n) return &h;
    return nullptr;
  }

  void validate() const {
    for (std::size_t a = 0; a < obGens.size(); ++a)
      for (std::size_t b = a + 1; b < obGens.size(); ++b)
        if (obGens[a] == obGens[b])
          throw ValidationError("duplicate generator: " + symbol_name(obGens[a]));
    if (theory == Theory::SET) {
      if (!homGens.empty() || !rules.empty())
        throw ValidationError("SET theory admits no homs or rules");
      return;
    }
    for (const auto& h : homGens) {
      if (has_ob(h.name)) throw ValidationError("name used twice: " + symbol_name(h.name));
      for (const auto& h2 : homGens)
        if (&h != &h2 && h.name == h2.name)
          throw ValidationError("duplicate hom generator: " + symbol_name(h.name));
      if (!has_ob(h.src) || !has_ob(h.dst))
        throw ValidationError("hom endpoints must be objects: " + symbol_name(h.name));
    }
    for (const auto& r : rules) {
      if (r.lhs.empty()) throw ValidationError("rule left side must not be an identity");
      auto endpoints = [&](const std::vector<Sym>& word) -> std::pair<Sym, Sym> {
        if (word.empty()) return {r.srcOb, r.dstOb};
        Sym src = 0, dst = 0;
        for (std::size_t k = word.size(); k-- > 0;) {
          const HomGen* h = find_hom(word[k]);
          if (!h) throw ValidationError("unknown hom in rule: " + symbol_name(word[k]));
          if (k == word.size() - 1) src = h->src;
          else if (h->src != dst)
            throw ValidationError("rule word does not compose at " + symbol_name(word[k]));
          dst = h->dst;
        }
        return {src, dst};
      };
      auto [ls, ld] = endpoints(r.lhs);
      if (ls != r.srcOb || ld != r.dstOb)
        throw ValidationError("rule endpoints disagree with its left side");
      auto [rs, rd] = endpoints(r.rhs);
      if (rs != r.srcOb || rd != r.dstOb)
        throw ValidationError("rule sides are not parallel");
    }
  }
};

/// Object (CAT) or element (SET) generator as a degenerate term over ctx.
inline Term ob_term(const Presentation& p, Sym name, const DimCtx& ctx) {
  if (!p.has_ob(name)) throw ValidationError("unknown generator: " + symbol_name(name));
  Sort s = p.theory == Theory::SET ? Sort::elt() : Sort::ob();
  return t_gen(name, ctx, s, Substitution::terminal(ctx));
}

inline Term hom_term(const Presentation& p, Sym name, const DimCtx& ctx) {
  const HomGen* h = p.find_hom(name);
  if (!h) throw ValidationError("unknown hom generator: " + symbol_name(name));
  Term src = ob_term(p, h->src, ctx);
  Term dst = ob_term(p, h->dst, ctx);
  return t_gen(name, ctx, Sort::hom(src, dst), Substitution::terminal(ctx));
}

/// The term of a rule word over ctx (identity on the rule's source if empty).
inline Term word_term(const Presentation& p, const std::vector<Sym>& word, Sym srcOb,
                      const DimCtx& ctx) {
  if (word.empty()) return t_id(ob_term(p, srcOb, ctx));
  Term acc = hom_term(p, word.back(), ctx);
  for (std::size_t k = word.size() - 1; k-- > 0;) acc = t_comp(hom_term(p, word[k], ctx), acc);
  return acc;
}

}  // namespace rezk
