#include <cstdio>

#include <CLI11.hpp>

#include "rezk/cli.hpp"

int main(int argc, char** argv) {
  rezk::CommandRequest req;
  CLI::App app{"cofibration solver, cubical normalizer, and strict Rezk completion toolkit"};
  app.require_subcommand(1);
  app.add_option("--format", req.format, "output format: json or text")
      ->check(CLI::IsMember({"json", "text"}));
  app.add_option("--step-budget", req.stepBudget,
                 "rewrite step budget per normalize call (default: RF_STEP_BUDGET or 100000)");
  app.add_option("--out", req.outPath, "also write the JSON report to this file");
  app.add_option("--seed", req.seed, "seed for randomized checks");

  auto sub = [](CLI::App* parent, const char* name, const char* desc) {
    CLI::App* s = parent->add_subcommand(name, desc);
    s->fallthrough();
    return s;
  };

  CLI::App* cof = sub(&app, "cof", "cofibration entailment and normal forms");
  cof->require_subcommand(1);
  CLI::App* entailsCmd =
      sub(cof, "entails", "decide whether the first formula entails the second");
  entailsCmd->add_option("formulas", req.inputs, "the two formulas")->expected(2);
  entailsCmd->add_option("--ctx", req.ctxText, "dimension context, e.g. \"i j\"");
  entailsCmd->callback([&] {
    req.subcommand = "cof";
    req.action = "entails";
  });
  CLI::App* dnfCmd = sub(cof, "dnf", "canonical disjunctive normal form");
  dnfCmd->add_option("formula", req.inputs, "the formula")->expected(1);
  dnfCmd->add_option("--ctx", req.ctxText, "dimension context");
  dnfCmd->callback([&] {
    req.subcommand = "cof";
    req.action = "dnf";
  });
  CLI::App* decideCmd = sub(cof, "decide", "is the formula satisfied by the identity");
  decideCmd->add_option("formula", req.inputs, "the formula")->expected(1);
  decideCmd->add_option("--ctx", req.ctxText, "dimension context");
  decideCmd->callback([&] {
    req.subcommand = "cof";
    req.action = "decide";
  });

  CLI::App* normCmd = sub(&app, "normalize", "normalize a term over a presentation");
  normCmd->add_option("presentation", req.inputs, "presentation file")->expected(1);
  normCmd->add_option("--term", req.termText, "the term to normalize")->required();
  normCmd->add_option("--ctx", req.ctxText, "dimension context for the term");
  normCmd->add_option("--sub", req.subText, "substitution applied before normalizing");
  normCmd->callback([&] { req.subcommand = "normalize"; });

  CLI::App* enumCmd = sub(&app, "enumerate", "enumerate completion normal forms");
  enumCmd->add_option("presentation", req.inputs, "presentation file")->expected(1);
  enumCmd->add_option("--depth", req.depth, "glue depth bound");
  enumCmd->add_option("--ctx", req.ctxText, "dimension context");
  enumCmd->callback([&] { req.subcommand = "enumerate"; });

  CLI::App* kanCmd = sub(&app, "kan", "Kan filling derivations");
  kanCmd->require_subcommand(1);
  CLI::App* wcomCmd = sub(kanCmd, "wcom", "derive weak composition for a filling problem");
  wcomCmd->add_option("--problem", req.problemPath, "filling problem file")->required();
  wcomCmd->callback([&] {
    req.subcommand = "kan";
    req.action = "wcom";
  });

  CLI::App* catCmd = sub(&app, "cat", "functor checks");
  catCmd->require_subcommand(1);
  CLI::App* checkCmd =
      sub(catCmd, "check", "split equivalence and trivial fibration classes at dimension 0");
  checkCmd->add_option("--functor", req.functorPath, "functor file")->required();
  checkCmd->add_option("--depth", req.depth, "enumeration depth");
  checkCmd->callback([&] {
    req.subcommand = "cat";
    req.action = "check";
  });

  CLI::App* completeCmd = sub(&app, "complete", "strict Rezk completion of a presentation");
  completeCmd->add_option("presentation", req.inputs, "presentation file")->expected(1);
  completeCmd->add_option("--depth", req.depth, "enumeration and externalization depth");
  completeCmd->add_flag("--externalize", req.externalize,
                        "externalize the completion at the empty context");
  completeCmd->add_flag("--verify-weq", req.verifyWeq,
                        "verify the dimension-0 weak equivalence obligations");
  completeCmd->add_flag("--verify-completeness", req.verifyCompleteness,
                        "verify completeness on seeded random samples");
  completeCmd->add_option("--samples", req.samples, "sample count for --verify-completeness");
  completeCmd->callback([&] { req.subcommand = "complete"; });

  CLI::App* truncCmd =
      sub(&app, "truncate-demo", "propositional truncation demo for SET generators");
  truncCmd->add_option("--elements", req.elements, "comma-separated element names")->required();
  truncCmd->add_option("--depth", req.depth, "enumeration depth");
  truncCmd->callback([&] { req.subcommand = "truncate-demo"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  rezk::CliResult res = rezk::run(req);
  std::fputs(res.output.c_str(), stdout);
  return res.exitCode;
}
