#pragma once

// The nsa command-line front end. run() parses argv, runs one subcommand and
// prints a report ending in PASS or FAIL. Exit status: 0 when every check
// passes, 1 when one fails, 2 on usage or input errors.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsa/harness.hpp"

namespace nsa::cli {

inline constexpr std::uint64_t default_seed = 1729;

struct Report {
  Report(SuiteReport s, bool counts = true) : suite(std::move(s)), show_counts(counts) {}

  SuiteReport suite;
  bool show_counts = true;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A file argument, or inline text when it holds an s-expression.
inline std::pair<std::string, std::string> file_or_text(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) return {arg, read_file(arg)};
  if (arg.find('(') == std::string::npos) throw InvalidInput("no such file: " + arg);
  return {"<argument>", arg};
}

inline Report single(const std::string& command, const std::string& result, bool ok, const std::string& what) {
  Report r{SuiteReport{command}, false};
  r.suite.note(result);
  r.suite.check(ok, what);
  return r;
}

inline Report expect(const std::string& command, const std::string& actual, const std::string& expected) {
  if (expected.empty()) return single(command, actual, true, actual);
  return single(command, actual, actual == expected, "got " + actual + ", expected " + expected);
}

inline void print(const Report& r, bool as_json, std::ostream& out) {
  const auto& s = r.suite;
  if (as_json) {
    nlohmann::json j;
    j["command"] = s.name;
    j["instances"] = s.instances;
    j["failures"] = s.failures;
    j["details"] = s.details;
    j["result"] = s.passed() ? "PASS" : "FAIL";
    out << j.dump(2) << '\n';
    return;
  }
  for (const auto& d : s.details) out << d << '\n';
  if (r.show_counts) out << s.instances << " instances, " << s.failures << " failures\n";
  out << (s.passed() ? "PASS" : "FAIL") << '\n';
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Ultrapower, transfer and local-relator checks", "nsa"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  bool as_json = false;
  std::uint64_t seed = default_seed;
  app.add_flag("--json", as_json, "Print a machine-readable report");
  app.add_option("--seed", seed, "Seed for randomized harnesses")->capture_default_str();

  std::function<Report()> action;
  std::string source = "<argument>";
  std::string text, expected, file, model_file;
  std::string rel_text, a_text, b_text;
  std::size_t k = 3, s = 3, max_carrier = 3, x_size = 2, family = 1, instances = 100;
  std::size_t max_set = 4, max_dual = 6, max_beta = 3;

  auto* eval = app.add_subcommand("eval", "Evaluate a term or decide a predicate");
  eval->add_option("expr", text, "Term or predicate")->required();
  eval->add_option("--expect", expected, "Expected result");
  eval->callback([&] {
    action = [&] {
      auto v = parse_dsl(text);
      if (auto* t = std::get_if<SeqTerm>(&v)) return detail::expect("eval", normalize(*t).str(), expected);
      return detail::expect("eval", verdict_name(decide2(std::get<BoolTerm>(v)).kind), expected);
    };
  });

  auto* compare = app.add_subcommand("compare", "Decide a level-2 comparison");
  compare->add_option("predicate", text, "Predicate in n and m")->required();
  compare->add_option("--expect", expected, "Expected verdict");
  compare->callback([&] {
    action = [&] { return detail::expect("compare", verdict_name(decide2(parse_predicate(text)).kind), expected); };
  });

  auto* level2 = app.add_subcommand("level2", "Place a level-2 natural in the three-part partition");
  level2->add_option("term", text, "Term in n and m")->required();
  level2->add_option("--expect", expected, "Expected class");
  level2->callback([&] {
    action = [&] {
      std::string cls;
      try {
        cls = level2_class_name(partition_level2(Hyper2(parse_term(text))));
      } catch (const UndecidedPartition&) {
        cls = "Undecided";
      }
      return detail::expect("level2", cls, expected);
    };
  });

  auto* nunustar = app.add_subcommand("nunustar", "Decide R(starnu(b), nu(a)) by the criterion and directly");
  nunustar->add_option("relation", rel_text, "Relation in x and y")->required();
  nunustar->add_option("a", a_text, "Level-1 term")->required();
  nunustar->add_option("b", b_text, "Level-1 term")->required();
  nunustar->callback([&] {
    action = [&] {
      const auto e = read_sexpr("(nunustar " + rel_text + " " + a_text + " " + b_text + ")");
      const BoolTerm rel = parse_predicate(e[1]);
      const Hyper1 a = nsa::detail::level1_element(e[2]), b = nsa::detail::level1_element(e[3]);
      const Verdict crit = nunustar_check(rel, a, b), direct = nunustar_direct(rel, a, b);
      Report r{SuiteReport{"nunustar"}, false};
      r.suite.note(std::string("criterion: ") + verdict_name(crit.kind));
      r.suite.note(std::string("direct: ") + verdict_name(direct.kind));
      r.suite.check(!crit.decided() || !direct.decided() || crit.kind == direct.kind, "criterion and direct disagree");
      return r;
    };
  });

  auto* transfer = app.add_subcommand("transfer", "Compare standard and ultrapower truth of a sentence");
  transfer->add_option("formula", text, "Sentence, or a file holding one")->required();
  transfer->add_option("--model", model_file, "Model file; default: every model with one binary relation");
  transfer->add_option("--s", s, "Largest index set")->capture_default_str();
  transfer->add_option("--max-carrier", max_carrier, "Largest carrier without --model")->capture_default_str();
  transfer->callback([&] {
    action = [&] {
      auto [src, body] = detail::file_or_text(text);
      if (!model_file.empty()) {
        source = model_file;
        const auto model = parse_model(detail::read_file(model_file));
        const Signature sig = model.signature();
        source = src;
        const Formula f = parse_formula(body, &sig);
        return Report{transfer_sentence(model, f, s)};
      }
      source = src;
      const Signature sig = battery_signature();
      const Formula f = parse_formula(body, &sig);
      Report r{SuiteReport{"transfer"}};
      for (const auto& m : battery_models(max_carrier)) {
        auto part = transfer_sentence(m, f, s);
        r.suite.instances += part.instances;
        r.suite.failures += part.failures;
        for (const auto& d : part.details)
          if (d.rfind("failed: ", 0) == 0) r.suite.details.push_back(d);
      }
      return r;
    };
  });

  auto* laws = app.add_subcommand("functor-laws", "Check the ultrapower functor laws exhaustively");
  laws->add_option("--k", k, "Largest carrier")->capture_default_str();
  laws->add_option("--s", s, "Largest index set")->capture_default_str();
  laws->callback([&] { action = [&] { return Report{functor_law_suite(s, k)}; }; });

  auto* lr_run = app.add_subcommand("lr-run", "Round-trip and exactness checks for an lr file");
  lr_run->add_option("file", file, "lr file")->required()->check(CLI::ExistingFile);
  lr_run->add_option("--x", x_size, "Largest codomain for the round trip")->capture_default_str();
  lr_run->add_option("--family", family, "Largest family for exactness")->capture_default_str();
  lr_run->callback([&] {
    action = [&] {
      source = file;
      return Report{lr_file_suite(parse_lr(detail::read_file(file)), x_size, family)};
    };
  });

  auto* extend = app.add_subcommand("extend", "Seeded ultrafilter extension instances");
  extend->add_option("file", file, "lr file; default: random small relators")->check(CLI::ExistingFile);
  extend->add_option("--instances", instances, "Number of instances")->capture_default_str();
  extend->callback([&] {
    action = [&] {
      if (file.empty()) return Report{extension_suite(seed, instances)};
      source = file;
      const LocalRelator lr = parse_lr(detail::read_file(file));
      return Report{extension_suite(seed, instances, &lr)};
    };
  });

  auto* stone = app.add_subcommand("stone", "Ultrafilter counts, dual span and beta of products");
  stone->add_option("--max-set", max_set, "Largest set for the filter search")->capture_default_str();
  stone->add_option("--max-dual", max_dual, "Largest set for the dual span")->capture_default_str();
  stone->add_option("--max-beta", max_beta, "Largest factor for beta products")->capture_default_str();
  stone->callback([&] { action = [&] { return Report{stone_suite(max_set, max_dual, max_beta)}; }; });

  auto* regress = app.add_subcommand("regress", "Run a regression battery file");
  regress->add_option("file", file, "Battery file, one '<expr> => <expected>' per line")
      ->required()
      ->check(CLI::ExistingFile);
  regress->callback([&] {
    action = [&] {
      source = file;
      return Report{run_regression(parse_regression_battery(detail::read_file(file)))};
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "nsa: " << e.what() << '\n';
    return 2;
  }

  try {
    const Report r = action();
    detail::print(r, as_json, out);
    return r.suite.passed() ? 0 : 1;
  } catch (const SyntaxError& e) {
    err << "nsa: " << source << ':' << e.line() << ':' << e.column() << ": syntax error: " << e.message()
        << " (offset " << e.position() << ")\n";
  } catch (const Error& e) {
    err << "nsa: " << e.what() << '\n';
  }
  return 2;
}

}  // namespace nsa::cli
