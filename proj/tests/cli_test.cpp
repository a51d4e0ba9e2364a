#include <gtest/gtest.h>

#include <json.hpp>
#include <regex>

#include "nsa/cli.hpp"

using namespace nsa;

namespace {

struct Run {
  int status;
  std::string out, err;
};

Run nsa_run(std::vector<std::string> args) {
  args.insert(args.begin(), "nsa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string sample(const std::string& name) { return std::string(NSA_SAMPLES_DIR) + "/" + name; }

std::string last_line(const std::string& s) {
  auto t = s.substr(0, s.find_last_not_of('\n') + 1);
  return t.substr(t.find_last_of('\n') + 1);
}

}  // namespace

TEST(Cli, CompareExample) {
  auto r = nsa_run({"compare", "(< (nu2 eps) (starnu eps))"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "True\nPASS\n");
  EXPECT_TRUE(r.err.empty());
}

TEST(Cli, FunctorLawsSummary) {
  auto r = nsa_run({"functor-laws", "--k", "3", "--s", "3"});
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(\n\d+ instances, 0 failures\nPASS\n$)"))) << r.out;
}

TEST(Cli, BadFormulaFileGivesPosition) {
  auto r = nsa_run({"transfer", sample("bad.formula")});
  EXPECT_EQ(r.status, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("bad.formula:1:1"), std::string::npos) << r.err;
  auto inline_text = nsa_run({"transfer", "(forall (x A) (R x"});
  EXPECT_EQ(inline_text.status, 2);
  EXPECT_NE(inline_text.err.find("<argument>:1:15:"), std::string::npos) << inline_text.err;
  EXPECT_EQ(nsa_run({"transfer", "missing.formula"}).status, 2);
}

TEST(Cli, TransferWithModel) {
  auto r = nsa_run({"transfer", sample("has-maximum.formula"), "--model", sample("strict-order.model")});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(last_line(r.out), "PASS");
  EXPECT_NE(r.out.find("6 instances, 0 failures"), std::string::npos);
  auto sorted = nsa_run({"transfer", "(forall (x B) (R x x))"});
  EXPECT_EQ(sorted.status, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(nsa_run({}).status, 2);
  EXPECT_EQ(nsa_run({"stone", "--unknown"}).status, 2);
  EXPECT_EQ(nsa_run({"compare"}).status, 2);
  EXPECT_EQ(nsa_run({"compare", "(+ n"}).status, 2);
  EXPECT_EQ(nsa_run({"lr-run", "no-such.lr"}).status, 2);
  EXPECT_EQ(nsa_run({"--help"}).status, 0);
}

TEST(Cli, ExpectationMismatchIsFailure) {
  auto r = nsa_run({"compare", "(< n 1)", "--expect", "True"});
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(last_line(r.out), "FAIL");
  EXPECT_EQ(nsa_run({"level2", "(starnu omega)", "--expect", "StarNuOfUnlimited"}).status, 0);
  EXPECT_EQ(nsa_run({"eval", "(* (+ n 1) (- n 1))"}).status, 0);
}

TEST(Cli, JsonFields) {
  auto r = nsa_run({"stone", "--json"});
  ASSERT_EQ(r.status, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["command"], "stone");
  EXPECT_EQ(j["failures"], 0);
  EXPECT_EQ(j["instances"], 28);
  EXPECT_TRUE(j["details"].is_array());
}

TEST(Cli, RegressAndLrFiles) {
  auto r = nsa_run({"regress", sample("regression.battery")});
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(nsa_run({"lr-run", sample("principal.lr")}).status, 0);
  EXPECT_EQ(nsa_run({"lr-run", sample("table.lr")}).status, 0);
  EXPECT_EQ(nsa_run({"extend", sample("table.lr"), "--instances", "30"}).status, 0);
}

TEST(Cli, SeededRunsAreDeterministic) {
  auto a = nsa_run({"extend", "--seed", "5", "--instances", "40"});
  auto b = nsa_run({"extend", "--seed", "5", "--instances", "40"});
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Regression, BatteryFormat) {
  auto entries = parse_regression_battery("; comment\n(< (starnu omega) (nu2 omega)) => True\n\n(level2 (nu2 5)) => StandardStandard\n");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].line, 2u);
  EXPECT_EQ(entries[1].expected, "StandardStandard");
  EXPECT_TRUE(run_regression(entries).passed());
  try {
    parse_regression_battery("(< 1 2) => True\n(< 1 2\n");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_regression_battery("(< 1 2)\n"), SyntaxError);
  auto wrong = run_regression(parse_regression_battery("(< 1 2) => False\n"));
  EXPECT_EQ(wrong.failures, 1u);
}
