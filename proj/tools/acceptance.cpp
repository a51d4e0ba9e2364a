// Runs the nine acceptance checks and prints one PASS/FAIL line for each.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "nsa/harness.hpp"

namespace {

using Clock = std::chrono::steady_clock;

std::string read_sample(const std::string& name) {
  const std::string path = std::string(NSA_SAMPLES_DIR) + "/" + name;
  std::ifstream in(path);
  if (!in) throw nsa::InvalidInput("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  Outcome(bool ok = false, std::string text = {}, std::vector<std::string> failed = {})
      : passed(ok), summary(std::move(text)), failures(std::move(failed)) {}

  bool passed = false;
  std::string summary;
  std::vector<std::string> failures;
};

Outcome from(const nsa::SuiteReport& r, std::string extra = {}) {
  Outcome o{r.passed(), std::to_string(r.instances) + " instances, " + std::to_string(r.failures) + " failures"};
  if (!extra.empty()) o.summary += ", " + extra;
  for (const auto& d : r.details)
    if (d.rfind("failed: ", 0) == 0) o.failures.push_back(d);
  return o;
}

Outcome merge(const Outcome& a, const Outcome& b) {
  Outcome o{a.passed && b.passed, a.summary + "; " + b.summary, a.failures};
  o.failures.insert(o.failures.end(), b.failures.begin(), b.failures.end());
  return o;
}

std::string seconds(Clock::duration d) {
  std::ostringstream ss;
  ss.precision(2);
  ss << std::fixed << std::chrono::duration<double>(d).count() << " s";
  return ss.str();
}

}  // namespace

int main() {
  using namespace nsa;
  constexpr std::uint64_t extension_seed = 1729;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"functor laws (carriers <= 3, |S| <= 3)",
       [] {
         const auto t0 = Clock::now();
         const auto r = functor_law_suite(3, 3);
         const auto elapsed = Clock::now() - t0;
         Outcome o = from(r, seconds(elapsed));
         if (elapsed >= std::chrono::seconds(60)) {
           o.passed = false;
           o.failures.push_back("runtime " + seconds(elapsed) + " exceeds 60 s");
         }
         return o;
       }},
      {"transfer battery (carriers <= 3, |S| <= 3)",
       [] {
         const auto r = transfer_suite(3, 3);
         return from(r, r.details.size() > 1 ? r.details[1] : "");
       }},
      {"level-2 regression battery",
       [] {
         const auto entries = parse_regression_battery(read_sample("regression.battery"));
         Outcome o = merge(from(run_regression(entries), std::to_string(entries.size()) + " entries"),
                           from(level2_facts_suite()));
         if (entries.size() < 20) {
           o.passed = false;
           o.failures.push_back("battery has fewer than 20 entries");
         }
         return o;
       }},
      {"nunustar criterion against direct evaluation",
       [] {
         const auto r = nunustar_suite(parse_regression_battery(read_sample("regression.battery")));
         return from(r, r.details.back());
       }},
      {"lr round trip (|B| <= 2, |E| <= 3, |X| <= 2)",
       [] {
         const auto r = roundtrip_suite(2, 3, 2);
         return from(r, r.details.back());
       }},
      {"ultrafilter extension (100 seeded instances)",
       [] {
         const auto r = extension_suite(extension_seed, 100);
         return from(r, r.details.front());
       }},
      {"stone and GF(2)", [] { return from(stone_suite(4, 6, 3)); }},
      {"well-order criterion over N and Z", [] { return from(well_order_suite()); }},
      {"saturation of x > k for k < 50", [] { return from(saturation_suite(50)); }},
  };

  std::size_t failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, "error", {e.what()}};
    }
    std::cout << "criterion " << i + 1 << " " << (o.passed ? "PASS" : "FAIL") << ": " << criteria[i].first << ": "
              << o.summary << std::endl;
    for (const auto& f : o.failures) std::cout << "    " << f << '\n';
    if (!o.passed) ++failed;
  }
  std::cout << (failed == 0 ? "PASS" : "FAIL") << '\n';
  return failed == 0 ? 0 : 1;
}
