#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "catval/annotate.hpp"
#include "catval/errors.hpp"

using namespace catval;

namespace {

std::string dataset_bytes(const Dataset& dataset) {
  std::ostringstream out;
  write_dataset(dataset, out);
  return out.str();
}

bool samples_equal(const AnnotatedSample& a, const AnnotatedSample& b) {
  return a.problem == b.problem && a.sol == b.sol && a.path == b.path && a.step == b.step &&
         a.k == b.k && a.c == b.c && a.value == b.value && a.final_step == b.final_step &&
         (!a.final_step || a.outcome == b.outcome);
}

}  // namespace

TEST_CASE("annotate emits one sample per step with exactly one final") {
  ReasoningTreeEnv env(EnvConfig{2, 3, 5, 0.0, 0.0});
  const Dataset dataset = annotate(env, {1, 1, 4, 9});
  REQUIRE(dataset.samples.size() == 3);
  int finals = 0;
  for (const auto& s : dataset.samples) {
    CHECK(s.step == static_cast<int>(s.path.size()));
    finals += s.final_step ? 1 : 0;
  }
  CHECK(finals == 1);
  CHECK(dataset.samples.back().final_step);
}

TEST_CASE("annotate bookkeeping at the paper-scale shape") {
  ReasoningTreeEnv env(EnvConfig{4, 8, 77, 0.0, 0.9});
  AnnotateOptions options;
  options.n_problems = 10;
  options.n_solutions = 15;
  options.k = 8;
  options.seed = 3;
  const Dataset dataset = annotate(env, options);
  CHECK(dataset.samples.size() == 10 * 15 * 8);

  // each non-final sample consumed k rollouts: 8 * 7 * 15 * 10 in total
  std::size_t non_final = 0;
  for (const auto& s : dataset.samples) non_final += s.final_step ? 0 : 1;
  CHECK(non_final * options.k == 8u * 7u * 15u * 10u);

  for (const auto& s : dataset.samples) {
    CHECK(s.c >= 0);
    CHECK(s.c <= s.k);
    CHECK(s.value == static_cast<double>(s.c) / s.k);  // k+1 representable values
    if (s.final_step) {
      CHECK((s.c == 0 || s.c == s.k));
      CHECK(s.value == static_cast<double>(s.outcome));
    }
  }
}

TEST_CASE("annotate output is sorted and deterministic across schedules") {
  ReasoningTreeEnv env(EnvConfig{3, 4, 11, 0.6, 0.2});
  AnnotateOptions options;
  options.n_problems = 6;
  options.n_solutions = 5;
  options.k = 4;
  options.seed = 21;

  const Dataset a = annotate(env, options);
  const Dataset b = annotate(env, options);
  CHECK(dataset_bytes(a) == dataset_bytes(b));

  options.threads = 7;
  const Dataset c = annotate(env, options);
  CHECK(dataset_bytes(a) == dataset_bytes(c));

  for (std::size_t i = 1; i < a.samples.size(); ++i) {
    const auto& prev = a.samples[i - 1];
    const auto& cur = a.samples[i];
    const auto key = [](const AnnotatedSample& s) {
      return std::tuple<int, int, int>(s.problem, s.sol, s.step);
    };
    CHECK(key(prev) < key(cur));
  }
}

TEST_CASE("annotate respects the problem offset") {
  ReasoningTreeEnv env(EnvConfig{3, 4, 11, 0.6, 0.2});
  AnnotateOptions options;
  options.n_problems = 3;
  options.n_solutions = 2;
  options.k = 4;
  options.problem_offset = 1000;
  const Dataset dataset = annotate(env, options);
  std::set<int> problems;
  for (const auto& s : dataset.samples) problems.insert(s.problem);
  CHECK(problems == std::set<int>{1000, 1001, 1002});
}

TEST_CASE("annotate rejects bad counts") {
  ReasoningTreeEnv env(EnvConfig{2, 2, 0, 0.0, 0.0});
  CHECK_THROWS_AS(annotate(env, {0, 1, 4, 0}), std::invalid_argument);
  CHECK_THROWS_AS(annotate(env, {1, 0, 4, 0}), std::invalid_argument);
  CHECK_THROWS_AS(annotate(env, {1, 1, 0, 0}), std::invalid_argument);
}

TEST_CASE("dataset write/read round trip is the identity") {
  ReasoningTreeEnv env(EnvConfig{3, 4, 2, 0.4, 0.1});
  const Dataset dataset = annotate(env, {4, 3, 8, 55});

  std::stringstream io;
  write_dataset(dataset, io);
  const Dataset back = read_dataset(io);
  CHECK(back.k == dataset.k);
  CHECK(back.env_hash == dataset.env_hash);
  CHECK(back.seed == dataset.seed);
  REQUIRE(back.samples.size() == dataset.samples.size());
  for (std::size_t i = 0; i < back.samples.size(); ++i)
    CHECK(samples_equal(back.samples[i], dataset.samples[i]));

  // byte-level reproduction after a round trip
  CHECK(dataset_bytes(back) == dataset_bytes(dataset));
}

TEST_CASE("dataset reader reports malformed and inconsistent records") {
  ReasoningTreeEnv env(EnvConfig{2, 3, 8, 0.0, 0.0});
  const Dataset dataset = annotate(env, {1, 2, 4, 9});
  const std::string text = dataset_bytes(dataset);

  SUBCASE("truncated final line names its line number") {
    std::istringstream in(text.substr(0, text.size() - 20));
    try {
      read_dataset(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1 + 2 * 3);  // header line plus six records; the last is chopped
      CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
  }

  SUBCASE("count above k is an integrity error") {
    std::string broken = text;
    const auto pos = broken.find("\"c\":");
    broken.replace(pos, 5, "\"c\":9");
    std::istringstream in(broken);
    CHECK_THROWS_AS(read_dataset(in), IntegrityError);
  }

  SUBCASE("per-record k must match the header") {
    std::string broken = text;
    const auto pos = broken.find("\"k\":4", broken.find('\n'));  // first record, not header
    broken.replace(pos, 5, "\"k\":5");
    std::istringstream in(broken);
    CHECK_THROWS_AS(read_dataset(in), IntegrityError);
  }

  SUBCASE("missing header is a parse error") {
    std::istringstream in("");
    CHECK_THROWS_AS(read_dataset(in), ParseError);
  }

  SUBCASE("missing file is an IO error") {
    CHECK_THROWS_AS(read_dataset("/nonexistent/data.jsonl"), IoError);
  }
}

TEST_CASE("entropy profile constants") {
  Dataset dataset;
  dataset.k = 4;

  SUBCASE("all-extreme values give zero entropy everywhere") {
    for (int step = 1; step <= 8; ++step) {
      AnnotatedSample s;
      s.step = step;
      s.k = 4;
      s.c = step % 2 == 0 ? 4 : 0;
      s.value = s.c / 4.0;
      dataset.samples.push_back(s);
    }
    for (const auto& [label, entropy] : entropy_profile(dataset)) {
      (void)label;
      CHECK(entropy == 0.0);
    }
  }

  SUBCASE("value one half gives ln 2") {
    for (int step = 1; step <= 8; ++step) {
      AnnotatedSample s;
      s.step = step;
      s.k = 4;
      s.c = 2;
      s.value = 0.5;
      dataset.samples.push_back(s);
    }
    const auto profile = entropy_profile(dataset);
    REQUIRE(profile.size() == 7);
    for (const auto& [label, entropy] : profile) {
      (void)label;
      CHECK(entropy == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("entropy profile emits labels in the fixed order") {
  ReasoningTreeEnv env(EnvConfig{4, 8, 13, 0.0, 0.9});
  const Dataset dataset = annotate(env, {20, 4, 8, 5});
  const auto profile = entropy_profile(dataset);
  REQUIRE(profile.size() == 7);
  const int expected[7] = {1, 2, 3, 4, -3, -2, -1};
  for (int i = 0; i < 7; ++i) CHECK(profile[i].first == expected[i]);

  // final step is exact, so its entropy must vanish
  CHECK(profile[6].second == 0.0);
}

TEST_CASE("entropy profile with shallow datasets keeps only available labels") {
  ReasoningTreeEnv env(EnvConfig{2, 2, 3, 0.0, 0.0});
  const Dataset dataset = annotate(env, {5, 3, 4, 1});
  const auto profile = entropy_profile(dataset);
  REQUIRE(profile.size() == 4);  // labels 1, 2, -2, -1
  CHECK(profile[0].first == 1);
  CHECK(profile[1].first == 2);
  CHECK(profile[2].first == -2);
  CHECK(profile[3].first == -1);

  Dataset empty;
  CHECK_THROWS_AS(entropy_profile(empty), std::invalid_argument);
}

TEST_CASE("entropy CSV format") {
  ReasoningTreeEnv env(EnvConfig{4, 8, 13, 0.0, 0.9});
  const Dataset dataset = annotate(env, {5, 3, 8, 5});
  std::ostringstream out;
  write_entropy_csv(entropy_profile(dataset), out);
  const std::string text = out.str();
  CHECK(text.rfind("step_label,entropy\n", 0) == 0);
  CHECK(text.find("\n-1,") != std::string::npos);
}
