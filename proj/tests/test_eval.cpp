#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "catval/annotate.hpp"
#include "catval/eval.hpp"

using namespace catval;

namespace {

MlpVerifier quick_model(const ReasoningTreeEnv& env, LossMode loss, Supervision supervision,
                        std::uint64_t seed) {
  const Dataset dataset = annotate(env, {30, 6, 8, seed});
  TrainConfig config;
  config.loss = loss;
  config.posterior = {PosteriorKind::gauss_dynamic, {}};
  if (head_kind_for(loss) == HeadKind::categorical)
    config.support = make_support(9, SupportKind::equidistant);
  config.supervision = supervision;
  config.hidden = {16, 16};
  config.learning_rate = 3e-3;
  config.epochs = 8;
  config.batch_size = 32;
  config.seed = seed;
  return train(env, dataset, config).model;
}

}  // namespace

TEST_CASE("select_best prefers the lowest index among ties and ignores order") {
  std::vector<std::pair<double, int>> scored = {{0.4, 0}, {0.9, 1}, {0.9, 2}, {0.1, 3}};
  CHECK(select_best(scored) == 1);

  std::vector<std::pair<double, int>> shuffled = {{0.9, 2}, {0.1, 3}, {0.9, 1}, {0.4, 0}};
  CHECK(select_best(shuffled) == 1);

  CHECK_THROWS_AS(select_best({}), std::invalid_argument);
}

TEST_CASE("best-of-1 matches the generator regardless of the scorer") {
  ReasoningTreeEnv env(EnvConfig{4, 6, 31, 0.9, 0.8});
  EvalOptions options;
  options.n_problems = 150;
  options.seed = 5;

  const auto flat = best_of_n_scored(env, [](const State&) { return 0.0; }, {1}, options);
  const auto oracle = best_of_n_scored(env, [&](const State& s) { return env.true_value(s); }, {1},
                                       options);
  CHECK(flat.rows[0].success_rate == oracle.rows[0].success_rate);

  // generator accuracy computed independently from the same candidate seeds
  int correct = 0;
  for (int i = 0; i < options.n_problems; ++i) {
    Rng rng(hash_tokens(options.seed, {kTagBon, static_cast<std::uint64_t>(i), 0ull}));
    correct += env.rollout(State{i, {}}, rng).second;
  }
  CHECK(flat.rows[0].success_rate ==
        doctest::Approx(static_cast<double>(correct) / options.n_problems).epsilon(1e-12));
}

TEST_CASE("oracle rate is non-decreasing in N and bounds the success rate") {
  ReasoningTreeEnv env(EnvConfig{4, 6, 31, 0.9, 0.8});
  EvalOptions options;
  options.n_problems = 120;
  options.seed = 9;

  const auto report =
      best_of_n_scored(env, [&](const State& s) { return env.true_value(s); }, {1, 2, 4, 8, 16},
                       options);
  REQUIRE(report.rows.size() == 5);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].success_rate <= report.rows[i].oracle_rate);
    if (i > 0) CHECK(report.rows[i].oracle_rate >= report.rows[i - 1].oracle_rate);
  }

  // a perfect ranker turns any correct candidate into a success
  for (const auto& row : report.rows) CHECK(row.success_rate == row.oracle_rate);
}

TEST_CASE("ground-truth scoring weakly dominates a trained model on shared candidates") {
  ReasoningTreeEnv env(EnvConfig{4, 6, 47, 0.9, 0.8});
  const MlpVerifier model = quick_model(env, LossMode::scalar_mse, Supervision::process, 3);

  for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull, 15ull}) {
    EvalOptions options;
    options.n_problems = 100;
    options.seed = seed;
    options.problem_offset = 500;
    const auto with_model = best_of_n(env, model, {8}, options);
    const auto with_truth =
        best_of_n_scored(env, [&](const State& s) { return env.true_value(s); }, {8}, options);
    CHECK(with_truth.rows[0].success_rate >= with_model.rows[0].success_rate);
    CHECK(with_truth.rows[0].oracle_rate == with_model.rows[0].oracle_rate);
  }
}

TEST_CASE("best_of_n is deterministic and schedule independent") {
  ReasoningTreeEnv env(EnvConfig{3, 5, 77, 0.5, 0.2});
  const MlpVerifier model = quick_model(env, LossMode::exp_mse, Supervision::process, 4);

  EvalOptions options;
  options.n_problems = 60;
  options.seed = 21;
  const auto a = best_of_n(env, model, {4, 8}, options);
  const auto b = best_of_n(env, model, {4, 8}, options);
  options.threads = 8;
  const auto c = best_of_n(env, model, {4, 8}, options);
  CHECK(report_to_json(a) == report_to_json(b));
  CHECK(report_to_json(a) == report_to_json(c));
}

TEST_CASE("beam search with one beam and width one is a plain rollout") {
  ReasoningTreeEnv env(EnvConfig{4, 6, 31, 0.9, 0.8});
  EvalOptions options;
  options.n_problems = 150;
  options.seed = 3;

  const auto beam = beam_search_scored(env, [](const State&) { return 0.0; }, 1, 1, options);
  int correct = 0;
  for (int i = 0; i < options.n_problems; ++i) {
    Rng rng(hash_tokens(options.seed, {kTagBeam, static_cast<std::uint64_t>(i)}));
    correct += env.rollout(State{i, {}}, rng).second;
  }
  CHECK(beam.rows[0].success_rate ==
        doctest::Approx(static_cast<double>(correct) / options.n_problems).epsilon(1e-12));
  CHECK(beam.rows[0].n == 1);
  CHECK(beam.rows[0].m == 1);
}

TEST_CASE("ground-truth-guided beams beat plain rollouts on matched problems") {
  ReasoningTreeEnv env(EnvConfig{4, 6, 59, 0.7, 0.6});
  EvalOptions options;
  options.n_problems = 200;
  options.seed = 13;

  const auto guided =
      beam_search_scored(env, [&](const State& s) { return env.true_value(s); }, 4, 4, options);
  const auto plain = beam_search_scored(env, [](const State&) { return 0.0; }, 1, 1, options);
  CHECK(guided.rows[0].success_rate >= plain.rows[0].success_rate);
  CHECK(guided.rows[0].success_rate > 0.5);  // strong guidance on a 0.3-ish generator
}

TEST_CASE("beam search is deterministic and schedule independent") {
  ReasoningTreeEnv env(EnvConfig{3, 5, 77, 0.5, 0.2});
  const MlpVerifier model = quick_model(env, LossMode::hl, Supervision::process, 5);

  EvalOptions options;
  options.n_problems = 50;
  options.seed = 31;
  const auto a = beam_search_eval(env, model, 4, 3, options);
  const auto b = beam_search_eval(env, model, 4, 3, options);
  options.threads = 6;
  const auto c = beam_search_eval(env, model, 4, 3, options);
  CHECK(report_to_json(a) == report_to_json(b));
  CHECK(report_to_json(a) == report_to_json(c));
}

TEST_CASE("eval rejects invalid arguments") {
  ReasoningTreeEnv env(EnvConfig{3, 5, 77, 0.5, 0.2});
  const MlpVerifier model = quick_model(env, LossMode::scalar_mse, Supervision::process, 6);
  EvalOptions options;
  options.n_problems = 10;
  CHECK_THROWS_AS(best_of_n(env, model, {}, options), std::invalid_argument);
  CHECK_THROWS_AS(best_of_n(env, model, {0}, options), std::invalid_argument);
  CHECK_THROWS_AS(beam_search_eval(env, model, 0, 2, options), std::invalid_argument);
  options.n_problems = 0;
  CHECK_THROWS_AS(best_of_n(env, model, {2}, options), std::invalid_argument);
}

TEST_CASE("reports serialize losslessly and print the pinned CSV header") {
  EvalReport report;
  report.rows.push_back({"bon", 16, 1, 0.3333333333333333, 0.959, 200, 12345678901234567ull});
  report.rows.push_back({"beam", 4, 4, 0.123456789012345, 0.5, 200, 7ull});

  const std::string json_text = report_to_json(report);
  const EvalReport back = report_from_json(json_text);
  REQUIRE(back.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.rows[i].method == report.rows[i].method);
    CHECK(back.rows[i].n == report.rows[i].n);
    CHECK(back.rows[i].m == report.rows[i].m);
    CHECK(back.rows[i].success_rate == report.rows[i].success_rate);
    CHECK(back.rows[i].oracle_rate == report.rows[i].oracle_rate);
    CHECK(back.rows[i].n_problems == report.rows[i].n_problems);
    CHECK(back.rows[i].seed == report.rows[i].seed);
  }

  std::ostringstream csv;
  write_report_csv(report, csv);
  CHECK(csv.str().rfind("method,N,M,success_rate,oracle_rate,n_problems,seed\n", 0) == 0);
  CHECK(csv.str().find("bon,16,1,0.333333,0.959000,200,12345678901234567\n") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path();
  const std::string csv_path = (dir / "catval_report_test.csv").string();
  const std::string json_path = (dir / "catval_report_test.json").string();
  save_report(report, csv_path, json_path);
  const EvalReport loaded = load_report(json_path);
  CHECK(report_to_json(loaded) == json_text);
  std::filesystem::remove(csv_path);
  std::filesystem::remove(json_path);
}
