#include "catval/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "catval/errors.hpp"
#include "catval/parallel.hpp"

namespace catval {

int select_best(const std::vector<std::pair<double, int>>& scored) {
  if (scored.empty()) throw std::invalid_argument("select_best: no candidates");
  double best_score = scored[0].first;
  int best_index = scored[0].second;
  for (const auto& [score, index] : scored) {
    if (score > best_score || (score == best_score && index < best_index)) {
      best_score = score;
      best_index = index;
    }
  }
  return best_index;
}

namespace {

StateScorer model_scorer(const ReasoningTreeEnv& env, const MlpVerifier& model) {
  if (model.input_dim() != kFeatureDim)
    throw std::invalid_argument("eval: model input width does not match the feature layout");
  return [&env, &model](const State& s) { return predict_value(model, featurize(env, s)); };
}

void check_options(const EvalOptions& options) {
  if (options.n_problems < 1) throw std::invalid_argument("eval: n_problems must be at least 1");
  if (options.problem_offset < 0)
    throw std::invalid_argument("eval: problem offset must be nonnegative");
}

}  // namespace

EvalReport best_of_n_scored(const ReasoningTreeEnv& env, const StateScorer& scorer,
                            const std::vector<int>& n_list, const EvalOptions& options) {
  check_options(options);
  if (n_list.empty()) throw std::invalid_argument("best_of_n: empty N list");
  for (int n : n_list)
    if (n < 1) throw std::invalid_argument("best_of_n: every N must be at least 1");
  const int n_max = *std::max_element(n_list.begin(), n_list.end());

  struct Candidate {
    double score;
    int correct;
  };
  std::vector<std::vector<Candidate>> pools(options.n_problems);
  parallel_for(pools.size(), options.threads, [&](std::size_t i) {
    const int problem = options.problem_offset + static_cast<int>(i);
    auto& pool = pools[i];
    pool.resize(n_max);
    for (int j = 0; j < n_max; ++j) {
      Rng rng(hash_tokens(options.seed, {kTagBon, static_cast<std::uint64_t>(problem),
                                         static_cast<std::uint64_t>(j)}));
      const auto [leaf, correct] = env.rollout(State{problem, {}}, rng);
      pool[j] = {scorer(leaf), correct};
    }
  });

  EvalReport report;
  for (int n : n_list) {
    int successes = 0, oracle = 0;
    for (const auto& pool : pools) {
      std::vector<std::pair<double, int>> scored;
      scored.reserve(n);
      bool any_correct = false;
      for (int j = 0; j < n; ++j) {
        scored.emplace_back(pool[j].score, j);
        any_correct = any_correct || pool[j].correct == 1;
      }
      successes += pool[select_best(scored)].correct;
      oracle += any_correct ? 1 : 0;
    }
    EvalRow row;
    row.method = "bon";
    row.n = n;
    row.m = 1;
    row.success_rate = static_cast<double>(successes) / options.n_problems;
    row.oracle_rate = static_cast<double>(oracle) / options.n_problems;
    row.n_problems = options.n_problems;
    row.seed = options.seed;
    report.rows.push_back(std::move(row));
  }
  return report;
}

EvalReport best_of_n(const ReasoningTreeEnv& env, const MlpVerifier& model,
                     const std::vector<int>& n_list, const EvalOptions& options) {
  return best_of_n_scored(env, model_scorer(env, model), n_list, options);
}

EvalReport beam_search_scored(const ReasoningTreeEnv& env, const StateScorer& scorer, int n_beams,
                              int width, const EvalOptions& options) {
  check_options(options);
  if (n_beams < 1 || width < 1)
    throw std::invalid_argument("beam_search: beam count and width must be at least 1");

  std::vector<int> success(options.n_problems, 0), oracle(options.n_problems, 0);
  parallel_for(static_cast<std::size_t>(options.n_problems), options.threads, [&](std::size_t i) {
    const int problem = options.problem_offset + static_cast<int>(i);
    Rng rng(hash_tokens(options.seed, {kTagBeam, static_cast<std::uint64_t>(problem)}));

    std::vector<State> beams(n_beams, State{problem, {}});
    struct Scored {
      State state;
      double score;
      int order;
    };
    std::vector<Scored> extended;
    for (int t = 0; t < env.depth(); ++t) {
      extended.clear();
      for (std::size_t b = 0; b < beams.size(); ++b) {
        const auto probs = env.policy_dist(beams[b]);
        for (int slot = 0; slot < width; ++slot) {
          const int action = static_cast<int>(rng.sample_categorical(probs));
          State next = beams[b];
          next.path.push_back(action);
          extended.push_back({std::move(next), 0.0,
                              static_cast<int>(b) * width + slot});
        }
      }
      for (auto& cand : extended) cand.score = scorer(cand.state);
      std::stable_sort(extended.begin(), extended.end(),
                       [](const Scored& a, const Scored& b) { return a.score > b.score; });
      const int keep = std::min<int>(n_beams, static_cast<int>(extended.size()));
      beams.clear();
      for (int b = 0; b < keep; ++b) beams.push_back(std::move(extended[b].state));
    }

    success[i] = env.leaf_correct(beams[0]);
    for (const auto& beam : beams)
      if (env.leaf_correct(beam) == 1) {
        oracle[i] = 1;
        break;
      }
  });

  EvalRow row;
  row.method = "beam";
  row.n = n_beams;
  row.m = width;
  row.success_rate = 0.0;
  row.oracle_rate = 0.0;
  for (int i = 0; i < options.n_problems; ++i) {
    row.success_rate += success[i];
    row.oracle_rate += oracle[i];
  }
  row.success_rate /= options.n_problems;
  row.oracle_rate /= options.n_problems;
  row.n_problems = options.n_problems;
  row.seed = options.seed;

  EvalReport report;
  report.rows.push_back(std::move(row));
  return report;
}

EvalReport beam_search_eval(const ReasoningTreeEnv& env, const MlpVerifier& model, int n_beams,
                            int width, const EvalOptions& options) {
  return beam_search_scored(env, model_scorer(env, model), n_beams, width, options);
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "method,N,M,success_rate,oracle_rate,n_problems,seed\n";
  char buf[160];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), ",%d,%d,%.6f,%.6f,%d,%llu", row.n, row.m, row.success_rate,
                  row.oracle_rate, row.n_problems,
                  static_cast<unsigned long long>(row.seed));
    out << row.method << buf << '\n';
  }
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json j;
    j["method"] = row.method;
    j["n"] = row.n;
    j["m"] = row.m;
    j["success_rate"] = row.success_rate;
    j["oracle_rate"] = row.oracle_rate;
    j["n_problems"] = row.n_problems;
    j["seed"] = row.seed;
    rows.push_back(std::move(j));
  }
  nlohmann::json j;
  j["rows"] = std::move(rows);
  return j.dump();
}

EvalReport report_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, std::string("report: ") + e.what());
  }
  EvalReport report;
  try {
    for (const auto& rj : j.at("rows")) {
      EvalRow row;
      row.method = rj.at("method").get<std::string>();
      row.n = rj.at("n").get<int>();
      row.m = rj.at("m").get<int>();
      row.success_rate = rj.at("success_rate").get<double>();
      row.oracle_rate = rj.at("oracle_rate").get<double>();
      row.n_problems = rj.at("n_problems").get<int>();
      row.seed = rj.at("seed").get<std::uint64_t>();
      report.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("report: ") + e.what());
  }
  return report;
}

void save_report(const EvalReport& report, const std::string& csv_path,
                 const std::string& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write report: " + csv_path);
  write_report_csv(report, csv);
  if (!csv) throw IoError("write failed: " + csv_path);

  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write report: " + json_path);
  js << report_to_json(report) << '\n';
  if (!js) throw IoError("write failed: " + json_path);
}

EvalReport load_report(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open report: " + json_path);
  std::stringstream buf;
  buf << in.rdbuf();
  return report_from_json(buf.str());
}

}  // namespace catval
