#include "catval/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "catval/errors.hpp"
#include "catval/parallel.hpp"

namespace catval {

Dataset annotate(const ReasoningTreeEnv& env, const AnnotateOptions& options) {
  if (options.n_problems < 1 || options.n_solutions < 1 || options.k < 1)
    throw std::invalid_argument("annotate: counts must be at least 1");
  if (options.problem_offset < 0)
    throw std::invalid_argument("annotate: problem offset must be nonnegative");

  const int depth = env.depth();
  Dataset dataset;
  dataset.k = options.k;
  dataset.env_hash = env_config_hash(env.config());
  dataset.seed = options.seed;
  dataset.samples.resize(static_cast<std::size_t>(options.n_problems) * options.n_solutions * depth);

  const std::size_t units = static_cast<std::size_t>(options.n_problems) * options.n_solutions;
  parallel_for(units, options.threads, [&](std::size_t unit) {
    const int pi = static_cast<int>(unit) / options.n_solutions;
    const int si = static_cast<int>(unit) % options.n_solutions;
    const int problem = options.problem_offset + pi;
    const auto p64 = static_cast<std::uint64_t>(problem);
    const auto s64 = static_cast<std::uint64_t>(si);

    Rng solution_rng(hash_tokens(options.seed, {kTagSolution, p64, s64}));
    const auto [leaf, outcome] = env.rollout(State{problem, {}}, solution_rng);

    for (int t = 1; t <= depth; ++t) {
      AnnotatedSample sample;
      sample.problem = problem;
      sample.sol = si;
      sample.path.assign(leaf.path.begin(), leaf.path.begin() + t);
      sample.step = t;
      sample.k = options.k;
      sample.final_step = t == depth;
      if (sample.final_step) {
        sample.outcome = outcome;
        sample.c = options.k * outcome;
        sample.value = outcome;
      } else {
        const State prefix{problem, sample.path};
        int correct = 0;
        for (int r = 0; r < options.k; ++r) {
          Rng rng(hash_tokens(options.seed, {kTagMc, p64, s64, static_cast<std::uint64_t>(t),
                                             static_cast<std::uint64_t>(r)}));
          correct += env.rollout(prefix, rng).second;
        }
        sample.c = correct;
        sample.value = static_cast<double>(correct) / options.k;
      }
      dataset.samples[unit * depth + (t - 1)] = std::move(sample);
    }
  });
  return dataset;
}

namespace {

nlohmann::json sample_to_json(const AnnotatedSample& s) {
  nlohmann::json j;
  j["problem"] = s.problem;
  j["sol"] = s.sol;
  j["path"] = s.path;
  j["step"] = s.step;
  j["k"] = s.k;
  j["c"] = s.c;
  j["value"] = s.value;
  j["final"] = s.final_step;
  if (s.final_step) j["outcome"] = s.outcome;
  return j;
}

AnnotatedSample sample_from_json(const nlohmann::json& j, int line) {
  AnnotatedSample s;
  try {
    s.problem = j.at("problem").get<int>();
    s.sol = j.at("sol").get<int>();
    s.path = j.at("path").get<std::vector<int>>();
    s.step = j.at("step").get<int>();
    s.k = j.at("k").get<int>();
    s.c = j.at("c").get<int>();
    s.value = j.at("value").get<double>();
    s.final_step = j.at("final").get<bool>();
    if (s.final_step) s.outcome = j.at("outcome").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line, std::string("dataset record: ") + e.what());
  }
  return s;
}

}  // namespace

std::string dataset_header_line(const Dataset& dataset) {
  nlohmann::json header;
  header["env_hash"] = dataset.env_hash;
  header["k"] = dataset.k;
  header["seed"] = dataset.seed;
  return header.dump();
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  out << dataset_header_line(dataset) << '\n';
  for (const auto& s : dataset.samples) out << sample_to_json(s).dump() << '\n';
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset: " + path);
  write_dataset(dataset, out);
  if (!out) throw IoError("write failed: " + path);
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "dataset: missing header line");

  Dataset dataset;
  try {
    nlohmann::json header = nlohmann::json::parse(line);
    dataset.env_hash = header.at("env_hash").get<std::string>();
    dataset.k = header.at("k").get<int>();
    dataset.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("dataset header: ") + e.what());
  }
  if (dataset.k < 1) throw IntegrityError("dataset header: k must be at least 1");

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("dataset record: ") + e.what());
    }
    AnnotatedSample s = sample_from_json(j, line_no);
    if (s.k != dataset.k)
      throw IntegrityError("line " + std::to_string(line_no) + ": record k " +
                           std::to_string(s.k) + " does not match header k " +
                           std::to_string(dataset.k));
    if (s.c < 0 || s.c > s.k)
      throw IntegrityError("line " + std::to_string(line_no) + ": count c out of [0, k]");
    if (std::fabs(s.value - static_cast<double>(s.c) / s.k) > 1e-12)
      throw IntegrityError("line " + std::to_string(line_no) + ": value does not equal c/k");
    if (s.final_step && s.c != 0 && s.c != s.k)
      throw IntegrityError("line " + std::to_string(line_no) + ": final sample with fractional count");
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  return read_dataset(in);
}

std::vector<std::pair<int, double>> entropy_profile(const Dataset& dataset) {
  if (dataset.samples.empty()) throw std::invalid_argument("entropy_profile: empty dataset");

  int depth = 0;
  for (const auto& s : dataset.samples) depth = std::max(depth, s.step);

  auto binary_entropy = [](double v) {
    double e = 0.0;
    if (v > 0.0) e -= v * std::log(v);
    if (v < 1.0) e -= (1.0 - v) * std::log(1.0 - v);
    return e;
  };

  static const int labels[7] = {1, 2, 3, 4, -3, -2, -1};
  std::vector<std::pair<int, double>> profile;
  for (int label : labels) {
    const int step = label > 0 ? label : depth + 1 + label;
    if (step < 1 || step > depth) continue;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : dataset.samples) {
      if (s.step != step) continue;
      sum += binary_entropy(s.value);
      ++n;
    }
    if (n == 0) continue;
    profile.emplace_back(label, sum / static_cast<double>(n));
  }
  return profile;
}

void write_entropy_csv(const std::vector<std::pair<int, double>>& profile, std::ostream& out) {
  out << "step_label,entropy\n";
  char buf[48];
  for (const auto& [label, entropy] : profile) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g", label, entropy);
    out << buf << '\n';
  }
}

}  // namespace catval
