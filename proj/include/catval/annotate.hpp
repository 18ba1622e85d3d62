#pragma once

// Monte Carlo annotation pipeline: sample solutions per problem, split each
// into step prefixes, annotate every prefix with a k-rollout value estimate
// (final states get their exact outcome instead), persist the dataset as
// line-oriented JSON, and compute the per-step entropy profile.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "catval/env.hpp"

namespace catval {

struct AnnotatedSample {
  int problem = 0;
  int sol = 0;
  std::vector<int> path;   // the state s_t
  int step = 1;            // t = path length, 1-based
  int k = 1;               // rollout budget
  int c = 0;               // correct rollouts (final: k * outcome)
  double value = 0.0;      // c / k (final: the exact outcome)
  bool final_step = false; // t == D
  int outcome = 0;         // meaningful only when final_step
};

struct Dataset {
  int k = 1;
  std::string env_hash;
  std::uint64_t seed = 0;
  std::vector<AnnotatedSample> samples;
};

struct AnnotateOptions {
  int n_problems = 1;
  int n_solutions = 1;
  int k = 8;
  std::uint64_t seed = 0;
  int problem_offset = 0;  // first problem id; disjoint ranges keep train/eval separate
  int threads = 1;
};

// One sample per (problem, solution, step). Rollout seeds are derived per
// (seed, problem, solution, step, rollout index), so the result is a pure
// function of (env config, options) regardless of thread count. Samples come
// out sorted by (problem, sol, step).
Dataset annotate(const ReasoningTreeEnv& env, const AnnotateOptions& options);

// JSONL: a header line {"env_hash":...,"k":...,"seed":...} followed by one
// record per sample. Read validates per-record k and 0 <= c <= k, throwing
// ParseError (malformed line) or IntegrityError (constraint violation).
void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset(const Dataset& dataset, const std::string& path);
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::string& path);

// The header line exactly as write_dataset emits it; its FNV-1a digest ties
// models to the dataset they were trained on.
std::string dataset_header_line(const Dataset& dataset);

// Mean binary entropy (natural log) of sample values at step labels
// {1, 2, 3, 4, -3, -2, -1}; negative labels count back from the last step.
// Labels whose step falls outside [1, D] are omitted.
std::vector<std::pair<int, double>> entropy_profile(const Dataset& dataset);

// CSV with header "step_label,entropy".
void write_entropy_csv(const std::vector<std::pair<int, double>>& profile, std::ostream& out);

}  // namespace catval
