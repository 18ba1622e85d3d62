#include "catval/env.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "catval/errors.hpp"

namespace catval {

void validate(const EnvConfig& config) {
  if (config.branching < 2) throw std::invalid_argument("env: branching must be at least 2");
  if (config.depth < 1) throw std::invalid_argument("env: depth must be at least 1");
  if (!(config.policy_beta >= 0.0)) throw std::invalid_argument("env: policy_beta must be >= 0");
  std::uint64_t leaves = 1;
  for (int t = 0; t < config.depth; ++t) {
    leaves *= static_cast<std::uint64_t>(config.branching);
    if (leaves > (1ull << 20)) throw std::invalid_argument("env: B^D must not exceed 2^20");
  }
}

std::string canonical_env_json(const EnvConfig& config) {
  nlohmann::ordered_json j;
  j["branching"] = config.branching;
  j["depth"] = config.depth;
  j["seed"] = config.seed;
  j["policy_beta"] = config.policy_beta;
  j["threshold"] = config.threshold;
  return j.dump();
}

std::string env_config_hash(const EnvConfig& config) {
  return hex64(fnv1a64(canonical_env_json(config)));
}

EnvConfig parse_env_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, std::string("env config: ") + e.what());
  }
  EnvConfig config;
  try {
    config.branching = j.at("branching").get<int>();
    config.depth = j.at("depth").get<int>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.policy_beta = j.at("policy_beta").get<double>();
    config.threshold = j.at("threshold").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("env config: ") + e.what());
  }
  validate(config);
  return config;
}

EnvConfig load_env_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open env config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_env_config(buf.str());
}

void save_env_config(const EnvConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write env config: " + path);
  out << canonical_env_json(config) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

ReasoningTreeEnv::ReasoningTreeEnv(const EnvConfig& config) : config_(config) {
  validate(config_);
}

void ReasoningTreeEnv::check_state(const State& s) const {
  if (s.problem_id < 0) throw std::invalid_argument("env: problem id must be nonnegative");
  if (s.depth() > config_.depth) throw std::invalid_argument("env: state deeper than D");
  for (int a : s.path)
    if (a < 0 || a >= config_.branching)
      throw std::invalid_argument("env: action index out of range");
}

std::uint64_t ReasoningTreeEnv::state_hash(const State& s) const {
  std::uint64_t h = hash_tokens(config_.seed, {kTagEdge, static_cast<std::uint64_t>(s.problem_id)});
  for (int a : s.path) h = hash_chain(h, static_cast<std::uint64_t>(a));
  return h;
}

double ReasoningTreeEnv::edge_score(const State& s, int action) const {
  check_state(s);
  if (is_terminal(s)) throw std::invalid_argument("env: edge_score on a terminal state");
  if (action < 0 || action >= config_.branching)
    throw std::invalid_argument("env: action index out of range");
  return score_from(hash_chain(state_hash(s), static_cast<std::uint64_t>(action)));
}

void ReasoningTreeEnv::policy_from_hash(std::uint64_t node_hash, std::vector<double>& scores,
                                        std::vector<double>& probs) const {
  const int b = config_.branching;
  scores.resize(b);
  probs.resize(b);
  for (int a = 0; a < b; ++a)
    scores[a] = score_from(hash_chain(node_hash, static_cast<std::uint64_t>(a)));
  double best = scores[0];
  for (int a = 1; a < b; ++a) best = std::max(best, scores[a]);
  double sum = 0.0;
  for (int a = 0; a < b; ++a) {
    probs[a] = std::exp(config_.policy_beta * (scores[a] - best));
    sum += probs[a];
  }
  for (int a = 0; a < b; ++a) probs[a] /= sum;
}

std::vector<double> ReasoningTreeEnv::policy_dist(const State& s) const {
  check_state(s);
  if (is_terminal(s)) throw std::invalid_argument("env: policy_dist on a terminal state");
  std::vector<double> scores, probs;
  policy_from_hash(state_hash(s), scores, probs);
  return probs;
}

double ReasoningTreeEnv::path_score_sum(const State& s) const {
  std::uint64_t h = hash_tokens(config_.seed, {kTagEdge, static_cast<std::uint64_t>(s.problem_id)});
  double sum = 0.0;
  for (int a : s.path) {
    h = hash_chain(h, static_cast<std::uint64_t>(a));
    sum += score_from(h);
  }
  return sum;
}

int ReasoningTreeEnv::leaf_correct(const State& s) const {
  check_state(s);
  if (!is_terminal(s)) throw std::invalid_argument("env: leaf_correct on a non-terminal state");
  return path_score_sum(s) >= config_.threshold ? 1 : 0;
}

double ReasoningTreeEnv::value_rec(std::uint64_t node_hash, double score_sum, int depth) const {
  if (depth == config_.depth) return score_sum >= config_.threshold ? 1.0 : 0.0;
  std::vector<double> scores, probs;
  policy_from_hash(node_hash, scores, probs);
  double value = 0.0;
  for (int a = 0; a < config_.branching; ++a) {
    const std::uint64_t child = hash_chain(node_hash, static_cast<std::uint64_t>(a));
    value += probs[a] * value_rec(child, score_sum + scores[a], depth + 1);
  }
  return value;
}

double ReasoningTreeEnv::true_value(const State& s) const {
  check_state(s);
  return value_rec(state_hash(s), path_score_sum(s), s.depth());
}

std::pair<State, int> ReasoningTreeEnv::rollout(const State& s, Rng& rng) const {
  check_state(s);
  State cur = s;
  std::uint64_t h = state_hash(cur);
  std::vector<double> scores, probs;
  while (cur.depth() < config_.depth) {
    policy_from_hash(h, scores, probs);
    const int a = static_cast<int>(rng.sample_categorical(probs));
    cur.path.push_back(a);
    h = hash_chain(h, static_cast<std::uint64_t>(a));
  }
  return {cur, leaf_correct(cur)};
}

std::pair<int, double> ReasoningTreeEnv::mc_estimate(const State& s, int k, Rng& rng) const {
  if (k < 1) throw std::invalid_argument("env: mc_estimate requires k >= 1");
  check_state(s);
  int correct = 0;
  for (int i = 0; i < k; ++i) correct += rollout(s, rng).second;
  return {correct, static_cast<double>(correct) / k};
}

}  // namespace catval
