#pragma once

// Seeded synthetic reasoning-tree MDP standing in for a step-by-step
// generator: branching-B trees of depth D, deterministic transitions,
// discount 1, zero intermediate reward, and a binary outcome reward at the
// leaves. A leaf is correct when the sum of its per-edge scores clears the
// configured threshold, which gives intermediate states observable structure
// (running score, depth) a small verifier can generalize from.
//
// Every queryable quantity is a pure function of (seed, problem_id, path),
// derived through the fixed hash chain in rng.hpp, so trees are never stored
// and all queries are thread-safe.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "catval/rng.hpp"

namespace catval {

struct EnvConfig {
  int branching = 2;           // B >= 2
  int depth = 1;               // D >= 1, with B^D <= 2^20
  std::uint64_t seed = 0;
  double policy_beta = 0.0;    // softmax sharpness; 0 gives the uniform policy
  double threshold = 0.0;      // leaf correctness: path score sum >= threshold
};

// Throws std::invalid_argument when the config violates its bounds.
void validate(const EnvConfig& config);

// Canonical JSON with keys branching, depth, seed, policy_beta, threshold in
// that order, no whitespace; the config hash is the FNV-1a digest of it.
std::string canonical_env_json(const EnvConfig& config);
std::string env_config_hash(const EnvConfig& config);
EnvConfig parse_env_config(const std::string& json_text);
EnvConfig load_env_config(const std::string& path);   // IoError when missing
void save_env_config(const EnvConfig& config, const std::string& path);

struct State {
  int problem_id = 0;
  std::vector<int> path;  // action indices in [0, B)

  int depth() const { return static_cast<int>(path.size()); }
};

class ReasoningTreeEnv {
 public:
  explicit ReasoningTreeEnv(const EnvConfig& config);

  const EnvConfig& config() const { return config_; }
  int branching() const { return config_.branching; }
  int depth() const { return config_.depth; }
  bool is_terminal(const State& s) const { return s.depth() == config_.depth; }

  // Deterministic score in [-1, 1) for the edge out of a non-terminal state.
  double edge_score(const State& s, int action) const;

  // softmax(policy_beta * edge scores) over the B actions.
  std::vector<double> policy_dist(const State& s) const;

  // 1 iff the sum of edge scores along the full path clears the threshold.
  int leaf_correct(const State& s) const;

  // Exact state value: backward induction over the subtree under the policy.
  double true_value(const State& s) const;

  // Samples actions from the policy until depth D; returns the leaf and its
  // binary outcome. A terminal input returns itself without touching rng.
  std::pair<State, int> rollout(const State& s, Rng& rng) const;

  // k independent rollouts; returns (correct count, count / k).
  std::pair<int, double> mc_estimate(const State& s, int k, Rng& rng) const;

 private:
  EnvConfig config_;

  void check_state(const State& s) const;
  std::uint64_t state_hash(const State& s) const;
  double path_score_sum(const State& s) const;
  double value_rec(std::uint64_t node_hash, double score_sum, int depth) const;
  void policy_from_hash(std::uint64_t node_hash, std::vector<double>& scores,
                        std::vector<double>& probs) const;

  static double score_from(std::uint64_t h) {
    return 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
  }
};

}  // namespace catval
