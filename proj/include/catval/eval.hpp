#pragma once

// Verifier evaluation against the environment's ground truth: Best-of-N
// reranking by final-state score (with the any-candidate-correct oracle rate)
// and verifier-guided beam search. Problems are evaluated independently with
// per-problem derived seeds, so reports do not depend on thread count.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "catval/env.hpp"
#include "catval/verifier.hpp"

namespace catval {

struct EvalRow {
  std::string method;        // "bon" or "beam"
  int n = 0;                 // candidates (BoN) or beams
  int m = 1;                 // beam width; 1 for BoN
  double success_rate = 0.0;
  double oracle_rate = 0.0;  // any candidate / any surviving beam correct
  int n_problems = 0;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

struct EvalOptions {
  int n_problems = 100;
  std::uint64_t seed = 0;
  int problem_offset = 0;
  int threads = 1;
};

using StateScorer = std::function<double(const State&)>;

// Candidate selection rule shared by both evaluations: highest score wins,
// ties resolved toward the lowest candidate index regardless of presentation
// order.
int select_best(const std::vector<std::pair<double, int>>& scored);

// Per problem, samples max(n_list) candidate solutions once; each N uses the
// first N of that shared pool (so oracle rates are monotone in N), scores
// every candidate's final state, and counts the top-scored candidate's
// correctness. One row per N.
EvalReport best_of_n(const ReasoningTreeEnv& env, const MlpVerifier& model,
                     const std::vector<int>& n_list, const EvalOptions& options);
EvalReport best_of_n_scored(const ReasoningTreeEnv& env, const StateScorer& scorer,
                            const std::vector<int>& n_list, const EvalOptions& options);

// N beams from the root; each depth every beam samples `width` actions from
// the policy, all N*width extensions are scored, and the top N survive
// (ties keep creation order). Success is the top beam's correctness at depth
// D; the oracle rate counts problems where any surviving beam is correct.
EvalReport beam_search_eval(const ReasoningTreeEnv& env, const MlpVerifier& model, int n_beams,
                            int width, const EvalOptions& options);
EvalReport beam_search_scored(const ReasoningTreeEnv& env, const StateScorer& scorer, int n_beams,
                              int width, const EvalOptions& options);

// CSV with header "method,N,M,success_rate,oracle_rate,n_problems,seed".
void write_report_csv(const EvalReport& report, std::ostream& out);

// Lossless JSON round trip.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& json_text);
void save_report(const EvalReport& report, const std::string& csv_path,
                 const std::string& json_path);
EvalReport load_report(const std::string& json_path);

}  // namespace catval
