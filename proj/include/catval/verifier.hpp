#pragma once

// The value-based process verifier: a small tanh MLP over hand-built state
// features, with either a logistic scalar head or a softmax categorical head
// whose expectation over a fixed support is the predicted value. Losses:
// scalar MSE, expectation MSE, Histogram Loss against a chosen posterior, and
// their convex combination. Gradients are exact analytic derivatives,
// validated against central finite differences, and training is a pure
// function of (dataset, config).

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "catval/annotate.hpp"
#include "catval/distribution.hpp"
#include "catval/env.hpp"

namespace catval {

// Feature layout: [running edge-score sum, t/D, last four edge scores in
// chronological order (front-padded with zeros when t < 4), constant 1].
inline constexpr int kFeatureDim = 7;
using FeatureVector = std::array<double, kFeatureDim>;

// Features of a non-root state. Root states carry no annotation, so depth 0
// is invalid.
FeatureVector featurize(const ReasoningTreeEnv& env, const State& s);

enum class HeadKind { scalar, categorical };

struct MlpVerifier {
  std::vector<int> layer_sizes;             // {input, hidden..., output}
  HeadKind head = HeadKind::scalar;
  Support support;                          // categorical heads only
  std::vector<std::vector<double>> weights; // weights[l]: sizes[l+1] x sizes[l], row-major
  std::vector<std::vector<double>> biases;  // biases[l]: sizes[l+1]

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
};

// Fresh verifier with Glorot-uniform weights and zero biases, deterministic
// in the seed. Scalar heads have output width 1; categorical heads match the
// support length.
MlpVerifier make_verifier(const std::vector<int>& hidden, HeadKind head, const Support& support,
                          std::uint64_t seed);

struct HeadOutput {
  HeadKind kind = HeadKind::scalar;
  double scalar = 0.0;        // logistic output in (0, 1)
  std::vector<double> probs;  // softmax over logits, sums to 1
};

HeadOutput forward(const MlpVerifier& model, const FeatureVector& features);

// Scalar heads: the squashed output. Categorical heads: expectation of the
// softmax over the model's support.
double predict_value(const MlpVerifier& model, const FeatureVector& features);

enum class LossMode { scalar_mse, exp_mse, hl, combined };
enum class Supervision { process, outcome_only };

struct TrainConfig {
  LossMode loss = LossMode::scalar_mse;
  PosteriorSpec posterior;     // hl and combined only
  double alpha = 0.5;          // combined: alpha * exp_mse + (1 - alpha) * hl
  Supervision supervision = Supervision::process;
  double learning_rate = 1e-3;
  int epochs = 10;
  int batch_size = 64;
  std::uint64_t seed = 0;
  Support support;             // categorical heads
  std::vector<int> hidden = {64, 64};
};

HeadKind head_kind_for(LossMode loss);

struct TrainSample {
  FeatureVector features{};
  int c = 0;
  int k = 1;
  bool final_step = false;
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

// Batch-mean loss and its exact gradients with respect to every parameter.
// hl/combined require the model support length to equal k+1 so posterior and
// head share bins.
std::pair<double, Gradients> loss_and_grad(const MlpVerifier& model,
                                           std::span<const TrainSample> batch,
                                           const TrainConfig& config);

// Maximum relative error between analytic gradients and central finite
// differences (step 1e-5), denominator max(|a|, |n|, 1e-8). Intended for
// small batches.
double grad_check(const MlpVerifier& model, std::span<const TrainSample> batch,
                  const TrainConfig& config);

struct TrainResult {
  MlpVerifier model;
  TrainConfig config;                // the exact config used
  std::vector<double> epoch_losses;  // mean per-sample loss per epoch
};

// Mini-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8) with per-epoch shuffles
// derived from config.seed. outcome_only supervision keeps final samples
// only; process keeps everything. Deterministic: same (env, dataset, config)
// gives bit-identical weights.
TrainResult train(const ReasoningTreeEnv& env, const Dataset& dataset, const TrainConfig& config);

// Model JSON: layer sizes, head kind, support, row-major weights at full
// precision, the train config, and the digest of the dataset header line.
void save_model(const MlpVerifier& model, const TrainConfig& config,
                const std::string& dataset_header_hash, const std::string& path);

struct LoadedModel {
  MlpVerifier model;
  TrainConfig config;
  std::string dataset_header_hash;
};

LoadedModel load_model(const std::string& path);

}  // namespace catval
