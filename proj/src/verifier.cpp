#include "catval/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "catval/errors.hpp"

namespace catval {

FeatureVector featurize(const ReasoningTreeEnv& env, const State& s) {
  const int t = s.depth();
  if (t < 1) throw std::invalid_argument("featurize: root states carry no annotation");

  FeatureVector f{};
  State prefix{s.problem_id, {}};
  prefix.path.reserve(t);
  std::vector<double> edges(t);
  for (int i = 0; i < t; ++i) {
    edges[i] = env.edge_score(prefix, s.path[i]);
    prefix.path.push_back(s.path[i]);
  }
  f[0] = std::accumulate(edges.begin(), edges.end(), 0.0);
  f[1] = static_cast<double>(t) / env.depth();
  for (int j = 0; j < 4; ++j) {
    const int idx = t - 4 + j;
    f[2 + j] = idx >= 0 ? edges[idx] : 0.0;
  }
  f[6] = 1.0;
  return f;
}

HeadKind head_kind_for(LossMode loss) {
  return loss == LossMode::scalar_mse ? HeadKind::scalar : HeadKind::categorical;
}

MlpVerifier make_verifier(const std::vector<int>& hidden, HeadKind head, const Support& support,
                          std::uint64_t seed) {
  MlpVerifier model;
  model.head = head;
  model.layer_sizes.push_back(kFeatureDim);
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("make_verifier: hidden widths must be positive");
    model.layer_sizes.push_back(h);
  }
  if (head == HeadKind::categorical) {
    if (support.size() < 2)
      throw std::invalid_argument("make_verifier: categorical head needs a support");
    model.support = support;
    model.layer_sizes.push_back(support.size());
  } else {
    model.layer_sizes.push_back(1);
  }

  Rng rng(seed);
  const int layers = static_cast<int>(model.layer_sizes.size()) - 1;
  model.weights.resize(layers);
  model.biases.resize(layers);
  for (int l = 0; l < layers; ++l) {
    const int fan_in = model.layer_sizes[l];
    const int fan_out = model.layer_sizes[l + 1];
    const double r = std::sqrt(6.0 / (fan_in + fan_out));
    model.weights[l].resize(static_cast<std::size_t>(fan_out) * fan_in);
    for (double& w : model.weights[l]) w = r * rng.next_signed();
    model.biases[l].assign(fan_out, 0.0);
  }
  return model;
}

namespace {

struct ForwardTrace {
  std::vector<std::vector<double>> activations;  // input + each hidden layer output
  std::vector<double> logits;                    // pre-head linear output
};

void forward_trace(const MlpVerifier& model, const FeatureVector& features, ForwardTrace& trace) {
  if (model.input_dim() != kFeatureDim)
    throw std::invalid_argument("forward: feature length does not match the model input width");
  const int layers = static_cast<int>(model.weights.size());
  trace.activations.resize(layers);
  trace.activations[0].assign(features.begin(), features.end());

  for (int l = 0; l < layers; ++l) {
    const auto& x = trace.activations[l];
    const int in = model.layer_sizes[l];
    const int out = model.layer_sizes[l + 1];
    std::vector<double>& y = l + 1 < layers ? trace.activations[l + 1] : trace.logits;
    y.assign(out, 0.0);
    const double* w = model.weights[l].data();
    for (int o = 0; o < out; ++o) {
      double acc = model.biases[l][o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = acc;
    }
    if (l + 1 < layers)
      for (double& v : y) v = std::tanh(v);
  }
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_inplace(std::vector<double>& v) {
  double best = v[0];
  for (double x : v) best = std::max(best, x);
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - best);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

HeadOutput head_from_logits(const MlpVerifier& model, std::vector<double> logits) {
  HeadOutput out;
  out.kind = model.head;
  if (model.head == HeadKind::scalar) {
    out.scalar = logistic(logits[0]);
  } else {
    softmax_inplace(logits);
    out.probs = std::move(logits);
  }
  return out;
}

void check_batch_config(const MlpVerifier& model, std::span<const TrainSample> batch,
                        const TrainConfig& config) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  if (head_kind_for(config.loss) != model.head)
    throw std::invalid_argument("loss_and_grad: loss mode does not match the model head");
  if (config.loss == LossMode::hl || config.loss == LossMode::combined) {
    for (const auto& s : batch)
      if (model.support.size() != s.k + 1)
        throw std::invalid_argument(
            "loss_and_grad: histogram loss needs support size k+1 so posterior and head share bins");
  }
  if (config.loss == LossMode::combined && !(config.alpha >= 0.0 && config.alpha <= 1.0))
    throw std::invalid_argument("loss_and_grad: alpha must lie in [0, 1]");
}

}  // namespace

HeadOutput forward(const MlpVerifier& model, const FeatureVector& features) {
  ForwardTrace trace;
  forward_trace(model, features, trace);
  return head_from_logits(model, trace.logits);
}

double predict_value(const MlpVerifier& model, const FeatureVector& features) {
  const HeadOutput out = forward(model, features);
  if (out.kind == HeadKind::scalar) return out.scalar;
  double value = 0.0;
  for (int i = 0; i < model.support.size(); ++i)
    value += out.probs[i] * model.support.locations[i];
  return value;
}

std::pair<double, Gradients> loss_and_grad(const MlpVerifier& model,
                                           std::span<const TrainSample> batch,
                                           const TrainConfig& config) {
  check_batch_config(model, batch, config);

  const int layers = static_cast<int>(model.weights.size());
  Gradients grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);
  for (int l = 0; l < layers; ++l) {
    grads.weights[l].assign(model.weights[l].size(), 0.0);
    grads.biases[l].assign(model.biases[l].size(), 0.0);
  }

  // Posterior targets depend only on c; cache per batch.
  std::vector<CategoricalDistribution> posterior_cache;
  const bool needs_posterior = config.loss == LossMode::hl || config.loss == LossMode::combined;
  if (needs_posterior) posterior_cache.resize(batch[0].k + 1);

  double total_loss = 0.0;
  ForwardTrace trace;
  std::vector<double> delta, next_delta;

  for (const TrainSample& sample : batch) {
    forward_trace(model, sample.features, trace);
    const double y = static_cast<double>(sample.c) / sample.k;

    // Head loss and dL/dlogits.
    double loss = 0.0;
    delta.assign(trace.logits.size(), 0.0);
    if (model.head == HeadKind::scalar) {
      const double o = logistic(trace.logits[0]);
      const double err = o - y;
      loss = err * err;
      delta[0] = 2.0 * err * o * (1.0 - o);
    } else {
      std::vector<double> probs = trace.logits;
      softmax_inplace(probs);
      const int m = static_cast<int>(probs.size());

      double exp_loss = 0.0;
      std::vector<double> exp_delta;
      if (config.loss == LossMode::exp_mse || config.loss == LossMode::combined) {
        double v = 0.0;
        for (int j = 0; j < m; ++j) v += probs[j] * model.support.locations[j];
        const double err = v - y;
        exp_loss = err * err;
        exp_delta.resize(m);
        for (int j = 0; j < m; ++j)
          exp_delta[j] = 2.0 * err * probs[j] * (model.support.locations[j] - v);
      }

      double hl_loss = 0.0;
      std::vector<double> hl_delta;
      if (needs_posterior) {
        auto& target = posterior_cache[sample.c];
        if (target.probs.empty()) target = make_posterior(config.posterior, sample.c, sample.k);
        for (int j = 0; j < m; ++j)
          if (target.probs[j] > 0.0) hl_loss -= target.probs[j] * std::log(probs[j]);
        hl_delta.resize(m);
        for (int j = 0; j < m; ++j) hl_delta[j] = probs[j] - target.probs[j];
      }

      switch (config.loss) {
        case LossMode::exp_mse:
          loss = exp_loss;
          delta = std::move(exp_delta);
          break;
        case LossMode::hl:
          loss = hl_loss;
          delta = std::move(hl_delta);
          break;
        case LossMode::combined:
          loss = config.alpha * exp_loss + (1.0 - config.alpha) * hl_loss;
          for (int j = 0; j < m; ++j)
            delta[j] = config.alpha * exp_delta[j] + (1.0 - config.alpha) * hl_delta[j];
          break;
        default:
          throw std::invalid_argument("loss_and_grad: unsupported loss mode");
      }
    }
    total_loss += loss;

    // Backprop through the linear layers and tanh activations.
    for (int l = layers - 1; l >= 0; --l) {
      const auto& x = trace.activations[l];
      const int in = model.layer_sizes[l];
      const int out = model.layer_sizes[l + 1];
      double* gw = grads.weights[l].data();
      for (int o = 0; o < out; ++o) {
        grads.biases[l][o] += delta[o];
        double* row = gw + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) row[i] += delta[o] * x[i];
      }
      if (l > 0) {
        next_delta.assign(in, 0.0);
        const double* w = model.weights[l].data();
        for (int o = 0; o < out; ++o) {
          const double* row = w + static_cast<std::size_t>(o) * in;
          for (int i = 0; i < in; ++i) next_delta[i] += row[i] * delta[o];
        }
        for (int i = 0; i < in; ++i) next_delta[i] *= 1.0 - x[i] * x[i];
        delta = next_delta;
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (int l = 0; l < layers; ++l) {
    for (double& g : grads.weights[l]) g *= inv_n;
    for (double& g : grads.biases[l]) g *= inv_n;
  }
  return {total_loss * inv_n, std::move(grads)};
}

double grad_check(const MlpVerifier& model, std::span<const TrainSample> batch,
                  const TrainConfig& config) {
  const auto [loss, grads] = loss_and_grad(model, batch, config);
  (void)loss;

  MlpVerifier probe = model;
  const double h = 1e-5;
  double worst = 0.0;

  auto probe_param = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = loss_and_grad(probe, batch, config).first;
    param = saved - h;
    const double down = loss_and_grad(probe, batch, config).first;
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    worst = std::max(worst, std::fabs(analytic - numeric) / denom);
  };

  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (std::size_t i = 0; i < probe.weights[l].size(); ++i)
      probe_param(probe.weights[l][i], grads.weights[l][i]);
    for (std::size_t i = 0; i < probe.biases[l].size(); ++i)
      probe_param(probe.biases[l][i], grads.biases[l][i]);
  }
  return worst;
}

TrainResult train(const ReasoningTreeEnv& env, const Dataset& dataset, const TrainConfig& config) {
  if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0.0))
    throw std::invalid_argument("train: epochs, batch size, and learning rate must be positive");
  const HeadKind head = head_kind_for(config.loss);
  if (head == HeadKind::categorical && config.support.size() < 2)
    throw std::invalid_argument("train: categorical losses need a support");
  if ((config.loss == LossMode::hl || config.loss == LossMode::combined) &&
      config.support.size() != dataset.k + 1)
    throw std::invalid_argument("train: histogram loss needs support size k+1");
  if (!dataset.env_hash.empty() && dataset.env_hash != env_config_hash(env.config()))
    throw IntegrityError("train: dataset was annotated under a different env config");

  std::vector<TrainSample> samples;
  samples.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) {
    if (config.supervision == Supervision::outcome_only && !s.final_step) continue;
    TrainSample ts;
    ts.features = featurize(env, State{s.problem, s.path});
    ts.c = s.c;
    ts.k = s.k;
    ts.final_step = s.final_step;
    samples.push_back(ts);
  }
  if (samples.empty()) throw std::invalid_argument("train: supervision filter left no samples");

  TrainResult result;
  result.config = config;
  result.model = make_verifier(config.hidden, head, config.support,
                               hash_tokens(config.seed, {kTagInit}));
  MlpVerifier& model = result.model;

  const int layers = static_cast<int>(model.weights.size());
  std::vector<std::vector<double>> m_w(layers), v_w(layers), m_b(layers), v_b(layers);
  for (int l = 0; l < layers; ++l) {
    m_w[l].assign(model.weights[l].size(), 0.0);
    v_w[l].assign(model.weights[l].size(), 0.0);
    m_b[l].assign(model.biases[l].size(), 0.0);
    v_b[l].assign(model.biases[l].size(), 0.0);
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  auto adam_update = [&](std::vector<double>& theta, std::vector<double>& m,
                         std::vector<double>& v, const std::vector<double>& g) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      theta[i] -= config.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  };

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainSample> batch;
  batch.reserve(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(hash_tokens(config.seed, {kTagShuffle, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(samples[order[i]]);
      auto [loss, grads] = loss_and_grad(model, batch, config);
      epoch_loss += loss * static_cast<double>(batch.size());
      ++step;
      for (int l = 0; l < layers; ++l) {
        adam_update(model.weights[l], m_w[l], v_w[l], grads.weights[l]);
        adam_update(model.biases[l], m_b[l], v_b[l], grads.biases[l]);
      }
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(samples.size()));
  }
  return result;
}

namespace {

nlohmann::json support_to_json(const Support& support) {
  nlohmann::json j;
  j["kind"] = support_kind_name(support.kind);
  j["locations"] = support.locations;
  return j;
}

Support support_from_json(const nlohmann::json& j) {
  Support s;
  s.kind = parse_support_kind(j.at("kind").get<std::string>());
  s.locations = j.at("locations").get<std::vector<double>>();
  return s;
}

std::string loss_name(LossMode loss) {
  switch (loss) {
    case LossMode::scalar_mse: return "scalar-mse";
    case LossMode::exp_mse: return "exp-mse";
    case LossMode::hl: return "hl";
    case LossMode::combined: return "combined";
  }
  throw std::invalid_argument("loss_name: unknown mode");
}

LossMode parse_loss(const std::string& name) {
  if (name == "scalar-mse") return LossMode::scalar_mse;
  if (name == "exp-mse") return LossMode::exp_mse;
  if (name == "hl") return LossMode::hl;
  if (name == "combined") return LossMode::combined;
  throw std::invalid_argument("parse_loss: unknown loss '" + name + "'");
}

}  // namespace

void save_model(const MlpVerifier& model, const TrainConfig& config,
                const std::string& dataset_header_hash, const std::string& path) {
  nlohmann::json j;
  j["layer_sizes"] = model.layer_sizes;
  j["head"] = model.head == HeadKind::scalar ? "scalar" : "categorical";
  if (model.head == HeadKind::categorical) j["support"] = support_to_json(model.support);
  j["weights"] = model.weights;
  j["biases"] = model.biases;

  nlohmann::json tc;
  tc["loss"] = loss_name(config.loss);
  tc["posterior"] = posterior_name(config.posterior);
  if (config.posterior.static_sigma) tc["static_sigma"] = *config.posterior.static_sigma;
  tc["alpha"] = config.alpha;
  tc["supervision"] = config.supervision == Supervision::process ? "process" : "outcome";
  tc["learning_rate"] = config.learning_rate;
  tc["epochs"] = config.epochs;
  tc["batch_size"] = config.batch_size;
  tc["seed"] = config.seed;
  tc["hidden"] = config.hidden;
  j["train_config"] = tc;
  j["dataset_header_hash"] = dataset_header_hash;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write model: " + path);
  out << j.dump() << '\n';
  if (!out) throw IoError("write failed: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model: " + path);
  std::stringstream buf;
  buf << in.rdbuf();

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, std::string("model: ") + e.what());
  }

  LoadedModel loaded;
  try {
    loaded.model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    loaded.model.head = j.at("head").get<std::string>() == "scalar" ? HeadKind::scalar
                                                                    : HeadKind::categorical;
    if (loaded.model.head == HeadKind::categorical)
      loaded.model.support = support_from_json(j.at("support"));
    loaded.model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    loaded.model.biases = j.at("biases").get<std::vector<std::vector<double>>>();

    const auto& tc = j.at("train_config");
    loaded.config.loss = parse_loss(tc.at("loss").get<std::string>());
    loaded.config.posterior = parse_posterior(tc.at("posterior").get<std::string>());
    if (tc.contains("static_sigma"))
      loaded.config.posterior.static_sigma = tc.at("static_sigma").get<double>();
    loaded.config.alpha = tc.at("alpha").get<double>();
    loaded.config.supervision = tc.at("supervision").get<std::string>() == "process"
                                    ? Supervision::process
                                    : Supervision::outcome_only;
    loaded.config.learning_rate = tc.at("learning_rate").get<double>();
    loaded.config.epochs = tc.at("epochs").get<int>();
    loaded.config.batch_size = tc.at("batch_size").get<int>();
    loaded.config.seed = tc.at("seed").get<std::uint64_t>();
    loaded.config.hidden = tc.at("hidden").get<std::vector<int>>();
    loaded.config.support = loaded.model.support;
    loaded.dataset_header_hash = j.at("dataset_header_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model: ") + e.what());
  }
  return loaded;
}

}  // namespace catval
