// Python bindings for the catval core. Enum-like arguments are plain strings
// ("equidistant", "one-hot", "wasserstein", ...) so the python surface stays
// close to the CLI flags.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "catval/annotate.hpp"
#include "catval/distance.hpp"
#include "catval/distribution.hpp"
#include "catval/env.hpp"
#include "catval/eval.hpp"
#include "catval/rng.hpp"
#include "catval/verifier.hpp"

namespace py = pybind11;
using namespace catval;

namespace {

PosteriorSpec spec_from(const std::string& name, std::optional<double> static_sigma) {
  PosteriorSpec spec = parse_posterior(name);
  if (static_sigma) spec.static_sigma = static_sigma;
  return spec;
}

DistanceMetric metric_from(const std::string& name) {
  if (name == "wasserstein") return DistanceMetric::wasserstein;
  if (name == "kl") return DistanceMetric::kl;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

LossMode loss_from(const std::string& name) {
  if (name == "scalar-mse") return LossMode::scalar_mse;
  if (name == "exp-mse") return LossMode::exp_mse;
  if (name == "hl") return LossMode::hl;
  if (name == "combined") return LossMode::combined;
  throw std::invalid_argument("unknown loss '" + name + "'");
}

TrainConfig build_train_config(const std::string& loss, const std::string& posterior,
                               std::optional<double> static_sigma, double alpha,
                               const std::string& supervision, double lr, int epochs, int batch,
                               std::uint64_t seed, const std::vector<int>& hidden,
                               const Support& support) {
  TrainConfig config;
  config.loss = loss_from(loss);
  config.posterior = spec_from(posterior, static_sigma);
  config.alpha = alpha;
  if (supervision == "process") config.supervision = Supervision::process;
  else if (supervision == "outcome") config.supervision = Supervision::outcome_only;
  else throw std::invalid_argument("unknown supervision '" + supervision + "'");
  config.learning_rate = lr;
  config.epochs = epochs;
  config.batch_size = batch;
  config.seed = seed;
  config.hidden = hidden;
  config.support = support;
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "categorical value-distribution laboratory for process verifiers";
#ifdef CATVAL_VERSION
  m.attr("__version__") = CATVAL_VERSION;
#endif

  // ---- distributions -------------------------------------------------------
  py::class_<Support>(m, "Support")
      .def_readonly("locations", &Support::locations)
      .def_property_readonly("kind", [](const Support& s) { return support_kind_name(s.kind); })
      .def("__len__", [](const Support& s) { return s.locations.size(); })
      .def("__eq__", [](const Support& a, const Support& b) { return a == b; });

  py::class_<CategoricalDistribution>(m, "CategoricalDistribution")
      .def_readonly("support", &CategoricalDistribution::support)
      .def_readonly("probs", &CategoricalDistribution::probs);

  m.def(
      "make_support",
      [](int size, const std::string& kind, bool normalize_cosine) {
        return make_support(size, parse_support_kind(kind), normalize_cosine);
      },
      py::arg("m"), py::arg("kind") = "equidistant", py::arg("normalize_cosine") = false);
  m.def("binomial_pmf", &binomial_pmf, py::arg("k"), py::arg("p"));
  m.def(
      "make_posterior",
      [](const std::string& kind, int c, int k, std::optional<double> static_sigma) {
        return make_posterior(spec_from(kind, static_sigma), c, k);
      },
      py::arg("kind"), py::arg("c"), py::arg("k"), py::arg("static_sigma") = py::none());
  m.def("expectation", &expectation, py::arg("dist"));
  m.def("std_normal_cdf", &std_normal_cdf, py::arg("x"));

  // ---- distance ------------------------------------------------------------
  m.def("wasserstein1", &wasserstein1, py::arg("a"), py::arg("b"));
  m.def("kl_divergence", &kl_divergence, py::arg("a"), py::arg("b"));
  m.def(
      "statistics_distance",
      [](const std::string& kind, int k, double p, const std::string& metric,
         std::optional<double> static_sigma) {
        return statistics_distance(spec_from(kind, static_sigma), k, p, metric_from(metric));
      },
      py::arg("kind"), py::arg("k"), py::arg("p"), py::arg("metric") = "wasserstein",
      py::arg("static_sigma") = py::none());
  m.def(
      "distance_sweep",
      [](const std::vector<std::string>& kinds, int k, double grid_step, const std::string& metric,
         std::optional<double> static_sigma, int threads) {
        std::vector<PosteriorSpec> specs;
        for (const auto& name : kinds) specs.push_back(spec_from(name, static_sigma));
        const auto rows = distance_sweep(specs, k, grid_step, metric_from(metric), threads);
        std::vector<std::tuple<std::string, double, double>> out;
        out.reserve(rows.size());
        for (const auto& row : rows) out.emplace_back(row.spec_name, row.p, row.distance);
        return out;
      },
      py::arg("specs"), py::arg("k"), py::arg("grid_step"), py::arg("metric") = "wasserstein",
      py::arg("static_sigma") = py::none(), py::arg("threads") = 1);

  // ---- env -----------------------------------------------------------------
  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init([](int branching, int depth, std::uint64_t seed, double policy_beta,
                       double threshold) {
             EnvConfig config{branching, depth, seed, policy_beta, threshold};
             validate(config);
             return config;
           }),
           py::arg("branching"), py::arg("depth"), py::arg("seed") = 0,
           py::arg("policy_beta") = 0.0, py::arg("threshold") = 0.0)
      .def_readonly("branching", &EnvConfig::branching)
      .def_readonly("depth", &EnvConfig::depth)
      .def_readonly("seed", &EnvConfig::seed)
      .def_readonly("policy_beta", &EnvConfig::policy_beta)
      .def_readonly("threshold", &EnvConfig::threshold);

  m.def("canonical_env_json", &canonical_env_json, py::arg("config"));
  m.def("env_config_hash", &env_config_hash, py::arg("config"));
  m.def("load_env_config", &load_env_config, py::arg("path"));
  m.def("save_env_config", &save_env_config, py::arg("config"), py::arg("path"));

  py::class_<State>(m, "State")
      .def(py::init([](int problem_id, const std::vector<int>& path) {
             return State{problem_id, path};
           }),
           py::arg("problem_id"), py::arg("path") = std::vector<int>{})
      .def_readonly("problem_id", &State::problem_id)
      .def_readonly("path", &State::path)
      .def_property_readonly("depth", &State::depth);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &Rng::next_u64)
      .def("next_double", &Rng::next_double);

  py::class_<ReasoningTreeEnv>(m, "ReasoningTreeEnv")
      .def(py::init<const EnvConfig&>(), py::arg("config"))
      .def_property_readonly("config", &ReasoningTreeEnv::config)
      .def("is_terminal", &ReasoningTreeEnv::is_terminal, py::arg("state"))
      .def("edge_score", &ReasoningTreeEnv::edge_score, py::arg("state"), py::arg("action"))
      .def("policy_dist", &ReasoningTreeEnv::policy_dist, py::arg("state"))
      .def("leaf_correct", &ReasoningTreeEnv::leaf_correct, py::arg("state"))
      .def("true_value", &ReasoningTreeEnv::true_value, py::arg("state"))
      .def("rollout", &ReasoningTreeEnv::rollout, py::arg("state"), py::arg("rng"))
      .def("mc_estimate", &ReasoningTreeEnv::mc_estimate, py::arg("state"), py::arg("k"),
           py::arg("rng"));

  // ---- annotate --------------------------------------------------------------
  py::class_<AnnotatedSample>(m, "AnnotatedSample")
      .def_readonly("problem", &AnnotatedSample::problem)
      .def_readonly("sol", &AnnotatedSample::sol)
      .def_readonly("path", &AnnotatedSample::path)
      .def_readonly("step", &AnnotatedSample::step)
      .def_readonly("k", &AnnotatedSample::k)
      .def_readonly("c", &AnnotatedSample::c)
      .def_readonly("value", &AnnotatedSample::value)
      .def_readonly("final", &AnnotatedSample::final_step)
      .def_readonly("outcome", &AnnotatedSample::outcome);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("k", &Dataset::k)
      .def_readonly("env_hash", &Dataset::env_hash)
      .def_readonly("seed", &Dataset::seed)
      .def_readonly("samples", &Dataset::samples);

  m.def(
      "annotate",
      [](const ReasoningTreeEnv& env, int n_problems, int n_solutions, int k, std::uint64_t seed,
         int problem_offset, int threads) {
        AnnotateOptions options{n_problems, n_solutions, k, seed, problem_offset, threads};
        return annotate(env, options);
      },
      py::arg("env"), py::arg("n_problems"), py::arg("n_solutions"), py::arg("k"),
      py::arg("seed") = 0, py::arg("problem_offset") = 0, py::arg("threads") = 1);
  m.def("write_dataset",
        py::overload_cast<const Dataset&, const std::string&>(&write_dataset), py::arg("dataset"),
        py::arg("path"));
  m.def("read_dataset", py::overload_cast<const std::string&>(&read_dataset), py::arg("path"));
  m.def("entropy_profile", &entropy_profile, py::arg("dataset"));

  // ---- verifier --------------------------------------------------------------
  py::class_<MlpVerifier>(m, "MlpVerifier")
      .def_readonly("layer_sizes", &MlpVerifier::layer_sizes)
      .def_readonly("support", &MlpVerifier::support)
      .def_property_readonly(
          "head", [](const MlpVerifier& v) { return v.head == HeadKind::scalar ? "scalar" : "categorical"; });

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("epoch_losses", &TrainResult::epoch_losses);

  m.def("featurize", &featurize, py::arg("env"), py::arg("state"));
  m.def(
      "predict_value",
      [](const MlpVerifier& model, const FeatureVector& features) {
        return predict_value(model, features);
      },
      py::arg("model"), py::arg("features"));
  m.def(
      "train",
      [](const ReasoningTreeEnv& env, const Dataset& dataset, const std::string& loss,
         const std::string& posterior, std::optional<double> static_sigma, double alpha,
         const std::string& supervision, double lr, int epochs, int batch, std::uint64_t seed,
         const std::vector<int>& hidden, const std::string& support_kind, int support_size,
         bool normalize_cosine) {
        Support support;
        if (head_kind_for(loss_from(loss)) == HeadKind::categorical) {
          const int size = support_size > 0 ? support_size : dataset.k + 1;
          support = make_support(size, parse_support_kind(support_kind), normalize_cosine);
        }
        return train(env, dataset,
                     build_train_config(loss, posterior, static_sigma, alpha, supervision, lr,
                                        epochs, batch, seed, hidden, support));
      },
      py::arg("env"), py::arg("dataset"), py::arg("loss"), py::arg("posterior") = "one-hot",
      py::arg("static_sigma") = py::none(), py::arg("alpha") = 0.5,
      py::arg("supervision") = "process", py::arg("lr") = 1e-3, py::arg("epochs") = 10,
      py::arg("batch") = 64, py::arg("seed") = 0,
      py::arg("hidden") = std::vector<int>{64, 64}, py::arg("support_kind") = "equidistant",
      py::arg("support_size") = 0, py::arg("normalize_cosine") = false);
  m.def(
      "save_model",
      [](const TrainResult& result, const std::string& path,
         const std::string& dataset_header_hash) {
        save_model(result.model, result.config, dataset_header_hash, path);
      },
      py::arg("result"), py::arg("path"), py::arg("dataset_header_hash") = "");
  m.def(
      "load_model",
      [](const std::string& path) {
        const LoadedModel loaded = load_model(path);
        return py::make_tuple(loaded.model, loaded.dataset_header_hash);
      },
      py::arg("path"));

  // ---- eval ------------------------------------------------------------------
  py::class_<EvalRow>(m, "EvalRow")
      .def_readonly("method", &EvalRow::method)
      .def_readonly("n", &EvalRow::n)
      .def_readonly("m", &EvalRow::m)
      .def_readonly("success_rate", &EvalRow::success_rate)
      .def_readonly("oracle_rate", &EvalRow::oracle_rate)
      .def_readonly("n_problems", &EvalRow::n_problems)
      .def_readonly("seed", &EvalRow::seed);

  py::class_<EvalReport>(m, "EvalReport").def_readonly("rows", &EvalReport::rows);

  m.def(
      "best_of_n",
      [](const ReasoningTreeEnv& env, const MlpVerifier& model, const std::vector<int>& n_list,
         int n_problems, std::uint64_t seed, int problem_offset, int threads) {
        EvalOptions options{n_problems, seed, problem_offset, threads};
        return best_of_n(env, model, n_list, options);
      },
      py::arg("env"), py::arg("model"), py::arg("n_list"), py::arg("n_problems"),
      py::arg("seed") = 0, py::arg("problem_offset") = 0, py::arg("threads") = 1);
  m.def(
      "beam_search_eval",
      [](const ReasoningTreeEnv& env, const MlpVerifier& model, int n_beams, int width,
         int n_problems, std::uint64_t seed, int problem_offset, int threads) {
        EvalOptions options{n_problems, seed, problem_offset, threads};
        return beam_search_eval(env, model, n_beams, width, options);
      },
      py::arg("env"), py::arg("model"), py::arg("n_beams"), py::arg("width"),
      py::arg("n_problems"), py::arg("seed") = 0, py::arg("problem_offset") = 0,
      py::arg("threads") = 1);
}
