// catval command-line front end. One subcommand per experiment surface:
//   env-info        inspect an environment config (hash, size, probe stats)
//   annotate        Monte Carlo-annotate step prefixes into a JSONL dataset
//   train           fit a verifier under a chosen loss / posterior
//   eval-bon        Best-of-N reranking against ground truth
//   eval-beam       verifier-guided beam search
//   distance-sweep  statistics-based distance over a ground-truth p grid
//   entropy         per-step entropy profile of a dataset
//
// Every subcommand writes a RunManifest JSON beside its primary output.
// All randomness flows from explicit --seed flags. Exit codes: 0 success,
// 1 validation error, 2 I/O error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "catval/annotate.hpp"
#include "catval/distance.hpp"
#include "catval/distribution.hpp"
#include "catval/env.hpp"
#include "catval/errors.hpp"
#include "catval/eval.hpp"
#include "catval/parallel.hpp"
#include "catval/rng.hpp"
#include "catval/verifier.hpp"

#ifndef CATVAL_VERSION
#define CATVAL_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw catval::IoError("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require_input(const std::string& path) {
  if (!std::filesystem::exists(path)) throw catval::IoError("missing input file: " + path);
}

std::string file_hash(const std::string& path) { return catval::hex64(catval::fnv1a64(read_file(path))); }

// Collects resolved config values, input hashes, and output paths during a
// subcommand run, then lands beside the primary output.
struct ManifestBuilder {
  std::string subcommand;
  json config = json::object();
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void input(const std::string& path) { inputs[path] = file_hash(path); }
  void output(const std::string& path) { outputs.push_back(path); }

  void write() const {
    if (outputs.empty()) return;
    json j;
    j["subcommand"] = subcommand;
    j["version"] = CATVAL_VERSION;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const std::string path = outputs.front() + ".manifest.json";
    std::ofstream out(path);
    if (!out) throw catval::IoError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
  }
};

std::vector<catval::PosteriorSpec> parse_posterior_list(const std::vector<std::string>& names,
                                                        double static_sigma) {
  std::vector<catval::PosteriorSpec> specs;
  for (const auto& name : names) {
    catval::PosteriorSpec spec = catval::parse_posterior(name);
    if (spec.kind == catval::PosteriorKind::gauss_static && static_sigma > 0.0)
      spec.static_sigma = static_sigma;
    specs.push_back(spec);
  }
  return specs;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw catval::IoError("cannot write file: " + path);
  out << text;
  if (!out) throw catval::IoError("write failed: " + path);
}

std::string sibling_json_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

// ---------------------------------------------------------------------------
// subcommand runners
// ---------------------------------------------------------------------------

int run_env_info(const std::string& env_path, int probe, std::uint64_t probe_seed,
                 const std::string& out_path, int threads) {
  require_input(env_path);
  ManifestBuilder manifest;
  manifest.subcommand = "env-info";
  manifest.input(env_path);
  manifest.config = {{"env", env_path}, {"probe", probe}, {"probe_seed", probe_seed}};

  const catval::EnvConfig config = catval::load_env_config(env_path);
  catval::ReasoningTreeEnv env(config);

  std::uint64_t leaves = 1;
  for (int t = 0; t < config.depth; ++t) leaves *= static_cast<std::uint64_t>(config.branching);

  json info;
  info["config"] = json::parse(catval::canonical_env_json(config));
  info["hash"] = catval::env_config_hash(config);
  info["leaves_per_problem"] = leaves;

  if (probe > 0) {
    std::vector<double> root_values(probe);
    std::vector<double> leaf_accuracy(probe);
    catval::parallel_for(static_cast<std::size_t>(probe), threads, [&](std::size_t i) {
      const catval::State root{static_cast<int>(i), {}};
      root_values[i] = env.true_value(root);
      int correct = 0;
      const int samples = 64;
      for (int j = 0; j < samples; ++j) {
        catval::Rng rng(catval::hash_tokens(probe_seed, {static_cast<std::uint64_t>(i),
                                                         static_cast<std::uint64_t>(j)}));
        correct += env.rollout(root, rng).second;
      }
      leaf_accuracy[i] = static_cast<double>(correct) / samples;
    });
    double mean_root = 0.0, mean_acc = 0.0;
    for (int i = 0; i < probe; ++i) {
      mean_root += root_values[i];
      mean_acc += leaf_accuracy[i];
    }
    info["probe"] = {{"problems", probe},
                     {"mean_root_value", mean_root / probe},
                     {"mean_rollout_accuracy", mean_acc / probe}};
  }

  std::cout << info.dump(2) << '\n';
  if (!out_path.empty()) {
    write_text(out_path, info.dump(2) + "\n");
    manifest.output(out_path);
    manifest.write();
  }
  return 0;
}

int run_annotate(const std::string& env_path, int problems, int solutions, int k,
                 std::uint64_t seed, int offset, const std::string& out_path, int threads) {
  require_input(env_path);
  ManifestBuilder manifest;
  manifest.subcommand = "annotate";
  manifest.input(env_path);
  manifest.config = {{"env", env_path},     {"problems", problems}, {"solutions", solutions},
                     {"k", k},              {"seed", seed},         {"problem_offset", offset},
                     {"out", out_path}};

  catval::ReasoningTreeEnv env(catval::load_env_config(env_path));
  catval::AnnotateOptions options;
  options.n_problems = problems;
  options.n_solutions = solutions;
  options.k = k;
  options.seed = seed;
  options.problem_offset = offset;
  options.threads = threads;

  const catval::Dataset dataset = catval::annotate(env, options);
  catval::write_dataset(dataset, out_path);
  manifest.output(out_path);
  manifest.write();
  std::cout << "wrote " << dataset.samples.size() << " samples to " << out_path << '\n';
  return 0;
}

int run_train(const std::string& env_path, const std::string& data_path,
              const std::string& loss_name, const std::string& posterior_name,
              double static_sigma, double alpha, const std::string& supervision, double lr,
              int epochs, int batch, std::uint64_t seed, const std::vector<int>& hidden,
              const std::string& support_kind, int support_size, bool cosine_normalized,
              const std::string& out_path) {
  require_input(env_path);
  require_input(data_path);
  ManifestBuilder manifest;
  manifest.subcommand = "train";
  manifest.input(env_path);
  manifest.input(data_path);

  catval::ReasoningTreeEnv env(catval::load_env_config(env_path));
  const catval::Dataset dataset = catval::read_dataset(data_path);

  catval::TrainConfig config;
  if (loss_name == "scalar-mse") config.loss = catval::LossMode::scalar_mse;
  else if (loss_name == "exp-mse") config.loss = catval::LossMode::exp_mse;
  else if (loss_name == "hl") config.loss = catval::LossMode::hl;
  else if (loss_name == "combined") config.loss = catval::LossMode::combined;
  else throw std::invalid_argument("train: unknown loss '" + loss_name + "'");

  config.posterior = catval::parse_posterior(posterior_name);
  if (config.posterior.kind == catval::PosteriorKind::gauss_static && static_sigma > 0.0)
    config.posterior.static_sigma = static_sigma;
  config.alpha = alpha;
  if (supervision == "process") config.supervision = catval::Supervision::process;
  else if (supervision == "outcome") config.supervision = catval::Supervision::outcome_only;
  else throw std::invalid_argument("train: unknown supervision '" + supervision + "'");
  config.learning_rate = lr;
  config.epochs = epochs;
  config.batch_size = batch;
  config.seed = seed;
  config.hidden = hidden;
  if (catval::head_kind_for(config.loss) == catval::HeadKind::categorical) {
    const int m = support_size > 0 ? support_size : dataset.k + 1;
    config.support =
        catval::make_support(m, catval::parse_support_kind(support_kind), cosine_normalized);
  }

  manifest.config = {{"env", env_path},
                     {"data", data_path},
                     {"loss", loss_name},
                     {"posterior", posterior_name},
                     {"alpha", alpha},
                     {"supervision", supervision},
                     {"lr", lr},
                     {"epochs", epochs},
                     {"batch", batch},
                     {"seed", seed},
                     {"hidden", hidden},
                     {"support_kind", support_kind},
                     {"support_size", support_size},
                     {"out", out_path}};

  const catval::TrainResult result = catval::train(env, dataset, config);
  const std::string header_hash =
      catval::hex64(catval::fnv1a64(catval::dataset_header_line(dataset)));
  catval::save_model(result.model, config, header_hash, out_path);
  manifest.output(out_path);
  manifest.write();

  std::printf("trained %s on %zu samples; first-epoch loss %.6g, last-epoch loss %.6g\n",
              loss_name.c_str(), dataset.samples.size(), result.epoch_losses.front(),
              result.epoch_losses.back());
  std::printf("model written to %s\n", out_path.c_str());
  return 0;
}

int run_eval_bon(const std::string& model_path, const std::string& env_path,
                 const std::vector<int>& n_list, int problems, std::uint64_t seed, int offset,
                 const std::string& out_path, int threads) {
  require_input(model_path);
  require_input(env_path);
  ManifestBuilder manifest;
  manifest.subcommand = "eval-bon";
  manifest.input(model_path);
  manifest.input(env_path);
  manifest.config = {{"model", model_path}, {"env", env_path},
                     {"n", n_list},         {"problems", problems},
                     {"seed", seed},        {"problem_offset", offset},
                     {"out", out_path}};

  catval::ReasoningTreeEnv env(catval::load_env_config(env_path));
  const catval::LoadedModel loaded = catval::load_model(model_path);

  catval::EvalOptions options;
  options.n_problems = problems;
  options.seed = seed;
  options.problem_offset = offset;
  options.threads = threads;

  const catval::EvalReport report = catval::best_of_n(env, loaded.model, n_list, options);
  const std::string json_path = sibling_json_path(out_path);
  catval::save_report(report, out_path, json_path);
  manifest.output(out_path);
  manifest.output(json_path);
  manifest.write();

  std::ostringstream text;
  catval::write_report_csv(report, text);
  std::cout << text.str();
  return 0;
}

int run_eval_beam(const std::string& model_path, const std::string& env_path, int beams, int width,
                  int problems, std::uint64_t seed, int offset, const std::string& out_path,
                  int threads) {
  require_input(model_path);
  require_input(env_path);
  ManifestBuilder manifest;
  manifest.subcommand = "eval-beam";
  manifest.input(model_path);
  manifest.input(env_path);
  manifest.config = {{"model", model_path}, {"env", env_path},        {"beams", beams},
                     {"width", width},      {"problems", problems},   {"seed", seed},
                     {"problem_offset", offset}, {"out", out_path}};

  catval::ReasoningTreeEnv env(catval::load_env_config(env_path));
  const catval::LoadedModel loaded = catval::load_model(model_path);

  catval::EvalOptions options;
  options.n_problems = problems;
  options.seed = seed;
  options.problem_offset = offset;
  options.threads = threads;

  const catval::EvalReport report = catval::beam_search_eval(env, loaded.model, beams, width, options);
  const std::string json_path = sibling_json_path(out_path);
  catval::save_report(report, out_path, json_path);
  manifest.output(out_path);
  manifest.output(json_path);
  manifest.write();

  std::ostringstream text;
  catval::write_report_csv(report, text);
  std::cout << text.str();
  return 0;
}

int run_distance_sweep(const std::vector<std::string>& posterior_names, int k, double grid,
                       const std::string& metric_name, double static_sigma,
                       const std::string& out_path, int threads) {
  ManifestBuilder manifest;
  manifest.subcommand = "distance-sweep";
  manifest.config = {{"posterior", posterior_names}, {"k", k},
                     {"grid", grid},                 {"metric", metric_name},
                     {"static_sigma", static_sigma}, {"out", out_path}};

  catval::DistanceMetric metric;
  if (metric_name == "wasserstein") metric = catval::DistanceMetric::wasserstein;
  else if (metric_name == "kl") metric = catval::DistanceMetric::kl;
  else throw std::invalid_argument("distance-sweep: unknown metric '" + metric_name + "'");

  const auto specs = parse_posterior_list(posterior_names, static_sigma);
  const auto rows = catval::distance_sweep(specs, k, grid, metric, threads);

  std::ostringstream csv;
  catval::write_sweep_csv(rows, csv);
  write_text(out_path, csv.str());
  manifest.output(out_path);
  manifest.write();
  std::cout << "wrote " << rows.size() << " rows to " << out_path << '\n';
  return 0;
}

int run_entropy(const std::string& data_path, const std::string& out_path) {
  require_input(data_path);
  ManifestBuilder manifest;
  manifest.subcommand = "entropy";
  manifest.input(data_path);
  manifest.config = {{"data", data_path}, {"out", out_path}};

  const catval::Dataset dataset = catval::read_dataset(data_path);
  const auto profile = catval::entropy_profile(dataset);
  if (profile.size() < 7)
    std::cerr << "note: dataset depth too small for all step labels; emitted "
              << profile.size() << " of 7\n";

  std::ostringstream csv;
  catval::write_entropy_csv(profile, csv);
  write_text(out_path, csv.str());
  manifest.output(out_path);
  manifest.write();
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"categorical value-distribution laboratory for process verifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CATVAL_VERSION);

  int threads = 1;
  app.add_option("--threads", threads, "parallelism cap; never affects results")
      ->check(CLI::PositiveNumber);

  // env-info
  auto* cmd_env = app.add_subcommand("env-info", "inspect an environment config");
  std::string env_path, out_path;
  int probe = 0;
  std::uint64_t probe_seed = 0;
  cmd_env->add_option("--env", env_path, "environment config JSON")->required();
  cmd_env->add_option("--probe", probe, "problems to probe for value statistics");
  cmd_env->add_option("--probe-seed", probe_seed, "seed for probe rollouts");
  cmd_env->add_option("--out", out_path, "optional JSON output path");

  // annotate
  auto* cmd_ann = app.add_subcommand("annotate", "Monte Carlo-annotate a dataset");
  std::string ann_env, ann_out;
  int ann_problems = 1, ann_solutions = 1, ann_k = 8, ann_offset = 0;
  std::uint64_t ann_seed = 0;
  cmd_ann->add_option("--env", ann_env, "environment config JSON")->required();
  cmd_ann->add_option("--problems", ann_problems, "number of problems")->required();
  cmd_ann->add_option("--solutions", ann_solutions, "solutions per problem")->required();
  cmd_ann->add_option("--k", ann_k, "rollouts per prefix");
  cmd_ann->add_option("--seed", ann_seed, "generation seed");
  cmd_ann->add_option("--problem-offset", ann_offset, "first problem id");
  cmd_ann->add_option("--out", ann_out, "dataset JSONL path")->required();

  // train
  auto* cmd_train = app.add_subcommand("train", "train a verifier");
  std::string tr_env, tr_data, tr_out, tr_loss = "scalar-mse", tr_posterior = "one-hot";
  std::string tr_supervision = "process", tr_support_kind = "equidistant";
  double tr_sigma = 0.0, tr_alpha = 0.5, tr_lr = 1e-3;
  int tr_epochs = 10, tr_batch = 64, tr_support_size = 0;
  bool tr_cosine_norm = false;
  std::uint64_t tr_seed = 0;
  std::vector<int> tr_hidden = {64, 64};
  cmd_train->add_option("--env", tr_env, "environment config JSON")->required();
  cmd_train->add_option("--data", tr_data, "dataset JSONL")->required();
  cmd_train->add_option("--loss", tr_loss, "scalar-mse | exp-mse | hl | combined");
  cmd_train->add_option("--posterior", tr_posterior, "one-hot | gauss-dynamic | gauss-static");
  cmd_train->add_option("--static-sigma", tr_sigma, "sigma for gauss-static (default 2/(3k))");
  cmd_train->add_option("--alpha", tr_alpha, "combined-loss weight on exp-mse");
  cmd_train->add_option("--supervision", tr_supervision, "process | outcome");
  cmd_train->add_option("--lr", tr_lr, "learning rate");
  cmd_train->add_option("--epochs", tr_epochs, "training epochs");
  cmd_train->add_option("--batch", tr_batch, "mini-batch size");
  cmd_train->add_option("--seed", tr_seed, "training seed");
  cmd_train->add_option("--hidden", tr_hidden, "hidden layer widths")->delimiter(',');
  cmd_train->add_option("--support-kind", tr_support_kind,
                        "equidistant | cosine | symmetric-equidistant");
  cmd_train->add_option("--support-size", tr_support_size, "category count (default k+1)");
  cmd_train->add_flag("--cosine-normalized", tr_cosine_norm, "halve the cosine layout onto [0,1]");
  cmd_train->add_option("--out", tr_out, "model JSON path")->required();

  // eval-bon
  auto* cmd_bon = app.add_subcommand("eval-bon", "Best-of-N evaluation");
  std::string bon_model, bon_env, bon_out;
  std::vector<int> bon_n = {8};
  int bon_problems = 100, bon_offset = 0;
  std::uint64_t bon_seed = 0;
  cmd_bon->add_option("--model", bon_model, "model JSON")->required();
  cmd_bon->add_option("--env", bon_env, "environment config JSON")->required();
  cmd_bon->add_option("--n", bon_n, "candidate counts, e.g. 8,16,32")->delimiter(',');
  cmd_bon->add_option("--problems", bon_problems, "evaluation problems");
  cmd_bon->add_option("--seed", bon_seed, "evaluation seed");
  cmd_bon->add_option("--problem-offset", bon_offset, "first problem id");
  cmd_bon->add_option("--out", bon_out, "report CSV path (JSON summary lands beside it)")
      ->required();

  // eval-beam
  auto* cmd_beam = app.add_subcommand("eval-beam", "beam-search evaluation");
  std::string beam_model, beam_env, beam_out;
  int beam_n = 4, beam_m = 4, beam_problems = 100, beam_offset = 0;
  std::uint64_t beam_seed = 0;
  cmd_beam->add_option("--model", beam_model, "model JSON")->required();
  cmd_beam->add_option("--env", beam_env, "environment config JSON")->required();
  cmd_beam->add_option("--beams", beam_n, "number of beams");
  cmd_beam->add_option("--width", beam_m, "candidates per beam per step");
  cmd_beam->add_option("--problems", beam_problems, "evaluation problems");
  cmd_beam->add_option("--seed", beam_seed, "evaluation seed");
  cmd_beam->add_option("--problem-offset", beam_offset, "first problem id");
  cmd_beam->add_option("--out", beam_out, "report CSV path (JSON summary lands beside it)")
      ->required();

  // distance-sweep
  auto* cmd_sweep = app.add_subcommand("distance-sweep", "statistics-based distance over a p grid");
  std::vector<std::string> sweep_posteriors = {"one-hot", "gauss-dynamic", "gauss-static"};
  int sweep_k = 8;
  double sweep_grid = 0.05, sweep_sigma = 0.0;
  std::string sweep_metric = "wasserstein", sweep_out;
  cmd_sweep->add_option("--posterior", sweep_posteriors, "posterior list, e.g. one-hot,gauss-dynamic")
      ->delimiter(',');
  cmd_sweep->add_option("--k", sweep_k, "rollout count (support has k+1 bins)");
  cmd_sweep->add_option("--grid", sweep_grid, "p grid step in (0,1)");
  cmd_sweep->add_option("--metric", sweep_metric, "wasserstein | kl");
  cmd_sweep->add_option("--static-sigma", sweep_sigma, "sigma for gauss-static (default 2/(3k))");
  cmd_sweep->add_option("--out", sweep_out, "CSV output path")->required();

  // entropy
  auto* cmd_entropy = app.add_subcommand("entropy", "per-step entropy profile of a dataset");
  std::string ent_data, ent_out;
  cmd_entropy->add_option("--data", ent_data, "dataset JSONL")->required();
  cmd_entropy->add_option("--out", ent_out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  try {
    if (cmd_env->parsed())
      return run_env_info(env_path, probe, probe_seed, out_path, threads);
    if (cmd_ann->parsed())
      return run_annotate(ann_env, ann_problems, ann_solutions, ann_k, ann_seed, ann_offset,
                          ann_out, threads);
    if (cmd_train->parsed())
      return run_train(tr_env, tr_data, tr_loss, tr_posterior, tr_sigma, tr_alpha, tr_supervision,
                       tr_lr, tr_epochs, tr_batch, tr_seed, tr_hidden, tr_support_kind,
                       tr_support_size, tr_cosine_norm, tr_out);
    if (cmd_bon->parsed())
      return run_eval_bon(bon_model, bon_env, bon_n, bon_problems, bon_seed, bon_offset, bon_out,
                          threads);
    if (cmd_beam->parsed())
      return run_eval_beam(beam_model, beam_env, beam_n, beam_m, beam_problems, beam_seed,
                           beam_offset, beam_out, threads);
    if (cmd_sweep->parsed())
      return run_distance_sweep(sweep_posteriors, sweep_k, sweep_grid, sweep_metric, sweep_sigma,
                                sweep_out, threads);
    if (cmd_entropy->parsed()) return run_entropy(ent_data, ent_out);
  } catch (const catval::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
