// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace davi {

namespace {

std::string join(const std::vector<std::string>& errors) {
  std::ostringstream out;
  out << "invalid config (" << errors.size() << " error" << (errors.size() == 1 ? "" : "s") << ")";
  for (const auto& e : errors) out << "\n  - " << e;
  return out.str();
}

/// Reads typed values while collecting, rather than throwing on, every problem.
class Reader {
 public:
  template <typename T>
  T get(const nlohmann::json& obj, const std::string& key, const std::string& path, T fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    try {
      return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      error(path + "." + key + ": wrong type");
      return fallback;
    }
  }

  template <typename T>
  std::optional<T> require(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
      error(path + "." + key + ": required");
      return std::nullopt;
    }
    try {
      return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      error(path + "." + key + ": wrong type");
      return std::nullopt;
    }
  }

  void check(bool ok, const std::string& message) {
    if (!ok) error(message);
  }

  void error(std::string message) { errors_.push_back(std::move(message)); }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

std::vector<Vector> rows_from_csv(const std::filesystem::path& path) {
  const DenseMatrix m = load_matrix_csv(path);
  std::vector<Vector> rows;
  for (std::size_t r = 0; r < m.rows; ++r) {
    rows.emplace_back(m.data.begin() + static_cast<long>(r * m.cols),
                      m.data.begin() + static_cast<long>((r + 1) * m.cols));
  }
  return rows;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument(join(errors)), errors_(std::move(errors)) {}

GaussianMixturePrior parse_prior(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  std::vector<Vector> means;
  std::vector<Vector> variances;
  if (j.contains("means_csv")) {
    means = rows_from_csv(resolve(base_dir, j.at("means_csv").get<std::string>()));
  } else {
    means = j.at("means").get<std::vector<Vector>>();
  }
  if (j.contains("variances_csv")) {
    variances = rows_from_csv(resolve(base_dir, j.at("variances_csv").get<std::string>()));
  } else {
    variances = j.at("variances").get<std::vector<Vector>>();
  }
  Vector weights;
  if (j.contains("weights")) {
    weights = j.at("weights").get<Vector>();
  } else {
    weights.assign(means.size(), 1.0 / static_cast<double>(means.size()));
  }
  return GaussianMixturePrior(std::move(weights), std::move(means), std::move(variances));
}

LinearOperator parse_operator(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  const OperatorKind kind = operator_kind_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case OperatorKind::identity:
      return LinearOperator::identity(j.at("dim").get<std::size_t>());
    case OperatorKind::gaussian_blur:
      return LinearOperator::gaussian_blur(j.at("height").get<std::size_t>(),
                                           j.at("width").get<std::size_t>(),
                                           j.value("radius", 1), j.value("std", 1.0));
    case OperatorKind::avgpool_sr:
      return LinearOperator::avgpool_sr(j.value("height", std::size_t{1}),
                                        j.at("width").get<std::size_t>(),
                                        j.at("factor").get<std::size_t>());
    case OperatorKind::box_mask:
      if (j.contains("box")) {
        const auto box = j.at("box").get<std::vector<std::size_t>>();
        if (box.size() != 4) throw ParameterError("box_mask.box must be [row0, col0, h, w]");
        return LinearOperator::box_inpaint(j.at("height").get<std::size_t>(),
                                           j.at("width").get<std::size_t>(), box[0], box[1],
                                           box[2], box[3]);
      }
      return LinearOperator::box_mask(j.at("dim").get<std::size_t>(),
                                      j.at("kept").get<std::vector<std::size_t>>());
    case OperatorKind::grayscale:
      return LinearOperator::grayscale(j.at("channels").get<std::size_t>(),
                                       j.at("pixels").get<std::size_t>());
    case OperatorKind::dense: {
      if (j.contains("matrix_csv")) {
        return LinearOperator::dense(
            load_matrix_csv(resolve(base_dir, j.at("matrix_csv").get<std::string>())));
      }
      const auto rows = j.at("matrix").get<std::vector<Vector>>();
      DenseMatrix m;
      m.rows = rows.size();
      m.cols = rows.empty() ? 0 : rows.front().size();
      for (const auto& r : rows) {
        if (r.size() != m.cols) throw ParameterError("dense.matrix is ragged");
        m.data.insert(m.data.end(), r.begin(), r.end());
      }
      return LinearOperator::dense(std::move(m));
    }
  }
  throw ParameterError("unhandled operator kind");
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         const std::filesystem::path& base_dir) {
  Reader rd;
  if (!doc.is_object()) throw ConfigError({"config root must be an object"});

  const nlohmann::json problem = doc.value("problem", nlohmann::json::object());
  if (!doc.contains("problem")) rd.error("problem: required");

  std::optional<GaussianMixturePrior> prior;
  if (!problem.contains("prior")) {
    rd.error("problem.prior: required");
  } else {
    try {
      prior = parse_prior(problem.at("prior"), base_dir);
    } catch (const std::exception& e) {
      rd.error(std::string("problem.prior: ") + e.what());
    }
  }

  std::optional<LinearOperator> op;
  if (!problem.contains("operator")) {
    rd.error("problem.operator: required");
  } else {
    try {
      op = parse_operator(problem.at("operator"), base_dir);
    } catch (const std::exception& e) {
      rd.error(std::string("problem.operator: ") + e.what());
    }
  }
  if (prior && op && op->in_dim() != prior->dim()) {
    rd.error("problem.operator: input dimension " + std::to_string(op->in_dim()) +
             " does not match prior dimension " + std::to_string(prior->dim()));
  }

  const nlohmann::json noise_j = problem.value("noise", nlohmann::json::object());
  NoiseModel noise;
  try {
    noise.kind = noise_kind_from_string(rd.get<std::string>(noise_j, "kind", "problem.noise", "gaussian"));
  } catch (const std::exception& e) {
    rd.error(std::string("problem.noise.kind: ") + e.what());
  }
  noise.sigma_y = rd.get<double>(noise_j, "sigma_y", "problem.noise", 0.05);
  noise.photon_scale = rd.get<double>(noise_j, "photon_scale", "problem.noise", 100.0);
  rd.check(noise.sigma_y >= 0.0, "problem.noise.sigma_y: must be >= 0");
  rd.check(noise.kind != NoiseKind::gaussian || noise.sigma_y > 0.0,
           "problem.noise.sigma_y: must be > 0 for Gaussian noise (the exact posterior needs it)");
  rd.check(noise.photon_scale > 0.0, "problem.noise.photon_scale: must be > 0");

  const nlohmann::json sched_j = problem.value("schedule", nlohmann::json::object());
  ScheduleSpec sched_spec;
  sched_spec.num_steps = rd.get<int>(sched_j, "num_steps", "problem.schedule", 1000);
  sched_spec.beta_min = rd.get<double>(sched_j, "beta_min", "problem.schedule", 1e-4);
  sched_spec.beta_max = rd.get<double>(sched_j, "beta_max", "problem.schedule", 0.02);
  std::optional<NoiseSchedule> sched;
  try {
    sched = make_linear_schedule(sched_spec.num_steps, sched_spec.beta_min, sched_spec.beta_max);
  } catch (const std::exception& e) {
    rd.error(std::string("problem.schedule: ") + e.what());
  }

  const std::size_t dataset_size = rd.get<std::size_t>(problem, "dataset_size", "problem", 4096);
  const std::uint64_t dataset_seed = rd.get<std::uint64_t>(problem, "dataset_seed", "problem", 7);

  const nlohmann::json net_j = doc.value("network", nlohmann::json::object());
  NetworkShape shape;
  shape.hidden = rd.get<std::vector<std::size_t>>(net_j, "hidden", "network", shape.hidden);
  shape.embed_dim = rd.get<std::size_t>(net_j, "embed_dim", "network", shape.embed_dim);
  try {
    shape.activation = activation_from_string(rd.get<std::string>(net_j, "activation", "network", "silu"));
  } catch (const std::exception& e) {
    rd.error(std::string("network.activation: ") + e.what());
  }
  rd.check(shape.embed_dim % 2 == 0, "network.embed_dim: must be even");
  for (auto w : shape.hidden) rd.check(w > 0, "network.hidden: widths must be > 0");

  const nlohmann::json ppb_j = doc.value("ppb", nlohmann::json::object());
  PPBConfig ppb;
  ppb.h = rd.get<double>(ppb_j, "h", "ppb", ppb.h);
  try {
    ppb.sigma_bar_kind = sigma_bar_kind_from_string(
        rd.get<std::string>(ppb_j, "sigma_bar_kind", "ppb", "monotone_increasing"));
    ppb.noise_variant = bridge_variant_from_string(rd.get<std::string>(ppb_j, "noise_variant", "ppb", "scaled"));
  } catch (const std::exception& e) {
    rd.error(std::string("ppb: ") + e.what());
  }
  const Vector shapes = rd.get<Vector>(ppb_j, "beta_shape", "ppb", Vector{3.0, 1.0});
  if (shapes.size() != 2) {
    rd.error("ppb.beta_shape: must have two entries");
  } else {
    ppb.beta_shape_a = shapes[0];
    ppb.beta_shape_b = shapes[1];
  }
  rd.check(ppb.h >= 0.0, "ppb.h: must be >= 0");
  rd.check(ppb.beta_shape_a > 0.0 && ppb.beta_shape_b > 0.0, "ppb.beta_shape: must be > 0");

  const nlohmann::json loss_j = doc.value("loss", nlohmann::json::object());
  LossWeights weights;
  weights.gamma = rd.get<double>(loss_j, "gamma", "loss", weights.gamma);
  weights.reg_coeff = rd.get<double>(loss_j, "reg_coeff", "loss", weights.reg_coeff);
  weights.ikl_t_max = rd.get<int>(loss_j, "ikl_t_max", "loss", sched_spec.num_steps);
  try {
    weights.w_kind = time_weight_from_string(rd.get<std::string>(loss_j, "w_kind", "loss", "constant"));
  } catch (const std::exception& e) {
    rd.error(std::string("loss.w_kind: ") + e.what());
  }
  rd.check(weights.gamma > 0.0, "loss.gamma: must be > 0");
  rd.check(weights.reg_coeff >= 0.0, "loss.reg_coeff: must be >= 0");
  rd.check(weights.ikl_t_max >= 1 && weights.ikl_t_max <= sched_spec.num_steps,
           "loss.ikl_t_max: must lie in [1, problem.schedule.num_steps]");

  const nlohmann::json train_j = doc.value("train", nlohmann::json::object());
  TrainConfig train;
  train.K = rd.get<long>(train_j, "K", "train", train.K);
  train.batch_size = rd.get<std::size_t>(train_j, "batch_size", "train", train.batch_size);
  train.lr_phi = rd.get<double>(train_j, "lr_phi", "train", train.lr_phi);
  train.lr_psi = rd.get<double>(train_j, "lr_psi", "train", train.lr_psi);
  const nlohmann::json adam_j = train_j.value("adam", nlohmann::json::object());
  train.adam.beta1 = rd.get<double>(adam_j, "beta1", "train.adam", train.adam.beta1);
  train.adam.beta2 = rd.get<double>(adam_j, "beta2", "train.adam", train.adam.beta2);
  train.adam.eps = rd.get<double>(adam_j, "eps", "train.adam", train.adam.eps);
  train.adam.weight_decay = rd.get<double>(adam_j, "weight_decay", "train.adam", train.adam.weight_decay);
  try {
    train.lr_schedule = lr_schedule_from_string(rd.get<std::string>(train_j, "lr_schedule", "train", "constant"));
  } catch (const std::exception& e) {
    rd.error(std::string("train.lr_schedule: ") + e.what());
  }
  try {
    train.data_source = data_source_from_string(rd.get<std::string>(train_j, "data_source", "train", "dataset"));
  } catch (const std::exception& e) {
    rd.error(std::string("train.data_source: ") + e.what());
  }
  train.rng_seed = rd.get<std::uint64_t>(train_j, "rng_seed", "train", train.rng_seed);
  train.checkpoint_every = rd.get<long>(train_j, "checkpoint_every", "train", train.checkpoint_every);
  train.grad_clip = rd.get<double>(train_j, "grad_clip", "train", train.grad_clip);
  train.threads = rd.get<std::size_t>(train_j, "threads", "train", train.threads);
  rd.check(train.K >= 0, "train.K: must be >= 0");
  rd.check(train.batch_size >= 1, "train.batch_size: must be >= 1");
  rd.check(train.lr_phi > 0.0, "train.lr_phi: must be > 0");
  rd.check(train.lr_psi > 0.0, "train.lr_psi: must be > 0");
  rd.check(train.adam.beta1 >= 0.0 && train.adam.beta1 < 1.0, "train.adam.beta1: must lie in [0, 1)");
  rd.check(train.adam.beta2 >= 0.0 && train.adam.beta2 < 1.0, "train.adam.beta2: must lie in [0, 1)");
  rd.check(train.adam.eps > 0.0, "train.adam.eps: must be > 0");
  rd.check(train.threads >= 1, "train.threads: must be >= 1");
  rd.check(train.checkpoint_every >= 0, "train.checkpoint_every: must be >= 0");
  rd.check(train.data_source == DataSource::davi_g || dataset_size > 0,
           "problem.dataset_size: must be > 0 in dataset mode");

  const nlohmann::json eval_j = doc.value("eval", nlohmann::json::object());
  EvalSpec eval;
  eval.num_measurements = rd.get<std::size_t>(eval_j, "num_measurements", "eval", eval.num_measurements);
  eval.samples_per_measurement =
      rd.get<std::size_t>(eval_j, "samples_per_measurement", "eval", eval.samples_per_measurement);
  eval.seed = rd.get<std::uint64_t>(eval_j, "seed", "eval", eval.seed);
  if (eval_j.contains("psnr_peak") && !eval_j.at("psnr_peak").is_null()) {
    eval.psnr_peak = rd.get<double>(eval_j, "psnr_peak", "eval", 1.0);
    rd.check(*eval.psnr_peak > 0.0, "eval.psnr_peak: must be > 0");
  }
  eval.swd_projections = rd.get<std::size_t>(eval_j, "swd_projections", "eval", eval.swd_projections);
  eval.record_wall_clock = rd.get<bool>(eval_j, "record_wall_clock", "eval", eval.record_wall_clock);
  eval.metrics = rd.get<std::vector<std::string>>(eval_j, "metrics", "eval", eval.metrics);
  rd.check(eval.samples_per_measurement >= 2, "eval.samples_per_measurement: must be >= 2");
  rd.check(eval.swd_projections >= 1, "eval.swd_projections: must be >= 1");
  for (const auto& m : eval.metrics) {
    const EvalSpec defaults;
    rd.check(std::find(defaults.metrics.begin(), defaults.metrics.end(), m) != defaults.metrics.end(),
             "eval.metrics: unknown metric '" + m + "'");
  }

  const std::string output_dir = rd.get<std::string>(doc, "output_dir", "config", "out");

  if (!rd.errors().empty()) throw ConfigError(rd.errors());

  std::vector<Vector> dataset;
  if (train.data_source == DataSource::dataset) dataset = sample_prior(*prior, dataset_size, dataset_seed);
  Problem prob{std::move(*prior), std::move(*op), noise, std::move(*sched), ppb, weights,
               std::move(dataset)};
  return ExperimentConfig{std::move(prob), sched_spec, dataset_size, dataset_seed, shape,
                          train, eval, output_dir, doc};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return parse_experiment_config(doc, path.parent_path());
}

}  // namespace davi
