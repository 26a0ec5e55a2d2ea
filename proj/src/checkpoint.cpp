// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace davi {

namespace {

constexpr const char* kFormat = "davi-checkpoint/1";

nlohmann::json moments_to_json(const AdamMoments& m) {
  return {{"m", m.m}, {"v", m.v}, {"step", m.step}};
}

AdamMoments moments_from_json(const nlohmann::json& j) {
  return {j.at("m").get<Vector>(), j.at("v").get<Vector>(), j.at("step").get<std::uint64_t>()};
}

}  // namespace

nlohmann::json schedule_to_json(const NoiseSchedule& sched) { return {{"betas", sched.betas()}}; }

NoiseSchedule schedule_from_json(const nlohmann::json& j) {
  return NoiseSchedule(j.at("betas").get<Vector>());
}

nlohmann::json mlp_to_json(const Mlp& net) {
  return {{"layer_sizes", net.layer_sizes()},
          {"activation", to_string(net.activation())},
          {"params", net.params()}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net(j.at("layer_sizes").get<std::vector<std::size_t>>(),
          activation_from_string(j.at("activation").get<std::string>()));
  const Vector params = j.at("params").get<Vector>();
  require_same_size(params.size(), net.num_params(), "checkpoint params");
  net.params() = params;
  return net;
}

nlohmann::json checkpoint_to_json(const TrainState& state, const NoiseSchedule& sched) {
  std::ostringstream rng_state;
  rng_state << state.rng;
  nlohmann::json j;
  j["format"] = kFormat;
  j["schedule"] = schedule_to_json(sched);
  j["phi"] = {{"signal_dim", state.phi.signal_dim()},
              {"embed_dim", state.phi.embed_dim()},
              {"h", state.phi.h()},
              {"net", mlp_to_json(state.phi.net())}};
  j["psi"] = {{"signal_dim", state.psi.signal_dim()},
              {"embed_dim", state.psi.embed_dim()},
              {"net", mlp_to_json(state.psi.net())}};
  j["phi_opt"] = moments_to_json(state.phi_opt);
  j["psi_opt"] = moments_to_json(state.psi_opt);
  j["iteration"] = state.iteration;
  j["rng_state"] = rng_state.str();
  return j;
}

LoadedCheckpoint checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kFormat) throw IoError("not a davi checkpoint");
  const auto& phi = j.at("phi");
  const auto& psi = j.at("psi");
  Rng rng;
  std::istringstream rng_state(j.at("rng_state").get<std::string>());
  rng_state >> rng;
  if (!rng_state) throw IoError("checkpoint: corrupt rng_state");
  TrainState state{j.at("iteration").get<long>(),
                   AmortizedPosterior(phi.at("signal_dim").get<std::size_t>(),
                                      phi.at("embed_dim").get<std::size_t>(),
                                      phi.at("h").get<double>(), mlp_from_json(phi.at("net"))),
                   ImplicitScoreNet(psi.at("signal_dim").get<std::size_t>(),
                                    psi.at("embed_dim").get<std::size_t>(),
                                    mlp_from_json(psi.at("net"))),
                   moments_from_json(j.at("phi_opt")),
                   moments_from_json(j.at("psi_opt")),
                   rng,
                   {}};
  return {std::move(state), schedule_from_json(j.at("schedule"))};
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state,
                     const NoiseSchedule& sched) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(state, sched).dump(1) << '\n';
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  try {
    return checkpoint_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write metrics " + path.string());
  out << "iter,loss_c,loss_s,delta_s_sq,reg,wall_ms\n";
  char line[256];
  for (const MetricsRow& r : log) {
    std::snprintf(line, sizeof(line), "%ld,%.10g,%.10g,%.10g,%.10g,%.3f\n", r.iter, r.loss_c,
                  r.loss_s, r.delta_s_sq, r.reg, r.wall_ms);
    out << line;
  }
}

}  // namespace davi
