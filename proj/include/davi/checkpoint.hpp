// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include <json.hpp>

#include "davi/diffusion.hpp"
#include "davi/networks.hpp"
#include "davi/trainer.hpp"

namespace davi {

nlohmann::json schedule_to_json(const NoiseSchedule& sched);
NoiseSchedule schedule_from_json(const nlohmann::json& j);

nlohmann::json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

/// Checkpoint document: {format, schedule, phi, psi, phi_opt, psi_opt, iteration, rng_state}.
/// Doubles are written in shortest round-trip form, so reloading is bit-exact.
nlohmann::json checkpoint_to_json(const TrainState& state, const NoiseSchedule& sched);

struct LoadedCheckpoint {
  TrainState state;
  NoiseSchedule sched;
};

LoadedCheckpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const TrainState& state,
                     const NoiseSchedule& sched);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Metrics log as CSV with header iter,loss_c,loss_s,delta_s_sq,reg,wall_ms.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& log);

}  // namespace davi
