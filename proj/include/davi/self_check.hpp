// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>

namespace davi {

/// Fast oracle and identity checks over every module. Prints one line per check and
/// returns true iff all pass.
bool run_self_checks(std::ostream& out, std::uint64_t seed = 20260101);

}  // namespace davi
