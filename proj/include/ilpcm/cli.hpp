#pragma once

#include "ilpcm/model.hpp"
#include "ilpcm/sampler.hpp"
#include "ilpcm/simgen.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace ilpcm::cli {

inline constexpr const char* kVersion = "0.1.0";

// Entry point of the ilpcm executable. Returns the process exit code:
// 0 success, 2 usage, 3 data, 4 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Default output root: $ILPCM_OUTPUT_ROOT if set, else ./ilpcm-runs.
std::filesystem::path output_root();

// One simulate-fit-summarize cycle against the ground truth.
struct ReplicateOutcome {
  std::size_t replicate = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t chain_seed = 0;
  double ari = 0.0;
  double procrustes = 0.0;
  std::size_t G_hat = 0;
  std::size_t G_mode = 0;
  std::size_t data_attempts = 0;
  double seconds = 0.0;
};

ReplicateOutcome run_replicate(ScenarioSpec spec, std::size_t replicate, const MCMCConfig& mc,
                               std::optional<PriorConfig> prior = std::nullopt);

}  // namespace ilpcm::cli
