#pragma once

#include <string>

#include "conekit/io/config.hpp"
#include "conekit/io/formats.hpp"

namespace conekit::io {

/// Dispatches one subcommand (analyze | probe-resolvent | probe-bip | solve |
/// fit | norm), writes its outputs and the manifest into out_dir, and returns
/// the manifest.  Failures of individual checks are recorded rather than
/// thrown; the caller maps all_passed() to the exit code.
RunManifest run(const std::string& subcommand, const RunConfig& cfg,
                const std::string& config_bytes, const std::string& out_dir);

}  // namespace conekit::io
