#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "seedvos/segmenter.hpp"

namespace seedvos::cli {

enum ExitCode { Ok = 0, InputError = 1, PipelineError = 2 };

nlohmann::json config_to_json(const PipelineConfig& config);

/// Overwrites the fields present in `doc`; unknown keys are an error.
void apply_config_json(const nlohmann::json& doc, PipelineConfig& config);

/// "inf" (or "never") disables adaptation.
std::optional<std::size_t> parse_adapt_every(const std::string& text);

/// Full command line, argv[0] included. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seedvos::cli
