#pragma once

#include <Eigen/Core>
#include <string>

namespace svrc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class SamplingMode { kWithReplacement, kWithoutReplacement };

enum class Algorithm { kAdaptiveSvrc, kFullGradSvrc, kCorrectedSvrc, kFullCr };

enum class OutputOption { kArgmin, kUniformRandom };

enum class DiagLevel { kOutputOnly, kFull };

std::string to_string(SamplingMode mode);
std::string to_string(Algorithm algo);
std::string to_string(OutputOption option);

// Parsers for CLI/config strings; throw ConfigError on unknown names.
SamplingMode parse_sampling_mode(const std::string& name);
Algorithm parse_algorithm(const std::string& name);
OutputOption parse_output_option(const std::string& name);

}  // namespace svrc
