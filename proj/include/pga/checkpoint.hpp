#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pga/model.hpp"

namespace pga {

/// Text checkpoint, version 1:
///
///   PGACHECKPOINT 1
///   config <key>=<value> ...
///   param <name> <rank> <dim>... then one line of hexfloat values
///   bn <name> <channels> <initialized 0|1> then a line of means and a line of variances
///   end
///
/// Values are written as hexfloats so a round trip is bit-exact.
void save_checkpoint(std::ostream& os, ToyModel& model);
void save_checkpoint(const std::filesystem::path& path, ToyModel& model);

/// Rebuilds the model from the stored configuration and overwrites every
/// parameter and running statistic. Throws std::runtime_error on a version
/// mismatch, a malformed line, or a missing, unknown or misshapen entry.
ToyModel load_checkpoint(std::istream& is);
ToyModel load_checkpoint(const std::filesystem::path& path);

/// `key=value` pairs describing a model configuration, space separated.
std::string model_config_line(const ModelConfig& config);
ModelConfig parse_model_config_line(const std::string& line);

}  // namespace pga
