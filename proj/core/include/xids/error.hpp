#pragma once

#include <stdexcept>
#include <string>

namespace xids {

// Malformed or unusable input data: bad CSV, all-missing columns, degenerate
// class distributions.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or argument values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A pipeline stage was asked to run before the stage that produces its input.
class MissingArtifactError : public std::runtime_error {
 public:
  MissingArtifactError(std::string artifact, std::string producing_stage)
      : std::runtime_error("missing artifact '" + artifact + "'; run '" +
                           producing_stage + "' first"),
        artifact_(std::move(artifact)),
        stage_(std::move(producing_stage)) {}

  const std::string& artifact() const noexcept { return artifact_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string artifact_;
  std::string stage_;
};

}  // namespace xids
