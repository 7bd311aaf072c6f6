#pragma once

#include <stdexcept>
#include <string>

namespace mcmcperf {

/// Bad user input: malformed files, inconsistent dimensions, invalid
/// parameters. The CLI maps it to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A sampler could not make progress (e.g. slice stepping-out limit hit,
/// rejection loop cap reached).
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcmcperf
