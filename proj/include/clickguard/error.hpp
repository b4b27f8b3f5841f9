#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clickguard {

// Error taxonomy. The CLI maps these onto its exit-code contract:
// input/config problems -> 2, numerical divergence -> 3, corrupt artifacts -> 4.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad data: empty datasets, invalid labels, degenerate classes, short matrices.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFittedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, std::size_t at_step)
      : std::runtime_error(what), step(at_step) {}
  std::size_t step;
};

}  // namespace clickguard
