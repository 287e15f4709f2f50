#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "scorelab/dataset.hpp"

namespace scorelab::cli {

// Bad configuration or contract violation; the CLI exits with code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Named generators:
//   gaussian2d:N:SEED     N i.i.d. standard-Gaussian points in 2D
//   symmetric2            {(1,0), (-1,0)}
//   symmetric4            four axis points equidistant from the origin
//   paired-linear:N:SEED  (x0, y = x0_1 + 0.1 noise) pairs in 2D/1D
//   file:PATH             load a dataset file
Dataset gen_dataset(const std::string& spec);

Dataset gaussian2d(int n, std::uint64_t seed);
Dataset symmetric2();
Dataset symmetric4();
Dataset paired_linear(int n, std::uint64_t seed);

}  // namespace scorelab::cli
