#pragma once

#include <stdexcept>
#include <string>

namespace d2dcc {

// Enumeration / evaluation budget exceeded (exhaustive search, oracle sweeps).
struct ResourceLimitError : std::runtime_error {
  explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

// Beamformer solver failed after the documented restart.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// A D2D link with zero rate makes the allocation's delivery time infinite.
struct InfeasibleTimeError : std::runtime_error {
  explicit InfeasibleTimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace d2dcc
