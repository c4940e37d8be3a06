#pragma once

#include <stdexcept>
#include <string>

namespace octree {

// Raised for malformed inputs: bad CSV cells, out-of-range parameters,
// dimension mismatches. Messages are meant to be shown to CLI users as-is.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace octree
