#pragma once

#include <stdexcept>
#include <string>

namespace nlfp {

/// Raised for contract violations and numerical failures anywhere in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace nlfp
