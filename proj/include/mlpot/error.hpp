#pragma once

#include <stdexcept>
#include <string>

namespace mlpot {

// Raised when a theorem harness is asked to run on data that does not meet the
// theorem's hypotheses (for example an infinite testing condition). The CLI
// maps it to exit status 2.
class HypothesisUnmet : public std::runtime_error {
 public:
  explicit HypothesisUnmet(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mlpot
