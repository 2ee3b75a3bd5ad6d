#pragma once

#include <stdexcept>
#include <string>

namespace ola {

// Input lies on a singularity of a closed-form expression.
class singular_input : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Eigenvalue A1 is (numerically) 1, so the closed-form ring solution is undefined.
class degenerate_eigenvalue : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// No threshold choice can sustain broadcast for the given parameters.
class infeasible_model : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Rings stopped growing before the requested level.
class propagation_failure : public std::runtime_error {
 public:
  propagation_failure(const std::string& what, int level)
      : std::runtime_error(what), level_(level) {}
  int level() const noexcept { return level_; }

 private:
  int level_;
};

class no_feasible_solution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ola
