#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace btm {

/// A scan, jump or series budget was exhausted before the operation finished.
/// `required` carries the budget the operation estimates it would need, when
/// that estimate is available (0 otherwise).
class BudgetError : public std::runtime_error {
public:
  BudgetError(const std::string& what, std::int64_t required = 0)
      : std::runtime_error(what), required_(required) {}
  std::int64_t required() const { return required_; }

private:
  std::int64_t required_;
};

/// t is too small for any admissible scaling value h >= 2 to exist.
class PreAsymptoticError : public std::runtime_error {
public:
  PreAsymptoticError(const std::string& what, double t, double r)
      : std::runtime_error(what), t_(t), r_(r) {}
  double t() const { return t_; }
  double r() const { return r_; }

private:
  double t_;
  double r_;
};

}  // namespace btm
