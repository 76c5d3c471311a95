#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace exoticflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using VecMap = std::function<Vec(const Vec&)>;
using MatMap = std::function<Mat(const Vec&)>;

// Errors. Every numerical failure that callers are expected to handle has its
// own type so the CLI can map it to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A chart point sits on (or within tol of) the singular locus of the formula
// being applied: x̃ = 0 for A→B, ȳ = 0 for B→A and for the chart-B Jacobian.
class DegenerateChartPoint : public Error {
 public:
  using Error::Error;
};

// The requested chart cannot represent the sphere point (γ = 0 for B, κ = 0 for A).
class PoleChartMismatch : public Error {
 public:
  using Error::Error;
};

class BadParams : public Error {
 public:
  using Error::Error;
};

class StepBlowup : public Error {
 public:
  StepBlowup(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ModelParams {
  int m = 1;
  int n = 1;
  double tol = 1e-10;

  int ambient_dim() const { return m + n + 2; }
  void validate() const {
    if (m < 1 || n < 1) throw BadParams("m and n must be >= 1");
    if (!(tol > 0.0)) throw BadParams("tol must be positive");
  }
};

}  // namespace exoticflow
