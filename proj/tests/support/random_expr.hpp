#pragma once

// Random smooth expressions for derivative property tests. Every division,
// log and sqrt is guarded by a 1 + (..)^2 shift so the result is finite on
// [-1, 1]^k; tan only sees bounded arguments.

#include <random>
#include <string>
#include <vector>

namespace testkit {

class RandomExpr {
 public:
  RandomExpr(std::vector<std::string> variables, std::uint64_t seed) : vars_(std::move(variables)), rng_(seed) {}

  std::string make(int depth = 4) { return node(depth); }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  int pick(int count) { return std::uniform_int_distribution<int>(0, count - 1)(rng_); }

  std::string leaf() {
    if (pick(3) == 0) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", uniform(-2.0, 2.0));
      return std::string("(") + buf + ")";
    }
    return vars_[static_cast<std::size_t>(pick(static_cast<int>(vars_.size())))];
  }

  std::string node(int depth) {
    if (depth <= 0 || pick(5) == 0) return leaf();
    const std::string a = node(depth - 1);
    switch (pick(13)) {
      case 0: return "(" + a + " + " + node(depth - 1) + ")";
      case 1: return "(" + a + " - " + node(depth - 1) + ")";
      case 2: return "(" + a + ")*(" + node(depth - 1) + ")";
      case 3: return "(" + a + ")/(1 + (" + node(depth - 1) + ")^2)";
      case 4: return "sin(" + a + ")";
      case 5: return "cos(" + a + ")";
      case 6: return "tan(0.5*sin(" + a + "))";
      case 7: return "exp(0.5*sin(" + a + "))";
      case 8: return "log(1 + (" + a + ")^2)";
      case 9: return "sqrt(1 + (" + a + ")^2)";
      case 10: return "sinh(0.5*sin(" + a + "))";
      case 11: return "cosh(0.5*cos(" + a + "))";
      default: return "(" + a + ")^" + std::to_string(2 + pick(2));
    }
  }

  std::vector<std::string> vars_;
  std::mt19937_64 rng_;
};

}  // namespace testkit
