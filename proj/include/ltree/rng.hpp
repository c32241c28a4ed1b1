#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ltree {

// One independent random stream. Streams are derived from a master seed and
// a stream index, so replicate i of a batch is reproducible on its own.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x6c74u};
    eng_.seed(seq);
  }

  double uniform() { return unif_(eng_); }
  // Uniform on (0,1], safe under log.
  double uniform_pos() { return 1.0 - unif_(eng_); }
  double gauss() { return normal_(eng_); }
  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<long>(mean)(eng_);
  }
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(eng_);
  }
  bool bernoulli(double p) { return uniform() < p; }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ltree
