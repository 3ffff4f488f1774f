#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gprobe/numerics.hpp"
#include "gprobe/probe.hpp"

namespace test {

using gprobe::Index;
using gprobe::Matrix;
using gprobe::Rng;
using gprobe::Vector;

inline Vector random_vector(Index n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

// Central difference of f at x along every coordinate.
inline Vector numeric_gradient(const std::function<double(const Vector&)>& f, Vector x,
                               double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Vector& a, const Vector& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

inline std::vector<gprobe::ProbeSample> random_samples(Index d, std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> bias(-2.0, 2.0);
  std::uniform_int_distribution<int> gender(-1, 1);
  std::vector<gprobe::ProbeSample> out;
  for (std::size_t k = 0; k < n; ++k) {
    gprobe::ProbeSample s;
    s.delta = random_vector(d, rng);
    s.task = k % 2 == 0 ? gprobe::Task::Bias : gprobe::Task::Gender;
    s.target = s.task == gprobe::Task::Bias ? bias(rng) : gender(rng);
    s.sentence_id = static_cast<std::uint32_t>(k);
    out.push_back(std::move(s));
  }
  return out;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("gprobe_" + name + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace test
