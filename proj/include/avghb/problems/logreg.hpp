#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "avghb/problems/libsvm.hpp"
#include "avghb/problems/objective.hpp"

namespace avghb::problems {

// Settings for the reference minimizer: gradient descent with stepsize 1/L
// until |grad f| <= grad_tol. Results are cached under cache_dir when set.
struct ReferenceOptions {
  double grad_tol = 1e-10;
  std::size_t max_iters = 5'000'000;
  std::optional<std::filesystem::path> cache_dir;

  // Reads the cache directory from AVGHB_CACHE_DIR.
  static ReferenceOptions from_env();
};

// f(x) = 1/m sum log(1 + exp(-y_i (A x)_i)) + l2/2 |x|^2.
//
// smooth_L = sigma_max(A)^2 / (4m) + l2, strong_mu = l2. When l2 > 0 the
// optimum is certified by a reference solve at construction.
class LogRegProblem final : public Objective {
 public:
  LogRegProblem(Dataset data, double l2, const ReferenceOptions& ref = {});

  const Dataset& data() const noexcept { return data_; }
  double l2() const noexcept { return l2_; }
  // sigma_max(A)^2 / (4m), the data part of the smoothness constant.
  double data_smoothness() const noexcept { return data_L_; }
  // Content hash keying the reference cache.
  std::string content_hash() const;
  // Iterations spent by the reference solve (0 when loaded from cache).
  std::size_t reference_iterations() const noexcept { return ref_iters_; }

  std::string family() const override { return "logreg"; }

 protected:
  Evaluation do_eval(const Vector& x) const override;

 private:
  void solve_reference(const ReferenceOptions& ref);

  Dataset data_;
  double l2_;
  double data_L_ = 0.0;
  std::size_t ref_iters_ = 0;
};

// Largest squared singular value of a sparse matrix.
double max_singular_value_squared(const SparseRowMatrix& A);

// m x d dataset with Gaussian features (each kept with probability
// `density`) and labels sign(a_i^T w + 0.1 noise) for a Gaussian w.
Dataset make_synthetic_dataset(std::size_t m, std::size_t d, std::uint64_t seed,
                               double density = 1.0);

// Reference minimizer file: header line `dim=<n> f_star=<v>` then one
// coordinate per line.
void write_reference_vector(const std::filesystem::path& path, const Vector& x, double f_star);
std::optional<std::pair<Vector, double>> read_reference_vector(const std::filesystem::path& path);

}  // namespace avghb::problems
