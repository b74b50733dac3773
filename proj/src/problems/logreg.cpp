#include "avghb/problems/logreg.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>

#include "avghb/error.hpp"
#include "avghb/rng.hpp"

namespace avghb::problems {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001B3ULL;
    }
  }
  template <typename T>
  void value(T v) {
    bytes(&v, sizeof v);
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

}  // namespace

ReferenceOptions ReferenceOptions::from_env() {
  ReferenceOptions opts;
  if (const char* dir = std::getenv("AVGHB_CACHE_DIR"); dir && *dir) opts.cache_dir = dir;
  return opts;
}

double max_singular_value_squared(const SparseRowMatrix& A) {
  const auto d = A.cols();
  if (A.nonZeros() == 0 || d == 0) return 0.0;
  if (d <= 4096) {
    const Matrix gram = Matrix(A.transpose() * A);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
    return std::max(0.0, solver.eigenvalues()(d - 1));
  }
  // Power iteration on A^T A for wide data.
  Vector v = Vector::Ones(d).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Vector w = A.transpose() * (A * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - lambda) <= 1e-15 * next) return next;
    lambda = next;
  }
  return lambda;
}

LogRegProblem::LogRegProblem(Dataset data, double l2, const ReferenceOptions& ref)
    : data_(std::move(data)), l2_(l2) {
  const auto m = data_.features.rows();
  if (m == 0) throw DomainError("logreg: dataset has no samples");
  if (data_.labels.size() != m) throw DimensionError(m, data_.labels.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    if (data_.labels(i) != 1.0 && data_.labels(i) != -1.0) {
      throw DomainError("logreg: label at row " + std::to_string(i) + " is not +-1");
    }
  }
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw DomainError("logreg: l2 must be nonnegative");
  if (data_.features.cols() == 0) throw DomainError("logreg: dataset has no features");

  data_L_ = max_singular_value_squared(data_.features) / (4.0 * static_cast<double>(m));
  meta_.dim = static_cast<std::size_t>(data_.features.cols());
  meta_.smooth_L = data_L_ + l2_;
  meta_.strong_mu = l2_;
  meta_.validate();
  if (l2_ > 0.0) solve_reference(ref);
}

Evaluation LogRegProblem::do_eval(const Vector& x) const {
  const auto& A = data_.features;
  const double inv_m = 1.0 / static_cast<double>(A.rows());
  const Vector z = A * x;
  Vector coeff(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double t = -data_.labels(i) * z(i);
    loss += softplus(t);
    coeff(i) = -data_.labels(i) * sigmoid(t);
  }
  Evaluation out;
  out.value = loss * inv_m + 0.5 * l2_ * x.squaredNorm();
  out.gradient = inv_m * (A.transpose() * coeff) + l2_ * x;
  return out;
}

std::string LogRegProblem::content_hash() const {
  Fnv1a h;
  const auto& A = data_.features;
  h.value(static_cast<std::int64_t>(A.rows()));
  h.value(static_cast<std::int64_t>(A.cols()));
  h.bytes(A.outerIndexPtr(), sizeof(*A.outerIndexPtr()) * static_cast<std::size_t>(A.rows() + 1));
  h.bytes(A.innerIndexPtr(), sizeof(*A.innerIndexPtr()) * static_cast<std::size_t>(A.nonZeros()));
  for (Eigen::Index k = 0; k < A.nonZeros(); ++k) h.value(std::bit_cast<std::uint64_t>(A.valuePtr()[k]));
  for (Eigen::Index i = 0; i < data_.labels.size(); ++i)
    h.value(std::bit_cast<std::uint64_t>(data_.labels(i)));
  h.value(std::bit_cast<std::uint64_t>(l2_));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  return buf;
}

void LogRegProblem::solve_reference(const ReferenceOptions& ref) {
  std::optional<std::filesystem::path> cache_file;
  if (ref.cache_dir) {
    cache_file = *ref.cache_dir / ("logreg_" + content_hash() + ".vec");
    if (auto cached = read_reference_vector(*cache_file);
        cached && static_cast<std::size_t>(cached->first.size()) == meta_.dim) {
      meta_.x_star = std::move(cached->first);
      meta_.f_star = cached->second;
      meta_.optimum_known = true;
      return;
    }
  }

  const double step = 1.0 / meta_.smooth_L;
  Vector x = Vector::Zero(static_cast<Eigen::Index>(meta_.dim));
  Evaluation e = do_eval(x);
  std::size_t it = 0;
  while (e.gradient.norm() > ref.grad_tol) {
    if (it == ref.max_iters) {
      throw Error("logreg: reference solve did not reach |grad| <= " + std::to_string(ref.grad_tol) +
                  " within " + std::to_string(ref.max_iters) + " iterations");
    }
    x -= step * e.gradient;
    e = do_eval(x);
    ++it;
  }
  ref_iters_ = it;
  meta_.x_star = std::move(x);
  meta_.f_star = e.value;
  meta_.optimum_known = true;

  if (cache_file) {
    std::error_code ec;
    std::filesystem::create_directories(cache_file->parent_path(), ec);
    write_reference_vector(*cache_file, meta_.x_star, meta_.f_star);
  }
}

Dataset make_synthetic_dataset(std::size_t m, std::size_t d, std::uint64_t seed, double density) {
  if (m == 0 || d == 0) throw DomainError("synthetic dataset needs m, d > 0");
  if (!(density > 0.0) || density > 1.0) throw DomainError("density must lie in (0, 1]");
  Rng rng(seed);
  Vector w(static_cast<Eigen::Index>(d));
  for (auto& v : w) v = rng.normal();

  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> entries;
  Dataset out;
  out.labels.resize(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    double score = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double keep = rng.uniform();
      const double a = rng.normal();
      if (keep < density) {
        entries.emplace_back(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j), a);
        score += a * w(static_cast<Eigen::Index>(j));
      }
    }
    score += 0.1 * rng.normal();
    out.labels(static_cast<Eigen::Index>(i)) = score >= 0.0 ? 1.0 : -1.0;
  }
  out.features.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  out.features.setFromTriplets(entries.begin(), entries.end());
  out.features.makeCompressed();
  return out;
}

void write_reference_vector(const std::filesystem::path& path, const Vector& x, double f_star) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write reference vector '" + path.string() + "'");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", f_star);
  out << "dim=" << x.size() << " f_star=" << buf << '\n';
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", x(i));
    out << buf << '\n';
  }
}

std::optional<std::pair<Vector, double>> read_reference_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string header;
  if (!std::getline(in, header)) return std::nullopt;
  long long dim = -1;
  double f_star = 0.0;
  if (std::sscanf(header.c_str(), "dim=%lld f_star=%lf", &dim, &f_star) != 2 || dim < 0) {
    return std::nullopt;
  }
  Vector x(dim);
  for (long long i = 0; i < dim; ++i) {
    if (!(in >> x(i))) return std::nullopt;
  }
  return std::make_pair(std::move(x), f_star);
}

}  // namespace avghb::problems
