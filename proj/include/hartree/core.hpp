#pragma once
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Core value types shared by every module: validated problem parameters,
// the small fixed-capacity point type used in integrand loops, quadrature
// budgets, and the error convention (every failure carries a stable code).

namespace hartree {

inline constexpr int kMaxDim = 12;

//==============================================================================
// Errors. Each throw site passes a stable code (what went wrong) and a
// human-readable message (why). The CLI maps codes to exit statuses.

class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string &what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string &code() const { return code_; }

private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string &msg) {
  throw Error(std::move(code), msg);
}

//==============================================================================
// Point in R^N, N <= kMaxDim. Fixed capacity so integrand loops never touch
// the heap. Coordinates beyond dim() are kept at zero.

class Vec {
public:
  Vec() = default;
  explicit Vec(int n) : n_(n) {
    if (n < 0 || n > kMaxDim)
      fail("DimensionTooLarge", "point dimension " + std::to_string(n) +
                                    " outside [0," + std::to_string(kMaxDim) +
                                    "]");
  }
  static Vec zero(int n) { return Vec(n); }

  int dim() const { return n_; }
  double &operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
  const double &operator[](int i) const {
    return v_[static_cast<std::size_t>(i)];
  }

  Vec &operator+=(const Vec &o) {
    for (int i = 0; i < n_; ++i)
      v_[static_cast<std::size_t>(i)] += o[i];
    return *this;
  }
  Vec &operator-=(const Vec &o) {
    for (int i = 0; i < n_; ++i)
      v_[static_cast<std::size_t>(i)] -= o[i];
    return *this;
  }
  Vec &operator*=(double s) {
    for (int i = 0; i < n_; ++i)
      v_[static_cast<std::size_t>(i)] *= s;
    return *this;
  }

private:
  std::array<double, kMaxDim> v_{};
  int n_ = 0;
};

inline Vec operator+(Vec a, const Vec &b) { return a += b; }
inline Vec operator-(Vec a, const Vec &b) { return a -= b; }
inline Vec operator*(double s, Vec a) { return a *= s; }

inline double dot(const Vec &a, const Vec &b) {
  double d = 0;
  for (int i = 0; i < a.dim(); ++i)
    d += a[i] * b[i];
  return d;
}
inline double norm2(const Vec &a) { return dot(a, a); }
inline double norm(const Vec &a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec &a, const Vec &b) { return norm(a - b); }

//==============================================================================
// Problem parameters: dimension N, Riesz order alpha, derived exponents.
// Validity gates: N >= 5 and alpha in (5 - 6/(N-2), N), strict on both ends.

struct ProblemParams {
  int N = 0;
  double alpha = 0;
  double two_star_alpha = 0; // (2N - alpha)/(N - 2)
  double tau = 0;            // (N - 4)/(N - 2)

  double nu() const { return 0.5 * (N - 2); } // bubble profile exponent
};

ProblemParams make_problem(int N, double alpha);

//==============================================================================
// Quadrature budgets. One struct serves all three engines; `scheme` records
// which engine produced a result. Seeds only matter for the QMC engine.

enum class Scheme { radial_1d, two_center_2d, qmc_nd };

struct QuadratureSpec {
  Scheme scheme = Scheme::qmc_nd;
  long nodes = 1L << 16;          // radial/two-center: max panels; qmc: points per shift
  int shifts = 8;                 // qmc randomized-shift replicates
  std::uint64_t seed = 12345;     // qmc shift seed
  double rel_tol = 1e-8;          // adaptive engines: requested relative error
  double abs_tol = 0.0;           // adaptive engines: absolute floor
  double domain_radius = 60.0;    // qmc: truncation radius for infinite domains

  static QuadratureSpec radial(double rtol = 1e-10, long max_panels = 4096) {
    QuadratureSpec q;
    q.scheme = Scheme::radial_1d;
    q.nodes = max_panels;
    q.rel_tol = rtol;
    return q;
  }
  static QuadratureSpec two_center(double rtol = 1e-8, long max_panels = 4096) {
    QuadratureSpec q;
    q.scheme = Scheme::two_center_2d;
    q.nodes = max_panels;
    q.rel_tol = rtol;
    return q;
  }
  static QuadratureSpec qmc(long points = 1L << 18, std::uint64_t seed = 12345,
                            double radius = 60.0) {
    QuadratureSpec q;
    q.scheme = Scheme::qmc_nd;
    q.nodes = points;
    q.seed = seed;
    q.domain_radius = radius;
    return q;
  }
};

struct IntegralResult {
  double value = 0;
  double est_error = 0;
  long nodes_used = 0;
  Scheme scheme = Scheme::radial_1d;
};

//==============================================================================
// m-bubble configuration parameters (the reduced variables). The cutoff and
// placement geometry live in the geometry module; this is the plain record.

struct AnsatzConfig {
  int m = 1;
  double r_bar = 1.0;
  std::vector<double> x_bar_pp; // in R^{N-2}
  double lambda = 1.0;
  double delta = 0.1;       // cutoff inner radius
  double L0 = 0.02, L1 = 2.0; // admissible window for t = lambda * m^{-(N-2)/(N-4)}
  double theta = 0.1;       // proximity exponent in the (uxi)-style bound
};

AnsatzConfig make_ansatz_config(const ProblemParams &p, int m, double r_bar,
                                std::vector<double> x_bar_pp, double lambda);

//==============================================================================
// Deterministic parallelism. Work is split into a fixed number of chunks
// (independent of the thread count); per-chunk results are combined in chunk
// order, so outputs are identical for any --threads value.

int thread_cap();
void set_thread_cap(int k); // k <= 0 restores the hardware default

// Runs fn(chunk_index) for chunk_index in [0, n_chunks) on the pool.
void parallel_chunks(int n_chunks, const std::function<void(int)> &fn);

//==============================================================================
// Neumaier compensated accumulator: deterministic summation helper used by
// every engine (fixed accumulation order regardless of thread count).

class KahanSum {
public:
  void add(double x) {
    double t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  double total() const { return s_ + c_; }

private:
  double s_ = 0, c_ = 0;
};

} // namespace hartree
