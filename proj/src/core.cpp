#include "hartree/core.hpp"

#include <atomic>
#include <thread>

namespace hartree {

ProblemParams make_problem(int N, double alpha) {
  if (N < 5)
    fail("DimensionTooSmall",
         "N = " + std::to_string(N) + "; the construction needs N >= 5");
  if (N > kMaxDim - 2)
    fail("DimensionTooLarge", "N = " + std::to_string(N) +
                                  " exceeds the supported maximum " +
                                  std::to_string(kMaxDim - 2));
  const double lo = 5.0 - 6.0 / (N - 2);
  if (!(alpha > lo) || !(alpha < N))
    fail("AlphaOutOfRange", "alpha = " + std::to_string(alpha) +
                                " outside (" + std::to_string(lo) + ", " +
                                std::to_string(N) + ")");
  ProblemParams p;
  p.N = N;
  p.alpha = alpha;
  p.two_star_alpha = (2.0 * N - alpha) / (N - 2);
  p.tau = static_cast<double>(N - 4) / (N - 2);
  return p;
}

AnsatzConfig make_ansatz_config(const ProblemParams &p, int m, double r_bar,
                                std::vector<double> x_bar_pp, double lambda) {
  if (m < 1)
    fail("MTooSmall", "bubble count m = " + std::to_string(m));
  if (!(r_bar > 0))
    fail("NonPositiveArgument", "r_bar must be positive");
  if (!(lambda > 0))
    fail("NonPositiveArgument", "lambda must be positive");
  if (static_cast<int>(x_bar_pp.size()) != p.N - 2)
    fail("BadCenterDimension",
         "x_bar_pp has " + std::to_string(x_bar_pp.size()) +
             " components, expected N-2 = " + std::to_string(p.N - 2));
  AnsatzConfig a;
  a.m = m;
  a.r_bar = r_bar;
  a.x_bar_pp = std::move(x_bar_pp);
  a.lambda = lambda;
  a.delta = 0.1 * r_bar;
  return a;
}

//==============================================================================

namespace {
std::atomic<int> g_thread_cap{0};
}

int thread_cap() {
  int k = g_thread_cap.load();
  if (k > 0)
    return k;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_cap(int k) { g_thread_cap.store(k); }

void parallel_chunks(int n_chunks, const std::function<void(int)> &fn) {
  const int workers = std::min(thread_cap(), n_chunks);
  if (workers <= 1) {
    for (int c = 0; c < n_chunks; ++c)
      fn(c);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int c = next.fetch_add(1);
        if (c >= n_chunks)
          return;
        fn(c);
      }
    });
  }
  for (auto &t : pool)
    t.join();
}

} // namespace hartree
