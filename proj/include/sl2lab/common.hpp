#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sl2lab {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

enum class FailureKind {
  schema,
  no_contraction,
  directions_unconverged,
  not_uh,
  gaps_stubborn,
  not_found,
  budget_exhausted,
  precondition,
  domain,
};

inline const char* to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::schema: return "schema";
    case FailureKind::no_contraction: return "no_contraction";
    case FailureKind::directions_unconverged: return "directions_unconverged";
    case FailureKind::not_uh: return "not_uh";
    case FailureKind::gaps_stubborn: return "gaps_stubborn";
    case FailureKind::not_found: return "not_found";
    case FailureKind::budget_exhausted: return "budget_exhausted";
    case FailureKind::precondition: return "precondition";
    case FailureKind::domain: return "domain";
  }
  return "unknown";
}

/// Error raised by module operations whose contract names a Failure outcome.
class Failure : public std::runtime_error {
 public:
  Failure(FailureKind kind, const std::string& message, double detail = 0.0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(detail) {}

  FailureKind kind() const noexcept { return kind_; }
  /// Operation specific number, e.g. the best cone margin reached.
  double detail() const noexcept { return detail_; }

 private:
  FailureKind kind_;
  double detail_;
};

/// A value paired with a one-sigma style uncertainty.
struct Noisy {
  double value = 0.0;
  double sigma = 0.0;
};

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// splitmix64 finalizer, used to derive independent per-task seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0,1) from a 64 bit word.
inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> threads{1};
  return threads;
}
// Nested loops inside a worker run serially.
inline bool& in_parallel_region() {
  thread_local bool inside = false;
  return inside;
}
}  // namespace detail

/// Worker count for parallel loops. Results never depend on it.
inline void set_thread_count(unsigned n) { detail::thread_setting() = std::max(1u, n); }
inline unsigned thread_count() { return detail::thread_setting().load(); }

/// Runs body(i) for i in [0,n). Each index writes only its own output slot, so
/// any reduction done afterwards in index order is independent of the worker count.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1 || detail::in_parallel_region()) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    const bool was_inside = detail::in_parallel_region();
    detail::in_parallel_region() = true;
    struct Restore {
      bool value;
      ~Restore() { detail::in_parallel_region() = value; }
    } restore{was_inside};
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Evaluates f at every index and returns the results in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace sl2lab
