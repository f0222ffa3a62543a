#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <span>
#include <vector>

namespace spurious {

/// How Monte-Carlo kernels run their independent trials. Both policies give
/// bit-identical results: every trial draws from its own stream and results
/// are reduced serially in trial order.
enum class Execution { serial, parallel };

/// Random engine for one trial, derived from (seed, trial) only.
std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial);

/// Number of worker threads the parallel policy will use.
int worker_count();

/// Serial reference loop: out[i] = fn(i, engine(seed, i)).
template <class Result, class Fn>
std::vector<Result> run_trials_serial(std::size_t trials, std::uint64_t seed, Fn&& fn) {
  std::vector<Result> out(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    auto engine = trial_engine(seed, i);
    out[i] = fn(i, engine);
  }
  return out;
}

/// OpenMP version of run_trials_serial. The first exception thrown by any
/// trial is rethrown on the calling thread.
template <class Result, class Fn>
std::vector<Result> run_trials_parallel(std::size_t trials, std::uint64_t seed, Fn&& fn) {
  std::vector<Result> out(trials);
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      auto engine = trial_engine(seed, static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i), engine);
    } catch (...) {
#pragma omp critical(spurious_trial_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

template <class Result, class Fn>
std::vector<Result> run_trials(std::size_t trials, std::uint64_t seed, Execution exec, Fn&& fn) {
  if (exec == Execution::serial) return run_trials_serial<Result>(trials, seed, std::forward<Fn>(fn));
  return run_trials_parallel<Result>(trials, seed, std::forward<Fn>(fn));
}

/// Sample mean and standard error of the mean.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

MeanEstimate estimate_mean(std::span<const double> values);

}  // namespace spurious
