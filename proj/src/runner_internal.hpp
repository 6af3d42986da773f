#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

#include "lightcone/runner.hpp"

namespace lightcone::runner {

struct Context {
  RunOptions options;
  Caps caps;
  std::optional<std::uint64_t> seed;

  std::uint64_t require_seed(const ExperimentConfig& config) const;
  void check_extent(const ExperimentConfig& config, const std::string& key, long long extent) const;
  void check_sites(const ExperimentConfig& config, const std::string& key, long long sites) const;
};

struct ExperimentSpec {
  std::string name;
  std::vector<std::string> keys;  // accepted config keys besides the common ones
  std::function<RunOutput(const ExperimentConfig&, const Context&)> run;
};

const std::vector<ExperimentSpec>& experiment_table();

// f(k) for k = 0..n-1 on up to `threads` workers; results in index order.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, int threads, F&& f) {
  std::vector<R> out(n);
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) out[k] = f(k);
    return out;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < n; k += workers) {
        try {
          out[k] = f(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace lightcone::runner
