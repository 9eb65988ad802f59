#pragma once

#include <cstddef>
#include <functional>

namespace vppflex::support {

/// Runs index-addressed tasks on a fixed number of workers. Callers write
/// results into slots owned by the index, so the outcome never depends on
/// the worker count or on scheduling order.
class Executor {
 public:
  explicit Executor(std::size_t workers = 1) : workers_(workers == 0 ? 1 : workers) {}

  std::size_t workers() const { return workers_; }

  /// Calls task(i) for every i in [0, n). If tasks throw, the exception of
  /// the lowest failing index is rethrown after all workers stop.
  void for_each_index(std::size_t n, const std::function<void(std::size_t)>& task) const;

 private:
  std::size_t workers_;
};

}  // namespace vppflex::support
