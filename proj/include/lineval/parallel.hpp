#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace lineval {

// Applies fn to every element over contiguous index blocks, one thread per
// block, and returns results in input order. Results land in per-index slots,
// so scheduling (and the jobs value) can never change the output. fn must be
// safe to call concurrently. If several elements throw, the exception of the
// lowest index is rethrown — again independent of scheduling.
template <typename T, typename F>
auto parallel_map(const std::vector<T>& items, int jobs, F&& fn) {
  using R = std::decay_t<decltype(fn(items.front()))>;
  const std::size_t n = items.size();
  std::vector<std::optional<R>> slots(n);

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, jobs > 0 ? jobs : 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(fn(items[i]));
  } else {
    struct Failure {
      std::size_t index;
      std::exception_ptr error;
    };
    std::vector<std::optional<Failure>> failures(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        for (std::size_t i = begin; i < end; ++i) {
          try {
            slots[i].emplace(fn(items[i]));
          } catch (...) {
            failures[w] = Failure{i, std::current_exception()};
            return;
          }
        }
      });
    }
    for (std::thread& t : threads) t.join();

    const std::optional<Failure>* first = nullptr;
    for (const auto& f : failures)
      if (f && (!first || f->index < (*first)->index)) first = &f;
    if (first) std::rethrow_exception((*first)->error);
  }

  std::vector<R> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::move(*slots[i]));
  return out;
}

}  // namespace lineval
