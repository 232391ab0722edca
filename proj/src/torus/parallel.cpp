#include "mkd5/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace mkd5 {

int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("MKD5_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) hw = std::min(hw, cap);
  }
  return hw;
}

namespace {

// chunk layout is a pure function of (n, workers): workers chunks of
// ceil(n/workers), last one short
std::vector<std::pair<std::size_t, std::size_t>> chunks(std::size_t n) {
  std::size_t w = static_cast<std::size_t>(thread_budget());
  w = std::max<std::size_t>(1, std::min(w, n == 0 ? 1 : n));
  std::size_t step = (n + w - 1) / w;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t lo = 0; lo < n; lo += step)
    out.emplace_back(lo, std::min(lo + step, n));
  return out;
}

}  // namespace

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  auto cs = chunks(n);
  if (cs.size() <= 1) {
    if (!cs.empty()) body(cs[0].first, cs[0].second);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(cs.size());
  for (auto [lo, hi] : cs) pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  for (auto& t : pool) t.join();
}

double tree_sum(std::vector<double> parts) {
  if (parts.empty()) return 0.0;
  while (parts.size() > 1) {
    std::vector<double> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
      next.push_back(parts[i] + parts[i + 1]);
    if (parts.size() % 2) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts[0];
}

double reduce_max(std::size_t n, const std::function<double(std::size_t)>& f) {
  auto cs = chunks(n);
  std::vector<double> parts(cs.size(), 0.0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    // recover the chunk slot from lo (chunk layout is deterministic)
    std::size_t step = cs.empty() ? 1 : (cs[0].second - cs[0].first);
    std::size_t slot = lo / step;
    double m = 0.0;
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, f(i));
    parts[slot] = m;
  });
  double m = 0.0;
  for (double p : parts) m = std::max(m, p);
  return m;
}

double reduce_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
  auto cs = chunks(n);
  std::vector<double> parts(cs.size(), 0.0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::size_t step = cs.empty() ? 1 : (cs[0].second - cs[0].first);
    std::size_t slot = lo / step;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    parts[slot] = s;
  });
  return tree_sum(std::move(parts));
}

}  // namespace mkd5
