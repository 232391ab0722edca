#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mkd5 {

// worker cap: min(hardware, MKD5_THREADS env var when set)
int thread_budget();

// data-parallel loop over [0, n) in fixed contiguous chunks; chunk shape is a
// pure function of (n, workers) so per-chunk results are reproducible
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

// deterministic tree reduction over per-chunk partials: the chunking and the
// combine order depend only on n (never on thread timing), so fixed seeds
// give byte-identical reports
double reduce_max(std::size_t n, const std::function<double(std::size_t)>& f);
double reduce_sum(std::size_t n, const std::function<double(std::size_t)>& f);

// tree-combine already-computed partials in index order
double tree_sum(std::vector<double> parts);

}  // namespace mkd5
