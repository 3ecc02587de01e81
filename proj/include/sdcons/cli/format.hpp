#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <system_error>

#include "sdcons/sim.hpp"

namespace sdcons::cli {

// Shortest decimal string that parses back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) return std::to_string(v);
  return {buf, res.ptr};
}

// Fixed 4-decimal rendering as used when comparing against published gains.
inline std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline void write_trajectory_csv(std::ostream& os, const sim::BatchResult& batch) {
  os << "run_id,k,t_k,h_k,topology_id,delta_k,nu_k\n";
  for (const auto& run : batch.runs)
    for (const auto& s : run.steps)
      os << run.run_id << ',' << s.k << ',' << shortest(s.t) << ',' << shortest(s.h) << ',' << s.topology_id
         << ',' << shortest(s.delta) << ',' << shortest(s.nu) << '\n';
}

inline void write_aggregate_csv(std::ostream& os, const sim::BatchResult& batch) {
  os << "k,max_delta_k\n";
  for (std::size_t k = 0; k < batch.aggregate_delta.size(); ++k)
    os << k << ',' << shortest(batch.aggregate_delta[k]) << '\n';
}

// One row per run, step and agent: run_id,k,agent,x0,x1,...
inline void write_state_csv(std::ostream& os, const sim::BatchResult& batch) {
  const std::size_t n = batch.runs.empty() || batch.runs.front().states.empty()
                            ? 0
                            : batch.runs.front().states.front().cols();
  os << "run_id,k,agent";
  for (std::size_t c = 0; c < n; ++c) os << ",x" << c;
  os << '\n';
  for (const auto& run : batch.runs)
    for (std::size_t k = 0; k < run.states.size(); ++k) {
      const auto& x = run.states[k];
      for (std::size_t i = 0; i < x.rows(); ++i) {
        os << run.run_id << ',' << k << ',' << i;
        for (std::size_t c = 0; c < x.cols(); ++c) os << ',' << shortest(x(i, c));
        os << '\n';
      }
    }
}

}  // namespace sdcons::cli
