#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebd/harness/run_record.hpp"

namespace ebd::harness {

struct MethodSummary {
  std::string method;
  std::size_t records = 0;
  std::size_t failures = 0;
  std::optional<double> mean_reward;
  std::optional<double> mean_latency_ms;
  // latency(reference) / latency(method): how many times faster than the
  // reference this method is.
  std::optional<double> speedup;
  std::optional<double> mean_acceptance_rate;
  // Ten bins of width 0.1 over [0, 1]; 1.0 falls in the last bin.
  std::array<std::size_t, 10> acceptance_histogram{};
  std::optional<double> accuracy;
};

struct Report {
  std::vector<MethodSummary> methods;  // in first-appearance order
  std::string reference;               // empty when speedups are omitted
  bool show_speedup = false;
};

// Throws InputDomainError on an empty record list, records with different
// config tags, or an unknown reference method. The reference defaults to
// "direct" when present, else the first method seen. Speedups are shown
// only with two or more methods.
Report summarize(std::span<const RunRecord> records,
                 const std::optional<std::string>& reference = std::nullopt);

std::string render_csv(const Report& report);
std::string render_text(const Report& report);

}  // namespace ebd::harness
