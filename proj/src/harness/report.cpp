#include "ebd/harness/report.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "ebd/error.hpp"

namespace ebd::harness {

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> mean() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

std::size_t histogram_bin(double rate) {
  const auto bin = static_cast<std::size_t>(std::clamp(rate, 0.0, 1.0) * 10.0);
  return std::min<std::size_t>(bin, 9);
}

std::string fixed(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string{};
}

}  // namespace

Report summarize(std::span<const RunRecord> records,
                 const std::optional<std::string>& reference) {
  if (records.empty()) throw InputDomainError("report needs at least one record");
  std::set<std::string> tags;
  for (const auto& r : records) tags.insert(r.config_tag);
  if (tags.size() > 1) {
    throw InputDomainError("records come from " + std::to_string(tags.size()) +
                           " incompatible configurations");
  }

  Report report;
  struct Acc {
    Accumulator reward, latency, acceptance, accuracy;
  };
  std::vector<Acc> acc;
  auto find = [&](const std::string& method) -> std::size_t {
    for (std::size_t i = 0; i < report.methods.size(); ++i) {
      if (report.methods[i].method == method) return i;
    }
    report.methods.push_back({});
    report.methods.back().method = method;
    acc.emplace_back();
    return report.methods.size() - 1;
  };

  for (const auto& r : records) {
    const auto i = find(r.method);
    auto& m = report.methods[i];
    ++m.records;
    if (r.failed()) {
      ++m.failures;
      continue;
    }
    if (r.raw_reward) acc[i].reward.add(*r.raw_reward);
    if (r.latency_ms) acc[i].latency.add(*r.latency_ms);
    if (r.acceptance_rate) {
      acc[i].acceptance.add(*r.acceptance_rate);
      ++m.acceptance_histogram[histogram_bin(*r.acceptance_rate)];
    }
    if (r.correct) acc[i].accuracy.add(*r.correct ? 1.0 : 0.0);
  }
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    auto& m = report.methods[i];
    m.mean_reward = acc[i].reward.mean();
    m.mean_latency_ms = acc[i].latency.mean();
    m.mean_acceptance_rate = acc[i].acceptance.mean();
    m.accuracy = acc[i].accuracy.mean();
  }

  if (reference) {
    const bool known = std::any_of(report.methods.begin(), report.methods.end(),
                                   [&](const auto& m) { return m.method == *reference; });
    if (!known) throw InputDomainError("reference method '" + *reference + "' not in records");
  }
  report.show_speedup = report.methods.size() >= 2;
  if (!report.show_speedup) return report;

  report.reference = reference.value_or("");
  if (report.reference.empty()) {
    const bool has_direct = std::any_of(report.methods.begin(), report.methods.end(),
                                        [](const auto& m) { return m.method == "direct"; });
    report.reference = has_direct ? "direct" : report.methods.front().method;
  }
  const auto& ref = *std::find_if(report.methods.begin(), report.methods.end(),
                                  [&](const auto& m) { return m.method == report.reference; });
  const auto ref_latency = ref.mean_latency_ms;
  for (auto& m : report.methods) {
    if (ref_latency && m.mean_latency_ms && *m.mean_latency_ms > 0.0) {
      m.speedup = *ref_latency / *m.mean_latency_ms;
    }
  }
  return report;
}

std::string render_csv(const Report& report) {
  std::string out = "method,records,failures,mean_reward,mean_latency_ms";
  if (report.show_speedup) out += ",speedup_vs_" + report.reference;
  out += ",mean_acceptance_rate,accuracy,acceptance_histogram\n";
  for (const auto& m : report.methods) {
    out += fmt::format("{},{},{},{},{}", m.method, m.records, m.failures,
                       fixed(m.mean_reward), fixed(m.mean_latency_ms));
    if (report.show_speedup) out += "," + fixed(m.speedup);
    std::string histogram;
    if (m.mean_acceptance_rate) {
      histogram = fmt::format("{}", fmt::join(m.acceptance_histogram, ";"));
    }
    out += fmt::format(",{},{},{}\n", fixed(m.mean_acceptance_rate), fixed(m.accuracy),
                       histogram);
  }
  return out;
}

std::string render_text(const Report& report) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"method", "n", "fail", "reward", "latency_ms"};
  if (report.show_speedup) header.push_back("speedup");
  header.insert(header.end(), {"accept", "accuracy"});
  rows.push_back(header);
  for (const auto& m : report.methods) {
    std::vector<std::string> row = {
        m.method, std::to_string(m.records), std::to_string(m.failures),
        m.mean_reward ? fmt::format("{:.4f}", *m.mean_reward) : "-",
        m.mean_latency_ms ? fmt::format("{:.2f}", *m.mean_latency_ms) : "-"};
    if (report.show_speedup) row.push_back(m.speedup ? fmt::format("{:.2f}x", *m.speedup) : "-");
    row.push_back(m.mean_acceptance_rate ? fmt::format("{:.3f}", *m.mean_acceptance_rate)
                                         : "-");
    row.push_back(m.accuracy ? fmt::format("{:.3f}", *m.accuracy) : "-");
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out += "  ";
      out += c == 0 ? fmt::format("{:<{}}", rows[r][c], width[c])
                    : fmt::format("{:>{}}", rows[r][c], width[c]);
    }
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    }
  }
  if (report.show_speedup) out += "speedup reference: " + report.reference + '\n';

  for (const auto& m : report.methods) {
    if (!m.mean_acceptance_rate) continue;
    out += "acceptance histogram (" + m.method + "):\n";
    for (std::size_t b = 0; b < m.acceptance_histogram.size(); ++b) {
      out += fmt::format("  [{:.1f},{:.1f}{} {}\n", b / 10.0, (b + 1) / 10.0,
                         b == 9 ? "]" : ")", m.acceptance_histogram[b]);
    }
  }
  return out;
}

}  // namespace ebd::harness
