#include "ebd/seq_distribution.hpp"

#include <cmath>
#include <string>

#include "ebd/error.hpp"

namespace ebd {

SeqDistribution::SeqDistribution(Table entries) : entries_(std::move(entries)) {
  double total = 0.0;
  for (const auto& [y, p] : entries_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InputDomainError("probability must be finite and >= 0, got " +
                             std::to_string(p));
    }
    total += p;
  }
  if (!entries_.empty() && std::abs(total - 1.0) > 1e-9) {
    throw InputDomainError("probabilities sum to " + std::to_string(total));
  }
}

double SeqDistribution::probability(const TokenSeq& y) const {
  const auto it = entries_.find(y);
  return it == entries_.end() ? 0.0 : it->second;
}

SeqDistribution FrequencyTable::distribution() const {
  if (total_ == 0) throw InputDomainError("no samples");
  SeqDistribution::Table table;
  const double n = static_cast<double>(total_);
  for (const auto& [y, c] : counts_) table.emplace(y, static_cast<double>(c) / n);
  return SeqDistribution(std::move(table));
}

}  // namespace ebd
