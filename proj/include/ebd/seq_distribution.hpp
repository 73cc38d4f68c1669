#pragma once

#include <cstddef>
#include <map>
#include <span>

#include "ebd/sequence.hpp"

namespace ebd {

// Explicit probability table over token sequences.
class SeqDistribution {
 public:
  using Table = std::map<TokenSeq, double>;

  SeqDistribution() = default;
  // Throws InputDomainError on negative entries or if the mass is not 1
  // within 1e-9.
  explicit SeqDistribution(Table entries);

  const Table& entries() const noexcept { return entries_; }
  std::size_t support_size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(const TokenSeq& y) const { return entries_.count(y) != 0; }
  // Zero for sequences outside the table.
  double probability(const TokenSeq& y) const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  Table entries_;
};

// Incremental frequency counter for chain samples.
class FrequencyTable {
 public:
  void add(const TokenSeq& y) {
    ++counts_[y];
    ++total_;
  }
  std::size_t total() const noexcept { return total_; }
  // Throws InputDomainError when nothing was added.
  SeqDistribution distribution() const;

 private:
  std::map<TokenSeq, std::size_t> counts_;
  std::size_t total_ = 0;
};

}  // namespace ebd
