#pragma once

#include <atomic>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "ebd/generator.hpp"
#include "ebd/reward.hpp"
#include "ebd/toy_lm.hpp"

namespace ebd::test {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(EBD_TEST_DATA_DIR) / name;
}

inline ToyModelSpec uniform_spec(std::size_t vocab, std::size_t length) {
  ToyModelSpec spec;
  spec.vocab_size = vocab;
  spec.order = 1;
  spec.transition_table = {std::vector<double>(vocab, 1.0 / static_cast<double>(vocab))};
  spec.length_mode = FixedLength{length};
  return spec;
}

inline ToyModelSpec point_mass_spec(std::size_t length) {
  ToyModelSpec spec;
  spec.vocab_size = 3;
  spec.order = 1;
  spec.transition_table = {{1.0, 0.0, 0.0}};
  spec.length_mode = FixedLength{length};
  return spec;
}

inline ToyModelSpec stochastic_spec() {
  ToyModelSpec spec;
  spec.vocab_size = 2;
  spec.order = 2;
  spec.transition_table = {{0.5, 0.5}, {0.8, 0.2}, {0.3, 0.7}};
  spec.length_mode = StochasticLength{0.3, 4};
  return spec;
}

// Counts calls and optionally fails on a chosen call (1-based).
template <class Domain>
class CountingGenerator final : public Generator<Domain> {
 public:
  explicit CountingGenerator(const Generator<Domain>& inner, std::size_t fail_on = 0)
      : inner_(inner), fail_on_(fail_on) {}

  typename Domain::Response sample_full(const typename Domain::Prompt& p,
                                        const DecodeConfig& c, Rng& r) const override {
    tick();
    return inner_.sample_full(p, c, r);
  }
  typename Domain::Response sample_suffix(const typename Domain::Prompt& p,
                                          const typename Domain::Response& prefix,
                                          const DecodeConfig& c, Rng& r) const override {
    tick();
    return inner_.sample_suffix(p, prefix, c, r);
  }
  std::size_t calls() const { return calls_; }

 private:
  void tick() const {
    if (++calls_ == fail_on_) throw std::runtime_error("injected generator failure");
  }
  const Generator<Domain>& inner_;
  std::size_t fail_on_;
  mutable std::atomic<std::size_t> calls_{0};
};

template <class Domain>
class CountingReward final : public RewardBackend<Domain> {
 public:
  explicit CountingReward(const RewardBackend<Domain>& inner, std::size_t fail_on = 0)
      : inner_(inner), fail_on_(fail_on) {}

  RewardScore score(const typename Domain::Prompt& p,
                    const typename Domain::Response& y) const override {
    if (++calls_ == fail_on_) throw std::runtime_error("injected reward failure");
    return inner_.score(p, y);
  }
  std::size_t calls() const { return calls_; }

 private:
  const RewardBackend<Domain>& inner_;
  std::size_t fail_on_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace ebd::test
