#include "ebd/toy_lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ebd/error.hpp"

namespace ebd {

namespace {

constexpr double kRowTolerance = 1e-12;

void check_row(const std::vector<double>& row, std::size_t vocab, std::size_t index) {
  if (row.size() != vocab) {
    throw InputDomainError("transition row " + std::to_string(index) + " has " +
                           std::to_string(row.size()) + " entries, expected " +
                           std::to_string(vocab));
  }
  double total = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InputDomainError("transition row " + std::to_string(index) +
                             " has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kRowTolerance) {
    throw InputDomainError("transition row " + std::to_string(index) +
                           " sums to " + std::to_string(total));
  }
}

// Saturating count of sequences of length <= cap over `vocab` tokens.
std::size_t space_size(std::size_t vocab, std::size_t min_len, std::size_t max_len,
                       std::size_t limit) {
  std::size_t total = 0;
  std::size_t level = 1;
  for (std::size_t len = 0; len <= max_len; ++len) {
    if (len >= min_len) {
      total += level;
      if (total > limit) return limit + 1;
    }
    if (vocab != 0 && level > (limit + 1) / vocab + 1) {
      level = limit + 1;
    } else {
      level *= vocab;
    }
  }
  return total;
}

}  // namespace

void ToyModelSpec::validate() const {
  if (vocab_size == 0) throw InputDomainError("vocab_size must be positive");
  if (order != 1 && order != 2) throw InputDomainError("order must be 1 or 2");
  const std::size_t rows = order == 1 ? 1 : vocab_size + 1;
  if (transition_table.size() != rows) {
    throw InputDomainError("order-" + std::to_string(order) + " model needs " +
                           std::to_string(rows) + " transition rows, got " +
                           std::to_string(transition_table.size()));
  }
  for (std::size_t i = 0; i < rows; ++i) check_row(transition_table[i], vocab_size, i);
  if (const auto* s = std::get_if<StochasticLength>(&length_mode)) {
    if (!(s->stop_probability >= 0.0 && s->stop_probability <= 1.0)) {
      throw InputDomainError("stop_probability must lie in [0, 1]");
    }
  }
}

ToyModelSpec parse_toy_model(std::string_view json_text) {
  ToyModelSpec spec;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    spec.vocab_size = doc.at("vocab_size").get<std::size_t>();
    spec.order = doc.at("order").get<int>();
    spec.transition_table =
        doc.at("transition_table").get<std::vector<std::vector<double>>>();
    const auto& mode = doc.at("length_mode");
    const auto kind = mode.at("kind").get<std::string>();
    if (kind == "fixed") {
      spec.length_mode = FixedLength{mode.at("length").get<std::size_t>()};
    } else if (kind == "stochastic") {
      spec.length_mode = StochasticLength{mode.at("stop_probability").get<double>(),
                                          mode.at("max_length").get<std::size_t>()};
    } else {
      throw InputDomainError("unknown length_mode kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputDomainError(std::string("malformed model spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ToyModelSpec load_toy_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputDomainError("cannot open model spec " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_toy_model(text.str());
}

ToyLm::ToyLm(ToyModelSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

std::size_t ToyLm::length_cap(const DecodeConfig& config) const {
  const std::size_t own = std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, FixedLength>) {
          return m.length;
        } else {
          return m.max_length;
        }
      },
      spec_.length_mode);
  return std::min(own, config.max_len);
}

void ToyLm::check_tokens(const TokenSeq& tokens, const char* what) const {
  for (TokenId t : tokens) {
    if (t >= spec_.vocab_size) {
      throw InputDomainError(std::string(what) + " contains token " +
                             std::to_string(t) + " outside vocab of size " +
                             std::to_string(spec_.vocab_size));
    }
  }
}

void ToyLm::next_event_law(const TokenSeq& prompt, const TokenSeq& response,
                           const DecodeConfig& config,
                           std::vector<double>& law) const {
  const std::size_t vocab = spec_.vocab_size;
  law.assign(vocab + 1, 0.0);
  const std::size_t cap = length_cap(config);
  if (response.size() >= cap) {
    law[0] = 1.0;
    return;
  }

  const std::vector<double>* row = &spec_.transition_table[0];
  if (spec_.order == 2) {
    if (!response.empty()) {
      row = &spec_.transition_table[response.back() + 1];
    } else if (!prompt.empty()) {
      row = &spec_.transition_table[prompt.back() + 1];
    }
  }

  double stop = 0.0;
  if (const auto* s = std::get_if<StochasticLength>(&spec_.length_mode)) {
    stop = s->stop_probability;
  }
  law[0] = stop;
  for (std::size_t t = 0; t < vocab; ++t) law[t + 1] = (1.0 - stop) * (*row)[t];

  // Temperature rescales logits: p_i^(1/tau), renormalized.
  if (config.temperature != 1.0) {
    const double inv_tau = 1.0 / config.temperature;
    double total = 0.0;
    for (double& p : law) {
      p = p > 0.0 ? std::pow(p, inv_tau) : 0.0;
      total += p;
    }
    for (double& p : law) p /= total;
  }
}

void ToyLm::extend(const TokenSeq& prompt, TokenSeq& response,
                   const DecodeConfig& config, Rng& rng) const {
  std::vector<double> law;
  while (true) {
    next_event_law(prompt, response, config, law);
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t event = law.size() - 1;
    for (std::size_t i = 0; i < law.size(); ++i) {
      acc += law[i];
      if (u < acc) {
        event = i;
        break;
      }
    }
    // Rounding can leave u >= acc; fall back to the last event with mass.
    while (law[event] == 0.0 && event > 0) --event;
    if (event == 0) return;
    response.push_back(static_cast<TokenId>(event - 1));
  }
}

TokenSeq ToyLm::sample_full(const TokenSeq& prompt, const DecodeConfig& config,
                            Rng& rng) const {
  config.validate();
  check_tokens(prompt, "prompt");
  TokenSeq response;
  extend(prompt, response, config, rng);
  return response;
}

TokenSeq ToyLm::sample_suffix(const TokenSeq& prompt, const TokenSeq& prefix,
                              const DecodeConfig& config, Rng& rng) const {
  config.validate();
  check_tokens(prompt, "prompt");
  check_tokens(prefix, "prefix");
  if (prefix.size() > length_cap(config)) {
    throw InputDomainError("prefix of length " + std::to_string(prefix.size()) +
                           " exceeds the length cap " +
                           std::to_string(length_cap(config)));
  }
  TokenSeq response = prefix;
  extend(prompt, response, config, rng);
  return response;
}

double ToyLm::prefix_log_prob(const TokenSeq& prompt, const TokenSeq& prefix,
                              const DecodeConfig& config) const {
  check_tokens(prompt, "prompt");
  if (prefix.size() > length_cap(config)) return kNegInf;
  for (TokenId t : prefix) {
    if (t >= spec_.vocab_size) return kNegInf;
  }
  std::vector<double> law;
  TokenSeq partial;
  partial.reserve(prefix.size());
  double total = 0.0;
  for (TokenId t : prefix) {
    next_event_law(prompt, partial, config, law);
    if (law[t + 1] == 0.0) return kNegInf;
    total += std::log(law[t + 1]);
    partial.push_back(t);
  }
  return total;
}

double ToyLm::conditional_log_prob(const TokenSeq& prompt, const TokenSeq& response,
                                   std::size_t cut,
                                   const DecodeConfig& config) const {
  check_tokens(prompt, "prompt");
  if (cut > response.size()) {
    throw InputDomainError("cut " + std::to_string(cut) + " beyond response of length " +
                           std::to_string(response.size()));
  }
  if (response.size() > length_cap(config)) return kNegInf;
  for (TokenId t : response) {
    if (t >= spec_.vocab_size) return kNegInf;
  }
  std::vector<double> law;
  TokenSeq partial(response.begin(), response.begin() + static_cast<std::ptrdiff_t>(cut));
  double total = 0.0;
  for (std::size_t i = cut; i < response.size(); ++i) {
    next_event_law(prompt, partial, config, law);
    const double p = law[response[i] + 1];
    if (p == 0.0) return kNegInf;
    total += std::log(p);
    partial.push_back(response[i]);
  }
  next_event_law(prompt, partial, config, law);
  if (law[0] == 0.0) return kNegInf;
  return total + std::log(law[0]);
}

double ToyLm::log_prob(const TokenSeq& prompt, const TokenSeq& response,
                       const DecodeConfig& config) const {
  return conditional_log_prob(prompt, response, 0, config);
}

SeqDistribution ToyLm::enumerate(const TokenSeq& prompt, const DecodeConfig& config,
                                 std::size_t cap) const {
  config.validate();
  check_tokens(prompt, "prompt");
  const std::size_t max_len = length_cap(config);
  const std::size_t min_len =
      std::holds_alternative<FixedLength>(spec_.length_mode) ? max_len : 0;
  if (space_size(spec_.vocab_size, min_len, max_len, cap) > cap) {
    throw CapacityError("response space too large to enumerate", cap);
  }

  SeqDistribution::Table table;
  TokenSeq partial;
  std::vector<std::vector<double>> laws(max_len + 1);
  // Depth-first walk over reachable prefixes, carrying the prefix log-mass.
  auto walk = [&](auto&& self, double log_mass) -> void {
    auto& law = laws[partial.size()];
    next_event_law(prompt, partial, config, law);
    if (law[0] > 0.0) table.emplace(partial, std::exp(log_mass + std::log(law[0])));
    for (std::size_t t = 0; t < spec_.vocab_size; ++t) {
      const double p = law[t + 1];
      if (p == 0.0) continue;
      partial.push_back(static_cast<TokenId>(t));
      self(self, log_mass + std::log(p));
      partial.pop_back();
    }
  };
  walk(walk, 0.0);
  return SeqDistribution(std::move(table));
}

}  // namespace ebd
