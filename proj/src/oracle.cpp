#include "ebd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "ebd/error.hpp"
#include "ebd/sampler.hpp"

namespace ebd {

TiltSpec make_tilt(double beta, const Standardizer& standardizer,
                   const RewardBackend<TokenDomain>& reward, TokenSeq prompt) {
  return TiltSpec{beta, standardizer,
                  [&reward, prompt = std::move(prompt)](const TokenSeq& y) {
                    return reward.score(prompt, y).raw();
                  }};
}

Posterior exact_posterior(const SeqDistribution& prior, const TiltSpec& tilt) {
  if (prior.empty()) throw InputDomainError("prior has empty support");
  std::vector<std::pair<const TokenSeq*, double>> log_weights;
  log_weights.reserve(prior.support_size());
  double max_lw = -std::numeric_limits<double>::infinity();
  for (const auto& [y, p] : prior) {
    if (p <= 0.0) continue;
    const double s = tilt.score(y);
    if (!std::isfinite(s)) throw InputDomainError("score is not finite on the support");
    const double lw = std::log(p) + tilt.beta * s;
    log_weights.emplace_back(&y, lw);
    max_lw = std::max(max_lw, lw);
  }
  if (log_weights.empty()) throw InputDomainError("prior has empty support");
  double acc = 0.0;
  for (const auto& [y, lw] : log_weights) acc += std::exp(lw - max_lw);
  const double log_z = max_lw + std::log(acc);

  SeqDistribution::Table table;
  for (const auto& [y, lw] : log_weights) table.emplace(*y, std::exp(lw - log_z));
  return {SeqDistribution(std::move(table)), log_z, std::exp(log_z)};
}

double energy(const SeqDistribution& prior, const TiltSpec& tilt, const TokenSeq& y) {
  const double p = prior.probability(y);
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(p) - tilt.beta * tilt.score(y);
}

double kl(const SeqDistribution& q, const SeqDistribution& p) {
  double total = 0.0;
  for (const auto& [y, qy] : q) {
    if (qy <= 0.0) continue;
    const double py = p.probability(y);
    if (py <= 0.0) {
      throw InputDomainError("KL undefined: q has mass at [" + render_tokens(y) +
                             "] outside the support of p");
    }
    total += qy * (std::log(qy) - std::log(py));
  }
  // Rounding can produce tiny negatives for q ~= p.
  return std::max(total, 0.0);
}

double expected_score(const SeqDistribution& q, const TiltSpec& tilt) {
  double total = 0.0;
  for (const auto& [y, qy] : q) {
    if (qy > 0.0) total += qy * tilt.score(y);
  }
  return total;
}

double expected_reward(const SeqDistribution& q, const TiltSpec& tilt) {
  double total = 0.0;
  for (const auto& [y, qy] : q) {
    if (qy > 0.0) total += qy * tilt.raw_reward(y);
  }
  return total;
}

ObjectiveValue objective(const SeqDistribution& q, const SeqDistribution& prior,
                         const TiltSpec& tilt) {
  const double divergence = kl(q, prior);
  const double score = expected_score(q, tilt);
  if (tilt.beta == 0.0) {
    if (tv_distance(q, prior) == 0.0) return {score, true};
    return {-std::numeric_limits<double>::infinity(), true};
  }
  return {score - divergence / tilt.beta, false};
}

SeqDistribution empirical_distribution(std::span<const TokenSeq> samples) {
  FrequencyTable counts;
  for (const auto& y : samples) counts.add(y);
  return counts.distribution();
}

double tv_distance(const SeqDistribution& a, const SeqDistribution& b) {
  double total = 0.0;
  for (const auto& [y, pa] : a) total += std::abs(pa - b.probability(y));
  for (const auto& [y, pb] : b) {
    if (!a.contains(y)) total += pb;
  }
  return std::min(0.5 * total, 1.0);
}

Standardizer prior_standardizer(const SeqDistribution& prior,
                                const RewardBackend<TokenDomain>& reward,
                                const TokenSeq& prompt) {
  double mean = 0.0;
  for (const auto& [y, p] : prior) mean += p * reward.score(prompt, y).raw();
  double var = 0.0;
  for (const auto& [y, p] : prior) {
    const double d = reward.score(prompt, y).raw() - mean;
    var += p * d * d;
  }
  return Standardizer(mean, std::max(std::sqrt(var), kStdFloor));
}

StationarityRun run_stationarity_chain(const ToyLm& model,
                                       const RewardBackend<TokenDomain>& reward,
                                       const TokenSeq& prompt,
                                       const AdvantageStats& stats,
                                       const DecodeConfig& config,
                                       std::size_t burn_in, std::size_t steps) {
  if (steps == 0) throw InputDomainError("stationarity chain needs at least one step");
  DecodeConfig chain_config = config;
  chain_config.steps = burn_in + steps;
  chain_config.validate();

  Rng rng(chain_config.seed);
  auto initial = model.sample_full(prompt, chain_config, rng);
  const auto raw = reward.score(prompt, initial);
  auto state = ChainState<TokenDomain>::start(prompt, std::move(initial), raw, stats);
  state.trace.reserve(chain_config.steps);

  FrequencyTable visits;
  std::size_t accepted = 0;
  while (state.step < chain_config.steps) {
    mh_step<TokenDomain>(model, reward, state, chain_config, rng);
    if (state.step > burn_in) {
      visits.add(state.current);
      accepted += state.trace.back().accepted ? 1 : 0;
    }
  }
  return {visits.distribution(), steps,
          static_cast<double>(accepted) / static_cast<double>(steps)};
}

std::vector<OracleCheckRow> oracle_check(const ToyLm& model,
                                         const RewardBackend<TokenDomain>& reward,
                                         const Standardizer& standardizer,
                                         std::span<const double> beta_grid,
                                         const DecodeConfig& config,
                                         std::size_t burn_in, std::size_t chain_steps) {
  const TokenSeq prompt;
  const auto prior = model.enumerate(prompt, config);
  const AdvantageStats stats(standardizer, 1);
  std::vector<OracleCheckRow> rows;
  for (std::size_t i = 0; i < beta_grid.size(); ++i) {
    const auto tilt = make_tilt(beta_grid[i], standardizer, reward, prompt);
    const auto target = exact_posterior(prior, tilt);
    OracleCheckRow row;
    row.beta = beta_grid[i];
    row.z = target.z;
    row.expected_score = expected_score(target.distribution, tilt);
    row.kl_to_prior = kl(target.distribution, prior);
    row.tv_chain = std::numeric_limits<double>::quiet_NaN();
    row.acceptance_rate = std::numeric_limits<double>::quiet_NaN();
    if (chain_steps > 0) {
      DecodeConfig chain_config = config;
      chain_config.beta = beta_grid[i];
      chain_config.seed = derive_seed(config.seed, i);
      const auto chain = run_stationarity_chain(model, reward, prompt, stats, chain_config,
                                                burn_in, chain_steps);
      row.tv_chain = tv_distance(chain.empirical, target.distribution);
      row.chain_length = chain.chain_length;
      row.acceptance_rate = chain.acceptance_rate;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string render_oracle_csv(std::span<const OracleCheckRow> rows) {
  auto num = [](double v) {
    if (std::isnan(v)) return std::string{};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  std::string out =
      "beta,z_beta,expected_score,kl_to_prior,tv_chain,chain_length,acceptance_rate\n";
  for (const auto& r : rows) {
    out += num(r.beta) + ',' + num(r.z) + ',' + num(r.expected_score) + ',' +
           num(r.kl_to_prior) + ',' + num(r.tv_chain) + ',' + std::to_string(r.chain_length) +
           ',' + num(r.acceptance_rate) + '\n';
  }
  return out;
}

}  // namespace ebd
