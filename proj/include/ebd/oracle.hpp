#pragma once

// Exact ground truth for the reward-tilted target on enumerable spaces.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ebd/decode_config.hpp"
#include "ebd/reward.hpp"
#include "ebd/seq_distribution.hpp"
#include "ebd/toy_lm.hpp"

namespace ebd {

// Tilt exp(beta * S(y)) with S the fixed standardization of a reward.
struct TiltSpec {
  double beta = 0.0;
  Standardizer standardizer;
  std::function<double(const TokenSeq&)> raw_reward;

  double score(const TokenSeq& y) const {
    return standardizer.apply(raw_reward(y));
  }
};

// Wraps a token reward backend scored against `prompt`.
TiltSpec make_tilt(double beta, const Standardizer& standardizer,
                   const RewardBackend<TokenDomain>& reward,
                   TokenSeq prompt = {});

struct Posterior {
  SeqDistribution distribution;
  double log_z = 0.0;  // log Z_beta = log E_prior[exp(beta S)]
  double z = 0.0;
};

// pi(y) = prior(y) exp(beta S(y)) / Z, accumulated with log-sum-exp.
// Throws InputDomainError on an empty prior or a non-finite score.
Posterior exact_posterior(const SeqDistribution& prior, const TiltSpec& tilt);

// -log prior(y) - beta S(y); +inf when y is outside the prior's support.
double energy(const SeqDistribution& prior, const TiltSpec& tilt,
              const TokenSeq& y);

// KL(q || p) in nats with 0 log 0 = 0. Throws InputDomainError when q puts
// mass outside the support of p.
double kl(const SeqDistribution& q, const SeqDistribution& p);

// Expected standardized score under q.
double expected_score(const SeqDistribution& q, const TiltSpec& tilt);
// Expected raw reward under q.
double expected_reward(const SeqDistribution& q, const TiltSpec& tilt);

struct ObjectiveValue {
  double value = 0.0;
  // True when beta == 0 and the value comes from the limit convention
  // (E_q[S] if q == prior, -inf otherwise).
  bool limit_convention = false;
};

// E_q[S] - KL(q || prior) / beta.
ObjectiveValue objective(const SeqDistribution& q, const SeqDistribution& prior,
                         const TiltSpec& tilt);

SeqDistribution empirical_distribution(std::span<const TokenSeq> samples);

// Half the L1 distance over the union of supports.
double tv_distance(const SeqDistribution& a, const SeqDistribution& b);

// Mean and population std (floored) of the raw reward under a distribution.
Standardizer prior_standardizer(const SeqDistribution& prior,
                                const RewardBackend<TokenDomain>& reward,
                                const TokenSeq& prompt = {});

struct StationarityRun {
  SeqDistribution empirical;
  std::size_t chain_length = 0;
  double acceptance_rate = 0.0;
};

// Runs one refinement chain with fixed standardization for burn_in + steps
// transitions, starting from a prior sample, and tabulates the states
// visited after burn-in.
StationarityRun run_stationarity_chain(const ToyLm& model,
                                       const RewardBackend<TokenDomain>& reward,
                                       const TokenSeq& prompt,
                                       const AdvantageStats& stats,
                                       const DecodeConfig& config,
                                       std::size_t burn_in, std::size_t steps);

struct OracleCheckRow {
  double beta = 0.0;
  double z = 0.0;
  double expected_score = 0.0;
  double kl_to_prior = 0.0;
  double tv_chain = 0.0;  // NaN when no chain was run
  std::size_t chain_length = 0;
  double acceptance_rate = 0.0;  // NaN when no chain was run
};

// For each beta: exact target, its normalizer, expected score and KL to the
// prior, plus TV between a stationarity chain and the exact target when
// chain_steps > 0. Chain seeds are derive_seed(config.seed, grid index).
std::vector<OracleCheckRow> oracle_check(const ToyLm& model,
                                         const RewardBackend<TokenDomain>& reward,
                                         const Standardizer& standardizer,
                                         std::span<const double> beta_grid,
                                         const DecodeConfig& config,
                                         std::size_t burn_in, std::size_t chain_steps);

// Header: beta,z_beta,expected_score,kl_to_prior,tv_chain,chain_length,
// acceptance_rate
std::string render_oracle_csv(std::span<const OracleCheckRow> rows);

}  // namespace ebd
