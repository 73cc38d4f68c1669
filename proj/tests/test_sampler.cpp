#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "ebd/error.hpp"
#include "ebd/oracle.hpp"
#include "ebd/sampler.hpp"
#include "ebd/toy_lm.hpp"
#include "support/fixtures.hpp"

using namespace ebd;
using ebd::test::CountingGenerator;
using ebd::test::CountingReward;
using ebd::test::data_path;

namespace {

DecodeConfig toy_config(double beta, std::size_t steps, std::size_t pool = 4) {
  DecodeConfig c;
  c.beta = beta;
  c.steps = steps;
  c.pool_size = pool;
  c.block_count = 12;
  return c;
}

}  // namespace

TEST_CASE("admissible cuts partition the response into near-equal blocks") {
  CHECK(admissible_cuts(12, 12) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  CHECK(admissible_cuts(10, 4) == std::vector<std::size_t>{0, 3, 6, 8});
  CHECK(admissible_cuts(0, 12) == std::vector<std::size_t>{0});
  CHECK(admissible_cuts(4, 12) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(admissible_cuts(5, 1) == std::vector<std::size_t>{0});
  for (std::size_t len = 0; len < 60; ++len) {
    for (std::size_t m = 1; m < 15; ++m) {
      const auto cuts = admissible_cuts(len, m);
      REQUIRE(cuts.size() == std::min(m, std::max<std::size_t>(len, 1)));
      CHECK(cuts.front() == 0);
      for (std::size_t i = 1; i < cuts.size(); ++i) {
        CHECK(cuts[i] > cuts[i - 1]);
        CHECK(cuts[i] < std::max<std::size_t>(len, 1));
      }
    }
  }
}

TEST_CASE("acceptance rule") {
  CHECK(acceptance_probability(0.3, 0.3, 3.5) == 1.0);
  CHECK(acceptance_probability(0.5, 0.1, 3.5) == 1.0);
  const double alpha = acceptance_probability(0.0, 0.2, 3.5);
  CHECK(std::abs(alpha - std::exp(-0.7)) <= 1e-12 * std::exp(-0.7));
  CHECK(alpha == doctest::Approx(0.4966).epsilon(1e-4));
  CHECK(acceptance_probability(-5.0, 5.0, 0.0) == 1.0);

  const double tiny = acceptance_probability(-0.1, 0.0, 1e6);
  CHECK(tiny < 1e-300);
  CHECK(log_acceptance(-0.1, 0.0, 1e6) == doctest::Approx(-1e5).epsilon(1e-12));
  // The smallest positive uniform still rejects.
  CHECK_FALSE(std::log(std::numeric_limits<double>::denorm_min()) <= log_acceptance(-0.1, 0.0, 1e6));
}

TEST_CASE("initialize with a single pool member is degenerate") {
  const ToyLm model(load_toy_model(data_path("uniform.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  Rng rng(1);
  const auto state = initialize<TokenDomain>(model, reward, {}, toy_config(3.5, 12, 1), rng);
  CHECK(state.stats().std() == kStdFloor);
  CHECK(state.advantage == 0.0);
  CHECK(state.step == 0);
  CHECK(state.calls == CallCounters{1, 1});
}

TEST_CASE("initialize starts from the best pool member") {
  const ToyLm model(load_toy_model(data_path("uniform.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto config = toy_config(3.5, 12, 6);
    Rng rng(seed), replay(seed);
    const auto state = initialize<TokenDomain>(model, reward, {}, config, rng);
    double best = -INFINITY;
    for (std::size_t i = 0; i < config.pool_size; ++i) {
      best = std::max(best, reward.score({}, model.sample_full({}, config, replay)).raw());
    }
    CHECK(state.raw_reward.raw() == best);
    CHECK(state.advantage == advantage(state.raw_reward, state.stats()));
  }
}

TEST_CASE("ties in the pool resolve to the lowest index") {
  const ToyLm model(load_toy_model(data_path("uniform.json")));
  const SyntheticTokenReward flat(TokenCountMatch{4});
  Rng rng(9), replay(9);
  const auto state = initialize<TokenDomain>(model, flat, {}, toy_config(1, 1), rng);
  CHECK(state.current == model.sample_full({}, {}, replay));
}

TEST_CASE("point mass model never moves") {
  const ToyLm model(ebd::test::point_mass_spec(4));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  for (double beta : {0.0, 3.5, 1e6}) {
    const auto result = run_ebd<TokenDomain>(model, reward, {}, toy_config(beta, 20));
    CHECK(result.output == TokenSeq{0, 0, 0, 0});
    CHECK(result.state.advantage == 0.0);
    for (const auto& t : result.state.trace) {
      CHECK(t.accepted);
      CHECK(t.alpha == 1.0);
    }
  }
}

TEST_CASE("proposals preserve the prefix before the cut") {
  const ToyLm model(load_toy_model(data_path("skewed.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  auto state = ChainState<TokenDomain>::start({}, {1, 2, 0, 2}, RewardScore(0.0),
                                              AdvantageStats(Standardizer(0, 1), 4));
  Rng rng(4);
  const auto config = toy_config(1, 200);
  for (int i = 0; i < 200; ++i) {
    const auto p = propose_at<TokenDomain>(model, state, 2, config, rng);
    CHECK(TokenSeq(p.full.begin(), p.full.begin() + 2) == TokenSeq{1, 2});
    CHECK(p.full.size() == 4);
    CHECK(TokenSeq(p.full.begin() + 2, p.full.end()) == p.suffix);
  }
  for (int i = 0; i < 200; ++i) {
    const TokenSeq before = state.current;
    mh_step<TokenDomain>(model, reward, state, config, rng);
    const auto cut = state.trace.back().cut;
    CHECK(TokenSeq(state.current.begin(), state.current.begin() + cut) ==
          TokenSeq(before.begin(), before.begin() + cut));
  }
}

TEST_CASE("chain invariants hold along a run") {
  const ToyLm model(load_toy_model(data_path("skewed.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  const auto config = toy_config(3.5, 40);
  Rng rng(12);
  auto state = initialize<TokenDomain>(model, reward, {}, config, rng);
  while (state.step < config.steps) {
    mh_step<TokenDomain>(model, reward, state, config, rng);
    CHECK(state.trace.size() == state.step);
    CHECK(state.advantage == advantage(state.raw_reward, state.stats()));
    CHECK(state.raw_reward == reward.score({}, state.current));
  }
  CHECK_THROWS_AS(mh_step<TokenDomain>(model, reward, state, config, rng), StateError);
  CHECK_THROWS_AS(state.freeze_stats(state.stats()), StateError);
}

TEST_CASE("large beta gives a monotone accepted trace") {
  const ToyLm model(load_toy_model(data_path("uniform.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto config = toy_config(1e6, 50);
    config.seed = seed;
    const auto result = run_ebd<TokenDomain>(model, reward, {}, config);
    double level = -INFINITY;
    for (const auto& t : result.state.trace) {
      if (!t.accepted) continue;
      CHECK(t.proposal_advantage >= level);
      level = t.proposal_advantage;
    }
  }
}

TEST_CASE("run cost is exactly pool_size + steps calls of each kind") {
  const ToyLm model(load_toy_model(data_path("skewed.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  for (std::size_t steps : {0, 1, 12, 30}) {
    CountingGenerator<TokenDomain> gen(model);
    CountingReward<TokenDomain> rew(reward);
    const auto result = run_ebd<TokenDomain>(gen, rew, {}, toy_config(3.5, steps));
    CHECK(gen.calls() == 4 + steps);
    CHECK(rew.calls() == 4 + steps);
    CHECK(result.state.calls == CallCounters{4 + steps, 4 + steps});
  }
}

TEST_CASE("K = 0 returns the warm start") {
  const ToyLm model(load_toy_model(data_path("skewed.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  const auto config = toy_config(3.5, 0);
  Rng rng(config.seed);
  const auto warm = initialize<TokenDomain>(model, reward, {}, config, rng);
  CHECK(run_ebd<TokenDomain>(model, reward, {}, config).output == warm.current);
}

TEST_CASE("a failing step leaves the chain untouched") {
  const ToyLm model(load_toy_model(data_path("skewed.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  const auto config = toy_config(3.5, 12);
  CountingGenerator<TokenDomain> gen(model, 6);
  Rng rng(2);
  auto state = initialize<TokenDomain>(gen, reward, {}, config, rng);
  mh_step<TokenDomain>(gen, reward, state, config, rng);
  const auto snapshot = state;
  try {
    mh_step<TokenDomain>(gen, reward, state, config, rng);
    FAIL("expected a step error");
  } catch (const StepError& e) {
    CHECK(e.step() == 1);
    CHECK_THROWS_WITH(std::rethrow_if_nested(e), "injected generator failure");
  }
  CHECK(state.current == snapshot.current);
  CHECK(state.step == snapshot.step);
  CHECK(state.trace == snapshot.trace);
  CHECK(state.calls == snapshot.calls);

  CountingReward<TokenDomain> rew(reward, 8);
  try {
    run_ebd<TokenDomain>(model, rew, {}, config);
    FAIL("expected a partial run");
  } catch (const PartialRunError<TokenDomain>& e) {
    CHECK(e.completed_steps() == 3);
    CHECK(e.last_state().trace.size() == 3);
  }
}

TEST_CASE("a failing pool reports its progress") {
  const ToyLm model(load_toy_model(data_path("skewed.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  CountingGenerator<TokenDomain> gen(model, 3);
  Rng rng(2);
  try {
    initialize<TokenDomain>(gen, reward, {}, toy_config(3.5, 12), rng);
    FAIL("expected an initialization error");
  } catch (const InitializationError& e) {
    CHECK(e.completed() == 2);
  }
}

TEST_CASE("beta = 0 recovers the prior after many steps") {
  const ToyLm model(load_toy_model(data_path("skewed.json")));
  const SyntheticTokenReward reward(load_reward_spec(data_path("reward_lookup.json")));
  auto config = toy_config(0.0, 30);
  std::vector<TokenSeq> finals;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    config.seed = derive_seed(77, i);
    finals.push_back(run_ebd<TokenDomain>(model, reward, {}, config).output);
  }
  CHECK(tv_distance(empirical_distribution(finals), model.enumerate({})) < 0.02);
}

TEST_CASE("prior and proposal densities cancel in the MH ratio") {
  for (const char* name : {"uniform.json", "skewed.json"}) {
    const ToyLm model(load_toy_model(data_path(name)));
    const DecodeConfig config = toy_config(1, 1);
    Rng rng(31);
    for (int i = 0; i < 10000; ++i) {
      const auto y = model.sample_full({}, config, rng);
      const auto cuts = admissible_cuts(y.size(), config.block_count);
      const auto c = cuts[rng.index(cuts.size())];
      const auto y2 = model.sample_suffix({}, TokenSeq(y.begin(), y.begin() + c), config, rng);
      const double forward = model.log_prob({}, y) - std::log(double(cuts.size())) +
                             model.conditional_log_prob({}, y2, c);
      const double backward = model.log_prob({}, y2) -
                              std::log(double(admissible_cuts(y2.size(), 12).size())) +
                              model.conditional_log_prob({}, y, c);
      CHECK(std::abs(backward - forward) <= 1e-9);
    }
  }
}
