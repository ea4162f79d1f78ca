#pragma once

namespace gmb::harness {

/// The 27-cell non-contextual grid: K x (alpha, beta) x N_b.
inline constexpr const char* kNonContextualGrid = R"(name = noncontextual
env = bernoulli
arms = 10 | 100 | 500
prior = 1/1 | 1/9 | 1/99
buffer = 100 | 500 | 1000
horizon = 5000
reps = 20
seed = 1
smoothing = 1
policies = random, egreedy(0.01), egreedy(0.05), egreedy(0.1), ucb1, ts(1/1), ts(1/9), ts(1/99), ts(env), rcp-optimistic, rcp-optimized, rcp-submax
)";

}  // namespace gmb::harness
