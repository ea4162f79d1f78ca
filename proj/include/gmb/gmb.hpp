#pragma once

#include "gmb/core/error.hpp"
#include "gmb/core/probability.hpp"
#include "gmb/core/random.hpp"
#include "gmb/core/types.hpp"

#include "gmb/envs/bernoulli.hpp"
#include "gmb/envs/delay_buffer.hpp"
#include "gmb/envs/environment.hpp"
#include "gmb/envs/neural_env.hpp"

#include "gmb/baselines/baselines.hpp"

#include "gmb/gm/marginalization.hpp"

#include "gmb/neural/adam.hpp"
#include "gmb/neural/cvae.hpp"
#include "gmb/neural/data.hpp"
#include "gmb/neural/dense_net.hpp"
#include "gmb/neural/layers.hpp"
#include "gmb/neural/value_model.hpp"

#include "gmb/rcp/condition_rewards.hpp"
#include "gmb/rcp/counting.hpp"
#include "gmb/rcp/cvae_rcp.hpp"

#include "gmb/harness/config.hpp"
#include "gmb/harness/export.hpp"
#include "gmb/harness/illustrate.hpp"
#include "gmb/harness/policies.hpp"
#include "gmb/harness/runner.hpp"
#include "gmb/harness/selftest.hpp"
#include "gmb/harness/presets.hpp"
