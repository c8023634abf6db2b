#pragma once

#include "scdm/channel.hpp"
#include "scdm/constellation.hpp"
#include "scdm/dsc_codec.hpp"
#include "scdm/errors.hpp"
#include "scdm/experiment.hpp"
#include "scdm/metrics.hpp"
#include "scdm/mlp.hpp"
#include "scdm/pc_sampler.hpp"
#include "scdm/rng.hpp"
#include "scdm/score_field.hpp"
#include "scdm/score_net.hpp"
#include "scdm/score_oracle.hpp"
