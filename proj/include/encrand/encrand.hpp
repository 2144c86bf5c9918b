// Umbrella header for the encrand simulator and analysis library.

#pragma once

#include "encrand/block.hpp"
#include "encrand/bus.hpp"
#include "encrand/config.hpp"
#include "encrand/digest.hpp"
#include "encrand/dissemination.hpp"
#include "encrand/errors.hpp"
#include "encrand/harness.hpp"
#include "encrand/mask_pool.hpp"
#include "encrand/packet.hpp"
#include "encrand/rng.hpp"
#include "encrand/threat.hpp"
#include "encrand/transcript.hpp"
#include "encrand/ttp.hpp"
