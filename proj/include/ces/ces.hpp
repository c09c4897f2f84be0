#pragma once

#include "ces/agglomerative.hpp"
#include "ces/assignment.hpp"
#include "ces/cail.hpp"
#include "ces/clusterers.hpp"
#include "ces/consensus.hpp"
#include "ces/diversity.hpp"
#include "ces/error.hpp"
#include "ces/harness.hpp"
#include "ces/independency.hpp"
#include "ces/rng.hpp"
#include "ces/types.hpp"
