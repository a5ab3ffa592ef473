#pragma once

#include "fedload/advisor.hpp"
#include "fedload/analytics.hpp"
#include "fedload/emit.hpp"
#include "fedload/entity.hpp"
#include "fedload/errors.hpp"
#include "fedload/event_sim.hpp"
#include "fedload/ingest.hpp"
#include "fedload/load_model.hpp"
#include "fedload/mechanism.hpp"
#include "fedload/rational.hpp"
#include "fedload/structure.hpp"
#include "fedload/synth_gen.hpp"

namespace fedload {
inline constexpr const char* kVersion = "1.0.0";
}
