#pragma once

// Umbrella header: watermark embedding by multi-sample selection, keyed
// scoring, calibrated detection, attack simulation and fidelity metrics
// for tabular data.

#include "muse/attacks.hpp"
#include "muse/calibration.hpp"
#include "muse/canonical.hpp"
#include "muse/csv.hpp"
#include "muse/detect.hpp"
#include "muse/embed.hpp"
#include "muse/errors.hpp"
#include "muse/hmac_sha256.hpp"
#include "muse/metrics.hpp"
#include "muse/rng.hpp"
#include "muse/sampler.hpp"
#include "muse/scoring.hpp"
#include "muse/selection.hpp"
#include "muse/table.hpp"
