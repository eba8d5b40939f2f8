#pragma once

#include <json.hpp>

#include "kroneig/kernels.hpp"

namespace kroneig {

/// {kind, gamma2, length_scale, alpha, spectral_p, l_max, spline_h,
/// spline_level, metric}; Product adds nested "spatial" and "temporal".
nlohmann::json kernel_to_json(const KernelSpec& spec);

/// Missing optional fields take their defaults. Throws ConfigError on
/// unknown kinds, wrong types, or values that fail validate().
KernelSpec kernel_from_json(const nlohmann::json& j);

}  // namespace kroneig
