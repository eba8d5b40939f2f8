#include "kroneig/kernel_json.hpp"

#include <string>

#include "kroneig/error.hpp"

namespace kroneig {

nlohmann::json kernel_to_json(const KernelSpec& spec) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(spec.kind));
    j["gamma2"] = spec.gamma2;
    j["length_scale"] = spec.length_scale ? nlohmann::json(*spec.length_scale) : nlohmann::json(nullptr);
    j["alpha"] = spec.alpha;
    j["spectral_p"] = spec.spectral_p;
    j["l_max"] = spec.l_max;
    j["spline_h"] = spec.spline_h;
    j["spline_level"] = spec.spline_level;
    j["metric"] = std::string(to_string(spec.metric));
    if (spec.kind == KernelKind::Product) {
        if (spec.spatial_factor) j["spatial"] = kernel_to_json(*spec.spatial_factor);
        if (spec.temporal_factor) j["temporal"] = kernel_to_json(*spec.temporal_factor);
    }
    return j;
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("kernel spec must be a JSON object");
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("kernel spec needs a string 'kind'");
    KernelSpec spec;
    try {
        spec.kind = parse_kernel_kind(j["kind"].get<std::string>());
        spec.gamma2 = j.value("gamma2", 1.0);
        if (j.contains("length_scale") && !j["length_scale"].is_null()) spec.length_scale = j["length_scale"].get<double>();
        spec.alpha = j.value("alpha", spec.alpha);
        spec.spectral_p = j.value("spectral_p", spec.spectral_p);
        spec.l_max = j.value("l_max", spec.l_max);
        spec.spline_h = j.value("spline_h", spec.spline_h);
        spec.spline_level = j.value("spline_level", spec.spline_level);
        if (j.contains("metric")) spec.metric = parse_metric(j["metric"].get<std::string>());
        if (spec.kind == KernelKind::Product) {
            if (!j.contains("spatial") || !j.contains("temporal")) {
                throw ConfigError("Product kernel needs 'spatial' and 'temporal' members");
            }
            spec.spatial_factor = std::make_shared<const KernelSpec>(kernel_from_json(j["spatial"]));
            spec.temporal_factor = std::make_shared<const KernelSpec>(kernel_from_json(j["temporal"]));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad kernel spec: ") + e.what());
    }
    validate(spec);
    return spec;
}

}  // namespace kroneig
