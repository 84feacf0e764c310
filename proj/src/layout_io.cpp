// Copyright 2026 The opokit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "opo/config.hpp"

namespace opo {

namespace {

constexpr std::string_view kLayoutKeys[] = {"format",          "wavelength_nm", "reference_plane",
                                            "elements",        "mirror_distance",
                                            "output_coupler",  "d_mm",          "substrate_index"};
constexpr std::string_view kElementKeys[] = {"kind", "length_mm", "roc_mm", "aoi_deg", "index", "label"};

double deg(double v) { return v * M_PI / 180.0; }

template <typename T>
T field(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("layout field '") + key + "' has the wrong type");
  }
}

ElementKind parse_kind(const std::string& s) {
  for (ElementKind k : {ElementKind::free_space, ElementKind::curved_mirror, ElementKind::flat_mirror,
                        ElementKind::dielectric_slab})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown element kind '" + s + "'");
}

void reject_unknown(const nlohmann::json& j, std::span<const std::string_view> known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

}  // namespace

CavityLayout parse_layout(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("layout must be a JSON object");
  reject_unknown(j, kLayoutKeys, "layout");
  if (!j.contains("elements") || !j.at("elements").is_array())
    throw ConfigError("layout needs an 'elements' array");

  CavityLayout layout;
  layout.wavelength_vacuum = field(j, "wavelength_nm", 860.0) * 1e-9;
  layout.reference_plane = field<std::string>(j, "reference_plane", "element 0 entry");
  for (const auto& e : j.at("elements")) {
    reject_unknown(e, kElementKeys, "layout element");
    OpticalElement el;
    el.kind = parse_kind(field<std::string>(e, "kind", ""));
    el.length = field(e, "length_mm", 0.0) * 1e-3;
    el.radius_of_curvature = field(e, "roc_mm", 0.0) * 1e-3;
    el.angle_of_incidence = deg(field(e, "aoi_deg", 0.0));
    el.refractive_index = field(e, "index", 1.0);
    el.label = field<std::string>(e, "label", "");
    layout.elements.push_back(el);
  }
  if (j.contains("mirror_distance")) {
    const auto& d = j.at("mirror_distance");
    layout.distance = DistanceParameter{field<std::vector<std::size_t>>(d, "span", {}),
                                        field<std::vector<std::size_t>>(d, "adjustable", {})};
  }
  if (j.contains("output_coupler")) {
    const auto& oc = j.at("output_coupler");
    layout.output_coupler =
        OutputCoupler{field<std::size_t>(oc, "element", 0), field(oc, "substrate_index", 1.45)};
  }
  if (j.contains("substrate_index")) {
    if (!layout.output_coupler) throw ConfigError("substrate_index given without an output_coupler");
    layout.output_coupler->substrate_index = field(j, "substrate_index", 1.45);
  }
  try {
    layout.validate();
    if (j.contains("d_mm")) layout = layout.with_mirror_distance(field(j, "d_mm", 0.0) * 1e-3);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid layout: ") + e.what());
  }
  return layout;
}

CavityLayout load_layout(const std::filesystem::path& path, Overrides& overrides) {
  nlohmann::json j = read_json_file(path);
  overrides.apply(j, kLayoutKeys);
  return parse_layout(j);
}

nlohmann::json layout_to_json(const CavityLayout& layout) {
  nlohmann::json j;
  j["format"] = "opokit-layout/1";
  j["wavelength_nm"] = layout.wavelength_vacuum * 1e9;
  j["reference_plane"] = layout.reference_plane;
  j["elements"] = nlohmann::json::array();
  for (const auto& e : layout.elements) {
    nlohmann::json je{{"kind", std::string(to_string(e.kind))}};
    if (!e.label.empty()) je["label"] = e.label;
    switch (e.kind) {
      case ElementKind::free_space:
        je["length_mm"] = e.length * 1e3;
        break;
      case ElementKind::dielectric_slab:
        je["length_mm"] = e.length * 1e3;
        je["index"] = e.refractive_index;
        break;
      case ElementKind::curved_mirror:
        je["roc_mm"] = e.radius_of_curvature * 1e3;
        je["aoi_deg"] = e.angle_of_incidence * 180.0 / M_PI;
        break;
      case ElementKind::flat_mirror:
        je["aoi_deg"] = e.angle_of_incidence * 180.0 / M_PI;
        break;
    }
    j["elements"].push_back(je);
  }
  if (layout.distance)
    j["mirror_distance"] = {{"span", layout.distance->span}, {"adjustable", layout.distance->adjustable}};
  if (layout.output_coupler)
    j["output_coupler"] = {{"element", layout.output_coupler->element},
                           {"substrate_index", layout.output_coupler->substrate_index}};
  return j;
}

}  // namespace opo
