#include "ocp/regions.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ocp/multiplicity.hpp"

namespace ocp {

const char* to_string(RegionKind kind) {
  return kind == RegionKind::interval ? "interval" : "set";
}

RegionKind region_kind_from_string(std::string_view s) {
  if (s == "interval") return RegionKind::interval;
  if (s == "set") return RegionKind::set;
  throw std::invalid_argument("unknown region kind: " + std::string(s));
}

bool PredictionRegion::contains(int label) const {
  return std::binary_search(labels.begin(), labels.end(), label);
}

PredictionRegion ordinal_prediction_interval(const PValueVector& p, double alpha) {
  const AcceptanceSet a1 = procedure1_accept(p, alpha);
  const AcceptanceSet a2 = procedure2_accept(p, alpha);
  PredictionRegion region{RegionKind::interval, p.mode, alpha, {}};
  // A1 is a suffix and A2 a prefix, so the intersection is {y_min..y_max}.
  std::set_intersection(a1.accepted.begin(), a1.accepted.end(), a2.accepted.begin(),
                        a2.accepted.end(), std::back_inserter(region.labels));
  return region;
}

PredictionRegion ordinal_prediction_set(const PValueVector& p, double alpha) {
  AcceptanceSet a3 = procedure3_accept(p, alpha);
  return PredictionRegion{RegionKind::set, p.mode, alpha, std::move(a3.accepted)};
}

nlohmann::json region_to_json(const PredictionRegion& region) {
  return nlohmann::json{{"labels", region.labels},
                        {"kind", to_string(region.kind)},
                        {"mode", to_string(region.mode)},
                        {"alpha", region.alpha}};
}

PredictionRegion region_from_json(const nlohmann::json& j) {
  PredictionRegion region;
  region.kind = region_kind_from_string(j.at("kind").get<std::string>());
  region.mode = pvalue_mode_from_string(j.at("mode").get<std::string>());
  region.alpha = j.at("alpha").get<double>();
  region.labels = j.at("labels").get<std::vector<int>>();
  if (!std::is_sorted(region.labels.begin(), region.labels.end()))
    throw std::invalid_argument("region labels must be ascending");
  return region;
}

}  // namespace ocp
