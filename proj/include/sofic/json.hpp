#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sofic/approximation.hpp"
#include "sofic/folner.hpp"
#include "sofic/group.hpp"
#include "sofic/group_spec.hpp"
#include "sofic/hyperlinear.hpp"
#include "sofic/rational.hpp"
#include "sofic/wreath_approx.hpp"

namespace sofic {

/// Insertion-ordered JSON, so serialized documents keep a stable key order.
using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kCertificateFormat = 1;

inline Json versions_json() { return Json{{"sofic", kVersion}, {"format", kCertificateFormat}}; }

inline Json rational_json(const Rational& q) { return to_string(q); }

inline Json elements_json(const Group& g, const std::vector<Element>& xs) {
  Json out = Json::array();
  for (const auto& x : xs) out.push_back(g.format(x));
  return out;
}

inline Json pair_json(const Group& g, const std::optional<std::pair<Element, Element>>& p) {
  if (!p) return nullptr;
  return Json::array({g.format(p->first), g.format(p->second)});
}

inline Json folner_json(const Group& g, const FolnerSet& f) {
  Json ratios = Json::array();
  for (const auto& r : f.ratios) {
    ratios.push_back(Json{{"s", g.format(r.s)}, {"outside", r.outside.str()}, {"ratio", rational_json(r.ratio)}});
  }
  return Json{{"size", f.size()},
              {"elements", elements_json(g, f.elements)},
              {"symmetric", f.symmetric},
              {"enlarged_size", f.enlarged.size()},
              {"epsilon", rational_json(f.epsilon)},
              {"epsilon_prime", rational_json(f.epsilon_prime)},
              {"worst_ratio", rational_json(f.worst_ratio())},
              {"ratios", ratios}};
}

inline Json budget_json(const EpsilonBudget& b) {
  return Json{{"eps_H", rational_json(b.eps_h)}, {"eps_G", rational_json(b.eps_g)}};
}

inline Json predicted_json(const PredictedBounds& p) {
  return Json{{"defect_bound", rational_json(p.defect_bound)},
              {"sep_bounds", Json{{"top_differs", rational_json(p.sep_top_differs)},
                                  {"top_equal", rational_json(p.sep_top_equal)}}}};
}

inline Json provenance_json(const Group& g, const Provenance& p) {
  Json out{{"builder", p.builder}, {"folner", nullptr}, {"good_sets", nullptr}};
  if (p.folner) out["folner"] = folner_json(g, *p.folner);
  if (p.good_set) out["good_sets"] = Json{{"size", p.good_set->size()}};
  return out;
}

/// Certificate document for a permutation approximation. Keys appear in a
/// fixed order; absent parts are null.
struct CertificateParts {
  std::string kind;
  Json group_specs = Json::object();
  std::optional<EpsilonBudget> budget;
  std::optional<PredictedBounds> predicted;
  Json extra_measured = Json::object();
  Json provenance = Json::object();
};

inline Json certificate_json(const Group& g, const Certificate& cert, const PointSet& points,
                             const CertificateParts& parts) {
  Json measured{{"defect", rational_json(cert.defect)},
                {"defect_pair", pair_json(g, cert.defect_pair)},
                {"separation", cert.separation ? rational_json(*cert.separation) : Json(nullptr)},
                {"separation_pair", pair_json(g, cert.separation_pair)}};
  for (const auto& [key, value] : parts.extra_measured.items()) measured[key] = value;
  Json witnesses = Json::array();
  for (const auto& w : cert.witnesses) {
    witnesses.push_back(Json{{"condition", w.condition},
                             {"pair", Json::array({g.format(w.first), g.format(w.second)})},
                             {"value", rational_json(w.value)}});
  }
  return Json{{"kind", parts.kind},
              {"group_specs", parts.group_specs},
              {"K", elements_json(g, cert.k)},
              {"epsilon", rational_json(cert.epsilon)},
              {"budget", parts.budget ? budget_json(*parts.budget) : Json(nullptr)},
              {"point_set", Json{{"name", points.name}, {"size", points.size}}},
              {"measured", measured},
              {"predicted", parts.predicted ? predicted_json(*parts.predicted) : Json(nullptr)},
              {"pass", cert.pass()},
              {"witnesses", witnesses},
              {"provenance", parts.provenance},
              {"versions", versions_json()}};
}

/// Doubles are written with 17 significant digits via the JSON library.
inline Json hs_certificate_json(const Group& g, const HsCertificate& cert, const CertificateParts& parts,
                                std::optional<double> predicted_value) {
  Json witnesses = Json::array();
  for (const auto& w : cert.witnesses) {
    witnesses.push_back(Json{{"condition", w.condition},
                             {"pair", Json::array({g.format(w.first), g.format(w.second)})},
                             {"value", w.value}});
  }
  Json predicted = nullptr;
  if (predicted_value) predicted = Json{{"defect_bound", *predicted_value}, {"sep_bounds", nullptr}};
  return Json{{"kind", parts.kind},
              {"group_specs", parts.group_specs},
              {"K", elements_json(g, cert.k)},
              {"epsilon", rational_json(cert.epsilon)},
              {"budget", parts.budget ? budget_json(*parts.budget) : Json(nullptr)},
              {"point_set", Json{{"name", "tensor"}, {"size", cert.dimension}}},
              {"measured", Json{{"defect", cert.defect},
                                {"defect_pair", pair_json(g, cert.defect_pair)},
                                {"separation", cert.separation ? Json(*cert.separation) : Json(nullptr)},
                                {"separation_pair", pair_json(g, cert.separation_pair)},
                                {"tolerance", kHsTolerance}}},
              {"predicted", predicted},
              {"pass", cert.pass()},
              {"witnesses", witnesses},
              {"provenance", parts.provenance},
              {"versions", versions_json()}};
}

/// {group, K, point_set, assignment: [{element, images}]} in canonical order.
inline Json approximation_json(const ApproximationMap& a) {
  const Group& g = *a.source();
  Json assignment = Json::array();
  for (const auto& [x, p] : a.assignment()) {
    assignment.push_back(Json{{"element", g.format(x)}, {"images", std::vector<Permutation::Point>(p.images().begin(), p.images().end())}});
  }
  return Json{{"group", g.spec()},
              {"K", elements_json(g, a.k())},
              {"point_set", Json{{"name", a.points().name}, {"size", a.points().size}}},
              {"assignment", assignment}};
}

inline ApproximationMap approximation_from_json(const Json& j) {
  try {
    auto g = make_group(j.at("group").get<std::string>());
    std::vector<Element> k;
    for (const auto& x : j.at("K")) k.push_back(g->parse_element(x.get<std::string>()));
    PointSet points{j.at("point_set").at("name").get<std::string>(), j.at("point_set").at("size").get<std::size_t>(), {}};
    ApproximationMap out(g, k, points);
    for (const auto& entry : j.at("assignment")) {
      auto images = entry.at("images").get<std::vector<Permutation::Point>>();
      out.assign(g->parse_element(entry.at("element").get<std::string>()), Permutation(std::move(images)));
    }
    out.provenance().builder = "file";
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed approximation file: ") + e.what());
  }
}

}  // namespace sofic
