// Command-line front end: builds and certifies approximations, writing JSON
// certificates. Exit status: 0 certified pass, 2 certified failure, 1 usage or
// data error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance/criteria.hpp"
#include "sofic/json.hpp"
#include "sofic/sofic.hpp"

namespace {

using sofic::Element;
using sofic::GroupContext;
using sofic::Json;
using sofic::Rational;

constexpr int kPass = 0;
constexpr int kUsage = 1;
constexpr int kFail = 2;

struct Common {
  std::string out;
  std::string map_out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "write the JSON document to this path instead of stdout");
}

void emit(const Json& doc, const Common& c) {
  const std::string text = doc.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw sofic::ParseError("cannot write '" + c.out + "'");
  f << text;
}

void emit_map(const sofic::ApproximationMap& a, const Common& c) {
  if (c.map_out.empty()) return;
  std::ofstream f(c.map_out, std::ios::binary);
  if (!f) throw sofic::ParseError("cannot write '" + c.map_out + "'");
  f << sofic::approximation_json(a).dump(2) << "\n";
}

/// K from a literal list; an empty list means every element of a finite group.
std::vector<Element> parse_k(const sofic::Group& g, const std::string& text) {
  if (sofic::detail::trim(text).empty()) {
    if (!g.finite()) throw sofic::ParseError("--k is required for infinite " + g.spec());
    return g.elements();
  }
  return sofic::parse_elements(g, text);
}

/// Extension from group specs and a rule for p: mod-n, proj-1, proj-2, or
/// images:<Q literals in E order> (with --N kernel to take N = ker p).
sofic::ExtensionDescriptor parse_extension(const std::string& n_spec, const std::string& e_spec,
                                           const std::string& q_spec, const std::string& rule,
                                           const std::string& incl) {
  auto e = sofic::make_group(e_spec);
  auto q = sofic::make_group(q_spec);
  const bool kernel = sofic::detail::trim(n_spec) == "kernel";
  if (rule.starts_with("images:")) {
    auto p_images = sofic::parse_elements(*q, rule.substr(7));
    if (kernel) return sofic::map_extension(e, q, p_images);
    auto n = sofic::make_group(n_spec);
    if (!incl.starts_with("images:")) throw sofic::ParseError("a tabulated p needs --incl images:<E literals>");
    return sofic::map_extension(e, q, p_images, n, sofic::parse_elements(*e, incl.substr(7)));
  }
  if (kernel) throw sofic::ParseError("--N kernel is only available with --p images:...");
  auto n = sofic::make_group(n_spec);
  if (rule.starts_with("mod-")) {
    return sofic::mod_extension(n, e, q, sofic::detail::parse_size(rule.substr(4), "modulus"));
  }
  if (rule == "proj-1") return sofic::projection_extension(n, e, q, 1);
  if (rule == "proj-2") return sofic::projection_extension(n, e, q, 2);
  throw sofic::ParseError("unknown projection rule '" + rule + "' (mod-n, proj-1, proj-2, images:...)");
}

Json extension_specs(const sofic::ExtensionDescriptor& ext) {
  return Json{{"N", ext.n->spec()}, {"E", ext.e->spec()}, {"Q", ext.q->spec()}, {"p", ext.description}};
}

int verdict(bool pass) { return pass ? kPass : kFail; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite metric approximations of groups with exact certificates"};
  app.require_subcommand(1);
  Common common;

  std::string group, k_text, eps_text, candidate;
  std::string g_spec, h_spec, theta = "regular";
  std::string n_spec, e_spec, q_spec, p_rule, incl, elements_text, map_file;
  std::uint64_t cap = sofic::kDefaultPointCap;
  std::uint64_t dim_cap = sofic::kDefaultDimensionCap;
  std::uint64_t seed = sofic::acceptance::kDefaultSeed;

  auto* folner = app.add_subcommand("folner", "search or verify a symmetric Følner set");
  folner->add_option("--group", group, "group spec")->required();
  folner->add_option("--k", k_text, "finite subset K, comma separated")->required();
  folner->add_option("--eps", eps_text, "tolerance p/q")->required();
  folner->add_option("--candidate", candidate, "verify this set instead of searching");
  add_common(folner, common);

  auto* amenable = app.add_subcommand("approx-amenable", "Følner-set approximation of Z or Z^d");
  auto* finite = app.add_subcommand("approx-finite", "regular representation of a finite group");
  for (auto* cmd : {amenable, finite}) {
    cmd->add_option("--group", group, "group spec")->required();
    cmd->add_option("--k", k_text, "finite subset K (default: the whole finite group)");
    cmd->add_option("--eps", eps_text, "tolerance p/q")->required();
    cmd->add_option("--map-out", common.map_out, "also write the approximation map");
    add_common(cmd, common);
  }

  auto* wreath = app.add_subcommand("wreath-approx", "approximation of the unrestricted wreath product G wr wr H");
  auto* hyper = app.add_subcommand("hyperlinear-approx", "unitary approximation of G wr wr H");
  for (auto* cmd : {wreath, hyper}) {
    cmd->add_option("--G", g_spec, "coordinate group spec")->required();
    cmd->add_option("--H", h_spec, "acting group spec")->required();
    cmd->add_option("--k", k_text, "finite subset K of wreath literals (default: all, when finite)");
    cmd->add_option("--eps", eps_text, "tolerance p/q")->required();
    add_common(cmd, common);
  }
  wreath->add_option("--cap", cap, "maximum |C|");
  wreath->add_option("--map-out", common.map_out, "also write the approximation map");
  hyper->add_option("--theta", theta, "regular or character")->check(CLI::IsMember({"regular", "character"}));
  hyper->add_option("--dim-cap", dim_cap, "maximum matrix dimension");

  auto* kk = app.add_subcommand("kk-embed", "Kaloujnine-Krasner embedding of an extension");
  auto* ext_cmd = app.add_subcommand("extension-approx", "approximation of an extension through its embedding");
  for (auto* cmd : {kk, ext_cmd}) {
    cmd->add_option("--N", n_spec, "kernel group spec, or 'kernel' with --p images:...")->required();
    cmd->add_option("--E", e_spec, "extension group spec")->required();
    cmd->add_option("--Q", q_spec, "quotient group spec")->required();
    cmd->add_option("--p", p_rule, "projection: mod-n, proj-1, proj-2, images:<list>")->required();
    cmd->add_option("--incl", incl, "inclusion N -> E as images:<list>");
    add_common(cmd, common);
  }
  kk->add_option("--elements", elements_text, "elements of E to embed (default: all, when finite)");
  ext_cmd->add_option("--k", k_text, "finite subset K of E (default: all, when finite)");
  ext_cmd->add_option("--eps", eps_text, "tolerance p/q")->required();
  ext_cmd->add_option("--cap", cap, "maximum |C|");
  ext_cmd->add_option("--map-out", common.map_out, "also write the approximation map");

  auto* cert_cmd = app.add_subcommand("certify", "certify an approximation map read from JSON");
  cert_cmd->add_option("--map", map_file, "approximation map file")->required();
  cert_cmd->add_option("--eps", eps_text, "tolerance p/q")->required();
  add_common(cert_cmd, common);

  auto* selftest = app.add_subcommand("selftest", "run the acceptance criteria");
  selftest->add_option("--seed", seed, "seed for the randomized criteria");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*selftest) {
      const auto results = sofic::acceptance::run_all(std::cout, seed);
      bool all = true;
      for (const auto& r : results) all = all && r.pass;
      return verdict(all);
    }

    const Rational eps = eps_text.empty() ? Rational(0) : sofic::parse_rational(eps_text);

    if (*folner) {
      auto g = sofic::make_group(group);
      auto k = sofic::parse_elements(*g, k_text);
      Json doc{{"kind", "folner"}, {"group_specs", Json{{"group", g->spec()}}}, {"K", sofic::elements_json(*g, k)},
               {"epsilon", sofic::rational_json(eps)}};
      bool pass = true;
      if (candidate.empty()) {
        doc["result"] = sofic::folner_json(*g, sofic::folner_search(*g, k, eps));
      } else {
        auto v = sofic::folner_verify(sofic::parse_elements(*g, candidate), k, eps, *g);
        pass = v.ok();
        doc["result"] = sofic::folner_json(*g, v.set);
        doc["failure"] = v.failure == sofic::FolnerFailure::none       ? "none"
                         : v.failure == sofic::FolnerFailure::asymmetric ? "asymmetric"
                                                                         : "ratio";
        doc["witness"] = v.witness ? Json(g->format(*v.witness)) : Json(nullptr);
      }
      doc["pass"] = pass;
      doc["versions"] = sofic::versions_json();
      emit(doc, common);
      return verdict(pass);
    }

    if (*amenable || *finite) {
      auto g = sofic::make_group(group);
      auto k = parse_k(*g, k_text);
      auto approx = *finite ? sofic::build_finite_regular(g, k)
                            : sofic::build_amenable(g, sofic::folner_search(*g, k, eps), k);
      auto cert = sofic::certify(approx, eps);
      sofic::CertificateParts parts;
      parts.kind = *finite ? "sofic-finite" : "sofic-amenable";
      parts.group_specs = Json{{"group", g->spec()}};
      parts.provenance = sofic::provenance_json(*g, approx.provenance());
      emit(sofic::certificate_json(*g, cert, approx.points(), parts), common);
      emit_map(approx, common);
      return verdict(cert.pass());
    }

    if (*wreath) {
      auto w = std::make_shared<const sofic::WreathGroup>(sofic::make_group(g_spec), sofic::make_group(h_spec));
      auto k = parse_k(*w, k_text);
      sofic::WreathBuildOptions options;
      options.point_cap = cap;
      auto r = sofic::approximate_wreath(*w, k, eps, options);
      const auto& wc = r.certificate;
      sofic::CertificateParts parts;
      parts.kind = "sofic-wreath";
      parts.group_specs = Json{{"G", w->inner()->spec()}, {"H", w->acting()->spec()}, {"wreath", w->spec()}};
      parts.budget = wc.budget;
      parts.predicted = wc.predicted;
      parts.extra_measured = Json{
          {"separation_top_differs", wc.cases.top_differs ? sofic::rational_json(*wc.cases.top_differs) : Json(nullptr)},
          {"separation_top_equal", wc.cases.top_equal ? sofic::rational_json(*wc.cases.top_equal) : Json(nullptr)},
          {"bounds_hold", wc.bounds_hold}};
      parts.provenance = Json{{"B", sofic::elements_json(*w->acting(), r.build.codec.b())},
                              {"A_size", r.build.codec.a_size()},
                              {"separating_set", sofic::elements_json(*w->acting(), r.build.separating)},
                              {"K_H", sofic::elements_json(*w->acting(), r.build.k_h)},
                              {"K_G", sofic::elements_json(*w->inner(), r.build.k_g)},
                              {"folner", sofic::provenance_json(*w->acting(), r.approx_h.provenance())["folner"]},
                              {"good_sets", Json{{"B", r.approx_h.provenance().good_set->size()},
                                                 {"A", r.approx_g.provenance().good_set->size()}}}};
      emit(sofic::certificate_json(*w, wc.certificate, r.build.map.points(), parts), common);
      emit_map(r.build.map, common);
      return verdict(wc.certificate.pass());
    }

    if (*hyper) {
      auto w = std::make_shared<const sofic::WreathGroup>(sofic::make_group(g_spec), sofic::make_group(h_spec));
      auto k = parse_k(*w, k_text);
      sofic::HyperlinearBuildOptions options;
      options.dimension_cap = dim_cap;
      auto kind = theta == "character" ? sofic::ThetaKind::character : sofic::ThetaKind::regular;
      auto r = sofic::approximate_hyperlinear_wreath(*w, k, eps, kind, options);
      sofic::CertificateParts parts;
      parts.kind = "hyperlinear-wreath";
      parts.group_specs = Json{{"G", w->inner()->spec()}, {"H", w->acting()->spec()}, {"wreath", w->spec()}};
      parts.budget = r.budget;
      parts.provenance = Json{{"theta_G", r.theta_g.builder()},
                              {"n", r.theta_g.dimension()},
                              {"B", sofic::elements_json(*w->acting(), r.build.codec.b())},
                              {"separating_set", sofic::elements_json(*w->acting(), r.build.separating)},
                              {"K_G", sofic::elements_json(*w->inner(), r.build.k_g)},
                              {"folner", sofic::provenance_json(*w->acting(), r.approx_h.provenance())["folner"]},
                              {"good_sets", Json{{"B", r.approx_h.provenance().good_set->size()}}}};
      emit(sofic::hs_certificate_json(*w, r.certificate, parts, r.predicted), common);
      return verdict(r.certificate.pass());
    }

    if (*kk) {
      auto ext = parse_extension(n_spec, e_spec, q_spec, p_rule, incl);
      auto violation = sofic::find_extension_violation(ext);
      if (violation) throw sofic::GroupError("invalid extension data: " + *violation);
      auto section = sofic::choose_section(ext);
      sofic::WreathGroup w(ext.n, ext.q);
      auto elements = parse_k(*ext.e, elements_text);
      Json images = Json::array();
      for (const auto& x : elements) {
        images.push_back(Json{{"element", ext.e->format(x)}, {"image", w.format(sofic::kk_embed(ext, section, w, x))}});
      }
      Json section_json = nullptr;
      if (section.tabulated()) {
        section_json = Json::array();
        for (const auto& [q, s] : section.table()) {
          section_json.push_back(Json::array({ext.q->format(q), ext.e->format(s)}));
        }
      }
      bool homomorphism = true;
      std::size_t checked = 0;
      if (ext.e->finite() && ext.q->finite()) {
        const auto all = ext.e->elements();
        std::vector<Element> emb;
        for (const auto& x : all) emb.push_back(sofic::kk_embed(ext, section, w, x));
        for (std::size_t i = 0; i < all.size(); ++i) {
          for (std::size_t j = 0; j < all.size(); ++j) {
            const auto ij = sofic::detail::index_of(all, ext.e->multiply(all[i], all[j]));
            homomorphism = homomorphism && emb[ij] == w.multiply(emb[i], emb[j]) && (i == j || !(emb[i] == emb[j]));
            ++checked;
          }
        }
      }
      Json doc{{"kind", "kk-embed"},
               {"group_specs", extension_specs(ext)},
               {"wreath", w.spec()},
               {"section", section_json},
               {"images", images},
               {"checked_products", checked},
               {"pass", homomorphism},
               {"versions", sofic::versions_json()}};
      emit(doc, common);
      return verdict(homomorphism);
    }

    if (*ext_cmd) {
      auto ext = parse_extension(n_spec, e_spec, q_spec, p_rule, incl);
      auto k = parse_k(*ext.e, k_text);
      sofic::ExtensionOptions options;
      options.point_cap = cap;
      auto r = sofic::extension_approx(ext, k, eps, options);
      sofic::CertificateParts parts;
      parts.kind = "sofic-extension";
      parts.group_specs = extension_specs(ext);
      parts.group_specs["wreath"] = r.wreath->spec();
      parts.budget = r.budget;
      parts.predicted = r.predicted;
      Json embedded = Json::array();
      for (std::size_t i = 0; i < r.images.size(); ++i) {
        embedded.push_back(Json::array({ext.e->format(r.map.k()[i]), r.wreath->format(r.images[i])}));
      }
      parts.provenance = Json{{"embedding", embedded},
                              {"B", sofic::elements_json(*ext.q, r.codec.b())},
                              {"A_size", r.codec.a_size()},
                              {"separating_set", sofic::elements_json(*ext.q, r.separating)},
                              {"K_G", sofic::elements_json(*ext.n, r.k_g)},
                              {"folner", sofic::provenance_json(*ext.q, r.approx_q.provenance())["folner"]},
                              {"good_sets", Json{{"B", r.approx_q.provenance().good_set->size()},
                                                 {"A", r.approx_n.provenance().good_set->size()}}}};
      emit(sofic::certificate_json(*ext.e, r.certificate, r.map.points(), parts), common);
      emit_map(r.map, common);
      return verdict(r.certificate.pass());
    }

    if (*cert_cmd) {
      std::ifstream in(map_file);
      if (!in) throw sofic::ParseError("cannot open '" + map_file + "'");
      Json j;
      try {
        j = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw sofic::ParseError(std::string("malformed JSON in '") + map_file + "': " + e.what());
      }
      auto approx = sofic::approximation_from_json(j);
      auto cert = sofic::certify(approx, eps);
      sofic::CertificateParts parts;
      parts.kind = "certify";
      parts.group_specs = Json{{"group", approx.source()->spec()}};
      parts.provenance = Json{{"map", map_file}};
      emit(sofic::certificate_json(*approx.source(), cert, approx.points(), parts), common);
      return verdict(cert.pass());
    }
  } catch (const sofic::StageError& e) {
    std::cerr << "error in stage " << e.stage() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
