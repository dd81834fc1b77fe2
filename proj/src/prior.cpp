#include "ebnm/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "ebnm/error.hpp"

namespace ebnm {

namespace {

struct FamilyNames {
  Family family;
  std::string_view canonical;
  std::string_view cli;
};

constexpr FamilyNames kFamilyNames[] = {
    {Family::normal, "normal", "normal"},
    {Family::point_normal, "point_normal", "point-normal"},
    {Family::point_laplace, "point_laplace", "point-laplace"},
    {Family::point_exponential, "point_exponential", "point-exponential"},
    {Family::normal_scale_mixture, "normal_scale_mixture", "smn"},
    {Family::unimodal_symmetric, "unimodal_symmetric", "symm-u"},
    {Family::unimodal, "unimodal", "unimodal"},
    {Family::unimodal_nonnegative, "unimodal_nonnegative", "unimodal-nn"},
    {Family::unimodal_nonpositive, "unimodal_nonpositive", "unimodal-np"},
    {Family::npmle, "npmle", "npmle"},
};

const FamilyNames& names_of(Family f) {
  for (const auto& n : kFamilyNames)
    if (n.family == f) return n;
  throw std::logic_error("unknown family");
}

MixtureKind kind_of(const Component& c) {
  if (std::holds_alternative<PointMass>(c)) return MixtureKind::point_mass;
  if (std::holds_alternative<NormalComponent>(c)) return MixtureKind::zero_mean_normal;
  if (std::holds_alternative<UniformComponent>(c)) return MixtureKind::uniform;
  throw DataError("slab components cannot appear in a finite mixture prior");
}

// Sort key: location for point masses, (variance, mean) for normals,
// (width, lower) for uniforms, so a zero-width spike comes first.
std::pair<double, double> sort_key(const Component& c) {
  if (const auto* p = std::get_if<PointMass>(&c)) return {p->location, 0.0};
  if (const auto* n = std::get_if<NormalComponent>(&c)) return {n->variance, n->mean};
  const auto& u = std::get<UniformComponent>(c);
  return {u.upper - u.lower, u.lower};
}

using ojson = nlohmann::ordered_json;

ojson component_json(const Component& c) {
  ojson j;
  if (const auto* p = std::get_if<PointMass>(&c)) {
    j["location"] = p->location;
  } else if (const auto* n = std::get_if<NormalComponent>(&c)) {
    j["mean"] = n->mean;
    j["variance"] = n->variance;
  } else {
    const auto& u = std::get<UniformComponent>(c);
    j["lower"] = u.lower;
    j["upper"] = u.upper;
  }
  return j;
}

Component component_from_json(MixtureKind kind, const ojson& j) {
  switch (kind) {
    case MixtureKind::point_mass:
      return PointMass{j.at("location").get<double>()};
    case MixtureKind::zero_mean_normal:
      return NormalComponent{j.at("mean").get<double>(), j.at("variance").get<double>()};
    case MixtureKind::uniform:
      return UniformComponent{j.at("lower").get<double>(), j.at("upper").get<double>()};
  }
  throw DataError("unknown mixture kind");
}

}  // namespace

std::string_view to_string(Family f) { return names_of(f).canonical; }
std::string_view cli_name(Family f) { return names_of(f).cli; }

std::optional<Family> parse_family(std::string_view name) {
  for (const auto& n : kFamilyNames)
    if (n.canonical == name || n.cli == name) return n.family;
  return std::nullopt;
}

bool is_parametric(Family f) {
  switch (f) {
    case Family::normal:
    case Family::point_normal:
    case Family::point_laplace:
    case Family::point_exponential:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(MixtureKind k) {
  switch (k) {
    case MixtureKind::point_mass: return "point_mass";
    case MixtureKind::zero_mean_normal: return "zero_mean_normal";
    case MixtureKind::uniform: return "uniform";
  }
  return "?";
}

std::optional<MixtureKind> parse_mixture_kind(std::string_view name) {
  for (auto k : {MixtureKind::point_mass, MixtureKind::zero_mean_normal, MixtureKind::uniform})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

MixturePrior make_mixture(MixtureKind kind, std::vector<Component> components,
                          std::vector<double> weights) {
  if (components.empty()) throw DataError("mixture prior needs at least one component");
  if (weights.size() != components.size())
    throw DataError("mixture weights and components differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (kind_of(components[k]) != kind) throw DataError("mixture component of the wrong kind");
    if (!(weights[k] >= 0.0)) throw DataError("negative mixture weight");
    if (const auto* u = std::get_if<UniformComponent>(&components[k]); u && !(u->lower <= u->upper))
      throw DataError("uniform component with lower > upper");
    if (const auto* n = std::get_if<NormalComponent>(&components[k]); n && !(n->variance >= 0.0))
      throw DataError("normal component with negative variance");
    total += weights[k];
  }
  if (std::fabs(total - 1.0) > 1e-12) throw DataError("mixture weights do not sum to one");

  std::vector<std::size_t> order(components.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sort_key(components[a]) < sort_key(components[b]);
  });
  MixturePrior out{kind, {}, {}};
  out.components.reserve(order.size());
  out.weights.reserve(order.size());
  for (auto k : order) {
    out.components.push_back(components[k]);
    out.weights.push_back(weights[k]);
  }
  return out;
}

ParametricPrior make_parametric(double mu, double pi0, double scale) {
  if (!std::isfinite(mu)) throw DataError("non-finite prior mode");
  if (!(pi0 >= 0.0 && pi0 <= 1.0)) throw DataError("pi0 outside [0, 1]");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw DataError("negative or non-finite prior scale");
  if (pi0 == 1.0 || scale == 0.0) return {mu, 1.0, 0.0};
  return {mu, pi0, scale};
}

std::vector<WeightedComponent> expand(const FittedPrior& g) {
  std::vector<WeightedComponent> out;
  if (const auto* m = std::get_if<MixturePrior>(&g.prior)) {
    for (std::size_t k = 0; k < m->size(); ++k)
      if (m->weights[k] > 0.0) out.push_back({m->weights[k], m->components[k]});
    return out;
  }
  const auto& p = std::get<ParametricPrior>(g.prior);
  if (p.is_point_mass()) return {{1.0, PointMass{p.mu}}};
  if (p.pi0 > 0.0) out.push_back({p.pi0, PointMass{p.mu}});
  const double w = 1.0 - p.pi0;
  switch (g.family) {
    case Family::normal:
    case Family::point_normal:
      out.push_back({w, NormalComponent{p.mu, p.scale}});
      break;
    case Family::point_laplace:
      out.push_back({w, LaplaceSlab{p.mu, p.scale}});
      break;
    case Family::point_exponential:
      out.push_back({w, ExponentialSlab{p.mu, p.scale}});
      break;
    default:
      throw DataError("parametric record under a nonparametric family");
  }
  return out;
}

std::string to_json(const FittedPrior& g, int indent) {
  ojson j;
  j["family"] = std::string(to_string(g.family));
  if (const auto* p = std::get_if<ParametricPrior>(&g.prior)) {
    j["type"] = "parametric";
    ojson body;
    body["mu"] = p->mu;
    body["pi0"] = p->pi0;
    body["scale"] = p->scale;
    j["parametric"] = std::move(body);
  } else {
    const auto& m = std::get<MixturePrior>(g.prior);
    j["type"] = "mixture";
    ojson body;
    body["kind"] = std::string(to_string(m.kind));
    ojson comps = ojson::array();
    for (const auto& c : m.components) comps.push_back(component_json(c));
    body["components"] = std::move(comps);
    body["weights"] = m.weights;
    j["mixture"] = std::move(body);
  }
  return j.dump(indent);
}

FittedPrior fitted_prior_from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed prior JSON: ") + e.what());
  }
  try {
    const auto family = parse_family(j.at("family").get<std::string>());
    if (!family) throw DataError("unknown family in prior JSON");
    const auto type = j.at("type").get<std::string>();
    if (type == "parametric") {
      const auto& b = j.at("parametric");
      if (!is_parametric(*family)) throw DataError("parametric record for a nonparametric family");
      ParametricPrior p{b.at("mu").get<double>(), b.at("pi0").get<double>(),
                        b.at("scale").get<double>()};
      // Validate, but keep the record bit-for-bit.
      (void)make_parametric(p.mu, p.pi0, p.scale);
      return {*family, p};
    }
    if (type == "mixture") {
      const auto& b = j.at("mixture");
      const auto kind = parse_mixture_kind(b.at("kind").get<std::string>());
      if (!kind) throw DataError("unknown mixture kind in prior JSON");
      std::vector<Component> comps;
      for (const auto& c : b.at("components")) comps.push_back(component_from_json(*kind, c));
      auto weights = b.at("weights").get<std::vector<double>>();
      return {*family, make_mixture(*kind, std::move(comps), std::move(weights))};
    }
    throw DataError("prior JSON type must be parametric or mixture");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("prior JSON schema violation: ") + e.what());
  }
}

}  // namespace ebnm
