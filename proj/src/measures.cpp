#include "manistats/measures.hpp"

#include "manistats/quadrature.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace manistats {

using nlohmann::json;

namespace {

double bessel_i0(double c) { return std::cyl_bessel_i(0.0, c); }

// Normalizing constant of the vMF density on S^{p-1} (ambient dimension p).
double vmf_constant(int p, double c) {
  const double nu = 0.5 * p - 1.0;
  return std::pow(c, nu) / (std::pow(kTwoPi, 0.5 * p) * std::cyl_bessel_i(nu, c));
}

double circle_factor_density(const CircleFactor& f, double x) {
  const double uni = 1.0 / kTwoPi;
  if (f.concentration <= 1e-12 || f.uniform_weight >= 1.0) return uni;
  const double vm = std::exp(f.concentration * std::cos(x - f.center)) /
                    (kTwoPi * bessel_i0(f.concentration));
  return (1.0 - f.uniform_weight) * vm + f.uniform_weight * uni;
}

// Best-Fisher rejection sampler for the von Mises distribution.
double sample_von_mises(double center, double c, RngStream& rng) {
  if (c <= 1e-8) return wrap_angle(rng.uniform(-kPi, kPi));
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * c * c);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * c);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double z = std::cos(kPi * rng.uniform01());
    const double f = (1.0 + r * z) / (r + z);
    const double w = c * (r - f);
    const double u = rng.uniform01();
    if (w * (2.0 - w) - u > 0.0 || std::log(w / u) + 1.0 - w >= 0.0) {
      const double sgn = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      return wrap_angle(center + sgn * std::acos(std::min(1.0, std::max(-1.0, f))));
    }
  }
}

double sample_circle_factor(const CircleFactor& f, RngStream& rng) {
  if (f.uniform_weight >= 1.0 || f.concentration <= 1e-12)
    return wrap_angle(rng.uniform(-kPi, kPi));
  if (f.uniform_weight > 0.0 && rng.uniform01() < f.uniform_weight)
    return wrap_angle(rng.uniform(-kPi, kPi));
  return sample_von_mises(f.center, f.concentration, rng);
}

Vec uniform_unit_vector(int n, RngStream& rng) {
  Vec v(n);
  double norm2;
  do {
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    norm2 = v.squaredNorm();
  } while (norm2 < 1e-24);
  return v / std::sqrt(norm2);
}

// Ulrich-Wood sampler for the vMF distribution on S^{p-1} in R^p.
Vec sample_vmf(const Vec& mu, double c, RngStream& rng) {
  const int p = static_cast<int>(mu.size());
  if (c <= 1e-8) return uniform_unit_vector(p, rng);
  const double pm1 = p - 1.0;
  const double b = (-2.0 * c + std::sqrt(4.0 * c * c + pm1 * pm1)) / pm1;
  const double x0 = (1.0 - b) / (1.0 + b);
  const double logconst = c * x0 + pm1 * std::log(1.0 - x0 * x0);
  double w;
  for (;;) {
    const double z = rng.beta(0.5 * pm1, 0.5 * pm1);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform01();
    if (c * w + pm1 * std::log(1.0 - x0 * w) - logconst >= std::log(u)) break;
  }
  const Vec v = uniform_unit_vector(p - 1, rng);
  const Mat frame = frame_at(ManifoldPoint{ManifoldKind::sphere(p - 1), mu});
  return std::sqrt(std::max(0.0, 1.0 - w * w)) * (frame * v) + w * mu;
}

}  // namespace

DensityModel DensityModel::circle(const CircleFactor& f) {
  DensityModel m;
  m.kind_ = ManifoldKind::circle();
  m.variant_ = Variant::CircleMixture;
  m.factors_ = {f};
  if (f.uniform_weight < 1.0 && f.concentration > 0.0)
    m.declared_mean_ = make_point(m.kind_, Vec::Constant(1, f.center));
  m.check_normalization();
  return m;
}

DensityModel DensityModel::torus_product(std::vector<CircleFactor> factors) {
  if (factors.empty()) throw Error("torus product needs at least one factor");
  DensityModel m;
  m.kind_ = ManifoldKind::torus(static_cast<int>(factors.size()));
  m.variant_ = Variant::TorusProduct;
  m.factors_ = std::move(factors);
  bool has_mean = true;
  Vec mean(m.factors_.size());
  for (std::size_t i = 0; i < m.factors_.size(); ++i) {
    const auto& f = m.factors_[i];
    if (f.uniform_weight >= 1.0 || f.concentration <= 0.0) has_mean = false;
    mean[static_cast<Eigen::Index>(i)] = f.center;
  }
  if (has_mean) m.declared_mean_ = make_point(m.kind_, mean);
  m.check_normalization();
  return m;
}

DensityModel DensityModel::sphere_vmf(int d, Vec center, double concentration,
                                      double uniform_weight) {
  if (d < 2) throw Error("sphere_vmf: use the circle kind for S^1");
  DensityModel m;
  m.kind_ = ManifoldKind::sphere(d);
  m.variant_ = Variant::SphereVmfMixture;
  ManifoldPoint c = make_point(m.kind_, std::move(center));
  m.center_ = c.coords;
  m.concentration_ = concentration;
  m.uniform_weight_ = uniform_weight;
  if (uniform_weight < 1.0 && concentration > 0.0) m.declared_mean_ = c;
  m.check_normalization();
  return m;
}

DensityModel DensityModel::rp2_projected_vmf(Vec center, double concentration,
                                             double uniform_weight) {
  DensityModel m;
  m.kind_ = ManifoldKind::projective_plane();
  m.variant_ = Variant::Rp2ProjectedVmf;
  ManifoldPoint c = make_point(m.kind_, std::move(center));
  m.center_ = c.coords;
  m.concentration_ = concentration;
  m.uniform_weight_ = uniform_weight;
  if (uniform_weight < 1.0 && concentration > 0.0) m.declared_mean_ = c;
  m.check_normalization();
  return m;
}

double DensityModel::sphere_vmf_density(const Vec& x) const {
  const int p = static_cast<int>(x.size());
  const double uni = 1.0 / kind_.volume();
  if (concentration_ <= 1e-12 || uniform_weight_ >= 1.0) return uni;
  const double vmf =
      vmf_constant(p, concentration_) * std::exp(concentration_ * center_.dot(x));
  return (1.0 - uniform_weight_) * vmf + uniform_weight_ * uni;
}

double DensityModel::density(const ManifoldPoint& x) const {
  require_same_kind(kind_, x.kind, "density_eval");
  switch (variant_) {
    case Variant::CircleMixture:
      return circle_factor_density(factors_[0], x.coords[0]);
    case Variant::TorusProduct: {
      double p = 1.0;
      for (std::size_t i = 0; i < factors_.size(); ++i)
        p *= circle_factor_density(factors_[i], x.coords[static_cast<Eigen::Index>(i)]);
      return p;
    }
    case Variant::SphereVmfMixture:
      return sphere_vmf_density(x.coords);
    case Variant::Rp2ProjectedVmf: {
      const double uni = 1.0 / kind_.volume();  // vol(RP^2) = 2 pi
      if (concentration_ <= 1e-12 || uniform_weight_ >= 1.0) return uni;
      const double t = center_.dot(x.coords);
      const double vmf = vmf_constant(3, concentration_) *
                         (std::exp(concentration_ * t) + std::exp(-concentration_ * t));
      return (1.0 - uniform_weight_) * vmf + uniform_weight_ * uni;
    }
  }
  throw Error("density: unsupported variant");
}

ManifoldPoint DensityModel::sample_one(RngStream& rng) const {
  switch (variant_) {
    case Variant::CircleMixture:
      return {kind_, Vec::Constant(1, sample_circle_factor(factors_[0], rng))};
    case Variant::TorusProduct: {
      Vec c(kind_.dim());
      for (std::size_t i = 0; i < factors_.size(); ++i)
        c[static_cast<Eigen::Index>(i)] = sample_circle_factor(factors_[i], rng);
      return {kind_, std::move(c)};
    }
    case Variant::SphereVmfMixture: {
      const int p = kind_.coord_size();
      if (uniform_weight_ >= 1.0 || concentration_ <= 1e-12)
        return {kind_, uniform_unit_vector(p, rng)};
      if (uniform_weight_ > 0.0 && rng.uniform01() < uniform_weight_)
        return {kind_, uniform_unit_vector(p, rng)};
      return {kind_, sample_vmf(center_, concentration_, rng)};
    }
    case Variant::Rp2ProjectedVmf: {
      Vec v;
      if (uniform_weight_ >= 1.0 || concentration_ <= 1e-12)
        v = uniform_unit_vector(3, rng);
      else if (uniform_weight_ > 0.0 && rng.uniform01() < uniform_weight_)
        v = uniform_unit_vector(3, rng);
      else
        v = sample_vmf(center_, concentration_, rng);
      return make_point(kind_, std::move(v));
    }
  }
  throw Error("sample: unsupported variant");
}

std::vector<std::function<double(const Vec&)>> DensityModel::cut_density_trace(
    const CutStructure& cut) const {
  require_same_kind(kind_, cut.kind, "cut_density_trace");
  std::vector<std::function<double(const Vec&)>> trace;
  trace.reserve(cut.charts.size());
  for (const auto& chart : cut.charts) {
    // capture the chart map by value so the trace outlives the structure
    auto point_fn = chart.point;
    trace.push_back([this, point_fn](const Vec& t) { return density(point_fn(t)); });
  }
  return trace;
}

void DensityModel::check_normalization(double tol, int nodes_per_dim) const {
  const ManifoldPoint center =
      declared_mean_ ? *declared_mean_
                     : make_point(kind_, [&] {
                         Vec c = Vec::Zero(kind_.coord_size());
                         if (!kind_.angular()) c[0] = 1.0;
                         return c;
                       }());
  const ManifoldRule rule = manifold_rule(center, nodes_per_dim);
  const double total = integrate(rule, [this](const ManifoldPoint& p) { return density(p); });
  if (std::abs(total - 1.0) > tol)
    throw NumericalInconsistency("density does not integrate to 1: got " +
                                 std::to_string(total));
}

SampleSet sample_stream(const DensityModel& model, std::size_t n, std::uint64_t seed,
                        std::uint64_t stream) {
  if (n < 1) throw Error("sample: n must be at least 1");
  RngStream rng(seed, stream);
  SampleSet s;
  s.kind = model.kind();
  s.seed = seed;
  s.generator_id = RngStream::kGeneratorId;
  s.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.points.push_back(model.sample_one(rng));
  return s;
}

SampleSet sample(const DensityModel& model, std::size_t n, std::uint64_t seed) {
  return sample_stream(model, n, seed, 0);
}

double density_eval(const DensityModel& model, const ManifoldPoint& x) {
  return model.density(x);
}

void SampleSet::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "# manistats-samples v1\n";
  out << "# kind: " << kind.name() << "\n";
  out << "# seed: " << seed << "\n";
  out << "# generator: " << generator_id << "\n";
  out << std::setprecision(17);
  for (const auto& p : points) {
    for (Eigen::Index i = 0; i < p.coords.size(); ++i) {
      if (i) out << ",";
      out << p.coords[i];
    }
    out << "\n";
  }
}

SampleSet SampleSet::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  SampleSet s;
  bool have_kind = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      if (key.find("kind") != std::string::npos) {
        s.kind = ManifoldKind::parse(value);
        have_kind = true;
      } else if (key.find("seed") != std::string::npos) {
        s.seed = std::stoull(value);
      } else if (key.find("generator") != std::string::npos) {
        s.generator_id = value;
      }
      continue;
    }
    if (!have_kind) throw Error("sample CSV is missing the kind header");
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    Vec c = Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    // 17 significant digits round-trip exactly; avoid renormalization drift
    ManifoldPoint p{s.kind, std::move(c)};
    try {
      validate_point(p);
    } catch (const Error&) {
      p = make_point(s.kind, std::move(p.coords));
    }
    s.points.push_back(std::move(p));
  }
  if (!have_kind) throw Error("sample CSV is missing the kind header");
  return s;
}

namespace {

CircleFactor circle_factor_from_json(const json& j) {
  CircleFactor f;
  f.center = j.value("center", 0.0);
  f.concentration = j.value("concentration", 0.0);
  f.uniform_weight = j.value("uniform_weight", 0.0);
  return f;
}

json circle_factor_to_json(const CircleFactor& f) {
  return json{{"center", f.center},
              {"concentration", f.concentration},
              {"uniform_weight", f.uniform_weight}};
}

}  // namespace

DensityModel DensityModel::from_json(const std::string& text) {
  const json j = json::parse(text);
  const ManifoldKind kind = ManifoldKind::parse(j.at("manifold").get<std::string>());
  const json& dens = j.at("density");
  const std::string variant = dens.at("variant").get<std::string>();
  const json params = dens.value("params", json::object());

  if (variant == "von_mises_mixture") {
    if (kind.family != ManifoldFamily::Circle)
      throw KindMismatch("von_mises_mixture requires the circle");
    return circle(circle_factor_from_json(params));
  }
  if (variant == "product") {
    if (kind.family != ManifoldFamily::Torus)
      throw KindMismatch("product densities require a torus");
    std::vector<CircleFactor> fs;
    for (const auto& f : params.at("factors")) fs.push_back(circle_factor_from_json(f));
    if (static_cast<int>(fs.size()) != kind.dim())
      throw Error("product density factor count does not match torus dimension");
    return torus_product(std::move(fs));
  }
  if (variant == "vmf_mixture") {
    if (kind.family != ManifoldFamily::Sphere)
      throw KindMismatch("vmf_mixture requires a sphere");
    const auto c = params.at("center").get<std::vector<double>>();
    Vec center = Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
    return sphere_vmf(kind.dim(), std::move(center), params.value("concentration", 0.0),
                      params.value("uniform_weight", 0.0));
  }
  if (variant == "projected_vmf_mixture") {
    if (kind.family != ManifoldFamily::ProjectivePlane)
      throw KindMismatch("projected_vmf_mixture requires rp2");
    const auto c = params.at("center").get<std::vector<double>>();
    Vec center = Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
    return rp2_projected_vmf(std::move(center), params.value("concentration", 0.0),
                             params.value("uniform_weight", 0.0));
  }
  throw Error("unknown density variant: " + variant);
}

std::string DensityModel::to_json() const {
  json j;
  j["manifold"] = kind_.name();
  json dens;
  switch (variant_) {
    case Variant::CircleMixture:
      dens["variant"] = "von_mises_mixture";
      dens["params"] = circle_factor_to_json(factors_[0]);
      break;
    case Variant::TorusProduct: {
      dens["variant"] = "product";
      json fs = json::array();
      for (const auto& f : factors_) fs.push_back(circle_factor_to_json(f));
      dens["params"] = json{{"factors", fs}};
      break;
    }
    case Variant::SphereVmfMixture:
    case Variant::Rp2ProjectedVmf: {
      dens["variant"] = variant_ == Variant::SphereVmfMixture ? "vmf_mixture"
                                                              : "projected_vmf_mixture";
      dens["params"] =
          json{{"center", std::vector<double>(center_.data(), center_.data() + center_.size())},
               {"concentration", concentration_},
               {"uniform_weight", uniform_weight_}};
      break;
    }
  }
  j["density"] = dens;
  return j.dump();
}

}  // namespace manistats
