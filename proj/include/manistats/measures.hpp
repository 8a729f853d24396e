#pragma once

#include "manistats/geometry.hpp"
#include "manistats/rng.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace manistats {

// Parameters of one circle factor: von Mises(center, concentration) mixed
// with the uniform density at weight uniform_weight.
struct CircleFactor {
  double center = 0.0;
  double concentration = 1.0;
  double uniform_weight = 0.0;
};

// A probability density psi on one of the supported manifolds, with an exact
// sampler and (when the density is symmetric and unimodal by construction) a
// declared population Frechet mean. All shipped variants are smooth, so psi
// is continuous near the cut locus.
class DensityModel {
public:
  // Circle: von Mises-uniform mixture.
  static DensityModel circle(const CircleFactor& f);
  // Torus(d): product of d circle factors.
  static DensityModel torus_product(std::vector<CircleFactor> factors);
  // Sphere(d), d in {2,3}: von Mises-Fisher mixed with the uniform density.
  static DensityModel sphere_vmf(int d, Vec center, double concentration,
                                 double uniform_weight);
  // RP^2: antipodally symmetrized vMF-uniform mixture pushed to the quotient.
  static DensityModel rp2_projected_vmf(Vec center, double concentration,
                                        double uniform_weight);

  static DensityModel from_json(const std::string& text);
  std::string to_json() const;

  const ManifoldKind& kind() const { return kind_; }
  const std::optional<ManifoldPoint>& declared_mean() const { return declared_mean_; }

  double density(const ManifoldPoint& x) const;
  ManifoldPoint sample_one(RngStream& rng) const;

  // Density restricted to the charts of a cut structure, as functions of the
  // chart parameters. Empty structure yields an empty trace.
  std::vector<std::function<double(const Vec&)>> cut_density_trace(
      const CutStructure& cut) const;

  // Verifies that the density integrates to 1 within tol (quadrature).
  void check_normalization(double tol = 1e-6, int nodes_per_dim = 64) const;

private:
  enum class Variant { CircleMixture, TorusProduct, SphereVmfMixture, Rp2ProjectedVmf };

  ManifoldKind kind_ = ManifoldKind::circle();
  Variant variant_ = Variant::CircleMixture;
  std::vector<CircleFactor> factors_;  // circle/torus
  Vec center_;                         // sphere/rp2 ambient center
  double concentration_ = 0.0;
  double uniform_weight_ = 1.0;
  std::optional<ManifoldPoint> declared_mean_;

  double sphere_vmf_density(const Vec& x) const;
};

// A reproducible i.i.d. sample. Regeneration from (seed, generator id, n) is
// bit-identical.
struct SampleSet {
  ManifoldKind kind;
  std::vector<ManifoldPoint> points;
  std::uint64_t seed = 0;
  std::string generator_id;

  std::size_t size() const { return points.size(); }

  void save_csv(const std::string& path) const;
  static SampleSet load_csv(const std::string& path);
};

SampleSet sample(const DensityModel& model, std::size_t n, std::uint64_t seed);

// One draw stream per (seed, stream index); used for parallel replicates.
SampleSet sample_stream(const DensityModel& model, std::size_t n, std::uint64_t seed,
                        std::uint64_t stream);

double density_eval(const DensityModel& model, const ManifoldPoint& x);

}  // namespace manistats
