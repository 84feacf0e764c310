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

#ifndef OPO_GAUSSIAN_CAVITY_HPP
#define OPO_GAUSSIAN_CAVITY_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "opo/errors.hpp"

namespace opo {

enum class TransversePlane { tangential, sagittal };

inline constexpr std::array<TransversePlane, 2> kTransversePlanes = {
    TransversePlane::tangential, TransversePlane::sagittal};

std::string_view to_string(TransversePlane plane);

/// 2x2 ray-transfer matrix acting on (position, reduced angle).
template <typename Scalar>
using RayMatrix = Eigen::Matrix<Scalar, 2, 2>;

enum class ElementKind { free_space, curved_mirror, flat_mirror, dielectric_slab };

std::string_view to_string(ElementKind kind);

/// One element of a cavity round trip. Lengths in meters, angles in radians.
/// A curved mirror's radius is positive when the mirror is concave toward
/// the beam.
struct OpticalElement {
  ElementKind kind = ElementKind::free_space;
  double length = 0.0;
  double radius_of_curvature = 0.0;
  double angle_of_incidence = 0.0;
  double refractive_index = 1.0;
  std::string label;

  static OpticalElement free_space(double length, std::string label = {});
  static OpticalElement curved_mirror(double radius, double aoi, std::string label = {});
  static OpticalElement flat_mirror(double aoi, std::string label = {});
  static OpticalElement slab(double length, double index, std::string label = {});

  /// Throws InvalidArgument when a field violates its range.
  void validate() const;

  double geometric_length() const;
  double optical_length() const;
};

/// Effective focusing radius of an obliquely hit mirror: R cos(aoi) in the
/// tangential plane, R / cos(aoi) in the sagittal plane.
double effective_radius(const OpticalElement& mirror, TransversePlane plane);

template <typename Scalar = double>
RayMatrix<Scalar> element_matrix(const OpticalElement& element, TransversePlane plane,
                                 Scalar n_ambient = Scalar(1)) {
  element.validate();
  if (!(n_ambient >= Scalar(1))) throw InvalidArgument("ambient refractive index must be >= 1");
  RayMatrix<Scalar> m = RayMatrix<Scalar>::Identity();
  switch (element.kind) {
    case ElementKind::free_space:
      m(0, 1) = Scalar(element.length);
      break;
    case ElementKind::curved_mirror:
      m(1, 0) = Scalar(-2) / Scalar(effective_radius(element, plane));
      break;
    case ElementKind::flat_mirror:
      break;
    case ElementKind::dielectric_slab:
      // Reduced length: interface refractions cancel over the full pass.
      m(0, 1) = Scalar(element.length) * n_ambient / Scalar(element.refractive_index);
      break;
  }
  return m;
}

/// The ordered elements spanning the mirror distance `d`, and the subset
/// whose lengths absorb a change of `d` (split equally).
struct DistanceParameter {
  std::vector<std::size_t> span;
  std::vector<std::size_t> adjustable;
};

/// Output coupler whose plano-concave substrate lenses the extracted beam.
struct OutputCoupler {
  std::size_t element = 0;
  double substrate_index = 1.45;
};

/// Closed round trip starting and ending at the reference plane.
struct CavityLayout {
  std::vector<OpticalElement> elements;
  std::string reference_plane = "crystal center";
  double wavelength_vacuum = 860e-9;
  std::optional<DistanceParameter> distance;
  std::optional<OutputCoupler> output_coupler;

  void validate() const;
  double geometric_length() const;
  double optical_path_length() const;
  /// Index of the medium the reference plane sits in.
  double reference_index() const;

  double mirror_distance() const;
  CavityLayout with_mirror_distance(double d) const;
  /// Same loop, starting at element `first`.
  CavityLayout rotated(std::size_t first) const;
};

/// Triangular ring: two curved mirrors on the long edge with a centered
/// crystal, a flat fold mirror closing the two short edges.
struct TriangleRingDesign {
  double mirror_distance = 22.0e-3;
  double short_edge = 11.5e-3;
  double mirror_radius = 15.0e-3;
  double curved_aoi = 10.0 * M_PI / 180.0;
  double flat_aoi = 70.0 * M_PI / 180.0;
  double crystal_length = 10.0e-3;
  double crystal_index = 1.8;
  double wavelength = 860e-9;
  double substrate_index = 1.45;
};

CavityLayout triangle_ring_layout(const TriangleRingDesign& design = {});

template <typename Scalar = double>
RayMatrix<Scalar> roundtrip_matrix(const CavityLayout& layout, TransversePlane plane) {
  layout.validate();
  RayMatrix<Scalar> m = RayMatrix<Scalar>::Identity();
  for (const auto& e : layout.elements) m = element_matrix<Scalar>(e, plane) * m;
  return m;
}

/// Half trace (a + d) / 2 of a round-trip matrix. Throws InvalidArgument
/// if the determinant is not 1.
template <typename Scalar>
Scalar stability_parameter(const RayMatrix<Scalar>& m) {
  using std::abs;
  if (abs(m.determinant() - Scalar(1)) > Scalar(1e-9))
    throw InvalidArgument("ray matrix determinant is not 1; not a closed round trip");
  return (m(0, 0) + m(1, 1)) / Scalar(2);
}

template <typename Scalar>
bool is_stable(Scalar half_trace) {
  using std::abs;
  return abs(half_trace) < Scalar(1);
}

/// ABCD law for a (reduced) complex beam parameter.
template <typename Scalar>
std::complex<Scalar> transform_q(const RayMatrix<Scalar>& m, const std::complex<Scalar>& q) {
  return (m(0, 0) * q + m(0, 1)) / (m(1, 0) * q + m(1, 1));
}

/// Fundamental Gaussian beam along one transverse axis. `q` is the physical
/// beam parameter in the local medium; 1/q = 1/R - i lambda / (pi w^2).
struct AxisMode {
  std::complex<double> q;
  double wavelength_medium = 0.0;

  double waist_radius() const;
  /// Signed distance from this plane to the waist along propagation.
  double waist_offset() const;
  double beam_radius() const;
  /// Infinite for a plane wavefront.
  double wavefront_radius() const;
};

struct GaussianMode {
  AxisMode tangential;
  AxisMode sagittal;
  double wavelength_vacuum = 0.0;
  double refractive_index = 1.0;

  const AxisMode& axis(TransversePlane plane) const {
    return plane == TransversePlane::tangential ? tangential : sagittal;
  }
  AxisMode& axis(TransversePlane plane) {
    return plane == TransversePlane::tangential ? tangential : sagittal;
  }
  /// Ratio of tangential to sagittal waist radius.
  double ellipticity() const { return tangential.waist_radius() / sagittal.waist_radius(); }
};

class UnstableCavityError : public PhysicsError {
 public:
  UnstableCavityError(TransversePlane plane, double half_trace);
  TransversePlane plane() const { return plane_; }
  double half_trace() const { return half_trace_; }

 private:
  TransversePlane plane_;
  double half_trace_;
};

/// Self-consistent round-trip mode at the reference plane.
AxisMode eigenmode(const CavityLayout& layout, TransversePlane plane);
GaussianMode eigenmode(const CavityLayout& layout);

/// Carries a mode through `elements` (applied in order), ending in a medium
/// of index `n_out`.
GaussianMode propagate(const GaussianMode& mode, std::span<const OpticalElement> elements,
                       double n_out = 1.0);

/// Thin lens modeling transmission through the output coupler substrate:
/// f = -R_eff / (n_sub - 1) per plane (plano-concave, diverging).
RayMatrix<double> extraction_lens(const OpticalElement& mirror, double substrate_index,
                                  TransversePlane plane);

/// Eigenmode carried from the reference plane to the output coupler and
/// through its substrate lens. Requires `layout.output_coupler`.
GaussianMode output_mode(const CavityLayout& layout);

struct ScanPoint {
  double mirror_distance = 0.0;
  double half_trace = 0.0;
  std::optional<double> waist;  // absent when unstable
};

struct WaistScanRow {
  double mirror_distance = 0.0;
  std::optional<double> tangential;
  std::optional<double> sagittal;
};

/// Evenly spaced values from `lo` to `hi` inclusive (within step/1000).
std::vector<double> distance_grid(double lo, double hi, double step);

std::vector<ScanPoint> waist_scan(const CavityLayout& layout_template,
                                  std::span<const double> distances, TransversePlane plane);
std::vector<WaistScanRow> waist_scan(const CavityLayout& layout_template,
                                     std::span<const double> distances);

/// Distances (linearly interpolated) where the tangential and sagittal
/// curves cross between adjacent stable rows.
std::vector<double> waist_crossings(std::span<const WaistScanRow> rows);

/// Mirror distance at which the tangential and sagittal waists are equal,
/// resolved to `tolerance` meters.
double find_circular_waist_distance(const CavityLayout& layout_template, double d_lo,
                                    double d_hi, double tolerance = 1e-6);

/// Power coupling between two 1-D fundamental Gaussians at a common plane.
double mode_overlap(const AxisMode& a, const AxisMode& b);
/// Product of the per-axis couplings.
double mode_overlap(const GaussianMode& a, const GaussianMode& b);

struct CircularMatch {
  double efficiency = 0.0;
  AxisMode circular;
};

/// Best overlap with a circular Gaussian (waist size and location free).
CircularMatch best_circular_match(const GaussianMode& mode);

struct Linewidth {
  double f_hwhm = 0.0;
  double free_spectral_range = 0.0;
  double finesse = 0.0;
};

/// Cold-cavity linewidth from output-coupler transmissivity and round-trip
/// optical path length.
Linewidth linewidth(double transmissivity, double optical_path_length);

}  // namespace opo

#endif  // OPO_GAUSSIAN_CAVITY_HPP
