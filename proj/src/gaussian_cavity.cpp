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

#include "opo/gaussian_cavity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace opo {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kGoldenRatio = 0.6180339887498949;

bool is_mirror(ElementKind kind) {
  return kind == ElementKind::curved_mirror || kind == ElementKind::flat_mirror;
}

// Golden-section maximization of a unimodal function on [lo, hi].
template <typename F>
std::pair<double, double> golden_maximize(F&& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double x1 = b - kGoldenRatio * (b - a);
  double x2 = a + kGoldenRatio * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGoldenRatio * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGoldenRatio * (b - a);
      f1 = f(x1);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

}  // namespace

std::string_view to_string(TransversePlane plane) {
  return plane == TransversePlane::tangential ? "tangential" : "sagittal";
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::free_space:
      return "free_space";
    case ElementKind::curved_mirror:
      return "curved_mirror";
    case ElementKind::flat_mirror:
      return "flat_mirror";
    case ElementKind::dielectric_slab:
      return "dielectric_slab";
  }
  return "unknown";
}

OpticalElement OpticalElement::free_space(double length, std::string label) {
  OpticalElement e;
  e.kind = ElementKind::free_space;
  e.length = length;
  e.label = std::move(label);
  return e;
}

OpticalElement OpticalElement::curved_mirror(double radius, double aoi, std::string label) {
  OpticalElement e;
  e.kind = ElementKind::curved_mirror;
  e.radius_of_curvature = radius;
  e.angle_of_incidence = aoi;
  e.label = std::move(label);
  return e;
}

OpticalElement OpticalElement::flat_mirror(double aoi, std::string label) {
  OpticalElement e;
  e.kind = ElementKind::flat_mirror;
  e.angle_of_incidence = aoi;
  e.label = std::move(label);
  return e;
}

OpticalElement OpticalElement::slab(double length, double index, std::string label) {
  OpticalElement e;
  e.kind = ElementKind::dielectric_slab;
  e.length = length;
  e.refractive_index = index;
  e.label = std::move(label);
  return e;
}

void OpticalElement::validate() const {
  if (!(length >= 0.0) || !std::isfinite(length))
    throw InvalidArgument("element length must be finite and >= 0");
  if (!(refractive_index >= 1.0) || !std::isfinite(refractive_index))
    throw InvalidArgument("refractive index must be >= 1");
  if (is_mirror(kind)) {
    if (!(angle_of_incidence >= 0.0 && angle_of_incidence < M_PI / 2))
      throw InvalidArgument("angle of incidence must lie in [0, pi/2)");
  }
  if (kind == ElementKind::curved_mirror) {
    if (radius_of_curvature == 0.0 || !std::isfinite(radius_of_curvature))
      throw InvalidArgument("curved mirror needs a finite nonzero radius of curvature");
  }
}

double OpticalElement::geometric_length() const {
  return (kind == ElementKind::free_space || kind == ElementKind::dielectric_slab) ? length
                                                                                   : 0.0;
}

double OpticalElement::optical_length() const {
  if (kind == ElementKind::dielectric_slab) return length * refractive_index;
  return geometric_length();
}

double effective_radius(const OpticalElement& mirror, TransversePlane plane) {
  if (mirror.kind != ElementKind::curved_mirror)
    throw InvalidArgument("effective radius is defined for curved mirrors only");
  mirror.validate();
  const double c = std::cos(mirror.angle_of_incidence);
  return plane == TransversePlane::tangential ? mirror.radius_of_curvature * c
                                              : mirror.radius_of_curvature / c;
}

void CavityLayout::validate() const {
  if (elements.empty()) throw InvalidArgument("cavity layout has no elements");
  if (!(wavelength_vacuum > 0.0)) throw InvalidArgument("wavelength must be positive");
  for (const auto& e : elements) e.validate();
  if (!(geometric_length() > 0.0)) throw InvalidArgument("round-trip length must be positive");
  if (!(optical_path_length() > 0.0))
    throw InvalidArgument("round-trip optical path length must be positive");
  if (distance) {
    if (distance->span.empty() || distance->adjustable.empty())
      throw InvalidArgument("distance parameter needs span and adjustable elements");
    for (std::size_t i : distance->span)
      if (i >= elements.size()) throw InvalidArgument("distance span index out of range");
    for (std::size_t i : distance->adjustable) {
      if (std::find(distance->span.begin(), distance->span.end(), i) == distance->span.end())
        throw InvalidArgument("adjustable element is not part of the distance span");
      if (elements[i].kind != ElementKind::free_space &&
          elements[i].kind != ElementKind::dielectric_slab)
        throw InvalidArgument("adjustable element must have a length");
    }
  }
  if (output_coupler) {
    if (output_coupler->element >= elements.size())
      throw InvalidArgument("output coupler index out of range");
    if (!is_mirror(elements[output_coupler->element].kind))
      throw InvalidArgument("output coupler must be a mirror");
    if (!(output_coupler->substrate_index >= 1.0))
      throw InvalidArgument("substrate index must be >= 1");
  }
}

double CavityLayout::geometric_length() const {
  return std::accumulate(elements.begin(), elements.end(), 0.0,
                         [](double s, const OpticalElement& e) { return s + e.geometric_length(); });
}

double CavityLayout::optical_path_length() const {
  return std::accumulate(elements.begin(), elements.end(), 0.0,
                         [](double s, const OpticalElement& e) { return s + e.optical_length(); });
}

double CavityLayout::reference_index() const {
  for (const auto& e : elements) {
    if (e.kind == ElementKind::dielectric_slab) return e.refractive_index;
    if (e.kind == ElementKind::free_space) return 1.0;
  }
  return 1.0;
}

double CavityLayout::mirror_distance() const {
  if (!distance) throw InvalidArgument("layout has no mirror-distance parameter");
  double d = 0.0;
  for (std::size_t i : distance->span) d += elements.at(i).geometric_length();
  return d;
}

CavityLayout CavityLayout::with_mirror_distance(double d) const {
  const double delta = d - mirror_distance();
  CavityLayout out = *this;
  const double share = delta / static_cast<double>(distance->adjustable.size());
  for (std::size_t i : distance->adjustable) {
    out.elements[i].length += share;
    if (out.elements[i].length < 0.0) {
      std::ostringstream msg;
      msg << "mirror distance " << d * 1e3 << " mm is not constructible with this layout";
      throw InvalidArgument(msg.str());
    }
  }
  return out;
}

CavityLayout CavityLayout::rotated(std::size_t first) const {
  const std::size_t n = elements.size();
  if (first >= n) throw InvalidArgument("rotation start index out of range");
  CavityLayout out = *this;
  std::rotate(out.elements.begin(), out.elements.begin() + static_cast<std::ptrdiff_t>(first),
              out.elements.end());
  auto remap = [&](std::size_t i) { return (i + n - first) % n; };
  if (out.distance) {
    for (auto& i : out.distance->span) i = remap(i);
    for (auto& i : out.distance->adjustable) i = remap(i);
  }
  if (out.output_coupler) out.output_coupler->element = remap(out.output_coupler->element);
  const std::string& label = elements[first].label;
  out.reference_plane = "entry of " + (label.empty() ? "element " + std::to_string(first) : label);
  return out;
}

CavityLayout triangle_ring_layout(const TriangleRingDesign& design) {
  const double air = 0.5 * (design.mirror_distance - design.crystal_length);
  if (air < 0.0) throw InvalidArgument("crystal does not fit between the curved mirrors");
  const double half = 0.5 * design.crystal_length;
  CavityLayout layout;
  layout.wavelength_vacuum = design.wavelength;
  layout.reference_plane = "crystal center";
  layout.elements = {
      OpticalElement::slab(half, design.crystal_index, "crystal"),
      OpticalElement::free_space(air, "long edge"),
      OpticalElement::curved_mirror(design.mirror_radius, design.curved_aoi, "output coupler"),
      OpticalElement::free_space(design.short_edge, "short edge"),
      OpticalElement::flat_mirror(design.flat_aoi, "fold mirror"),
      OpticalElement::free_space(design.short_edge, "short edge"),
      OpticalElement::curved_mirror(design.mirror_radius, design.curved_aoi, "hr mirror"),
      OpticalElement::free_space(air, "long edge"),
      OpticalElement::slab(half, design.crystal_index, "crystal"),
  };
  layout.distance = DistanceParameter{{0, 1, 7, 8}, {1, 7}};
  layout.output_coupler = OutputCoupler{2, design.substrate_index};
  layout.validate();
  return layout;
}

double AxisMode::waist_radius() const {
  return std::sqrt(wavelength_medium * q.imag() / M_PI);
}

double AxisMode::waist_offset() const { return -q.real(); }

double AxisMode::beam_radius() const {
  const std::complex<double> inv = 1.0 / q;
  return std::sqrt(-wavelength_medium / (M_PI * inv.imag()));
}

double AxisMode::wavefront_radius() const {
  const double re = (1.0 / q).real();
  return re == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / re;
}

UnstableCavityError::UnstableCavityError(TransversePlane plane, double half_trace)
    : PhysicsError("cavity is unstable in the " + std::string(to_string(plane)) +
                   " plane (|(a+d)/2| = " + std::to_string(std::abs(half_trace)) + " >= 1)"),
      plane_(plane),
      half_trace_(half_trace) {}

AxisMode eigenmode(const CavityLayout& layout, TransversePlane plane) {
  const RayMatrix<double> m = roundtrip_matrix<double>(layout, plane);
  const double half = stability_parameter(m);
  const double a = m(0, 0), b = m(0, 1), d = m(1, 1);
  const double scale = layout.geometric_length();
  if (std::abs(b) <= 1e-15 * scale && std::abs(a - d) <= 1e-12)
    throw PhysicsError("round-trip matrix is degenerate (b = 0, a = d); eigenmode undetermined");
  if (!is_stable(half)) throw UnstableCavityError(plane, half);
  const std::complex<double> inv_q((d - a) / (2.0 * b), -std::sqrt(1.0 - half * half) / std::abs(b));
  const double n = layout.reference_index();
  return AxisMode{n / inv_q, layout.wavelength_vacuum / n};
}

GaussianMode eigenmode(const CavityLayout& layout) {
  GaussianMode mode;
  mode.wavelength_vacuum = layout.wavelength_vacuum;
  mode.refractive_index = layout.reference_index();
  for (TransversePlane p : kTransversePlanes) mode.axis(p) = eigenmode(layout, p);
  return mode;
}

GaussianMode propagate(const GaussianMode& mode, std::span<const OpticalElement> elements,
                       double n_out) {
  if (!(n_out >= 1.0)) throw InvalidArgument("output refractive index must be >= 1");
  GaussianMode out = mode;
  out.refractive_index = n_out;
  for (TransversePlane p : kTransversePlanes) {
    RayMatrix<double> m = RayMatrix<double>::Identity();
    for (const auto& e : elements) m = element_matrix<double>(e, p) * m;
    const std::complex<double> reduced = mode.axis(p).q / mode.refractive_index;
    out.axis(p) = AxisMode{n_out * transform_q(m, reduced), mode.wavelength_vacuum / n_out};
  }
  return out;
}

RayMatrix<double> extraction_lens(const OpticalElement& mirror, double substrate_index,
                                  TransversePlane plane) {
  RayMatrix<double> m = RayMatrix<double>::Identity();
  if (mirror.kind != ElementKind::curved_mirror || substrate_index == 1.0) return m;
  const double focal = -effective_radius(mirror, plane) / (substrate_index - 1.0);
  m(1, 0) = -1.0 / focal;
  return m;
}

GaussianMode output_mode(const CavityLayout& layout) {
  if (!layout.output_coupler) throw InvalidArgument("layout has no output coupler");
  const std::size_t oc = layout.output_coupler->element;
  const GaussianMode inside = eigenmode(layout);
  GaussianMode at_coupler =
      propagate(inside, std::span<const OpticalElement>(layout.elements.data(), oc), 1.0);
  for (TransversePlane p : kTransversePlanes) {
    const auto lens = extraction_lens(layout.elements[oc], layout.output_coupler->substrate_index, p);
    at_coupler.axis(p).q = transform_q(lens, at_coupler.axis(p).q);
  }
  return at_coupler;
}

std::vector<double> distance_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidArgument("distance grid needs lo <= hi and a positive step");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-3));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = lo + static_cast<double>(i) * step;
  return grid;
}

std::vector<ScanPoint> waist_scan(const CavityLayout& layout_template,
                                  std::span<const double> distances, TransversePlane plane) {
  if (distances.empty()) throw InvalidArgument("waist scan over an empty distance range");
  std::vector<ScanPoint> out;
  out.reserve(distances.size());
  for (double d : distances) {
    const CavityLayout layout = layout_template.with_mirror_distance(d);
    ScanPoint point;
    point.mirror_distance = d;
    point.half_trace = stability_parameter(roundtrip_matrix<double>(layout, plane));
    if (is_stable(point.half_trace)) point.waist = eigenmode(layout, plane).waist_radius();
    out.push_back(point);
  }
  return out;
}

std::vector<WaistScanRow> waist_scan(const CavityLayout& layout_template,
                                     std::span<const double> distances) {
  const auto t = waist_scan(layout_template, distances, TransversePlane::tangential);
  const auto s = waist_scan(layout_template, distances, TransversePlane::sagittal);
  std::vector<WaistScanRow> rows(distances.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = {distances[i], t[i].waist, s[i].waist};
  return rows;
}

std::vector<double> waist_crossings(std::span<const WaistScanRow> rows) {
  std::vector<double> crossings;
  std::optional<std::pair<double, double>> last;  // (d, difference) of last nonzero stable row
  for (const auto& row : rows) {
    if (!row.tangential || !row.sagittal) {
      last.reset();
      continue;
    }
    const double diff = *row.tangential - *row.sagittal;
    if (diff == 0.0) continue;
    if (last && (last->second < 0.0) != (diff < 0.0)) {
      const double t = last->second / (last->second - diff);
      crossings.push_back(last->first + t * (row.mirror_distance - last->first));
    }
    last = std::make_pair(row.mirror_distance, diff);
  }
  return crossings;
}

double find_circular_waist_distance(const CavityLayout& layout_template, double d_lo,
                                    double d_hi, double tolerance) {
  if (!(d_hi > d_lo)) throw InvalidArgument("bracket must satisfy d_lo < d_hi");
  double scale = 0.0;
  auto difference = [&](double d) {
    const CavityLayout layout = layout_template.with_mirror_distance(d);
    const double wt = eigenmode(layout, TransversePlane::tangential).waist_radius();
    const double ws = eigenmode(layout, TransversePlane::sagittal).waist_radius();
    scale = std::max(scale, wt);
    return wt - ws;
  };

  double f_lo = difference(d_lo);
  double f_hi = difference(d_hi);
  const double f_mid = difference(0.5 * (d_lo + d_hi));
  const double flat = 1e-12 * scale;
  if (std::abs(f_lo) <= flat && std::abs(f_hi) <= flat && std::abs(f_mid) <= flat)
    throw NumericalError("degenerate bracket: tangential and sagittal waists agree everywhere");
  if (f_lo == 0.0) return d_lo;
  if (f_hi == 0.0) return d_hi;

  if ((f_lo < 0.0) != (f_hi < 0.0)) {
    double lo = d_lo, hi = d_hi;
    while (hi - lo > tolerance) {
      const double mid = 0.5 * (lo + hi);
      const double f = difference(mid);
      if (f == 0.0) return mid;
      if ((f < 0.0) == (f_lo < 0.0)) {
        lo = mid;
        f_lo = f;
      } else {
        hi = mid;
        f_hi = f;
      }
    }
    return lo + f_lo / (f_lo - f_hi) * (hi - lo);
  }

  // Tangent root: the difference touches zero without changing sign.
  auto [d_best, neg_abs] = golden_maximize([&](double d) { return -std::abs(difference(d)); },
                                           d_lo, d_hi, tolerance);
  if (-neg_abs <= 1e-9 * scale) return d_best;
  throw NumericalError("no sign change of the waist difference in the bracket");
}

double mode_overlap(const AxisMode& a, const AxisMode& b) {
  if (std::abs(a.wavelength_medium - b.wavelength_medium) >
      1e-12 * std::max(a.wavelength_medium, b.wavelength_medium))
    throw InvalidArgument("mode overlap requires equal wavelengths");
  if (!(a.q.imag() > 0.0) || !(b.q.imag() > 0.0))
    throw InvalidArgument("mode overlap requires confined beams (Im q > 0)");
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> ca = i / a.q;
  const std::complex<double> cb = i / b.q;
  const double eta = 2.0 * std::sqrt(ca.real() * cb.real()) / std::abs(ca + std::conj(cb));
  return std::min(eta, 1.0);
}

double mode_overlap(const GaussianMode& a, const GaussianMode& b) {
  if (std::abs(a.wavelength_vacuum - b.wavelength_vacuum) > 1e-12 * a.wavelength_vacuum ||
      a.refractive_index != b.refractive_index)
    throw InvalidArgument("mode overlap requires equal wavelengths in a common medium");
  return mode_overlap(a.tangential, b.tangential) * mode_overlap(a.sagittal, b.sagittal);
}

CircularMatch best_circular_match(const GaussianMode& mode) {
  // Work with c = i/q = x + i y: x sets the spot size, y the wavefront.
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> ct = i / mode.tangential.q;
  const std::complex<double> cs = i / mode.sagittal.q;
  const double y_lo = std::min(ct.imag(), cs.imag());
  const double y_hi = std::max(ct.imag(), cs.imag());

  auto log_overlap = [&](double x, double y) {
    const double dt = std::norm(std::complex<double>(x + ct.real(), y - ct.imag()));
    const double ds = std::norm(std::complex<double>(x + cs.real(), y - cs.imag()));
    return std::log(x) - 0.5 * std::log(dt) - 0.5 * std::log(ds);
  };
  auto best_y = [&](double x) {
    if (y_hi - y_lo <= 1e-15 * std::abs(y_hi)) return std::make_pair(y_lo, log_overlap(x, y_lo));
    return golden_maximize([&](double y) { return log_overlap(x, y); }, y_lo, y_hi,
                           1e-12 * (y_hi - y_lo));
  };
  const double u_lo = std::log(std::min(ct.real(), cs.real())) - 2.0;
  const double u_hi = std::log(std::max(ct.real(), cs.real())) + 2.0;
  const auto [u, value] =
      golden_maximize([&](double u) { return best_y(std::exp(u)).second; }, u_lo, u_hi, 1e-12);
  (void)value;
  const double x = std::exp(u);
  const double y = best_y(x).first;

  CircularMatch match;
  match.circular = AxisMode{i / std::complex<double>(x, y), mode.tangential.wavelength_medium};
  GaussianMode circular = mode;
  circular.tangential = match.circular;
  circular.sagittal = match.circular;
  match.efficiency = mode_overlap(mode, circular);
  return match;
}

Linewidth linewidth(double transmissivity, double optical_path_length) {
  if (!(transmissivity > 0.0 && transmissivity < 1.0))
    throw InvalidArgument("output coupler transmissivity must lie in (0, 1)");
  if (!(optical_path_length > 0.0)) throw InvalidArgument("optical path length must be positive");
  Linewidth lw;
  lw.f_hwhm = kSpeedOfLight * transmissivity / (4.0 * M_PI * optical_path_length);
  lw.free_spectral_range = kSpeedOfLight / optical_path_length;
  lw.finesse = lw.free_spectral_range / (2.0 * lw.f_hwhm);
  return lw;
}

}  // namespace opo
