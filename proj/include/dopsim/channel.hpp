#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dopsim/polcore.hpp"
#include "dopsim/random.hpp"
#include "dopsim/sources.hpp"

namespace dopsim {

/// Instantaneous birefringence of the fiber: a Poincare rotation about `axis`
/// whose angle scales as 1/wavelength from `retardance_ref` at
/// `ref_wavelength_nm`.
class FiberState {
 public:
  FiberState(Vec3 axis, double retardance_ref, double ref_wavelength_nm);

  Vec3 axis() const noexcept { return axis_; }
  double retardance_ref() const noexcept { return retardance_ref_; }
  double ref_wavelength_nm() const noexcept { return ref_wavelength_nm_; }
  /// Rotation angle seen by a line at `wavelength_nm`.
  double retardance_at(double wavelength_nm) const { return retardance_ref_ * ref_wavelength_nm_ / wavelength_nm; }

 private:
  Vec3 axis_;
  double retardance_ref_;
  double ref_wavelength_nm_;
};

/// Stochastic law of the shaken fiber: spherical Brownian motion of the axis
/// and an Ornstein-Uhlenbeck retardance reverting to `retardance_mean`.
struct FluctuationProcess {
  double correlation_time_s = 0.1;
  /// Per-component tangent-plane step variance per second; the axis
  /// autocorrelation decays as exp(-axis_diffusion * t).
  double axis_diffusion = 10.0;
  double retardance_sigma = 0.5;
  double retardance_mean = 1.5707963267948966;
  std::uint64_t seed = 1;

  /// Throws InvalidState on non-positive correlation time or negative rates.
  void validate() const;
};

/// First-order PMD element: differential group delay and principal-state axis.
struct PmdElement {
  double dgd_s = 0.0;
  Vec3 axis{1.0, 0.0, 0.0};

  void validate() const;
};

/// Rotate every line by the fiber's wavelength-dependent retardance.
SourceSpec apply_fiber(const SourceSpec& src, const FiberState& fiber);

/// One step of the fluctuation process.
FiberState evolve(const FiberState& fiber, double dt, const FluctuationProcess& process, Rng& rng);

/// Rotate each line about the PSP axis by 2 pi (nu - nu_carrier) dgd.
SourceSpec apply_pmd(const SourceSpec& src, const PmdElement& el, double carrier_nm);

/// |2phi after - 2phi before| for a two-line source sent through `fiber`.
double angle_preservation_error(const SourceSpec& src, const FiberState& fiber);

struct TrajectorySample {
  double time_s;
  FiberState state;
};

/// `steps` evolutions starting from `initial`; sample 0 is the initial state.
/// The stream is seeded from `process.seed`.
std::vector<TrajectorySample> simulate_trajectory(const FiberState& initial, const FluctuationProcess& process,
                                                  double dt, std::size_t steps);

/// CSV with header time_s,axis1,axis2,axis3,retardance_rad.
void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> samples);

/// 1 - |mean of the unit vectors|: 0 for a fixed direction, close to 1 when
/// the directions cover the sphere or a great circle evenly.
double angular_coverage(std::span<const Vec3> directions);

}  // namespace dopsim
