#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopsim/polcore.hpp"

namespace dopsim {

/// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

/// One monochromatic line of a beam.
struct SpectralLine {
  double wavelength_nm;
  double intensity;
  DensityMatrix polarization;

  PoincareVector poincare() const { return poincare_from_density(polarization); }
};

/// A beam as an ordered set of mutually incoherent spectral lines.
class SourceSpec {
 public:
  /// Requires at least one line, strictly increasing wavelengths, positive
  /// wavelengths, non-negative intensities and a positive total intensity.
  explicit SourceSpec(std::vector<SpectralLine> lines);

  const std::vector<SpectralLine>& lines() const noexcept { return lines_; }
  std::size_t size() const noexcept { return lines_.size(); }
  const SpectralLine& operator[](std::size_t i) const { return lines_[i]; }
  double total_intensity() const;
  /// Intensity-weighted mixture of all line states.
  DensityMatrix mixed_state() const;
  StokesVector stokes() const;

 private:
  std::vector<SpectralLine> lines_;
};

/// Two mutually incoherent pure lasers. Lines are stored in wavelength order.
/// Rejects equal wavelengths, |m| != 1 (within kInputTol) and i1 + i2 <= 0.
SourceSpec two_laser_source(double lambda1_nm, double lambda2_nm, double i1, double i2,
                            const PoincareVector& m1, const PoincareVector& m2);

/// DOP of the full mixture of lines.
double source_dop(const SourceSpec& src);

/// Closed-form DOP of two pure lines separated by the sphere angle two_phi:
/// [(I1+I2)^2 - 4 I1 I2 sin^2(phi)]^(1/2) / (I1+I2).
double two_line_dop(double i1, double i2, double two_phi);

/// Sphere angle 2phi at which two pure lines of intensities i1, i2 mix to
/// `dop`. Throws InvalidState when dop < |i1 - i2| / (i1 + i2).
double two_phi_for_dop(double i1, double i2, double dop);

/// Wavelength spacing of the +/- bitrate sidebands around `carrier_nm`.
double sideband_spacing_nm(double carrier_nm, double bitrate_hz);

/// Intensity split (minus sideband, carrier, plus sideband).
using CarrierSplit = std::array<double, 3>;
inline constexpr CarrierSplit kDefaultCarrierSplit{0.25, 0.5, 0.25};

/// Carrier plus the two modulation sidebands at carrier_nm -/+ delta, with
/// delta = carrier^2 * bitrate / c. The "minus" sideband is the lower optical
/// frequency, i.e. the longer wavelength.
SourceSpec modulated_carrier_source(double carrier_nm, double bitrate_hz, const PoincareVector& m_minus,
                                    const PoincareVector& m_carrier, const PoincareVector& m_plus,
                                    const CarrierSplit& split = kDefaultCarrierSplit);

/// Point at `angle_rad` on one of the three coordinate great circles:
/// 0 -> s1s2 plane, 1 -> s2s3 plane, 2 -> s3s1 plane.
PoincareVector great_circle_point(int circle_index, double angle_rad);

/// `count` states on the circle starting at angle 0 with `step_deg` spacing.
std::vector<PoincareVector> great_circle_states(int circle_index, int count, double step_deg);

/// {"lines": [{"wavelength_nm", "intensity", "poincare": [m1, m2, m3]}]}
nlohmann::json to_json(const SourceSpec& src);
SourceSpec source_from_json(const nlohmann::json& doc);

}  // namespace dopsim
